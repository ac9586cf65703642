//! Seed derivation.
//!
//! Every stream in a run is derived from one master seed with SplitMix64, so
//! other implementations can reproduce the same per-trial and per-node seeds:
//!
//! * trial seed: `splitmix64(master ^ splitmix64(trial_index))`
//! * named stream: `splitmix64(parent ^ fnv1a64(name))`

/// One SplitMix64 output step applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn trial_seed(master: u64, trial_index: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial_index))
}

pub fn named_seed(parent: u64, name: &str) -> u64 {
    splitmix64(parent ^ fnv1a64(name.as_bytes()))
}
