use serde::{Deserialize, Serialize};
use std::fmt;

/// Result of ticking a node.
///
/// `Error` is a fault marker: every composite and decorator hands it straight
/// back to its parent, so it reaches the root within the same tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeStatus {
    Success,
    Failure,
    Running,
    Error,
}

impl NodeStatus {
    pub const ALL: [NodeStatus; 4] = [
        NodeStatus::Success,
        NodeStatus::Failure,
        NodeStatus::Running,
        NodeStatus::Error,
    ];

    /// `true` for `Success` and `Failure`.
    pub fn is_terminal(self) -> bool {
        matches!(self, NodeStatus::Success | NodeStatus::Failure)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Success => "SUCCESS",
            NodeStatus::Failure => "FAILURE",
            NodeStatus::Running => "RUNNING",
            NodeStatus::Error => "ERROR",
        }
    }
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<bool> for NodeStatus {
    fn from(ok: bool) -> Self {
        if ok {
            NodeStatus::Success
        } else {
            NodeStatus::Failure
        }
    }
}
