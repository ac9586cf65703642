use std::collections::BTreeMap;
use std::sync::Arc;

use super::{parse::validate, NodeSpec, Scalar, TreeDefError, TreeDocument};
use crate::bt::{BehaviorTree, Inverter, NodeCategory, NodeStatus, Repeater, Sequential, TreeNode};
use crate::learning::{
    Executor, InterruptPolicy, LearningActionNode, LearningCompositeNode, LearningCore, RewardHook,
    StateExtractor,
};
use crate::rl::{ActionIndex, DiscreteState, LearnerParams, QLearner};
use crate::seed::named_seed;

type Factory<W> = Arc<
    dyn Fn(&NodeSpec, &BuildContext<'_, W>, Vec<TreeNode<W>>) -> Result<TreeNode<W>, TreeDefError>
        + Send
        + Sync,
>;

struct KindEntry<W> {
    category: NodeCategory,
    factory: Factory<W>,
}

/// Node factories plus the named hooks learning nodes bind to.
pub struct Registry<W> {
    kinds: BTreeMap<String, KindEntry<W>>,
    extractors: BTreeMap<String, StateExtractor<W>>,
    rewards: BTreeMap<String, RewardHook<W>>,
    executors: BTreeMap<String, Executor<W>>,
    learner_defaults: LearnerParams,
    learner_overrides: BTreeMap<String, LearnerParams>,
    seed: u64,
}

/// Read access to the registry while one node is being built.
pub struct BuildContext<'a, W> {
    registry: &'a Registry<W>,
}

impl<W: 'static> BuildContext<'_, W> {
    pub fn extractor(&self, node: &NodeSpec) -> Result<StateExtractor<W>, TreeDefError> {
        let name = required_str(node, "state")?;
        lookup(&self.registry.extractors, node, "state extractor", name)
    }

    pub fn reward(&self, node: &NodeSpec) -> Result<RewardHook<W>, TreeDefError> {
        let name = required_str(node, "reward")?;
        lookup(&self.registry.rewards, node, "reward hook", name)
    }

    pub fn executor(&self, node: &NodeSpec) -> Result<Executor<W>, TreeDefError> {
        let name = required_str(node, "executor")?;
        lookup(&self.registry.executors, node, "executor", name)
    }

    /// Registry defaults, then a per-node override, then `alpha`, `gamma` and
    /// `epsilon` node properties. The seed is derived from the node id.
    pub fn learner_params(&self, node: &NodeSpec) -> Result<LearnerParams, TreeDefError> {
        let reg = self.registry;
        let mut params = reg
            .learner_overrides
            .get(&node.id)
            .copied()
            .unwrap_or(reg.learner_defaults);
        if let Some(alpha) = optional_f64(node, "alpha")? {
            params.alpha = alpha;
        }
        if let Some(gamma) = optional_f64(node, "gamma")? {
            params.gamma = gamma;
        }
        if let Some(eps) = optional_f64(node, "epsilon")? {
            params.epsilon_start = eps;
            params.epsilon_floor = params.epsilon_floor.min(eps);
        }
        params.rng_seed = named_seed(reg.seed, &node.id);
        params
            .validate()
            .map_err(|e| TreeDefError::InvalidProperty {
                node: node.id.clone(),
                key: "learner".into(),
                message: e.to_string(),
            })?;
        Ok(params)
    }

    fn learning_core(
        &self,
        node: &NodeSpec,
        n_actions: usize,
    ) -> Result<LearningCore<W>, TreeDefError> {
        let params = self.learner_params(node)?;
        let learner =
            QLearner::new(n_actions, params).map_err(|e| TreeDefError::InvalidProperty {
                node: node.id.clone(),
                key: "learner".into(),
                message: e.to_string(),
            })?;
        let policy = match optional_str(node, "interrupt")? {
            None | Some("update") => InterruptPolicy::Update,
            Some("discard") => InterruptPolicy::Discard,
            Some(other) => {
                return Err(TreeDefError::InvalidProperty {
                    node: node.id.clone(),
                    key: "interrupt".into(),
                    message: format!("expected 'update' or 'discard', got '{other}'"),
                })
            }
        };
        Ok(
            LearningCore::new(learner, self.extractor(node)?, self.reward(node)?)
                .with_interrupt_policy(policy),
        )
    }
}

impl<W: 'static> Default for Registry<W> {
    fn default() -> Self {
        Self::new()
    }
}

impl<W: 'static> Registry<W> {
    /// A registry with every built-in kind.
    pub fn new() -> Self {
        let mut reg = Self {
            kinds: BTreeMap::new(),
            extractors: BTreeMap::new(),
            rewards: BTreeMap::new(),
            executors: BTreeMap::new(),
            learner_defaults: LearnerParams::default(),
            learner_overrides: BTreeMap::new(),
            seed: 0,
        };
        for (kind, seq) in [
            ("Sequence", Sequential::sequence()),
            ("Priority", Sequential::priority()),
            ("MemSequence", Sequential::mem_sequence()),
            ("MemPriority", Sequential::mem_priority()),
        ] {
            reg.register(kind, NodeCategory::Composite, move |_, _, children| {
                Ok(TreeNode::new(NodeCategory::Composite, kind, seq, children))
            });
        }
        reg.register("Parallel", NodeCategory::Composite, |spec, _, children| {
            let success = required_count(spec, "success")?;
            let failure = required_count(spec, "failure")?;
            Ok(TreeNode::parallel(success, failure, children))
        });
        reg.register("Inverter", NodeCategory::Decorator, |_, _, children| {
            Ok(TreeNode::new(
                NodeCategory::Decorator,
                "Inverter",
                Inverter,
                children,
            ))
        });
        reg.register("Repeater", NodeCategory::Decorator, |spec, _, children| {
            let count = required_count(spec, "count")?;
            let count = u32::try_from(count).map_err(|_| TreeDefError::InvalidProperty {
                node: spec.id.clone(),
                key: "count".into(),
                message: "too large".into(),
            })?;
            Ok(TreeNode::new(
                NodeCategory::Decorator,
                "Repeater",
                Repeater::new(count),
                children,
            ))
        });
        reg.register(
            "LearningComposite",
            NodeCategory::Composite,
            |spec, ctx, children| {
                let core = ctx.learning_core(spec, children.len())?;
                Ok(LearningCompositeNode::new(core).into_node(children))
            },
        );
        reg.register("LearningAction", NodeCategory::Action, |spec, ctx, _| {
            let labels: Vec<String> = required_str(spec, "actions")?
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if labels.is_empty() {
                return Err(TreeDefError::InvalidProperty {
                    node: spec.id.clone(),
                    key: "actions".into(),
                    message: "needs at least one action".into(),
                });
            }
            let core = ctx.learning_core(spec, labels.len())?;
            Ok(LearningActionNode::new(core, ctx.executor(spec)?, labels).into_node())
        });
        reg
    }

    pub fn register(
        &mut self,
        kind: &str,
        category: NodeCategory,
        factory: impl Fn(
                &NodeSpec,
                &BuildContext<'_, W>,
                Vec<TreeNode<W>>,
            ) -> Result<TreeNode<W>, TreeDefError>
            + Send
            + Sync
            + 'static,
    ) -> &mut Self {
        self.kinds.insert(
            kind.to_string(),
            KindEntry {
                category,
                factory: Arc::new(factory),
            },
        );
        self
    }

    pub fn register_action(
        &mut self,
        kind: &str,
        run: impl Fn(&mut W) -> NodeStatus + Send + Sync + 'static,
    ) -> &mut Self {
        let run = Arc::new(run);
        let owned = kind.to_string();
        self.register(kind, NodeCategory::Action, move |_, _, _| {
            let run = Arc::clone(&run);
            Ok(TreeNode::action(owned.clone(), move |w: &mut W| run(w)))
        })
    }

    pub fn register_condition(
        &mut self,
        kind: &str,
        check: impl Fn(&W) -> bool + Send + Sync + 'static,
    ) -> &mut Self {
        let check = Arc::new(check);
        let owned = kind.to_string();
        self.register(kind, NodeCategory::Condition, move |_, _, _| {
            let check = Arc::clone(&check);
            Ok(TreeNode::condition(owned.clone(), move |w: &W| check(w)))
        })
    }

    pub fn register_extractor(
        &mut self,
        name: &str,
        f: impl Fn(&W) -> DiscreteState + Send + Sync + 'static,
    ) -> &mut Self {
        self.extractors.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn register_reward(
        &mut self,
        name: &str,
        f: impl Fn(&W, &crate::learning::RewardInput) -> f64 + Send + Sync + 'static,
    ) -> &mut Self {
        self.rewards.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn register_executor(
        &mut self,
        name: &str,
        f: impl Fn(&mut W, ActionIndex) -> NodeStatus + Send + Sync + 'static,
    ) -> &mut Self {
        self.executors.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn set_learner_defaults(&mut self, params: LearnerParams) -> &mut Self {
        self.learner_defaults = params;
        self
    }

    /// Parameters for the learning node with document id `node`.
    pub fn set_learner_params(&mut self, node: &str, params: LearnerParams) -> &mut Self {
        self.learner_overrides.insert(node.to_string(), params);
        self
    }

    /// Parent seed for every learner built from now on.
    pub fn set_seed(&mut self, seed: u64) -> &mut Self {
        self.seed = seed;
        self
    }

    pub fn is_registered(&self, kind: &str) -> bool {
        self.kinds.contains_key(kind)
    }

    /// Instantiates `doc`. Node labels are the document ids.
    pub fn build_tree(&self, doc: &TreeDocument) -> Result<BehaviorTree<W>, TreeDefError> {
        validate(doc)?;
        for node in doc.nodes.values() {
            let entry =
                self.kinds
                    .get(&node.kind)
                    .ok_or_else(|| TreeDefError::UnregisteredKind {
                        kind: node.kind.clone(),
                    })?;
            let declared = doc.category_of(&node.kind).expect("validated");
            if declared != entry.category {
                return Err(TreeDefError::CategoryMismatch {
                    kind: node.kind.clone(),
                    declared,
                    registered: entry.category,
                });
            }
        }
        let ctx = BuildContext { registry: self };
        let root = self.build_node(doc, doc.root(), &ctx)?;
        Ok(BehaviorTree::new(root)?.with_title(doc.title.clone()))
    }

    fn build_node(
        &self,
        doc: &TreeDocument,
        spec: &NodeSpec,
        ctx: &BuildContext<'_, W>,
    ) -> Result<TreeNode<W>, TreeDefError> {
        let children = spec
            .child_ids()
            .into_iter()
            .map(|id| self.build_node(doc, &doc.nodes[id], ctx))
            .collect::<Result<Vec<_>, _>>()?;
        let entry = &self.kinds[&spec.kind];
        Ok((entry.factory)(spec, ctx, children)?.with_label(spec.id.clone()))
    }
}

fn property<'a>(node: &'a NodeSpec, key: &str) -> Option<&'a Scalar> {
    node.properties.get(key)
}

fn type_error(node: &NodeSpec, key: &str, expected: &'static str, found: &Scalar) -> TreeDefError {
    TreeDefError::PropertyType {
        node: node.id.clone(),
        key: key.to_string(),
        expected,
        found: found.type_name(),
    }
}

fn required<'a>(node: &'a NodeSpec, key: &str) -> Result<&'a Scalar, TreeDefError> {
    property(node, key).ok_or_else(|| TreeDefError::MissingProperty {
        node: node.id.clone(),
        key: key.to_string(),
    })
}

fn required_str<'a>(node: &'a NodeSpec, key: &str) -> Result<&'a str, TreeDefError> {
    let v = required(node, key)?;
    v.as_str().ok_or_else(|| type_error(node, key, "string", v))
}

fn optional_str<'a>(node: &'a NodeSpec, key: &str) -> Result<Option<&'a str>, TreeDefError> {
    match property(node, key) {
        None => Ok(None),
        Some(v) => v
            .as_str()
            .map(Some)
            .ok_or_else(|| type_error(node, key, "string", v)),
    }
}

fn optional_f64(node: &NodeSpec, key: &str) -> Result<Option<f64>, TreeDefError> {
    match property(node, key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| type_error(node, key, "number", v)),
    }
}

fn required_count(node: &NodeSpec, key: &str) -> Result<usize, TreeDefError> {
    let v = required(node, key)?;
    let n = v
        .as_i64()
        .ok_or_else(|| type_error(node, key, "integer", v))?;
    usize::try_from(n).map_err(|_| TreeDefError::InvalidProperty {
        node: node.id.clone(),
        key: key.to_string(),
        message: format!("must be non-negative, got {n}"),
    })
}

fn lookup<T: Clone>(
    map: &BTreeMap<String, T>,
    node: &NodeSpec,
    what: &'static str,
    name: &str,
) -> Result<T, TreeDefError> {
    map.get(name)
        .cloned()
        .ok_or_else(|| TreeDefError::UnknownBinding {
            node: node.id.clone(),
            what,
            name: name.to_string(),
        })
}
