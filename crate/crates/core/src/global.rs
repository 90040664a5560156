//! Best-first search over mode sequences on an implicit graph whose edges are
//! sampled mode switches weighted by expected local cost-to-go.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Debug;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::horizon::HorizonDist;
use crate::local::{CostToGoTable, LocalModel};
use crate::model::{ContextSet, ContinuousState, GoalSpace, HybridState, ModeId};

/// Time window within which a traversal must reach its target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    /// Arrival-time distribution of the enabling context event, relative to the
    /// start of the traversal.
    Window(HorizonDist),
    /// No deadline (goal traversal): the best horizon for the current state.
    Free,
}

/// A search node: hybrid state plus expected steps since planning time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanNode {
    pub state: HybridState,
    pub elapsed: u32,
}

/// One sampled mode switch: where it must be taken, what it yields, and when
/// its enabling event is expected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSwitchSample<S> {
    pub switch: S,
    /// `c_p`, in the current mode.
    pub precondition: ContinuousState,
    /// State in the next mode, `c_e` plus its grounding.
    pub effect: HybridState,
    /// `P_{1:K}` relative to the node's time.
    pub horizon: HorizonDist,
    /// Expected steps from planning time to the switch.
    pub elapsed_after: u32,
}

/// Domain hooks consumed by the planner and the executive.
pub trait PlanningHooks {
    type Context;
    type Switch: Copy + Eq + Debug;
    type SwitchKind: Copy + Eq + Debug;

    /// Mode switches available from `node` under `ctx`.
    fn next_valid_modes(&self, node: &PlanNode, ctx: &ContextSet<Self::Context>) -> Vec<(ModeId, Self::SwitchKind)>;

    /// Up to `n` grounded samples of the `kind` switch into `next`.
    fn sample_transitions(
        &self,
        ctx: &ContextSet<Self::Context>,
        node: &PlanNode,
        next: ModeId,
        kind: Self::SwitchKind,
        n: usize,
        rng: &mut dyn RngCore,
    ) -> Vec<ModeSwitchSample<Self::Switch>>;

    /// Mode-level heuristic; zero at the goal mode, need not be admissible.
    fn heuristic(&self, _mode: ModeId, _goal_mode: ModeId) -> f64 {
        0.0
    }

    /// Relative state `cont ∘ target` in `mode`.
    fn relative(&self, mode: ModeId, cont: &[f64], target: &[f64]) -> Vec<f64>;

    /// Expected cost of a traversal that its local table does not model
    /// (for instance waiting at an absorbing target for the switch event).
    fn traverse_surcharge(&self, _mode: ModeId, _rel: &[f64], _horizon: &HorizonDist) -> f64 {
        0.0
    }

    /// Extra edge weight charged for executing a switch.
    fn switch_weight(&self, _switch: &Self::Switch) -> f64 {
        0.0
    }

    /// `c_t ≈ c_p` under the domain metric (inclusive).
    fn at_transition(&self, state: &HybridState, target: &[f64]) -> bool;

    /// Whether the switch's enabling event is happening now.
    fn switch_ready(&self, _ctx: &ContextSet<Self::Context>, _state: &HybridState, _switch: &Self::Switch) -> bool {
        true
    }

    /// Current arrival-time distribution of the switch's enabling event,
    /// relative to now. `None` if the event can no longer happen.
    fn refresh_horizon(&self, ctx: &ContextSet<Self::Context>, switch: &Self::Switch) -> Option<HorizonDist>;

    /// Control used when holding position (pre-emption, no plan, passive modes).
    fn hold_control(&self, mode: ModeId) -> Vec<f64>;
}

/// How a mode's traversals are costed and executed.
pub enum ModePolicy {
    /// A cost-to-go table with the local model that produced it.
    Table {
        table: CostToGoTable,
        model: Box<dyn LocalModel + Send>,
    },
    /// The agent is carried; each step costs `step_cost` and control is a no-op.
    Passive { step_cost: f64 },
}

/// Expected traversal cost between two states of a mode.
pub trait EdgeWeightSource {
    /// `Σ_k P(k) J^k(rel)` for a window, `min_k J^k(rel)` for a free horizon.
    /// `Ok(None)` when the window has no mass inside the table horizon.
    fn traverse_weight(&self, mode: ModeId, rel: &[f64], horizon: &Horizon) -> Result<Option<f64>, PlanError>;
}

/// Per-mode local layer: tables for actively controlled modes, passive otherwise.
pub struct LocalLayer {
    modes: Vec<ModePolicy>,
}

impl LocalLayer {
    pub fn new(modes: Vec<ModePolicy>) -> Self {
        Self { modes }
    }

    pub fn policy(&self, mode: ModeId) -> Result<&ModePolicy, PlanError> {
        self.modes.get(mode.index()).ok_or(PlanError::MissingTable(mode.0))
    }

    pub fn table(&self, mode: ModeId) -> Option<&CostToGoTable> {
        match self.modes.get(mode.index()) {
            Some(ModePolicy::Table { table, .. }) => Some(table),
            _ => None,
        }
    }
}

/// `Σ_k P(k) J^k(rel)` over a table (window truncated to the table horizon),
/// or `min_k J^k(rel)` for a free horizon.
pub fn edge_weight(table: &CostToGoTable, rel: &[f64], horizon: &Horizon) -> Option<f64> {
    match horizon {
        Horizon::Free => Some(table.best_horizon(rel).1),
        Horizon::Window(p) => {
            let p = p.truncated(table.horizon)?;
            Some(table.mixture(&p, rel))
        }
    }
}

impl EdgeWeightSource for LocalLayer {
    fn traverse_weight(&self, mode: ModeId, rel: &[f64], horizon: &Horizon) -> Result<Option<f64>, PlanError> {
        match self.policy(mode)? {
            ModePolicy::Table { table, .. } => Ok(edge_weight(table, rel, horizon)),
            ModePolicy::Passive { step_cost } => match horizon {
                Horizon::Window(p) => Ok(Some(p.mean() * step_cost)),
                Horizon::Free => Err(PlanError::MissingTable(mode.0)),
            },
        }
    }
}

/// One element of a plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PlanStep<S> {
    /// Drive `mode` from the current state to `target` within `horizon`.
    Traverse {
        mode: ModeId,
        target: ContinuousState,
        horizon: Horizon,
        weight: f64,
    },
    /// Execute `switch`, expecting `effect` in the next mode.
    Switch { switch: S, effect: HybridState, weight: f64 },
}

/// Alternating traversal/switch sequence ending in the goal region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalPlan<S> {
    pub steps: Vec<PlanStep<S>>,
    /// Goal node's `g`, the sum of edge weights along the plan.
    pub cost: f64,
    pub expansions: usize,
}

impl<S> GlobalPlan<S> {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn switches(&self) -> impl Iterator<Item = &S> {
        self.steps.iter().filter_map(|s| match s {
            PlanStep::Switch { switch, .. } => Some(switch),
            _ => None,
        })
    }

    pub fn num_switches(&self) -> usize {
        self.switches().count()
    }

    /// Sum of step weights; equals `cost` up to rounding.
    pub fn edge_sum(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                PlanStep::Traverse { weight, .. } | PlanStep::Switch { weight, .. } => *weight,
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Samples per candidate switch.
    pub samples: usize,
    /// Continuous coordinates are rounded to this quantum for duplicate detection.
    pub quantum: f64,
    /// Give up (no path) after this many expansions.
    pub max_expansions: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            samples: 8,
            quantum: 1e-6,
            max_expansions: 100_000,
        }
    }
}

/// Key of a node in the closed set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct NodeKey {
    mode: u16,
    grounding: Option<u32>,
    elapsed: u32,
    cont: Vec<i64>,
}

fn node_key(node: &PlanNode, quantum: f64) -> NodeKey {
    NodeKey {
        mode: node.state.mode.0,
        grounding: node.state.grounding,
        elapsed: node.elapsed,
        cont: node.state.cont.iter().map(|v| libm::round(v / quantum) as i64).collect(),
    }
}

/// Priority-queue entry: lexicographic ⟨f, g⟩, then insertion order.
#[derive(Clone, Copy, Debug)]
struct Entry {
    f: f64,
    g: f64,
    seq: u64,
    slot: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Reversed so that `BinaryHeap` pops the smallest key.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.g.total_cmp(&self.g))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Search node with its backpointer.
#[derive(Clone, Debug)]
pub struct SearchNode<S> {
    pub node: PlanNode,
    pub g: f64,
    pub f: f64,
    /// Predecessor slot and the edge taken from it.
    pub parent: Option<(usize, Edge<S>)>,
    /// A goal entry stands for reaching the goal region.
    pub is_goal: bool,
}

#[derive(Clone, Debug)]
pub enum Edge<S> {
    Switch {
        sample: ModeSwitchSample<S>,
        traverse: f64,
        switch: f64,
    },
    Goal {
        target: ContinuousState,
        weight: f64,
    },
}

/// Best-first search from `start` to `goal`. Returns `Ok(None)` when the
/// queue empties (or the expansion budget is spent) without reaching the goal.
#[allow(clippy::too_many_arguments)]
pub fn global_plan<H: PlanningHooks>(
    start: &HybridState,
    goal: &GoalSpace,
    ctx: &ContextSet<H::Context>,
    hooks: &H,
    weights: &dyn EdgeWeightSource,
    config: &SearchConfig,
    rng: &mut dyn RngCore,
) -> Result<Option<GlobalPlan<H::Switch>>, PlanError> {
    if config.samples == 0 {
        return Err(PlanError::BadHorizon("sample count must be positive"));
    }
    let mut arena: Vec<SearchNode<H::Switch>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut closed: BTreeMap<NodeKey, ()> = BTreeMap::new();
    let mut seq = 0u64;
    let mut push = |arena: &mut Vec<SearchNode<H::Switch>>, heap: &mut BinaryHeap<Entry>, n: SearchNode<H::Switch>| {
        heap.push(Entry {
            f: n.f,
            g: n.g,
            seq,
            slot: arena.len(),
        });
        seq += 1;
        arena.push(n);
    };
    let root = PlanNode {
        state: start.clone(),
        elapsed: 0,
    };
    let h0 = hooks.heuristic(start.mode, goal.mode);
    push(
        &mut arena,
        &mut heap,
        SearchNode {
            node: root,
            g: 0.0,
            f: h0,
            parent: None,
            is_goal: false,
        },
    );
    let mut expansions = 0usize;
    while let Some(top) = heap.pop() {
        let slot = top.slot;
        if arena[slot].is_goal || crate::model::is_goal(&arena[slot].node.state, goal) {
            return Ok(Some(backtrace(&arena, slot, expansions)));
        }
        let key = node_key(&arena[slot].node, config.quantum);
        if closed.insert(key, ()).is_some() {
            continue;
        }
        if expansions >= config.max_expansions {
            return Ok(None);
        }
        expansions += 1;
        let node = arena[slot].node.clone();
        let g = arena[slot].g;
        let mode = node.state.mode;

        if mode == goal.mode {
            let rel = hooks.relative(mode, &node.state.cont, &goal.center);
            if let Some(w) = weights.traverse_weight(mode, &rel, &Horizon::Free)? {
                push(
                    &mut arena,
                    &mut heap,
                    SearchNode {
                        node: PlanNode {
                            state: HybridState {
                                mode,
                                cont: goal.center.clone(),
                                grounding: None,
                            },
                            elapsed: node.elapsed,
                        },
                        g: g + w,
                        f: g + w,
                        parent: Some((
                            slot,
                            Edge::Goal {
                                target: goal.center.clone(),
                                weight: w,
                            },
                        )),
                        is_goal: true,
                    },
                );
            }
        }

        for (next, kind) in hooks.next_valid_modes(&node, ctx) {
            for sample in hooks.sample_transitions(ctx, &node, next, kind, config.samples, rng) {
                let rel = hooks.relative(mode, &node.state.cont, &sample.precondition);
                let Some(tw) = weights.traverse_weight(mode, &rel, &Horizon::Window(sample.horizon.clone()))? else {
                    continue;
                };
                let tw = tw + hooks.traverse_surcharge(mode, &rel, &sample.horizon);
                let sw = hooks.switch_weight(&sample.switch);
                let g2 = g + tw + sw;
                let child = PlanNode {
                    state: sample.effect.clone(),
                    elapsed: sample.elapsed_after,
                };
                if closed.contains_key(&node_key(&child, config.quantum)) {
                    continue;
                }
                let f2 = g2 + hooks.heuristic(next, goal.mode);
                push(
                    &mut arena,
                    &mut heap,
                    SearchNode {
                        node: child,
                        g: g2,
                        f: f2,
                        parent: Some((
                            slot,
                            Edge::Switch {
                                sample,
                                traverse: tw,
                                switch: sw,
                            },
                        )),
                        is_goal: false,
                    },
                );
            }
        }
    }
    Ok(None)
}

fn backtrace<S: Clone>(arena: &[SearchNode<S>], mut slot: usize, expansions: usize) -> GlobalPlan<S> {
    let cost = arena[slot].g;
    let mut rev = Vec::new();
    while let Some((parent, edge)) = &arena[slot].parent {
        let mode = arena[*parent].node.state.mode;
        match edge {
            Edge::Goal { target, weight } => rev.push(PlanStep::Traverse {
                mode,
                target: target.clone(),
                horizon: Horizon::Free,
                weight: *weight,
            }),
            Edge::Switch { sample, traverse, switch } => {
                rev.push(PlanStep::Switch {
                    switch: sample.switch.clone(),
                    effect: sample.effect.clone(),
                    weight: *switch,
                });
                rev.push(PlanStep::Traverse {
                    mode,
                    target: sample.precondition.clone(),
                    horizon: Horizon::Window(sample.horizon.clone()),
                    weight: *traverse,
                });
            }
        }
        slot = *parent;
    }
    rev.reverse();
    GlobalPlan {
        steps: rev,
        cost,
        expansions,
    }
}
