//! Monte-Carlo tree search with double progressive widening.
//!
//! A node visited `n` times holds at most `⌈k_a·n^α_a⌉` actions, and an action
//! tried `n` times at most `⌈k_s·n^α_s⌉` sampled outcomes. New actions start
//! from a value estimate weighted as `init_n` virtual visits.

use alloc::vec::Vec;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

/// A simulator the tree can query.
pub trait GenerativeModel {
    type State: Clone;
    type Action: Clone;

    /// Legal actions, in the order they are added to a node.
    fn actions(&self, s: &Self::State) -> Vec<Self::Action>;
    /// Sample a successor and its reward.
    fn step(&self, s: &Self::State, a: &Self::Action, rng: &mut dyn RngCore) -> (Self::State, f64);
    fn is_terminal(&self, s: &Self::State) -> bool;
    /// Value estimate used at leaves (higher is better).
    fn leaf_value(&self, s: &Self::State) -> f64;
    /// Prior for a freshly added action.
    fn q_init(&self, s: &Self::State, a: &Self::Action) -> f64;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UctParams {
    pub depth: u32,
    pub exploration: f64,
    pub n_iterations: u32,
    /// Virtual visits credited to the prior of a new action.
    pub init_n: u32,
    pub k_a: f64,
    pub alpha_a: f64,
    pub k_s: f64,
    pub alpha_s: f64,
}

impl UctParams {
    pub fn new(depth: u32, exploration: f64, n_iterations: u32, init_n: u32) -> Self {
        Self {
            depth,
            exploration,
            n_iterations,
            init_n,
            k_a: 10.0,
            alpha_a: 0.5,
            k_s: 10.0,
            alpha_s: 0.5,
        }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if self.depth < 1 || self.n_iterations < 1 {
            return Err("depth and iteration count must be at least 1");
        }
        let alpha_ok = |a: f64| a > 0.0 && a <= 1.0;
        if !alpha_ok(self.alpha_a) || !alpha_ok(self.alpha_s) {
            return Err("widening exponents must lie in (0, 1]");
        }
        if !(self.k_a > 0.0 && self.k_s > 0.0) || !(self.exploration >= 0.0) {
            return Err("widening constants must be positive");
        }
        Ok(())
    }
}

/// `⌈k·n^α⌉`.
pub fn widening_limit(k: f64, alpha: f64, n: u32) -> usize {
    libm::ceil(k * libm::pow(n as f64, alpha)) as usize
}

#[derive(Clone, Debug)]
struct ActionNode<A> {
    action: A,
    /// Real plus virtual visits (used in the UCB term and Q average).
    n: u32,
    /// Real visits only (drives state widening).
    visits: u32,
    q: f64,
    /// `(node index, reward, times sampled)`.
    children: Vec<(usize, f64, u32)>,
}

#[derive(Clone, Debug)]
struct StateNode<S, A> {
    state: S,
    visits: u32,
    untried: Vec<A>,
    actions: Vec<ActionNode<A>>,
}

/// Largest child count observed against its bound, for instrumentation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WideningReport {
    pub nodes: usize,
    pub violations: usize,
    pub max_actions: usize,
    pub max_outcomes: usize,
}

/// A search tree rooted at one state.
pub struct DpwTree<'m, M: GenerativeModel> {
    model: &'m M,
    params: UctParams,
    nodes: Vec<StateNode<M::State, M::Action>>,
}

impl<'m, M: GenerativeModel> DpwTree<'m, M> {
    pub fn new(model: &'m M, params: UctParams, root: M::State) -> Self {
        let mut t = Self {
            model,
            params,
            nodes: Vec::new(),
        };
        t.add_node(root);
        t
    }

    fn add_node(&mut self, state: M::State) -> usize {
        let mut untried = self.model.actions(&state);
        untried.reverse();
        self.nodes.push(StateNode {
            state,
            visits: 0,
            untried,
            actions: Vec::new(),
        });
        self.nodes.len() - 1
    }

    /// Runs `n` simulations from the root.
    pub fn search(&mut self, n: u32, rng: &mut dyn RngCore) {
        for _ in 0..n {
            self.simulate(0, self.params.depth, rng);
        }
    }

    fn simulate(&mut self, idx: usize, depth: u32, rng: &mut dyn RngCore) -> f64 {
        if self.model.is_terminal(&self.nodes[idx].state) {
            return 0.0;
        }
        if depth == 0 {
            return self.model.leaf_value(&self.nodes[idx].state);
        }
        self.nodes[idx].visits += 1;
        let node_visits = self.nodes[idx].visits;
        let limit = widening_limit(self.params.k_a, self.params.alpha_a, node_visits);
        while self.nodes[idx].actions.len() < limit {
            let Some(a) = self.nodes[idx].untried.pop() else {
                break;
            };
            let q = self.model.q_init(&self.nodes[idx].state, &a);
            self.nodes[idx].actions.push(ActionNode {
                action: a,
                n: self.params.init_n,
                visits: 0,
                q,
                children: Vec::new(),
            });
        }
        if self.nodes[idx].actions.is_empty() {
            return self.model.leaf_value(&self.nodes[idx].state);
        }
        let ai = self.select(idx);

        let visits = {
            let an = &mut self.nodes[idx].actions[ai];
            an.visits += 1;
            an.visits
        };
        let limit = widening_limit(self.params.k_s, self.params.alpha_s, visits);
        let value = if self.nodes[idx].actions[ai].children.len() < limit {
            let (s2, r) = self.model.step(&self.nodes[idx].state, &self.nodes[idx].actions[ai].action, rng);
            let leaf = if self.model.is_terminal(&s2) { 0.0 } else { self.model.leaf_value(&s2) };
            let child = self.add_node(s2);
            self.nodes[idx].actions[ai].children.push((child, r, 1));
            r + leaf
        } else {
            let ci = self.pick_outcome(idx, ai, rng);
            let (child, r, _) = self.nodes[idx].actions[ai].children[ci];
            self.nodes[idx].actions[ai].children[ci].2 += 1;
            r + self.simulate(child, depth - 1, rng)
        };

        let an = &mut self.nodes[idx].actions[ai];
        an.n += 1;
        an.q += (value - an.q) / an.n as f64;
        value
    }

    /// UCB1 over the node's current actions; ties go to the earlier action.
    fn select(&self, idx: usize) -> usize {
        let node = &self.nodes[idx];
        let total: u32 = node.actions.iter().map(|a| a.n).sum();
        let ln = libm::log(total.max(1) as f64);
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (i, a) in node.actions.iter().enumerate() {
            let v = if a.n == 0 {
                f64::INFINITY
            } else {
                a.q + self.params.exploration * libm::sqrt(ln / a.n as f64)
            };
            if v > best_v {
                best_v = v;
                best = i;
            }
        }
        best
    }

    /// Existing outcome chosen in proportion to how often it was sampled.
    fn pick_outcome(&self, idx: usize, ai: usize, rng: &mut dyn RngCore) -> usize {
        let ch = &self.nodes[idx].actions[ai].children;
        let total: u32 = ch.iter().map(|c| c.2).sum();
        let mut u = rng.random_range(0..total.max(1));
        for (i, c) in ch.iter().enumerate() {
            if u < c.2 {
                return i;
            }
            u -= c.2;
        }
        ch.len() - 1
    }

    /// Action with the highest Q at the root (ties to the earlier action).
    pub fn best_action(&self) -> Option<M::Action> {
        let root = &self.nodes[0];
        let mut best: Option<&ActionNode<M::Action>> = None;
        for a in &root.actions {
            if best.is_none_or(|b| a.q > b.q) {
                best = Some(a);
            }
        }
        best.map(|a| a.action.clone())
    }

    /// Root action values `(q, n)` in insertion order.
    pub fn root_stats(&self) -> Vec<(f64, u32)> {
        self.nodes[0].actions.iter().map(|a| (a.q, a.n)).collect()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Checks every node against both widening bounds.
    pub fn widening_report(&self) -> WideningReport {
        let mut rep = WideningReport {
            nodes: self.nodes.len(),
            ..Default::default()
        };
        for node in &self.nodes {
            rep.max_actions = rep.max_actions.max(node.actions.len());
            if node.actions.len() > widening_limit(self.params.k_a, self.params.alpha_a, node.visits) {
                rep.violations += 1;
            }
            for a in &node.actions {
                rep.max_outcomes = rep.max_outcomes.max(a.children.len());
                if a.children.len() > widening_limit(self.params.k_s, self.params.alpha_s, a.visits) {
                    rep.violations += 1;
                }
            }
        }
        rep
    }
}

/// Builds a tree at `root`, runs the configured simulations and returns the
/// greedy root action.
pub fn uct_search<M: GenerativeModel>(model: &M, params: &UctParams, root: M::State, rng: &mut dyn RngCore) -> Option<M::Action> {
    let mut tree = DpwTree::new(model, params.clone(), root);
    tree.search(params.n_iterations, rng);
    tree.best_action()
}
