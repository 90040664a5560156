//! Target-directed local MDPs over relative states: finite-horizon value
//! iteration on a grid, the closed-loop region policy, pre-emption and the
//! horizon-limit selector.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::LocalError;
use crate::grid::{CellWeights, Grid};
use crate::horizon::HorizonDist;
use crate::model::ModeId;

/// Sampled one-step outcomes of a (relative state, action) pair.
///
/// `next` is flat with stride `dim`.
#[derive(Clone, Debug, Default)]
pub struct Successors {
    pub dim: usize,
    pub prob: Vec<f64>,
    pub cost: Vec<f64>,
    pub next: Vec<f64>,
}

impl Successors {
    pub fn clear(&mut self, dim: usize) {
        self.dim = dim;
        self.prob.clear();
        self.cost.clear();
        self.next.clear();
    }

    pub fn push(&mut self, prob: f64, cost: f64, next: &[f64]) {
        debug_assert_eq!(next.len(), self.dim);
        self.prob.push(prob);
        self.cost.push(cost);
        self.next.extend_from_slice(next);
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.next[i * self.dim..(i + 1) * self.dim]
    }
}

/// A per-mode local MDP expressed over relative states, with target at the
/// origin. Expectations over noise are taken over the successors this model
/// returns, which must be a fixed function of `(rel, action)`.
pub trait LocalModel: Sync {
    fn dim(&self) -> usize;
    fn num_actions(&self) -> usize;
    /// Control vector of action `a`.
    fn control(&self, a: usize) -> Vec<f64>;
    /// Whether `rel` lies in the target (zero-state) cell. Target states are absorbing.
    fn is_target(&self, rel: &[f64]) -> bool;
    fn successors(&self, rel: &[f64], a: usize, out: &mut Successors);
}

/// Largest stage cost over every grid point, action and sampled successor.
pub fn max_step_cost(model: &dyn LocalModel, grid: &Grid) -> Result<f64, LocalError> {
    let mut succ = Successors::default();
    let mut p = vec![0.0; grid.dim()];
    let mut c_max: f64 = 0.0;
    for i in 0..grid.len() {
        grid.point(i, &mut p);
        for a in 0..model.num_actions() {
            model.successors(&p, a, &mut succ);
            for &c in &succ.cost {
                if !c.is_finite() || c < 0.0 {
                    return Err(LocalError::Config("stage cost must be finite and non-negative".to_string()));
                }
                c_max = c_max.max(c);
            }
        }
    }
    Ok(c_max)
}

/// `φ = K · c_max`: the cost of the worst `K`-step action sequence when the
/// stage cost is bounded by `c_max` per step.
pub fn compute_terminal_pseudo_cost(c_max: f64, horizon: u32) -> Result<f64, LocalError> {
    if !c_max.is_finite() || c_max < 0.0 {
        return Err(LocalError::Config("unbounded step cost".to_string()));
    }
    Ok(horizon as f64 * c_max)
}

/// Sparse expected-successor operator: row `(i, a)` holds the interpolation
/// weights of all sampled successors of grid point `i` under action `a`,
/// merged by grid index and scaled by sample probability.
struct Operator {
    actions: usize,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    w: Vec<f64>,
    cost: Vec<f64>,
    target: Vec<bool>,
    c_max: f64,
}

impl Operator {
    fn build(model: &dyn LocalModel, grid: &Grid) -> Result<Self, LocalError> {
        let n = grid.len();
        let na = model.num_actions();
        if na == 0 {
            return Err(LocalError::Config("empty action set".to_string()));
        }
        if model.dim() != grid.dim() {
            return Err(LocalError::Config("grid and model dimensions differ".to_string()));
        }
        if n > u32::MAX as usize {
            return Err(LocalError::Config("grid too large".to_string()));
        }
        let mut op = Operator {
            actions: na,
            row_ptr: Vec::with_capacity(n * na + 1),
            col: Vec::new(),
            w: Vec::new(),
            cost: Vec::with_capacity(n * na),
            target: Vec::with_capacity(n),
            c_max: 0.0,
        };
        op.row_ptr.push(0);
        let mut succ = Successors::default();
        let mut cw = CellWeights::default();
        let mut p = vec![0.0; grid.dim()];
        let mut row: Vec<(u32, f64)> = Vec::new();
        for i in 0..n {
            grid.point(i, &mut p);
            op.target.push(model.is_target(&p));
            for a in 0..na {
                model.successors(&p, a, &mut succ);
                if succ.is_empty() {
                    return Err(LocalError::Config("model returned no successors".to_string()));
                }
                let mass: f64 = succ.prob.iter().sum();
                if (mass - 1.0).abs() > 1e-9 {
                    return Err(LocalError::Config("successor probabilities must sum to one".to_string()));
                }
                row.clear();
                let mut ec = 0.0;
                for s in 0..succ.len() {
                    let c = succ.cost[s];
                    if !c.is_finite() || c < 0.0 {
                        return Err(LocalError::Config("stage cost must be finite and non-negative".to_string()));
                    }
                    op.c_max = op.c_max.max(c);
                    ec += succ.prob[s] * c;
                    // Absorbed: no cost-to-go, whatever the neighbouring breakpoints hold.
                    if model.is_target(succ.state(s)) {
                        continue;
                    }
                    grid.weights(succ.state(s), &mut cw);
                    for (j, w) in cw.index.iter().zip(&cw.weight) {
                        if *w != 0.0 {
                            row.push((*j as u32, succ.prob[s] * w));
                        }
                    }
                }
                row.sort_unstable_by_key(|e| e.0);
                let mut last = u32::MAX;
                for &(j, w) in &row {
                    if j == last {
                        *op.w.last_mut().unwrap() += w;
                    } else {
                        op.col.push(j);
                        op.w.push(w);
                        last = j;
                    }
                }
                op.row_ptr.push(op.col.len());
                op.cost.push(ec);
            }
        }
        Ok(op)
    }

    #[inline]
    fn q(&self, i: usize, a: usize, prev: &[f64]) -> f64 {
        let r = i * self.actions + a;
        let mut acc = self.cost[r];
        for e in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.w[e] * prev[self.col[e] as usize];
        }
        acc
    }
}

/// Options for [`finite_horizon_vi`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ViOptions {
    /// Keep `Q^k(x, a)` for `k = 1..=K`.
    pub store_q: bool,
    /// Noise samples per backup, recorded as table metadata.
    pub samples: u32,
    /// Seed of the noise sample set, recorded as table metadata.
    pub seed: u64,
}

/// Horizon-indexed cost-to-go over a relative-state grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostToGoTable {
    pub mode: ModeId,
    pub grid: Grid,
    pub horizon: u32,
    pub phi: f64,
    /// Largest single-step cost seen while building the table.
    pub c_max: f64,
    pub samples: u32,
    pub seed: u64,
    /// `(K+1) × n`, layer `k` at offset `k·n`.
    values: Vec<f64>,
    /// `K × n × A`, layer `k` at offset `(k−1)·n·A`.
    q: Option<Vec<f64>>,
    num_actions: usize,
    /// `J̄(k)` for `k = 1..=K` at index `k−1`.
    worst: Vec<f64>,
}

impl CostToGoTable {
    /// Assemble a table from raw layers (used when loading from disk).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        mode: ModeId,
        grid: Grid,
        horizon: u32,
        phi: f64,
        c_max: f64,
        samples: u32,
        seed: u64,
        values: Vec<f64>,
        worst: Vec<f64>,
        num_actions: usize,
    ) -> Result<Self, LocalError> {
        let n = grid.len();
        if values.len() != (horizon as usize + 1) * n || worst.len() != horizon as usize {
            return Err(LocalError::Config("table layer sizes do not match grid and horizon".to_string()));
        }
        Ok(Self {
            mode,
            grid,
            horizon,
            phi,
            c_max,
            samples,
            seed,
            values,
            q: None,
            num_actions,
            worst,
        })
    }

    pub fn num_points(&self) -> usize {
        self.grid.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Raw layer `k`.
    pub fn layer(&self, k: u32) -> &[f64] {
        let n = self.grid.len();
        let k = k as usize;
        &self.values[k * n..(k + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored `Q^k(x_i, a)`, if retained.
    pub fn q(&self, k: u32, i: usize, a: usize) -> Option<f64> {
        let q = self.q.as_ref()?;
        if k == 0 || k > self.horizon {
            return None;
        }
        let n = self.grid.len();
        Some(q[((k as usize - 1) * n + i) * self.num_actions + a])
    }

    /// `J̄(k)`, `1 ≤ k ≤ K`.
    pub fn worst(&self, k: u32) -> f64 {
        self.worst[k as usize - 1]
    }

    pub fn worst_profile(&self) -> &[f64] {
        &self.worst
    }

    pub fn weights(&self, rel: &[f64], cw: &mut CellWeights) {
        self.grid.weights(rel, cw);
    }

    /// `J^k(ŝ)` by multilinear interpolation; `rel` is clamped to the grid.
    pub fn value(&self, k: u32, rel: &[f64]) -> f64 {
        let mut cw = CellWeights::default();
        self.grid.weights(rel, &mut cw);
        self.value_at(k, &cw)
    }

    #[inline]
    pub fn value_at(&self, k: u32, cw: &CellWeights) -> f64 {
        cw.blend(&self.values, k as usize * self.grid.len())
    }

    /// `Σ_k P(k) J^k(ŝ)` over `P` truncated to the table horizon.
    pub fn mixture_at(&self, dist: &HorizonDist, cw: &CellWeights) -> f64 {
        dist.iter()
            .filter(|(k, _)| *k <= self.horizon)
            .map(|(k, p)| p * self.value_at(k, cw))
            .sum()
    }

    pub fn mixture(&self, dist: &HorizonDist, rel: &[f64]) -> f64 {
        let mut cw = CellWeights::default();
        self.grid.weights(rel, &mut cw);
        self.mixture_at(dist, &cw)
    }

    /// `Σ_k P(k) J̄(k)`.
    pub fn worst_mixture(&self, dist: &HorizonDist) -> f64 {
        dist.iter()
            .filter(|(k, _)| *k <= self.horizon)
            .map(|(k, p)| p * self.worst(k))
            .sum()
    }

    /// `(k*, J^{k*}(ŝ))` with `k* = argmin_{1≤k≤K} J^k(ŝ)`, smallest `k` on ties.
    pub fn best_horizon(&self, rel: &[f64]) -> (u32, f64) {
        let mut cw = CellWeights::default();
        self.grid.weights(rel, &mut cw);
        let mut best = (1, self.value_at(1, &cw));
        for k in 2..=self.horizon {
            let v = self.value_at(k, &cw);
            if v < best.1 {
                best = (k, v);
            }
        }
        best
    }
}

/// Backward induction `J^k = min_a E[c + J^{k−1}(ŝ′)]` from
/// `J^0 = 0` on the target cell and `φ` elsewhere. Target states are absorbing
/// at zero cost for every `k`.
pub fn finite_horizon_vi(
    mode: ModeId,
    model: &dyn LocalModel,
    grid: Grid,
    phi: f64,
    horizon: u32,
    opts: ViOptions,
) -> Result<CostToGoTable, LocalError> {
    if !(phi >= 0.0) || !phi.is_finite() {
        return Err(LocalError::Config("terminal pseudo-cost must be finite and non-negative".to_string()));
    }
    let op = Operator::build(model, &grid)?;
    let n = grid.len();
    let na = op.actions;
    let k_max = horizon as usize;
    let mut values = vec![0.0; (k_max + 1) * n];
    for i in 0..n {
        values[i] = if op.target[i] { 0.0 } else { phi };
    }
    let mut q = opts.store_q.then(|| vec![0.0; k_max * n * na]);
    let mut worst = vec![0.0; k_max];
    for k in 1..=k_max {
        let (done, rest) = values.split_at_mut(k * n);
        let prev = &done[(k - 1) * n..];
        let cur = &mut rest[..n];
        let mut wk: f64 = 0.0;
        for i in 0..n {
            if op.target[i] {
                cur[i] = 0.0;
                continue;
            }
            let mut best = f64::INFINITY;
            for a in 0..na {
                let v = op.q(i, a, prev);
                if let Some(q) = q.as_mut() {
                    q[((k - 1) * n + i) * na + a] = v;
                }
                wk = wk.max(v);
                if v < best {
                    best = v;
                }
            }
            cur[i] = best;
        }
        worst[k - 1] = wk;
    }
    Ok(CostToGoTable {
        mode,
        grid,
        horizon,
        phi,
        c_max: op.c_max,
        samples: opts.samples,
        seed: opts.seed,
        values,
        q,
        num_actions: na,
        worst,
    })
}

/// Cost-to-go of a fixed stationary policy (`policy[i]` is the action at grid
/// point `i`) over `k` steps, with the same terminal layer and absorbing target.
pub fn evaluate_policy(
    model: &dyn LocalModel,
    grid: &Grid,
    policy: &[usize],
    phi: f64,
    k: u32,
) -> Result<Vec<f64>, LocalError> {
    let op = Operator::build(model, grid)?;
    let n = grid.len();
    if policy.len() != n || policy.iter().any(|a| *a >= op.actions) {
        return Err(LocalError::Config("policy must give a valid action per grid point".to_string()));
    }
    let mut prev: Vec<f64> = op.target.iter().map(|t| if *t { 0.0 } else { phi }).collect();
    let mut cur = vec![0.0; n];
    for _ in 0..k {
        for i in 0..n {
            cur[i] = if op.target[i] { 0.0 } else { op.q(i, policy[i], &prev) };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev)
}

/// Result of one local decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalDecision {
    pub action: usize,
    /// `Σ_k P(k) Q^k(ŝ, a)` of the chosen action.
    pub value: f64,
}

/// `argmin_a Σ_k P(k) Q^k(ŝ, a)`, with `Q^k(ŝ, a) = E[c + J^{k−1}(ŝ′)]`
/// evaluated online from the model's successors; successors inside the
/// target are absorbed at zero cost-to-go. Ties go to the lower action index.
pub fn policy_action(table: &CostToGoTable, model: &dyn LocalModel, rel: &[f64], dist: &HorizonDist) -> LocalDecision {
    greedy(table, model, rel, dist, true)
}

/// As [`policy_action`], but for a target the agent must stay in until some
/// outside event: target successors keep their interpolated cost-to-go, which
/// rises toward the region's edge and so holds the agent near its center.
pub fn holding_action(table: &CostToGoTable, model: &dyn LocalModel, rel: &[f64], dist: &HorizonDist) -> LocalDecision {
    greedy(table, model, rel, dist, false)
}

fn greedy(table: &CostToGoTable, model: &dyn LocalModel, rel: &[f64], dist: &HorizonDist, absorb: bool) -> LocalDecision {
    let ks: Vec<(u32, f64)> = dist.iter().filter(|(k, _)| *k <= table.horizon).collect();
    let mass: f64 = ks.iter().map(|(_, p)| p).sum();
    let mut succ = Successors::default();
    let mut cw = CellWeights::default();
    let mut best = LocalDecision {
        action: 0,
        value: f64::INFINITY,
    };
    for a in 0..model.num_actions() {
        model.successors(rel, a, &mut succ);
        let mut v = 0.0;
        for s in 0..succ.len() {
            let tail: f64 = if absorb && model.is_target(succ.state(s)) {
                0.0
            } else {
                table.grid.weights(succ.state(s), &mut cw);
                ks.iter().map(|&(k, p)| p * table.value_at(k - 1, &cw)).sum()
            };
            v += succ.prob[s] * (mass * succ.cost[s] + tail);
        }
        if mass > 0.0 {
            v /= mass;
        }
        if v < best.value {
            best = LocalDecision { action: a, value: v };
        }
    }
    best
}

/// `Σ P(k) J^k(ŝ) > β Σ P(k) J̄(k)`.
pub fn should_preempt(table: &CostToGoTable, rel: &[f64], dist: &HorizonDist, beta: f64) -> bool {
    table.mixture(dist, rel) > beta * table.worst_mixture(dist)
}

/// Same test with precomputed mixtures.
pub fn preempt_test(expected: f64, worst: f64, beta: f64) -> bool {
    expected > beta * worst
}

/// Progress constants and the horizon they imply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub selected_k: u32,
}

/// Smallest `K ≥ 1` with `δ^K ≤ ε`.
pub fn horizon_from_progress(delta: f64, epsilon: f64) -> Result<u32, LocalError> {
    if !(delta > 0.0 && delta < 1.0) || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LocalError::Config("need 0 < δ < 1 and 0 < ε < 1".to_string()));
    }
    // Start from the analytic estimate and fix up floating-point edge cases.
    let est = libm::ceil(libm::log(epsilon) / libm::log(delta)).max(1.0);
    if est > u32::MAX as f64 / 2.0 {
        return Err(LocalError::Config("horizon overflow".to_string()));
    }
    let mut k = est as u32;
    while k > 1 && libm::pow(delta, (k - 1) as f64) <= epsilon {
        k -= 1;
    }
    while libm::pow(delta, k as f64) > epsilon {
        k += 1;
    }
    Ok(k)
}

/// Worst-case one-step progress `ρ(c, a)` for every sampled state; picks the
/// most progressive action per state (`argmin_a ρ`), takes `δ` as the largest
/// of those minima and returns the smallest `K` with `δ^K ≤ ε`.
///
/// Fails naming the first sampled state at which no action makes progress.
pub fn select_horizon_limit(
    epsilon: f64,
    states: &[Vec<f64>],
    num_actions: usize,
    progress: &dyn Fn(&[f64], usize) -> f64,
) -> Result<HorizonConfig, LocalError> {
    if states.is_empty() || num_actions == 0 {
        return Err(LocalError::Config("need sampled states and actions".to_string()));
    }
    let mut delta: f64 = 0.0;
    for (i, c) in states.iter().enumerate() {
        let best = (0..num_actions).map(|a| progress(c, a)).fold(f64::INFINITY, f64::min);
        if !(best < 1.0) {
            return Err(LocalError::NoProgress {
                index: i,
                state: c.clone(),
            });
        }
        delta = delta.max(best);
    }
    // Every state progresses to the origin in one step.
    let delta = delta.max(f64::MIN_POSITIVE);
    let selected_k = horizon_from_progress(delta, epsilon)?;
    Ok(HorizonConfig {
        epsilon,
        delta,
        selected_k,
    })
}

/// Finite discrete MDP with a single absorbing target state, viewed as a local
/// model on the 1-D index grid `0, 1, …, n−1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMdp {
    /// `trans[s][a]` lists `(s′, p)`.
    pub trans: Vec<Vec<Vec<(usize, f64)>>>,
    /// Stage cost of taking `a` in `s`.
    pub cost: Vec<Vec<f64>>,
    pub target: usize,
}

impl DiscreteMdp {
    pub fn new(trans: Vec<Vec<Vec<(usize, f64)>>>, cost: Vec<Vec<f64>>, target: usize) -> Result<Self, LocalError> {
        let n = trans.len();
        if n == 0 || target >= n || cost.len() != n {
            return Err(LocalError::Config("malformed discrete MDP".to_string()));
        }
        let na = trans[0].len();
        for s in 0..n {
            if trans[s].len() != na || cost[s].len() != na {
                return Err(LocalError::Config("ragged action sets".to_string()));
            }
            for a in 0..na {
                let mass: f64 = trans[s][a].iter().map(|e| e.1).sum();
                if (mass - 1.0).abs() > 1e-9 || trans[s][a].iter().any(|e| e.0 >= n || e.1 < 0.0) {
                    return Err(LocalError::Config("bad transition row".to_string()));
                }
            }
        }
        Ok(Self { trans, cost, target })
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn grid(&self) -> Grid {
        Grid::new(vec![(0..self.num_states()).map(|i| i as f64).collect()]).expect("index grid")
    }

    /// Deterministic chain `0 — 1 — … — n−1` with actions left (0) and right (1)
    /// at unit cost; the target is the rightmost state.
    pub fn chain(n: usize, slip: f64) -> Self {
        let mut trans = Vec::new();
        for s in 0..n {
            let l = s.saturating_sub(1);
            let r = (s + 1).min(n - 1);
            let row = |to: usize, other: usize| {
                if slip > 0.0 && to != other {
                    vec![(to, 1.0 - slip), (other, slip)]
                } else {
                    vec![(to, 1.0)]
                }
            };
            trans.push(vec![row(l, s), row(r, s)]);
        }
        Self {
            cost: vec![vec![1.0, 1.0]; n],
            trans,
            target: n - 1,
        }
    }
}

impl LocalModel for DiscreteMdp {
    fn dim(&self) -> usize {
        1
    }

    fn num_actions(&self) -> usize {
        self.trans[0].len()
    }

    fn control(&self, a: usize) -> Vec<f64> {
        vec![a as f64]
    }

    fn is_target(&self, rel: &[f64]) -> bool {
        libm::round(rel[0]) as usize == self.target
    }

    fn successors(&self, rel: &[f64], a: usize, out: &mut Successors) {
        out.clear(1);
        let s = (libm::round(rel[0]).max(0.0) as usize).min(self.num_states() - 1);
        for &(to, p) in &self.trans[s][a] {
            out.push(p, self.cost[s][a], &[to as f64]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_table() -> (DiscreteMdp, CostToGoTable) {
        let mdp = DiscreteMdp::chain(3, 0.0);
        let t = finite_horizon_vi(
            ModeId(0),
            &mdp,
            mdp.grid(),
            5.0,
            2,
            ViOptions {
                store_q: true,
                ..Default::default()
            },
        )
        .unwrap();
        (mdp, t)
    }

    #[test]
    fn chain_backward_induction() {
        let (_, t) = chain_table();
        assert_eq!(t.layer(0), &[5.0, 5.0, 0.0]);
        assert_eq!(t.layer(1), &[6.0, 1.0, 0.0]);
        assert_eq!(t.layer(2), &[2.0, 1.0, 0.0]);
        assert_eq!(t.worst(1), 6.0);
    }

    #[test]
    fn chain_policy_and_preemption() {
        let (mdp, t) = chain_table();
        let d2 = HorizonDist::degenerate(2).unwrap();
        assert_eq!(policy_action(&t, &mdp, &[0.0], &d2).action, 1);
        let d1 = HorizonDist::degenerate(1).unwrap();
        assert!(should_preempt(&t, &[0.0], &d1, 0.5));
        assert!(!should_preempt(&t, &[0.0], &d1, 1.0));
    }

    #[test]
    fn q_consistent_with_j() {
        let (_, t) = chain_table();
        for k in 1..=2 {
            for i in 0..3 {
                let m = (0..2).map(|a| t.q(k, i, a).unwrap()).fold(f64::INFINITY, f64::min);
                assert_eq!(m, t.layer(k)[i]);
            }
        }
    }

    #[test]
    fn terminal_pseudo_cost() {
        assert_eq!(compute_terminal_pseudo_cost(1.0, 10).unwrap(), 10.0);
        assert_eq!(compute_terminal_pseudo_cost(3.0, 0).unwrap(), 0.0);
        assert!(compute_terminal_pseudo_cost(f64::INFINITY, 3).is_err());
        let mdp = DiscreteMdp::chain(4, 0.0);
        assert_eq!(max_step_cost(&mdp, &mdp.grid()).unwrap(), 1.0);
    }

    #[test]
    fn horizon_ceiling() {
        assert_eq!(horizon_from_progress(0.5, 0.1).unwrap(), 4);
        assert_eq!(horizon_from_progress(0.1, 0.1).unwrap(), 1);
        assert_eq!(horizon_from_progress(0.5, 0.25).unwrap(), 2);
        assert!(horizon_from_progress(1.0, 0.1).is_err());
    }

    #[test]
    fn no_progress_is_reported() {
        let states = vec![vec![1.0], vec![2.0]];
        let err = select_horizon_limit(0.1, &states, 1, &|c, _| if c[0] > 1.5 { 1.0 } else { 0.5 }).unwrap_err();
        assert_eq!(err, LocalError::NoProgress { index: 1, state: vec![2.0] });
    }

    #[test]
    fn zero_mdp_is_zero() {
        let mut mdp = DiscreteMdp::chain(4, 0.3);
        mdp.cost = vec![vec![0.0, 0.0]; 4];
        let t = finite_horizon_vi(ModeId(0), &mdp, mdp.grid(), 0.0, 3, ViOptions::default()).unwrap();
        assert!(t.values().iter().all(|v| *v == 0.0));
    }
}
