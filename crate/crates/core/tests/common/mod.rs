//! Fixtures shared by the integration tests: random discrete MDPs with a
//! brute-force expectimax oracle, a seeded toy switch graph with an
//! exhaustive plan enumerator, and a 1-D walker world with a shuttle.
#![allow(dead_code)]

use hsp_core::executive::{Environment, StepOutcome};
use hsp_core::global::{
    EdgeWeightSource, Horizon, LocalLayer, ModePolicy, ModeSwitchSample, PlanNode, PlanningHooks,
};
use hsp_core::local::{
    compute_terminal_pseudo_cost, finite_horizon_vi, max_step_cost, DiscreteMdp, LocalModel, Successors, ViOptions,
};
use hsp_core::model::{is_goal, Action, ContextSet, GoalSpace, HybridState, ModeId};
use hsp_core::{CostToGoTable, Grid, HorizonDist, ModelError, PlanError};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- discrete MDPs

/// Random MDP with `n` states, `a` actions, 1–3 successors per row and stage
/// costs in `[0, 5)`.
pub fn random_mdp(rng: &mut impl Rng, n: usize, a: usize) -> DiscreteMdp {
    let target = rng.random_range(0..n);
    let mut trans = Vec::with_capacity(n);
    let mut cost = Vec::with_capacity(n);
    for _ in 0..n {
        let mut rows = Vec::with_capacity(a);
        let mut costs = Vec::with_capacity(a);
        for _ in 0..a {
            let k = rng.random_range(1..=3usize.min(n));
            let mut to: Vec<usize> = Vec::new();
            while to.len() < k {
                let s = rng.random_range(0..n);
                if !to.contains(&s) {
                    to.push(s);
                }
            }
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = w.iter().sum();
            let mut row: Vec<(usize, f64)> = to.iter().zip(&w).map(|(s, w)| (*s, w / total)).collect();
            // Make the row sum to one exactly.
            let head: f64 = row[..k - 1].iter().map(|e| e.1).sum();
            row[k - 1].1 = 1.0 - head;
            rows.push(row);
            costs.push(rng.random_range(0.0..5.0));
        }
        trans.push(rows);
        cost.push(costs);
    }
    DiscreteMdp::new(trans, cost, target).expect("valid random MDP")
}

/// Depth-`k` expectimax: `min_a Σ p (c + V(s′, k−1))`, target absorbing at 0,
/// `φ` at depth 0 elsewhere.
pub fn expectimax(mdp: &DiscreteMdp, s: usize, k: u32, phi: f64) -> f64 {
    if s == mdp.target {
        return 0.0;
    }
    if k == 0 {
        return phi;
    }
    (0..mdp.trans[s].len())
        .map(|a| {
            mdp.trans[s][a]
                .iter()
                .map(|&(to, p)| p * (mdp.cost[s][a] + expectimax(mdp, to, k - 1, phi)))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn vi_table(mdp: &DiscreteMdp, phi: f64, k: u32, store_q: bool) -> CostToGoTable {
    finite_horizon_vi(
        ModeId(0),
        mdp,
        mdp.grid(),
        phi,
        k,
        ViOptions {
            store_q,
            ..Default::default()
        },
    )
    .expect("vi")
}

// ---------------------------------------------------------------- toy switch graph

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToySwitch {
    pub to: u16,
    pub idx: u8,
}

/// Modes `0..modes` over integer positions `0..=span`. Switch candidates are
/// a fixed function of the node, so the sampled graph is well defined.
#[derive(Clone, Debug)]
pub struct GraphHooks {
    pub seed: u64,
    pub modes: u16,
    pub span: i64,
    /// Candidates listed per (node, next mode); the planner takes the first `N`.
    pub candidates: usize,
    pub max_elapsed: u32,
    /// Only `m → m + 1` switches.
    pub chain: bool,
    /// Heuristic per mode of distance to the goal mode.
    pub heuristic_unit: f64,
}

impl GraphHooks {
    pub fn new(seed: u64, modes: u16) -> Self {
        Self {
            seed,
            modes,
            span: 6,
            candidates: 4,
            max_elapsed: 4,
            chain: false,
            heuristic_unit: 0.0,
        }
    }

    fn list(&self, node: &PlanNode, next: ModeId) -> Vec<ModeSwitchSample<ToySwitch>> {
        let x = node.state.cont[0] as i64;
        let mix = self
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add((node.state.mode.0 as u64) << 48)
            .wrapping_add((next.0 as u64) << 40)
            .wrapping_add((node.elapsed as u64) << 20)
            .wrapping_add(x as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(mix);
        let mut out = Vec::new();
        for i in 0..self.candidates {
            let pre = rng.random_range(0..=self.span) as f64;
            let eff = rng.random_range(0..=self.span) as f64;
            let k = rng.random_range(1..=2u32);
            let horizon = if rng.random_bool(0.5) {
                HorizonDist::degenerate(k).unwrap()
            } else {
                HorizonDist::uniform(k, k + 1).unwrap()
            };
            let elapsed_after = node.elapsed + k;
            if elapsed_after > self.max_elapsed {
                continue;
            }
            out.push(ModeSwitchSample {
                switch: ToySwitch { to: next.0, idx: i as u8 },
                precondition: vec![pre].into(),
                effect: HybridState::new(next, vec![eff]),
                horizon,
                elapsed_after,
            });
        }
        out
    }
}

impl PlanningHooks for GraphHooks {
    type Context = ();
    type Switch = ToySwitch;
    type SwitchKind = u16;

    fn next_valid_modes(&self, node: &PlanNode, _ctx: &ContextSet<()>) -> Vec<(ModeId, u16)> {
        let m = node.state.mode.0;
        if self.chain {
            if m + 1 < self.modes {
                vec![(ModeId(m + 1), m + 1)]
            } else {
                Vec::new()
            }
        } else {
            (0..self.modes).filter(|d| *d != m).map(|d| (ModeId(d), d)).collect()
        }
    }

    fn sample_transitions(
        &self,
        _ctx: &ContextSet<()>,
        node: &PlanNode,
        next: ModeId,
        _kind: u16,
        n: usize,
        _rng: &mut dyn RngCore,
    ) -> Vec<ModeSwitchSample<ToySwitch>> {
        let mut l = self.list(node, next);
        l.truncate(n);
        l
    }

    fn heuristic(&self, mode: ModeId, goal: ModeId) -> f64 {
        self.heuristic_unit * (goal.0 as f64 - mode.0 as f64).abs()
    }

    fn relative(&self, _mode: ModeId, cont: &[f64], target: &[f64]) -> Vec<f64> {
        vec![cont[0] - target[0]]
    }

    fn switch_weight(&self, _s: &ToySwitch) -> f64 {
        1.0
    }

    fn at_transition(&self, state: &HybridState, target: &[f64]) -> bool {
        (state.cont[0] - target[0]).abs() <= 0.5
    }

    fn refresh_horizon(&self, _ctx: &ContextSet<()>, _s: &ToySwitch) -> Option<HorizonDist> {
        None
    }

    fn hold_control(&self, _mode: ModeId) -> Vec<f64> {
        vec![0.0]
    }
}

/// Per-mode unit costs: `c_m |rel|`, plus a quarter per expected step of
/// waiting inside a window.
pub struct LinearWeights {
    pub unit: Vec<f64>,
}

impl EdgeWeightSource for LinearWeights {
    fn traverse_weight(&self, mode: ModeId, rel: &[f64], horizon: &Horizon) -> Result<Option<f64>, PlanError> {
        let c = *self.unit.get(mode.index()).ok_or(PlanError::MissingTable(mode.0))?;
        Ok(Some(match horizon {
            Horizon::Free => c * rel[0].abs(),
            Horizon::Window(p) => c * rel[0].abs() + 0.25 * p.mean(),
        }))
    }
}

pub fn unit_context() -> ContextSet<()> {
    ContextSet::new((), vec![()]).unwrap()
}

/// Cheapest goal-reaching cost over every path of the sampled graph, summed
/// in the same order as the planner.
pub fn enumerate_best<H: PlanningHooks>(
    hooks: &H,
    weights: &dyn EdgeWeightSource,
    goal: &GoalSpace,
    ctx: &ContextSet<H::Context>,
    n: usize,
    node: &PlanNode,
    g: f64,
    max_switches: usize,
    best: &mut f64,
) {
    if is_goal(&node.state, goal) {
        *best = best.min(g);
        return;
    }
    let mode = node.state.mode;
    if mode == goal.mode {
        let rel = hooks.relative(mode, &node.state.cont, &goal.center);
        if let Some(w) = weights.traverse_weight(mode, &rel, &Horizon::Free).unwrap() {
            *best = best.min(g + w);
        }
    }
    if max_switches == 0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (next, kind) in hooks.next_valid_modes(node, ctx) {
        for s in hooks.sample_transitions(ctx, node, next, kind, n, &mut rng) {
            let rel = hooks.relative(mode, &node.state.cont, &s.precondition);
            let Some(tw) = weights.traverse_weight(mode, &rel, &Horizon::Window(s.horizon.clone())).unwrap() else {
                continue;
            };
            let tw = tw + hooks.traverse_surcharge(mode, &rel, &s.horizon);
            let g2 = g + tw + hooks.switch_weight(&s.switch);
            let child = PlanNode {
                state: s.effect.clone(),
                elapsed: s.elapsed_after,
            };
            enumerate_best(hooks, weights, goal, ctx, n, &child, g2, max_switches - 1, best);
        }
    }
}

// ---------------------------------------------------------------- walker + shuttle

pub const WALK: ModeId = ModeId(0);
pub const SHUTTLE: ModeId = ModeId(1);

/// 1-D lattice walker over relative positions: stay, left, right, unit cost.
#[derive(Clone, Debug)]
pub struct Walker;

impl LocalModel for Walker {
    fn dim(&self) -> usize {
        1
    }
    fn num_actions(&self) -> usize {
        3
    }
    fn control(&self, a: usize) -> Vec<f64> {
        vec![[0.0, -1.0, 1.0][a]]
    }
    fn is_target(&self, rel: &[f64]) -> bool {
        rel[0].abs() < 0.5
    }
    fn successors(&self, rel: &[f64], a: usize, out: &mut Successors) {
        out.clear(1);
        out.push(1.0, 1.0, &[rel[0] + self.control(a)[0]]);
    }
}

pub fn walker_table(reach: i64, horizon: u32) -> CostToGoTable {
    let grid = Grid::new(vec![(-reach..=reach).map(|v| v as f64).collect()]).unwrap();
    let c = max_step_cost(&Walker, &grid).unwrap();
    let phi = compute_terminal_pseudo_cost(c, horizon).unwrap();
    finite_horizon_vi(WALK, &Walker, grid, phi, horizon, ViOptions::default()).unwrap()
}

pub fn walker_layer(reach: i64, horizon: u32) -> LocalLayer {
    LocalLayer::new(vec![
        ModePolicy::Table {
            table: walker_table(reach, horizon),
            model: Box::new(Walker),
        },
        ModePolicy::Passive { step_cost: 0.2 },
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShuttleSwitch {
    Board,
    Alight,
}

/// Where and in how many steps the shuttle can be boarded and left.
#[derive(Clone, Debug, PartialEq)]
pub struct ShuttleCtx {
    pub board: Option<(f64, u32)>,
    pub alight: Option<(f64, u32)>,
}

pub struct ShuttleHooks;

impl PlanningHooks for ShuttleHooks {
    type Context = ShuttleCtx;
    type Switch = ShuttleSwitch;
    type SwitchKind = ShuttleSwitch;

    fn next_valid_modes(&self, node: &PlanNode, ctx: &ContextSet<ShuttleCtx>) -> Vec<(ModeId, ShuttleSwitch)> {
        match node.state.mode {
            WALK if ctx.current.board.is_some() => vec![(SHUTTLE, ShuttleSwitch::Board)],
            SHUTTLE => vec![(WALK, ShuttleSwitch::Alight)],
            _ => Vec::new(),
        }
    }

    fn sample_transitions(
        &self,
        ctx: &ContextSet<ShuttleCtx>,
        node: &PlanNode,
        _next: ModeId,
        kind: ShuttleSwitch,
        _n: usize,
        _rng: &mut dyn RngCore,
    ) -> Vec<ModeSwitchSample<ShuttleSwitch>> {
        let (event, next) = match kind {
            ShuttleSwitch::Board => (ctx.current.board, SHUTTLE),
            ShuttleSwitch::Alight => (ctx.current.alight, WALK),
        };
        let Some((x, eta)) = event else {
            return Vec::new();
        };
        if eta <= node.elapsed {
            return Vec::new();
        }
        vec![ModeSwitchSample {
            switch: kind,
            precondition: vec![x].into(),
            effect: HybridState::new(next, vec![x]),
            horizon: HorizonDist::degenerate(eta - node.elapsed).unwrap(),
            elapsed_after: eta,
        }]
    }

    fn relative(&self, _mode: ModeId, cont: &[f64], target: &[f64]) -> Vec<f64> {
        vec![cont[0] - target[0]]
    }

    fn at_transition(&self, state: &HybridState, target: &[f64]) -> bool {
        (state.cont[0] - target[0]).abs() <= 0.5
    }

    fn switch_ready(&self, ctx: &ContextSet<ShuttleCtx>, _state: &HybridState, s: &ShuttleSwitch) -> bool {
        let ev = match s {
            ShuttleSwitch::Board => ctx.current.board,
            ShuttleSwitch::Alight => ctx.current.alight,
        };
        ev.is_some_and(|(_, eta)| eta == 0)
    }

    fn refresh_horizon(&self, ctx: &ContextSet<ShuttleCtx>, s: &ShuttleSwitch) -> Option<HorizonDist> {
        let ev = match s {
            ShuttleSwitch::Board => ctx.current.board,
            ShuttleSwitch::Alight => ctx.current.alight,
        };
        let (_, eta) = ev?;
        (eta >= 1).then(|| HorizonDist::degenerate(eta).unwrap())
    }

    fn hold_control(&self, _mode: ModeId) -> Vec<f64> {
        vec![0.0]
    }
}

/// Walker on `[-reach, reach]` plus one shuttle run. `script` reschedules the
/// run (boarding ETA) at given epochs.
pub struct ShuttleWorld {
    pub reach: f64,
    pub t: u32,
    pub state: HybridState,
    pub ctx: ContextSet<ShuttleCtx>,
    pub script: Vec<(u32, u32)>,
}

impl ShuttleWorld {
    pub fn new(start: f64, board: (f64, u32), alight: (f64, u32), script: Vec<(u32, u32)>) -> Self {
        let c = ShuttleCtx {
            board: Some(board),
            alight: Some(alight),
        };
        Self {
            reach: 20.0,
            t: 0,
            state: HybridState::new(WALK, vec![start]),
            ctx: ContextSet::new(c.clone(), vec![c]).unwrap(),
            script,
        }
    }
}

impl Environment for ShuttleWorld {
    type Context = ShuttleCtx;
    type Switch = ShuttleSwitch;

    fn state(&self) -> &HybridState {
        &self.state
    }

    fn context(&self) -> &ContextSet<ShuttleCtx> {
        &self.ctx
    }

    fn step(&mut self, action: &Action<ShuttleSwitch>, _rng: &mut dyn RngCore) -> Result<StepOutcome, ModelError> {
        let c = &mut self.ctx.current;
        let mut switched = None;
        let reward = match (action, self.state.mode) {
            (Action::Control(u), WALK) => {
                self.state.cont[0] = (self.state.cont[0] + u[0]).clamp(-self.reach, self.reach);
                -1.0
            }
            (Action::Control(_), _) => -0.2,
            (Action::ModeSwitch(ShuttleSwitch::Board), WALK) => {
                let ok = c.board.is_some_and(|(x, eta)| eta == 0 && (self.state.cont[0] - x).abs() <= 0.5);
                if ok {
                    self.state = HybridState::new(SHUTTLE, vec![c.board.unwrap().0]);
                }
                switched = Some(ok);
                -1.0
            }
            (Action::ModeSwitch(ShuttleSwitch::Alight), SHUTTLE) => {
                let ok = c.alight.is_some_and(|(_, eta)| eta == 0);
                if ok {
                    self.state = HybridState::new(WALK, vec![c.alight.unwrap().0]);
                }
                switched = Some(ok);
                -1.0
            }
            (Action::ModeSwitch(_), _) => {
                switched = Some(false);
                -1.0
            }
        };
        self.t += 1;
        let tick = |e: Option<(f64, u32)>| e.and_then(|(x, eta)| (eta > 0).then(|| (x, eta - 1)));
        c.board = tick(c.board);
        c.alight = tick(c.alight);
        for &(at, eta) in &self.script {
            if at == self.t {
                // The whole run shifts: alighting keeps its lag behind boarding.
                if let (Some(b), Some(a)) = (c.board.as_mut(), c.alight.as_mut()) {
                    a.1 = eta + (a.1 - b.1.min(a.1));
                    b.1 = eta;
                }
            }
        }
        if self.state.mode == SHUTTLE {
            if let Some((x, 0)) = c.alight {
                self.state.cont[0] = x;
            }
        }
        self.ctx.predicted = vec![c.clone()];
        Ok(StepOutcome { reward, switched })
    }
}

pub fn walk_goal(x: f64) -> GoalSpace {
    GoalSpace::new(WALK, vec![x], 0.5, 1).unwrap()
}
