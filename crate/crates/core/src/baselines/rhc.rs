//! Two-level deterministic receding-horizon baseline: a shortest route over
//! waypoints under nominal ETAs and straight-line edge estimates, tracked by
//! re-solving a short trajectory optimization every step.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dreamr::arrival::ArrivalModel;
use crate::dreamr::dynamics::DreamrSwitch;
use crate::dreamr::hooks::nominal_flight_epochs;
use crate::dreamr::routes::DreamrContext;
use crate::dreamr::{DreamrHooks, DreamrParams, MOVE, RIDE};
use crate::error::PlanError;
use crate::global::{global_plan, EdgeWeightSource, GlobalPlan, Horizon, PlanStep, SearchConfig};
use crate::model::{ContextSet, GoalSpace, HybridState, ModeId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhcParams {
    /// Steps between route replans (events also trigger one).
    pub replan_period: u32,
    /// Context horizon for route planning.
    pub plan_horizon: u32,
    /// Boarding candidates kept per expansion.
    pub candidates: usize,
    /// Steps of the trajectory optimization.
    pub lookahead: u32,
    pub max_iters: u32,
    /// Epochs ahead of the nominal ETA the tracker aims to be at a boarding
    /// point, so an early car is not missed.
    pub arrival_margin: u32,
}

impl Default for RhcParams {
    fn default() -> Self {
        Self {
            replan_period: 10,
            plan_horizon: 150,
            candidates: 64,
            lookahead: 20,
            max_iters: 300,
            arrival_margin: 3,
        }
    }
}

impl RhcParams {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.replan_period == 0 || self.plan_horizon == 0 || self.candidates == 0 || self.lookahead == 0 || self.max_iters == 0 {
            return Err("receding-horizon parameters must be positive");
        }
        Ok(())
    }
}

/// Deterministic edge costs: `λ_d·distance` plus one per epoch, plus the
/// hover penalty for epochs spent waiting for the vehicle.
#[derive(Clone, Debug)]
pub struct NominalWeights {
    pub params: DreamrParams,
}

impl NominalWeights {
    pub fn move_weight(&self, rel: &[f64], deadline: Option<f64>) -> Option<f64> {
        let p = &self.params;
        let d = libm::hypot(rel[0], rel[1]);
        let fly = nominal_flight_epochs(p, [rel[0], rel[1]], [0.0, 0.0]);
        match deadline {
            None => Some(p.lambda_d * d + fly),
            Some(t) if fly > t => None,
            Some(t) => Some(p.lambda_d * d + t + p.lambda_h * (t - fly)),
        }
    }
}

impl EdgeWeightSource for NominalWeights {
    fn traverse_weight(&self, mode: ModeId, rel: &[f64], horizon: &Horizon) -> Result<Option<f64>, PlanError> {
        match (mode, horizon) {
            (m, Horizon::Free) if m == MOVE => Ok(self.move_weight(rel, None)),
            (m, Horizon::Window(h)) if m == MOVE => Ok(self.move_weight(rel, Some(h.mean()))),
            (m, Horizon::Window(h)) if m == RIDE => Ok(Some(h.mean())),
            _ => Err(PlanError::MissingTable(mode.0)),
        }
    }
}

/// Shortest route under nominal ETAs. Without any route the plan flies
/// straight to the goal.
pub fn rhc_plan(
    state: &HybridState,
    ctx: &ContextSet<DreamrContext>,
    goal: &GoalSpace,
    params: &RhcParams,
    dparams: &DreamrParams,
    nominal: &Arc<ArrivalModel>,
) -> Result<GlobalPlan<DreamrSwitch>, PlanError> {
    let g = [goal.center[0], goal.center[1]];
    let mut hooks = DreamrHooks::new(dparams.clone(), params.plan_horizon, g, nominal.clone());
    // Waiting is already part of the nominal weights.
    hooks.wait_cost = false;
    let weights = NominalWeights { params: dparams.clone() };
    let search = SearchConfig {
        samples: params.candidates,
        ..SearchConfig::default()
    };
    // The hooks never draw from the rng; it only satisfies the interface.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    if let Some(plan) = global_plan(state, goal, ctx, &hooks, &weights, &search, &mut rng)? {
        return Ok(plan);
    }
    let rel = [state.cont[0] - g[0], state.cont[1] - g[1]];
    Ok(GlobalPlan {
        steps: alloc::vec![PlanStep::Traverse {
            mode: MOVE,
            target: goal.center.clone(),
            horizon: Horizon::Free,
            weight: weights.move_weight(&rel, None).unwrap_or(0.0),
        }],
        cost: 0.0,
        expansions: 0,
    })
}

/// Result of one trajectory optimization.
#[derive(Clone, Debug, PartialEq)]
pub struct ShootingSolution {
    pub controls: Vec<[f64; 2]>,
    pub cost: f64,
    pub iterations: u32,
    /// Whether the projected-gradient step size collapsed at a stationary point.
    pub converged: bool,
}

/// Weights of the shooting objective, in units of one epoch's worth of
/// full-acceleration displacement and velocity change.
const W_POS: f64 = 10.0;
const W_VEL: f64 = 10.0;
const W_SPEED: f64 = 100.0;
const SMOOTH: f64 = 1e-6;

fn sq(x: f64) -> f64 {
    x * x
}

struct Shooting<'a> {
    p: &'a DreamrParams,
    p0: [f64; 2],
    v0: [f64; 2],
    target: [f64; 2],
    h: usize,
}

impl Shooting<'_> {
    /// Cost and gradient with respect to the normalized controls `z ∈ [−1,1]`.
    fn eval(&self, z: &[[f64; 2]], grad: Option<&mut [[f64; 2]]>) -> f64 {
        let p = self.p;
        let dt = p.epoch_s;
        let a = p.acc_lim;
        let sp = a * dt * dt;
        let sv = a * dt;
        let h = self.h;
        let mut pos = Vec::with_capacity(h + 1);
        let mut vel = Vec::with_capacity(h + 1);
        pos.push(self.p0);
        vel.push(self.v0);
        let mut cost = 0.0;
        for t in 0..h {
            let (pp, vv) = (pos[t], vel[t]);
            let mut np = [0.0; 2];
            let mut nv = [0.0; 2];
            for i in 0..2 {
                let u = a * z[t][i];
                nv[i] = vv[i] + u * dt;
                np[i] = pp[i] + vv[i] * dt + 0.5 * u * dt * dt;
                let over = nv[i].abs() - p.xydot_lim;
                if over > 0.0 {
                    cost += W_SPEED * (over / sv) * (over / sv);
                }
            }
            let d = [np[0] - pp[0], np[1] - pp[1]];
            cost += p.lambda_d * libm::sqrt(d[0] * d[0] + d[1] * d[1] + SMOOTH * SMOOTH) + 1.0;
            pos.push(np);
            vel.push(nv);
        }
        let ep = [pos[h][0] - self.target[0], pos[h][1] - self.target[1]];
        cost += W_POS * (sq(ep[0] / sp) + sq(ep[1] / sp));
        cost += W_VEL * (sq(vel[h][0] / sv) + sq(vel[h][1] / sv));

        let Some(g) = grad else {
            return cost;
        };
        let mut gp = [2.0 * W_POS * ep[0] / (sp * sp), 2.0 * W_POS * ep[1] / (sp * sp)];
        let mut gv = [2.0 * W_VEL * vel[h][0] / (sv * sv), 2.0 * W_VEL * vel[h][1] / (sv * sv)];
        for t in (0..h).rev() {
            let d = [pos[t + 1][0] - pos[t][0], pos[t + 1][1] - pos[t][1]];
            let s = libm::sqrt(d[0] * d[0] + d[1] * d[1] + SMOOTH * SMOOTH);
            for i in 0..2 {
                // Speed penalty on v_{t+1}.
                let over = vel[t + 1][i].abs() - p.xydot_lim;
                if over > 0.0 {
                    gv[i] += 2.0 * W_SPEED * over / (sv * sv) * vel[t + 1][i].signum();
                }
                let gd = p.lambda_d * d[i] / s;
                let gp_next = gp[i] + gd;
                g[t][i] = a * (gp_next * 0.5 * dt * dt + gv[i] * dt);
                // Back to (p_t, v_t): the step cost pulls −gd on p_t.
                let gp_t = gp_next - gd;
                gv[i] += gp_next * dt;
                gp[i] = gp_t;
            }
        }
        cost
    }
}

/// Projected-gradient descent with Armijo backtracking over `horizon`
/// normalized controls, warm-started from `warm` when given.
pub fn shoot(
    params: &DreamrParams,
    cont: &[f64],
    target: [f64; 2],
    horizon: u32,
    max_iters: u32,
    warm: Option<&[[f64; 2]]>,
) -> ShootingSolution {
    let h = horizon.max(1) as usize;
    let prob = Shooting {
        p: params,
        p0: [cont[0], cont[1]],
        v0: [cont[2], cont[3]],
        target,
        h,
    };
    let mut z: Vec<[f64; 2]> = (0..h)
        .map(|t| warm.and_then(|w| w.get(t).copied()).unwrap_or([0.0, 0.0]))
        .map(|u| [(u[0] / params.acc_lim).clamp(-1.0, 1.0), (u[1] / params.acc_lim).clamp(-1.0, 1.0)])
        .collect();
    let mut g = alloc::vec![[0.0; 2]; h];
    let mut cand = z.clone();
    let mut cost = prob.eval(&z, Some(&mut g));
    let mut step = 1e-3;
    let mut converged = false;
    let mut it = 0;
    while it < max_iters {
        it += 1;
        let mut accepted = false;
        for _ in 0..60 {
            let mut decrease = 0.0;
            for t in 0..h {
                for i in 0..2 {
                    cand[t][i] = (z[t][i] - step * g[t][i]).clamp(-1.0, 1.0);
                    decrease += g[t][i] * (z[t][i] - cand[t][i]);
                }
            }
            if decrease <= 1e-14 * (1.0 + cost.abs()) {
                break;
            }
            let c = prob.eval(&cand, None);
            if c.is_finite() && c <= cost - 1e-4 * decrease {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = cost.is_finite();
            break;
        }
        core::mem::swap(&mut z, &mut cand);
        cost = prob.eval(&z, Some(&mut g));
        step *= 2.0;
    }
    ShootingSolution {
        controls: z.iter().map(|v| [v[0] * params.acc_lim, v[1] * params.acc_lim]).collect(),
        cost,
        iterations: it,
        converged,
    }
}

/// Proportional-derivative tracking, saturated per axis.
pub fn pd_control(params: &DreamrParams, cont: &[f64], target: [f64; 2]) -> [f64; 2] {
    let w = 0.5 / params.epoch_s;
    let a = params.acc_lim;
    [0, 1].map(|i| (w * w * (target[i] - cont[i]) - 2.0 * w * cont[i + 2]).clamp(-a, a))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhcControl {
    pub control: [f64; 2],
    pub solution: Option<ShootingSolution>,
    /// The optimizer failed and PD tracking was used.
    pub fallback: bool,
}

/// First control of the trajectory that reaches `target` at rest in
/// `horizon` steps.
pub fn rhc_control(params: &DreamrParams, cont: &[f64], target: [f64; 2], horizon: u32, max_iters: u32, warm: Option<&[[f64; 2]]>) -> RhcControl {
    let at_rest = libm::hypot(cont[2], cont[3]) == 0.0;
    if at_rest && cont[0] == target[0] && cont[1] == target[1] {
        return RhcControl {
            control: [0.0, 0.0],
            solution: None,
            fallback: false,
        };
    }
    let sol = shoot(params, cont, target, horizon, max_iters, warm);
    if !sol.cost.is_finite() || sol.iterations == 0 {
        return RhcControl {
            control: pd_control(params, cont, target),
            solution: None,
            fallback: true,
        };
    }
    RhcControl {
        control: sol.controls[0],
        solution: Some(sol),
        fallback: false,
    }
}
