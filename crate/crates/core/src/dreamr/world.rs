//! Episode simulator: agent, vehicles, ETA perturbation and route lifecycle.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::arrival::perturb_eta;
use super::dynamics::{DreamrProblem, DreamrSwitch};
use super::params::DreamrParams;
use super::routes::{DreamrContext, LiveRoute, RouteSpec, Snapshot};
use super::scenario::Scenario;
use super::{MOVE, RIDE};
use crate::error::ModelError;
use crate::executive::{Environment, StepOutcome};
use crate::model::{Action, ContextSet, Dmssp, GoalSpace, HybridState, SwitchOutcome};

/// Stream id mixed into the scenario seed for the context rng, so the
/// vehicles evolve identically whatever the agent does.
const CONTEXT_STREAM: u64 = 0x5eed_c0de;

pub struct DreamrWorld {
    problem: DreamrProblem,
    perturb_p: f64,
    horizon: u32,
    pending: Vec<RouteSpec>,
    next_pending: usize,
    snapshot: Snapshot,
    ctx: ContextSet<DreamrContext>,
    state: HybridState,
    ctx_rng: ChaCha8Rng,
    /// Agent was dropped off because its vehicle finished its route.
    pub forced_alights: u32,
}

impl DreamrWorld {
    pub fn new(scenario: &Scenario, params: DreamrParams, horizon: u32) -> Self {
        let mut pending: Vec<RouteSpec> = scenario.routes.iter().filter(|r| r.start_epoch > 0).cloned().collect();
        pending.sort_by_key(|r| (r.start_epoch, r.vehicle));
        let snapshot = Snapshot {
            epoch: 0,
            routes: scenario.initial_routes().map(LiveRoute::from_spec).collect(),
        };
        let start = HybridState::new(MOVE, [scenario.start[0], scenario.start[1], 0.0, 0.0]);
        let ctx = make_context(&snapshot, horizon);
        Self {
            problem: DreamrProblem::new(params),
            perturb_p: scenario.perturb_p,
            horizon,
            pending,
            next_pending: 0,
            snapshot,
            ctx,
            state: start,
            ctx_rng: ChaCha8Rng::seed_from_u64(scenario.seed ^ CONTEXT_STREAM),
            forced_alights: 0,
        }
    }

    pub fn params(&self) -> &DreamrParams {
        &self.problem.params
    }

    pub fn problem(&self) -> &DreamrProblem {
        &self.problem
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }

    pub fn epoch(&self) -> u32 {
        self.snapshot.epoch
    }

    /// Overrides the agent state (tests and fixtures).
    pub fn set_state(&mut self, state: HybridState) {
        self.state = state;
    }

    /// Advances vehicles one epoch: drop the waypoint just visited, perturb
    /// every remaining ETA, retire finished routes and add scheduled ones.
    fn advance_vehicles(&mut self) {
        let p = self.perturb_p;
        let rng = &mut self.ctx_rng;
        for r in &mut self.snapshot.routes {
            if r.waypoints.first().is_some_and(|w| w.eta == 0) {
                let w = r.waypoints.remove(0);
                r.prev_pos = w.pos;
                r.since_prev = 0;
            }
            for w in &mut r.waypoints {
                w.eta = perturb_eta(w.eta, p, rng);
            }
            r.enforce_monotone();
            r.since_prev += 1;
        }
        self.snapshot.routes.retain(|r| !r.waypoints.is_empty());
        self.snapshot.epoch += 1;
        while let Some(spec) = self.pending.get(self.next_pending) {
            if spec.start_epoch > self.snapshot.epoch {
                break;
            }
            self.snapshot.routes.push(LiveRoute::from_spec(spec));
            self.next_pending += 1;
        }
    }

    fn drift(&self, rng: &mut dyn RngCore) -> Result<(HybridState, f64), ModelError> {
        let zero = [0.0, 0.0];
        self.control_step(&zero, rng)
    }

    fn control_step(&self, control: &[f64], rng: &mut dyn RngCore) -> Result<(HybridState, f64), ModelError> {
        if self.state.mode == RIDE {
            return Ok((self.state.clone(), -1.0));
        }
        let cont = self.problem.step_continuous(self.state.mode, &self.state.cont, control, rng)?;
        let next = HybridState {
            mode: MOVE,
            cont,
            grounding: None,
        };
        let r = self
            .problem
            .reward(&self.state, &Action::<DreamrSwitch>::Control(control.to_vec()), &next);
        Ok((next, r))
    }
}

fn make_context(snapshot: &Snapshot, horizon: u32) -> ContextSet<DreamrContext> {
    let shared = Arc::new(snapshot.clone());
    ContextSet {
        current: DreamrContext {
            snapshot: shared.clone(),
            offset: 0,
        },
        predicted: (1..=horizon.max(1))
            .map(|k| DreamrContext {
                snapshot: shared.clone(),
                offset: k,
            })
            .collect(),
    }
}

impl Environment for DreamrWorld {
    type Context = DreamrContext;
    type Switch = DreamrSwitch;

    fn state(&self) -> &HybridState {
        &self.state
    }

    fn context(&self) -> &ContextSet<DreamrContext> {
        &self.ctx
    }

    fn step(&mut self, action: &Action<DreamrSwitch>, rng: &mut dyn RngCore) -> Result<StepOutcome, ModelError> {
        let (next, reward, switched) = match action {
            Action::Control(u) => {
                let (n, r) = self.control_step(u, rng)?;
                (n, r, None)
            }
            Action::ModeSwitch(sw) => match self.problem.apply_mode_switch(&self.ctx.current, &self.state, *sw)? {
                SwitchOutcome::Success(s) => {
                    let r = self.problem.reward(&self.state, action, &s);
                    (s, r, Some(true))
                }
                SwitchOutcome::Failure => {
                    // A failed attempt spends the epoch drifting.
                    let (n, r) = self.drift(rng)?;
                    (n, r, Some(false))
                }
            },
        };
        self.state = next;
        self.advance_vehicles();
        if self.state.mode == RIDE {
            let vehicle = self.state.grounding.unwrap_or(u32::MAX);
            match self.snapshot.route(vehicle) {
                Some(r) => {
                    let p = r.position();
                    self.state.cont = [p[0], p[1], 0.0, 0.0].into();
                }
                None => {
                    // Route finished: the agent is left at its last position.
                    self.state = HybridState::new(MOVE, [self.state.cont[0], self.state.cont[1], 0.0, 0.0]);
                    self.forced_alights += 1;
                }
            }
        }
        self.ctx = make_context(&self.snapshot, self.horizon);
        Ok(StepOutcome { reward, switched })
    }
}

/// Goal region: within `eps_pos` of the goal position and at most `eps_vel`
/// fast, in Move mode (the same condition as reaching a waypoint to board).
pub fn goal_space(scenario: &Scenario, params: &DreamrParams) -> GoalSpace {
    GoalSpace::new(MOVE, [scenario.goal[0], scenario.goal[1], 0.0, 0.0], params.eps_pos, 2)
        .expect("valid goal")
        .with_tail_tolerance(params.eps_vel)
}
