//! Closed-loop episodes for the baseline controllers, logged in the same
//! format as the hybrid executive.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::RngCore;

use super::dpw::UctParams;
use super::rhc::{rhc_control, rhc_plan, RhcParams};
use super::uct::uct_action;
use crate::dreamr::arrival::ArrivalModel;
use crate::dreamr::dynamics::DreamrSwitch;
use crate::dreamr::routes::DreamrContext;
use crate::dreamr::{DreamrParams, MOVE};
use crate::error::{ExecError, ModelError};
use crate::executive::{at_transition, Environment};
use crate::global::{GlobalPlan, PlanStep};
use crate::local::CostToGoTable;
use crate::model::{is_goal, Action, Clock, ContextSet, EpisodeResult, GoalSpace, HybridState, StepEvents, StepRecord};

/// What a controller did this step.
#[derive(Clone, Debug)]
pub struct Decision<S> {
    pub action: Action<S>,
    /// Wall time of a route/global plan made during this decision.
    pub plan_ns: Option<u64>,
    pub preempted: bool,
}

pub trait Controller {
    type Context;
    type Switch: Copy + Eq + core::fmt::Debug;

    fn decide(
        &mut self,
        t: u32,
        state: &HybridState,
        ctx: &ContextSet<Self::Context>,
        rng: &mut dyn RngCore,
        clock: &dyn Clock,
    ) -> Result<Decision<Self::Switch>, ExecError>;

    /// Called after the environment step; `switched` as in [`crate::executive::StepOutcome`].
    fn observe(&mut self, _t: u32, _switched: Option<bool>) {}
}

/// Runs `ctrl` until the goal or `step_cap`.
#[allow(clippy::too_many_arguments)]
pub fn run_controller<C, E>(
    ctrl: &mut C,
    env: &mut E,
    goal: &GoalSpace,
    step_cap: u32,
    log_steps: bool,
    planner_rng: &mut dyn RngCore,
    env_rng: &mut dyn RngCore,
    clock: &dyn Clock,
) -> Result<EpisodeResult<C::Switch>, ExecError>
where
    C: Controller,
    E: Environment<Context = C::Context, Switch = C::Switch>,
{
    let mut out = EpisodeResult::default();
    let mut t = 0u32;
    loop {
        if is_goal(env.state(), goal) {
            out.reached_goal = true;
            break;
        }
        if t >= step_cap {
            out.truncated = true;
            break;
        }
        let t0 = clock.now_ns();
        let d = ctrl.decide(t, env.state(), env.context(), planner_rng, clock)?;
        out.decision_times_ns.push(clock.now_ns().saturating_sub(t0));
        let mut events = StepEvents {
            preempted: d.preempted,
            ..Default::default()
        };
        if let Some(ns) = d.plan_ns {
            out.plan_times_ns.push(ns);
            out.global_plans += 1;
            events.replanned = true;
        }
        if d.preempted {
            out.preemptions += 1;
        }
        let before = env.state().clone();
        let o = env.step(&d.action, env_rng)?;
        if o.reward > 0.0 {
            return Err(ModelError::Contract("positive reward").into());
        }
        match o.switched {
            Some(true) => {
                events.switched = true;
                out.switch_count += 1;
            }
            Some(false) => {
                events.failed_switch = true;
                out.failed_switches += 1;
            }
            None => {}
        }
        ctrl.observe(t, o.switched);
        out.cumulative_cost -= o.reward;
        if log_steps {
            out.per_step_log.push(StepRecord {
                t,
                state: before,
                action: d.action,
                reward: o.reward,
                events,
            });
        }
        t += 1;
    }
    out.steps_taken = t;
    Ok(out)
}

/// UCT re-run from scratch at every step.
pub struct UctController<'a> {
    pub params: UctParams,
    pub dparams: DreamrParams,
    pub table: &'a CostToGoTable,
    pub goal: [f64; 2],
}

impl Controller for UctController<'_> {
    type Context = DreamrContext;
    type Switch = DreamrSwitch;

    fn decide(
        &mut self,
        _t: u32,
        state: &HybridState,
        ctx: &ContextSet<DreamrContext>,
        rng: &mut dyn RngCore,
        _clock: &dyn Clock,
    ) -> Result<Decision<DreamrSwitch>, ExecError> {
        let action = uct_action(state, &ctx.current.snapshot, self.goal, &self.params, &self.dparams, self.table, rng);
        Ok(Decision {
            action,
            plan_ns: None,
            preempted: false,
        })
    }
}

/// Nominal route plan tracked by receding-horizon control.
pub struct RhcController {
    pub params: RhcParams,
    pub dparams: DreamrParams,
    pub goal: GoalSpace,
    nominal: Arc<ArrivalModel>,
    plan: Option<GlobalPlan<DreamrSwitch>>,
    last_plan: u32,
    replan: bool,
    warm: Vec<[f64; 2]>,
    /// Steps where the optimizer fell back to PD tracking.
    pub fallbacks: u32,
}

impl RhcController {
    pub fn new(params: RhcParams, dparams: DreamrParams, goal: GoalSpace) -> Self {
        let nominal = Arc::new(ArrivalModel::new(0.0, 2 * params.plan_horizon.max(1)));
        Self {
            params,
            dparams,
            goal,
            nominal,
            plan: None,
            last_plan: 0,
            replan: true,
            warm: Vec::new(),
            fallbacks: 0,
        }
    }

    fn control_toward(&mut self, state: &HybridState, target: [f64; 2], deadline: u32) -> Action<DreamrSwitch> {
        let h = deadline.clamp(1, self.params.lookahead);
        let warm = if self.warm.len() > 1 { Some(&self.warm[1..]) } else { None };
        let r = rhc_control(&self.dparams, &state.cont, target, h, self.params.max_iters, warm);
        if r.fallback {
            self.fallbacks += 1;
        }
        self.warm = r.solution.map(|s| s.controls).unwrap_or_default();
        Action::Control(r.control.to_vec())
    }
}

/// What the current plan asks for right now.
enum Next {
    Switch(DreamrSwitch),
    Fly([f64; 2], u32),
    Hold,
    Replan,
}

impl Controller for RhcController {
    type Context = DreamrContext;
    type Switch = DreamrSwitch;

    fn decide(
        &mut self,
        t: u32,
        state: &HybridState,
        ctx: &ContextSet<DreamrContext>,
        _rng: &mut dyn RngCore,
        clock: &dyn Clock,
    ) -> Result<Decision<DreamrSwitch>, ExecError> {
        let mut plan_ns = None;
        let mut preempted = false;
        for attempt in 0..2 {
            if self.replan || self.plan.is_none() || t.saturating_sub(self.last_plan) >= self.params.replan_period {
                let t0 = clock.now_ns();
                self.plan = Some(rhc_plan(state, ctx, &self.goal, &self.params, &self.dparams, &self.nominal)?);
                plan_ns = Some(clock.now_ns().saturating_sub(t0));
                self.last_plan = t;
                self.replan = false;
                self.warm.clear();
            }
            match self.next(state, ctx) {
                Next::Replan if attempt == 0 => {
                    preempted = true;
                    self.replan = true;
                }
                Next::Replan | Next::Hold => {
                    return Ok(Decision {
                        action: Action::Control(alloc::vec![0.0, 0.0]),
                        plan_ns,
                        preempted,
                    })
                }
                Next::Switch(sw) => {
                    return Ok(Decision {
                        action: Action::ModeSwitch(sw),
                        plan_ns,
                        preempted,
                    })
                }
                Next::Fly(target, deadline) => {
                    let action = self.control_toward(state, target, deadline);
                    return Ok(Decision {
                        action,
                        plan_ns,
                        preempted,
                    });
                }
            }
        }
        unreachable!("second attempt always returns")
    }

    fn observe(&mut self, _t: u32, switched: Option<bool>) {
        match switched {
            Some(true) => {
                if let Some(p) = self.plan.as_mut() {
                    let n = p.steps.len().min(2);
                    p.steps.drain(..n);
                }
                self.warm.clear();
            }
            Some(false) => self.replan = true,
            None => {}
        }
    }
}

impl RhcController {
    fn next(&self, state: &HybridState, ctx: &ContextSet<DreamrContext>) -> Next {
        let Some(plan) = self.plan.as_ref() else {
            return Next::Replan;
        };
        let Some(PlanStep::Traverse { mode, target, .. }) = plan.steps.first() else {
            return Next::Replan;
        };
        if *mode != state.mode {
            return Next::Replan;
        }
        let target2 = [target[0], target[1]];
        let pending = match plan.steps.get(1) {
            Some(PlanStep::Switch { switch, .. }) => *switch,
            _ => return Next::Fly(target2, self.params.lookahead),
        };
        let snap = &ctx.current.snapshot;
        let Some(w) = snap.route(pending.vehicle()).and_then(|r| r.waypoint(pending.waypoint())) else {
            return Next::Replan;
        };
        let slow = state.mode != MOVE || libm::hypot(state.cont[2], state.cont[3]) <= self.dparams.eps_vel;
        let here = at_transition(&state.cont, target, 2, self.dparams.eps_pos);
        if w.eta == 0 {
            return if here && slow { Next::Switch(pending) } else { Next::Replan };
        }
        if state.mode == MOVE {
            Next::Fly(target2, w.eta.saturating_sub(self.params.arrival_margin).max(1))
        } else {
            Next::Hold
        }
    }
}
