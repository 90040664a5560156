//! Interleaved planning and execution: follow the current plan with the local
//! policies, switch modes at transition states, pre-empt risky traversals and
//! replan on events or periodically.

use alloc::vec::Vec;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{ExecError, ModelError};
use crate::global::{global_plan, GlobalPlan, LocalLayer, ModePolicy, PlanStep, PlanningHooks, SearchConfig};
use crate::horizon::HorizonDist;
use crate::local::{holding_action, policy_action, should_preempt};
use crate::model::{is_goal, Action, Clock, ContextSet, EpisodeResult, GoalSpace, HybridState, StepEvents, StepRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutiveConfig {
    /// `β_d` per mode, indexed by mode id.
    pub beta: Vec<f64>,
    /// `ΔT`, steps between periodic replans.
    pub replan_period: u32,
    /// `N`, samples per candidate switch.
    pub sample_count: usize,
    /// `K`, context horizon.
    pub context_horizon: u32,
    /// Episodes stop (not reached) after this many steps.
    pub step_cap: u32,
    /// Abort after this many consecutive failed plans.
    pub max_consecutive_no_path: u32,
    /// Duplicate-detection quantum for the search.
    pub quantum: f64,
    pub max_expansions: usize,
    /// Keep the per-step trajectory log.
    pub log_steps: bool,
}

impl ExecutiveConfig {
    pub fn validate(&self) -> Result<(), ExecError> {
        if self.replan_period < 1 {
            return Err(ExecError::Config("replan period must be at least 1"));
        }
        if self.sample_count < 1 {
            return Err(ExecError::Config("sample count must be at least 1"));
        }
        if self.context_horizon < 1 {
            return Err(ExecError::Config("context horizon must be positive"));
        }
        if self.beta.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(ExecError::Config("beta must lie in [0, 1]"));
        }
        Ok(())
    }

    fn search(&self) -> SearchConfig {
        SearchConfig {
            samples: self.sample_count,
            quantum: self.quantum,
            max_expansions: self.max_expansions,
        }
    }
}

/// Result of one environment step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    /// `Some(true)` for an executed switch, `Some(false)` for a failed one.
    pub switched: Option<bool>,
}

/// The simulated world: owns the agent state and the evolving context.
pub trait Environment {
    type Context;
    type Switch: Copy + Eq + core::fmt::Debug;

    fn state(&self) -> &HybridState;
    fn context(&self) -> &ContextSet<Self::Context>;
    /// Apply `action`, advance the world one step, and report the reward.
    fn step(&mut self, action: &Action<Self::Switch>, rng: &mut dyn RngCore) -> Result<StepOutcome, ModelError>;
}

/// `c_t ≈ c_p`: Euclidean distance over the first `dims` coordinates at most `eps`.
pub fn at_transition(c: &[f64], target: &[f64], dims: usize, eps: f64) -> bool {
    let mut sq = 0.0;
    for i in 0..dims {
        let d = c[i] - target[i];
        sq += d * d;
    }
    sq <= eps * eps
}

/// Replan on pre-emption, a failed switch, or once `ΔT` steps have passed.
pub fn replan_trigger(events: &StepEvents, t: u32, lpt: u32, period: u32) -> bool {
    events.preempted || events.failed_switch || t.saturating_sub(lpt) >= period
}

/// Mutable executive bookkeeping.
#[derive(Clone, Debug)]
pub struct ExecutiveState<S> {
    pub plan: Option<GlobalPlan<S>>,
    pub lpt: u32,
    pub plan_flag: bool,
}

/// Runs one episode to the goal, the step cap, or an abort.
#[allow(clippy::too_many_arguments)]
pub fn run_episode<H, E>(
    hooks: &H,
    layer: &LocalLayer,
    config: &ExecutiveConfig,
    env: &mut E,
    goal: &GoalSpace,
    planner_rng: &mut dyn RngCore,
    env_rng: &mut dyn RngCore,
    clock: &dyn Clock,
) -> Result<EpisodeResult<H::Switch>, ExecError>
where
    H: PlanningHooks,
    E: Environment<Context = H::Context, Switch = H::Switch>,
{
    config.validate()?;
    let search = config.search();
    let mut out = EpisodeResult::default();
    let mut ex = ExecutiveState {
        plan: None,
        lpt: 0,
        plan_flag: true,
    };
    let mut no_path = 0u32;
    let mut t = 0u32;
    loop {
        if is_goal(env.state(), goal) {
            out.reached_goal = true;
            break;
        }
        if t >= config.step_cap {
            out.truncated = true;
            break;
        }
        let mut events = StepEvents::default();

        if ex.plan_flag {
            let t0 = clock.now_ns();
            let plan = global_plan(env.state(), goal, env.context(), hooks, layer, &search, planner_rng)?;
            out.plan_times_ns.push(clock.now_ns().saturating_sub(t0));
            out.global_plans += 1;
            events.replanned = true;
            ex.lpt = t;
            ex.plan_flag = false;
            if plan.is_some() {
                no_path = 0;
            } else {
                no_path += 1;
                if no_path > config.max_consecutive_no_path {
                    out.truncated = true;
                    break;
                }
            }
            ex.plan = plan;
        }

        let t0 = clock.now_ns();
        let action = decide(hooks, layer, config, env, &ex, &mut events)?;
        out.decision_times_ns.push(clock.now_ns().saturating_sub(t0));

        let state_before = env.state().clone();
        let outcome = env.step(&action, env_rng)?;
        if outcome.reward > 0.0 {
            return Err(ModelError::Contract("positive reward").into());
        }
        match outcome.switched {
            Some(true) => {
                events.switched = true;
                out.switch_count += 1;
                if let Some(plan) = ex.plan.as_mut() {
                    // Drop the completed traversal and the switch.
                    let n = plan.steps.len().min(2);
                    plan.steps.drain(..n);
                }
            }
            Some(false) => {
                events.failed_switch = true;
                out.failed_switches += 1;
            }
            None => {}
        }
        if ex.plan.is_none() {
            // Retry on the next tick.
            ex.plan_flag = true;
        }
        if events.preempted {
            out.preemptions += 1;
        }
        out.cumulative_cost -= outcome.reward;
        if config.log_steps {
            out.per_step_log.push(StepRecord {
                t,
                state: state_before,
                action,
                reward: outcome.reward,
                events,
            });
        }
        t += 1;
        if replan_trigger(&events, t, ex.lpt, config.replan_period) {
            ex.plan_flag = true;
        }
    }
    out.steps_taken = t;
    Ok(out)
}

fn hold<H: PlanningHooks>(hooks: &H, state: &HybridState) -> Action<H::Switch> {
    Action::Control(hooks.hold_control(state.mode))
}

/// One step of the branch order: switch if at the transition state, else
/// pre-empt if the risk test fires, else the local policy action.
fn decide<H, E>(
    hooks: &H,
    layer: &LocalLayer,
    config: &ExecutiveConfig,
    env: &E,
    ex: &ExecutiveState<H::Switch>,
    events: &mut StepEvents,
) -> Result<Action<H::Switch>, ExecError>
where
    H: PlanningHooks,
    E: Environment<Context = H::Context, Switch = H::Switch>,
{
    let state = env.state();
    let ctx = env.context();
    let Some(plan) = ex.plan.as_ref() else {
        return Ok(hold(hooks, state));
    };
    let Some(PlanStep::Traverse { mode, target, .. }) = plan.steps.first() else {
        return Ok(hold(hooks, state));
    };
    if *mode != state.mode {
        // The world moved us out of the planned mode.
        events.preempted = true;
        return Ok(hold(hooks, state));
    }
    let pending = match plan.steps.get(1) {
        Some(PlanStep::Switch { switch, .. }) => Some(*switch),
        _ => None,
    };

    if let Some(sw) = pending {
        if hooks.at_transition(state, target) && hooks.switch_ready(ctx, state, &sw) {
            return Ok(Action::ModeSwitch(sw));
        }
    }

    let (table, model) = match layer.policy(*mode)? {
        ModePolicy::Passive { .. } => return Ok(hold(hooks, state)),
        ModePolicy::Table { table, model } => (table, model),
    };
    let rel = hooks.relative(*mode, &state.cont, target);
    let dist = match pending {
        Some(sw) => {
            let Some(p) = hooks.refresh_horizon(ctx, &sw) else {
                // The enabling event is gone.
                events.preempted = true;
                return Ok(hold(hooks, state));
            };
            let p = match p.truncated(table.horizon) {
                Some(p) => p,
                None => HorizonDist::degenerate(table.horizon)?,
            };
            let beta = config.beta.get(mode.index()).copied().unwrap_or(1.0);
            if should_preempt(table, &rel, &p, beta) {
                events.preempted = true;
                return Ok(hold(hooks, state));
            }
            p
        }
        None => free_horizon(table, &rel)?,
    };
    let d = if pending.is_some() {
        holding_action(table, model.as_ref(), &rel, &dist)
    } else {
        policy_action(table, model.as_ref(), &rel, &dist)
    };
    Ok(Action::Control(model.control(d.action)))
}

fn free_horizon(table: &crate::local::CostToGoTable, rel: &[f64]) -> Result<HorizonDist, ExecError> {
    let (k, _) = table.best_horizon(rel);
    Ok(HorizonDist::degenerate(k)?)
}
