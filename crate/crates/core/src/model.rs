//! The DMSSP problem model.
//!
//! A problem is a hybrid of a discrete mode and a continuous state. Control
//! actions evolve the continuous state stochastically within a mode; mode
//! switches are deterministic, context-gated, single-step actions. Rewards are
//! non-positive and the episode ends once the goal space is reached.

use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Deref, DerefMut};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Index of a discrete mode, `0..num_modes`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeId(pub u16);

impl ModeId {
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

/// Fixed-length real vector whose layout and units are defined by the domain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContinuousState(pub Vec<f64>);

impl ContinuousState {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(alloc::vec![0.0; dim])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for ContinuousState {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[f64; N]> for ContinuousState {
    fn from(v: [f64; N]) -> Self {
        Self(v.to_vec())
    }
}

impl Deref for ContinuousState {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ContinuousState {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// `s = (d, c)`, plus an optional grounding of the mode.
///
/// The grounding carries the discrete object a mode is bound to when the
/// mode alone does not identify it (the vehicle being ridden, the object
/// being held).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridState {
    pub mode: ModeId,
    pub cont: ContinuousState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grounding: Option<u32>,
}

impl HybridState {
    pub fn new(mode: ModeId, cont: impl Into<ContinuousState>) -> Self {
        Self {
            mode,
            cont: cont.into(),
            grounding: None,
        }
    }

    pub fn grounded(mut self, grounding: u32) -> Self {
        self.grounding = Some(grounding);
        self
    }
}

/// `A = A_D ∪ A_X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Action<S> {
    ModeSwitch(S),
    Control(Vec<f64>),
}

impl<S> Action<S> {
    pub fn is_switch(&self) -> bool {
        matches!(self, Action::ModeSwitch(_))
    }
}

/// Current context plus `K` per-step estimates of future contexts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextSet<C> {
    pub current: C,
    pub predicted: Vec<C>,
}

impl<C> ContextSet<C> {
    pub fn new(current: C, predicted: Vec<C>) -> Result<Self, ModelError> {
        if predicted.is_empty() {
            return Err(ModelError::Contract("context horizon must be positive"));
        }
        Ok(Self { current, predicted })
    }

    pub fn horizon(&self) -> usize {
        self.predicted.len()
    }

    /// Context estimate `k` steps ahead; `k == 0` is the current context.
    pub fn at(&self, k: usize) -> Option<&C> {
        if k == 0 {
            Some(&self.current)
        } else {
            self.predicted.get(k - 1)
        }
    }
}

/// `S_G = (d_G, X_G)`, with `X_G` a closed ball around `center` over the
/// first `dims` coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalSpace {
    pub mode: ModeId,
    pub center: ContinuousState,
    pub tolerance: f64,
    pub dims: usize,
    /// Optional bound on the distance over the remaining coordinates.
    pub tail_tolerance: Option<f64>,
}

impl GoalSpace {
    pub fn new(mode: ModeId, center: impl Into<ContinuousState>, tolerance: f64, dims: usize) -> Result<Self, ModelError> {
        let center = center.into();
        if !(tolerance >= 0.0) || dims == 0 || dims > center.len() {
            return Err(ModelError::Contract("goal region must be a nonempty ball"));
        }
        Ok(Self {
            mode,
            center,
            tolerance,
            dims,
            tail_tolerance: None,
        })
    }

    /// Also require the coordinates past `dims` within `tol` of the center.
    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = Some(tol);
        self
    }

    pub fn contains(&self, cont: &[f64]) -> bool {
        let mut sq = 0.0;
        for i in 0..self.dims {
            let d = cont[i] - self.center[i];
            sq += d * d;
        }
        if sq > self.tolerance * self.tolerance {
            return false;
        }
        match self.tail_tolerance {
            None => true,
            Some(t) => {
                let mut sq = 0.0;
                for i in self.dims..self.center.len().min(cont.len()) {
                    let d = cont[i] - self.center[i];
                    sq += d * d;
                }
                sq <= t * t
            }
        }
    }
}

/// Result of attempting a mode switch.
#[derive(Clone, Debug, PartialEq)]
pub enum SwitchOutcome {
    Success(HybridState),
    Failure,
}

/// The abstract DMSSP contract consumed by every planner.
pub trait Dmssp {
    /// Exogenous context, opaque to planners.
    type Context;
    /// Grounded mode-switch action.
    type Switch: Copy + Eq + Debug;

    fn num_modes(&self) -> usize;

    /// Sample `c_{t+1} ~ T(d, c, a)`. Deterministic for a given rng state.
    fn step_continuous(
        &self,
        mode: ModeId,
        cont: &ContinuousState,
        control: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<ContinuousState, ModelError>;

    /// `T(χ, s, a_D)`. An unsatisfied precondition is a `Failure` value.
    fn apply_mode_switch(
        &self,
        ctx: &Self::Context,
        state: &HybridState,
        switch: Self::Switch,
    ) -> Result<SwitchOutcome, ModelError>;

    /// Non-positive reward of the transition `state --action--> next`.
    fn reward(&self, state: &HybridState, action: &Action<Self::Switch>, next: &HybridState) -> f64;

    fn is_goal(&self, state: &HybridState, goal: &GoalSpace) -> bool {
        is_goal(state, goal)
    }

    fn check_mode(&self, mode: ModeId) -> Result<(), ModelError> {
        if mode.index() < self.num_modes() {
            Ok(())
        } else {
            Err(ModelError::UnknownMode(mode.0))
        }
    }
}

/// True iff the mode matches and the goal region contains the continuous state.
pub fn is_goal(state: &HybridState, goal: &GoalSpace) -> bool {
    state.mode == goal.mode && goal.contains(&state.cont)
}

/// Flags attached to one executed step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvents {
    pub replanned: bool,
    pub preempted: bool,
    pub switched: bool,
    pub failed_switch: bool,
}

/// One logged step of an episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord<S> {
    pub t: u32,
    pub state: HybridState,
    pub action: Action<S>,
    pub reward: f64,
    pub events: StepEvents,
}

/// Outcome of one simulated episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult<S> {
    /// `H`, the number of environment steps taken.
    pub steps_taken: u32,
    /// `-Σ R` over the trajectory.
    pub cumulative_cost: f64,
    /// Successfully executed mode switches.
    pub switch_count: u32,
    pub failed_switches: u32,
    pub preemptions: u32,
    pub global_plans: u32,
    pub reached_goal: bool,
    pub truncated: bool,
    /// Wall time of each global plan, nanoseconds.
    pub plan_times_ns: Vec<u64>,
    /// Wall time of each local decision, nanoseconds.
    pub decision_times_ns: Vec<u64>,
    pub per_step_log: Vec<StepRecord<S>>,
}

impl<S> Default for EpisodeResult<S> {
    fn default() -> Self {
        Self {
            steps_taken: 0,
            cumulative_cost: 0.0,
            switch_count: 0,
            failed_switches: 0,
            preemptions: 0,
            global_plans: 0,
            reached_goal: false,
            truncated: false,
            plan_times_ns: Vec::new(),
            decision_times_ns: Vec::new(),
            per_step_log: Vec::new(),
        }
    }
}

impl<S> EpisodeResult<S> {
    /// Recompute `-Σ R` from the step log.
    pub fn recomputed_cost(&self) -> f64 {
        -self.per_step_log.iter().map(|r| r.reward).sum::<f64>()
    }
}

/// Monotonic clock used for timing reports. The no-op clock reports zero.
pub trait Clock {
    fn now_ns(&self) -> u64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_ns(&self) -> u64 {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goal_membership_uses_closed_ball() {
        let goal = GoalSpace::new(ModeId(0), [1.0, 1.0, 0.0], 0.5, 2).unwrap();
        assert!(is_goal(&HybridState::new(ModeId(0), [1.0, 1.0, 9.0]), &goal));
        assert!(!is_goal(&HybridState::new(ModeId(1), [1.0, 1.0, 0.0]), &goal));
        assert!(is_goal(&HybridState::new(ModeId(0), [1.5, 1.0, 0.0]), &goal));
        assert!(!is_goal(&HybridState::new(ModeId(0), [1.5000001, 1.0, 0.0]), &goal));
    }

    #[test]
    fn empty_goal_region_rejected() {
        assert!(GoalSpace::new(ModeId(0), [0.0], -1.0, 1).is_err());
        assert!(GoalSpace::new(ModeId(0), [0.0], 0.1, 2).is_err());
    }

    #[test]
    fn context_set_indexing() {
        let set = ContextSet::new(0u8, alloc::vec![1, 2, 3]).unwrap();
        assert_eq!(set.horizon(), 3);
        assert_eq!(set.at(0), Some(&0));
        assert_eq!(set.at(3), Some(&3));
        assert_eq!(set.at(4), None);
        assert!(ContextSet::new(0u8, alloc::vec![]).is_err());
    }
}
