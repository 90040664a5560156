use alloc::vec::Vec;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::params::DreamrParams;
use super::routes::DreamrContext;
use super::{MOVE, RIDE};
use crate::error::ModelError;
use crate::model::{Action, ContinuousState, Dmssp, HybridState, ModeId, SwitchOutcome};

/// Grounded mode switch: the vehicle and the waypoint (by route index) where
/// it is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DreamrSwitch {
    Board { vehicle: u32, waypoint: u16 },
    Alight { vehicle: u32, waypoint: u16 },
}

impl DreamrSwitch {
    pub fn vehicle(self) -> u32 {
        match self {
            DreamrSwitch::Board { vehicle, .. } | DreamrSwitch::Alight { vehicle, .. } => vehicle,
        }
    }

    pub fn waypoint(self) -> u16 {
        match self {
            DreamrSwitch::Board { waypoint, .. } | DreamrSwitch::Alight { waypoint, .. } => waypoint,
        }
    }
}

/// Ungrounded switch kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchKind {
    Board,
    Alight,
}

/// One epoch of the double integrator: velocity clamped per axis, position by
/// the trapezoid rule. Positions are not clamped here.
#[inline]
pub fn integrate(params: &DreamrParams, pos: [f64; 2], vel: [f64; 2], acc: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let dt = params.epoch_s;
    let lim = params.xydot_lim;
    let mut p = pos;
    let mut v = vel;
    for i in 0..2 {
        v[i] = (vel[i] + acc[i] * dt).clamp(-lim, lim);
        p[i] = pos[i] + 0.5 * (vel[i] + v[i]) * dt;
    }
    (p, v)
}

/// Stage cost of a Move control step: distance flown, hovering, time.
#[inline]
pub fn move_cost(params: &DreamrParams, pos: [f64; 2], vel: [f64; 2], next_pos: [f64; 2]) -> f64 {
    let d = libm::hypot(next_pos[0] - pos[0], next_pos[1] - pos[1]);
    let hover = if libm::hypot(vel[0], vel[1]) < params.hover_eps { 1.0 } else { 0.0 };
    params.lambda_d * d + params.lambda_h * hover + 1.0
}

/// Noisy Move dynamics with positions clamped to the unit square.
pub fn dreamr_dynamics(
    params: &DreamrParams,
    cont: &[f64],
    accel: [f64; 2],
    rng: &mut dyn RngCore,
) -> Result<[f64; 4], ModelError> {
    for (axis, a) in accel.iter().enumerate() {
        if !a.is_finite() || a.abs() > params.acc_lim * (1.0 + 1e-9) {
            return Err(ModelError::ControlOutOfBounds { axis, value: *a });
        }
    }
    let nx: f64 = StandardNormal.sample(rng);
    let ny: f64 = StandardNormal.sample(rng);
    let acc = [accel[0] + params.sigma_acc * nx, accel[1] + params.sigma_acc * ny];
    let (p, v) = integrate(params, [cont[0], cont[1]], [cont[2], cont[3]], acc);
    Ok([p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0), v[0], v[1]])
}

/// The routing problem as a DMSSP.
#[derive(Clone, Debug)]
pub struct DreamrProblem {
    pub params: DreamrParams,
}

impl DreamrProblem {
    pub fn new(params: DreamrParams) -> Self {
        Self { params }
    }

    pub fn speed(cont: &[f64]) -> f64 {
        libm::hypot(cont[2], cont[3])
    }
}

impl Dmssp for DreamrProblem {
    type Context = DreamrContext;
    type Switch = DreamrSwitch;

    fn num_modes(&self) -> usize {
        2
    }

    fn step_continuous(
        &self,
        mode: ModeId,
        cont: &ContinuousState,
        control: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<ContinuousState, ModelError> {
        self.check_mode(mode)?;
        if mode != MOVE {
            return Err(ModelError::Contract("ride dynamics are driven by the vehicle"));
        }
        if control.len() != 2 || cont.len() != 4 {
            return Err(ModelError::Contract("expected a 4-d state and 2-d control"));
        }
        Ok(dreamr_dynamics(&self.params, cont, [control[0], control[1]], rng)?.into())
    }

    fn apply_mode_switch(
        &self,
        ctx: &DreamrContext,
        state: &HybridState,
        switch: DreamrSwitch,
    ) -> Result<SwitchOutcome, ModelError> {
        let snap = &ctx.snapshot;
        match switch {
            DreamrSwitch::Board { vehicle, waypoint } => {
                if state.mode != MOVE {
                    return Ok(SwitchOutcome::Failure);
                }
                let Some(w) = snap.route(vehicle).and_then(|r| r.at_waypoint()) else {
                    return Ok(SwitchOutcome::Failure);
                };
                let close = libm::hypot(state.cont[0] - w.pos[0], state.cont[1] - w.pos[1]) <= self.params.eps_pos;
                let slow = Self::speed(&state.cont) <= self.params.eps_vel;
                if w.index != waypoint || !close || !slow {
                    return Ok(SwitchOutcome::Failure);
                }
                Ok(SwitchOutcome::Success(
                    HybridState::new(RIDE, [w.pos[0], w.pos[1], 0.0, 0.0]).grounded(vehicle),
                ))
            }
            DreamrSwitch::Alight { vehicle, .. } => {
                if state.mode != RIDE || state.grounding != Some(vehicle) {
                    return Ok(SwitchOutcome::Failure);
                }
                let pos = snap
                    .route(vehicle)
                    .map(|r| r.position())
                    .unwrap_or([state.cont[0], state.cont[1]]);
                Ok(SwitchOutcome::Success(HybridState::new(MOVE, [pos[0], pos[1], 0.0, 0.0])))
            }
        }
    }

    fn reward(&self, state: &HybridState, action: &Action<DreamrSwitch>, next: &HybridState) -> f64 {
        match action {
            Action::ModeSwitch(_) => -1.0,
            Action::Control(_) if state.mode == RIDE => -1.0,
            Action::Control(_) => {
                let c = &state.cont;
                let n = &next.cont;
                -move_cost(&self.params, [c[0], c[1]], [c[2], c[3]], [n[0], n[1]])
            }
        }
    }
}

/// Per-axis accelerations `0, ±a, ±a/2, ±a/4, …` (halving from the limit so
/// the small levels can hold a hover), all pairs, zero first.
pub fn action_set(params: &DreamrParams) -> Vec<[f64; 2]> {
    let half = (params.accel_levels.max(3) / 2) as i32;
    let mut levels = alloc::vec![0.0];
    for i in 0..half {
        let m = params.acc_lim * libm::pow(0.5, i as f64);
        levels.push(m);
        levels.push(-m);
    }
    let mut out = alloc::vec![[0.0, 0.0]];
    for &x in &levels {
        for &y in &levels {
            if x != 0.0 || y != 0.0 {
                out.push([x, y]);
            }
        }
    }
    out
}
