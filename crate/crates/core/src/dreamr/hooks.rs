//! Planner hooks for the routing domain.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::RngCore;

use super::arrival::ArrivalModel;
use super::dynamics::{DreamrSwitch, SwitchKind};
use super::params::DreamrParams;
use super::routes::{dist, DreamrContext, Snapshot};
use super::{MOVE, RIDE};
use crate::global::{ModeSwitchSample, PlanNode, PlanningHooks};
use crate::horizon::HorizonDist;
use crate::model::{ContextSet, ContinuousState, HybridState, ModeId};

/// Epochs to fly `from → to` in a straight line: cruise at the speed limit on
/// the longer axis plus one accelerate-and-brake ramp.
pub fn nominal_flight_epochs(params: &DreamrParams, from: [f64; 2], to: [f64; 2]) -> f64 {
    let d = (from[0] - to[0]).abs().max((from[1] - to[1]).abs());
    if d == 0.0 {
        return 0.0;
    }
    let cruise = d / (params.xydot_lim * params.epoch_s);
    let ramp = params.xydot_lim / (params.acc_lim * params.epoch_s);
    cruise + ramp
}

/// Transitions happen only at route waypoints: Board at any future waypoint
/// of any active car, Alight at any later waypoint of the car being ridden.
#[derive(Clone, Debug)]
pub struct DreamrHooks {
    pub params: DreamrParams,
    /// Context and local horizon `K`, epochs.
    pub horizon: u32,
    pub goal: [f64; 2],
    pub arrival: Arc<ArrivalModel>,
    /// Extra epochs of slack when pruning Board candidates by flight time.
    pub reach_slack: u32,
    /// Charge the hover cost of arriving at a waypoint before the vehicle.
    pub wait_cost: bool,
}

impl DreamrHooks {
    pub fn new(params: DreamrParams, horizon: u32, goal: [f64; 2], arrival: Arc<ArrivalModel>) -> Self {
        Self {
            params,
            horizon,
            goal,
            arrival,
            reach_slack: 4,
            wait_cost: true,
        }
    }

    /// Fewest epochs in which the agent can cover `d` per axis at full speed.
    fn min_flight_epochs(&self, from: [f64; 2], to: [f64; 2]) -> f64 {
        let step = self.params.xydot_lim * self.params.epoch_s;
        (from[0] - to[0]).abs().max((from[1] - to[1]).abs()) / step
    }

    fn board_samples(&self, snap: &Snapshot, node: &PlanNode, n: usize) -> Vec<ModeSwitchSample<DreamrSwitch>> {
        let pos = [node.state.cont[0], node.state.cont[1]];
        let e = node.elapsed;
        let mut cands: Vec<(f64, u32, usize)> = Vec::new();
        for (ri, r) in snap.routes.iter().enumerate() {
            // The last waypoint leads nowhere.
            let usable = r.waypoints.len().saturating_sub(1);
            for (wi, w) in r.waypoints[..usable].iter().enumerate() {
                if w.eta <= e || w.eta - e > self.horizon {
                    continue;
                }
                let need = self.min_flight_epochs(pos, w.pos);
                if need > (w.eta - e + self.reach_slack) as f64 {
                    continue;
                }
                cands.push((dist(pos, w.pos), ri as u32, wi));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        cands.truncate(n);
        let mut out = Vec::with_capacity(cands.len() + 1);
        // A car standing at a waypoint right now is only reachable if the
        // agent is already there; it gets no arrival mass over 1..=K, so
        // offer it as an immediate switch.
        if e == 0 {
            for r in &snap.routes {
                let Some(w) = r.at_waypoint() else { continue };
                if r.waypoints.len() < 2 || !self.at_transition(&node.state, &[w.pos[0], w.pos[1], 0.0, 0.0]) {
                    continue;
                }
                let c = [w.pos[0], w.pos[1], 0.0, 0.0];
                out.push(ModeSwitchSample {
                    switch: DreamrSwitch::Board {
                        vehicle: r.vehicle,
                        waypoint: w.index,
                    },
                    precondition: ContinuousState::from(c),
                    effect: HybridState::new(RIDE, c).grounded(r.vehicle),
                    elapsed_after: 0,
                    horizon: HorizonDist::degenerate(1).expect("valid horizon"),
                });
            }
        }
        for (_, ri, wi) in cands {
            let r = &snap.routes[ri as usize];
            let w = r.waypoints[wi];
            let Some(h) = self.arrival.horizon_from(w.eta, e) else {
                continue;
            };
            let c = [w.pos[0], w.pos[1], 0.0, 0.0];
            out.push(ModeSwitchSample {
                switch: DreamrSwitch::Board {
                    vehicle: r.vehicle,
                    waypoint: w.index,
                },
                precondition: ContinuousState::from(c),
                effect: HybridState::new(RIDE, c).grounded(r.vehicle),
                elapsed_after: e + libm::round(h.mean()) as u32,
                horizon: h,
            });
        }
        out
    }

    fn alight_samples(&self, snap: &Snapshot, node: &PlanNode, n: usize) -> Vec<ModeSwitchSample<DreamrSwitch>> {
        let Some(vehicle) = node.state.grounding else {
            return Vec::new();
        };
        let Some(r) = snap.route(vehicle) else {
            return Vec::new();
        };
        let e = node.elapsed;
        let here = [node.state.cont[0], node.state.cont[1]];
        let mut cands: Vec<_> = r
            .waypoints
            .iter()
            .filter(|w| w.eta > e && dist(w.pos, here) > 1e-12)
            .collect();
        if cands.len() > n {
            cands.sort_by(|a, b| dist(a.pos, self.goal).total_cmp(&dist(b.pos, self.goal)).then(a.index.cmp(&b.index)));
            cands.truncate(n);
        }
        let mut out = Vec::with_capacity(cands.len() + 1);
        // Stepping off where the car stands now, as for boarding.
        if let Some(w) = r.at_waypoint().filter(|_| e == 0) {
            let c = [w.pos[0], w.pos[1], 0.0, 0.0];
            out.push(ModeSwitchSample {
                switch: DreamrSwitch::Alight {
                    vehicle,
                    waypoint: w.index,
                },
                precondition: ContinuousState::from(c),
                effect: HybridState::new(MOVE, c),
                elapsed_after: 0,
                horizon: HorizonDist::degenerate(1).expect("valid horizon"),
            });
        }
        for w in cands {
            let Some(h) = self.arrival.horizon_from(w.eta, e) else {
                continue;
            };
            let c = [w.pos[0], w.pos[1], 0.0, 0.0];
            out.push(ModeSwitchSample {
                switch: DreamrSwitch::Alight {
                    vehicle,
                    waypoint: w.index,
                },
                precondition: ContinuousState::from(c),
                effect: HybridState::new(MOVE, c),
                elapsed_after: e + libm::round(h.mean()) as u32,
                horizon: h,
            });
        }
        out
    }
}

impl PlanningHooks for DreamrHooks {
    type Context = DreamrContext;
    type Switch = DreamrSwitch;
    type SwitchKind = SwitchKind;

    fn next_valid_modes(&self, node: &PlanNode, ctx: &ContextSet<DreamrContext>) -> Vec<(ModeId, SwitchKind)> {
        let snap = &ctx.current.snapshot;
        if node.state.mode == MOVE {
            if snap.routes.iter().any(|r| r.waypoints.len() > 1) {
                alloc::vec![(RIDE, SwitchKind::Board)]
            } else {
                Vec::new()
            }
        } else {
            alloc::vec![(MOVE, SwitchKind::Alight)]
        }
    }

    fn sample_transitions(
        &self,
        ctx: &ContextSet<DreamrContext>,
        node: &PlanNode,
        _next: ModeId,
        kind: SwitchKind,
        n: usize,
        _rng: &mut dyn RngCore,
    ) -> Vec<ModeSwitchSample<DreamrSwitch>> {
        let snap = &ctx.current.snapshot;
        match kind {
            SwitchKind::Board => self.board_samples(snap, node, n),
            SwitchKind::Alight => self.alight_samples(snap, node, n),
        }
    }

    fn relative(&self, _mode: ModeId, cont: &[f64], target: &[f64]) -> Vec<f64> {
        alloc::vec![cont[0] - target[0], cont[1] - target[1], cont[2], cont[3]]
    }

    /// Hovering `(λ_h + 1)` per epoch between the expected arrival at the
    /// waypoint and the vehicle's arrival.
    fn traverse_surcharge(&self, mode: ModeId, rel: &[f64], horizon: &HorizonDist) -> f64 {
        if !self.wait_cost || mode != MOVE {
            return 0.0;
        }
        let fly = nominal_flight_epochs(&self.params, [rel[0], rel[1]], [0.0, 0.0]);
        let wait: f64 = horizon.iter().map(|(k, p)| p * (k as f64 - fly).max(0.0)).sum();
        (self.params.lambda_h + 1.0) * wait
    }

    fn switch_weight(&self, _switch: &DreamrSwitch) -> f64 {
        1.0
    }

    fn at_transition(&self, state: &HybridState, target: &[f64]) -> bool {
        // Boarding also needs the agent (nearly) at rest.
        let slow = state.mode != MOVE || libm::hypot(state.cont[2], state.cont[3]) <= self.params.eps_vel;
        slow && crate::executive::at_transition(&state.cont, target, 2, self.params.eps_pos)
    }

    fn switch_ready(&self, ctx: &ContextSet<DreamrContext>, _state: &HybridState, switch: &DreamrSwitch) -> bool {
        ctx.current
            .snapshot
            .route(switch.vehicle())
            .and_then(|r| r.at_waypoint())
            .is_some_and(|w| w.index == switch.waypoint())
    }

    fn refresh_horizon(&self, ctx: &ContextSet<DreamrContext>, switch: &DreamrSwitch) -> Option<HorizonDist> {
        let w = ctx.current.snapshot.route(switch.vehicle())?.waypoint(switch.waypoint())?;
        self.arrival.horizon(w.eta)
    }

    fn hold_control(&self, _mode: ModeId) -> Vec<f64> {
        alloc::vec![0.0, 0.0]
    }
}
