//! UCT over the full hybrid routing problem.
//!
//! The generative model flies the agent with the true noisy dynamics and
//! predicts vehicles by their current ETAs. Leaves and new actions are
//! valued from the Move cost-to-go table, measured to the goal.

use alloc::vec::Vec;

use rand::RngCore;

use super::dpw::{uct_search, GenerativeModel, UctParams};
use crate::dreamr::dynamics::{action_set, dreamr_dynamics, move_cost, DreamrSwitch};
use crate::dreamr::routes::{dist, Snapshot};
use crate::dreamr::{DreamrParams, MOVE, RIDE};
use crate::local::CostToGoTable;
use crate::model::{Action, HybridState};

#[derive(Clone, Debug, PartialEq)]
pub struct UctState {
    pub state: HybridState,
    /// Epochs after the decision.
    pub t: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UctAction {
    Control(usize),
    Switch(DreamrSwitch),
}

/// A boardable waypoint: position, ETA, vehicle and waypoint index.
#[derive(Clone, Copy, Debug)]
struct Stop {
    pos: [f64; 2],
    eta: u32,
    vehicle: u32,
    index: u16,
}

pub struct DreamrUctModel<'a> {
    params: &'a DreamrParams,
    table: &'a CostToGoTable,
    snapshot: &'a Snapshot,
    goal: [f64; 2],
    controls: Vec<[f64; 2]>,
    stops: Vec<Stop>,
}

impl<'a> DreamrUctModel<'a> {
    pub fn new(params: &'a DreamrParams, table: &'a CostToGoTable, snapshot: &'a Snapshot, goal: [f64; 2], depth: u32) -> Self {
        let mut stops = Vec::new();
        for r in &snapshot.routes {
            let n = r.waypoints.len();
            for w in r.waypoints.iter().take(n.saturating_sub(1)) {
                if w.eta <= depth {
                    stops.push(Stop {
                        pos: w.pos,
                        eta: w.eta,
                        vehicle: r.vehicle,
                        index: w.index,
                    });
                }
            }
        }
        Self {
            params,
            table,
            snapshot,
            goal,
            controls: action_set(params),
            stops,
        }
    }

    fn cost_to_goal(&self, pos: [f64; 2], vel: [f64; 2]) -> f64 {
        let rel = [pos[0] - self.goal[0], pos[1] - self.goal[1], vel[0], vel[1]];
        self.table.best_horizon(&rel).1
    }

    /// Ride position of `vehicle` at `t`, `None` once its route has ended.
    fn car_at(&self, vehicle: u32, t: u32) -> Option<[f64; 2]> {
        self.snapshot.route(vehicle)?.predicted_position(t)
    }

    /// Successor with the noise term supplied by `rng`, or noise-free.
    fn transition(&self, s: &UctState, a: &UctAction, rng: Option<&mut dyn RngCore>) -> (UctState, f64) {
        let t = s.t + 1;
        let c = &s.state.cont;
        match (*a, s.state.mode) {
            (UctAction::Control(i), m) if m == MOVE => {
                let u = self.controls[i];
                let next = match rng {
                    Some(rng) => dreamr_dynamics(self.params, c, u, rng).unwrap_or([c[0], c[1], c[2], c[3]]),
                    None => {
                        let (p, v) = crate::dreamr::dynamics::integrate(self.params, [c[0], c[1]], [c[2], c[3]], u);
                        [p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0), v[0], v[1]]
                    }
                };
                let r = -move_cost(self.params, [c[0], c[1]], [c[2], c[3]], [next[0], next[1]]);
                (UctState { state: HybridState::new(MOVE, next), t }, r)
            }
            (UctAction::Control(_), _) => {
                let v = s.state.grounding.unwrap_or(u32::MAX);
                let state = match self.car_at(v, t) {
                    Some(p) => HybridState::new(RIDE, [p[0], p[1], 0.0, 0.0]).grounded(v),
                    None => HybridState::new(MOVE, [c[0], c[1], 0.0, 0.0]),
                };
                (UctState { state, t }, -1.0)
            }
            (UctAction::Switch(DreamrSwitch::Board { vehicle, .. }), _) => {
                let state = match self.car_at(vehicle, t) {
                    Some(p) => HybridState::new(RIDE, [p[0], p[1], 0.0, 0.0]).grounded(vehicle),
                    None => HybridState::new(MOVE, [c[0], c[1], 0.0, 0.0]),
                };
                (UctState { state, t }, -1.0)
            }
            (UctAction::Switch(DreamrSwitch::Alight { .. }), _) => {
                (UctState { state: HybridState::new(MOVE, [c[0], c[1], 0.0, 0.0]), t }, -1.0)
            }
        }
    }
}

impl GenerativeModel for DreamrUctModel<'_> {
    type State = UctState;
    type Action = UctAction;

    fn actions(&self, s: &UctState) -> Vec<UctAction> {
        let c = &s.state.cont;
        if s.state.mode == RIDE {
            let mut out = alloc::vec![UctAction::Control(0)];
            if let Some(v) = s.state.grounding {
                out.push(UctAction::Switch(DreamrSwitch::Alight { vehicle: v, waypoint: 0 }));
            }
            return out;
        }
        let mut out: Vec<UctAction> = (0..self.controls.len()).map(UctAction::Control).collect();
        if libm::hypot(c[2], c[3]) <= self.params.eps_vel {
            for st in &self.stops {
                if st.eta == s.t && dist(st.pos, [c[0], c[1]]) <= self.params.eps_pos {
                    out.push(UctAction::Switch(DreamrSwitch::Board {
                        vehicle: st.vehicle,
                        waypoint: st.index,
                    }));
                }
            }
        }
        out
    }

    fn step(&self, s: &UctState, a: &UctAction, rng: &mut dyn RngCore) -> (UctState, f64) {
        self.transition(s, a, Some(rng))
    }

    fn is_terminal(&self, s: &UctState) -> bool {
        let c = &s.state.cont;
        s.state.mode == MOVE && dist([c[0], c[1]], self.goal) <= self.params.eps_pos && libm::hypot(c[2], c[3]) <= self.params.eps_vel
    }

    fn leaf_value(&self, s: &UctState) -> f64 {
        let c = &s.state.cont;
        -self.cost_to_goal([c[0], c[1]], [c[2], c[3]])
    }

    fn q_init(&self, s: &UctState, a: &UctAction) -> f64 {
        let (n, r) = self.transition(s, a, None);
        if self.is_terminal(&n) {
            r
        } else {
            r + self.leaf_value(&n)
        }
    }
}

/// One UCT decision for the routing problem.
pub fn uct_action(
    state: &HybridState,
    snapshot: &Snapshot,
    goal: [f64; 2],
    params: &UctParams,
    dparams: &DreamrParams,
    table: &CostToGoTable,
    rng: &mut dyn RngCore,
) -> Action<DreamrSwitch> {
    let model = DreamrUctModel::new(dparams, table, snapshot, goal, params.depth);
    let root = UctState {
        state: state.clone(),
        t: 0,
    };
    let controls = action_set(dparams);
    match uct_search(&model, params, root, rng) {
        Some(UctAction::Switch(sw)) => match sw {
            // The simulator only needs the vehicle; ground the waypoint to
            // where the car actually is.
            DreamrSwitch::Alight { vehicle, .. } => {
                let waypoint = snapshot
                    .route(vehicle)
                    .and_then(|r| r.waypoints.first())
                    .map_or(0, |w| w.index);
                Action::ModeSwitch(DreamrSwitch::Alight { vehicle, waypoint })
            }
            b => Action::ModeSwitch(b),
        },
        Some(UctAction::Control(i)) if state.mode == MOVE => Action::Control(controls[i].to_vec()),
        _ => Action::Control(alloc::vec![0.0, 0.0]),
    }
}
