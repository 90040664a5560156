//! Transit routes and the context snapshots built from them.

use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Straight,
    LShaped,
}

/// A route as generated: waypoint positions and nominal arrival epochs
/// relative to the route's start epoch (the first waypoint is at 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteSpec {
    pub vehicle: u32,
    pub geometry: Geometry,
    /// Epoch at which the car appears at its first waypoint.
    pub start_epoch: u32,
    pub waypoints: Vec<[f64; 2]>,
    /// Nominal arrival epoch of each waypoint, strictly increasing, first is 0.
    pub schedule: Vec<u32>,
    /// Nominal duration in seconds.
    pub duration_s: f64,
}

impl RouteSpec {
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    pub fn endpoint_separation(&self) -> f64 {
        dist(self.waypoints[0], *self.waypoints.last().unwrap())
    }
}

/// A remaining waypoint with its current ETA in epochs (0 = the car is there now).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub index: u16,
    pub pos: [f64; 2],
    pub eta: u32,
}

/// An active vehicle and its remaining route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiveRoute {
    pub vehicle: u32,
    /// Last waypoint passed and epochs since passing it.
    pub prev_pos: [f64; 2],
    pub since_prev: u32,
    /// Remaining waypoints, ETAs strictly increasing.
    pub waypoints: Vec<Waypoint>,
}

impl LiveRoute {
    pub fn from_spec(spec: &RouteSpec) -> Self {
        Self {
            vehicle: spec.vehicle,
            prev_pos: spec.waypoints[0],
            since_prev: 0,
            waypoints: spec
                .waypoints
                .iter()
                .zip(&spec.schedule)
                .enumerate()
                .map(|(i, (p, t))| Waypoint {
                    index: i as u16,
                    pos: *p,
                    eta: *t,
                })
                .collect(),
        }
    }

    /// Interpolated position between the last passed and the next waypoint.
    pub fn position(&self) -> [f64; 2] {
        match self.waypoints.first() {
            None => self.prev_pos,
            Some(next) => {
                let span = self.since_prev + next.eta;
                if span == 0 {
                    return next.pos;
                }
                let f = self.since_prev as f64 / span as f64;
                lerp(self.prev_pos, next.pos, f)
            }
        }
    }

    /// Position `t` epochs from now if every ETA holds, or `None` once the
    /// route has finished.
    pub fn predicted_position(&self, t: u32) -> Option<[f64; 2]> {
        if t == 0 {
            return Some(self.position());
        }
        let next = self.waypoints.iter().position(|w| w.eta >= t)?;
        let w = &self.waypoints[next];
        let (prev, t_prev) = match next {
            0 => (self.prev_pos, -(self.since_prev as i64)),
            i => (self.waypoints[i - 1].pos, self.waypoints[i - 1].eta as i64),
        };
        let span = w.eta as i64 - t_prev;
        if span <= 0 {
            return Some(w.pos);
        }
        Some(lerp(prev, w.pos, (t as i64 - t_prev) as f64 / span as f64))
    }

    pub fn waypoint(&self, index: u16) -> Option<&Waypoint> {
        self.waypoints.iter().find(|w| w.index == index)
    }

    /// The waypoint the car is at this epoch, if any.
    pub fn at_waypoint(&self) -> Option<&Waypoint> {
        self.waypoints.first().filter(|w| w.eta == 0)
    }

    /// Restore strictly increasing ETAs after independent perturbation.
    pub fn enforce_monotone(&mut self) {
        for i in 1..self.waypoints.len() {
            let lo = self.waypoints[i - 1].eta + 1;
            if self.waypoints[i].eta < lo {
                self.waypoints[i].eta = lo;
            }
        }
    }
}

/// Active routes at one epoch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub epoch: u32,
    pub routes: Vec<LiveRoute>,
}

impl Snapshot {
    pub fn route(&self, vehicle: u32) -> Option<&LiveRoute> {
        self.routes.iter().find(|r| r.vehicle == vehicle)
    }
}

/// Context entry: a shared snapshot viewed `offset` epochs ahead.
///
/// All `K` predicted contexts share one snapshot since every remaining
/// waypoint already carries its ETA.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DreamrContext {
    pub snapshot: Arc<Snapshot>,
    pub offset: u32,
}

pub fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

pub fn lerp(a: [f64; 2], b: [f64; 2], f: f64) -> [f64; 2] {
    [a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f]
}
