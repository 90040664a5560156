//! Random episode generation.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::DreamrParams;
use super::routes::{dist, lerp, Geometry, RouteSpec};

pub const MIN_ENDPOINT_SEPARATION: f64 = 0.2;
pub const WAYPOINTS: (usize, usize) = (5, 15);
pub const DURATION_S: (f64, f64) = (100.0, 900.0);

/// Episode-set knobs: total route count over the episode and ETA perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub routes_min: u32,
    pub routes_max: u32,
    pub perturb_p: f64,
}

/// One episode: agent start and goal, every route and when it appears.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub perturb_p: f64,
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub routes: Vec<RouteSpec>,
}

impl Scenario {
    pub fn initial_routes(&self) -> impl Iterator<Item = &RouteSpec> {
        self.routes.iter().filter(|r| r.start_epoch == 0)
    }
}

/// Half the routes are active at epoch 0, the other half appear at uniformly
/// random later epochs, so the total lies in the configured range.
pub fn generate_scenario(cfg: &ScenarioConfig, params: &DreamrParams, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = cfg.routes_min.div_ceil(2);
    let hi = (cfg.routes_max / 2).max(lo);
    let initial = rng.random_range(lo..=hi);
    let total = 2 * initial;
    let mut routes = Vec::with_capacity(total as usize);
    for v in 0..total {
        let start_epoch = if v < initial {
            0
        } else {
            rng.random_range(1..params.episode_epochs.max(2))
        };
        routes.push(generate_route(&mut rng, params, v, start_epoch));
    }
    let corner = [rng.random_range(0..2) as f64, rng.random_range(0..2) as f64];
    let goal = [0, 1].map(|i| {
        let off = rng.random_range(0.05..0.15);
        if corner[i] == 0.0 {
            off
        } else {
            1.0 - off
        }
    });
    Scenario {
        seed,
        perturb_p: cfg.perturb_p,
        start: [0.5, 0.5],
        goal,
        routes,
    }
}

fn generate_route(rng: &mut ChaCha8Rng, params: &DreamrParams, vehicle: u32, start_epoch: u32) -> RouteSpec {
    let (a, b) = loop {
        let a = [rng.random::<f64>(), rng.random::<f64>()];
        let b = [rng.random::<f64>(), rng.random::<f64>()];
        if dist(a, b) > MIN_ENDPOINT_SEPARATION {
            break (a, b);
        }
    };
    let geometry = if rng.random_bool(0.5) { Geometry::Straight } else { Geometry::LShaped };
    let polyline: Vec<[f64; 2]> = match geometry {
        Geometry::Straight => alloc::vec![a, b],
        Geometry::LShaped => {
            let corner = if rng.random_bool(0.5) { [b[0], a[1]] } else { [a[0], b[1]] };
            alloc::vec![a, corner, b]
        }
    };
    let n = rng.random_range(WAYPOINTS.0..=WAYPOINTS.1);
    let seg: Vec<f64> = polyline.windows(2).map(|w| dist(w[0], w[1])).collect();
    let length: f64 = seg.iter().sum();
    let waypoints: Vec<[f64; 2]> = (0..n)
        .map(|i| point_at(&polyline, &seg, length * i as f64 / (n - 1) as f64))
        .collect();

    // Average speed may not exceed the car limit.
    let min_duration = (length / params.car_speed_max).max(DURATION_S.0);
    let mut duration_s = rng.random_range(DURATION_S.0..=DURATION_S.1);
    if duration_s < min_duration {
        duration_s = rng.random_range(min_duration..=DURATION_S.1);
    }
    let epochs = duration_s / params.epoch_s;
    let mut schedule: Vec<u32> = Vec::with_capacity(n);
    for i in 0..n {
        let t = libm::round(epochs * i as f64 / (n - 1) as f64) as u32;
        let t = match schedule.last() {
            Some(&prev) => t.max(prev + 1),
            None => 0,
        };
        schedule.push(t);
    }
    RouteSpec {
        vehicle,
        geometry,
        start_epoch,
        waypoints,
        schedule,
        duration_s,
    }
}

fn point_at(polyline: &[[f64; 2]], seg: &[f64], mut s: f64) -> [f64; 2] {
    for (i, len) in seg.iter().enumerate() {
        if s <= *len || i == seg.len() - 1 {
            let f = if *len > 0.0 { (s / len).min(1.0) } else { 0.0 };
            return lerp(polyline[i], polyline[i + 1], f);
        }
        s -= len;
    }
    polyline[polyline.len() - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let cfg = ScenarioConfig {
            routes_min: 10,
            routes_max: 20,
            perturb_p: 0.75,
        };
        let p = DreamrParams::default();
        assert_eq!(generate_scenario(&cfg, &p, 7), generate_scenario(&cfg, &p, 7));
        assert_ne!(generate_scenario(&cfg, &p, 7), generate_scenario(&cfg, &p, 8));
    }

    #[test]
    fn route_bounds() {
        let cfg = ScenarioConfig {
            routes_min: 4,
            routes_max: 8,
            perturb_p: 0.75,
        };
        let p = DreamrParams::default();
        for seed in 0..50 {
            let s = generate_scenario(&cfg, &p, seed);
            assert!((4..=8).contains(&s.routes.len()));
            for r in &s.routes {
                assert!((5..=15).contains(&r.waypoints.len()));
                assert!((100.0..=900.0).contains(&r.duration_s));
                assert!(r.endpoint_separation() > 0.2);
                assert!(r.schedule.windows(2).all(|w| w[1] > w[0]));
                assert!(r.length() / r.duration_s <= p.car_speed_max + 1e-12);
            }
        }
    }
}
