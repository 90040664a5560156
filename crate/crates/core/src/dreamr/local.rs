//! The Move-mode local MDP over relative states `(dx, dy, vx, vy)`.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dynamics::{action_set, integrate, move_cost};
use super::params::DreamrParams;
use super::MOVE;
use crate::error::LocalError;
use crate::grid::Grid;
use crate::local::{compute_terminal_pseudo_cost, finite_horizon_vi, max_step_cost, CostToGoTable, LocalModel, Successors, ViOptions};

/// Double integrator with a fixed set of acceleration-noise samples.
#[derive(Clone, Debug)]
pub struct DoubleIntegratorModel {
    pub params: DreamrParams,
    actions: Vec<[f64; 2]>,
    noise: Vec<[f64; 2]>,
}

impl DoubleIntegratorModel {
    /// `samples` noise draws from `seed`; with zero noise a single draw suffices.
    pub fn new(params: DreamrParams, samples: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = if params.sigma_acc == 0.0 { 1 } else { samples.max(1) };
        let noise = (0..m)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                let y: f64 = StandardNormal.sample(&mut rng);
                [x * params.sigma_acc, y * params.sigma_acc]
            })
            .collect();
        Self {
            actions: action_set(&params),
            params,
            noise,
        }
    }

    pub fn actions(&self) -> &[[f64; 2]] {
        &self.actions
    }
}

impl LocalModel for DoubleIntegratorModel {
    fn dim(&self) -> usize {
        4
    }

    fn num_actions(&self) -> usize {
        self.actions.len()
    }

    fn control(&self, a: usize) -> Vec<f64> {
        self.actions[a].to_vec()
    }

    fn is_target(&self, rel: &[f64]) -> bool {
        libm::hypot(rel[0], rel[1]) <= self.params.eps_pos && libm::hypot(rel[2], rel[3]) <= self.params.eps_vel
    }

    fn successors(&self, rel: &[f64], a: usize, out: &mut Successors) {
        out.clear(4);
        let pos = [rel[0], rel[1]];
        let vel = [rel[2], rel[3]];
        let w = 1.0 / self.noise.len() as f64;
        for n in &self.noise {
            let acc = [self.actions[a][0] + n[0], self.actions[a][1] + n[1]];
            let (p, v) = integrate(&self.params, pos, vel, acc);
            let c = move_cost(&self.params, pos, vel, p);
            out.push(w, c, &[p[0], p[1], v[0], v[1]]);
        }
    }
}

/// Breakpoint counts of the Move value grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Odd count over `[-1, 1]`, denser near zero.
    pub pos_points: usize,
    /// Odd count over `[-XYDOT_LIM, XYDOT_LIM]`.
    pub vel_points: usize,
    /// Breakpoint next to zero on the velocity axes; the rest are uniform
    /// out to the limit. `0` makes the whole axis uniform.
    pub vel_inner: f64,
    /// Spacing next to zero on the position axes.
    pub pos_inner: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            pos_points: 25,
            vel_points: 9,
            pos_inner: 0.0025,
            vel_inner: 0.0,
        }
    }
}

/// `0, ±h, ±(h + hr), …` with spacings growing by a constant ratio `r ≥ 1`,
/// chosen so the outermost breakpoint lands on `±1`.
pub fn position_axis(points: usize, inner: f64) -> Result<Vec<f64>, LocalError> {
    if points < 3 || points % 2 == 0 {
        return Err(LocalError::Config("position axis needs an odd count ≥ 3".into()));
    }
    let side = (points - 1) / 2;
    if !(inner > 0.0) || inner * side as f64 > 1.0 {
        return Err(LocalError::Config("inner spacing too large for the point count".into()));
    }
    let span = |r: f64| (0..side).map(|i| inner * libm::pow(r, i as f64)).sum::<f64>();
    let (mut lo, mut hi) = (1.0, 2.0);
    while span(hi) < 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if span(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let mut pos = Vec::with_capacity(side);
    let mut x = 0.0;
    for i in 0..side - 1 {
        x += inner * libm::pow(r, i as f64);
        pos.push(x);
    }
    pos.push(1.0);
    let mut axis: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
    axis.push(0.0);
    axis.extend(pos);
    Ok(axis)
}

/// `0, ±inner`, then uniform out to `±lim`; fully uniform when `inner` is 0.
pub fn velocity_axis(points: usize, lim: f64, inner: f64) -> Result<Vec<f64>, LocalError> {
    if points < 3 || points % 2 == 0 {
        return Err(LocalError::Config("velocity axis needs an odd count ≥ 3".into()));
    }
    if inner == 0.0 {
        return Ok(Grid::linspace(-lim, lim, points));
    }
    let side = (points - 1) / 2;
    if !(inner > 0.0 && inner < lim) || side < 2 {
        return Err(LocalError::Config("inner velocity breakpoint needs 0 < inner < limit and ≥ 5 points".into()));
    }
    let step = (lim - inner) / (side - 1) as f64;
    let pos: Vec<f64> = (0..side).map(|i| if i + 1 == side { lim } else { inner + step * i as f64 }).collect();
    let mut axis: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
    axis.push(0.0);
    axis.extend(pos);
    Ok(axis)
}

pub fn move_grid(params: &DreamrParams, spec: &GridSpec) -> Result<Grid, LocalError> {
    let p = position_axis(spec.pos_points, spec.pos_inner)?;
    let v = velocity_axis(spec.vel_points, params.xydot_lim, spec.vel_inner)?;
    Grid::new(alloc::vec![p.clone(), p, v.clone(), v])
}

/// Settings for building the Move table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub grid: GridSpec,
    pub horizon: u32,
    pub samples: u32,
    pub seed: u64,
}

impl Default for TableSpec {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            horizon: 150,
            samples: 20,
            seed: 0,
        }
    }
}

/// Builds the Move-mode model and its cost-to-go table.
pub fn build_move_table(params: &DreamrParams, spec: &TableSpec) -> Result<(DoubleIntegratorModel, CostToGoTable), LocalError> {
    let model = DoubleIntegratorModel::new(params.clone(), spec.samples, spec.seed);
    let grid = move_grid(params, &spec.grid)?;
    let c_max = max_step_cost(&model, &grid)?;
    let phi = compute_terminal_pseudo_cost(c_max, spec.horizon)?;
    let table = finite_horizon_vi(
        MOVE,
        &model,
        grid,
        phi,
        spec.horizon,
        ViOptions {
            store_q: false,
            samples: spec.samples,
            seed: spec.seed,
        },
    )?;
    Ok((model, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_axis() {
        let a = position_axis(25, 0.0025).unwrap();
        assert_eq!(a.len(), 25);
        assert_eq!(a[12], 0.0);
        assert_eq!(a[24], 1.0);
        assert!((a[13] - 0.0025).abs() < 1e-15);
        let r = (a[15] - a[14]) / (a[14] - a[13]);
        assert!(r > 1.0);
        for i in 13..23 {
            let ratio = (a[i + 2] - a[i + 1]) / (a[i + 1] - a[i]);
            assert!((ratio - r).abs() < 1e-9, "{i}: {ratio} vs {r}");
        }
        for i in 0..25 {
            assert_eq!(a[i], -a[24 - i]);
        }
    }

    #[test]
    fn axis_rejects_oversized_spacing() {
        assert!(position_axis(5, 0.6).is_err());
        assert!(position_axis(4, 0.1).is_err());
        assert_eq!(position_axis(5, 0.5).unwrap(), alloc::vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn velocity_axis_shapes() {
        let u = velocity_axis(5, 0.002, 0.0).unwrap();
        assert_eq!(u, alloc::vec![-0.002, -0.001, 0.0, 0.001, 0.002]);
        let v = velocity_axis(7, 0.002, 0.0002).unwrap();
        assert_eq!(v[3], 0.0);
        assert_eq!(v[4], 0.0002);
        assert_eq!(v[6], 0.002);
        assert!(velocity_axis(7, 0.002, 0.003).is_err());
    }

    #[test]
    fn closed_form_step() {
        let mut p = DreamrParams::default();
        p.sigma_acc = 0.0;
        let (pos, vel) = integrate(&p, [0.0, 0.0], [0.0, 0.0], [p.acc_lim, 0.0]);
        let dt = p.epoch_s;
        assert!((pos[0] - 0.5 * p.acc_lim * dt * dt).abs() < 1e-18);
        assert!((vel[0] - p.acc_lim * dt).abs() < 1e-18);
        assert_eq!(pos[1], 0.0);
    }
}
