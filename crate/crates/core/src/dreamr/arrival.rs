//! Arrival-time law of a waypoint whose ETA takes a lazy ±1 random walk.
//!
//! Each epoch a remaining ETA `e ≥ 1` becomes `max(e − 1 + ξ, 0)` with
//! `ξ = −1` or `+1` with probability `p/2` each and `0` otherwise. The car is at
//! the waypoint in the first epoch the ETA reads zero.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::horizon::HorizonDist;

/// One epoch of ETA perturbation.
pub fn perturb_eta(eta: u32, p: f64, rng: &mut dyn RngCore) -> u32 {
    if eta == 0 {
        return 0;
    }
    let u: f64 = rng.random();
    let xi: i64 = if u < p / 2.0 {
        -1
    } else if u < p {
        1
    } else {
        0
    };
    (eta as i64 - 1 + xi).max(0) as u32
}

/// `P(T = k | ETA = e)` for `e ≤ max_eta`, `k ≤ max_steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalTable {
    p: f64,
    max_eta: u32,
    max_steps: u32,
    /// Row `e`, column `k`.
    rows: Vec<f64>,
}

impl ArrivalTable {
    pub fn new(p: f64, max_eta: u32, max_steps: u32) -> Self {
        let w = max_steps as usize + 1;
        let h = max_eta as usize + 1;
        let mut rows = vec![0.0; h * w];
        // rows[e][k] = Σ_ξ P(ξ) rows[max(e−1+ξ,0)][k−1]; row 0 is δ_0.
        // Fill column by column so every dependency is ready.
        rows[0] = 1.0;
        let (down, stay, up) = (p / 2.0, 1.0 - p, p / 2.0);
        for k in 1..w {
            for e in 1..h {
                let at = |eta: usize, rows: &Vec<f64>| if eta < h { rows[eta * w + k - 1] } else { 0.0 };
                let base = e - 1;
                let v = down * at(base.saturating_sub(1), &rows) + stay * at(base, &rows) + up * at(base + 1, &rows);
                rows[e * w + k] = v;
            }
        }
        Self {
            p,
            max_eta,
            max_steps,
            rows,
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn max_steps(&self) -> u32 {
        self.max_steps
    }

    /// `P(T = k | ETA = eta)`.
    pub fn prob(&self, eta: u32, k: u32) -> f64 {
        if k > self.max_steps {
            return 0.0;
        }
        let w = self.max_steps as usize + 1;
        if eta <= self.max_eta {
            return self.rows[eta as usize * w + k as usize];
        }
        // Beyond the table: the law is shift-invariant away from zero.
        let shift = eta - self.max_eta;
        if k < shift {
            0.0
        } else {
            self.rows[self.max_eta as usize * w + (k - shift) as usize]
        }
    }

    /// Arrival distribution relative to now, renormalized over `1..=max_steps`,
    /// with negligible tails (below `1e-10`) dropped. An ETA of zero (car at
    /// the waypoint now) maps to step 1.
    pub fn horizon(&self, eta: u32) -> Option<HorizonDist> {
        if eta == 0 {
            return HorizonDist::degenerate(1).ok();
        }
        let w: Vec<f64> = (1..=self.max_steps)
            .map(|k| self.prob(eta, k))
            .map(|p| if p < 1e-10 { 0.0 } else { p })
            .collect();
        HorizonDist::from_weights(1, w).ok()
    }
}

/// Arrival windows cached per ETA.
#[derive(Clone, Debug)]
pub struct ArrivalModel {
    table: ArrivalTable,
    cache: Vec<Option<HorizonDist>>,
}

impl ArrivalModel {
    pub fn new(p: f64, max_eta: u32) -> Self {
        let table = ArrivalTable::new(p, max_eta, 2 * max_eta);
        let cache = (0..=max_eta).map(|e| table.horizon(e)).collect();
        Self { table, cache }
    }

    pub fn p(&self) -> f64 {
        self.table.p()
    }

    pub fn table(&self) -> &ArrivalTable {
        &self.table
    }

    /// Arrival window for a waypoint `eta` epochs away, relative to now.
    pub fn horizon(&self, eta: u32) -> Option<HorizonDist> {
        match self.cache.get(eta as usize) {
            Some(h) => h.clone(),
            None => self.table.horizon(eta),
        }
    }

    /// Same window seen from `elapsed` epochs later, conditioned on no arrival before then.
    pub fn horizon_from(&self, eta: u32, elapsed: u32) -> Option<HorizonDist> {
        self.horizon(eta)?.shifted(elapsed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unperturbed_is_degenerate() {
        let t = ArrivalTable::new(0.0, 20, 40);
        let h = t.horizon(7).unwrap();
        assert_eq!((h.start(), h.end()), (7, 7));
    }

    #[test]
    fn one_epoch_three_point_window() {
        // From ETA 2 the next reading is 0, 1 or 2 with probs p/2, 1−p, p/2.
        let p = 0.75;
        let t = ArrivalTable::new(p, 20, 40);
        assert!((t.prob(2, 1) - p / 2.0).abs() < 1e-15);
        // From ETA 1: arrival next epoch unless delayed.
        assert!((t.prob(1, 1) - (1.0 - p / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn rows_are_distributions() {
        let t = ArrivalTable::new(0.75, 30, 200);
        for e in 0..=30 {
            let s: f64 = (0..=200).map(|k| t.prob(e, k)).sum();
            assert!((s - 1.0).abs() < 1e-9, "eta {e}: {s}");
        }
    }
}
