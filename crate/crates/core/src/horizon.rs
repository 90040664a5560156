//! Distributions over the future time step at which a context event occurs.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::PlanError;

const NORM_TOL: f64 = 1e-9;

/// `P_{1:K}`: probability mass over steps `start, start + 1, ...`.
///
/// Stored as a dense window; steps outside the window have zero mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonDist {
    start: u32,
    probs: Vec<f64>,
}

impl HorizonDist {
    /// Builds a distribution from a window of weights, normalizing them.
    pub fn from_weights(start: u32, weights: Vec<f64>) -> Result<Self, PlanError> {
        if start == 0 {
            return Err(PlanError::BadHorizon("steps are 1-indexed"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(PlanError::BadHorizon("negative or non-finite weight"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(PlanError::BadHorizon("zero total mass"));
        }
        let mut d = Self {
            start,
            probs: weights.into_iter().map(|w| w / total).collect(),
        };
        d.trim();
        Ok(d)
    }

    /// Dense vector `P(1), ..., P(K)`.
    pub fn from_dense(probs: &[f64]) -> Result<Self, PlanError> {
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(PlanError::BadHorizon("probabilities must sum to one"));
        }
        Self::from_weights(1, probs.to_vec())
    }

    pub fn degenerate(k: u32) -> Result<Self, PlanError> {
        Self::from_weights(k, alloc::vec![1.0])
    }

    pub fn uniform(lo: u32, hi: u32) -> Result<Self, PlanError> {
        if hi < lo {
            return Err(PlanError::BadHorizon("empty range"));
        }
        Self::from_weights(lo, alloc::vec![1.0; (hi - lo + 1) as usize])
    }

    fn trim(&mut self) {
        let first = self.probs.iter().position(|p| *p > 0.0).unwrap_or(0);
        let last = self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0);
        self.probs = self.probs[first..=last].to_vec();
        self.start += first as u32;
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    /// Last step with positive mass.
    pub fn end(&self) -> u32 {
        self.start + self.probs.len() as u32 - 1
    }

    pub fn prob(&self, k: u32) -> f64 {
        if k < self.start {
            return 0.0;
        }
        self.probs.get((k - self.start) as usize).copied().unwrap_or(0.0)
    }

    /// `(k, P(k))` pairs with positive mass, ascending in `k`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(move |(i, p)| (self.start + i as u32, *p))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Restrict to `1..=k_max` and renormalize. `None` if no mass remains.
    pub fn truncated(&self, k_max: u32) -> Option<Self> {
        if self.start > k_max {
            return None;
        }
        let keep = (k_max - self.start + 1) as usize;
        let w: Vec<f64> = self.probs.iter().take(keep).copied().collect();
        Self::from_weights(self.start, w).ok()
    }

    /// Re-express relative to a time `elapsed` steps later: `P'(k) ∝ P(k + elapsed)`
    /// for `k ≥ 1`. `None` if all mass lies at or before `elapsed`.
    pub fn shifted(&self, elapsed: u32) -> Option<Self> {
        if elapsed == 0 {
            return Some(self.clone());
        }
        if self.end() <= elapsed {
            return None;
        }
        let (start, skip) = if self.start > elapsed {
            (self.start - elapsed, 0)
        } else {
            (1, (elapsed + 1 - self.start) as usize)
        };
        Self::from_weights(start, self.probs[skip..].to_vec()).ok()
    }
}
