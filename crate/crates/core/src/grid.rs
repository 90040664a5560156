//! Rectilinear grids and multilinear interpolation.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::LocalError;

/// Tensor-product grid given by per-axis strictly increasing breakpoints.
/// Point values are stored row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
    strides: Vec<usize>,
    len: usize,
}

/// Corner indices and blend weights of the cell enclosing a query point.
#[derive(Clone, Debug, Default)]
pub struct CellWeights {
    pub index: Vec<usize>,
    pub weight: Vec<f64>,
}

impl CellWeights {
    /// `Σ w_i v[offset + idx_i]`.
    #[inline]
    pub fn blend(&self, values: &[f64], offset: usize) -> f64 {
        let mut acc = 0.0;
        for (i, w) in self.index.iter().zip(&self.weight) {
            acc += w * values[offset + i];
        }
        acc
    }
}

impl Grid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self, LocalError> {
        if axes.is_empty() {
            return Err(LocalError::Config("grid needs at least one axis".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.is_empty() || a.iter().any(|v| !v.is_finite()) {
                return Err(LocalError::Config(alloc::format!("axis {i} is empty or non-finite")));
            }
            if a.windows(2).any(|w| w[1] <= w[0]) {
                return Err(LocalError::Config(alloc::format!("axis {i} is not strictly increasing")));
            }
        }
        let mut strides = alloc::vec![1usize; axes.len()];
        for i in (0..axes.len() - 1).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].len();
        }
        let len = strides[0] * axes[0].len();
        Ok(Self { axes, strides, len })
    }

    /// Evenly spaced axis with `n` points over `[lo, hi]`.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return alloc::vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Coordinates of the point with flat index `idx`.
    pub fn point(&self, mut idx: usize, out: &mut [f64]) {
        for (d, axis) in self.axes.iter().enumerate() {
            let i = idx / self.strides[d];
            idx %= self.strides[d];
            out[d] = axis[i];
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len).map(move |i| {
            let mut p = alloc::vec![0.0; self.dim()];
            self.point(i, &mut p);
            p
        })
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Clamp `x` into the grid box.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, axis) in x.iter_mut().zip(&self.axes) {
            *v = v.clamp(axis[0], axis[axis.len() - 1]);
        }
    }

    /// Fill `out` with the multilinear weights of the (clamped) point `x`.
    pub fn weights(&self, x: &[f64], out: &mut CellWeights) {
        out.index.clear();
        out.weight.clear();
        out.index.push(0);
        out.weight.push(1.0);
        for (d, axis) in self.axes.iter().enumerate() {
            let n = axis.len();
            if n == 1 {
                continue;
            }
            let v = x[d].clamp(axis[0], axis[n - 1]);
            // First breakpoint strictly greater than v, kept inside [1, n-1].
            let hi = axis.partition_point(|a| *a <= v).clamp(1, n - 1);
            let lo = hi - 1;
            let t = (v - axis[lo]) / (axis[hi] - axis[lo]);
            let stride = self.strides[d];
            let m = out.index.len();
            for j in 0..m {
                let base = out.index[j];
                let w = out.weight[j];
                out.index[j] = base + lo * stride;
                out.weight[j] = w * (1.0 - t);
                out.index.push(base + hi * stride);
                out.weight.push(w * t);
            }
        }
    }

    /// Multilinear interpolation of `values` (one per grid point) at `x`.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let mut w = CellWeights::default();
        self.weights(x, &mut w);
        w.blend(values, 0)
    }

    /// Smallest spacing between adjacent breakpoints over all axes.
    pub fn min_spacing(&self) -> f64 {
        self.axes
            .iter()
            .flat_map(|a| a.windows(2).map(|w| w[1] - w[0]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Order-independent fingerprint of the axis definitions (FNV-1a over the bit patterns).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |b: u64| {
            for byte in b.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for a in &self.axes {
            feed(a.len() as u64);
            for v in a {
                feed(v.to_bits());
            }
        }
        h
    }
}
