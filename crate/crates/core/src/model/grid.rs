use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[-L, L]` with `2n + 1` nodes at `x_i = (i - n) h`.
///
/// Node coordinates are computed as an integer offset times `h`, so the grid
/// is exactly symmetric: `x(2n - i) == -x(i)` bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_nodes: usize,
    h: f64,
}

impl Grid {
    pub fn new(half_nodes: usize, h: f64) -> Result<Self> {
        if half_nodes < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 half-nodes, got {half_nodes}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {h}")));
        }
        Ok(Self { half_nodes, h })
    }

    /// Grid with step `h` whose half-length is `half_length` rounded to a
    /// multiple of `h`.
    pub fn from_half_length(half_length: f64, h: f64) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-length must be positive, got {half_length}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {h}")));
        }
        Self::new((half_length / h).round() as usize, h)
    }

    pub fn half_nodes(&self) -> usize {
        self.half_nodes
    }

    pub fn len(&self) -> usize {
        2 * self.half_nodes + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn half_length(&self) -> f64 {
        self.half_nodes as f64 * self.h
    }

    /// Index of the node at `x = 0`.
    pub fn center(&self) -> usize {
        self.half_nodes
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.half_nodes as f64) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let k = (x / self.h).round() + self.half_nodes as f64;
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Index mirrored through the origin.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.len() - 1 - i
    }
}
