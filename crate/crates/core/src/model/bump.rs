use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Even cutoff equal to 1 on `[0, kappa0]` and 0 beyond `2 kappa0`, joined
/// by a quintic smoothstep (C2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    kappa0: f64,
}

impl Bump {
    pub fn new(kappa0: f64) -> Result<Self> {
        if !(kappa0.is_finite() && kappa0 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "bump radius must be positive, got {kappa0}"
            )));
        }
        Ok(Self { kappa0 })
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn eval(&self, x: f64) -> f64 {
        let r = x.abs();
        if r <= self.kappa0 {
            1.0
        } else if r >= 2.0 * self.kappa0 {
            0.0
        } else {
            let t = (r - self.kappa0) / self.kappa0;
            1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
        }
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.len()).map(|i| self.eval(grid.x(i))).collect()
    }
}
