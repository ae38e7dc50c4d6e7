use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Where a profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Constructed,
    Solved,
    Loaded,
}

/// A function sampled on a uniform grid over `[-L, L]`.
///
/// Constructed profiles may also carry exact first and second derivatives
/// from the integrator; solved and loaded profiles rely on finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
    derivative: Option<Vec<f64>>,
    second: Option<Vec<f64>>,
    provenance: Provenance,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            derivative: None,
            second: None,
            provenance,
        })
    }

    pub fn from_fn(grid: Grid, provenance: Provenance, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self {
            grid,
            values,
            derivative: None,
            second: None,
            provenance,
        }
    }

    /// Wrap node values that are known to match the grid.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "values do not match the grid");
        Profile {
            grid,
            values,
            derivative: None,
            second: None,
            provenance: Provenance::Constructed,
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_fn(grid, Provenance::Constructed, |_| 0.0)
    }

    /// Attach exact derivative samples.
    pub fn with_derivatives(mut self, first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != self.grid.len() || second.len() != self.grid.len() {
            return Err(Error::GridMismatch("derivative length".into()));
        }
        self.derivative = Some(first);
        self.second = Some(second);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn exact_derivative(&self) -> Option<&[f64]> {
        self.derivative.as_deref()
    }

    pub fn exact_second(&self) -> Option<&[f64]> {
        self.second.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the (first) largest value.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn sup_distance(&self, other: &Profile) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn check_same_grid(&self, other: &Profile) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// Centered first differences; second-order one-sided at the endpoints.
    pub fn fd_first(&self) -> Vec<f64> {
        let u = &self.values;
        let n = u.len();
        let h = self.grid.step();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
        }
        d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
        d
    }

    /// Centered second differences; endpoints copy their interior neighbour.
    pub fn fd_second(&self) -> Vec<f64> {
        let u = &self.values;
        let n = u.len();
        let h2 = self.grid.step() * self.grid.step();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / h2;
        }
        d[0] = d[1];
        d[n - 1] = d[n - 2];
        d
    }

    /// Exact derivative when carried, otherwise centered differences.
    pub fn first_derivative(&self) -> Vec<f64> {
        self.derivative.clone().unwrap_or_else(|| self.fd_first())
    }

    pub fn second_derivative(&self) -> Vec<f64> {
        self.second.clone().unwrap_or_else(|| self.fd_second())
    }

    /// Linear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let h = self.grid.step();
        let s = x / h + self.grid.half_nodes() as f64;
        if s < 0.0 || s > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).min(self.len() - 2);
        let w = s - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }

    /// `x -> u(-x)` on the same grid, exact on nodes.
    pub fn reflect(&self) -> Profile {
        let rev = |v: &Vec<f64>| v.iter().rev().copied().collect::<Vec<_>>();
        let neg_rev = |v: &Vec<f64>| v.iter().rev().map(|d| -d).collect::<Vec<_>>();
        Profile {
            grid: self.grid,
            values: rev(&self.values),
            derivative: self.derivative.as_ref().map(neg_rev),
            second: self.second.as_ref().map(rev),
            provenance: self.provenance,
        }
    }

    /// Translate by a whole number of grid steps (positive moves right),
    /// padding with zeros.
    pub fn shift_nodes(&self, k: isize) -> Profile {
        let n = self.len() as isize;
        let values = (0..n)
            .map(|i| {
                let j = i - k;
                if (0..n).contains(&j) {
                    self.values[j as usize]
                } else {
                    0.0
                }
            })
            .collect();
        Profile {
            grid: self.grid,
            values,
            derivative: None,
            second: None,
            provenance: self.provenance,
        }
    }

    /// Same values on a grid with the same step but a different half-length:
    /// truncated, or zero-padded, around the centre. Carried derivatives
    /// follow the values.
    pub fn regrid(&self, grid: Grid) -> Result<Profile> {
        if grid.step() != self.grid.step() {
            return Err(Error::GridMismatch("regrid needs equal steps".into()));
        }
        let (a, b) = (grid.half_nodes() as isize, self.grid.half_nodes() as isize);
        let len = self.len() as isize;
        let take = |data: &[f64]| -> Vec<f64> {
            (0..grid.len() as isize)
                .map(|i| {
                    let j = i - a + b;
                    if j >= 0 && j < len {
                        data[j as usize]
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        Ok(Profile {
            grid,
            values: take(&self.values),
            derivative: self.derivative.as_deref().map(take),
            second: self.second.as_deref().map(take),
            provenance: self.provenance,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            derivative: None,
            second: None,
            provenance: self.provenance,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// CSV with header `x,u`, or `x,u,up,upp` when exact derivatives are
    /// carried.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match (&self.derivative, &self.second) {
            (Some(d1), Some(d2)) => {
                out.push_str("x,u,up,upp\n");
                for i in 0..self.len() {
                    let _ = writeln!(out, "{},{},{},{}", self.grid.x(i), self.values[i], d1[i], d2[i]);
                }
            }
            _ => {
                out.push_str("x,u\n");
                for i in 0..self.len() {
                    let _ = writeln!(out, "{},{}", self.grid.x(i), self.values[i]);
                }
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Profile> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty profile CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let with_derivs = match cols.as_slice() {
            ["x", "u"] => false,
            ["x", "u", "up", "upp"] => true,
            _ => return Err(Error::Parse(format!("unexpected header `{header}`"))),
        };
        let mut xs = Vec::new();
        let mut cols_data: [Vec<f64>; 3] = Default::default();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            if fields.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields",
                    lineno + 2,
                    cols.len()
                )));
            }
            xs.push(fields[0]);
            for (k, v) in fields[1..].iter().enumerate() {
                cols_data[k].push(*v);
            }
        }
        if xs.len() < 5 || xs.len() % 2 == 0 {
            return Err(Error::Parse(format!(
                "need an odd number (>= 5) of nodes, got {}",
                xs.len()
            )));
        }
        let half = (xs.len() - 1) / 2;
        let h = xs[xs.len() - 1] / half as f64;
        let grid = Grid::new(half, h)?;
        for (i, &x) in xs.iter().enumerate() {
            if (x - grid.x(i)).abs() > 1e-9 * (1.0 + grid.half_length()) {
                return Err(Error::Parse(format!(
                    "node {i} at {x} is not on a symmetric uniform grid"
                )));
            }
        }
        let [u, up, upp] = cols_data;
        let p = Profile::new(grid, u, Provenance::Loaded)?;
        if with_derivs {
            p.with_derivatives(up, upp)
        } else {
            Ok(p)
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Profile> {
        Profile::from_csv(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_bit_for_bit() {
        let g = Grid::from_half_length(7.3, 0.01).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.x(g.mirror(i)), -g.x(i));
        }
        assert_eq!(g.x(g.center()), 0.0);
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let g = Grid::new(20, 0.1).unwrap();
        let p = Profile::from_fn(g, Provenance::Constructed, |x| (-x * x).exp() / 3.0);
        let q = Profile::from_csv(&p.to_csv()).unwrap();
        assert_eq!(p.values(), q.values());
        assert_eq!(q.provenance(), Provenance::Loaded);
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(Profile::from_csv("t,v\n0,1\n").is_err());
    }

    #[test]
    fn second_difference_of_quadratic_is_exact() {
        let g = Grid::new(10, 0.25).unwrap();
        let p = Profile::from_fn(g, Provenance::Constructed, |x| 3.0 * x * x - x);
        for d in &p.fd_second()[1..g.len() - 1] {
            assert!((d - 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn shift_moves_peak() {
        let g = Grid::new(50, 0.1).unwrap();
        let p = Profile::from_fn(g, Provenance::Constructed, |x| (-x * x).exp());
        assert_eq!(p.shift_nodes(3).argmax(), g.center() + 3);
    }
}
