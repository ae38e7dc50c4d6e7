use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::pucci::{Extremal, PucciParams};
use super::validation::{Check, ValidationReport};
use crate::error::{Error, Result};

/// Descriptor for the potential `V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Constant {
        value: f64,
    },
    /// `V(x) = v_inf - depth * exp(-rate |x|)`.
    Well {
        v_inf: f64,
        depth: f64,
        rate: f64,
    },
    /// `V(x) = low + (high - low) (1 + tanh(x / scale)) / 2`.
    Monotone {
        low: f64,
        high: f64,
        scale: f64,
    },
    /// `x -> inner(-x)`.
    Reflected {
        inner: Box<Potential>,
    },
    /// Samples at `x_k = (offset + k) * step`, linearly interpolated and
    /// extended by the end values.
    Tabulated {
        offset: i64,
        step: f64,
        values: Vec<f64>,
    },
}

/// Hypothesis family a potential is validated against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypothesis {
    /// Even-type well below its limit with an exponential gap bound.
    Well { params: PucciParams, c0: f64, xi0: f64 },
    /// Nondecreasing with distinct limits.
    Monotone,
    /// Nonincreasing with distinct limits (the mirrored case).
    MonotoneDecreasing,
}

impl Potential {
    pub fn constant(value: f64) -> Self {
        Potential::Constant { value }
    }

    pub fn well(v_inf: f64, depth: f64, rate: f64) -> Self {
        Potential::Well { v_inf, depth, rate }
    }

    pub fn sigmoid(low: f64, high: f64, scale: f64) -> Self {
        Potential::Monotone { low, high, scale }
    }

    /// Sample `V` on the nodes of `grid` as a tabulated potential.
    pub fn tabulate(&self, grid: &Grid) -> Potential {
        Potential::Tabulated {
            offset: -(grid.half_nodes() as i64),
            step: grid.step(),
            values: self.sample(grid),
        }
    }

    /// Structural checks that do not need a grid.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPotential(m));
        match self {
            Potential::Constant { value } => {
                if !value.is_finite() {
                    return bad("non-finite constant".into());
                }
            }
            Potential::Well { v_inf, depth, rate } => {
                if !(v_inf.is_finite() && depth.is_finite() && *depth >= 0.0) {
                    return bad(format!(
                        "well needs finite v_inf and depth >= 0, got {v_inf}, {depth}"
                    ));
                }
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad(format!("well rate must be positive, got {rate}"));
                }
            }
            Potential::Monotone { low, high, scale } => {
                if !(low.is_finite() && high.is_finite()) {
                    return bad("non-finite sigmoid limits".into());
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("sigmoid scale must be positive, got {scale}"));
                }
            }
            Potential::Reflected { inner } => inner.check()?,
            Potential::Tabulated { step, values, .. } => {
                if values.len() < 2 || !(step.is_finite() && *step > 0.0) {
                    return bad("tabulated potential needs >= 2 values and a positive step".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("non-finite tabulated value".into());
                }
            }
        }
        if self.inf() <= 0.0 {
            return bad(format!("inf V = {} must be positive", self.inf()));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Constant { value } => *value,
            Potential::Well { v_inf, depth, rate } => v_inf - depth * (-rate * x.abs()).exp(),
            Potential::Monotone { low, high, scale } => low + (high - low) * 0.5 * (1.0 + (x / scale).tanh()),
            Potential::Reflected { inner } => inner.eval(-x),
            Potential::Tabulated { offset, step, values } => {
                let mut s = x / step - *offset as f64;
                if (s - s.round()).abs() < 1e-9 {
                    s = s.round();
                }
                let last = (values.len() - 1) as f64;
                if s <= 0.0 {
                    values[0]
                } else if s >= last {
                    values[values.len() - 1]
                } else {
                    let i = s.floor() as usize;
                    let w = s - i as f64;
                    if w == 0.0 {
                        values[i]
                    } else {
                        (1.0 - w) * values[i] + w * values[i + 1]
                    }
                }
            }
        }
    }

    /// Derivative where it exists (one-sided choice at kinks).
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Potential::Constant { .. } => 0.0,
            Potential::Well { depth, rate, .. } => depth * rate * x.signum() * (-rate * x.abs()).exp(),
            Potential::Monotone { low, high, scale } => {
                let c = (x / scale).cosh();
                (high - low) * 0.5 / (scale * c * c)
            }
            Potential::Reflected { inner } => -inner.derivative(-x),
            Potential::Tabulated { offset, step, values } => {
                let s = x / step - *offset as f64;
                if s < 0.0 || s >= (values.len() - 1) as f64 {
                    0.0
                } else {
                    let i = s.floor() as usize;
                    (values[i + 1] - values[i]) / step
                }
            }
        }
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.len()).map(|i| self.eval(grid.x(i))).collect()
    }

    /// `inf V` over the real line.
    pub fn inf(&self) -> f64 {
        match self {
            Potential::Constant { value } => *value,
            Potential::Well { v_inf, depth, .. } => v_inf - depth,
            Potential::Monotone { low, high, .. } => low.min(*high),
            Potential::Reflected { inner } => inner.inf(),
            Potential::Tabulated { values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Potential::Constant { value } => *value,
            Potential::Well { v_inf, .. } => *v_inf,
            Potential::Monotone { low, high, .. } => low.max(*high),
            Potential::Reflected { inner } => inner.sup(),
            Potential::Tabulated { values, .. } => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn limit_left(&self) -> f64 {
        match self {
            Potential::Constant { value } => *value,
            Potential::Well { v_inf, .. } => *v_inf,
            Potential::Monotone { low, .. } => *low,
            Potential::Reflected { inner } => inner.limit_right(),
            Potential::Tabulated { values, .. } => values[0],
        }
    }

    pub fn limit_right(&self) -> f64 {
        match self {
            Potential::Constant { value } => *value,
            Potential::Well { v_inf, .. } => *v_inf,
            Potential::Monotone { high, .. } => *high,
            Potential::Reflected { inner } => inner.limit_left(),
            Potential::Tabulated { values, .. } => values[values.len() - 1],
        }
    }

    /// The limit at infinity used by the ground-state construction: the
    /// common limit for wells, the larger limit otherwise.
    pub fn v_inf(&self) -> f64 {
        self.limit_left().max(self.limit_right())
    }

    /// Gap constants `(C0, xi0)` that make the exponential gap bound hold for
    /// a well, when they can be read off the descriptor.
    pub fn default_well_constants(&self, params: &PucciParams) -> Option<(f64, f64)> {
        let mu = match params.branch() {
            Extremal::Plus => params.Lambda(),
            Extremal::Minus => params.lambda(),
        };
        match self {
            Potential::Constant { .. } => Some((1.0, 1.0)),
            Potential::Well { v_inf, depth, rate } => {
                let room = 0.25 * rate * rate - v_inf / mu;
                (room > 0.0).then(|| (depth.max(f64::MIN_POSITIVE), 0.5 * room))
            }
            _ => None,
        }
    }
}

/// `x -> V(-x)`. Reflecting twice returns the original descriptor.
pub fn reflect(v: &Potential) -> Potential {
    match v {
        Potential::Constant { .. } | Potential::Well { .. } => v.clone(),
        Potential::Reflected { inner } => (**inner).clone(),
        Potential::Tabulated { offset, step, values } => Potential::Tabulated {
            offset: -(offset + values.len() as i64 - 1),
            step: *step,
            values: values.iter().rev().copied().collect(),
        },
        Potential::Monotone { .. } => Potential::Reflected {
            inner: Box::new(v.clone()),
        },
    }
}

const REL_TOL: f64 = 1e-10;

/// Grid-sampled checks of the well hypotheses or of monotonicity.
pub fn validate_potential(v: &Potential, hypothesis: &Hypothesis, grid: &Grid) -> Result<ValidationReport> {
    v.check()?;
    let v0 = v.inf();
    let xs = grid.nodes();
    let vals = v.sample(grid);
    let scale = v.sup().abs().max(1.0);
    let tol = REL_TOL * scale;
    let mut report = ValidationReport::default();
    let lip = vals
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / grid.step())
        .fold(0.0, f64::max);
    report.push(Check::new(
        "v1_bounded_positive",
        v0 > 0.0 && vals.iter().all(|x| x.is_finite()) && lip.is_finite(),
        format!("V0 = {v0}, sampled Lipschitz bound {lip:.4}"),
    ));
    match hypothesis {
        Hypothesis::Well { params, c0, xi0 } => {
            let mut shape = true;
            for (i, w) in vals.windows(2).enumerate() {
                let (xa, xb) = (xs[i], xs[i + 1]);
                if xb <= 0.0 {
                    shape &= w[1] <= w[0] + tol;
                } else if xa >= 0.0 {
                    shape &= w[1] >= w[0] - tol;
                }
            }
            report.push(Check::new(
                "v2_well_shape",
                shape,
                "V nonincreasing on x < 0 and nondecreasing on x > 0",
            ));
            let (left, right) = (v.limit_left(), v.limit_right());
            let v_inf = right;
            report.push(Check::new(
                "v3_center_below_limit",
                (left - right).abs() <= tol && v.eval(0.0) <= v_inf + tol,
                format!("V(0) = {}, V_inf = {v_inf}", v.eval(0.0)),
            ));
            let mu = match params.branch() {
                Extremal::Plus => params.Lambda(),
                Extremal::Minus => params.lambda(),
            };
            let consts_ok = *c0 > 0.0 && *xi0 > 0.0;
            let rate = 2.0 * (v_inf / mu + xi0).sqrt();
            let mut worst = f64::NEG_INFINITY;
            let mut gap_ok = consts_ok;
            for (&x, &vx) in xs.iter().zip(&vals) {
                let gap = v_inf - vx;
                let bound = c0 * (-rate * x.abs()).exp();
                gap_ok &= gap >= -tol && gap <= bound * (1.0 + REL_TOL) + tol;
                worst = worst.max(gap - bound);
            }
            report.push(Check::new(
                "v3_exponential_gap",
                gap_ok,
                format!("C0 = {c0}, xi0 = {xi0}, rate {rate:.6}, worst excess {worst:.3e}"),
            ));
        }
        Hypothesis::Monotone | Hypothesis::MonotoneDecreasing => {
            let up = matches!(hypothesis, Hypothesis::Monotone);
            let mono = vals.windows(2).all(|w| {
                if up {
                    w[1] >= w[0] - tol
                } else {
                    w[1] <= w[0] + tol
                }
            });
            report.push(Check::new(
                "v2_monotone",
                mono,
                if up {
                    "V' >= 0 on the grid"
                } else {
                    "V' <= 0 on the grid"
                },
            ));
            let (left, right) = (v.limit_left(), v.limit_right());
            let distinct = if up { left < right } else { left > right };
            report.push(Check::new(
                "v2_distinct_limits",
                distinct,
                format!("limits {left} (left) and {right} (right)"),
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::from_half_length(20.0, 0.01).unwrap()
    }

    #[test]
    fn constant_is_a_well() {
        let params = PucciParams::new(1.0, 2.0, Extremal::Plus).unwrap();
        let v = Potential::constant(1.0);
        let (c0, xi0) = v.default_well_constants(&params).unwrap();
        let r = validate_potential(&v, &Hypothesis::Well { params, c0, xi0 }, &grid()).unwrap();
        assert!(r.all_passed(), "{r:?}");
    }

    #[test]
    fn exponential_well_passes_gap_bound() {
        let params = PucciParams::new(1.0, 2.0, Extremal::Plus).unwrap();
        let v = Potential::well(1.0, 0.3, 3.0);
        let (c0, xi0) = v.default_well_constants(&params).unwrap();
        // 2 sqrt(V_inf / Lambda + xi0) <= 3 with the default xi0
        assert!(2.0 * (0.5 + xi0).sqrt() <= 3.0);
        let r = validate_potential(&v, &Hypothesis::Well { params, c0, xi0 }, &grid()).unwrap();
        assert!(r.all_passed(), "{r:?}");
        // too large xi0 breaks the gap bound
        let r = validate_potential(&v, &Hypothesis::Well { params, c0, xi0: 3.0 }, &grid()).unwrap();
        assert!(!r.get("v3_exponential_gap").unwrap().passed);
    }

    #[test]
    fn sigmoid_is_monotone_not_well() {
        let v = Potential::sigmoid(1.0, 1.5, 1.0);
        let r = validate_potential(&v, &Hypothesis::Monotone, &grid()).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert_eq!((v.limit_left(), v.limit_right()), (1.0, 1.5));
        let params = PucciParams::new(1.0, 2.0, Extremal::Plus).unwrap();
        let r = validate_potential(
            &v,
            &Hypothesis::Well {
                params,
                c0: 1.0,
                xi0: 0.1,
            },
            &grid(),
        )
        .unwrap();
        assert!(!r.all_passed());
    }

    #[test]
    fn nonpositive_infimum_is_rejected() {
        let v = Potential::well(1.0, 1.5, 2.0);
        assert!(matches!(
            validate_potential(&v, &Hypothesis::Monotone, &grid()),
            Err(Error::InvalidPotential(_))
        ));
    }

    #[test]
    fn reflection_swaps_sigmoid_limits() {
        let v = Potential::sigmoid(1.0, 1.5, 1.0);
        let r = reflect(&v);
        assert_eq!((r.limit_left(), r.limit_right()), (1.5, 1.0));
        let rep = validate_potential(&r, &Hypothesis::MonotoneDecreasing, &grid()).unwrap();
        assert!(rep.all_passed());
        assert_eq!(reflect(&r), v);
        assert_eq!(r.eval(0.7), v.eval(-0.7));
    }

    #[test]
    fn even_descriptors_are_fixed_by_reflection() {
        for v in [Potential::constant(2.0), Potential::well(1.0, 0.3, 3.0)] {
            assert_eq!(reflect(&v), v);
        }
    }

    #[test]
    fn tabulated_reflection_is_bit_exact() {
        let g = Grid::new(300, 0.01).unwrap();
        let t = Potential::sigmoid(1.0, 1.5, 0.7).tabulate(&g);
        assert_eq!(reflect(&reflect(&t)), t);
        let r = reflect(&t);
        for i in 0..g.len() {
            assert_eq!(r.eval(g.x(i)).to_bits(), t.eval(-g.x(i)).to_bits());
        }
    }

    #[test]
    fn json_descriptor_round_trip() {
        let v = reflect(&Potential::sigmoid(1.0, 1.5, 1.0));
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"kind\":\"reflected\""));
        assert_eq!(serde_json::from_str::<Potential>(&s).unwrap(), v);
    }
}
