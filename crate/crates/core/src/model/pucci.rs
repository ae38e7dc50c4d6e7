use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which extremal operator: `M+` takes the larger coefficient on convex
/// arguments, `M-` the smaller one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremal {
    Plus,
    Minus,
}

impl Extremal {
    pub fn as_str(self) -> &'static str {
        match self {
            Extremal::Plus => "plus",
            Extremal::Minus => "minus",
        }
    }
}

/// Ellipticity constants `0 < lambda <= Lambda` together with the operator
/// branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PucciParams {
    lambda: f64,
    big_lambda: f64,
    branch: Extremal,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    lambda: f64,
    #[serde(rename = "Lambda")]
    big_lambda: f64,
    branch: Extremal,
}

impl TryFrom<RawParams> for PucciParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        PucciParams::new(r.lambda, r.big_lambda, r.branch)
    }
}

impl From<PucciParams> for RawParams {
    fn from(p: PucciParams) -> Self {
        RawParams {
            lambda: p.lambda,
            big_lambda: p.big_lambda,
            branch: p.branch,
        }
    }
}

impl PucciParams {
    pub fn new(lambda: f64, big_lambda: f64, branch: Extremal) -> Result<Self> {
        if !(lambda.is_finite() && big_lambda.is_finite()) || lambda <= 0.0 || lambda > big_lambda {
            return Err(Error::InvalidParams(format!(
                "need 0 < lambda <= Lambda, got lambda = {lambda}, Lambda = {big_lambda}"
            )));
        }
        Ok(Self {
            lambda,
            big_lambda,
            branch,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[allow(non_snake_case)]
    pub fn Lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn branch(&self) -> Extremal {
        self.branch
    }

    pub fn with_branch(self, branch: Extremal) -> Self {
        Self { branch, ..self }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lambda == self.big_lambda
    }

    /// Coefficient multiplying a nonnegative second derivative.
    pub fn convex_coeff(&self) -> f64 {
        match self.branch {
            Extremal::Plus => self.big_lambda,
            Extremal::Minus => self.lambda,
        }
    }

    /// Coefficient multiplying a negative second derivative.
    pub fn concave_coeff(&self) -> f64 {
        match self.branch {
            Extremal::Plus => self.lambda,
            Extremal::Minus => self.big_lambda,
        }
    }

    /// Coefficient the operator applies to `m`; ties at zero take the
    /// nonnegative branch.
    #[inline]
    pub fn coeff(&self, m: f64) -> f64 {
        if m >= 0.0 {
            self.convex_coeff()
        } else {
            self.concave_coeff()
        }
    }

    #[inline]
    pub fn eval(&self, m: f64) -> f64 {
        self.coeff(m) * m
    }

    /// The unique `m'` with `eval(m') == m`. The operator preserves sign, so
    /// the branch is read off the sign of `m`.
    #[inline]
    pub fn inverse(&self, m: f64) -> f64 {
        m / self.coeff(m)
    }
}
