//! Dirichlet problems for `-M±(u'') + V(x) u = rhs` on `[-L, L]`.
//!
//! Everything is discretised with the centred three-point second
//! difference. Because `M±` is piecewise linear in `u''`, fixing the sign of
//! `D²u` at every node leaves a tridiagonal linear system; both solvers
//! iterate on that sign pattern.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::certify::xnorm;
use crate::error::{Error, Result};
use crate::model::{Bump, Grid, Nonlinearity, Potential, Profile, Provenance, PucciParams};
use crate::tridiag;

/// Assembled operator `u -> -M±(D²u) + V u` with zero boundary values, plus
/// the nonlinearity of the full problem.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Grid,
    params: PucciParams,
    v: Vec<f64>,
    v0: f64,
    f: Nonlinearity,
}

impl DiscreteOperator {
    pub fn new(grid: Grid, params: PucciParams, potential: &Potential, f: Nonlinearity) -> Result<Self> {
        potential.check()?;
        let v = potential.sample(&grid);
        let v0 = v.iter().copied().fold(f64::INFINITY, f64::min);
        if !(v0 > 0.0) {
            return Err(Error::InvalidPotential(format!("min V on the grid is {v0}")));
        }
        Ok(Self {
            grid,
            params,
            v,
            v0,
            f,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PucciParams {
        &self.params
    }

    pub fn potential(&self) -> &[f64] {
        &self.v
    }

    /// Smallest sampled value of `V`.
    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.f
    }

    /// Same grid and potential, other extremal operator.
    pub fn with_params(&self, params: PucciParams) -> Self {
        Self {
            params,
            ..self.clone()
        }
    }

    /// `D²u` at every node; zero at the two boundary nodes.
    pub fn second_difference(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let ih2 = 1.0 / (self.grid.step() * self.grid.step());
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * ih2;
        }
        d
    }

    /// `-M±(D²u) + V u` at interior nodes; zero at the boundary.
    pub fn action(&self, u: &Profile) -> Result<Vec<f64>> {
        self.check_grid(u.grid())?;
        let u = u.values();
        let mut out = self.second_difference(u);
        let n = u.len();
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            out[i] = -self.params.eval(out[i]) + self.v[i] * u[i];
        }
        Ok(out)
    }

    /// Forcing `f(u) + t phi0` sampled on the grid.
    pub fn forced_rhs(&self, u: &[f64], t: f64, bump: &Bump) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, &s)| self.f.f(s) + t * bump.eval(self.grid.x(i)))
            .collect()
    }

    /// Residual of the full problem at interior nodes.
    pub fn residual(&self, u: &Profile, t: f64, bump: &Bump) -> Result<Vec<f64>> {
        let mut r = self.action(u)?;
        let rhs = self.forced_rhs(u.values(), t, bump);
        let n = r.len();
        for i in 1..n - 1 {
            r[i] -= rhs[i];
        }
        Ok(r)
    }

    pub fn residual_norm(&self, u: &Profile, t: f64, bump: &Bump) -> Result<f64> {
        Ok(sup(&self.residual(u, t, bump)?))
    }

    fn check_grid(&self, g: &Grid) -> Result<()> {
        if *g != self.grid {
            return Err(Error::GridMismatch(format!(
                "profile grid ({} nodes, h = {}) differs from operator grid ({} nodes, h = {})",
                g.len(),
                g.step(),
                self.grid.len(),
                self.grid.step()
            )));
        }
        Ok(())
    }

    /// Coefficient chosen by the sign of `D²u`, interior nodes only.
    fn pattern(&self, d2: &[f64]) -> Vec<f64> {
        d2[1..d2.len() - 1]
            .iter()
            .map(|&m| self.params.coeff(m))
            .collect()
    }

    /// Solve `-c_i D²u + (V_i + shift_i) u = rhs` on the interior.
    fn linear_solve(&self, coeff: &[f64], shift: Option<&[f64]>, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.len();
        let m = n - 2;
        let ih2 = 1.0 / (self.grid.step() * self.grid.step());
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        for k in 0..m {
            let c = coeff[k] * ih2;
            sub[k] = -c;
            sup[k] = -c;
            diag[k] = 2.0 * c + self.v[k + 1] + shift.map_or(0.0, |s| s[k + 1]);
        }
        let x = tridiag::solve(&sub, &diag, &sup, &rhs[1..n - 1])?;
        let mut u = vec![0.0; n];
        u[1..n - 1].copy_from_slice(&x);
        Ok(u)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solve `-M±(D²u) + V u = rhs`, `u(±L) = 0` by iterating on the sign
/// pattern of `D²u` (policy iteration). Nodes where `D²u` is at round-off
/// level may take either coefficient without changing the equation and do
/// not count as flips.
pub fn solve_frozen(op: &DiscreteOperator, rhs: &Profile) -> Result<Profile> {
    op.check_grid(rhs.grid())?;
    let nodes = op.grid.len();
    let mut coeff = vec![op.params.convex_coeff(); nodes - 2];
    let mut flips = Vec::new();
    for _ in 0..10 * nodes {
        let u = op.linear_solve(&coeff, None, rhs.values())?;
        let d2 = op.second_difference(&u);
        let scale = sup(&d2);
        let next = op.pattern(&d2);
        let changed = (0..next.len())
            .filter(|&k| next[k] != coeff[k] && d2[k + 1].abs() > 1e-13 * scale)
            .count();
        if changed == 0 {
            return Profile::new(op.grid, u, Provenance::Solved);
        }
        flips.push(changed);
        coeff = next;
    }
    Err(Error::SolverStall {
        iterations: flips.len(),
        flips,
    })
}

/// `u = L±(v)` for `t = 0`, the forced map `F±(t, v)` otherwise:
/// `solve_frozen` with right-hand side `f(v) + t phi0`.
pub fn apply_l(op: &DiscreteOperator, v: &Profile, t: f64, bump: &Bump) -> Result<Profile> {
    op.check_grid(v.grid())?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "forcing level t = {t} must be >= 0"
        )));
    }
    let rhs = Profile::new(
        op.grid,
        op.forced_rhs(v.values(), t, bump),
        Provenance::Constructed,
    )?;
    solve_frozen(op, &rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub max_rejections: usize,
    /// Converged once `|R|_inf <= tol (1 + |u|_inf)`.
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            max_rejections: 30,
            tol: 1e-10,
        }
    }
}

/// Outcome of a full nonlinear solve. A failed solve still carries its last
/// iterate.
#[derive(Debug, Clone)]
pub struct FullSolve {
    pub profile: Profile,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    pub message: String,
}

/// Damped semismooth Newton for `-M±(D²u) + V u = f(u) + t phi0`. The
/// generalised Jacobian freezes the coefficient pattern of the current
/// iterate; steps are halved until the sup-norm residual decreases.
pub fn solve_full(
    op: &DiscreteOperator,
    t: f64,
    bump: &Bump,
    init: &Profile,
    opts: &NewtonOptions,
) -> Result<FullSolve> {
    op.check_grid(init.grid())?;
    let n = op.grid.len();
    let mut u = init.values().to_vec();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let mut current = Profile::new(op.grid, u, Provenance::Solved)?;
    let mut r = op.residual(&current, t, bump)?;
    let mut rn = sup(&r);
    for it in 0..=opts.max_iterations {
        let unorm = current.sup_norm();
        if rn <= opts.tol * (1.0 + unorm) {
            return Ok(FullSolve {
                profile: current,
                converged: true,
                residual: rn,
                iterations: it,
                message: "converged".into(),
            });
        }
        if it == opts.max_iterations {
            break;
        }
        let vals = current.values();
        let d2 = op.second_difference(vals);
        let coeff = op.pattern(&d2);
        let shift: Vec<f64> = vals.iter().map(|&s| -op.f.df(s)).collect();
        let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
        let step = match op.linear_solve(&coeff, Some(&shift), &neg_r) {
            Ok(s) => s,
            Err(e) => {
                return Ok(FullSolve {
                    profile: current,
                    converged: false,
                    residual: rn,
                    iterations: it,
                    message: format!("singular Newton system: {e}"),
                })
            }
        };
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_rejections {
            let trial: Vec<f64> = vals.iter().zip(&step).map(|(a, b)| a + alpha * b).collect();
            let trial = Profile::new(op.grid, trial, Provenance::Solved)?;
            let tr = op.residual(&trial, t, bump)?;
            let tn = sup(&tr);
            if tn.is_finite() && tn <= (1.0 - 1e-4 * alpha) * rn {
                accepted = Some((trial, tr, tn));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((p, tr, tn)) => {
                current = p;
                r = tr;
                rn = tn;
            }
            None => {
                return Ok(FullSolve {
                    profile: current,
                    converged: false,
                    residual: rn,
                    iterations: it,
                    message: format!("line search failed after {} halvings", opts.max_rejections),
                })
            }
        }
    }
    Ok(FullSolve {
        profile: current,
        converged: false,
        residual: rn,
        iterations: opts.max_iterations,
        message: format!("no convergence in {} iterations", opts.max_iterations),
    })
}

#[derive(Debug, Clone)]
pub struct BranchEntry {
    pub t: f64,
    pub profile: Profile,
    pub residual: f64,
    pub sup_norm: f64,
    pub x_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Solutions of the forced problem along a descending ladder of `t`.
#[derive(Debug, Clone, Default)]
pub struct Branch {
    pub entries: Vec<BranchEntry>,
}

impl Branch {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,sup_norm,x_norm,residual,converged\n");
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                e.t, e.sup_norm, e.x_norm, e.residual, e.converged
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn last(&self) -> Option<&BranchEntry> {
        self.entries.last()
    }

    /// Largest sup-norm over converged entries.
    pub fn sup_bound(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.converged)
            .fold(0.0, |m, e| m.max(e.sup_norm))
    }
}

/// Solve at each `t` in the strictly decreasing ladder, warm-starting from the
/// previous converged solution. Failed levels are recorded, not fatal.
pub fn continuation(
    op: &DiscreteOperator,
    t_values: &[f64],
    bump: &Bump,
    init: &Profile,
    eta1: f64,
    opts: &NewtonOptions,
) -> Result<Branch> {
    if t_values.is_empty() {
        return Err(Error::InvalidParams("empty t ladder".into()));
    }
    if t_values.windows(2).any(|w| !(w[1] < w[0])) || t_values.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidParams(
            "t ladder must be nonnegative and strictly decreasing".into(),
        ));
    }
    let mut branch = Branch::default();
    let mut guess = init.clone();
    for &t in t_values {
        let sol = solve_full(op, t, bump, &guess, opts)?;
        if sol.converged {
            guess = sol.profile.clone();
        }
        branch.entries.push(BranchEntry {
            t,
            sup_norm: sol.profile.sup_norm(),
            x_norm: xnorm(&sol.profile, eta1),
            residual: sol.residual,
            converged: sol.converged,
            iterations: sol.iterations,
            profile: sol.profile,
        });
    }
    Ok(branch)
}

/// Does `rhs1 <= rhs2` give `u1 <= u2`? Violations below `1e-12` of the
/// solution scale are attributed to round-off.
pub fn comparison_test(op: &DiscreteOperator, rhs1: &Profile, rhs2: &Profile) -> Result<bool> {
    let u1 = solve_frozen(op, rhs1)?;
    let u2 = solve_frozen(op, rhs2)?;
    let scale = 1.0 + u1.sup_norm().max(u2.sup_norm());
    Ok(u1
        .values()
        .iter()
        .zip(u2.values())
        .all(|(a, b)| *a <= *b + 1e-12 * scale))
}
