//! Banded solves for the three-point schemes.

use crate::error::{Error, Result};

/// Solve `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]` by Gaussian
/// elimination with partial pivoting (one extra super-diagonal of fill).
/// `sub[0]` and `sup[n-1]` are ignored.
pub(crate) fn solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::InvalidGrid("tridiagonal bands of unequal length".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // row i holds (d, u1, u2) at columns i, i+1, i+2 after elimination
    let mut d = diag.to_vec();
    let mut u1: Vec<f64> = (0..n).map(|i| if i + 1 < n { sup[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        let l = sub[i + 1];
        if l.abs() > d[i].abs() {
            // swap rows i and i+1
            let (nd, nu1, nu2) = (l, d[i + 1], if i + 2 < n { sup[i + 1] } else { 0.0 });
            let (od, ou1, ou2) = (d[i], u1[i], u2[i]);
            d[i] = nd;
            u1[i] = nu1;
            u2[i] = nu2;
            b.swap(i, i + 1);
            let m = od / nd;
            d[i + 1] = ou1 - m * nu1;
            u1[i + 1] = ou2 - m * nu2;
            b[i + 1] -= m * b[i];
        } else {
            if d[i] == 0.0 {
                return Err(Error::DegenerateInput(format!(
                    "singular tridiagonal system at row {i}"
                )));
            }
            let m = l / d[i];
            d[i + 1] -= m * u1[i];
            if i + 1 < n - 1 {
                u1[i + 1] -= m * u2[i];
            }
            b[i + 1] -= m * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        return Err(Error::DegenerateInput("singular tridiagonal system".into()));
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn apply(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn random_systems_including_indefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 10, 57] {
            for _ in 0..20 {
                let sub: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let sup: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let b = apply(&sub, &diag, &sup, &x);
                let y = solve(&sub, &diag, &sup, &b).unwrap();
                let back = apply(&sub, &diag, &sup, &y);
                let r = back.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
                assert!(r < 1e-9, "n = {n}, residual {r}");
            }
        }
    }

    #[test]
    fn singular_is_reported() {
        assert!(solve(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[1.0, 2.0]).is_err());
    }
}
