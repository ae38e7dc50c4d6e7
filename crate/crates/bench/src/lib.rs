//! Shared fixtures for the solver benchmarks.

use pucci_core::bvp::DiscreteOperator;
use pucci_core::homoclinic::build_omega;
use pucci_core::{Extremal, Grid, Landscape, Nonlinearity, Potential, Profile, PucciParams};

pub fn landscape() -> Landscape {
    Landscape::new(Nonlinearity::power(2.0, 0.5).expect("valid power"), 1.0).expect("valid landscape")
}

pub fn params(branch: Extremal) -> PucciParams {
    PucciParams::new(1.0, 2.0, branch).expect("valid constants")
}

/// Operator for the well `1 - 0.3 exp(-3|x|)` on `[-L, L]`.
pub fn well_operator(branch: Extremal, half_length: f64, h: f64) -> DiscreteOperator {
    let grid = Grid::from_half_length(half_length, h).expect("valid grid");
    let l = landscape();
    DiscreteOperator::new(
        grid,
        params(branch),
        &Potential::well(1.0, 0.3, 3.0),
        l.nonlinearity().clone(),
    )
    .expect("valid operator")
}

/// Ground state on `grid`, built on a domain twice as long.
pub fn ground_state(branch: Extremal, grid: Grid) -> Profile {
    build_omega(
        &params(branch),
        &landscape(),
        2.0 * grid.half_length(),
        grid.step(),
    )
    .expect("ground state")
    .profile
    .regrid(grid)
    .expect("same step")
}
