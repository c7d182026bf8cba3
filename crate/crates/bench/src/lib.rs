//! Fixtures shared by the benchmarks.

use dwell_core::harness::build_problem;
use dwell_core::{GridField, Problem, RunConfig};

/// Default-configuration problem at separation `l` and coupling `lambda`.
pub fn problem(l: f64, lambda: f64) -> Problem {
    build_problem(&RunConfig::default(), l, lambda).expect("default configuration is valid")
}

/// Two Gaussian bumps at the well bottoms, as a density on the problem grid.
pub fn two_bump_density(p: &Problem) -> GridField {
    let half = p.potential.half_separation();
    p.grid
        .sample(|x| (-(x - half).powi(2)).exp() + (-(x + half).powi(2)).exp())
        .map(|v| v * v)
}
