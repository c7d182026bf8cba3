//! Cutoff quasi-modes built from half-space Dirichlet ground states, the
//! two-mode states they generate, and norms comparing them with `u_±`.

use std::f64::consts::FRAC_PI_2;

use crate::agmon::AgmonGeometry;
use crate::error::{Error, Result};
use crate::model::{Grid, GridField};
use crate::operators::DiscreteHamiltonian;
use crate::spectrum::{EigenPair, SpectralSummary};

/// `t³(10 - 15t + 6t²)` clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cutoffs {
    pub c: f64,
    /// Ramp interval `[-L/2 + 2c, -L/2 + 3c]` of `χ_r`.
    pub band: (f64, f64),
    pub chi_r: GridField,
    pub chi_l: GridField,
}

/// `χ_r` ramps from 0 to 1 across the band; `χ_ℓ` is its reflection.
pub fn build_cutoffs(grid: &Grid, separation: f64, c: f64) -> Result<Cutoffs> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoff distance must be positive, got {c}"
        )));
    }
    if 3.0 * c >= separation {
        return Err(Error::CutoffBandsOverlap {
            three_c: 3.0 * c,
            separation,
        });
    }
    let lo = -separation / 2.0 + 2.0 * c;
    let hi = -separation / 2.0 + 3.0 * c;
    let chi_r = grid.sample(|x| smoothstep((x - lo) / (hi - lo)));
    let chi_l = chi_r.reflect();
    Ok(Cutoffs {
        c,
        band: (lo, hi),
        chi_r,
        chi_l,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiModeSet {
    pub cutoffs: Cutoffs,
    /// Dirichlet ground states `u_r^(D)`, `u_ℓ^(D)`.
    pub dirichlet_r: GridField,
    pub dirichlet_l: GridField,
    pub mu_d: f64,
    pub psi_r: GridField,
    pub psi_l: GridField,
    /// `(h_DW - μ^(D)) ψ`.
    pub r_r: GridField,
    pub r_l: GridField,
    /// `⟨ψ_r, ψ_ℓ⟩`.
    pub overlap_psi: f64,
    /// `⟨ψ_r, r_r⟩`.
    pub psi_r_residual: f64,
    /// `∥ψ_r∥² - 1`.
    pub norm_defect: f64,
    pub residual_norm: f64,
    /// Mass of `r_r` on nodes farther than one stencil width from the band.
    pub residual_mass_outside_band: f64,
}

/// `ψ = χ u^(D)` on both sides, with residuals from the box Hamiltonian.
pub fn build_quasimodes(
    h_dw: &DiscreteHamiltonian,
    dirichlet_r: &EigenPair,
    dirichlet_l: &EigenPair,
    cutoffs: &Cutoffs,
) -> Result<QuasiModeSet> {
    if h_dw.grid() != dirichlet_r.vector.grid() || h_dw.grid() != cutoffs.chi_r.grid() {
        return Err(Error::GridMismatch);
    }
    let mu_d = dirichlet_r.value;
    let psi_r = cutoffs.chi_r.mul(&dirichlet_r.vector);
    let psi_l = cutoffs.chi_l.mul(&dirichlet_l.vector);
    let r_r = h_dw.apply(&psi_r).sub(&psi_r.scaled(mu_d));
    let r_l = h_dw.apply(&psi_l).sub(&psi_l.scaled(dirichlet_l.value));

    let grid = psi_r.grid();
    let h = grid.spacing();
    let (lo, hi) = cutoffs.band;
    let outside = h * grid
        .nodes()
        .zip(r_r.values())
        .filter(|(x, _)| *x < lo - 1.5 * h || *x > hi + 1.5 * h)
        .map(|(_, v)| v * v)
        .sum::<f64>();

    Ok(QuasiModeSet {
        overlap_psi: psi_r.dot(&psi_l),
        psi_r_residual: psi_r.dot(&r_r),
        norm_defect: psi_r.mass() - 1.0,
        residual_norm: r_r.norm(),
        residual_mass_outside_band: outside,
        cutoffs: cutoffs.clone(),
        dirichlet_r: dirichlet_r.vector.clone(),
        dirichlet_l: dirichlet_l.vector.clone(),
        mu_d,
        psi_r,
        psi_l,
        r_r,
        r_l,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeStates {
    pub psi_plus: GridField,
    pub psi_minus: GridField,
    /// `∥ψ_r + ψ_ℓ∥` and `∥ψ_r - ψ_ℓ∥`.
    pub norm_sum: f64,
    pub norm_difference: f64,
}

/// `ψ_± = (ψ_r ± ψ_ℓ) / ∥ψ_r ± ψ_ℓ∥`.
pub fn two_mode_states(qm: &QuasiModeSet) -> Result<TwoModeStates> {
    let sum = qm.psi_r.add(&qm.psi_l);
    let diff = qm.psi_r.sub(&qm.psi_l);
    let norm_sum = sum.norm();
    let norm_difference = diff.norm();
    if norm_difference < 1e-6 {
        return Err(Error::DegenerateDenominator(norm_difference));
    }
    Ok(TwoModeStates {
        psi_plus: sum.scaled(1.0 / norm_sum),
        psi_minus: diff.scaled(1.0 / norm_difference),
        norm_sum,
        norm_difference,
    })
}

/// `∥ψ - ⟨u_+, ψ⟩u_+ - ⟨u_-, ψ⟩u_-∥`.
pub fn projection_defect(psi: &GridField, summary: &SpectralSummary) -> f64 {
    let a = summary.u_plus.dot(psi);
    let b = summary.u_minus.dot(psi);
    psi.sub(&summary.u_plus.scaled(a))
        .sub(&summary.u_minus.scaled(b))
        .norm()
}

/// Smooth half-line partition with `χ_{x≥0}² + χ_{x≤0}² = 1`, switching over
/// `|x| < width`. The left member is the exact reflection of the right one.
pub fn half_line_partition(grid: &Grid, width: f64) -> (GridField, GridField) {
    let right = grid.sample(|x| (FRAC_PI_2 * smoothstep((x + width) / (2.0 * width))).sin());
    let left = right.reflect();
    (right, left)
}

/// Default switching half-width of [`half_line_partition`].
pub const PARTITION_WIDTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDifferenceNorms {
    /// `∥|u_+|² - |u_-|²∥_{L¹}`.
    pub l1_density: f64,
    /// `∥|u_+| - |u_-|∥_{L²}`.
    pub l2_modulus: f64,
    /// `∥|u_+| - |u_-|∥_{L∞}`.
    pub linf_modulus: f64,
    /// `∥χ_{x≥0}(u_+ - u_-)∥`.
    pub half_space_right: f64,
    /// `∥χ_{x≤0}(u_+ + u_-)∥`, equal to the previous one by parity.
    pub half_space_left: f64,
}

/// Distances between the two lowest eigenvectors.
pub fn pair_difference_norms(u_plus: &GridField, u_minus: &GridField) -> PairDifferenceNorms {
    let h = u_plus.grid().spacing();
    let l1_density = h * u_plus
        .values()
        .iter()
        .zip(u_minus.values())
        .map(|(a, b)| (a * a - b * b).abs())
        .sum::<f64>();
    let modulus = u_plus.zip_map(u_minus, |a, b| a.abs() - b.abs());
    let (chi_right, chi_left) = half_line_partition(u_plus.grid(), PARTITION_WIDTH);
    PairDifferenceNorms {
        l1_density,
        l2_modulus: modulus.norm(),
        linf_modulus: modulus.max_abs(),
        half_space_right: chi_right.mul(&u_plus.sub(u_minus)).norm(),
        half_space_left: chi_left.mul(&u_plus.add(u_minus)).norm(),
    }
}

/// `∥χ_{x≥0} u_+ - u_r∥`.
pub fn two_mode_localization(u_plus: &GridField, u_r: &GridField) -> f64 {
    let (chi_right, _) = half_line_partition(u_plus.grid(), PARTITION_WIDTH);
    chi_right.mul(u_plus).sub(u_r).norm()
}

/// `max u_r^(D)(x) e^{(1-ε) d_DW(x, L/2)}` over the cutoff band.
pub fn dirichlet_band_decay(
    u_d: &GridField,
    geom: &AgmonGeometry,
    cutoffs: &Cutoffs,
    epsilon: f64,
) -> f64 {
    let grid = u_d.grid();
    let h = grid.spacing();
    let (lo, hi) = cutoffs.band;
    let bottom = geom.separation() / 2.0;
    grid.nodes()
        .zip(u_d.values())
        .filter(|(x, _)| *x >= lo && *x <= hi)
        .map(|(x, v)| v.abs() * ((1.0 - epsilon) * geom.distance(x, bottom, h)).exp())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(0.5), 0.5);
        let grid = Grid::new(8.0, 0.02).unwrap();
        let c = build_cutoffs(&grid, 6.0, 1.0).unwrap();
        assert_eq!(c.chi_l, c.chi_r.reflect());
        for (x, v) in grid.nodes().zip(c.chi_r.values()) {
            assert!((0.0..=1.0).contains(v));
            if x <= -1.0 {
                assert_eq!(*v, 0.0);
            }
            if x >= 0.0 {
                assert_eq!(*v, 1.0);
            }
        }
        assert!(matches!(
            build_cutoffs(&grid, 3.0, 1.0),
            Err(Error::CutoffBandsOverlap { .. })
        ));
    }

    #[test]
    fn partition_of_unity() {
        let grid = Grid::new(4.0, 0.05).unwrap();
        let (r, l) = half_line_partition(&grid, 1.0);
        for (a, b) in r.values().iter().zip(l.values()) {
            assert!((a * a + b * b - 1.0).abs() < 1e-14);
        }
        assert_eq!(l, r.reflect());
    }

    #[test]
    fn identical_vectors_have_zero_distance() {
        let grid = Grid::new(4.0, 0.05).unwrap();
        let u = grid.sample(|x| (-x * x).exp());
        let n = pair_difference_norms(&u, &u);
        assert_eq!(n.l1_density, 0.0);
        assert_eq!(n.l2_modulus, 0.0);
        assert_eq!(n.linf_modulus, 0.0);
    }
}
