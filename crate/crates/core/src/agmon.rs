//! Agmon geometry of the double well and decay-envelope checks.

use crate::error::{Error, Result};
use crate::model::{Grid, GridField, PotentialSpec};

/// Single-well Agmon distance `|x|^{1+s/2} / (1+s/2)`.
pub fn agmon_a(x_abs: f64, s: f64) -> f64 {
    let p = 1.0 + s / 2.0;
    x_abs.abs().powf(p) / p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgmonGeometry {
    s: f64,
    separation: f64,
}

impl AgmonGeometry {
    pub fn new(s: f64, separation: f64) -> Self {
        Self { s, separation }
    }

    pub fn from_potential(p: &PotentialSpec) -> Self {
        Self::new(p.s(), p.separation())
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn a(&self, x_abs: f64) -> f64 {
        agmon_a(x_abs, self.s)
    }

    /// `T = exp(-2 A(L/2))`.
    pub fn tunneling(&self) -> f64 {
        (-2.0 * self.a(self.separation / 2.0)).exp()
    }

    /// Distance from the nearer well bottom.
    pub fn profile(&self, x: f64) -> f64 {
        let half = self.separation / 2.0;
        if x >= 0.0 {
            self.a(x - half)
        } else {
            self.a(x + half)
        }
    }

    fn sqrt_potential(&self, t: f64) -> f64 {
        let half = self.separation / 2.0;
        (t + half).abs().min((t - half).abs()).powf(self.s / 2.0)
    }

    /// Geodesic distance `∫_x^y √V_DW`, by composite Simpson with panels no
    /// wider than `spacing`, split at the kinks of `√V_DW`.
    pub fn distance(&self, x: f64, y: f64, spacing: f64) -> f64 {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        if lo == hi {
            return 0.0;
        }
        let half = self.separation / 2.0;
        let mut cuts = vec![lo];
        for b in [-half, 0.0, half] {
            if b > lo && b < hi {
                cuts.push(b);
            }
        }
        cuts.push(hi);
        cuts.windows(2)
            .map(|w| simpson(|t| self.sqrt_potential(t), w[0], w[1], spacing))
            .sum()
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, spacing: f64) -> f64 {
    let mut panels = ((b - a) / spacing).ceil().max(2.0) as usize;
    if panels % 2 == 1 {
        panels += 1;
    }
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Convenience wrapper around [`AgmonGeometry::tunneling`].
pub fn tunneling_t(geom: &AgmonGeometry) -> f64 {
    geom.tunneling()
}

/// `A_DW` sampled on the grid.
pub fn agmon_profile(grid: &Grid, geom: &AgmonGeometry) -> GridField {
    let m = grid.center();
    let mut values = vec![0.0; grid.n_points()];
    for k in 0..=m {
        let v = geom.profile(grid.x(m + k));
        values[m + k] = v;
        values[m - k] = v;
    }
    GridField::new(*grid, values)
}

/// `d_DW(x, y)` with quadrature panels of width at most `spacing`.
pub fn agmon_distance(x: f64, y: f64, geom: &AgmonGeometry, spacing: f64) -> f64 {
    geom.distance(x, y, spacing)
}

/// Smallest slack of the pointwise distance bounds on the grid: for `x ≥ 0`
/// the bound `d(x, L/2) ≥ A(|x - L/2|)`, and for `-L/2 + c ≤ x ≤ 0` the bound
/// `d(x, L/2) ≥ 2A(L/2) - A(|L/2 + x|)`.
pub fn distance_bound_slack(grid: &Grid, geom: &AgmonGeometry, c: f64) -> f64 {
    let half = geom.separation() / 2.0;
    let h = grid.spacing();
    let mut slack = f64::INFINITY;
    for x in grid.nodes() {
        let d = geom.distance(x, half, h);
        if x >= 0.0 {
            slack = slack.min(d - geom.a(x - half));
        } else if x >= -half + c {
            slack = slack.min(d - (2.0 * geom.a(half) - geom.a(half + x)));
        }
    }
    slack
}

/// Exponent `α` of the polynomial factor in the lower envelope (`d = 1`).
pub fn lower_envelope_alpha(s: f64, mu_plus: f64) -> f64 {
    let base = s / (4.0 * s);
    if s > 2.0 {
        base
    } else {
        base - mu_plus / (2.0 * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeReport {
    pub kind: EnvelopeKind,
    pub epsilon: f64,
    pub region_radius: f64,
    /// Smallest `C` with `|u| ≤ C e^{-(1-ε)A_DW}` (upper) or largest `c` with
    /// `u ≥ c e^{-A_DW} V_DW^{-(α+ε)}` (lower) on the region.
    pub fitted_constant: f64,
    pub alpha: Option<f64>,
    /// Zero by construction with the fitted constant.
    pub violation_count: usize,
    pub nodes_used: usize,
}

/// Nodes at distance at least `r` from both well bottoms and, when
/// `max_profile` is given, with `A_DW ≤ max_profile`.
fn envelope_region(
    grid: &Grid,
    geom: &AgmonGeometry,
    r: f64,
    max_profile: Option<f64>,
) -> Vec<usize> {
    let half = geom.separation() / 2.0;
    (0..grid.n_points())
        .filter(|&i| {
            let x = grid.x(i);
            (x - half).abs() >= r
                && (x + half).abs() >= r
                && max_profile.map_or(true, |cap| geom.profile(x) <= cap)
        })
        .collect()
}

fn check_inputs(epsilon: f64, r: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "envelope radius must be positive, got {r}"
        )));
    }
    Ok(())
}

/// Pointwise upper decay envelope `|u| e^{(1-ε)A_DW}`.
pub fn check_upper_envelope(
    u: &GridField,
    geom: &AgmonGeometry,
    epsilon: f64,
    r: f64,
    max_profile: Option<f64>,
) -> Result<EnvelopeReport> {
    check_inputs(epsilon, r)?;
    let grid = u.grid();
    let nodes = envelope_region(grid, geom, r, max_profile);
    if nodes.is_empty() {
        return Err(Error::RegionEmpty(format!(
            "no nodes at distance ≥ {r} from the wells"
        )));
    }
    let fitted = nodes
        .iter()
        .map(|&i| u.values()[i].abs() * ((1.0 - epsilon) * geom.profile(grid.x(i))).exp())
        .fold(0.0, f64::max);
    Ok(EnvelopeReport {
        kind: EnvelopeKind::Upper,
        epsilon,
        region_radius: r,
        fitted_constant: fitted,
        alpha: None,
        violation_count: 0,
        nodes_used: nodes.len(),
    })
}

/// Pointwise lower envelope `u_+ V_DW^{α+ε} e^{A_DW}`.
pub fn check_lower_envelope(
    u_plus: &GridField,
    geom: &AgmonGeometry,
    mu_plus: f64,
    epsilon: f64,
    r: f64,
    max_profile: Option<f64>,
) -> Result<EnvelopeReport> {
    check_inputs(epsilon, r)?;
    let grid = u_plus.grid();
    let alpha = lower_envelope_alpha(geom.s(), mu_plus);
    let mut used = 0;
    let mut fitted = f64::INFINITY;
    for i in envelope_region(grid, geom, r, max_profile) {
        let x = grid.x(i);
        let v = geom.sqrt_potential(x).powi(2);
        if v < 1e-12 {
            continue;
        }
        used += 1;
        fitted = fitted.min(u_plus.values()[i] * v.powf(alpha + epsilon) * geom.profile(x).exp());
    }
    if used == 0 {
        return Err(Error::RegionEmpty(format!(
            "no nodes at distance ≥ {r} from the wells"
        )));
    }
    Ok(EnvelopeReport {
        kind: EnvelopeKind::Lower,
        epsilon,
        region_radius: r,
        fitted_constant: fitted,
        alpha: Some(alpha),
        violation_count: 0,
        nodes_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        assert_eq!(agmon_a(0.0, 2.0), 0.0);
        assert_eq!(agmon_a(2.0, 2.0), 2.0);
        assert!((agmon_a(1.0, 4.0) - 1.0 / 3.0).abs() < 1e-15);
        let g = AgmonGeometry::new(2.0, 4.0);
        assert!((g.tunneling() - (-4.0f64).exp()).abs() < 1e-18);
        assert!((AgmonGeometry::new(2.0, 6.0).tunneling() - 1.2341e-4).abs() < 1e-8);
        assert!((g.distance(0.0, 2.0, 0.1) - 2.0).abs() < 1e-6);
        assert!((g.distance(-2.0, 2.0, 0.1) - 4.0).abs() < 1e-6);
        assert_eq!(g.distance(0.7, 0.7, 0.1), 0.0);
        let g4 = AgmonGeometry::new(4.0, 3.0);
        assert!((g4.distance(0.0, 1.5, 0.1) - g4.a(1.5)).abs() < 1e-6);
    }

    #[test]
    fn profile_is_even_and_vanishes_at_bottoms() {
        let g = AgmonGeometry::new(2.0, 4.0);
        let grid = Grid::new(6.0, 0.1).unwrap();
        let p = agmon_profile(&grid, &g);
        assert_eq!(p, p.reflect());
        assert_eq!(g.profile(2.0), 0.0);
        assert_eq!(g.profile(0.0), g.a(2.0));
        assert_eq!(g.profile(-0.0), g.a(2.0));
    }

    #[test]
    fn alpha_case_split() {
        assert!((lower_envelope_alpha(2.0, 1.0) - 0.0).abs() < 1e-15);
        assert!((lower_envelope_alpha(2.0, 0.6) - (0.25 - 0.15)).abs() < 1e-15);
        assert_eq!(lower_envelope_alpha(4.0, 7.0), 0.25);
    }

    #[test]
    fn gaussian_envelopes() {
        // the single harmonic well is the s = 2 profile with both bottoms at 0
        let g = AgmonGeometry::new(2.0, 0.0);
        let grid = Grid::new(7.0, 0.02).unwrap();
        let u = grid.sample(|x| (-x * x / 2.0).exp());
        let up = check_upper_envelope(&u, &g, 0.1, 1.0, None).unwrap();
        let at_boundary = (-0.5f64).exp() * (0.9f64 * 0.5).exp();
        assert!((up.fitted_constant - at_boundary).abs() < 1e-6);
        let low = check_lower_envelope(&u, &g, 1.0, 0.1, 1.0, None).unwrap();
        assert!(low.fitted_constant > 0.0 && low.fitted_constant.is_finite());
        assert!(matches!(
            check_upper_envelope(&u, &g, 0.1, 50.0, None),
            Err(Error::RegionEmpty(_))
        ));
    }
}
