//! Low-lying spectra of assembled Hamiltonians.

use serde::{Deserialize, Serialize};

use crate::agmon::AgmonGeometry;
use crate::error::{Error, Result};
use crate::hartree::HartreeSolution;
use crate::model::{GridField, Problem, Well};
use crate::operators::{
    assemble_hamiltonian, mean_field_term, parity_restrict, Boundary, DiscreteHamiltonian, Parity,
    ReducedHamiltonian, Side,
};

/// Which tridiagonal solver produces eigenpairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    /// Bisection plus inverse iteration.
    #[default]
    Dense,
    /// Shift-invert subspace iteration.
    Iterative,
    /// Run both and insist they agree.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub method: EigenMethod,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            method: EigenMethod::Dense,
            tol: 1e-10,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit grid mass.
    pub vector: GridField,
    pub parity: Option<Parity>,
    /// `∥H v − μ v∥₂` in the grid norm.
    pub residual: f64,
}

/// `k` lowest eigenpairs of a reduced operator, ascending.
pub fn reduced_eigenpairs(
    h: &ReducedHamiltonian,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let t = h.matrix();
    let pairs = match opts.method {
        EigenMethod::Dense => t.lowest_dense(k)?,
        EigenMethod::Iterative => t.lowest_iterative(k, opts.tol, opts.max_iter)?,
        EigenMethod::Both => {
            let dense = t.lowest_dense(k)?;
            let iterative = t.lowest_iterative(k, opts.tol, opts.max_iter)?;
            for (j, (a, b)) in dense.iter().zip(&iterative).enumerate() {
                if (a.value - b.value).abs() > 1e-9 * a.value.abs().max(1.0) {
                    return Err(Error::Consistency(format!(
                        "eigenvalue {j}: dense {:.17e} vs iterative {:.17e}",
                        a.value, b.value
                    )));
                }
            }
            dense
        }
    };
    let mut out = Vec::with_capacity(k);
    for (j, p) in pairs.into_iter().enumerate() {
        if p.residual > opts.tol * p.value.abs().max(1.0) {
            return Err(Error::Eigensolver(format!(
                "eigenpair {j} residual {:e} above tolerance {:e}",
                p.residual, opts.tol
            )));
        }
        out.push(EigenPair {
            value: p.value,
            vector: h.lift(&p.vector),
            parity: h.parity(),
            residual: p.residual,
        });
    }
    Ok(out)
}

/// `k` lowest eigenpairs on the active nodes of `h`, ascending.
pub fn lowest_eigenpairs(
    h: &DiscreteHamiltonian,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let (start, end) = h.active_range();
    if k == 0 || k > end - start {
        return Err(Error::KExceedsGrid { k, n: end - start });
    }
    reduced_eigenpairs(&h.reduce(), k, opts)
}

/// Source of the reported eigenvalues in a [`SpectralSummary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMethod {
    Full,
    #[default]
    ParitySplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub mu_ex: f64,
    pub gap1: f64,
    pub gap2: f64,
    /// Eigenvalues of the unsplit solve, for the agreement check.
    pub full_values: [f64; 3],
    pub u_plus: GridField,
    pub u_minus: GridField,
    pub u_ex: GridField,
    pub tunneling: f64,
    pub method: SummaryMethod,
    /// Frozen mean-field Hamiltonian `h_DW` with box walls.
    pub hamiltonian: DiscreteHamiltonian,
}

/// Tolerance for agreement between the full and the parity-split solves.
pub fn split_agreement_tolerance(gap1: f64) -> f64 {
    (1e-6 * gap1).max(1e-9)
}

/// `h_DW` built from the converged double-well state.
pub fn double_well_hamiltonian(
    problem: &Problem,
    dw: &HartreeSolution,
) -> Result<DiscreteHamiltonian> {
    let mf = mean_field_term(&dw.state.density(), &problem.interaction);
    assemble_hamiltonian(&problem.sample(Well::Double), &mf, Boundary::Box)
}

/// Sign convention: positive mass on `x > 0`.
fn orient_right(v: GridField) -> GridField {
    if v.integral_where(|x| x > 0.0) < 0.0 {
        v.scaled(-1.0)
    } else {
        v
    }
}

/// Lowest three levels of `h_DW`, split by parity and checked against an
/// unsplit solve.
pub fn spectral_summary(
    problem: &Problem,
    dw: &HartreeSolution,
    method: SummaryMethod,
    opts: &EigenOptions,
) -> Result<SpectralSummary> {
    let h = double_well_hamiltonian(problem, dw)?;
    let split = |parity| -> Result<ReducedHamiltonian> {
        parity_restrict(&h, parity).map_err(|e| match e {
            Error::PotentialNotSymmetric { max_deviation } => Error::ParitySplitUnavailable(
                format!("potential not symmetric (max deviation {max_deviation:e})"),
            ),
            other => other,
        })
    };
    let mut even = reduced_eigenpairs(&split(Parity::Even)?, 2, opts)?;
    let mut odd = reduced_eigenpairs(&split(Parity::Odd)?, 2, opts)?;
    let full = lowest_eigenpairs(&h, 3, opts)?;

    let plus = even.remove(0);
    let minus = odd.remove(0);
    if minus.value < plus.value {
        return Err(Error::Consistency(format!(
            "odd ground level {:.17e} lies below the even one {:.17e}",
            minus.value, plus.value
        )));
    }
    // third level is whichever sector's second state is lower
    let ex = if even[0].value <= odd[0].value {
        even.remove(0)
    } else {
        odd.remove(0)
    };
    let split_values = [plus.value, minus.value, ex.value];
    let full_values = [full[0].value, full[1].value, full[2].value];
    let tol = split_agreement_tolerance(minus.value - plus.value);
    for j in 0..3 {
        if (split_values[j] - full_values[j]).abs() > tol {
            return Err(Error::Consistency(format!(
                "level {j}: parity split {:.17e} vs full {:.17e}",
                split_values[j], full_values[j]
            )));
        }
    }
    let [mu_plus, mu_minus, mu_ex] = match method {
        SummaryMethod::ParitySplit => split_values,
        SummaryMethod::Full => full_values,
    };
    let u_plus = if plus.vector.integral() < 0.0 {
        plus.vector.scaled(-1.0)
    } else {
        plus.vector
    };
    let geometry = AgmonGeometry::new(problem.potential.s(), problem.potential.separation());
    Ok(SpectralSummary {
        mu_plus,
        mu_minus,
        mu_ex,
        gap1: mu_minus - mu_plus,
        gap2: mu_ex - mu_minus,
        full_values,
        u_plus,
        u_minus: orient_right(minus.vector),
        u_ex: orient_right(ex.vector),
        tunneling: geometry.tunneling(),
        method,
        hamiltonian: h,
    })
}

/// Node where the half-space condition for the right well is imposed: the
/// last node with `x ≤ -L/2 + c`.
pub fn dirichlet_cut(problem: &Problem, c: f64) -> Result<usize> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cut distance must be positive, got {c}"
        )));
    }
    let grid = problem.grid;
    let plane = -problem.potential.half_separation() + c;
    let x_max = grid.half_extent();
    let cut = grid
        .floor_index(plane)
        .filter(|_| plane > -x_max && plane < x_max)
        .ok_or_else(|| {
            Error::CutOutsideGrid(format!("plane x = {plane} outside [-{x_max}, {x_max}]"))
        })?;
    if cut + 1 >= grid.n_points() {
        return Err(Error::CutOutsideGrid(format!(
            "plane x = {plane} leaves no interior nodes"
        )));
    }
    Ok(cut)
}

/// Ground state of `h_DW` with a zero condition beyond the cut plane,
/// extended by zero and sign-fixed positive.
pub fn dirichlet_ground(
    h_dw: &DiscreteHamiltonian,
    problem: &Problem,
    c: f64,
    side: Side,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    let cut_right = dirichlet_cut(problem, c)?;
    let n = problem.grid.n_points();
    let boundary = match side {
        Side::Right => Boundary::HalfSpace {
            cut: cut_right,
            keep: Side::Right,
        },
        Side::Left => Boundary::HalfSpace {
            cut: n - 1 - cut_right,
            keep: Side::Left,
        },
    };
    let restricted = h_dw.with_boundary(boundary)?;
    let mut pair = lowest_eigenpairs(&restricted, 1, opts)?.remove(0);
    if pair.vector.integral() < 0.0 {
        pair.vector = pair.vector.scaled(-1.0);
    }
    Ok(pair)
}

/// Gap estimate from the ground-state quotient representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientGap {
    pub value: f64,
    /// Nodes skipped because `u_+` fell below the floor.
    pub excluded: usize,
}

pub const QUOTIENT_FLOOR: f64 = 1e-280;

/// `h Σ_edges u_i u_{i+1} ((f_{i+1} - f_i)/h)²` with `f = u_-/u_+`.
///
/// On the grid this equals `⟨u_-, H u_-⟩ - μ_+` exactly when `H u_+ = μ_+ u_+`
/// and `∥u_-∥ = 1`, so it is an independent route to `μ_- - μ_+`.
pub fn gap_via_quotient(u_plus: &GridField, u_minus: &GridField, floor: f64) -> QuotientGap {
    let h = u_plus.grid().spacing();
    let up = u_plus.values();
    let um = u_minus.values();
    let excluded = up.iter().filter(|&&v| !(v >= floor)).count();
    if excluded > 0 {
        log::debug!("quotient gap: {excluded} nodes below floor {floor:e} excluded");
    }
    let mut sum = 0.0;
    for i in 0..up.len().saturating_sub(1) {
        let (a, b) = (up[i], up[i + 1]);
        if !(a >= floor && b >= floor) {
            continue;
        }
        let df = (um[i + 1] / b - um[i] / a) / h;
        sum += a * b * df * df;
    }
    QuotientGap {
        value: h * sum,
        excluded,
    }
}
