//! Discrete operators: the 3-point Laplacian, the convolution mean field and
//! the assembled mean-field Hamiltonian with its parity-reduced sectors.

use std::f64::consts::SQRT_2;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;
use crate::model::{Grid, GridField, InteractionSpec};

/// `-Δu` with zero ghost values beyond both walls.
pub fn apply_laplacian(u: &GridField) -> GridField {
    let h2 = u.grid().spacing().powi(2);
    let v = u.values();
    let n = v.len();
    let out = (0..n)
        .map(|i| {
            let left = if i > 0 { v[i - 1] } else { 0.0 };
            let right = if i + 1 < n { v[i + 1] } else { 0.0 };
            (2.0 * v[i] - left - right) / h2
        })
        .collect();
    GridField::new(*u.grid(), out)
}

/// `h Σ_edges ((u_{i+1} - u_i)/h)²`, including the two edges to the ghosts.
pub fn kinetic_form(u: &GridField) -> f64 {
    let h = u.grid().spacing();
    let v = u.values();
    let n = v.len();
    let mut acc = v[0] * v[0] + v[n - 1] * v[n - 1];
    for i in 0..n - 1 {
        let d = v[i + 1] - v[i];
        acc += d * d;
    }
    acc / h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    #[default]
    Direct,
    Fft,
}

/// `(w * ρ)(x_i) = h Σ_j w(x_i - x_j) ρ_j`.
pub fn convolve_kernel(
    rho: &GridField,
    spec: &InteractionSpec,
    method: ConvolutionMethod,
) -> GridField {
    match method {
        ConvolutionMethod::Direct => convolve_direct(rho, spec),
        ConvolutionMethod::Fft => convolve_fft(rho, spec),
    }
}

fn convolve_direct(rho: &GridField, spec: &InteractionSpec) -> GridField {
    let h = rho.grid().spacing();
    let stencil = spec.stencil(h);
    let r = rho.values();
    let n = r.len();
    let out = (0..n)
        .map(|i| {
            let mut acc = stencil[0] * r[i];
            for (j, &w) in stencil.iter().enumerate().skip(1) {
                // pair the two mirror offsets so symmetric densities stay symmetric
                let left = if i >= j { r[i - j] } else { 0.0 };
                let right = if i + j < n { r[i + j] } else { 0.0 };
                acc += w * (left + right);
            }
            h * acc
        })
        .collect();
    GridField::new(*rho.grid(), out)
}

fn convolve_fft(rho: &GridField, spec: &InteractionSpec) -> GridField {
    let h = rho.grid().spacing();
    let stencil = spec.stencil(h);
    let reach = stencil.len() - 1;
    let n = rho.len();
    let len = (n + 2 * reach + 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);

    let mut kern = vec![Complex::new(0.0, 0.0); len];
    kern[0].re = stencil[0];
    for (j, &w) in stencil.iter().enumerate().skip(1) {
        kern[j].re = w;
        kern[len - j].re = w;
    }
    let mut data: Vec<Complex<f64>> = rho
        .values()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    fwd.process(&mut kern);
    fwd.process(&mut data);
    data.iter_mut().zip(&kern).for_each(|(d, k)| *d *= k);
    inv.process(&mut data);
    let scale = h / len as f64;
    GridField::new(
        *rho.grid(),
        data[..n].iter().map(|c| c.re * scale).collect(),
    )
}

/// `λ (w * ρ)`; the zero field when `λ = 0`.
pub fn mean_field_term(rho: &GridField, spec: &InteractionSpec) -> GridField {
    if spec.lambda() == 0.0 {
        return rho.grid().zeros();
    }
    convolve_kernel(rho, spec, ConvolutionMethod::Direct).scaled(spec.lambda())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Boundary treatment of an assembled Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Dirichlet walls just outside `±X`.
    Box,
    /// Field pinned to zero on the node `cut` and everything on the far side
    /// of it; `keep` names the side that stays active.
    HalfSpace { cut: usize, keep: Side },
}

/// `-Δ + V + mf` on the grid, stored as its local part `V + mf`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHamiltonian {
    grid: Grid,
    local: Vec<f64>,
    boundary: Boundary,
}

/// Assembles `-Δ + V + mf` with the requested boundary.
pub fn assemble_hamiltonian(
    potential: &GridField,
    mean_field: &GridField,
    boundary: Boundary,
) -> Result<DiscreteHamiltonian> {
    if potential.grid() != mean_field.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *potential.grid();
    if let Boundary::HalfSpace { cut, keep } = boundary {
        let n = grid.n_points();
        let empty = match keep {
            Side::Right => cut + 1 >= n,
            Side::Left => cut == 0,
        };
        if cut >= n || empty {
            return Err(Error::CutOutsideGrid(format!(
                "cut node {cut} leaves no active nodes on a {n}-point grid"
            )));
        }
    }
    let local = potential
        .values()
        .iter()
        .zip(mean_field.values())
        .map(|(v, m)| v + m)
        .collect();
    Ok(DiscreteHamiltonian {
        grid,
        local,
        boundary,
    })
}

impl DiscreteHamiltonian {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// `V + mf` sampled on the grid.
    pub fn local_part(&self) -> GridField {
        GridField::new(self.grid, self.local.clone())
    }

    /// Active node range `[start, end)`.
    pub fn active_range(&self) -> (usize, usize) {
        let n = self.grid.n_points();
        match self.boundary {
            Boundary::Box => (0, n),
            Boundary::HalfSpace {
                cut,
                keep: Side::Right,
            } => (cut + 1, n),
            Boundary::HalfSpace {
                cut,
                keep: Side::Left,
            } => (0, cut),
        }
    }

    /// Same operator with a different boundary.
    pub fn with_boundary(&self, boundary: Boundary) -> Result<DiscreteHamiltonian> {
        assemble_hamiltonian(&self.local_part(), &self.grid.zeros(), boundary)
    }

    /// `H u`; inactive nodes are treated as zero on input and output.
    pub fn apply(&self, u: &GridField) -> GridField {
        let (start, end) = self.active_range();
        let mut masked = u.clone();
        for (i, v) in masked.values_mut().iter_mut().enumerate() {
            if i < start || i >= end {
                *v = 0.0;
            }
        }
        let mut out = apply_laplacian(&masked);
        for (i, v) in out.values_mut().iter_mut().enumerate() {
            if i < start || i >= end {
                *v = 0.0;
            } else {
                *v += self.local[i] * masked.values()[i];
            }
        }
        out
    }

    /// `⟨u, H v⟩ = h Σ u_i (H v)_i`.
    pub fn form(&self, u: &GridField, v: &GridField) -> f64 {
        u.dot(&self.apply(v))
    }

    /// Matrix on the active nodes, with the embedding back into the grid.
    pub fn reduce(&self) -> ReducedHamiltonian {
        let (start, end) = self.active_range();
        let h2 = self.grid.spacing().powi(2);
        let diag = self.local[start..end]
            .iter()
            .map(|w| 2.0 / h2 + w)
            .collect();
        let off = vec![-1.0 / h2; end - start - 1];
        ReducedHamiltonian {
            grid: self.grid,
            matrix: SymTridiagonal::new(diag, off),
            lift: Lift::Range { start },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// How reduced coordinates map back to grid values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lift {
    /// Contiguous active block starting at this node.
    Range { start: usize },
    /// Nodes `x >= 0`; node 0 carries weight 1 and the others `√2`, so the
    /// sector matrix is symmetric and its Euclidean norm is the grid norm.
    Even,
    /// Nodes `x > 0` with the same `√2` weighting.
    Odd,
}

/// Symmetric tridiagonal matrix acting on a subspace of grid fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedHamiltonian {
    grid: Grid,
    matrix: SymTridiagonal,
    lift: Lift,
}

impl ReducedHamiltonian {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    pub fn lift_kind(&self) -> Lift {
        self.lift
    }

    pub fn parity(&self) -> Option<Parity> {
        match self.lift {
            Lift::Range { .. } => None,
            Lift::Even => Some(Parity::Even),
            Lift::Odd => Some(Parity::Odd),
        }
    }

    /// Grid field for reduced coordinates `coeffs` whose Euclidean norm is 1;
    /// the result has unit grid mass.
    pub fn lift(&self, coeffs: &[f64]) -> GridField {
        let n = self.grid.n_points();
        let m = self.grid.center();
        let scale = 1.0 / self.grid.spacing().sqrt();
        let mut values = vec![0.0; n];
        match self.lift {
            Lift::Range { start } => {
                for (k, c) in coeffs.iter().enumerate() {
                    values[start + k] = c * scale;
                }
            }
            Lift::Even => {
                values[m] = coeffs[0] * scale;
                for (k, c) in coeffs.iter().enumerate().skip(1) {
                    let v = c * scale / SQRT_2;
                    values[m + k] = v;
                    values[m - k] = v;
                }
            }
            Lift::Odd => {
                for (k, c) in coeffs.iter().enumerate() {
                    let v = c * scale / SQRT_2;
                    values[m + k + 1] = v;
                    values[m - k - 1] = -v;
                }
            }
        }
        GridField::new(self.grid, values)
    }
}

/// Folds a box Hamiltonian with reflection-invariant potential onto the half
/// grid `x >= 0`: Neumann-type fold for the even sector, Dirichlet at `x = 0`
/// for the odd one. The sector spectra are exactly the even/odd parts of the
/// full discrete spectrum.
pub fn parity_restrict(h: &DiscreteHamiltonian, parity: Parity) -> Result<ReducedHamiltonian> {
    if h.boundary != Boundary::Box {
        return Err(Error::ParitySplitUnavailable(
            "parity folding needs the box boundary".into(),
        ));
    }
    let local = h.local_part();
    let scale = local.max_abs().max(1.0);
    let max_deviation = local.asymmetry();
    if max_deviation > 1e-12 * scale {
        return Err(Error::PotentialNotSymmetric { max_deviation });
    }
    let m = h.grid.center();
    let n = h.grid.n_points();
    let h2 = h.grid.spacing().powi(2);
    let (matrix, lift) = match parity {
        Parity::Even => {
            let diag: Vec<f64> = (m..n).map(|i| 2.0 / h2 + h.local[i]).collect();
            let mut off = vec![-1.0 / h2; n - m - 1];
            off[0] = -SQRT_2 / h2;
            (SymTridiagonal::new(diag, off), Lift::Even)
        }
        Parity::Odd => {
            let diag: Vec<f64> = (m + 1..n).map(|i| 2.0 / h2 + h.local[i]).collect();
            let off = vec![-1.0 / h2; n - m - 2];
            (SymTridiagonal::new(diag, off), Lift::Odd)
        }
    };
    Ok(ReducedHamiltonian {
        grid: h.grid,
        matrix,
        lift,
    })
}
