//! Nonlinear ground states of the Hartree functional.
//!
//! The minimizer is found by a damped self-consistent iteration on the
//! density: freeze `ρ_k`, take the linear ground state `φ` of
//! `-Δ + V + λ w * ρ_k`, and mix `ρ_{k+1} = (1 - α) ρ_k + α M |φ|²`. Because
//! the functional is convex in the density the mixed step is a descent
//! direction, so `α` is halved whenever a step would raise the energy.

use crate::error::{Error, Result};
use crate::model::{GridField, InteractionSpec, Problem, Well};
use crate::operators::{
    assemble_hamiltonian, kinetic_form, mean_field_term, parity_restrict, Boundary, Parity,
};
use crate::spectrum::{reduced_eigenpairs, EigenOptions, EigenPair};

/// Prescribed L² mass of a ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mass {
    /// Double-well states.
    One,
    /// Single-well states.
    Half,
}

impl Mass {
    pub fn value(self) -> f64 {
        match self {
            Mass::One => 1.0,
            Mass::Half => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub eig: EigenOptions,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 500,
            eig: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HartreeSolution {
    /// Phase-fixed, nonnegative minimizer at the prescribed mass.
    pub state: GridField,
    pub energy: f64,
    /// Lowest eigenvalue of the mean-field Hamiltonian built from `state`.
    pub chemical_potential: f64,
    pub iterations: usize,
    pub final_residual: f64,
    /// Energies of the accepted densities, in order.
    pub energy_trace: Vec<f64>,
}

/// `h Σ (w * |u|²) |u|²`, the double integral without the `λ/2`.
pub fn pair_interaction(u: &GridField, spec: &InteractionSpec) -> f64 {
    let rho = u.density();
    let unit = spec.with_lambda(1.0).expect("kernel already validated");
    mean_field_term(&rho, &unit).dot(&rho)
}

/// Hartree energy with the forward-difference kinetic term.
pub fn energy(u: &GridField, potential: &GridField, spec: &InteractionSpec) -> f64 {
    let rho = u.density();
    let mut e = kinetic_form(u) + potential.dot(&rho);
    if spec.lambda() != 0.0 {
        e += 0.5 * spec.lambda() * pair_interaction(u, spec);
    }
    e
}

/// Rayleigh quotient of `u` for `-Δ + V + λ w * |u|²`.
pub fn chemical_potential(u: &GridField, potential: &GridField, spec: &InteractionSpec) -> f64 {
    let mf = mean_field_term(&u.density(), spec);
    let h = assemble_hamiltonian(potential, &mf, Boundary::Box).expect("same grid");
    h.form(u, u) / u.mass()
}

/// Global sign flip making the mean positive; rejects states that still
/// carry a negative node value beyond -1e-10.
pub fn fix_phase(u: &GridField) -> Result<GridField> {
    let fixed = if u.integral() < 0.0 {
        u.scaled(-1.0)
    } else {
        u.clone()
    };
    let min = fixed.values().iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        return Err(Error::SignedState { value: min });
    }
    Ok(fixed)
}

/// Local minima of the sampled potential (first node of any tie).
fn well_bottoms(potential: &GridField) -> Vec<usize> {
    let v = potential.values();
    let n = v.len();
    let mut out: Vec<usize> = Vec::new();
    for i in 0..n {
        let left = if i > 0 { v[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { v[i + 1] } else { f64::INFINITY };
        if v[i] <= left && v[i] <= right && out.last().map_or(true, |&j| j + 1 != i) {
            out.push(i);
        }
    }
    out
}

/// Equal-mass Gaussian bumps at each well bottom.
fn initial_density(potential: &GridField, mass: f64) -> GridField {
    let grid = *potential.grid();
    let centers = well_bottoms(potential);
    let share = mass / centers.len().max(1) as f64;
    let mut rho = grid.zeros();
    for &c in &centers {
        let xc = grid.x(c);
        let bump = grid.sample(|x| (-(x - xc) * (x - xc) / 2.0).exp());
        let dens = bump.normalized_to(share).density();
        rho = rho.add(&dens);
    }
    rho
}

/// Lowest eigenpair of `-Δ + V + mf`, in the even sector when the operator is
/// reflection invariant.
fn linear_ground(
    potential: &GridField,
    mean_field: &GridField,
    eig: &EigenOptions,
) -> Result<EigenPair> {
    let h = assemble_hamiltonian(potential, mean_field, Boundary::Box)?;
    let reduced = if potential.asymmetry() == 0.0 && mean_field.asymmetry() == 0.0 {
        parity_restrict(&h, Parity::Even)?
    } else {
        h.reduce()
    };
    Ok(reduced_eigenpairs(&reduced, 1, eig)?.remove(0))
}

fn density_energy(rho: &GridField, potential: &GridField, spec: &InteractionSpec) -> f64 {
    energy(&rho.map(|r| r.max(0.0).sqrt()), potential, spec)
}

/// Damped SCF minimization of the Hartree functional at the given mass.
pub fn minimize(
    potential: &GridField,
    spec: &InteractionSpec,
    mass: Mass,
    opts: &ScfOptions,
) -> Result<HartreeSolution> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "scf damping must lie in (0, 1], got {}",
            opts.damping
        )));
    }
    let m = mass.value();
    let mut rho = initial_density(potential, m);
    let mut current = density_energy(&rho, potential, spec);
    let mut trace = vec![current];
    let mut residual = f64::INFINITY;

    for iteration in 1..=opts.max_iter {
        let mf = mean_field_term(&rho, spec);
        let phi = linear_ground(potential, &mf, &opts.eig)?;
        let u = fix_phase(&phi.vector.scaled(m.sqrt()))?;

        let own = assemble_hamiltonian(
            potential,
            &mean_field_term(&u.density(), spec),
            Boundary::Box,
        )?;
        let hu = own.apply(&u);
        let mu = u.dot(&hu) / u.mass();
        residual = hu.sub(&u.scaled(mu)).norm();

        if residual <= opts.tol {
            let fixed_point =
                linear_ground(potential, &mean_field_term(&u.density(), spec), &opts.eig)?;
            return Ok(HartreeSolution {
                energy: energy(&u, potential, spec),
                chemical_potential: fixed_point.value,
                state: u,
                iterations: iteration,
                final_residual: residual,
                energy_trace: trace,
            });
        }

        let target = u.density();
        let mut alpha = opts.damping;
        loop {
            let candidate = rho.zip_map(&target, |a, b| (1.0 - alpha) * a + alpha * b);
            if let Some((node, &value)) = candidate
                .values()
                .iter()
                .enumerate()
                .find(|(_, v)| **v < 0.0)
            {
                return Err(Error::NegativeDensity { node, value });
            }
            let e = density_energy(&candidate, potential, spec);
            if e <= current + 1e-12 {
                rho = candidate;
                current = e;
                trace.push(e);
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-8 {
                return Err(Error::EnergyIncrease {
                    iteration,
                    previous: current,
                    current: e,
                });
            }
        }
    }
    Err(Error::ScfNotConverged {
        iterations: opts.max_iter,
        residual,
    })
}

/// Double-well minimizer `u_+` at mass 1.
pub fn solve_double_well(problem: &Problem, opts: &ScfOptions) -> Result<HartreeSolution> {
    minimize(
        &problem.sample(Well::Double),
        &problem.interaction,
        Mass::One,
        opts,
    )
}

/// Left and right single-well minimizers at mass 1/2.
pub fn solve_single_wells(
    problem: &Problem,
    opts: &ScfOptions,
) -> Result<(HartreeSolution, HartreeSolution)> {
    let left = minimize(
        &problem.sample(Well::Left),
        &problem.interaction,
        Mass::Half,
        opts,
    )?;
    let right = minimize(
        &problem.sample(Well::Right),
        &problem.interaction,
        Mass::Half,
        opts,
    )?;
    Ok((left, right))
}
