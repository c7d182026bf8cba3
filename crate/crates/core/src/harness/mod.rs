//! Sweeps over the well separation and the measurements taken per instance.

mod fit;
mod report;

pub use fit::{fit_slope, fit_values, SlopeFit};
pub use report::{
    assess, emit_report, lambda_tag, plot_quantities, read_csv, render_report, tables_from_csv,
    write_csv, Assessment, ReportFiles,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agmon::{check_lower_envelope, check_upper_envelope, AgmonGeometry};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hartree::{solve_double_well, solve_single_wells, HartreeSolution};
use crate::model::{GridField, InteractionSpec, PotentialSpec, Problem, Well};
use crate::operators::{assemble_hamiltonian, mean_field_term, Boundary, Side};
use crate::quasimodes::{
    build_cutoffs, build_quasimodes, dirichlet_band_decay, pair_difference_norms,
    projection_defect, two_mode_localization, two_mode_states,
};
use crate::spectrum::{
    dirichlet_ground, gap_via_quotient, lowest_eigenpairs, spectral_summary,
    split_agreement_tolerance, SpectralSummary, QUOTIENT_FLOOR,
};

/// One row of a sweep. The leading columns are the headline quantities; the
/// rest are auxiliary measurements, followed by the row status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "L")]
    pub separation: f64,
    #[serde(rename = "T")]
    pub tunneling: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub mu_ex: f64,
    #[serde(rename = "mu_D")]
    pub mu_d: f64,
    pub gap1: f64,
    pub gap2: f64,
    pub gap1_quotient: f64,
    pub l1_diff: f64,
    pub l2_diff: f64,
    pub linf_diff: f64,
    pub overlap_ll_rr: f64,
    pub overlap_psi: f64,
    pub residual_norm: f64,
    pub psi_defect: f64,
    pub norm_chi_uplus_ur: f64,
    #[serde(rename = "envelope_C_upper")]
    pub envelope_c_upper: f64,
    pub envelope_c_lower: f64,
    pub scf_iters: f64,

    pub lambda: f64,
    /// `|μ_+ - μ^(D)|`.
    pub mu_d_distance: f64,
    /// `|∥ψ_r∥² - 1|`.
    pub psi_norm_defect: f64,
    /// `|⟨ψ_r, r_r⟩|`.
    pub psi_r_residual: f64,
    pub psi_plus_error: f64,
    pub psi_minus_error: f64,
    pub norm_sum: f64,
    pub norm_difference: f64,
    pub residual_mass_outside_band: f64,
    pub dirichlet_band_decay: f64,
    pub half_space_right: f64,
    pub half_space_left: f64,
    pub parity_error_plus: f64,
    pub parity_error_minus: f64,
    /// Largest `|split - full|` over the three levels.
    pub split_full_difference: f64,
    pub quotient_excluded: f64,
    pub mu_single: f64,
    pub pair_deviation: f64,
    pub pair_splitting_excited: f64,
    pub intergroup_gap: f64,
    pub term_scalar_product: f64,
    pub term_strip_plus: f64,
    pub term_strip_minus: f64,
    pub term_gradient_product: f64,
    pub term_potential_product: f64,
    pub term_tail_left: f64,
    pub term_strip_potential_plus: f64,
    pub term_strip_potential_minus: f64,
    pub term_tail_potential_left: f64,
    pub term_strip_mean_field: f64,
    pub term_kernel_two_sides: f64,
    /// `ok`, or `failed: <reason>` with every measurement set to NaN.
    pub status: String,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(separation: f64, tunneling: f64, lambda: f64, reason: &str) -> Self {
        let nan = f64::NAN;
        SweepRecord {
            separation,
            tunneling,
            mu_plus: nan,
            mu_minus: nan,
            mu_ex: nan,
            mu_d: nan,
            gap1: nan,
            gap2: nan,
            gap1_quotient: nan,
            l1_diff: nan,
            l2_diff: nan,
            linf_diff: nan,
            overlap_ll_rr: nan,
            overlap_psi: nan,
            residual_norm: nan,
            psi_defect: nan,
            norm_chi_uplus_ur: nan,
            envelope_c_upper: nan,
            envelope_c_lower: nan,
            scf_iters: nan,
            lambda,
            mu_d_distance: nan,
            psi_norm_defect: nan,
            psi_r_residual: nan,
            psi_plus_error: nan,
            psi_minus_error: nan,
            norm_sum: nan,
            norm_difference: nan,
            residual_mass_outside_band: nan,
            dirichlet_band_decay: nan,
            half_space_right: nan,
            half_space_left: nan,
            parity_error_plus: nan,
            parity_error_minus: nan,
            split_full_difference: nan,
            quotient_excluded: nan,
            mu_single: nan,
            pair_deviation: nan,
            pair_splitting_excited: nan,
            intergroup_gap: nan,
            term_scalar_product: nan,
            term_strip_plus: nan,
            term_strip_minus: nan,
            term_gradient_product: nan,
            term_potential_product: nan,
            term_tail_left: nan,
            term_strip_potential_plus: nan,
            term_strip_potential_minus: nan,
            term_tail_potential_left: nan,
            term_strip_mean_field: nan,
            term_kernel_two_sides: nan,
            status: format!("failed: {reason}"),
        }
    }

    /// Value of a numeric column by its CSV name.
    pub fn quantity(&self, name: &str) -> Option<f64> {
        let v = match name {
            "L" => self.separation,
            "T" => self.tunneling,
            "mu_plus" => self.mu_plus,
            "mu_minus" => self.mu_minus,
            "mu_ex" => self.mu_ex,
            "mu_D" => self.mu_d,
            "gap1" => self.gap1,
            "gap2" => self.gap2,
            "gap1_quotient" => self.gap1_quotient,
            "l1_diff" => self.l1_diff,
            "l2_diff" => self.l2_diff,
            "linf_diff" => self.linf_diff,
            "overlap_ll_rr" => self.overlap_ll_rr,
            "overlap_psi" => self.overlap_psi,
            "residual_norm" => self.residual_norm,
            "psi_defect" => self.psi_defect,
            "norm_chi_uplus_ur" => self.norm_chi_uplus_ur,
            "envelope_C_upper" => self.envelope_c_upper,
            "envelope_c_lower" => self.envelope_c_lower,
            "scf_iters" => self.scf_iters,
            "lambda" => self.lambda,
            "mu_d_distance" => self.mu_d_distance,
            "psi_norm_defect" => self.psi_norm_defect,
            "psi_r_residual" => self.psi_r_residual,
            "psi_plus_error" => self.psi_plus_error,
            "psi_minus_error" => self.psi_minus_error,
            "norm_sum" => self.norm_sum,
            "norm_difference" => self.norm_difference,
            "residual_mass_outside_band" => self.residual_mass_outside_band,
            "dirichlet_band_decay" => self.dirichlet_band_decay,
            "half_space_right" => self.half_space_right,
            "half_space_left" => self.half_space_left,
            "parity_error_plus" => self.parity_error_plus,
            "parity_error_minus" => self.parity_error_minus,
            "split_full_difference" => self.split_full_difference,
            "quotient_excluded" => self.quotient_excluded,
            "mu_single" => self.mu_single,
            "pair_deviation" => self.pair_deviation,
            "pair_splitting_excited" => self.pair_splitting_excited,
            "intergroup_gap" => self.intergroup_gap,
            "term_scalar_product" => self.term_scalar_product,
            "term_strip_plus" => self.term_strip_plus,
            "term_strip_minus" => self.term_strip_minus,
            "term_gradient_product" => self.term_gradient_product,
            "term_potential_product" => self.term_potential_product,
            "term_tail_left" => self.term_tail_left,
            "term_strip_potential_plus" => self.term_strip_potential_plus,
            "term_strip_potential_minus" => self.term_strip_potential_minus,
            "term_tail_potential_left" => self.term_tail_potential_left,
            "term_strip_mean_field" => self.term_strip_mean_field,
            "term_kernel_two_sides" => self.term_kernel_two_sides,
            _ => return None,
        };
        Some(v)
    }
}

/// Names of the tunneling-term columns.
pub const TUNNELING_TERM_COLUMNS: [&str; 11] = [
    "term_scalar_product",
    "term_strip_plus",
    "term_strip_minus",
    "term_gradient_product",
    "term_potential_product",
    "term_tail_left",
    "term_strip_potential_plus",
    "term_strip_potential_minus",
    "term_tail_potential_left",
    "term_strip_mean_field",
    "term_kernel_two_sides",
];

/// Overlap integrals between the single-well states and the double-well
/// eigenvectors that control the tunneling corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunnelingTerms {
    /// `∫ u_ℓ u_r`.
    pub scalar_product: f64,
    /// `∫_{|x|≤R} |u_+|²` and `∫_{|x|≤R} |u_-|²`.
    pub strip_plus: f64,
    pub strip_minus: f64,
    /// `∫ ∇u_ℓ · ∇u_r`, signed.
    pub gradient_product: f64,
    /// `∫ V_DW u_ℓ u_r`.
    pub potential_product: f64,
    /// `∫_{x≥-R} |u_ℓ|²`.
    pub tail_left: f64,
    /// `∫_{|x|≤R} |u_±|² (V_r - V_DW)`.
    pub strip_potential_plus: f64,
    pub strip_potential_minus: f64,
    /// `∫_{x≥-R} V_r |u_ℓ|²`.
    pub tail_potential_left: f64,
    /// `∫_{|x|≤R} |u_+|² λ w * |u_+|²`.
    pub strip_mean_field: f64,
    /// `∬ w(x-y) |u_ℓ(x)|² |u_r(y)|²`.
    pub kernel_two_sides: f64,
}

fn forward_difference_product(a: &GridField, b: &GridField) -> f64 {
    let h = a.grid().spacing();
    let (u, v) = (a.values(), b.values());
    let n = u.len();
    // ghost edges at both walls included, as in the kinetic form
    let mut sum = u[0] * v[0] + u[n - 1] * v[n - 1];
    for i in 0..n - 1 {
        sum += (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
    }
    sum / h
}

/// Tunneling-term table for one instance; `r` is the strip half-width.
pub fn tunneling_terms(
    u_l: &GridField,
    u_r: &GridField,
    summary: &SpectralSummary,
    potential: &PotentialSpec,
    interaction: &InteractionSpec,
    r: f64,
) -> TunnelingTerms {
    let grid = *u_l.grid();
    let strip = |x: f64| x.abs() <= r + 1e-9;
    let tail = |x: f64| x >= -r - 1e-9;
    let v_dw = grid.sample(|x| potential.double(x));
    let v_r = grid.sample(|x| potential.right(x));
    let excess = v_r.sub(&v_dw);
    let dens_plus = summary.u_plus.density();
    let dens_minus = summary.u_minus.density();
    let dens_l = u_l.density();
    let lr = u_l.mul(u_r);
    let unit_kernel = interaction.with_lambda(1.0).expect("validated kernel");
    TunnelingTerms {
        scalar_product: lr.integral(),
        strip_plus: dens_plus.integral_where(strip),
        strip_minus: dens_minus.integral_where(strip),
        gradient_product: forward_difference_product(u_l, u_r),
        potential_product: v_dw.mul(&lr).integral(),
        tail_left: dens_l.integral_where(tail),
        strip_potential_plus: dens_plus.mul(&excess).integral_where(strip),
        strip_potential_minus: dens_minus.mul(&excess).integral_where(strip),
        tail_potential_left: v_r.mul(&dens_l).integral_where(tail),
        strip_mean_field: dens_plus
            .mul(&mean_field_term(&dens_plus, interaction))
            .integral_where(strip),
        kernel_two_sides: mean_field_term(&u_r.density(), &unit_kernel).dot(&dens_l),
    }
}

/// Level-grouping diagnostics for the lowest double-well eigenvalues against
/// the single-well ones.
#[derive(Debug, Clone, PartialEq)]
pub struct HigherPairs {
    /// Per single-well level: largest `|μ - μ_j^ℓ|` over its pair.
    pub deviations: Vec<f64>,
    /// Per pair: upper minus lower member.
    pub splittings: Vec<f64>,
    /// Gaps between consecutive pairs.
    pub intergroup_gaps: Vec<f64>,
}

/// Matches consecutive double-well values pairwise to single-well values.
pub fn higher_pairs_check(double_values: &[f64], single_values: &[f64]) -> Result<HigherPairs> {
    if double_values.len() < 4 || double_values.len() != 2 * single_values.len() {
        return Err(Error::WindowMismatch(format!(
            "{} double-well values against {} single-well values",
            double_values.len(),
            single_values.len()
        )));
    }
    let mut out = HigherPairs {
        deviations: Vec::new(),
        splittings: Vec::new(),
        intergroup_gaps: Vec::new(),
    };
    for (j, &mu) in single_values.iter().enumerate() {
        let (a, b) = (double_values[2 * j], double_values[2 * j + 1]);
        out.deviations.push((a - mu).abs().max((b - mu).abs()));
        out.splittings.push(b - a);
        if 2 * j + 2 < double_values.len() {
            out.intergroup_gaps.push(double_values[2 * j + 2] - b);
        }
    }
    Ok(out)
}

/// Lowest `2·pairs` levels of `h_DW` and lowest `pairs` levels of the
/// right single-well Hamiltonian.
pub fn paired_levels(
    problem: &Problem,
    dw: &HartreeSolution,
    right: &HartreeSolution,
    pairs: usize,
    cfg: &RunConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let opts = cfg.eigen_options();
    let h_dw = crate::spectrum::double_well_hamiltonian(problem, dw)?;
    let mf_r = mean_field_term(&right.state.density(), &problem.interaction);
    let h_r = assemble_hamiltonian(&problem.sample(Well::Right), &mf_r, Boundary::Box)?;
    let double: Vec<f64> = lowest_eigenpairs(&h_dw, 2 * pairs, &opts)?
        .iter()
        .map(|p| p.value)
        .collect();
    let single: Vec<f64> = lowest_eigenpairs(&h_r, pairs, &opts)?
        .iter()
        .map(|p| p.value)
        .collect();
    Ok((double, single))
}

/// Problem for one `(L, λ)` instance under `cfg`.
pub fn build_problem(cfg: &RunConfig, separation: f64, lambda: f64) -> Result<Problem> {
    Problem::new(
        PotentialSpec::new(cfg.s, separation)?,
        InteractionSpec::new(lambda, cfg.kernel.radius, cfg.kernel.height)?,
        &cfg.grid_options(),
    )
}

/// Quasi-mode scalars at one cutoff distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiSensitivity {
    #[serde(rename = "L")]
    pub separation: f64,
    pub c: f64,
    pub residual_norm: f64,
    pub overlap_psi: f64,
    pub psi_defect: f64,
    pub status: String,
}

/// Everything measured on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceResult {
    pub record: SweepRecord,
    pub sensitivity: Vec<QuasiSensitivity>,
}

fn quasi_scalars(
    problem: &Problem,
    summary: &SpectralSummary,
    c: f64,
    cfg: &RunConfig,
) -> Result<(crate::quasimodes::QuasiModeSet, f64)> {
    let opts = cfg.eigen_options();
    let h = &summary.hamiltonian;
    let dr = dirichlet_ground(h, problem, c, Side::Right, &opts)?;
    let dl = dirichlet_ground(h, problem, c, Side::Left, &opts)?;
    let cut = build_cutoffs(&problem.grid, problem.potential.separation(), c)?;
    let qm = build_quasimodes(h, &dr, &dl, &cut)?;
    let defect = projection_defect(&qm.psi_r, summary);
    Ok((qm, defect))
}

/// Runs every measurement on one `(L, λ)` instance.
pub fn measure_instance(cfg: &RunConfig, separation: f64, lambda: f64) -> Result<InstanceResult> {
    let problem = build_problem(cfg, separation, lambda)?;
    let geom = AgmonGeometry::from_potential(&problem.potential);
    let opts = cfg.eigen_options();
    let scf = cfg.scf_options();

    let dw = solve_double_well(&problem, &scf)?;
    let summary = spectral_summary(&problem, &dw, cfg.eig.summary, &opts)?;
    let (left, right) = solve_single_wells(&problem, &scf)?;

    let h = &summary.hamiltonian;
    let d_right = dirichlet_ground(h, &problem, cfg.dirichlet.c, Side::Right, &opts)?;

    let (qm, psi_defect) = quasi_scalars(&problem, &summary, cfg.quasi.c, cfg)?;
    let modes = two_mode_states(&qm)?;
    let band_decay = dirichlet_band_decay(&qm.dirichlet_r, &geom, &qm.cutoffs, cfg.agmon.epsilon);

    let norms = pair_difference_norms(&summary.u_plus, &summary.u_minus);
    let window = Some(-0.5 * cfg.grid.trunc_tol.ln());
    let upper = check_upper_envelope(
        &summary.u_plus,
        &geom,
        cfg.agmon.epsilon,
        cfg.agmon.radius,
        window,
    )?;
    let lower = check_lower_envelope(
        &summary.u_plus,
        &geom,
        summary.mu_plus,
        cfg.agmon.epsilon,
        cfg.agmon.radius,
        window,
    )?;
    let quotient = gap_via_quotient(&summary.u_plus, &summary.u_minus, QUOTIENT_FLOOR);
    let terms = tunneling_terms(
        &left.state,
        &right.state,
        &summary,
        &problem.potential,
        &problem.interaction,
        cfg.sweep.term_radius,
    );
    let (double, single) = paired_levels(&problem, &dw, &right, 2, cfg)?;
    let pairs = higher_pairs_check(&double, &single)?;

    let split = [summary.mu_plus, summary.mu_minus, summary.mu_ex];
    let split_full_difference = split
        .iter()
        .zip(summary.full_values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    debug_assert!(split_full_difference <= split_agreement_tolerance(summary.gap1));

    let record = SweepRecord {
        separation,
        tunneling: geom.tunneling(),
        mu_plus: summary.mu_plus,
        mu_minus: summary.mu_minus,
        mu_ex: summary.mu_ex,
        mu_d: d_right.value,
        gap1: summary.gap1,
        gap2: summary.gap2,
        gap1_quotient: quotient.value,
        l1_diff: norms.l1_density,
        l2_diff: norms.l2_modulus,
        linf_diff: norms.linf_modulus,
        overlap_ll_rr: left.state.dot(&right.state),
        overlap_psi: qm.overlap_psi,
        residual_norm: qm.residual_norm,
        psi_defect,
        norm_chi_uplus_ur: two_mode_localization(&summary.u_plus, &right.state),
        envelope_c_upper: upper.fitted_constant,
        envelope_c_lower: lower.fitted_constant,
        scf_iters: dw.iterations as f64,
        lambda,
        mu_d_distance: (summary.mu_plus - d_right.value).abs(),
        psi_norm_defect: qm.norm_defect.abs(),
        psi_r_residual: qm.psi_r_residual.abs(),
        psi_plus_error: modes.psi_plus.sub(&summary.u_plus).norm(),
        psi_minus_error: modes.psi_minus.sub(&summary.u_minus).norm(),
        norm_sum: modes.norm_sum,
        norm_difference: modes.norm_difference,
        residual_mass_outside_band: qm.residual_mass_outside_band,
        dirichlet_band_decay: band_decay,
        half_space_right: norms.half_space_right,
        half_space_left: norms.half_space_left,
        parity_error_plus: summary.u_plus.sub(&summary.u_plus.reflect()).norm(),
        parity_error_minus: summary.u_minus.add(&summary.u_minus.reflect()).norm(),
        split_full_difference,
        quotient_excluded: quotient.excluded as f64,
        mu_single: right.chemical_potential,
        pair_deviation: pairs.deviations.iter().copied().fold(0.0, f64::max),
        pair_splitting_excited: pairs.splittings[1],
        intergroup_gap: pairs.intergroup_gaps[0],
        term_scalar_product: terms.scalar_product,
        term_strip_plus: terms.strip_plus,
        term_strip_minus: terms.strip_minus,
        term_gradient_product: terms.gradient_product,
        term_potential_product: terms.potential_product,
        term_tail_left: terms.tail_left,
        term_strip_potential_plus: terms.strip_potential_plus,
        term_strip_potential_minus: terms.strip_potential_minus,
        term_tail_potential_left: terms.tail_potential_left,
        term_strip_mean_field: terms.strip_mean_field,
        term_kernel_two_sides: terms.kernel_two_sides,
        status: "ok".into(),
    };

    let mut sensitivity = Vec::new();
    if cfg.quasi.sensitivity {
        for c in [0.5, 1.0, 2.0] {
            let row = match quasi_scalars(&problem, &summary, c, cfg) {
                Ok((q, d)) => QuasiSensitivity {
                    separation,
                    c,
                    residual_norm: q.residual_norm,
                    overlap_psi: q.overlap_psi,
                    psi_defect: d,
                    status: "ok".into(),
                },
                Err(e) => QuasiSensitivity {
                    separation,
                    c,
                    residual_norm: f64::NAN,
                    overlap_psi: f64::NAN,
                    psi_defect: f64::NAN,
                    status: format!("failed: {e}"),
                },
            };
            sensitivity.push(row);
        }
    }
    Ok(InstanceResult {
        record,
        sensitivity,
    })
}

fn validate_separations(list: &[f64]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::NoInstances);
    }
    if list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NotIncreasing);
    }
    Ok(())
}

/// Sweep at one coupling. Instances run in parallel; a failing instance
/// yields a row marked as failed instead of aborting the sweep.
pub fn run_sweep_detailed(cfg: &RunConfig, lambda: f64) -> Result<Vec<InstanceResult>> {
    validate_separations(&cfg.separations)?;
    Ok(cfg
        .separations
        .par_iter()
        .map(|&l| {
            measure_instance(cfg, l, lambda).unwrap_or_else(|e| {
                log::warn!("instance L = {l}, lambda = {lambda} failed: {e}");
                InstanceResult {
                    record: SweepRecord::failed(
                        l,
                        AgmonGeometry::new(cfg.s, l).tunneling(),
                        lambda,
                        &e.to_string(),
                    ),
                    sensitivity: Vec::new(),
                }
            })
        })
        .collect())
}

/// Rows of a sweep at one coupling, in the order of `L_list`.
pub fn run_sweep(cfg: &RunConfig, lambda: f64) -> Result<Vec<SweepRecord>> {
    Ok(run_sweep_detailed(cfg, lambda)?
        .into_iter()
        .map(|r| r.record)
        .collect())
}

/// Sweep results for one coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub lambda: f64,
    pub records: Vec<SweepRecord>,
    pub sensitivity: Vec<QuasiSensitivity>,
    /// Paired-levels check at `sweep.pairs_L`.
    pub pairs: std::result::Result<HigherPairs, String>,
}

/// Paired-levels check at `sweep.pairs_L` for one coupling.
pub fn pairs_at(cfg: &RunConfig, lambda: f64) -> Result<HigherPairs> {
    let problem = build_problem(cfg, cfg.sweep.pairs_separation, lambda)?;
    let scf = cfg.scf_options();
    let dw = solve_double_well(&problem, &scf)?;
    let (_, right) = solve_single_wells(&problem, &scf)?;
    let (double, single) = paired_levels(&problem, &dw, &right, 2, cfg)?;
    higher_pairs_check(&double, &single)
}

/// Sweeps at every coupling of `lambda_list`.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<SweepTable>> {
    validate_separations(&cfg.separations)?;
    if cfg.lambda_list.is_empty() {
        return Err(Error::NoInstances);
    }
    cfg.lambda_list
        .iter()
        .map(|&lambda| {
            let detailed = run_sweep_detailed(cfg, lambda)?;
            let mut records = Vec::new();
            let mut sensitivity = Vec::new();
            for r in detailed {
                records.push(r.record);
                sensitivity.extend(r.sensitivity);
            }
            Ok(SweepTable {
                lambda,
                records,
                sensitivity,
                pairs: pairs_at(cfg, lambda).map_err(|e| e.to_string()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separations_are_validated() {
        let mut cfg = RunConfig::default();
        cfg.separations = vec![];
        assert!(matches!(run_sweep(&cfg, 0.0), Err(Error::NoInstances)));
        cfg.separations = vec![4.0, 5.0, 5.0];
        assert!(matches!(run_sweep(&cfg, 0.0), Err(Error::NotIncreasing)));
    }

    #[test]
    fn pairs_need_matching_windows() {
        assert!(matches!(
            higher_pairs_check(&[1.0, 1.0, 3.0], &[1.0, 3.0]),
            Err(Error::WindowMismatch(_))
        ));
        let p = higher_pairs_check(&[0.99, 1.01, 2.98, 3.03], &[1.0, 3.0]).unwrap();
        assert!((p.deviations[1] - 0.03).abs() < 1e-12);
        assert!((p.intergroup_gaps[0] - 1.97).abs() < 1e-12);
    }

    #[test]
    fn failing_instance_is_marked() {
        let mut cfg = RunConfig::default();
        cfg.separations = vec![2.0, 4.0];
        cfg.quasi.c = 1.0; // 3c ≥ L at L = 2
        let rows = run_sweep(&cfg, 0.0).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].status.starts_with("failed"));
        assert!(rows[0].gap1.is_nan());
        assert!(rows[1].is_ok());
    }
}
