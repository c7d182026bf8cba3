use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{
    fit_slope, QuasiSensitivity, SlopeFit, SweepRecord, SweepTable, TUNNELING_TERM_COLUMNS,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};

/// One pass/fail line of the threshold assessment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assessment {
    pub name: String,
    pub lambda: f64,
    pub passed: bool,
    pub detail: String,
}

/// Columns written as plot data.
pub fn plot_quantities() -> Vec<&'static str> {
    let mut q = vec![
        "mu_plus",
        "mu_minus",
        "mu_ex",
        "mu_D",
        "gap1",
        "gap2",
        "gap1_quotient",
        "l1_diff",
        "l2_diff",
        "linf_diff",
        "overlap_ll_rr",
        "overlap_psi",
        "residual_norm",
        "psi_defect",
        "norm_chi_uplus_ur",
        "envelope_C_upper",
        "envelope_c_lower",
        "mu_d_distance",
        "psi_norm_defect",
        "psi_r_residual",
        "psi_plus_error",
        "psi_minus_error",
        "dirichlet_band_decay",
    ];
    q.extend(TUNNELING_TERM_COLUMNS);
    q
}

/// Slope requirements: column, lower bound, optional upper bound, minimum r².
const SLOPE_RULES: &[(&str, &str, f64, Option<f64>, f64)] = &[
    ("first gap", "gap1", 0.8, Some(1.2), 0.99),
    (
        "eigenvector density L1 distance",
        "l1_diff",
        0.8,
        None,
        0.95,
    ),
    (
        "eigenvector modulus L2 distance",
        "l2_diff",
        0.35,
        Some(0.65),
        0.95,
    ),
    (
        "eigenvector modulus Linf distance",
        "linf_diff",
        0.35,
        None,
        0.95,
    ),
    ("two-mode localization", "norm_chi_uplus_ur", 0.4, None, 0.0),
    ("quasi-mode residual", "residual_norm", 0.8, None, 0.0),
    ("quasi-mode overlap", "overlap_psi", 0.8, None, 0.0),
    ("quasi-mode norm defect", "psi_norm_defect", 1.5, None, 0.0),
    (
        "quasi-mode residual product",
        "psi_r_residual",
        1.5,
        None,
        0.0,
    ),
    ("projection defect", "psi_defect", 0.8, None, 0.0),
    ("symmetric two-mode error", "psi_plus_error", 0.8, None, 0.0),
    (
        "antisymmetric two-mode error",
        "psi_minus_error",
        0.8,
        None,
        0.0,
    ),
    ("Dirichlet proximity", "mu_d_distance", 0.8, None, 0.0),
];

fn ok_rows(records: &[SweepRecord]) -> impl Iterator<Item = &SweepRecord> {
    records.iter().filter(|r| r.is_ok())
}

fn slope_check(
    name: &str,
    records: &[SweepRecord],
    column: &str,
    lo: f64,
    hi: Option<f64>,
    r2: f64,
    floor: f64,
    lambda: f64,
) -> Assessment {
    let (passed, detail) = match fit_slope(records, column, floor) {
        Ok(f) => {
            let in_range = f.slope >= lo && hi.map_or(true, |h| f.slope <= h);
            let bound = match hi {
                Some(h) => format!("[{lo}, {h}]"),
                None => format!(">= {lo}"),
            };
            (
                in_range && f.r_squared >= r2,
                format!(
                    "{column}: slope {:.4} (need {bound}), r2 {:.5} (need >= {r2}), {} points",
                    f.slope,
                    f.r_squared,
                    f.points.len()
                ),
            )
        }
        Err(e) => (false, format!("{column}: {e}")),
    };
    Assessment {
        name: name.to_string(),
        lambda,
        passed,
        detail,
    }
}

fn variation(records: &[SweepRecord], f: impl Fn(&SweepRecord) -> f64) -> f64 {
    let vals: Vec<f64> = ok_rows(records).map(f).collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn simple(name: &str, lambda: f64, passed: bool, detail: String) -> Assessment {
    Assessment {
        name: name.to_string(),
        lambda,
        passed,
        detail,
    }
}

/// Threshold checks for one coupling.
pub fn assess(cfg: &RunConfig, table: &SweepTable) -> Vec<Assessment> {
    let lambda = table.lambda;
    let rows = &table.records;
    let floor = cfg.noise_floor();
    let mut out = Vec::new();

    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    out.push(simple(
        "all instances solved",
        lambda,
        failed == 0 && !rows.is_empty(),
        format!("{failed} of {} rows failed", rows.len()),
    ));

    for &(name, column, lo, hi, r2) in SLOPE_RULES {
        out.push(slope_check(name, rows, column, lo, hi, r2, floor, lambda));
    }

    let localization: Vec<f64> = ok_rows(rows).map(|r| r.norm_chi_uplus_ur).collect();
    let decreasing = localization.windows(2).all(|w| w[1] < w[0]);
    out.push(simple(
        "two-mode localization decreasing",
        lambda,
        decreasing && localization.len() >= 2,
        format!("norm_chi_uplus_ur strictly decreasing in L: {decreasing}"),
    ));

    let min_gap2 = ok_rows(rows).map(|r| r.gap2).fold(f64::INFINITY, f64::min);
    out.push(simple(
        "second gap floor",
        lambda,
        min_gap2 >= cfg.sweep.gap2_floor,
        format!("min gap2 {min_gap2:.6} (floor {})", cfg.sweep.gap2_floor),
    ));

    let positive = ok_rows(rows).all(|r| r.gap1 > 0.0 && r.gap2 > 0.0 && r.overlap_psi >= 0.0);
    out.push(simple(
        "positive gaps and quasi-mode overlaps",
        lambda,
        positive,
        "gap1 > 0, gap2 > 0 and <psi_r, psi_l> >= 0 on every row".into(),
    ));

    let upper = variation(rows, |r| r.envelope_c_upper);
    let lower = variation(rows, |r| r.envelope_c_lower);
    out.push(simple(
        "decay envelope stability",
        lambda,
        upper < 10.0 && lower < 10.0,
        format!("upper constant varies {upper:.3}x, lower constant {lower:.3}x"),
    ));

    let parity = ok_rows(rows)
        .map(|r| r.parity_error_plus.max(r.parity_error_minus))
        .fold(0.0, f64::max);
    let split = ok_rows(rows).all(|r| r.split_full_difference <= (1e-6 * r.gap1).max(1e-9));
    let quotient = ok_rows(rows)
        .filter(|r| r.gap1 > floor)
        .all(|r| (r.gap1_quotient - r.gap1).abs() <= 0.1 * r.gap1);
    out.push(simple(
        "parity and cross-method consistency",
        lambda,
        parity <= 1e-8 && split && quotient,
        format!("max parity error {parity:.3e}, split agreement {split}, quotient within 10% {quotient}"),
    ));

    let mut term_ok = true;
    let mut term_detail = Vec::new();
    for column in TUNNELING_TERM_COLUMNS {
        let values: Vec<f64> = ok_rows(rows).map(|r| r.quantity(column).unwrap()).collect();
        if values.iter().all(|v| *v == 0.0) {
            term_detail.push(format!("{column}: identically zero"));
            continue;
        }
        let nonneg = values.iter().all(|v| *v >= 0.0);
        match fit_slope(rows, column, floor) {
            Ok(f) => {
                term_ok &= nonneg && f.slope >= 0.8;
                term_detail.push(format!(
                    "{column}: slope {:.3}, nonnegative {nonneg}",
                    f.slope
                ));
            }
            Err(e) => {
                term_ok = false;
                term_detail.push(format!("{column}: {e}"));
            }
        }
    }
    out.push(simple(
        "tunneling terms",
        lambda,
        term_ok,
        term_detail.join("; "),
    ));

    match &table.pairs {
        Ok(p) => {
            let split = p.splittings.iter().copied().fold(0.0, f64::max);
            let gap = p
                .intergroup_gaps
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            out.push(simple(
                "paired levels",
                lambda,
                split < 1e-2 && gap > 1.5,
                format!("max intra-pair splitting {split:.3e}, inter-group gap {gap:.4}"),
            ));
        }
        Err(e) if e == NOT_RECOMPUTED => {}
        Err(e) => out.push(simple("paired levels", lambda, false, e.clone())),
    }
    out
}

pub(crate) const NOT_RECOMPUTED: &str = "not recomputed from CSV";

pub fn write_csv(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

#[derive(Serialize)]
struct FitEntry {
    quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_squared: Option<f64>,
    points_used: usize,
    rows_excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl FitEntry {
    fn from_result(quantity: &str, rows: usize, fit: &Result<SlopeFit>) -> Self {
        match fit {
            Ok(f) => FitEntry {
                quantity: quantity.to_string(),
                slope: Some(f.slope),
                intercept: Some(f.intercept),
                r_squared: Some(f.r_squared),
                points_used: f.points.len(),
                rows_excluded: f.rows_excluded,
                error: None,
            },
            Err(e) => FitEntry {
                quantity: quantity.to_string(),
                slope: None,
                intercept: None,
                r_squared: None,
                points_used: 0,
                rows_excluded: rows,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Serialize)]
struct PairsEntry {
    deviations: Vec<f64>,
    splittings: Vec<f64>,
    intergroup_gaps: Vec<f64>,
}

#[derive(Serialize)]
struct SweepSection {
    lambda: f64,
    rows: usize,
    failed_rows: usize,
    all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<PairsEntry>,
    fits: Vec<FitEntry>,
    checks: Vec<Assessment>,
}

#[derive(Serialize)]
struct Meta {
    generator: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    all_passed: bool,
    meta: Meta,
    config: &'a RunConfig,
    sweeps: Vec<SweepSection>,
}

/// Report text together with the assessment it encodes.
pub fn render_report(cfg: &RunConfig, tables: &[SweepTable]) -> (String, Vec<Assessment>) {
    let mut all = Vec::new();
    let mut sections = Vec::new();
    for t in tables {
        let checks = assess(cfg, t);
        let fits = plot_quantities()
            .into_iter()
            .map(|q| {
                FitEntry::from_result(
                    q,
                    t.records.len(),
                    &fit_slope(&t.records, q, cfg.noise_floor()),
                )
            })
            .collect();
        sections.push(SweepSection {
            lambda: t.lambda,
            rows: t.records.len(),
            failed_rows: t.records.iter().filter(|r| !r.is_ok()).count(),
            all_passed: checks.iter().all(|c| c.passed),
            pairs: t.pairs.as_ref().ok().map(|p| PairsEntry {
                deviations: p.deviations.clone(),
                splittings: p.splittings.clone(),
                intergroup_gaps: p.intergroup_gaps.clone(),
            }),
            fits,
            checks: checks.clone(),
        });
        all.extend(checks);
    }
    let doc = ReportDoc {
        all_passed: all.iter().all(|c| c.passed),
        meta: Meta {
            generator: "dwell",
            version: env!("CARGO_PKG_VERSION"),
        },
        config: cfg,
        sweeps: sections,
    };
    (toml::to_string(&doc).expect("report serializes"), all)
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub csv: Vec<PathBuf>,
    pub report: PathBuf,
    pub plots: Vec<PathBuf>,
    pub assessments: Vec<Assessment>,
}

pub fn lambda_tag(lambda: f64) -> String {
    format!("lambda_{lambda}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn plot_files(dir: &Path, table: &SweepTable) -> Result<Vec<PathBuf>> {
    let dir = dir.join("plots").join(lambda_tag(table.lambda));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut written = Vec::new();
    for q in plot_quantities() {
        let mut linear = String::from("# L value\n");
        let mut logs = String::from("# lnT ln|value|\n");
        for r in table.records.iter().filter(|r| r.is_ok()) {
            let v = r.quantity(q).unwrap();
            linear.push_str(&format!("{:.16e} {:.16e}\n", r.separation, v));
            if v.is_finite() && v != 0.0 {
                logs.push_str(&format!(
                    "{:.16e} {:.16e}\n",
                    r.tunneling.ln(),
                    v.abs().ln()
                ));
            }
        }
        let a = dir.join(format!("{q}_vs_L.dat"));
        let b = dir.join(format!("{q}_vs_lnT.dat"));
        write_text(&a, &linear)?;
        write_text(&b, &logs)?;
        written.push(a);
        written.push(b);
    }
    Ok(written)
}

/// Writes one CSV per coupling, the report and the plot data under `dir`.
pub fn emit_report(cfg: &RunConfig, tables: &[SweepTable], dir: &Path) -> Result<ReportFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut csv = Vec::new();
    let mut plots = Vec::new();
    for t in tables {
        let path = dir.join(format!("sweep_{}.csv", lambda_tag(t.lambda)));
        write_csv(&path, &t.records)?;
        csv.push(path);
        if !t.sensitivity.is_empty() {
            let path = dir.join(format!("quasi_sensitivity_{}.csv", lambda_tag(t.lambda)));
            write_rows::<QuasiSensitivity>(&path, &t.sensitivity)?;
            csv.push(path);
        }
        plots.extend(plot_files(dir, t)?);
    }
    let (text, assessments) = render_report(cfg, tables);
    let report = dir.join("report.toml");
    write_text(&report, &text)?;
    Ok(ReportFiles {
        csv,
        report,
        plots,
        assessments,
    })
}

/// Tables rebuilt from the CSV files of an earlier sweep.
pub fn tables_from_csv(cfg: &RunConfig, dir: &Path) -> Result<Vec<SweepTable>> {
    cfg.lambda_list
        .iter()
        .map(|&lambda| {
            let records = read_csv(&dir.join(format!("sweep_{}.csv", lambda_tag(lambda))))?;
            Ok(SweepTable {
                lambda,
                records,
                sensitivity: Vec::new(),
                pairs: Err(NOT_RECOMPUTED.to_string()),
            })
        })
        .collect()
}
