//! Run configuration: defaults, TOML file overlay and `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hartree::ScfOptions;
use crate::model::GridOptions;
use crate::spectrum::{EigenMethod, EigenOptions, SummaryMethod};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Well exponent.
    pub s: f64,
    /// Separation for single-instance runs.
    #[serde(rename = "L")]
    pub separation: f64,
    /// Separations visited by a sweep, strictly increasing.
    #[serde(rename = "L_list")]
    pub separations: Vec<f64>,
    /// Coupling for single-instance runs.
    pub lambda: f64,
    /// Couplings visited by a sweep.
    pub lambda_list: Vec<f64>,
    pub kernel: KernelConfig,
    pub grid: GridConfig,
    pub scf: ScfConfig,
    pub eig: EigConfig,
    pub dirichlet: DirichletConfig,
    pub agmon: AgmonConfig,
    pub quasi: QuasiConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            s: 2.0,
            separation: 6.0,
            separations: vec![4.0, 4.75, 5.5, 6.25, 7.0],
            lambda: 0.2,
            lambda_list: vec![0.0, 0.2],
            kernel: KernelConfig::default(),
            grid: GridConfig::default(),
            scf: ScfConfig::default(),
            eig: EigConfig::default(),
            dirichlet: DirichletConfig::default(),
            agmon: AgmonConfig::default(),
            quasi: QuasiConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub radius: f64,
    pub height: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            radius: 0.5,
            height: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    pub trunc_tol: f64,
    pub max_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let d = GridOptions::default();
        Self {
            h: d.spacing,
            trunc_tol: d.trunc_tol,
            max_points: d.max_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScfConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScfConfig {
    fn default() -> Self {
        let d = ScfOptions::default();
        Self {
            damping: d.damping,
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigConfig {
    /// Number of levels resolved by `solve`.
    pub k: usize,
    pub method: EigenMethod,
    pub tol: f64,
    /// Where reported eigenvalues come from.
    pub summary: SummaryMethod,
}

impl Default for EigConfig {
    fn default() -> Self {
        Self {
            k: 3,
            method: EigenMethod::Dense,
            tol: 1e-10,
            summary: SummaryMethod::ParitySplit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirichletConfig {
    pub c: f64,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        Self { c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgmonConfig {
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl Default for AgmonConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasiConfig {
    pub c: f64,
    /// Re-run the quasi-mode measurements at c = 0.5, 1 and 2.
    pub sensitivity: bool,
}

impl Default for QuasiConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            sensitivity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Fits ignore values below this multiple of `eig.tol`.
    pub noise_floor_factor: f64,
    pub gap2_floor: f64,
    /// Strip half-width for the tunneling-term table.
    #[serde(rename = "terms_R")]
    pub term_radius: f64,
    /// Separation of the paired-levels check.
    #[serde(rename = "pairs_L")]
    pub pairs_separation: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            noise_floor_factor: 100.0,
            gap2_floor: 1.0,
            term_radius: 1.0,
            pairs_separation: 7.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("dwell-out"),
        }
    }
}

impl RunConfig {
    pub fn grid_options(&self) -> GridOptions {
        GridOptions {
            spacing: self.grid.h,
            trunc_tol: self.grid.trunc_tol,
            max_points: self.grid.max_points,
        }
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            method: self.eig.method,
            tol: self.eig.tol,
            ..EigenOptions::default()
        }
    }

    pub fn scf_options(&self) -> ScfOptions {
        ScfOptions {
            damping: self.scf.damping,
            tol: self.scf.tol,
            max_iter: self.scf.max_iter,
            eig: self.eigen_options(),
        }
    }

    pub fn noise_floor(&self) -> f64 {
        self.sweep.noise_floor_factor * self.eig.tol
    }

    /// TOML echo of every key.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Parses a TOML document overlaid on the defaults.
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let value: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::ConfigParse {
                path: origin.to_path_buf(),
                message: e.message().to_string(),
            })?;
        Self::from_table(value)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        check_keys(&table, &default_table(), "")?;
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::TypeMismatch {
                key: "<config>".into(),
                message: e.message().to_string(),
            })
    }
}

fn default_table() -> toml::Table {
    toml::Table::try_from(RunConfig::default()).expect("defaults serialize to a table")
}

/// Walks `table` against the default layout, naming the first unknown key
/// or the first value whose TOML type differs from the default's.
fn check_keys(table: &toml::Table, reference: &toml::Table, prefix: &str) -> Result<()> {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        let Some(expected) = reference.get(key) else {
            return Err(Error::UnknownKey(path));
        };
        match (value, expected) {
            (toml::Value::Table(inner), toml::Value::Table(inner_ref)) => {
                check_keys(inner, inner_ref, &path)?
            }
            (v, e) if compatible(v, e) => {}
            (v, e) => {
                return Err(Error::TypeMismatch {
                    key: path,
                    message: format!("expected {}, found {}", e.type_str(), v.type_str()),
                })
            }
        }
    }
    Ok(())
}

fn compatible(value: &toml::Value, expected: &toml::Value) -> bool {
    use toml::Value::*;
    match (value, expected) {
        (Integer(_), Float(_)) => true,
        (Array(items), Array(_)) => items.iter().all(|v| matches!(v, Integer(_) | Float(_))),
        (v, e) => v.type_str() == e.type_str(),
    }
}

/// Parses the right-hand side of an override the way TOML would, falling back
/// to a bare string.
fn parse_override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::TypeMismatch {
            key: assignment.to_string(),
            message: "override must look like key=value".into(),
        })?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| Error::TypeMismatch {
            key: key.to_string(),
            message: format!("`{part}` is not a section"),
        })?;
    }
    node.insert(
        parts[parts.len() - 1].to_string(),
        parse_override_value(raw.trim()),
    );
    Ok(())
}

/// Defaults, then the file (if given), then each `key=value` override.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    parse_config_over(&RunConfig::default(), path, overrides)
}

/// Like [`parse_config`], but layers the file and overrides on top of `base`
/// instead of the built-in defaults.
pub fn parse_config_over(
    base: &RunConfig,
    path: Option<&Path>,
    overrides: &[String],
) -> Result<RunConfig> {
    let mut table = match path {
        Some(p) => {
            if !p.exists() {
                return Err(Error::MissingFile(p.to_path_buf()));
            }
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            text.parse::<toml::Table>()
                .map_err(|e| Error::ConfigParse {
                    path: p.to_path_buf(),
                    message: e.message().to_string(),
                })?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    check_keys(&table, &default_table(), "")?;
    let mut merged = toml::Table::try_from(base).expect("config serializes");
    merge_into(&mut merged, table);
    RunConfig::from_table(merged)
}

fn merge_into(dst: &mut toml::Table, src: toml::Table) {
    for (key, value) in src {
        match (dst.get_mut(&key), value) {
            (Some(toml::Value::Table(d)), toml::Value::Table(s)) => merge_into(d, s),
            (_, v) => {
                dst.insert(key, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn empty_file_gives_defaults() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"").unwrap();
        assert_eq!(
            parse_config(Some(f.path()), &[]).unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn overrides_beat_file_values() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "lambda = 0.5\n[grid]\nh = 0.05").unwrap();
        let c = parse_config(
            Some(f.path()),
            &["lambda=0.2".into(), "eig.method=\"both\"".into()],
        )
        .unwrap();
        assert_eq!(c.lambda, 0.2);
        assert_eq!(c.grid.h, 0.05);
        assert_eq!(c.eig.method, EigenMethod::Both);
        let bare = parse_config(None, &["eig.method=iterative".into(), "L=5".into()]).unwrap();
        assert_eq!(bare.eig.method, EigenMethod::Iterative);
        assert_eq!(bare.separation, 5.0);
    }

    #[test]
    fn typos_and_type_errors_are_named() {
        match parse_config(None, &["lamda=0.2".into()]) {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "lamda"),
            other => panic!("{other:?}"),
        }
        match parse_config(None, &["grid.hh=0.1".into()]) {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "grid.hh"),
            other => panic!("{other:?}"),
        }
        match parse_config(None, &["scf.max_iter=\"many\"".into()]) {
            Err(Error::TypeMismatch { key, .. }) => assert_eq!(key, "scf.max_iter"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_config(Some(Path::new("/nonexistent/dwell.toml")), &[]),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.lambda = 0.35;
        c.separations = vec![4.0, 5.0];
        c.quasi.sensitivity = true;
        let back = RunConfig::from_toml_str(&c.to_toml(), Path::new("echo")).unwrap();
        assert_eq!(back, c);
    }
}
