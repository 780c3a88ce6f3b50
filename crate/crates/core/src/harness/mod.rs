//! Named, reproducible refinement experiments and their reports.
//!
//! A report holds one row per refinement level with the mesh size, the time
//! step, the measured quantities and the observed order of each quantity
//! between consecutive rows, together with the experiment's pass/fail
//! checks. Reports depend only on the configuration, so repeated runs write
//! byte-identical files.

mod experiments;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mac2d::EdgeDensity;

/// Experiments known to the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    TransportFd,
    TransportFvCounterexample,
    ShiftBound,
    HeatConvergence,
    Poincare,
    BurgersShock,
    WeakBv,
    Entropy,
    Tvd,
    MacLw,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::TransportFd,
        Experiment::TransportFvCounterexample,
        Experiment::ShiftBound,
        Experiment::HeatConvergence,
        Experiment::Poincare,
        Experiment::BurgersShock,
        Experiment::WeakBv,
        Experiment::Entropy,
        Experiment::Tvd,
        Experiment::MacLw,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::TransportFd => "transport-fd",
            Experiment::TransportFvCounterexample => "transport-fv-counterexample",
            Experiment::ShiftBound => "shift-bound",
            Experiment::HeatConvergence => "heat-convergence",
            Experiment::Poincare => "poincare",
            Experiment::BurgersShock => "burgers-shock",
            Experiment::WeakBv => "weak-bv",
            Experiment::Entropy => "entropy",
            Experiment::Tvd => "tvd",
            Experiment::MacLw => "mac-lw",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::TransportFd => "upwind transport, sup error refinement study",
            Experiment::TransportFvCounterexample => {
                "finite volume form on alternating meshes: residual stalls, error converges"
            }
            Experiment::ShiftBound => "finite volume run against finite differences on shifted points",
            Experiment::HeatConvergence => "implicit heat scheme: manufactured error, energy and Poincare bounds",
            Experiment::Poincare => "discrete Poincare ratio on random meshes and fields",
            Experiment::BurgersShock => "Burgers shock and fan against the exact solution",
            Experiment::WeakBv => "weak BV aggregate scaling for Burgers",
            Experiment::Entropy => "Kruzhkov entropy residuals with a broken-flux control",
            Experiment::Tvd => "total variation and invariant interval of monotone schemes",
            Experiment::MacLw => "Lax-Wendroff functional on MAC grids against the weak form",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.id() == id)
            .ok_or_else(|| Error::UnknownExperiment(id.to_string()))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFamily {
    Uniform,
    Alternating,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxChoice {
    Godunov,
    LaxFriedrichs,
}

/// Experiment configuration, read from a JSON document. Omitted fields take
/// the experiment's defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Refinement levels; each level halves the mesh size.
    pub levels: usize,
    pub mesh: Option<MeshFamily>,
    /// Cells per unit length (per direction on MAC grids) on the coarsest level.
    pub base_cells: Option<usize>,
    pub flux: FluxChoice,
    /// Safety factor on the stability limit of explicit schemes.
    pub cfl: f64,
    pub final_time: Option<f64>,
    /// Largest neighbouring cell-width ratio of random meshes.
    pub ratio_bound: f64,
    /// Heat runs use `dt = h^dt_exponent`.
    pub dt_exponent: f64,
    /// Random fields drawn per mesh for Poincare checks.
    pub samples: usize,
    pub edge_density: EdgeDensity,
    pub seed: u64,
    /// Report path; CSV is written here and the JSON summary next to it.
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: String::new(),
            levels: 4,
            mesh: None,
            base_cells: None,
            flux: FluxChoice::Godunov,
            cfl: 0.9,
            final_time: None,
            ratio_bound: 2.0,
            dt_exponent: 1.0,
            samples: 100,
            edge_density: EdgeDensity::Upwind,
            seed: 0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment: experiment.id().to_string(),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<Experiment> {
        let experiment = Experiment::from_id(&self.experiment)?;
        let invalid = |what: String| Err(Error::InvalidArgument(what));
        if self.levels < 3 {
            return invalid(format!(
                "at least 3 refinement levels are needed, got {}",
                self.levels
            ));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return invalid(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.ratio_bound >= 1.0) {
            return invalid(format!("ratio_bound must be >= 1, got {}", self.ratio_bound));
        }
        if !(self.dt_exponent > 0.0) {
            return invalid(format!("dt_exponent must be positive, got {}", self.dt_exponent));
        }
        if self.samples == 0 {
            return invalid("samples must be positive".into());
        }
        if self.base_cells == Some(0) {
            return invalid("base_cells must be positive".into());
        }
        if let Some(t) = self.final_time {
            if !(t > 0.0) {
                return invalid(format!("final_time must be positive, got {t}"));
            }
        }
        Ok(experiment)
    }

    /// SHA-256 of the canonical JSON form, output path excluded, as 16 hex digits.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig {
            output: None,
            ..self.clone()
        };
        let text = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }
}

/// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` for consecutive pairs.
pub fn observed_order(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need two or more matching entries, got {} errors and {} sizes",
            errors.len(),
            hs.len()
        )));
    }
    if let Some(bad) = errors.iter().chain(hs).find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "orders need positive entries, got {bad}"
        )));
    }
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub level: usize,
    pub h: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    /// Order of each column against the previous row; `None` on the first
    /// row and where a column is not positive.
    pub orders: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub config_hash: String,
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ConvergenceReport {
    fn new(experiment: Experiment, config: &ExperimentConfig, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.id().to_string(),
            config_hash: config.hash(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    fn push_row(&mut self, h: f64, dt: f64, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "row width");
        let orders = match self.rows.last() {
            None => vec![None; values.len()],
            Some(prev) => values
                .iter()
                .zip(&prev.values)
                .map(|(&v, &p)| {
                    observed_order(&[p, v], &[prev.h, h])
                        .ok()
                        .map(|o| o[0])
                        .filter(|o| o.is_finite())
                })
                .collect(),
        };
        self.rows.push(ReportRow {
            level: self.rows.len(),
            h,
            dt,
            values,
            orders,
        });
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r.values[c]).collect())
    }

    /// Orders of a column between consecutive rows.
    pub fn orders(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(self.rows.iter().skip(1).map(|r| r.orders[c]).collect())
    }

    pub fn hs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// CSV: `config_hash,level,h,dt,<columns>,order_<columns>`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "config_hash,level,h,dt")?;
        for c in &self.columns {
            write!(out, ",{c}")?;
        }
        for c in &self.columns {
            write!(out, ",order_{c}")?;
        }
        writeln!(out)?;
        for r in &self.rows {
            write!(out, "{},{},{},{}", self.config_hash, r.level, r.h, r.dt)?;
            for v in &r.values {
                write!(out, ",{v}")?;
            }
            for o in &r.orders {
                match o {
                    Some(o) => write!(out, ",{o}")?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii csv")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes the CSV to `path` and the JSON summary to `path` with a `.json`
    /// extension. Returns the summary path.
    pub fn write_to(&self, path: &Path) -> Result<PathBuf> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let summary = path.with_extension("json");
        if summary == path {
            return Err(Error::InvalidArgument(format!(
                "report path {} collides with its JSON summary",
                path.display()
            )));
        }
        fs::write(path, self.to_csv())?;
        fs::write(&summary, self.to_json()? + "\n")?;
        Ok(summary)
    }
}

/// Evaluates `f` for every level in parallel, keeping level order.
fn per_level<T, F>(levels: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..levels).into_par_iter().map(f).collect()
}

/// Runs the configured experiment and, when `config.output` is set, writes
/// the report there.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let experiment = config.validate()?;
    let report = match experiment {
        Experiment::TransportFd => experiments::transport_fd(config),
        Experiment::TransportFvCounterexample => experiments::transport_fv_counterexample(config),
        Experiment::ShiftBound => experiments::shift_bound(config),
        Experiment::HeatConvergence => experiments::heat_convergence(config),
        Experiment::Poincare => experiments::poincare(config),
        Experiment::BurgersShock => experiments::burgers_shock(config),
        Experiment::WeakBv => experiments::weak_bv(config),
        Experiment::Entropy => experiments::entropy(config),
        Experiment::Tvd => experiments::tvd(config),
        Experiment::MacLw => experiments::mac_lw(config),
    }?;
    if let Some(path) = &config.output {
        report.write_to(path)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_examples() {
        assert_eq!(observed_order(&[1.0, 0.5, 0.25], &[1.0, 0.5, 0.25]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(observed_order(&[1.0, 1.0, 1.0], &[1.0, 0.5, 0.25]).unwrap(), vec![0.0, 0.0]);
        let q = observed_order(&[1.0, 0.5, 0.25], &[1.0, 0.25, 0.0625]).unwrap();
        assert!(q.iter().all(|o| (o - 0.5).abs() < 1e-15));
        assert!(observed_order(&[1.0, 0.0], &[1.0, 0.5]).is_err());
        assert!(observed_order(&[1.0, 0.5], &[1.0, -0.5]).is_err());
        assert!(observed_order(&[1.0], &[1.0]).is_err());
        assert!(observed_order(&[1.0, 0.5], &[1.0]).is_err());
    }

    #[test]
    fn experiment_ids_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_id(e.id()).unwrap(), e);
        }
        assert!(matches!(Experiment::from_id("nope"), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn config_parsing_and_validation() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "tvd", "levels": 5, "flux": "lax-friedrichs"}"#)
            .unwrap();
        assert_eq!(c.levels, 5);
        assert_eq!(c.flux, FluxChoice::LaxFriedrichs);
        assert_eq!(c.cfl, 0.9);
        assert_eq!(c.validate().unwrap(), Experiment::Tvd);
        assert!(ExperimentConfig::from_json(r#"{"experiment": "tvd", "bogus": 1}"#).is_err());
        let mut bad = c.clone();
        bad.levels = 2;
        assert!(bad.validate().is_err());
        bad = c.clone();
        bad.cfl = 1.5;
        assert!(bad.validate().is_err());
        bad = c.clone();
        bad.experiment = "missing".into();
        assert!(matches!(bad.validate(), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn hash_ignores_output_path() {
        let mut a = ExperimentConfig::new(Experiment::Poincare);
        let h = a.hash();
        assert_eq!(h.len(), 16);
        a.output = Some("x.csv".into());
        assert_eq!(a.hash(), h);
        a.seed = 1;
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn report_orders_and_csv() {
        let config = ExperimentConfig::new(Experiment::TransportFd);
        let mut r = ConvergenceReport::new(Experiment::TransportFd, &config, &["err", "zero"]);
        r.push_row(0.5, 0.1, vec![1.0, 0.0]);
        r.push_row(0.25, 0.05, vec![0.25, 0.0]);
        assert_eq!(r.rows[1].orders, vec![Some(2.0), None]);
        r.check("ok", true, String::new());
        assert!(r.passed);
        r.check("bad", false, String::new());
        assert!(!r.passed);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "config_hash,level,h,dt,err,zero,order_err,order_zero");
        assert_eq!(lines[1], format!("{},0,0.5,0.1,1,0,,", config.hash()));
        assert_eq!(lines[2], format!("{},1,0.25,0.05,0.25,0,2,", config.hash()));
    }
}
