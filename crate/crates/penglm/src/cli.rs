//! Config-driven front end: one declarative manifest per run, a small set of
//! command-line overrides, and structured JSON reports.
//!
//! A manifest names its command (`fit`, `path`, `simulate`, `verify-bias`) and
//! carries the family, penalty, tuning parameters, and either a CSV data file
//! (`fit`/`path`) or a simulation section (`simulate`/`verify-bias`).
//! Datasets are header-first CSV with the response column `y` followed by
//! regressors `x1..xp`. Reports are schema-versioned JSON; identical manifest
//! plus overrides produce byte-identical report text, and floating-point
//! fields round-trip bit-exactly through the shortest-decimal encoding.

use crate::aic::{select_lambda, McOptions};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::family::FamilyKind;
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::sim::{
    asymptotic_normality_check, empirical_kl_bias, selection_consistency_rate, sparsity_rate,
    DesignKind, KlBiasReport, NormalityReport, RateReport, SimDesign,
};
use crate::solver::{fit, FitOptions, FitResult};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Schema tag stamped on every report.
pub const REPORT_SCHEMA: &str = "penglm/report/v1";
/// Schema tag stamped on machine-readable error records.
pub const ERROR_SCHEMA: &str = "penglm/error/v1";

/// The four run modes a manifest can declare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Fit,
    Path,
    Simulate,
    VerifyBias,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Fit => "fit",
            CommandKind::Path => "path",
            CommandKind::Simulate => "simulate",
            CommandKind::VerifyBias => "verify-bias",
        }
    }
}

/// Design choices expressible in a manifest (a fixed matrix is library-only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DesignConfig {
    IidUniform { low: f64, high: f64 },
    IidRademacher,
}

impl DesignConfig {
    fn to_kind(&self) -> DesignKind {
        match self {
            DesignConfig::IidUniform { low, high } => DesignKind::IidUniform {
                low: *low,
                high: *high,
            },
            DesignConfig::IidRademacher => DesignKind::IidRademacher,
        }
    }
}

/// Which empirical check `simulate` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Sparsity,
    Selection,
    Normality,
}

/// Simulation section of a manifest.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Sample size per replication.
    pub n: usize,
    /// True coefficient vector.
    pub beta_star: Vec<f64>,
    /// Design-matrix law.
    pub design: DesignConfig,
    /// Seed fixing the design matrix identity.
    #[serde(default)]
    pub seed: u64,
    /// Redraw the design each replication instead of holding it fixed.
    #[serde(default)]
    pub redraw_x: bool,
    /// Number of replications.
    pub reps: usize,
    /// Seed for the response substreams.
    #[serde(default = "default_harness_seed")]
    pub harness_seed: u64,
    /// Required for `simulate`; must be absent for `verify-bias`.
    #[serde(default)]
    pub experiment: Option<Experiment>,
}

fn default_harness_seed() -> u64 {
    1
}

impl SimConfig {
    fn to_design(&self, family: FamilyKind) -> Result<SimDesign> {
        Ok(SimDesign::new(
            family,
            DVector::from_vec(self.beta_star.clone()),
            self.n,
            self.design.to_kind(),
            self.seed,
        )?
        .with_redraw_x(self.redraw_x))
    }
}

/// A full run manifest.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// What to run; the invoked subcommand must agree.
    pub command: CommandKind,
    /// CSV dataset, required by `fit`/`path`.
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Response family.
    pub family: FamilyKind,
    /// Penalty kind plus shape parameters.
    pub penalty: PenaltyKind,
    /// Level for `fit`/`simulate`/`verify-bias`.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Grid for `path`.
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    /// Tuning-rate exponent.
    pub gamma0: f64,
    /// Leave the first column unpenalized.
    #[serde(default)]
    pub exclude_intercept: bool,
    /// Solver controls.
    #[serde(default)]
    pub fit: FitOptions,
    /// Monte-Carlo correction controls.
    #[serde(default)]
    pub mc: McOptions,
    /// Simulation section, required by `simulate`/`verify-bias`.
    #[serde(default)]
    pub sim: Option<SimConfig>,
    /// Report destination; stdout when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Command-line overrides applied on top of a manifest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    /// Replaces `lambda` (for `path`, replaces the whole grid).
    pub lambda: Option<f64>,
    /// Replaces the solver, Monte-Carlo, and response-harness seeds. The
    /// design-matrix seed is part of the design's identity and stays put.
    pub seed: Option<u64>,
    /// Replaces the output destination.
    pub out: Option<PathBuf>,
    /// Replaces the replication count.
    pub reps: Option<usize>,
}

/// A rendered report: JSON text plus where the caller should put it.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: String,
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    schema: &'static str,
    command: &'static str,
    report: T,
}

/// Machine-readable failure record printed on nonzero exit.
#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub schema: String,
    pub kind: String,
    pub message: String,
}

impl ErrorRecord {
    pub fn from_error(e: &Error) -> Self {
        ErrorRecord {
            schema: ERROR_SCHEMA.to_string(),
            kind: e.kind_str().to_string(),
            message: e.to_string(),
        }
    }
}

/// One fitted model as written to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub family: FamilyKind,
    pub penalty: PenaltyKind,
    pub lambda: f64,
    pub gamma0: f64,
    pub lambda_n: f64,
    pub n: usize,
    pub p: usize,
    pub beta_hat: Vec<f64>,
    pub active: Vec<usize>,
    pub loglik: f64,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub restart: usize,
}

impl FitRecord {
    fn new(result: &FitResult, spec: &PenaltySpec, family: FamilyKind, n: usize) -> Self {
        FitRecord {
            family,
            penalty: spec.kind(),
            lambda: spec.lambda(),
            gamma0: spec.gamma0(),
            lambda_n: spec.lambda_n(),
            n,
            p: result.beta_hat.len(),
            beta_hat: result.beta_hat.iter().copied().collect(),
            active: result.active.clone(),
            loglik: result.loglik,
            objective: result.objective,
            converged: result.converged,
            iterations: result.iterations,
            kkt_residual: result.kkt_residual,
            restart: result.restart,
        }
    }
}

/// One path point as written to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPointRecord {
    pub lambda: f64,
    pub lambda_n: f64,
    pub aic: f64,
    pub loglik: f64,
    pub support_size: usize,
    pub khat: Option<f64>,
    pub khat_se: Option<f64>,
    pub active: Vec<usize>,
    pub beta_hat: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFailureRecord {
    pub lambda: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub family: FamilyKind,
    pub penalty: PenaltyKind,
    pub gamma0: f64,
    pub n: usize,
    pub p: usize,
    pub points: Vec<PathPointRecord>,
    pub best_index: usize,
    pub best: FitRecord,
    pub failures: Vec<PathFailureRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub rate: f64,
    pub reps: usize,
    pub kept: usize,
    pub skipped: usize,
    pub skip_rate: f64,
}

impl RateRecord {
    fn new(r: &RateReport) -> Self {
        RateRecord {
            rate: r.rate,
            reps: r.reps,
            kept: r.kept,
            skipped: r.skipped,
            skip_rate: r.skip_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityRecord {
    pub support: Vec<usize>,
    pub reps: usize,
    pub kept: usize,
    pub discarded: usize,
    pub center: Option<Vec<f64>>,
    pub mean: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub cov_target: Vec<Vec<f64>>,
    pub cov_rel_frobenius: f64,
    pub skew_z: Vec<f64>,
    pub kurtosis_z: Vec<f64>,
}

impl NormalityRecord {
    fn new(r: &NormalityReport) -> Self {
        let rows = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect()
        };
        NormalityRecord {
            support: r.support.clone(),
            reps: r.reps,
            kept: r.kept,
            discarded: r.discarded,
            center: r.center.as_ref().map(|c| c.iter().copied().collect()),
            mean: r.mean.iter().copied().collect(),
            mean_se: r.mean_se.iter().copied().collect(),
            cov: rows(&r.cov),
            cov_target: rows(&r.cov_target),
            cov_rel_frobenius: r.cov_rel_frobenius,
            skew_z: r.skew_z.iter().copied().collect(),
            kurtosis_z: r.kurtosis_z.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRecord {
    pub experiment: Experiment,
    pub family: FamilyKind,
    pub penalty: PenaltyKind,
    pub lambda: f64,
    pub gamma0: f64,
    pub n: usize,
    pub beta_star: Vec<f64>,
    pub reps: usize,
    pub rate: Option<RateRecord>,
    pub normality: Option<NormalityRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyBiasRecord {
    pub family: FamilyKind,
    pub penalty: PenaltyKind,
    pub lambda: f64,
    pub gamma0: f64,
    pub n: usize,
    pub beta_star: Vec<f64>,
    pub reps: usize,
    pub kept: usize,
    pub skipped: usize,
    pub skip_rate: f64,
    /// Monte-Carlo mean of the exact two-copy KL bias.
    pub oracle_mean: f64,
    pub oracle_se: f64,
    /// Average criterion correction (support size plus `K_hat` when used).
    pub mean_correction: f64,
    pub se_correction: f64,
    pub mean_support: f64,
    pub mean_khat: Option<f64>,
    /// Whether the two means agree within two combined standard errors,
    /// `|oracle_mean - mean_correction| <= 2 * sqrt(oracle_se^2 + se_correction^2)`.
    pub within_two_se: bool,
}

impl VerifyBiasRecord {
    fn new(
        r: &KlBiasReport,
        family: FamilyKind,
        spec: &PenaltySpec,
        beta_star: &[f64],
    ) -> Self {
        VerifyBiasRecord {
            family,
            penalty: spec.kind(),
            lambda: spec.lambda(),
            gamma0: spec.gamma0(),
            n: spec.n(),
            beta_star: beta_star.to_vec(),
            reps: r.reps,
            kept: r.kept,
            skipped: r.skipped,
            skip_rate: r.skip_rate(),
            oracle_mean: r.mean,
            oracle_se: r.se,
            mean_correction: r.mean_correction,
            se_correction: r.se_correction,
            mean_support: r.mean_support,
            mean_khat: r.mean_khat,
            within_two_se: (r.mean - r.mean_correction).abs() <= 2.0 * r.combined_se(),
        }
    }
}

/// Parses a manifest file (JSON).
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Reads a header-first CSV dataset: response column `y`, regressors `x1..xp`.
pub fn read_csv(path: &Path, family: FamilyKind) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            location: path.display().to_string(),
            message: e.to_string(),
        })?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            location: format!("{}, header", path.display()),
            message: e.to_string(),
        })?
        .clone();
    if headers.len() < 2 || headers.get(0) != Some("y") {
        return Err(Error::Parse {
            location: format!("{}, header", path.display()),
            message: format!(
                "expected a response column `y` followed by regressors `x1..xp`, found {:?}",
                headers.iter().collect::<Vec<_>>()
            ),
        });
    }
    for (k, name) in headers.iter().enumerate().skip(1) {
        let expected = format!("x{k}");
        if name != expected {
            return Err(Error::Parse {
                location: format!("{}, header column {}", path.display(), k + 1),
                message: format!("expected column `{expected}`, found `{name}`"),
            });
        }
    }

    let p = headers.len() - 1;
    let mut y_vals = Vec::new();
    let mut x_vals: Vec<f64> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            location: format!("{}, data row {row}", path.display()),
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                location: format!("{}, data row {row}", path.display()),
                message: format!(
                    "row has {} fields but the header has {}",
                    record.len(),
                    headers.len()
                ),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                location: format!(
                    "{}, data row {row}, column {}",
                    path.display(),
                    &headers[j]
                ),
                message: format!("expected a number, found {field:?}"),
            })?;
            if j == 0 {
                y_vals.push(value);
            } else {
                x_vals.push(value);
            }
        }
    }
    if y_vals.is_empty() {
        return Err(Error::Parse {
            location: path.display().to_string(),
            message: "no data rows".into(),
        });
    }
    let n = y_vals.len();
    let x = DMatrix::from_fn(n, p, |r, c| x_vals[r * p + c]);
    Dataset::new(DVector::from_vec(y_vals), x, family)
}

fn render<T: Serialize>(command: CommandKind, body: T) -> Result<String> {
    let envelope = Envelope {
        schema: REPORT_SCHEMA,
        command: command.name(),
        report: body,
    };
    let mut json = serde_json::to_string_pretty(&envelope)?;
    json.push('\n');
    Ok(json)
}

fn build_spec(config: &RunConfig, lambda: f64, n: usize) -> Result<PenaltySpec> {
    Ok(
        PenaltySpec::new(config.penalty, lambda, config.gamma0, n)?
            .with_intercept_excluded(config.exclude_intercept),
    )
}

fn require_data<'a>(config: &'a RunConfig) -> Result<&'a Path> {
    if config.sim.is_some() {
        return Err(Error::Config(format!(
            "`{}` reads a data file; remove the `sim` section",
            config.command.name()
        )));
    }
    config.data.as_deref().ok_or_else(|| {
        Error::Config(format!(
            "`{}` needs a `data` path to a CSV file",
            config.command.name()
        ))
    })
}

fn require_sim<'a>(config: &'a RunConfig) -> Result<&'a SimConfig> {
    if config.data.is_some() {
        return Err(Error::Config(format!(
            "`{}` generates its own data; remove the `data` path",
            config.command.name()
        )));
    }
    config.sim.as_ref().ok_or_else(|| {
        Error::Config(format!(
            "`{}` needs a `sim` section describing the data-generating truth",
            config.command.name()
        ))
    })
}

fn require_lambda(config: &RunConfig) -> Result<f64> {
    config.lambda.ok_or_else(|| {
        Error::Config(format!(
            "`{}` needs a `lambda` level",
            config.command.name()
        ))
    })
}

/// Executes a manifest and renders its report. Pure with respect to the
/// filesystem except for reading the dataset; the caller writes the report.
pub fn run(mut config: RunConfig, overrides: &Overrides) -> Result<Report> {
    if let Some(lambda) = overrides.lambda {
        config.lambda = Some(lambda);
        if config.lambda_grid.is_some() {
            config.lambda_grid = Some(vec![lambda]);
        }
    }
    if let Some(seed) = overrides.seed {
        config.fit.seed = seed;
        config.mc.seed = seed;
        if let Some(sim) = config.sim.as_mut() {
            sim.harness_seed = seed;
        }
    }
    if let Some(reps) = overrides.reps {
        if let Some(sim) = config.sim.as_mut() {
            sim.reps = reps;
        }
    }
    let output = overrides.out.clone().or_else(|| config.output.clone());

    // Surface penalty-domain mistakes (bad shape parameters, bad gamma0)
    // before any file IO or computation.
    PenaltySpec::new(
        config.penalty,
        config.lambda.unwrap_or(1.0).max(0.0),
        config.gamma0,
        1,
    )?;

    let json = match config.command {
        CommandKind::Fit => {
            let lambda = require_lambda(&config)?;
            let data = read_csv(require_data(&config)?, config.family)?;
            let spec = build_spec(&config, lambda, data.n())?;
            let result = fit(&data, &spec, &config.fit)?;
            render(
                config.command,
                FitRecord::new(&result, &spec, config.family, data.n()),
            )?
        }
        CommandKind::Path => {
            let grid = config.lambda_grid.clone().ok_or_else(|| {
                Error::Config("`path` needs a `lambda_grid` of candidate levels".into())
            })?;
            let data = read_csv(require_data(&config)?, config.family)?;
            if config.exclude_intercept {
                return Err(Error::Config(
                    "`path` does not support `exclude_intercept` yet; fit levels individually"
                        .into(),
                ));
            }
            let selection = select_lambda(
                &data,
                config.penalty,
                &grid,
                config.gamma0,
                &config.fit,
                &config.mc,
            )?;
            let points = selection
                .path
                .iter()
                .map(|pt| {
                    let spec = PenaltySpec::new(config.penalty, pt.lambda, config.gamma0, data.n())
                        .expect("validated by select_lambda");
                    PathPointRecord {
                        lambda: pt.lambda,
                        lambda_n: spec.lambda_n(),
                        aic: pt.report.aic,
                        loglik: pt.report.loglik,
                        support_size: pt.report.correction.support_size,
                        khat: pt.report.correction.khat.map(|k| k.khat),
                        khat_se: pt.report.correction.khat.map(|k| k.se),
                        active: pt.fit.active.clone(),
                        beta_hat: pt.fit.beta_hat.iter().copied().collect(),
                        converged: pt.fit.converged,
                    }
                })
                .collect();
            let best_point = selection.best_point();
            let best_spec =
                build_spec(&config, best_point.lambda, data.n())?;
            let best = FitRecord::new(&best_point.fit, &best_spec, config.family, data.n());
            let failures = selection
                .failures
                .iter()
                .map(|(lambda, message)| PathFailureRecord {
                    lambda: *lambda,
                    message: message.clone(),
                })
                .collect();
            render(
                config.command,
                PathRecord {
                    family: config.family,
                    penalty: config.penalty,
                    gamma0: config.gamma0,
                    n: data.n(),
                    p: data.p(),
                    points,
                    best_index: selection.best,
                    best,
                    failures,
                },
            )?
        }
        CommandKind::Simulate => {
            let lambda = require_lambda(&config)?;
            let sim = require_sim(&config)?.clone();
            let experiment = sim.experiment.ok_or_else(|| {
                Error::Config(
                    "`simulate` needs `sim.experiment`: sparsity, selection, or normality".into(),
                )
            })?;
            let design = sim.to_design(config.family)?;
            let spec = build_spec(&config, lambda, sim.n)?;
            let (rate, normality) = match experiment {
                Experiment::Sparsity => (
                    Some(RateRecord::new(&sparsity_rate(
                        &design,
                        &spec,
                        &config.fit,
                        sim.reps,
                        sim.harness_seed,
                    )?)),
                    None,
                ),
                Experiment::Selection => (
                    Some(RateRecord::new(&selection_consistency_rate(
                        &design,
                        &spec,
                        &config.fit,
                        sim.reps,
                        sim.harness_seed,
                    )?)),
                    None,
                ),
                Experiment::Normality => (
                    None,
                    Some(NormalityRecord::new(&asymptotic_normality_check(
                        &design,
                        &spec,
                        &config.fit,
                        sim.reps,
                        sim.harness_seed,
                    )?)),
                ),
            };
            render(
                config.command,
                SimulateRecord {
                    experiment,
                    family: config.family,
                    penalty: config.penalty,
                    lambda,
                    gamma0: config.gamma0,
                    n: sim.n,
                    beta_star: sim.beta_star.clone(),
                    reps: sim.reps,
                    rate,
                    normality,
                },
            )?
        }
        CommandKind::VerifyBias => {
            let lambda = require_lambda(&config)?;
            let sim = require_sim(&config)?.clone();
            if sim.experiment.is_some() {
                return Err(Error::Config(
                    "`verify-bias` runs one fixed comparison; remove `sim.experiment`".into(),
                ));
            }
            let design = sim.to_design(config.family)?;
            let spec = build_spec(&config, lambda, sim.n)?;
            let report = empirical_kl_bias(
                &design,
                &spec,
                &config.fit,
                &config.mc,
                sim.reps,
                sim.harness_seed,
                false,
            )?;
            render(
                config.command,
                VerifyBiasRecord::new(&report, config.family, &spec, &sim.beta_star),
            )?
        }
    };

    Ok(Report { json, output })
}
