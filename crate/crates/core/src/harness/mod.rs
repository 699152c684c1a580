//! Run orchestration behind the command-line tool: config validation,
//! experiment runs, and the files they leave behind.

mod config;
mod conjugate;
mod output;
pub mod verify;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{ExperimentKind, MinibatchSetting, RunConfig};
pub use output::{sha256_hex, FileDigest, RunManifest};

use crate::diagnostics::{
    ergodic_mean_of, estimate_c, estimate_sigma_f, feasibility_fraction_of, wasserstein2_1d_oracle,
    wasserstein2_1d_oracle_stderr, CEstimate, EmpiricalMeasure,
};
use crate::error::Error;
use crate::experiments::{
    assemble_experiment, with_l1_term, Experiment, ExperimentSpec, TruncGaussSpec,
    WishartExperimentSpec,
};
use crate::par::Execution;
use crate::samplers::{run_chain, run_ensemble_with, ChainTrace, SamplerConfig};
use crate::space::{RngStream, SpacePoint};

/// Environment variable that overrides the output directory of a config.
pub const OUTPUT_ENV: &str = "PROX_LANGEVIN_OUT";

/// Output directory used when neither the flag, the environment, nor the
/// config names one.
pub const DEFAULT_OUTPUT_DIR: &str = "out";

/// Stream reserved for bootstrap resampling, disjoint from chain streams.
pub const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// At most this many post-burn-in iterates feed the `C` estimate.
const C_SAMPLE_CAP: usize = 2000;

/// At most this many rows in `convergence.csv`.
const CONVERGENCE_ROWS: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Runtime(#[from] Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed invariants: {}", .0.join(", "))]
    Verify(Vec<String>),
}

impl HarnessError {
    /// 2 for configuration problems, 1 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

pub fn parse_config(text: &str) -> HarnessResult<RunConfig> {
    serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
}

pub fn load_config(path: &Path) -> HarnessResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// `--out`, then [`OUTPUT_ENV`], then the config, then [`DEFAULT_OUTPUT_DIR`].
pub fn resolve_output_dir(flag: Option<&Path>, env: Option<&str>, cfg: &RunConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(e) = env.filter(|e| !e.is_empty()) {
        return PathBuf::from(e);
    }
    cfg.output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// A validated config with its target assembled.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub config: RunConfig,
    pub spec: ExperimentSpec,
    pub experiment: Experiment,
    pub sampler: SamplerConfig,
    pub snapshot_steps: Vec<usize>,
    /// `γ > 1/L`: outside the regime of the convergence bounds.
    pub step_exceeds_inverse_l: bool,
}

fn reject_field<T>(field: &Option<T>, name: &str, kind: ExperimentKind) -> HarnessResult<()> {
    match field {
        Some(_) => Err(config_err(format!(
            "field `{name}` does not apply to {}",
            kind.name()
        ))),
        None => Ok(()),
    }
}

fn experiment_spec(cfg: &RunConfig) -> HarnessResult<ExperimentSpec> {
    let kind = cfg.experiment;
    let to_config = |e: Error| config_err(e.to_string());
    match kind {
        ExperimentKind::TruncGauss => {
            reject_field(&cfg.n, "n", kind)?;
            reject_field(&cfg.d, "d", kind)?;
            reject_field(&cfg.nu, "nu", kind)?;
            let s = TruncGaussSpec::new(
                cfg.trunc_mean.unwrap_or(0.0),
                cfg.trunc_lo.unwrap_or(-1.0),
                cfg.trunc_hi.unwrap_or(1.0),
            )
            .map_err(to_config)?;
            Ok(ExperimentSpec::TruncGauss(s))
        }
        ExperimentKind::WishartMean1d | ExperimentKind::WishartPrecision => {
            reject_field(&cfg.trunc_mean, "trunc_mean", kind)?;
            reject_field(&cfg.trunc_lo, "trunc_lo", kind)?;
            reject_field(&cfg.trunc_hi, "trunc_hi", kind)?;
            let d = cfg.d.unwrap_or(1);
            if kind == ExperimentKind::WishartMean1d && d != 1 {
                return Err(config_err(format!(
                    "wishart-mean-1d requires d = 1, got d = {d}"
                )));
            }
            let n = cfg.n.unwrap_or(50);
            let nu = cfg.nu.unwrap_or(d as f64 + 4.0);
            let s = WishartExperimentSpec::generate(d, nu, n, cfg.data_seed).map_err(to_config)?;
            Ok(match kind {
                ExperimentKind::WishartMean1d => ExperimentSpec::WishartMean1d(s),
                _ => ExperimentSpec::WishartPrecision(s),
            })
        }
    }
}

/// Checks a config and builds everything a run needs. Every failure here
/// is a configuration error.
pub fn prepare(cfg: &RunConfig) -> HarnessResult<PreparedRun> {
    let to_config = |e: Error| config_err(e.to_string());
    let spec = experiment_spec(cfg)?;
    let mut experiment = assemble_experiment(&spec).map_err(to_config)?;
    if !cfg.spla_l1_weights.is_empty() {
        if cfg.sampler != crate::samplers::SamplerKind::Spla {
            return Err(config_err(format!(
                "spla_l1_weights needs sampler spla, got {}",
                cfg.sampler
            )));
        }
        experiment = with_l1_term(experiment, &cfg.spla_l1_weights).map_err(to_config)?;
    }
    if cfg.num_chains == 0 {
        return Err(config_err("num_chains must be at least 1"));
    }
    if cfg.histogram_bins == 0 {
        return Err(config_err("histogram_bins must be at least 1"));
    }
    if cfg.bootstrap_replicates < 2 {
        return Err(config_err("bootstrap_replicates must be at least 2"));
    }
    let mut snapshot_steps = cfg.snapshot_steps.clone();
    snapshot_steps.sort_unstable();
    snapshot_steps.dedup();
    if let Some(&s) = snapshot_steps.last() {
        if s > cfg.num_steps {
            return Err(config_err(format!(
                "snapshot step {s} exceeds num_steps = {}",
                cfg.num_steps
            )));
        }
    }
    if snapshot_steps.is_empty() && cfg.num_chains > 1 {
        snapshot_steps.push(cfg.num_steps);
    }
    let sampler = SamplerConfig {
        gamma: cfg.gamma,
        num_steps: cfg.num_steps,
        burn_in: cfg.burn_in,
        minibatch: cfg.minibatch.0,
        myula_lambda: cfg.myula_lambda,
        seed: cfg.seed,
        record_every: cfg.record_every,
        record_duals: cfg.record_duals,
        initial: None,
    };
    let step_exceeds_inverse_l = sampler
        .validate(cfg.sampler, &experiment.problem)
        .map_err(to_config)?;
    Ok(PreparedRun {
        config: cfg.clone(),
        spec,
        experiment,
        sampler,
        snapshot_steps,
        step_exceeds_inverse_l,
    })
}

/// What a command wrote.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

fn seeds_of(cfg: &RunConfig) -> Value {
    json!({
        "seed": cfg.seed,
        "data_seed": cfg.data_seed,
        "bootstrap_seed": cfg.seed,
        "bootstrap_stream": BOOTSTRAP_STREAM,
    })
}

/// Runs one chain and writes `trace.csv` and `manifest.json`.
pub fn cmd_sample(cfg: &RunConfig, out_dir: &Path) -> HarnessResult<RunSummary> {
    let run = prepare(cfg)?;
    let started = Instant::now();
    log::info!("sampling {} steps with {}", cfg.num_steps, cfg.sampler);
    let trace = run_chain(cfg.sampler, &run.experiment.problem, &run.sampler)?;
    let csv = output::trace_csv(
        &trace,
        run.experiment.problem.descriptor().ambient_dim(),
        cfg.record_duals,
    );
    let files = vec![("trace.csv".to_string(), csv.into_bytes())];
    output::finish(out_dir, "sample", cfg, seeds_of(cfg), started, files)
}

/// Everything `cmd_experiment` reports, before serialization.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: &'static str,
    pub sampler: &'static str,
    pub gamma: f64,
    pub num_steps: usize,
    pub burn_in: usize,
    pub num_chains: usize,
    pub step_exceeds_inverse_l: bool,
    pub m_star: Option<Value>,
    pub ergodic_mean: Value,
    pub feasibility_fraction: f64,
    pub c_estimate: Option<CEstimate>,
    pub sigma_f: f64,
    pub snapshots: Vec<SnapshotReport>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotReport {
    pub step: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w2_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w2_sq_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frobenius_to_mstar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility_fraction: Option<f64>,
}

/// Dense row-major matrix for matrix points, the coordinate list otherwise.
fn point_json(p: &SpacePoint) -> Value {
    let desc = p.descriptor();
    if desc.is_matrix() {
        let rows: Vec<Vec<f64>> = (0..desc.d)
            .map(|i| (0..desc.d).map(|j| p.get(i, j)).collect())
            .collect();
        json!(rows)
    } else {
        json!(p.coords())
    }
}

fn thin(points: &[SpacePoint], cap: usize) -> Vec<SpacePoint> {
    if points.len() <= cap {
        return points.to_vec();
    }
    (0..cap)
        .map(|i| points[i * points.len() / cap].clone())
        .collect()
}

/// Running means of `trace.primal` at the given steps (entries recorded at
/// or before each step).
fn running_means_at(trace: &ChainTrace, steps: &[usize]) -> Vec<Option<SpacePoint>> {
    let mut out = Vec::with_capacity(steps.len());
    let mut sum = match trace.primal.first() {
        Some(p) => SpacePoint::zeros(p.descriptor()),
        None => return vec![None; steps.len()],
    };
    let mut count = 0usize;
    let mut idx = 0;
    for &s in steps {
        while idx < trace.steps.len() && trace.steps[idx] <= s {
            sum.axpy(1.0, &trace.primal[idx]);
            count += 1;
            idx += 1;
        }
        out.push((count > 0).then(|| sum.scaled(1.0 / count as f64)));
    }
    out
}

fn frobenius(a: &SpacePoint, b: &SpacePoint) -> f64 {
    a.dist_sq(b).sqrt()
}

/// Runs the configured experiment and writes `report.json`,
/// `histogram.csv` (1-D targets), `convergence.csv` (when `m*` is known)
/// and `manifest.json`.
pub fn cmd_experiment(cfg: &RunConfig, out_dir: &Path) -> HarnessResult<RunSummary> {
    cmd_experiment_with(cfg, out_dir, Execution::default())
}

pub fn cmd_experiment_with(
    cfg: &RunConfig,
    out_dir: &Path,
    exec: Execution,
) -> HarnessResult<RunSummary> {
    let run = prepare(cfg)?;
    let started = Instant::now();
    let (report, extra) = experiment_outputs(&run, exec)?;
    let mut files = vec![(
        "report.json".to_string(),
        output::json_bytes(&serde_json::to_value(&report).expect("report serializes")),
    )];
    files.extend(extra);
    output::finish(out_dir, "experiment", cfg, seeds_of(cfg), started, files)
}

/// File names paired with their contents.
pub type OutputFiles = Vec<(String, Vec<u8>)>;

/// The report and the CSV files of an experiment, without touching disk.
pub fn experiment_outputs(
    run: &PreparedRun,
    exec: Execution,
) -> HarnessResult<(ExperimentReport, OutputFiles)> {
    let cfg = &run.config;
    let exp = &run.experiment;
    let desc = exp.problem.descriptor();
    let mut notes = Vec::new();
    if run.step_exceeds_inverse_l {
        notes.push(format!(
            "gamma = {} exceeds 1/L = {}",
            cfg.gamma,
            1.0 / exp.smooth().smoothness()
        ));
    }

    log::info!(
        "{}: running chain 0 for {} steps",
        cfg.experiment.name(),
        cfg.num_steps
    );
    let trace = run_chain(cfg.sampler, &exp.problem, &run.sampler)?;
    let mean = ergodic_mean_of(&trace.primal, 0)?;
    let feasibility = feasibility_fraction_of(&trace.primal, exp.nonsmooth())?;

    let c_points = thin(&trace.primal, C_SAMPLE_CAP);
    let sigma_f = estimate_sigma_f(exp.smooth(), &c_points, run.sampler.minibatch);
    let c_estimate = match estimate_c(
        &EmpiricalMeasure::new(c_points)?,
        exp.nonsmooth(),
        exp.smooth().smoothness(),
        desc.ambient_dim(),
        sigma_f,
    ) {
        Ok(c) => {
            if c.skipped > 0 {
                notes.push(format!(
                    "C estimate skipped {} samples outside the domain interior",
                    c.skipped
                ));
            }
            Some(c)
        }
        Err(e) => {
            notes.push(format!("C estimate unavailable: {e}"));
            None
        }
    };

    let m_star = exp.ground_truth().map(|t| t.m_star.clone());
    let mut snapshots = Vec::new();
    if cfg.num_chains > 1 {
        log::info!(
            "running {} chains to step {}",
            cfg.num_chains,
            cfg.num_steps
        );
        let ens = run_ensemble_with(
            cfg.sampler,
            &exp.problem,
            &run.sampler,
            cfg.num_chains,
            &run.snapshot_steps,
            exec,
        )?;
        let mut boot = RngStream::new(cfg.seed, BOOTSTRAP_STREAM);
        for (i, &step) in ens.steps.iter().enumerate() {
            let points = &ens.snapshots[i];
            let measure = EmpiricalMeasure::new(points.clone())?;
            let (w2_sq, w2_sq_stderr) = match exp.quantile_oracle() {
                Some(q) => (
                    Some(wasserstein2_1d_oracle(&measure, q)?),
                    Some(wasserstein2_1d_oracle_stderr(
                        &measure,
                        q,
                        cfg.bootstrap_replicates,
                        &mut boot,
                    )?),
                ),
                None => (None, None),
            };
            let frobenius_to_mstar = m_star.as_ref().map(|m| frobenius(&measure.mean(), m));
            snapshots.push(SnapshotReport {
                step,
                w2_sq,
                w2_sq_stderr,
                frobenius_to_mstar,
                feasibility_fraction: Some(ens.feasible_counts[i] as f64 / cfg.num_chains as f64),
            });
        }
    } else if let Some(m) = &m_star {
        for (step, avg) in run
            .snapshot_steps
            .iter()
            .zip(running_means_at(&trace, &run.snapshot_steps))
        {
            snapshots.push(SnapshotReport {
                step: *step,
                w2_sq: None,
                w2_sq_stderr: None,
                frobenius_to_mstar: avg.map(|a| frobenius(&a, m)),
                feasibility_fraction: None,
            });
        }
    } else if !run.snapshot_steps.is_empty() {
        notes.push("single-chain snapshots need a known m*; none reported".to_string());
    }

    let mut files = Vec::new();
    if desc.ambient_dim() == 1 {
        let values: Vec<f64> = trace.primal.iter().map(|p| p.coords()[0]).collect();
        files.push((
            "histogram.csv".to_string(),
            output::histogram_csv(&values, cfg.histogram_bins).into_bytes(),
        ));
    }
    if let Some(m) = &m_star {
        let stride = trace.len().div_ceil(CONVERGENCE_ROWS).max(1);
        let steps: Vec<usize> = trace
            .steps
            .iter()
            .copied()
            .skip(stride - 1)
            .step_by(stride)
            .collect();
        let rows: Vec<(usize, f64)> = steps
            .iter()
            .zip(running_means_at(&trace, &steps))
            .filter_map(|(s, a)| a.map(|a| (*s, frobenius(&a, m))))
            .collect();
        files.push((
            "convergence.csv".to_string(),
            output::convergence_csv(&rows).into_bytes(),
        ));
    }

    let report = ExperimentReport {
        experiment: cfg.experiment.name(),
        sampler: cfg.sampler.name(),
        gamma: cfg.gamma,
        num_steps: cfg.num_steps,
        burn_in: cfg.burn_in,
        num_chains: cfg.num_chains,
        step_exceeds_inverse_l: run.step_exceeds_inverse_l,
        m_star: m_star.as_ref().map(point_json),
        ergodic_mean: point_json(&mean),
        feasibility_fraction: feasibility,
        c_estimate,
        sigma_f,
        snapshots,
        notes,
    };
    Ok((report, files))
}
