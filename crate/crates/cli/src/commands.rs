use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use serde::Serialize;
use triggered_hb::algorithms::{
    run_adaptive, run_adaptive_hoh, run_continuous_reference, run_displaced_gradient, run_heavy_ball_discrete,
    run_nesterov, RunSummary, RunTrace,
};
use triggered_hb::objectives::{Benchmark, LogisticDataset};
use triggered_hb::triggers::default_t_max;
use triggered_hb::verify::{run_suite, Report, SuiteConfig};

use crate::config::{Algorithm, ExperimentConfig, Problem, RunSpec};
use crate::plotdata::write_plot_data;
use crate::UsageError;

/// Contents of `<label>.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub label: String,
    pub problem: Benchmark,
    pub selector: Algorithm,
    pub a0: f64,
    #[serde(flatten)]
    pub summary: RunSummary,
}

fn execute(spec: &RunSpec, config: &ExperimentConfig, problem: &Problem) -> triggered_hb::Result<RunTrace> {
    let settings = spec.resolved(config.problem);
    let Problem { oracle, params, start } = problem;
    match spec.algorithm {
        Algorithm::DgP | Algorithm::Dg => run_displaced_gradient(start, &settings, oracle),
        Algorithm::HohD | Algorithm::HohP => run_adaptive_hoh(start, &settings, oracle),
        Algorithm::Adaptive => run_adaptive(start, &settings, oracle),
        Algorithm::Nesterov => run_nesterov(
            &start.x,
            1.0 / oracle.lipschitz(),
            oracle,
            settings.max_iters,
            settings.epsilon,
        ),
        Algorithm::HeavyBall => run_heavy_ball_discrete(&start.x, oracle, settings.max_iters, settings.epsilon),
        Algorithm::Continuous => {
            let horizon = config.continuous.horizon.unwrap_or_else(|| default_t_max(params));
            run_continuous_reference(start, settings.a0, params, oracle, horizon, config.continuous.step)
        }
    }
}

/// Runs every configured algorithm and writes `<label>.csv` and
/// `<label>.json` into the output directory. A failing run does not stop
/// the others; the error lists all failures.
pub fn cmd_run(config: &ExperimentConfig) -> anyhow::Result<Vec<RunReport>> {
    config.validate()?;
    let problem = config.problem()?;
    std::fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
    let labels = config.labels();
    let mut reports = Vec::new();
    let mut csvs = Vec::new();
    let mut failures = Vec::new();
    for (spec, label) in config.runs.iter().zip(&labels) {
        let start = Instant::now();
        let trace = match execute(spec, config, &problem) {
            Ok(trace) => trace,
            Err(e) => {
                log::error!("{label}: {e}");
                failures.push(format!("{label}: {e}"));
                continue;
            }
        };
        let wall = start.elapsed().as_secs_f64();
        let csv_path = config.out.join(format!("{label}.csv"));
        trace.save_csv(&csv_path).with_context(|| csv_path.display().to_string())?;
        let report = RunReport {
            label: label.clone(),
            problem: config.problem,
            selector: spec.algorithm,
            a0: spec.resolved(config.problem).a0,
            summary: trace.summary(wall),
        };
        let json_path = config.out.join(format!("{label}.json"));
        std::fs::write(&json_path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| json_path.display().to_string())?;
        log::info!(
            "{label}: {} iterations, converged = {}, {:.3} s",
            report.summary.iterations,
            report.summary.converged,
            wall
        );
        csvs.push(csv_path);
        reports.push(report);
    }
    if config.plot_data && !csvs.is_empty() {
        let path = config.out.join("plotdata.csv");
        let file = std::fs::File::create(&path).with_context(|| path.display().to_string())?;
        write_plot_data(&csvs, std::io::BufWriter::new(file))?;
    }
    if !failures.is_empty() {
        bail!("{} run(s) failed:\n  {}", failures.len(), failures.join("\n  "));
    }
    Ok(reports)
}

pub fn cmd_gen_dataset(seed: u64, out: &Path) -> anyhow::Result<LogisticDataset> {
    let dataset = LogisticDataset::generate(seed);
    dataset.save(out).with_context(|| format!("writing {}", out.display()))?;
    Ok(dataset)
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub problems: Vec<Benchmark>,
    pub dataset_seed: u64,
    pub dataset: Option<PathBuf>,
    /// Multiplies the strong-convexity constant handed to the checks.
    pub corrupt_mu: Option<f64>,
    pub suite: SuiteConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            problems: Benchmark::ALL.to_vec(),
            dataset_seed: triggered_hb::objectives::DEFAULT_DATASET_SEED,
            dataset: None,
            corrupt_mu: None,
            suite: SuiteConfig::default(),
        }
    }
}

/// Prints one table per problem to `out`; fails when any check fails.
pub fn cmd_verify<W: Write>(options: &VerifyOptions, mut out: W) -> anyhow::Result<Vec<Report>> {
    if let Some(factor) = options.corrupt_mu {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(UsageError(format!("mu factor must be positive, got {factor}")).into());
        }
    }
    let mut reports = Vec::new();
    for &benchmark in &options.problems {
        let mut oracle = match (benchmark, &options.dataset) {
            (Benchmark::Logistic, Some(path)) => {
                let dataset = LogisticDataset::load(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
                triggered_hb::objectives::make_logistic(&dataset)?
            }
            _ => benchmark.oracle(options.dataset_seed)?,
        };
        let mut name = benchmark.name().to_string();
        if let Some(factor) = options.corrupt_mu {
            oracle = oracle.with_claimed_mu(factor * oracle.mu())?;
            name = format!("{name} (mu x {factor})");
        }
        let report = run_suite(&name, &oracle, &options.suite)?;
        writeln!(out, "{report}")?;
        reports.push(report);
    }
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failures().map(move |c| format!("{} {}: {}", r.benchmark, c.name, c.detail)))
        .collect();
    if !failed.is_empty() {
        bail!("{} check(s) failed:\n  {}", failed.len(), failed.join("\n  "));
    }
    Ok(reports)
}
