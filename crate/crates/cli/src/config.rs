use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use triggered_hb::algorithms::AlgoConfig;
use triggered_hb::dynamics::{FlowParams, State};
use triggered_hb::objectives::{
    make_logistic, make_quadratic, start_state, Benchmark, LogisticDataset, ObjectiveOracle, DEFAULT_DATASET_SEED,
};
use triggered_hb::triggers::{Design, Hold, Mode};

use crate::UsageError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Fixed displacement, performance trigger, event-triggered.
    DgP,
    /// Adaptive high-order hold, derivative trigger, event-triggered.
    HohD,
    /// Adaptive high-order hold, performance trigger, event-triggered.
    HohP,
    /// Fixed displacement with the configured trigger and mode.
    Dg,
    /// Adaptive displacement with the configured trigger, mode and hold.
    Adaptive,
    Nesterov,
    HeavyBall,
    /// RK4 integration of the flow itself.
    Continuous,
}

impl Algorithm {
    pub const DEFAULT_SET: [Algorithm; 5] = [
        Algorithm::DgP,
        Algorithm::HohD,
        Algorithm::HohP,
        Algorithm::Nesterov,
        Algorithm::HeavyBall,
    ];

    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default()
    }

    /// Trigger settings pinned by the presets.
    fn preset(self) -> Option<(Design, Mode, Hold)> {
        match self {
            Algorithm::DgP => Some((Design::Performance, Mode::Et, Hold::Zoh)),
            Algorithm::HohD => Some((Design::Derivative, Mode::Et, Hold::Hoh)),
            Algorithm::HohP => Some((Design::Performance, Mode::Et, Hold::Hoh)),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses a lowercase serde name, for command-line values.
pub fn parse_name<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    /// File stem of the outputs; defaults to the algorithm name.
    #[serde(default)]
    pub label: Option<String>,
    /// Displacement; defaults to the problem's experiment value. Replaces `settings.a0`.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub settings: AlgoConfig,
}

impl RunSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            label: None,
            a: None,
            settings: AlgoConfig::default(),
        }
    }

    /// Settings with the displacement and any preset applied.
    pub fn resolved(&self, problem: Benchmark) -> AlgoConfig {
        let mut cfg = self.settings.clone();
        cfg.a0 = self.a.unwrap_or_else(|| problem.default_a());
        if let Some((design, mode, hold)) = self.algorithm.preset() {
            cfg.trigger = design;
            cfg.mode = mode;
            cfg.hold = hold;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuousConfig {
    /// Defaults to `10 / sqrt(mu)`.
    pub horizon: Option<f64>,
    pub step: f64,
}

impl Default for ContinuousConfig {
    fn default() -> Self {
        Self {
            horizon: None,
            step: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Benchmark,
    /// Diagonal of a custom quadratic `sum d_i x_i^2`.
    pub diag: Option<Vec<f64>>,
    /// Logistic dataset file; generated from `seed` when absent.
    pub dataset: Option<PathBuf>,
    pub seed: u64,
    pub runs: Vec<RunSpec>,
    pub out: PathBuf,
    /// Also write `plotdata.csv` next to the run files.
    pub plot_data: bool,
    pub continuous: ContinuousConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: Benchmark::Quadratic,
            diag: None,
            dataset: None,
            seed: DEFAULT_DATASET_SEED,
            runs: Algorithm::DEFAULT_SET.iter().map(|&a| RunSpec::new(a)).collect(),
            out: PathBuf::from("out"),
            plot_data: false,
            continuous: ContinuousConfig::default(),
        }
    }
}

/// Command-line values that replace config entries.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub problem: Option<Benchmark>,
    pub algorithms: Vec<Algorithm>,
    pub trigger: Option<Design>,
    pub mode: Option<Mode>,
    pub hold: Option<Hold>,
    pub a: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub plot_data: bool,
}

/// Problem instance shared by every run of an experiment.
pub struct Problem {
    pub oracle: ObjectiveOracle,
    pub params: FlowParams,
    pub start: State,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        let config = serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(problem) = o.problem {
            self.problem = problem;
        }
        if !o.algorithms.is_empty() {
            self.runs = o.algorithms.iter().map(|&a| RunSpec::new(a)).collect();
        }
        for run in &mut self.runs {
            let s = &mut run.settings;
            if let Some(trigger) = o.trigger {
                s.trigger = trigger;
            }
            if let Some(mode) = o.mode {
                s.mode = mode;
            }
            if let Some(hold) = o.hold {
                s.hold = hold;
            }
            if let Some(eps) = o.epsilon {
                s.epsilon = eps;
            }
            if let Some(max_iters) = o.max_iters {
                s.max_iters = max_iters;
            }
            if o.a.is_some() {
                run.a = o.a;
            }
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        self.plot_data |= o.plot_data;
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let bad = |msg: String| Err(UsageError(msg));
        if self.runs.is_empty() {
            return bad("no runs configured".into());
        }
        match self.problem {
            Benchmark::Quadratic if self.dataset.is_some() => return bad("a dataset only applies to the logistic problem".into()),
            Benchmark::Logistic if self.diag.is_some() => return bad("a diagonal only applies to the quadratic problem".into()),
            _ => {}
        }
        if !(self.continuous.step > 0.0) || self.continuous.horizon.is_some_and(|h| !(h > 0.0)) {
            return bad("continuous horizon and step must be positive".into());
        }
        let mut labels = HashSet::new();
        for run in &self.runs {
            if let Some(a) = run.a {
                if !(a >= 0.0 && a.is_finite()) {
                    return bad(format!("{}: displacement must be nonnegative, got {a}", run.algorithm));
                }
            }
            run.resolved(self.problem)
                .validate()
                .map_err(|e| UsageError(format!("{}: {e}", run.algorithm)))?;
            if let Some(label) = &run.label {
                if label.is_empty() || label.contains(['/', '\\']) {
                    return bad(format!("invalid label {label:?}"));
                }
                if !labels.insert(label.clone()) {
                    return bad(format!("duplicate label {label:?}"));
                }
            }
        }
        Ok(())
    }

    /// Output stems: explicit labels, else the algorithm name with a
    /// numeric suffix on repeats.
    pub fn labels(&self) -> Vec<String> {
        let taken: HashSet<&str> = self.runs.iter().filter_map(|r| r.label.as_deref()).collect();
        let mut used = HashSet::new();
        self.runs
            .iter()
            .map(|run| match &run.label {
                Some(label) => label.clone(),
                None => {
                    let base = run.algorithm.name();
                    let mut name = base.clone();
                    let mut n = 2;
                    while taken.contains(name.as_str()) || used.contains(&name) {
                        name = format!("{base}-{n}");
                        n += 1;
                    }
                    used.insert(name.clone());
                    name
                }
            })
            .collect()
    }

    pub fn problem(&self) -> anyhow::Result<Problem> {
        let oracle = match (self.problem, &self.diag, &self.dataset) {
            (Benchmark::Quadratic, Some(diag), _) => make_quadratic(diag).map_err(|e| UsageError(e.to_string()))?,
            (Benchmark::Logistic, _, Some(path)) => {
                let dataset = LogisticDataset::load(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
                make_logistic(&dataset)?
            }
            (benchmark, _, _) => benchmark.oracle(self.seed)?,
        };
        let params = FlowParams::new(&oracle, FlowParams::default_s(&oracle), 0.0)?;
        let start = start_state(&oracle, &params);
        Ok(Problem { oracle, params, start })
    }
}
