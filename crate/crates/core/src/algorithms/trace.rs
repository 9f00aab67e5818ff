use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::State;
use crate::triggers::StepDiagnostic;
use crate::Result;

/// Leading CSV columns; one `x_i` and one `v_i` column per coordinate follow.
pub const CSV_FIXED_COLUMNS: [&str; 7] = ["k", "t", "delta", "a", "grad_norm", "f_gap", "lyapunov"];

/// State `p_k` at time `t_k` and the step taken from it.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub t: f64,
    /// `Delta_k`; `None` on the final record.
    pub delta: Option<f64>,
    pub state: State,
    /// Displacement used for the step out of `p_k`.
    pub a: f64,
    pub grad_norm: f64,
    pub f_gap: Option<f64>,
    pub lyapunov: Option<f64>,
    /// Shrinks of `a` performed before the step was accepted.
    pub inner_retries: usize,
    /// The step hit `t_max` without the bound crossing zero.
    pub capped: bool,
}

#[derive(Clone, Debug, Default)]
pub struct RunTrace {
    pub algorithm: String,
    pub records: Vec<IterationRecord>,
    /// The gradient-norm tolerance was met.
    pub converged: bool,
    pub diagnostics: Vec<StepDiagnostic>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
    pub final_grad_norm: f64,
    pub min_delta: Option<f64>,
    pub max_delta: Option<f64>,
    pub mean_delta: Option<f64>,
    pub t_final: f64,
    pub capped_steps: usize,
    pub inner_retries: usize,
}

impl RunTrace {
    pub fn new(algorithm: impl Into<String>) -> Self {
        Self {
            algorithm: algorithm.into(),
            ..Self::default()
        }
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.iter().filter(|r| r.delta.is_some()).count()
    }

    pub fn steps(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.delta).collect()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn dim(&self) -> usize {
        self.records.first().map_or(0, |r| r.state.dim())
    }

    pub fn summary(&self, wall_time_s: f64) -> RunSummary {
        let steps = self.steps();
        let (min, max, sum) = steps.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), &d| {
            (lo.min(d), hi.max(d), s + d)
        });
        let any = !steps.is_empty();
        RunSummary {
            algorithm: self.algorithm.clone(),
            iterations: steps.len(),
            converged: self.converged,
            wall_time_s,
            final_grad_norm: self.last().map_or(f64::NAN, |r| r.grad_norm),
            min_delta: any.then_some(min),
            max_delta: any.then_some(max),
            mean_delta: any.then(|| sum / steps.len() as f64),
            t_final: self.last().map_or(0.0, |r| r.t),
            capped_steps: self.records.iter().filter(|r| r.capped).count(),
            inner_retries: self.records.iter().map(|r| r.inner_retries).sum(),
        }
    }

    pub fn csv_header(dim: usize) -> Vec<String> {
        CSV_FIXED_COLUMNS
            .iter()
            .map(|c| c.to_string())
            .chain((0..dim).map(|i| format!("x_{i}")))
            .chain((0..dim).map(|i| format!("v_{i}")))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(Self::csv_header(self.dim()))?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for r in &self.records {
            let mut row = vec![
                r.k.to_string(),
                r.t.to_string(),
                opt(r.delta),
                r.a.to_string(),
                r.grad_norm.to_string(),
                opt(r.f_gap),
                opt(r.lyapunov),
            ];
            row.extend(r.state.x.iter().chain(r.state.v.iter()).map(|c| c.to_string()));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}
