use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::UsageError;

pub const PLOT_COLUMNS: [&str; 7] = ["series", "k", "t", "log10_f_gap", "log10_lyapunov", "delta", "clamped"];
/// `log10` values are clamped here; exact zeros appear after convergence.
pub const LOG_FLOOR: f64 = -16.0;

fn clamped_log(field: &str) -> anyhow::Result<(String, bool)> {
    if field.is_empty() {
        return Ok((String::new(), false));
    }
    let value: f64 = field.parse().with_context(|| format!("not a number: {field:?}"))?;
    let log = value.log10();
    if log.is_nan() || log < LOG_FLOOR {
        Ok((LOG_FLOOR.to_string(), true))
    } else {
        Ok((log.to_string(), false))
    }
}

fn series_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Long-format rows from run CSVs, one series per input file. Returns the
/// number of data rows written.
pub fn write_plot_data<W: Write>(inputs: &[PathBuf], out: W) -> anyhow::Result<usize> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(PLOT_COLUMNS)?;
    let mut rows = 0;
    for path in inputs {
        if !path.is_file() {
            return Err(UsageError(format!("missing input file {}", path.display())).into());
        }
        let series = series_name(path);
        let mut reader = csv::Reader::from_path(path).with_context(|| path.display().to_string())?;
        let headers = reader.headers()?.clone();
        let column = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| UsageError(format!("{}: no column {name:?}", path.display())))
        };
        let (k, t, delta, gap, lyap) = (column("k")?, column("t")?, column("delta")?, column("f_gap")?, column("lyapunov")?);
        for (line, record) in reader.records().enumerate() {
            let record = record.with_context(|| format!("{} row {}", path.display(), line + 1))?;
            let (log_gap, gap_clamped) = clamped_log(&record[gap])?;
            let (log_lyap, lyap_clamped) = clamped_log(&record[lyap])?;
            writer.write_record([
                series.as_str(),
                &record[k],
                &record[t],
                &log_gap,
                &log_lyap,
                &record[delta],
                if gap_clamped || lyap_clamped { "true" } else { "false" },
            ])?;
            rows += 1;
        }
    }
    writer.flush()?;
    Ok(rows)
}

pub fn cmd_plotdata(inputs: &[PathBuf], out: Option<&Path>) -> anyhow::Result<usize> {
    if inputs.is_empty() {
        return Err(UsageError("no input files".into()).into());
    }
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| path.display().to_string())?;
            write_plot_data(inputs, std::io::BufWriter::new(file))
        }
        None => write_plot_data(inputs, std::io::stdout().lock()),
    }
}
