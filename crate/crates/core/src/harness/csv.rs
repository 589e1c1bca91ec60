use std::fs;
use std::path::{Path, PathBuf};

use super::run::ExperimentResult;
use crate::error::Result;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_COLUMNS: [&str; 8] = [
    "estimator", "avg_est", "std_dev", "avg_time_s", "p_max", "hit_rate", "b", "T",
];

/// Six significant digits in scientific notation, e.g. `1.05000e-2`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.5e}")
    }
}

pub fn summary_csv(result: &ExperimentResult) -> String {
    let cfg = &result.config;
    let params = cfg.params();
    let mut header: Vec<&str> = SUMMARY_COLUMNS.to_vec();
    header.extend(params.iter().map(|(k, _)| *k));
    let mut out = header.join(",");
    out.push('\n');
    for outcome in &result.outcomes {
        let (avg, sd, time, hit) = match &outcome.run {
            Ok(run) => {
                let r = &run.report;
                // runtimes are reported at 0.1 s resolution
                let time = (r.avg_runtime_s * 10.0).round() / 10.0;
                (r.avg_est, r.std_dev, time, r.hit_rate)
            }
            Err(_) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        let mut row = vec![
            outcome.kind.name().to_string(),
            sci(avg),
            sci(sd),
            sci(time),
            sci(result.p_max),
            sci(hit),
            cfg.batches.to_string(),
            cfg.t.to_string(),
        ];
        row.extend(params.iter().map(|(_, v)| v.clone()));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `None` when tracing is off.
pub fn trace_csv(result: &ExperimentResult) -> Option<String> {
    if result.config.trace_every == 0 {
        return None;
    }
    let mut out = String::from("step,estimate,estimator\n");
    for outcome in &result.outcomes {
        if let Ok(run) = &outcome.run {
            for p in &run.trace {
                out.push_str(&format!("{},{},{}\n", p.step, sci(p.estimate), outcome.kind.name()));
            }
        }
    }
    Some(out)
}

/// Writes `summary.csv` and, when tracing, `trace.csv` into `dir`, creating
/// it if needed. Returns the paths written.
pub fn emit_csv(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let summary = dir.join(SUMMARY_FILE);
    fs::write(&summary, summary_csv(result))?;
    written.push(summary);
    if let Some(trace) = trace_csv(result) {
        let path = dir.join(TRACE_FILE);
        fs::write(&path, trace)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sci(0.0105), "1.05000e-2");
        assert_eq!(sci(2.00025e-9), "2.00025e-9");
        assert_eq!(sci(0.0), "0.00000e0");
        assert_eq!(sci(f64::NAN), "NaN");
    }
}
