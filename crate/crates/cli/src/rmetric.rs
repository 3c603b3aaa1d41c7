//! `prefmoo rmetric`: R-IGD and R-HV for a set of result files.

use std::path::{Path, PathBuf};

use prefmoo_core::dat;
use prefmoo_core::metrics::{r_hv, r_igd, RMetricConfig};

use crate::config::RMetricFile;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub run: String,
    pub seed: Option<u64>,
    pub r_igd: Option<f64>,
    pub r_hv: Option<f64>,
}

/// Table cell in the `mean(var)` style, e.g. `8.947E-2(1.51E-4)`.
pub fn format_cell(mean: f64, var: f64) -> String {
    format!("{mean:.3E}({var:.2E})")
}

/// Mean and sample variance; `None` when empty.
pub fn mean_var(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var))
}

/// Splits `<run>/seed-<s>/final.dat` into run label and seed.
pub fn label(path: &Path) -> (String, Option<u64>) {
    let parent = path.parent();
    let seed = parent
        .and_then(|p| p.file_name())
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_prefix("seed-"))
        .and_then(|s| s.parse().ok());
    match seed {
        Some(s) => {
            let run = parent
                .and_then(Path::parent)
                .map(|p| p.display().to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| ".".into());
            (run, Some(s))
        }
        None => (path.display().to_string(), None),
    }
}

pub fn expand(patterns: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for pat in patterns {
        let entries = glob::glob(pat).map_err(|e| CliError::validation(format!("bad pattern {pat:?}: {e}")))?;
        for entry in entries {
            paths.push(entry.map_err(|e| CliError::Runtime(e.to_string()))?);
        }
    }
    paths.sort();
    paths.dedup();
    if paths.is_empty() {
        return Err(CliError::validation(format!("no result files match {patterns:?}")));
    }
    Ok(paths)
}

/// Builds the metric configuration, loading or sampling the PF reference.
pub fn metric_config(file: &RMetricFile, base: &Path) -> CliResult<RMetricConfig> {
    let mut cfg = RMetricConfig::new(file.z_r.clone());
    cfg.z_w = file.z_w.clone();
    if let Some(e) = file.extent {
        cfg.extent = e;
    }
    cfg.hv_reference = file.hv_reference.clone();
    if let Some(s) = file.mc_samples {
        cfg.mc_samples = s;
    }
    cfg.mc_seed = file.mc_seed;
    cfg.pf_reference = match (&file.pf_file, &file.pf_problem) {
        (Some(_), Some(_)) => {
            return Err(CliError::validation("give pf_file or pf_problem, not both").at("/pf_problem"))
        }
        (Some(p), None) => Some(dat::read_file(base.join(p))?),
        (None, Some(problem)) => {
            let spec = problem.build().map_err(|e| CliError::from(e).at("/pf_problem"))?;
            Some(spec.sample_pf(file.pf_count, 0).map_err(|e| CliError::from(e).at("/pf_count"))?)
        }
        (None, None) => {
            return Err(CliError::validation("a PF reference (pf_file or pf_problem) is required").at("/pf_file"))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn evaluate(paths: &[PathBuf], cfg: &RMetricConfig) -> CliResult<Vec<Row>> {
    paths
        .iter()
        .map(|p| {
            let points = dat::read_file(p)?;
            let (run, seed) = label(p);
            Ok(Row {
                run,
                seed,
                r_igd: r_igd(&points, cfg)?,
                r_hv: r_hv(&points, cfg)?,
            })
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "--".into(), |x| format!("{x:e}"))
}

/// CSV `run,seed,r_igd,r_hv` with one `mean(var)` row appended per run.
pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from("run,seed,r_igd,r_hv\n");
    let mut runs: Vec<&str> = Vec::new();
    for r in rows {
        if !runs.contains(&r.run.as_str()) {
            runs.push(&r.run);
        }
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", r.run, seed, cell(r.r_igd), cell(r.r_hv)));
    }
    for run in runs {
        let summary = |get: fn(&Row) -> Option<f64>| {
            let vals: Vec<f64> = rows.iter().filter(|r| r.run == run).filter_map(get).collect();
            mean_var(&vals).map_or_else(|| "--".into(), |(m, v)| format_cell(m, v))
        };
        out.push_str(&format!("{run},mean(var),{},{}\n", summary(|r| r.r_igd), summary(|r| r.r_hv)));
    }
    out
}
