//! `prefmoo run`: one optimizer run per seed, written to per-seed
//! directories, followed by a manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use prefmoo_core::dat;
use prefmoo_core::moead::{run, RunResult};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::error::{CliError, CliResult};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "PREFMOO_THREADS";

pub fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::validation(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedManifest {
    pub seed: u64,
    pub dir: String,
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub config_sha256: String,
    pub reference_points: usize,
    pub references_sha256: String,
    pub seeds: Vec<SeedManifest>,
}

pub fn population_csv(res: &RunResult) -> String {
    let pop = res.population();
    let n = pop.first().map_or(0, |i| i.x.len());
    let m = pop.first().map_or(0, |i| i.f.len());
    let mut out = String::new();
    let header: Vec<String> = (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=m).map(|i| format!("f{i}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for ind in pop {
        let row: Vec<String> = ind.x.iter().chain(&ind.f).map(|v| dat::format_coord(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn history_csv(res: &RunResult) -> String {
    let m = res.history.first().map_or(0, |r| r.ideal.len());
    let mut out = String::from("generation,evaluations,mean_aggregation");
    for i in 1..=m {
        let _ = write!(out, ",ideal{i}");
    }
    out.push('\n');
    for r in &res.history {
        let _ = write!(out, "{},{},{}", r.generation, r.evaluations, dat::format_coord(r.mean_aggregation));
        for z in &r.ideal {
            let _ = write!(out, ",{}", dat::format_coord(*z));
        }
        out.push('\n');
    }
    out
}

fn write_hashed(dir: &Path, name: &str, content: &str, files: &mut BTreeMap<String, String>) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    files.insert(name.to_owned(), hex(&Sha256::digest(content.as_bytes())));
    Ok(())
}

/// Runs every seed and returns the manifest. `output_dir` overrides the
/// configured directory.
pub fn execute(cfg: &RunConfig, output_dir: Option<&Path>, threads: Option<usize>) -> CliResult<Manifest> {
    cfg.validate()?;
    let problem = cfg.problem.build()?;
    let refs = cfg.references.build(problem.m).map_err(|e| e.under("/references"))?;
    let out: PathBuf = output_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&out).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    let refs_text = dat::to_string(&refs.points);
    std::fs::write(out.join("references.dat"), &refs_text)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    let seeds: Vec<CliResult<SeedManifest>> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let res = run(&problem, &refs, cfg.generations, seed, None, &cfg.optimizer)?;
                let name = format!("seed-{seed}");
                let dir = out.join(&name);
                std::fs::create_dir_all(&dir)?;
                let mut files = BTreeMap::new();
                write_hashed(&dir, "population.csv", &population_csv(&res), &mut files)?;
                write_hashed(&dir, "history.csv", &history_csv(&res), &mut files)?;
                let objectives: Vec<&Vec<f64>> = res.population().iter().map(|i| &i.f).collect();
                write_hashed(&dir, "final.dat", &dat::to_string(&objectives), &mut files)?;
                Ok(SeedManifest { seed, dir: name, files })
            })
            .collect()
    });
    let seeds = seeds.into_iter().collect::<CliResult<Vec<_>>>()?;

    let manifest = Manifest {
        tool: "prefmoo",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        config_sha256: cfg.hash(),
        reference_points: refs.len(),
        references_sha256: hex(&Sha256::digest(refs_text.as_bytes())),
        seeds,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(out.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}
