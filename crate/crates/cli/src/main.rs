use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prefmoo_cli::config::{read_json, RMetricFile, RunConfig};
use prefmoo_cli::{rmetric, run, CliError, CliResult, LatticeSource};
use prefmoo_core::dat;

#[derive(Parser)]
#[command(name = "prefmoo", version, about = "Preference-biased reference points for MOEA/D")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a Das-Dennis lattice as a .dat file.
    GenRefs {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        h: usize,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bias a lattice toward one or more regions of interest.
    MapRefs {
        /// Lattice .dat file; otherwise generated from --m/--h.
        #[arg(long, conflicts_with_all = ["m", "h"])]
        input: Option<PathBuf>,
        #[arg(long, requires = "h")]
        m: Option<usize>,
        #[arg(long, requires = "m")]
        h: Option<usize>,
        /// Region as JSON or @file, e.g. '{"z_r":[0.7,0.8,0.5],"tau":0.3}'. Repeatable.
        #[arg(long = "roi")]
        rois: Vec<String>,
        /// Per-layer contraction factors, e.g. 'none,0.5,0.25'.
        #[arg(long)]
        layer_tau: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the optimizer for every seed of a JSON config.
    Run {
        config: PathBuf,
        /// Overrides output_dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// R-IGD / R-HV of result files as CSV.
    Rmetric {
        /// JSON settings (z_r, extent, pf_file or pf_problem, ...).
        #[arg(long)]
        config: PathBuf,
        /// Result files or glob patterns, e.g. 'results/*/seed-*/final.dat'.
        #[arg(required = true)]
        results: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the interactive session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory served for unmatched paths (the console bundle).
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Write a JSON snapshot per committed cycle here.
        #[arg(long)]
        persist: Option<PathBuf>,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::GenRefs { m, h, layers, out } => {
            let points = prefmoo_cli::gen_refs(m, h, layers)?;
            emit(out.as_ref(), &dat::to_string(&points))?;
            eprintln!("{} points", points.len());
        }
        Command::MapRefs {
            input,
            m,
            h,
            rois,
            layer_tau,
            out,
        } => {
            let source = match (input, m, h) {
                (Some(p), _, _) => LatticeSource::File(p),
                (None, Some(m), Some(h)) => LatticeSource::Generate { m, h },
                _ => return Err(CliError::validation("give --input or both --m and --h")),
            };
            let rois = rois
                .iter()
                .map(|r| prefmoo_cli::parse_roi_arg(r))
                .collect::<CliResult<Vec<_>>>()?;
            let taus = layer_tau.as_deref().map(prefmoo_cli::parse_layer_tau).transpose()?;
            let set = prefmoo_cli::map_refs(&source, &rois, taus.as_deref())?;
            emit(out.as_ref(), &dat::to_string(&set.points))?;
            eprintln!("{} points", set.len());
        }
        Command::Run { config, out } => {
            let cfg: RunConfig = read_json(&config)?;
            let manifest = run::execute(&cfg, out.as_deref(), run::thread_cap()?)?;
            let dir = out.unwrap_or(cfg.output_dir);
            eprintln!("{} seeds written to {}", manifest.seeds.len(), dir.display());
        }
        Command::Rmetric { config, results, out } => {
            let file: RMetricFile = read_json(&config)?;
            let base = config.parent().map(PathBuf::from).unwrap_or_default();
            let cfg = rmetric::metric_config(&file, &base)?;
            let paths = rmetric::expand(&results)?;
            let rows = rmetric::evaluate(&paths, &cfg)?;
            emit(out.as_ref(), &rmetric::to_csv(&rows))?;
        }
        Command::Serve {
            port,
            host,
            static_dir,
            persist,
        } => prefmoo_cli::serve(SocketAddr::new(host, port), static_dir, persist)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
