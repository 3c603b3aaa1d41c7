//! Command-line front end. The binary is a thin clap layer over the
//! functions here.

pub mod config;
pub mod error;
pub mod rmetric;
pub mod run;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use prefmoo_core::simplex::{generate_das_dennis, generate_multilayer, ReferencePoint};
use prefmoo_core::{dat, ReferenceSet, RoiSpec};
use prefmoo_session::SessionManager;

pub use error::{CliError, CliResult};

/// Lattice points, `layers` copies back to back.
pub fn gen_refs(m: usize, h: usize, layers: usize) -> CliResult<Vec<ReferencePoint>> {
    if layers == 1 {
        return Ok(generate_das_dennis(m, h)?.points);
    }
    Ok(generate_multilayer(m, h, layers)?
        .into_iter()
        .flat_map(|l| l.points)
        .collect())
}

/// Accepts inline JSON or `@path`.
pub fn parse_roi_arg(arg: &str) -> CliResult<RoiSpec> {
    match arg.strip_prefix('@') {
        Some(path) => config::read_json(Path::new(path)),
        None => config::parse_json(arg),
    }
}

/// Parses `0.5,none,0.25` into per-layer factors.
pub fn parse_layer_tau(arg: &str) -> CliResult<Vec<Option<f64>>> {
    arg.split(',')
        .map(|t| match t.trim() {
            "none" | "null" | "-" => Ok(None),
            v => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::validation(format!("bad layer factor {v:?}"))),
        })
        .collect()
}

pub enum LatticeSource {
    File(PathBuf),
    Generate { m: usize, h: usize },
}

pub fn map_refs(
    source: &LatticeSource,
    rois: &[RoiSpec],
    layer_tau: Option<&[Option<f64>]>,
) -> CliResult<ReferenceSet> {
    let lattice = match source {
        LatticeSource::File(p) => dat::read_reference_set(p)?,
        LatticeSource::Generate { m, h } => generate_das_dennis(*m, *h)?,
    };
    let (single, multi): (Option<&RoiSpec>, &[RoiSpec]) = match rois {
        [] => (None, &[]),
        [one] => (Some(one), &[]),
        many => (None, many),
    };
    config::build_references(&lattice, single, multi, layer_tau)
}

/// Binds `addr` and serves sessions until Ctrl-C.
pub fn serve(addr: SocketAddr, static_dir: Option<PathBuf>, persist_dir: Option<PathBuf>) -> CliResult<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {addr}: {e}")))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        let manager = Arc::new(SessionManager::new(persist_dir));
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            eprintln!("shutting down");
        };
        prefmoo_session::api::serve(listener, manager, static_dir.as_deref(), shutdown).await?;
        Ok(())
    })
}
