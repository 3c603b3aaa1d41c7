use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use prefmoo_core::moead::{GenerationRecord, Individual, OptimizerState, StmConfig};
use prefmoo_core::nums::map_with;
use prefmoo_core::problems::{ProblemConfig, ProblemSpec};
use prefmoo_core::rng::{derive_seed, Purpose};
use prefmoo_core::simplex::generate_das_dennis;
use prefmoo_core::{ReferenceSet, Roi, RoiSpec};
use serde::{Deserialize, Serialize};

use crate::error::{SessionError, SessionResult};

/// Body of `POST /sessions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub problem: ProblemConfig,
    pub roi: RoiSpec,
    /// Lattice divisions.
    pub h: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub optimizer: StmConfig,
}

/// Body of `POST /sessions/{id}/cycles`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleRequest {
    pub generations: usize,
    #[serde(default)]
    pub roi: Option<RoiSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Idle,
    Running,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleMetrics {
    pub ideal: Vec<f64>,
    pub mean_pf_residual: f64,
    pub max_pf_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub index: usize,
    pub roi: RoiSpec,
    pub pivot: Vec<f64>,
    pub eta: f64,
    pub generations: usize,
    pub seed: u64,
    pub reference_points: Vec<Vec<f64>>,
    /// Population after warm start and matching, before any variation.
    pub initial_population: Vec<Individual>,
    pub final_population: Vec<Individual>,
    pub history: Vec<GenerationRecord>,
    pub metrics: CycleMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub index: usize,
    pub z_r: Vec<f64>,
    pub tau: f64,
    pub keep_boundary: bool,
    pub generations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub cycle: usize,
    pub generation: usize,
    pub total: usize,
    pub fraction: f64,
}

/// Read-only view of a session, as returned by `GET /sessions/{id}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: String,
    pub status: Status,
    pub problem: ProblemSpec,
    pub seed: u64,
    pub roi: RoiSpec,
    pub pivot: Vec<f64>,
    pub eta: f64,
    pub reference_points: Vec<Vec<f64>>,
    pub population: Vec<Individual>,
    /// Generations run over all completed cycles.
    pub generation: usize,
    pub history: Vec<CycleSummary>,
    pub progress: Option<Progress>,
    pub last_error: Option<String>,
}

struct SessionData {
    problem: ProblemSpec,
    seed: u64,
    h: usize,
    optimizer: StmConfig,
    lattice: ReferenceSet,
    roi: Roi,
    refs: ReferenceSet,
    population: Vec<Individual>,
    generation: usize,
    cycles: Vec<CycleRecord>,
    last_error: Option<String>,
}

struct SessionHandle {
    id: String,
    data: Mutex<SessionData>,
    running: AtomicBool,
    cancel: AtomicBool,
    progress_gen: AtomicUsize,
    progress_total: AtomicUsize,
}

impl SessionHandle {
    fn data(&self) -> std::sync::MutexGuard<'_, SessionData> {
        self.data.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn snapshot(&self) -> SessionSnapshot {
        let d = self.data();
        let running = self.running.load(Ordering::Acquire);
        let progress = running.then(|| {
            let generation = self.progress_gen.load(Ordering::Relaxed);
            let total = self.progress_total.load(Ordering::Relaxed);
            Progress {
                cycle: d.cycles.len(),
                generation,
                total,
                fraction: if total == 0 { 0.0 } else { generation as f64 / total as f64 },
            }
        });
        SessionSnapshot {
            id: self.id.clone(),
            status: if running { Status::Running } else { Status::Idle },
            problem: d.problem,
            seed: d.seed,
            roi: d.roi.spec.clone(),
            pivot: d.roi.pivot.coords().to_vec(),
            eta: d.roi.eta,
            reference_points: points_of(&d.refs),
            population: d.population.clone(),
            generation: d.generation,
            history: d
                .cycles
                .iter()
                .map(|c| CycleSummary {
                    index: c.index,
                    z_r: c.roi.z_r.clone(),
                    tau: c.roi.tau,
                    keep_boundary: c.roi.keep_boundary,
                    generations: c.generations,
                })
                .collect(),
            progress,
            last_error: d.last_error.clone(),
        }
    }
}

fn points_of(refs: &ReferenceSet) -> Vec<Vec<f64>> {
    refs.iter().map(|p| p.coords().to_vec()).collect()
}

fn derive_roi(spec: &RoiSpec, lattice: &ReferenceSet, h: usize, pointer: &str) -> SessionResult<(Roi, ReferenceSet)> {
    let roi = spec
        .derive(lattice.m, h)
        .map_err(|e| SessionError::from_core(e, Some(pointer)))?;
    let refs = map_with(lattice, &roi).map_err(|e| SessionError::from_core(e, Some(pointer)))?;
    Ok((roi, refs))
}

/// Owns all sessions. Readers get copies; each session's state is only
/// replaced by the cycle that holds its running flag.
pub struct SessionManager {
    sessions: RwLock<HashMap<String, Arc<SessionHandle>>>,
    next_id: AtomicU64,
    persist_dir: Option<PathBuf>,
}

impl Default for SessionManager {
    fn default() -> Self {
        Self::new(None)
    }
}

impl SessionManager {
    /// With `persist_dir`, every committed cycle writes `<dir>/<id>.json`.
    pub fn new(persist_dir: Option<PathBuf>) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            persist_dir,
        }
    }

    fn handle(&self, id: &str) -> SessionResult<Arc<SessionHandle>> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(id.to_owned()))
    }

    pub fn create(&self, req: CreateSession) -> SessionResult<SessionSnapshot> {
        let problem = req
            .problem
            .build()
            .map_err(|e| SessionError::from_core(e, Some("/problem")))?;
        req.optimizer
            .validate()
            .map_err(|e| SessionError::from_core(e, Some("/optimizer")))?;
        let lattice = generate_das_dennis(problem.m, req.h)
            .map_err(|e| SessionError::from_core(e, Some("/h")))?;
        let (roi, refs) = derive_roi(&req.roi, &lattice, req.h, "/roi")?;
        let state = OptimizerState::initialize(&problem, &refs, &req.optimizer, req.seed, None)
            .map_err(|e| SessionError::from_core(e, None))?;

        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let handle = Arc::new(SessionHandle {
            id: id.clone(),
            data: Mutex::new(SessionData {
                problem,
                seed: req.seed,
                h: req.h,
                optimizer: req.optimizer,
                lattice,
                roi,
                refs,
                population: state.population,
                generation: 0,
                cycles: Vec::new(),
                last_error: None,
            }),
            running: AtomicBool::new(false),
            cancel: AtomicBool::new(false),
            progress_gen: AtomicUsize::new(0),
            progress_total: AtomicUsize::new(0),
        });
        let snap = handle.snapshot();
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, handle);
        Ok(snap)
    }

    pub fn get(&self, id: &str) -> SessionResult<SessionSnapshot> {
        Ok(self.handle(id)?.snapshot())
    }

    pub fn cycle(&self, id: &str, index: usize) -> SessionResult<CycleRecord> {
        let h = self.handle(id)?;
        let d = h.data();
        d.cycles
            .get(index)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(format!("{id}/cycles/{index}")))
    }

    /// Removes the session and asks a running cycle to stop.
    pub fn delete(&self, id: &str) -> SessionResult<()> {
        let h = self
            .sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .remove(id)
            .ok_or_else(|| SessionError::NotFound(id.to_owned()))?;
        h.cancel.store(true, Ordering::Release);
        Ok(())
    }

    /// Cancels every running cycle; used on shutdown.
    pub fn cancel_all(&self) {
        for h in self.sessions.read().unwrap_or_else(|e| e.into_inner()).values() {
            if h.running.load(Ordering::Acquire) {
                h.cancel.store(true, Ordering::Release);
            }
        }
    }

    /// Validates the request and claims the session. The returned ticket
    /// runs the cycle; until it is dropped further cycles are refused.
    pub fn begin_cycle(&self, id: &str, req: CycleRequest) -> SessionResult<CycleTicket> {
        let handle = self.handle(id)?;
        if handle
            .running
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .is_err()
        {
            return Err(SessionError::Conflict(format!("session {id} already has a running cycle")));
        }
        let guard = RunningGuard(handle.clone());
        let plan = {
            let d = handle.data();
            let (roi, refs) = match &req.roi {
                Some(spec) => derive_roi(spec, &d.lattice, d.h, "/roi")?,
                None => (d.roi.clone(), d.refs.clone()),
            };
            CyclePlan {
                index: d.cycles.len(),
                roi,
                refs,
                warm: d.population.iter().map(|i| i.x.clone()).collect(),
                problem: d.problem,
                config: d.optimizer,
                generations: req.generations,
                seed: derive_seed(d.seed, Purpose::Cycle, d.cycles.len() as u64),
            }
        };
        handle.progress_gen.store(0, Ordering::Relaxed);
        handle.progress_total.store(req.generations, Ordering::Relaxed);
        Ok(CycleTicket {
            guard,
            plan,
            persist_dir: self.persist_dir.clone(),
        })
    }

    /// Runs a cycle to completion on the calling thread.
    pub fn run_cycle(&self, id: &str, req: CycleRequest) -> SessionResult<CycleRecord> {
        self.begin_cycle(id, req)?.execute()
    }
}

struct RunningGuard(Arc<SessionHandle>);

impl Drop for RunningGuard {
    fn drop(&mut self) {
        self.0.running.store(false, Ordering::Release);
    }
}

struct CyclePlan {
    index: usize,
    roi: Roi,
    refs: ReferenceSet,
    warm: Vec<Vec<f64>>,
    problem: ProblemSpec,
    config: StmConfig,
    generations: usize,
    seed: u64,
}

/// A claimed, validated cycle waiting to run.
pub struct CycleTicket {
    guard: RunningGuard,
    plan: CyclePlan,
    persist_dir: Option<PathBuf>,
}

impl CycleTicket {
    pub fn index(&self) -> usize {
        self.plan.index
    }

    /// Runs the optimizer and commits the result unless the session was
    /// cancelled meanwhile. Failures are also recorded in `last_error`.
    pub fn execute(self) -> SessionResult<CycleRecord> {
        let handle = self.guard.0.clone();
        let result = self.run(&handle);
        match &result {
            Ok(_) | Err(SessionError::Cancelled) => {}
            Err(e) => handle.data().last_error = Some(e.to_string()),
        }
        result
    }

    fn run(&self, handle: &SessionHandle) -> SessionResult<CycleRecord> {
        let p = &self.plan;
        let core = |e| SessionError::from_core(e, None);
        let mut state = OptimizerState::initialize(&p.problem, &p.refs, &p.config, p.seed, Some(&p.warm))
            .map_err(core)?;
        let initial_population = state.population.clone();
        let n = state.population.len();
        let mut history = vec![state.record(n)];
        for g in 0..p.generations {
            if handle.cancel.load(Ordering::Acquire) {
                return Err(SessionError::Cancelled);
            }
            state = state.evolve_generation(&p.problem, &p.config).map_err(core)?;
            history.push(state.record(n * (g + 2)));
            handle.progress_gen.store(g + 1, Ordering::Relaxed);
        }
        let residuals: Vec<f64> = state.population.iter().map(|i| p.problem.pf_residual(&i.f)).collect();
        let record = CycleRecord {
            index: p.index,
            roi: p.roi.spec.clone(),
            pivot: p.roi.pivot.coords().to_vec(),
            eta: p.roi.eta,
            generations: p.generations,
            seed: p.seed,
            reference_points: points_of(&p.refs),
            initial_population,
            final_population: state.population.clone(),
            history,
            metrics: CycleMetrics {
                ideal: state.ideal.clone(),
                mean_pf_residual: residuals.iter().sum::<f64>() / n as f64,
                max_pf_residual: residuals.iter().cloned().fold(0.0, f64::max),
            },
        };

        let mut d = handle.data();
        if handle.cancel.load(Ordering::Acquire) {
            return Err(SessionError::Cancelled);
        }
        if let Some(dir) = &self.persist_dir {
            persist(dir, handle, &d, &record)?;
        }
        d.roi = p.roi.clone();
        d.refs = p.refs.clone();
        d.population = state.population;
        d.generation += p.generations;
        d.cycles.push(record.clone());
        d.last_error = None;
        Ok(record)
    }
}

#[derive(Serialize)]
struct Persisted<'a> {
    id: &'a str,
    problem: ProblemSpec,
    seed: u64,
    h: usize,
    optimizer: &'a StmConfig,
    cycles: Vec<&'a CycleRecord>,
}

/// Writes the session including `pending` through a temporary file, so a
/// crash never leaves a half-written snapshot.
fn persist(dir: &std::path::Path, handle: &SessionHandle, d: &SessionData, pending: &CycleRecord) -> SessionResult<()> {
    let io = |e: std::io::Error| SessionError::Internal(format!("persisting session: {e}"));
    std::fs::create_dir_all(dir).map_err(io)?;
    let doc = Persisted {
        id: &handle.id,
        problem: d.problem,
        seed: d.seed,
        h: d.h,
        optimizer: &d.optimizer,
        cycles: d.cycles.iter().chain(std::iter::once(pending)).collect(),
    };
    let json = serde_json::to_vec_pretty(&doc).map_err(|e| SessionError::Internal(e.to_string()))?;
    let tmp = dir.join(format!("{}.json.tmp", handle.id));
    std::fs::write(&tmp, json).map_err(io)?;
    std::fs::rename(&tmp, dir.join(format!("{}.json", handle.id))).map_err(io)
}
