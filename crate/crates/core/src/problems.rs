//! ZDT1 and DTLZ1-4 with analytic Pareto-front samplers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::simplex::{binomial, generate_das_dennis, ReferencePoint};

/// Bias exponent of DTLZ4.
pub const DTLZ4_ALPHA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ProblemKind {
    Zdt1,
    Dtlz1,
    Dtlz2,
    Dtlz3,
    Dtlz4,
}

impl ProblemKind {
    /// Distance-variable count `k` with `n = m - 1 + k`.
    pub fn default_k(self) -> usize {
        match self {
            ProblemKind::Zdt1 => 29,
            ProblemKind::Dtlz1 => 5,
            _ => 10,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Zdt1 => "ZDT1",
            ProblemKind::Dtlz1 => "DTLZ1",
            ProblemKind::Dtlz2 => "DTLZ2",
            ProblemKind::Dtlz3 => "DTLZ3",
            ProblemKind::Dtlz4 => "DTLZ4",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ZDT1" => Ok(ProblemKind::Zdt1),
            "DTLZ1" => Ok(ProblemKind::Dtlz1),
            "DTLZ2" => Ok(ProblemKind::Dtlz2),
            "DTLZ3" => Ok(ProblemKind::Dtlz3),
            "DTLZ4" => Ok(ProblemKind::Dtlz4),
            other => Err(Error::Validation(format!("unknown problem {other:?}"))),
        }
    }
}

/// Problem selection as written in configuration files; `n` defaults to
/// the suite-standard variable count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemSpec> {
        match self.n {
            Some(n) => ProblemSpec::with_variables(self.kind, self.m, n),
            None => ProblemSpec::new(self.kind, self.m),
        }
    }
}

/// A benchmark instance. All variables live in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub m: usize,
    pub n: usize,
}

impl ProblemSpec {
    /// Instance with the suite-standard variable count.
    pub fn new(kind: ProblemKind, m: usize) -> Result<Self> {
        let n = match kind {
            ProblemKind::Zdt1 => 30,
            _ => m.saturating_sub(1) + kind.default_k(),
        };
        Self::with_variables(kind, m, n)
    }

    pub fn with_variables(kind: ProblemKind, m: usize, n: usize) -> Result<Self> {
        match kind {
            ProblemKind::Zdt1 if m != 2 => {
                return Err(Error::Validation(format!("ZDT1 has 2 objectives, got m = {m}")))
            }
            ProblemKind::Zdt1 if n < 2 => {
                return Err(Error::Validation("ZDT1 needs n >= 2".into()))
            }
            _ if m < 2 => return Err(Error::Validation(format!("m must be >= 2, got {m}"))),
            ProblemKind::Zdt1 => {}
            _ if n < m => {
                return Err(Error::Validation(format!(
                    "{kind} with m = {m} needs n >= m, got {n}"
                )))
            }
            _ => {}
        }
        Ok(Self { kind, m, n })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    /// Objective vector of `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Validation(format!(
                "{} expects {} variables, got {}",
                self.kind,
                self.n,
                x.len()
            )));
        }
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Validation(format!("x[{i}] = {v} outside [0, 1]")));
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Objective vector of an in-bounds `x` of the right length.
    pub fn evaluate_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            ProblemKind::Zdt1 => zdt1(x),
            ProblemKind::Dtlz1 => dtlz1(x, self.m),
            ProblemKind::Dtlz2 => dtlz_sphere(x, self.m, sphere_g(&x[self.m - 1..]), 1.0),
            ProblemKind::Dtlz3 => dtlz_sphere(x, self.m, rastrigin_g(&x[self.m - 1..]), 1.0),
            ProblemKind::Dtlz4 => {
                dtlz_sphere(x, self.m, sphere_g(&x[self.m - 1..]), DTLZ4_ALPHA)
            }
        }
    }

    /// `count` points on the analytic front, deterministic in `seed`.
    ///
    /// ZDT1 uses an even grid in `f1`. DTLZ fronts use the smallest lattice
    /// with at least `count` points for `m <= 5` (thinned by a seeded draw
    /// when it overshoots) and seeded uniform directions for `m > 5`.
    pub fn sample_pf(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return Err(Error::Validation("count must be >= 1".into()));
        }
        if self.kind == ProblemKind::Zdt1 {
            return Ok(zdt1_front(count));
        }
        let directions = if self.m <= 5 {
            lattice_directions(self.m, count, seed)?
        } else {
            random_directions(self.m, count, seed)
        };
        Ok(directions.iter().map(|w| self.project_direction(w)).collect())
    }

    /// Where the front meets the weight direction `w`.
    pub fn theoretical_optimum(&self, w: &ReferencePoint) -> Result<Vec<f64>> {
        if w.dim() != self.m {
            return Err(Error::Validation(format!(
                "weight has dimension {}, expected {}",
                w.dim(),
                self.m
            )));
        }
        match self.kind {
            ProblemKind::Zdt1 => Err(Error::NotImplemented(
                "theoretical optimum is defined for DTLZ1-4 only".into(),
            )),
            _ => Ok(self.project_direction(w)),
        }
    }

    /// Residual of the analytic front equation at `f`.
    pub fn pf_residual(&self, f: &[f64]) -> f64 {
        match self.kind {
            ProblemKind::Zdt1 => (f[1] - (1.0 - f[0].max(0.0).sqrt())).abs(),
            ProblemKind::Dtlz1 => (f.iter().sum::<f64>() - 0.5).abs(),
            _ => (f.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs(),
        }
    }

    fn project_direction(&self, w: &[f64]) -> Vec<f64> {
        match self.kind {
            ProblemKind::Dtlz1 => {
                let s: f64 = w.iter().sum();
                w.iter().map(|v| 0.5 * v / s).collect()
            }
            _ => {
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                w.iter().map(|v| v / norm).collect()
            }
        }
    }
}

fn zdt1(x: &[f64]) -> Vec<f64> {
    let f1 = x[0];
    let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
    let f2 = g * (1.0 - (f1 / g).sqrt());
    vec![f1, f2]
}

fn zdt1_front(count: usize) -> Vec<Vec<f64>> {
    if count == 1 {
        return vec![vec![0.0, 1.0]];
    }
    (0..count)
        .map(|i| {
            let f1 = i as f64 / (count - 1) as f64;
            vec![f1, 1.0 - f1.sqrt()]
        })
        .collect()
}

fn sphere_g(tail: &[f64]) -> f64 {
    tail.iter().map(|v| (v - 0.5).powi(2)).sum()
}

fn rastrigin_g(tail: &[f64]) -> f64 {
    100.0
        * (tail.len() as f64
            + tail
                .iter()
                .map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
                .sum::<f64>())
}

fn dtlz1(x: &[f64], m: usize) -> Vec<f64> {
    let g = rastrigin_g(&x[m - 1..]);
    (0..m)
        .map(|i| {
            // f_i uses the first m-1-i position variables, then (1 - x) of the next.
            let keep = m - 1 - i;
            let mut f = 0.5 * (1.0 + g);
            f *= x[..keep].iter().product::<f64>();
            if i > 0 {
                f *= 1.0 - x[keep];
            }
            f
        })
        .collect()
}

fn dtlz_sphere(x: &[f64], m: usize, g: f64, alpha: f64) -> Vec<f64> {
    let theta: Vec<f64> = x[..m - 1].iter().map(|v| v.powf(alpha) * PI / 2.0).collect();
    (0..m)
        .map(|i| {
            let keep = m - 1 - i;
            let mut f = 1.0 + g;
            f *= theta[..keep].iter().map(|t| t.cos()).product::<f64>();
            if i > 0 {
                f *= theta[keep].sin();
            }
            f
        })
        .collect()
}

fn lattice_directions(m: usize, count: usize, seed: u64) -> Result<Vec<ReferencePoint>> {
    let mut h = 1;
    while binomial(h + m - 1, m - 1)? < count {
        h += 1;
    }
    let lattice = generate_das_dennis(m, h)?.points;
    if lattice.len() == count {
        return Ok(lattice);
    }
    // Seeded partial Fisher-Yates, then restore lattice order.
    let mut rng = stream(seed, Purpose::Sampling, m as u64, count as u64);
    let mut idx: Vec<usize> = (0..lattice.len()).collect();
    for i in 0..count {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    let mut chosen = idx[..count].to_vec();
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| lattice[i].clone()).collect())
}

fn random_directions(m: usize, count: usize, seed: u64) -> Vec<ReferencePoint> {
    let mut rng = stream(seed, Purpose::Sampling, m as u64, count as u64);
    (0..count)
        .map(|_| {
            // Flat Dirichlet via normalized exponentials.
            let e: Vec<f64> = (0..m)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let s: f64 = e.iter().sum();
            ReferencePoint::from_affine(e.iter().map(|v| v / s).collect())
        })
        .collect()
}
