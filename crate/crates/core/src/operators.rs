//! Real-coded variation: simulated binary crossover and polynomial mutation
//! on box-bounded decision vectors.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Variation parameters. `pm = None` means `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorParams {
    #[serde(default = "default_pc")]
    pub pc: f64,
    #[serde(default = "default_eta_c")]
    pub eta_c: f64,
    #[serde(default)]
    pub pm: Option<f64>,
    #[serde(default = "default_eta_m")]
    pub eta_m: f64,
}

fn default_pc() -> f64 {
    1.0
}
fn default_eta_c() -> f64 {
    10.0
}
fn default_eta_m() -> f64 {
    20.0
}

impl Default for OperatorParams {
    fn default() -> Self {
        Self {
            pc: default_pc(),
            eta_c: default_eta_c(),
            pm: None,
            eta_m: default_eta_m(),
        }
    }
}

impl OperatorParams {
    pub fn mutation_probability(&self, n: usize) -> f64 {
        self.pm.unwrap_or(1.0 / n as f64)
    }
}

/// Variables closer than this are not recombined.
const SBX_EPS: f64 = 1e-14;

/// Spread factor drawn from the SBX polynomial distribution.
fn spread_factor(u: f64, eta_c: f64) -> f64 {
    let e = 1.0 / (eta_c + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(e)
    }
}

/// Simulated binary crossover. With probability `pc` the pair recombines;
/// each variable then recombines with probability 1/2. Children are clipped
/// to `[lo, hi]`.
pub fn sbx_crossover<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    pc: f64,
    eta_c: f64,
    bounds: (f64, f64),
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(p1.len(), p2.len());
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.random::<f64>() >= pc {
        return (c1, c2);
    }
    let (lo, hi) = bounds;
    for i in 0..p1.len() {
        if rng.random::<f64>() >= 0.5 || (p1[i] - p2[i]).abs() <= SBX_EPS {
            continue;
        }
        let beta = spread_factor(rng.random::<f64>(), eta_c);
        let mid = 0.5 * (p1[i] + p2[i]);
        let half = 0.5 * beta * (p2[i] - p1[i]);
        let (a, b) = (mid - half, mid + half);
        // Randomly swap which child receives which value.
        let (a, b) = if rng.random::<bool>() { (b, a) } else { (a, b) };
        c1[i] = a.clamp(lo, hi);
        c2[i] = b.clamp(lo, hi);
    }
    (c1, c2)
}

/// Bounded polynomial mutation; each variable mutates with probability `pm`.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    x: &[f64],
    pm: f64,
    eta_m: f64,
    bounds: (f64, f64),
    rng: &mut R,
) -> Vec<f64> {
    let (lo, hi) = bounds;
    let span = hi - lo;
    let e = 1.0 / (eta_m + 1.0);
    x.iter()
        .map(|&v| {
            if rng.random::<f64>() >= pm || span <= 0.0 {
                return v;
            }
            let d1 = (v - lo) / span;
            let d2 = (hi - v) / span;
            let u = rng.random::<f64>();
            let dq = if u < 0.5 {
                let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta_m + 1.0);
                val.powf(e) - 1.0
            } else {
                let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta_m + 1.0);
                1.0 - val.powf(e)
            };
            (v + dq * span).clamp(lo, hi)
        })
        .collect()
}
