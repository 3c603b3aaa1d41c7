//! Quality indicators: IGD, hypervolume (exact and Monte-Carlo) and the
//! R-metric preprocessing that makes them preference-aware.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Mean distance from each reference point to its nearest approximation
/// point. An empty approximation yields `+inf`.
pub fn igd(approx: &[Vec<f64>], reference: &[Vec<f64>]) -> f64 {
    if approx.is_empty() {
        return f64::INFINITY;
    }
    if reference.is_empty() {
        return 0.0;
    }
    let total: f64 = reference
        .iter()
        .map(|r| approx.iter().map(|a| dist(a, r)).fold(f64::INFINITY, f64::min))
        .sum();
    total / reference.len() as f64
}

/// Largest dimension handled by [`hv_exact`].
pub const HV_EXACT_MAX_M: usize = 4;

fn strictly_dominates_ref(p: &[f64], r: &[f64]) -> bool {
    p.iter().zip(r).all(|(a, b)| a < b)
}

/// Dimension sweep over the last objective; `pts` all dominate `r`.
fn hv_sweep(pts: &mut [Vec<f64>], r: &[f64]) -> f64 {
    let m = r.len();
    if pts.is_empty() {
        return 0.0;
    }
    if m == 1 {
        let best = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        return r[0] - best;
    }
    let last = m - 1;
    pts.sort_by(|a, b| a[last].total_cmp(&b[last]));
    if m == 2 {
        let mut vol = 0.0;
        let mut best_x = r[0];
        for (k, p) in pts.iter().enumerate() {
            best_x = best_x.min(p[0]);
            let next = pts.get(k + 1).map_or(r[1], |q| q[1]);
            vol += (r[0] - best_x) * (next - p[1]);
        }
        return vol;
    }
    let mut vol = 0.0;
    for k in 0..pts.len() {
        let next = pts.get(k + 1).map_or(r[last], |q| q[last]);
        let height = next - pts[k][last];
        if height <= 0.0 {
            continue;
        }
        let mut slice: Vec<Vec<f64>> = pts[..=k].iter().map(|p| p[..last].to_vec()).collect();
        vol += hv_sweep(&mut slice, &r[..last]) * height;
    }
    vol
}

/// Exact dominated hypervolume for `m <= 4`. Points that do not strictly
/// dominate `reference` contribute nothing.
pub fn hv_exact(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let m = reference.len();
    if m > HV_EXACT_MAX_M {
        return Err(Error::Capability(format!(
            "exact hypervolume supports m <= {HV_EXACT_MAX_M} (got m = {m}); use hv_monte_carlo"
        )));
    }
    if points.iter().any(|p| p.len() != m) {
        return Err(Error::Validation("point dimension differs from reference".into()));
    }
    let mut pts: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| strictly_dominates_ref(p, reference))
        .cloned()
        .collect();
    Ok(hv_sweep(&mut pts, reference))
}

/// Monte-Carlo hypervolume: uniform samples in the box spanned by the
/// componentwise minimum of the points and `reference`. Returns the estimate
/// and its binomial standard error; with `samples == 0` the error is infinite.
pub fn hv_monte_carlo(points: &[Vec<f64>], reference: &[f64], samples: usize, seed: u64) -> (f64, f64) {
    let pts: Vec<&Vec<f64>> = points
        .iter()
        .filter(|p| strictly_dominates_ref(p, reference))
        .collect();
    if pts.is_empty() {
        return (0.0, 0.0);
    }
    if samples == 0 {
        return (0.0, f64::INFINITY);
    }
    let m = reference.len();
    let lo: Vec<f64> = (0..m)
        .map(|i| pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let volume: f64 = lo.iter().zip(reference).map(|(a, b)| b - a).product();
    let mut rng = stream(seed, Purpose::Sampling, 0, 0);
    let mut s = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..samples {
        for i in 0..m {
            s[i] = lo[i] + (reference[i] - lo[i]) * rng.random::<f64>();
        }
        if pts.iter().any(|p| p.iter().zip(&s).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    let n = samples as f64;
    let frac = hits as f64 / n;
    (volume * frac, volume * (frac * (1.0 - frac) / n).sqrt())
}

/// Achievement scalarizing function along the `z_r -> z_w` direction.
pub fn asf(f: &[f64], z_r: &[f64], z_w: &[f64]) -> f64 {
    f.iter()
        .zip(z_r)
        .zip(z_w)
        .map(|((fi, r), w)| (fi - r) / (w - r))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn default_extent() -> f64 {
    0.2
}
fn default_mc_samples() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RMetricConfig {
    pub z_r: Vec<f64>,
    /// Defaults to `z_r + 2`.
    #[serde(default)]
    pub z_w: Option<Vec<f64>>,
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default, skip_serializing)]
    pub pf_reference: Option<Vec<Vec<f64>>>,
    /// Defaults to the worst point.
    #[serde(default)]
    pub hv_reference: Option<Vec<f64>>,
    /// Monte-Carlo settings used for R-HV when `m > 4`.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub mc_seed: u64,
}

impl RMetricConfig {
    pub fn new(z_r: Vec<f64>) -> Self {
        Self {
            z_r,
            z_w: None,
            extent: default_extent(),
            pf_reference: None,
            hv_reference: None,
            mc_samples: default_mc_samples(),
            mc_seed: 0,
        }
    }

    pub fn with_pf_reference(mut self, pf: Vec<Vec<f64>>) -> Self {
        self.pf_reference = Some(pf);
        self
    }

    pub fn m(&self) -> usize {
        self.z_r.len()
    }

    pub fn worst(&self) -> Vec<f64> {
        self.z_w
            .clone()
            .unwrap_or_else(|| self.z_r.iter().map(|v| v + 2.0).collect())
    }

    pub fn hv_point(&self) -> Vec<f64> {
        self.hv_reference.clone().unwrap_or_else(|| self.worst())
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if m == 0 {
            return Err(Error::Validation("z_r is empty".into()));
        }
        if !(self.extent > 0.0 && self.extent <= 1.0) {
            return Err(Error::Validation(format!("extent = {} outside (0, 1]", self.extent)));
        }
        let z_w = self.worst();
        if z_w.len() != m || self.hv_point().len() != m {
            return Err(Error::Validation("z_w / hv_reference dimension differs from z_r".into()));
        }
        if z_w.iter().zip(&self.z_r).any(|(w, r)| !(w > r)) {
            return Err(Error::Validation("z_w must exceed z_r in every objective".into()));
        }
        if let Some(pf) = &self.pf_reference {
            if pf.iter().any(|p| p.len() != m) {
                return Err(Error::Validation("pf_reference dimension differs from z_r".into()));
            }
        }
        Ok(())
    }

    /// Per-objective filter radius: `extent` times the PF sample's range,
    /// or times `|z_w - z_r|_inf` without a sample.
    pub fn radius(&self) -> Vec<f64> {
        let m = self.m();
        match self.pf_reference.as_deref() {
            Some(pf) if !pf.is_empty() => (0..m)
                .map(|i| {
                    let (lo, hi) = pf.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p[i]), hi.max(p[i]))
                    });
                    self.extent * (hi - lo)
                })
                .collect(),
            _ => {
                let span = self
                    .worst()
                    .iter()
                    .zip(&self.z_r)
                    .map(|(w, r)| (w - r).abs())
                    .fold(0.0, f64::max);
                vec![self.extent * span; m]
            }
        }
    }
}

/// Neighborhood test used by the filter and the PF restriction.
pub fn within_extent(p: &[f64], center: &[f64], radius: &[f64]) -> bool {
    p.iter()
        .zip(center)
        .zip(radius)
        .all(|((a, c), r)| (a - c).abs() <= *r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RProcessed {
    /// Filtered and translated points.
    pub points: Vec<Vec<f64>>,
    /// Representative before transfer; `None` for an empty input.
    pub representative: Option<Vec<f64>>,
    /// Representative after transfer, on the segment `[z_r, z_w]`.
    pub transferred: Option<Vec<f64>>,
    /// Input points dropped by the filter.
    pub filtered_count: usize,
}

/// Representative selection, extent filter and iso-ASF transfer.
pub fn r_preprocess(approx: &[Vec<f64>], cfg: &RMetricConfig) -> Result<RProcessed> {
    cfg.validate()?;
    let m = cfg.m();
    if approx.iter().any(|p| p.len() != m) {
        return Err(Error::Validation("approximation dimension differs from z_r".into()));
    }
    if approx.is_empty() {
        return Ok(RProcessed {
            points: Vec::new(),
            representative: None,
            transferred: None,
            filtered_count: 0,
        });
    }
    let n = approx.len() as f64;
    let centroid: Vec<f64> = (0..m).map(|i| approx.iter().map(|p| p[i]).sum::<f64>() / n).collect();
    let rep = approx
        .iter()
        .min_by(|a, b| dist(a, &centroid).total_cmp(&dist(b, &centroid)))
        .expect("non-empty")
        .clone();

    let radius = cfg.radius();
    let kept: Vec<&Vec<f64>> = approx.iter().filter(|p| within_extent(p, &rep, &radius)).collect();

    let z_w = cfg.worst();
    let k = asf(&rep, &cfg.z_r, &z_w);
    let target: Vec<f64> = cfg.z_r.iter().zip(&z_w).map(|(r, w)| r + k * (w - r)).collect();
    let shift: Vec<f64> = target.iter().zip(&rep).map(|(t, z)| t - z).collect();
    let points = kept
        .iter()
        .map(|p| p.iter().zip(&shift).map(|(a, s)| a + s).collect())
        .collect();
    Ok(RProcessed {
        points,
        representative: Some(rep),
        transferred: Some(target),
        filtered_count: approx.len() - kept.len(),
    })
}

/// PF sample points within the extent of the sample point nearest `center`.
pub fn restrict_reference(pf: &[Vec<f64>], center: &[f64], radius: &[f64]) -> Vec<Vec<f64>> {
    let Some(anchor) = pf.iter().min_by(|a, b| dist(a, center).total_cmp(&dist(b, center))) else {
        return Vec::new();
    };
    pf.iter()
        .filter(|p| within_extent(p, anchor, radius))
        .cloned()
        .collect()
}

/// R-IGD; `None` when nothing survives preprocessing.
pub fn r_igd(approx: &[Vec<f64>], cfg: &RMetricConfig) -> Result<Option<f64>> {
    let pf = cfg
        .pf_reference
        .as_deref()
        .filter(|pf| !pf.is_empty())
        .ok_or_else(|| Error::Config("R-IGD needs a non-empty pf_reference".into()))?;
    let processed = r_preprocess(approx, cfg)?;
    let Some(center) = processed.transferred.as_ref() else {
        return Ok(None);
    };
    let local = restrict_reference(pf, center, &cfg.radius());
    Ok(Some(igd(&processed.points, &local)))
}

/// R-HV against `hv_reference`; exact for `m <= 4`, Monte-Carlo otherwise.
pub fn r_hv(approx: &[Vec<f64>], cfg: &RMetricConfig) -> Result<Option<f64>> {
    let processed = r_preprocess(approx, cfg)?;
    if processed.points.is_empty() {
        return Ok(None);
    }
    let r = cfg.hv_point();
    if r.len() <= HV_EXACT_MAX_M {
        hv_exact(&processed.points, &r).map(Some)
    } else {
        Ok(Some(hv_monte_carlo(&processed.points, &r, cfg.mc_samples, cfg.mc_seed).0))
    }
}

/// Metric report as emitted by the command line and the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub filtered_count: usize,
}
