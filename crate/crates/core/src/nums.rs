//! Non-uniform mapping of structured reference points toward a region of
//! interest.
//!
//! Every reference point `w` is moved along the ray from the pivot `w^p`
//! (the simplex projection of the aspiration vector) through `w`. With
//! `Δ` the distance from the pivot to where that ray leaves the simplex and
//! `ℓ = ‖w - w^p‖`, the mapped point sits at distance
//!
//! ```text
//! ρ = Δ - Δ·((Δ - ℓ)/Δ)^(1/(η+1))
//! ```
//!
//! from the pivot. The exponent `η` follows in closed form from the desired
//! relative extent `τ` of the region of interest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, TauBound};
use crate::simplex::{
    dedup_points, linf, project_to_simplex, ReferencePoint, ReferenceSet, DEDUP_TOL,
};

/// Points with `Δ - ℓ` below this are treated as lying on the simplex boundary.
pub const BOUNDARY_EPS: f64 = 1e-6;

/// Below this L-infinity distance a point is considered to coincide with the pivot.
const DEGENERATE_TOL: f64 = 1e-12;

/// Accepted distance from `1 - m/H` for the identity setting.
const IDENTITY_TAU_TOL: f64 = 1e-12;

/// One region of interest as supplied by the decision maker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiSpec {
    /// Aspiration vector in objective space.
    pub z_r: Vec<f64>,
    /// Relative extent of the region of interest.
    pub tau: f64,
    #[serde(default = "default_keep_boundary")]
    pub keep_boundary: bool,
}

fn default_keep_boundary() -> bool {
    true
}

impl RoiSpec {
    pub fn new(z_r: Vec<f64>, tau: f64, keep_boundary: bool) -> Self {
        Self {
            z_r,
            tau,
            keep_boundary,
        }
    }

    /// Validates against a lattice with `m` objectives and `h` divisions and
    /// derives the pivot and exponent.
    pub fn derive(&self, m: usize, h: usize) -> Result<Roi> {
        if self.z_r.len() != m {
            return Err(Error::Validation(format!(
                "aspiration vector has {} components, expected m = {m}",
                self.z_r.len()
            )));
        }
        let eta = compute_eta(m, h, self.tau, self.keep_boundary)?;
        let pivot = project_to_simplex(&self.z_r)?;
        Ok(Roi {
            spec: self.clone(),
            pivot,
            eta,
        })
    }
}

/// A validated region of interest with its derived pivot and exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Roi {
    pub spec: RoiSpec,
    pub pivot: ReferencePoint,
    pub eta: f64,
}

/// Open interval of admissible `tau` for the given mode.
pub fn tau_bounds(m: usize, h: usize, keep_boundary: bool) -> (f64, f64) {
    if keep_boundary {
        (0.0, 1.0 - m as f64 / h as f64)
    } else {
        (0.0, 1.0)
    }
}

/// Closed-form exponent for a target relative extent `tau`.
///
/// Keep-boundary: `η = log(m/H) / log(1 - τ) - 1`, valid for
/// `0 < τ < 1 - m/H`. The endpoint `τ = 1 - m/H` is also accepted and gives
/// `η = 0`, the identity mapping.
///
/// Shift-all: `η = log(m/H) / log(1 - (1 - m/H)·τ) - 1`, valid for `0 < τ < 1`.
pub fn compute_eta(m: usize, h: usize, tau: f64, keep_boundary: bool) -> Result<f64> {
    if m < 2 {
        return Err(Error::Config(format!("m must be >= 2, got {m}")));
    }
    if h <= m {
        return Err(Error::Config(format!(
            "closed-form eta requires H > m (got H = {h}, m = {m}); \
             use multi-layer shifting when H <= m"
        )));
    }
    if !tau.is_finite() {
        return Err(Error::Validation(format!("tau must be finite, got {tau}")));
    }
    let alpha = m as f64 / h as f64;
    let (lo, hi) = tau_bounds(m, h, keep_boundary);
    let bound = if keep_boundary {
        TauBound::KeepBoundary
    } else {
        TauBound::ShiftAll
    };
    if keep_boundary && (tau - hi).abs() <= IDENTITY_TAU_TOL {
        return Ok(0.0);
    }
    if !(tau > lo && tau < hi) {
        return Err(Error::TauOutOfBounds { tau, bound, lo, hi });
    }
    let beta = if keep_boundary {
        1.0 - tau
    } else {
        1.0 - (1.0 - alpha) * tau
    };
    Ok(alpha.ln() / beta.ln() - 1.0)
}

/// Ray geometry of one reference point relative to the pivot.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingGeometry {
    pub pivot: ReferencePoint,
    /// Where the pivot ray through `w` leaves the simplex.
    pub boundary: ReferencePoint,
    /// `Δ = ‖b - w^p‖`.
    pub big_delta: f64,
    /// `ℓ = ‖w - w^p‖`.
    pub ell: f64,
    /// Mapped distance from the boundary point.
    pub small_delta: f64,
    /// Mapped distance from the pivot, `Δ - δ`.
    pub rho: f64,
    direction: Vec<f64>,
}

impl MappingGeometry {
    /// Returns `None` when `w` coincides with the pivot.
    pub fn new(w: &ReferencePoint, pivot: &ReferencePoint, eta: f64) -> Result<Option<Self>> {
        let (boundary, big_delta, ell, direction) = match ray(w, pivot)? {
            Some(parts) => parts,
            None => return Ok(None),
        };
        let gap = (big_delta - ell).max(0.0);
        let small_delta = big_delta * (gap / big_delta).powf(1.0 / (eta + 1.0));
        Ok(Some(Self {
            pivot: pivot.clone(),
            boundary,
            big_delta,
            ell,
            small_delta,
            rho: big_delta - small_delta,
            direction,
        }))
    }

    /// True under the `Δ - ℓ < ε` boundary test.
    pub fn on_boundary(&self, eps: f64) -> bool {
        self.big_delta - self.ell < eps
    }

    /// `w^p + ρ·u` for the unit ray direction `u`.
    pub fn mapped(&self) -> ReferencePoint {
        self.along(self.rho)
    }

    fn along(&self, dist: f64) -> ReferencePoint {
        ReferencePoint::from_affine(
            self.pivot
                .iter()
                .zip(&self.direction)
                .map(|(p, u)| p + dist * u)
                .collect(),
        )
    }
}

type RayParts = (ReferencePoint, f64, f64, Vec<f64>);

fn ray(w: &ReferencePoint, pivot: &ReferencePoint) -> Result<Option<RayParts>> {
    if w.dim() != pivot.dim() {
        return Err(Error::Validation(format!(
            "dimension mismatch: point {} vs pivot {}",
            w.dim(),
            pivot.dim()
        )));
    }
    if linf(w, pivot) <= DEGENERATE_TOL {
        return Ok(None);
    }
    let diff: Vec<f64> = w.iter().zip(pivot.iter()).map(|(a, b)| a - b).collect();
    let ell = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
    let direction: Vec<f64> = diff.iter().map(|d| d / ell).collect();

    // Coordinate i reaches zero at distance p_i·ℓ/(p_i - w_i). Only
    // strictly positive candidates count; a zero pivot coordinate never binds.
    let mut best: Option<(usize, f64)> = None;
    for (i, (&p, &wi)) in pivot.iter().zip(w.iter()).enumerate() {
        if p <= 0.0 {
            continue;
        }
        let denom = p - wi;
        if denom <= 0.0 {
            continue;
        }
        let cand = p * ell / denom;
        if cand > 0.0 && cand.is_finite() && best.is_none_or(|(_, d)| cand < d) {
            best = Some((i, cand));
        }
    }
    // On the simplex some coordinate of w - w^p is negative, so a candidate exists.
    let (binding, big_delta) = best.ok_or_else(|| {
        Error::Validation(format!(
            "no boundary intersection for ray from {:?} through {:?}",
            pivot.coords(),
            w.coords()
        ))
    })?;
    let mut b: Vec<f64> = pivot
        .iter()
        .zip(&direction)
        .map(|(p, u)| p + big_delta * u)
        .collect();
    b[binding] = 0.0;
    Ok(Some((
        ReferencePoint::from_affine(b),
        big_delta,
        ell,
        direction,
    )))
}

/// Boundary point `b` and ray length `Δ` for the ray from `pivot` through `w`.
pub fn boundary_intersection(
    w: &ReferencePoint,
    pivot: &ReferencePoint,
) -> Result<(ReferencePoint, f64)> {
    match ray(w, pivot)? {
        Some((b, big_delta, _, _)) => Ok((b, big_delta)),
        None => Err(Error::DegenerateRay),
    }
}

/// Maps a single point with exponent `eta`. A point at the pivot maps to itself.
pub fn map_point(w: &ReferencePoint, pivot: &ReferencePoint, eta: f64) -> Result<ReferencePoint> {
    if !(eta >= 0.0) {
        return Err(Error::Validation(format!("eta must be >= 0, got {eta}")));
    }
    Ok(match MappingGeometry::new(w, pivot, eta)? {
        Some(geom) => geom.mapped(),
        None => pivot.clone(),
    })
}

fn contract(w: &ReferencePoint, pivot: &ReferencePoint, tau: f64) -> ReferencePoint {
    ReferencePoint::from_affine(
        pivot
            .iter()
            .zip(w.iter())
            .map(|(p, x)| p + tau * (x - p))
            .collect(),
    )
}

fn check_contraction_factor(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::TauOutOfBounds {
            tau,
            bound: TauBound::ShiftAll,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Moves a boundary point radially toward the pivot, keeping the fraction
/// `tau` of its distance.
pub fn shift_boundary_point(
    w_b: &ReferencePoint,
    pivot: &ReferencePoint,
    tau: f64,
) -> Result<ReferencePoint> {
    check_contraction_factor(tau)?;
    match MappingGeometry::new(w_b, pivot, 0.0)? {
        None => Ok(pivot.clone()),
        Some(geom) if geom.on_boundary(BOUNDARY_EPS) || w_b.on_face(0.0) => Ok(contract(w_b, pivot, tau)),
        Some(geom) => Err(Error::NotOnBoundary {
            gap: geom.big_delta - geom.ell,
        }),
    }
}

/// Per-point boundary classification used by the mapping: the `Δ - ℓ < ε`
/// test, plus any point with an exactly zero coordinate (which matters only
/// when the pivot itself lies on a face).
pub fn boundary_mask(refset: &ReferenceSet, pivot: &ReferencePoint) -> Result<Vec<bool>> {
    refset
        .iter()
        .map(|w| {
            Ok(match MappingGeometry::new(w, pivot, 0.0)? {
                None => w.on_face(0.0),
                Some(geom) => geom.on_boundary(BOUNDARY_EPS) || w.on_face(0.0),
            })
        })
        .collect()
}

/// Full mapping of a single-layer lattice toward one region of interest.
pub fn map_reference_set(refset: &ReferenceSet, roi: &RoiSpec) -> Result<ReferenceSet> {
    let h = refset.h.ok_or_else(|| {
        Error::Config("reference set carries no division count H".into())
    })?;
    let derived = roi.derive(refset.m, h)?;
    map_with(refset, &derived)
}

/// Like [`map_reference_set`] with an already derived region.
pub fn map_with(refset: &ReferenceSet, roi: &Roi) -> Result<ReferenceSet> {
    let pivot = &roi.pivot;
    let points = refset
        .iter()
        .map(|w| {
            let geom = match MappingGeometry::new(w, pivot, roi.eta)? {
                Some(g) => g,
                None => return Ok(w.clone()),
            };
            let boundary = geom.on_boundary(BOUNDARY_EPS) || w.on_face(0.0);
            Ok(match (boundary, roi.spec.keep_boundary) {
                (true, true) => w.clone(),
                (true, false) => contract(w, pivot, roi.spec.tau),
                (false, _) => geom.mapped(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReferenceSet {
        points,
        m: refset.m,
        h: refset.h,
        layer_tau: None,
    })
}

/// Radially contracts whole layers toward the pivot of `roi_base`, one
/// factor per layer (`None` leaves a layer in place), and merges them.
pub fn map_multilayer(
    layers: &[ReferenceSet],
    roi_base: &RoiSpec,
    tau_per_layer: &[Option<f64>],
) -> Result<ReferenceSet> {
    if layers.is_empty() {
        return Err(Error::Validation("no layers supplied".into()));
    }
    if layers.len() != tau_per_layer.len() {
        return Err(Error::Validation(format!(
            "{} layers but {} shrinkage factors",
            layers.len(),
            tau_per_layer.len()
        )));
    }
    let m = layers[0].m;
    if let Some(l) = layers.iter().find(|l| l.m != m) {
        return Err(Error::Validation(format!(
            "layer with m = {} mixed with m = {m}",
            l.m
        )));
    }
    if roi_base.z_r.len() != m {
        return Err(Error::Validation(format!(
            "aspiration vector has {} components, expected m = {m}",
            roi_base.z_r.len()
        )));
    }
    for tau in tau_per_layer.iter().flatten() {
        if !(*tau > 0.0 && *tau < 1.0) {
            return Err(Error::TauOutOfBounds {
                tau: *tau,
                bound: TauBound::ShiftAll,
                lo: 0.0,
                hi: 1.0,
            });
        }
    }
    let pivot = project_to_simplex(&roi_base.z_r)?;
    let mut merged = Vec::with_capacity(layers.iter().map(ReferenceSet::len).sum());
    for (layer, tau) in layers.iter().zip(tau_per_layer) {
        match tau {
            None => merged.extend(layer.points.iter().cloned()),
            Some(tau) => merged.extend(layer.iter().map(|w| contract(w, &pivot, *tau))),
        }
    }
    let h = layers[0].h.filter(|h| layers.iter().all(|l| l.h == Some(*h)));
    Ok(ReferenceSet {
        points: dedup_points(merged, DEDUP_TOL),
        m,
        h,
        layer_tau: Some(tau_per_layer.to_vec()),
    })
}

/// Union of the mappings for several regions sharing one boundary.
pub fn map_multi_roi(refset: &ReferenceSet, rois: &[RoiSpec]) -> Result<ReferenceSet> {
    if rois.is_empty() {
        return Err(Error::Validation("at least one region of interest is required".into()));
    }
    if rois.iter().any(|r| !r.keep_boundary) {
        return Err(Error::Config(
            "multiple regions of interest require keep_boundary = true for every region".into(),
        ));
    }
    let mut merged = Vec::with_capacity(refset.len() * rois.len());
    for roi in rois {
        merged.extend(map_reference_set(refset, roi)?.points);
    }
    Ok(ReferenceSet {
        points: dedup_points(merged, DEDUP_TOL),
        m: refset.m,
        h: None,
        layer_tau: None,
    })
}
