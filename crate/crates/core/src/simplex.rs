//! Points on the canonical unit simplex: structured lattice generation and
//! Euclidean projection of arbitrary vectors onto the simplex.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the coordinate sum of a simplex point.
pub const SUM_TOL: f64 = 1e-9;
/// Coordinates above `-NEG_TOL` are accepted and clamped to zero.
pub const NEG_TOL: f64 = 1e-12;
/// L-infinity distance under which two points are considered the same.
pub const DEDUP_TOL: f64 = 1e-9;

/// A point `w` with `w_i >= 0` and `sum(w) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReferencePoint(Vec<f64>);

impl ReferencePoint {
    /// Validates simplex membership and clamps tiny negative coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(coords, NEG_TOL)
    }

    /// Like [`ReferencePoint::new`] with a caller-chosen negativity slack.
    pub fn with_tolerance(mut coords: Vec<f64>, neg_tol: f64) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Validation(format!(
                "simplex point needs at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Validation(format!("non-finite coordinate {bad}")));
        }
        if let Some(bad) = coords.iter().find(|&&c| c < -neg_tol) {
            return Err(Error::Validation(format!("negative coordinate {bad}")));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Validation(format!("coordinates sum to {sum}, expected 1")));
        }
        for c in coords.iter_mut() {
            if *c < 0.0 {
                *c = 0.0;
            }
        }
        Ok(Self(coords))
    }

    /// Wraps coordinates produced by an affine step that stays on the simplex,
    /// clamping float noise below zero.
    pub(crate) fn from_affine(mut coords: Vec<f64>) -> Self {
        debug_assert!(
            (coords.iter().sum::<f64>() - 1.0).abs() <= 1e-8,
            "affine output left the simplex hyperplane: {coords:?}"
        );
        for c in coords.iter_mut() {
            if *c < 0.0 {
                *c = 0.0;
            }
        }
        Self(coords)
    }

    /// The centroid `(1/m, ..., 1/m)`.
    pub fn centroid(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// True if some coordinate is (numerically) zero.
    pub fn on_face(&self, tol: f64) -> bool {
        self.0.iter().any(|&c| c <= tol)
    }
}

impl Deref for ReferencePoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for ReferencePoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// An ordered collection of simplex points plus the lattice parameters that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSet {
    pub points: Vec<ReferencePoint>,
    pub m: usize,
    /// Divisions per layer; `None` for merged or externally supplied sets.
    pub h: Option<usize>,
    /// Per-layer shrinkage factor (`None` entries are unshifted layers).
    pub layer_tau: Option<Vec<Option<f64>>>,
}

impl ReferenceSet {
    pub fn new(points: Vec<ReferencePoint>, m: usize, h: Option<usize>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.dim() != m) {
            return Err(Error::Validation(format!(
                "point of dimension {} in a set with m = {m}",
                p.dim()
            )));
        }
        Ok(Self {
            points,
            m,
            h,
            layer_tau: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ReferencePoint> {
        self.points.iter()
    }

    /// Recovers `H` from lattice coordinates when every coordinate is a
    /// multiple of `1/H` for the `H` implied by the smallest positive entry.
    pub fn infer_divisions(&self) -> Option<usize> {
        let min_pos = self
            .points
            .iter()
            .flat_map(|p| p.iter().copied())
            .filter(|&c| c > 1e-9)
            .fold(f64::INFINITY, f64::min);
        if !min_pos.is_finite() {
            return None;
        }
        let h = (1.0 / min_pos).round();
        if h < 1.0 {
            return None;
        }
        let on_lattice = self
            .points
            .iter()
            .flat_map(|p| p.iter().copied())
            .all(|c| ((c * h) - (c * h).round()).abs() < 1e-6);
        on_lattice.then_some(h as usize)
    }
}

/// `C(n, k)` with overflow detection.
pub fn binomial(n: usize, k: usize) -> Result<usize> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(Error::SizeOverflow { n, k })?
            / (i as u128 + 1);
    }
    usize::try_from(acc).map_err(|_| Error::SizeOverflow { n, k })
}

/// Structured lattice points `k/H` with `sum(k) = H`, ordered with the first
/// coordinate descending, then recursively on the remaining coordinates.
pub fn generate_das_dennis(m: usize, h: usize) -> Result<ReferenceSet> {
    if m < 2 {
        return Err(Error::Validation(format!("m must be >= 2, got {m}")));
    }
    if h < 1 {
        return Err(Error::Validation(format!("H must be >= 1, got {h}")));
    }
    let count = binomial(h + m - 1, m - 1)?;
    let mut points = Vec::with_capacity(count);
    let mut counts = vec![0usize; m];
    fill_lattice(&mut counts, 0, h, h, &mut points);
    debug_assert_eq!(points.len(), count);
    Ok(ReferenceSet {
        points,
        m,
        h: Some(h),
        layer_tau: None,
    })
}

fn fill_lattice(
    counts: &mut [usize],
    axis: usize,
    left: usize,
    h: usize,
    out: &mut Vec<ReferencePoint>,
) {
    let m = counts.len();
    if axis == m - 1 {
        counts[axis] = left;
        let denom = h as f64;
        out.push(ReferencePoint(
            counts.iter().map(|&k| k as f64 / denom).collect(),
        ));
        return;
    }
    for k in (0..=left).rev() {
        counts[axis] = k;
        fill_lattice(counts, axis + 1, left - k, h, out);
    }
}

/// `l` identical lattice layers for the many-objective case.
pub fn generate_multilayer(m: usize, h: usize, layers: usize) -> Result<Vec<ReferenceSet>> {
    if layers < 1 {
        return Err(Error::Validation("at least one layer is required".into()));
    }
    let base = generate_das_dennis(m, h)?;
    Ok(vec![base; layers])
}

/// Euclidean projection onto the unit simplex by the sorted-threshold scan:
/// find the threshold `t` such that `[z - t]_+` sums to one.
pub fn project_to_simplex(z: &[f64]) -> Result<ReferencePoint> {
    let m = z.len();
    if m < 2 {
        return Err(Error::Validation(format!(
            "aspiration vector needs at least 2 components, got {m}"
        )));
    }
    if let Some(bad) = z.iter().find(|c| !c.is_finite()) {
        return Err(Error::Validation(format!("non-finite aspiration component {bad}")));
    }
    let mut sorted = z.to_vec();
    sorted.sort_by(f64::total_cmp);

    // Scan from the top: the suffix sum over the (m - i) largest entries.
    let mut threshold = None;
    let mut suffix = 0.0;
    for i in (0..m - 1).rev() {
        suffix += sorted[i + 1];
        let t = (suffix - 1.0) / (m - 1 - i) as f64;
        if t >= sorted[i] {
            threshold = Some(t);
            break;
        }
    }
    let t = threshold.unwrap_or_else(|| (sorted.iter().sum::<f64>() - 1.0) / m as f64);
    Ok(ReferencePoint(z.iter().map(|&zi| (zi - t).max(0.0)).collect()))
}

/// L-infinity distance.
pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Keeps the first occurrence of every point, dropping later points within
/// `tol` in L-infinity. Order of survivors is preserved.
pub fn dedup_points(points: Vec<ReferencePoint>, tol: f64) -> Vec<ReferencePoint> {
    let mut kept: Vec<ReferencePoint> = Vec::with_capacity(points.len());
    for p in points {
        if !kept.iter().any(|q| linf(q, &p) <= tol) {
            kept.push(p);
        }
    }
    kept
}
