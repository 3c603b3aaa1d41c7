//! Mutual preferences between subproblems and candidate solutions, and the
//! deferred-acceptance matching that selects the next population.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::simplex::ReferencePoint;

/// Zero weights are raised to this before dividing.
pub const WEIGHT_FLOOR: f64 = 1e-6;

/// Tchebycheff value `max_i (f_i - z*_i) / max(w_i, 1e-6)`, negative
/// deviations clamped to zero. Minimizers lie on the ray `z* + t·w`.
pub fn aggregation(f: &[f64], weight: &[f64], ideal: &[f64]) -> f64 {
    f.iter()
        .zip(weight)
        .zip(ideal)
        .map(|((fi, wi), zi)| (fi - zi).max(0.0) / wi.max(WEIGHT_FLOOR))
        .fold(0.0, f64::max)
}

/// Perpendicular distance from `f - z*` to the line spanned by `weight`.
pub fn diversity_distance(f: &[f64], weight: &[f64], ideal: &[f64]) -> f64 {
    let ww: f64 = weight.iter().map(|w| w * w).sum();
    let t = f.iter().zip(weight).zip(ideal).map(|((fi, wi), zi)| (fi - zi) * wi).sum::<f64>() / ww;
    f.iter()
        .zip(weight)
        .zip(ideal)
        .map(|((fi, wi), zi)| (fi - zi - t * wi).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Indices `0..values.len()` ordered by ascending value, lower index first on ties.
fn preference_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

/// Proposer-optimal deferred acceptance.
///
/// `proposer_prefs[p]` lists acceptors from most to least preferred;
/// `acceptor_rank[a][p]` is the rank acceptor `a` gives proposer `p`
/// (smaller is better). Every proposer is matched when each list covers
/// all acceptors and there are at least as many acceptors as proposers.
pub fn deferred_acceptance(
    proposer_prefs: &[Vec<usize>],
    acceptor_rank: &[Vec<usize>],
) -> Result<Vec<usize>> {
    let n = proposer_prefs.len();
    let m = acceptor_rank.len();
    if m < n {
        return Err(Error::Validation(format!(
            "{m} candidates cannot cover {n} subproblems"
        )));
    }
    let mut next = vec![0usize; n];
    let mut holder: Vec<Option<usize>> = vec![None; m];
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    let mut free: Vec<usize> = (0..n).rev().collect();
    while let Some(p) = free.pop() {
        let a = match proposer_prefs[p].get(next[p]) {
            Some(&a) => a,
            None => {
                return Err(Error::Validation(format!(
                    "proposer {p} exhausted its preference list"
                )))
            }
        };
        next[p] += 1;
        match holder[a] {
            None => {
                holder[a] = Some(p);
                assigned[p] = Some(a);
            }
            Some(q) if acceptor_rank[a][p] < acceptor_rank[a][q] => {
                holder[a] = Some(p);
                assigned[p] = Some(a);
                assigned[q] = None;
                free.push(q);
            }
            Some(_) => free.push(p),
        }
    }
    Ok(assigned.into_iter().map(|a| a.expect("every proposer matched")).collect())
}

/// Preference lists for the matching between subproblems and candidates.
pub struct Preferences {
    /// Per subproblem: candidates by ascending aggregation value.
    pub subproblem_prefs: Vec<Vec<usize>>,
    /// Per candidate: rank of each subproblem by ascending diversity distance.
    pub candidate_rank: Vec<Vec<usize>>,
}

impl Preferences {
    pub fn build(weights: &[ReferencePoint], candidates: &[Vec<f64>], ideal: &[f64]) -> Self {
        let subproblem_prefs = weights
            .iter()
            .map(|w| {
                let vals: Vec<f64> = candidates.iter().map(|f| aggregation(f, w, ideal)).collect();
                preference_order(&vals)
            })
            .collect();
        let candidate_rank = candidates
            .iter()
            .map(|f| {
                let vals: Vec<f64> =
                    weights.iter().map(|w| diversity_distance(f, w, ideal)).collect();
                let order = preference_order(&vals);
                let mut rank = vec![0usize; weights.len()];
                for (r, s) in order.into_iter().enumerate() {
                    rank[s] = r;
                }
                rank
            })
            .collect();
        Self {
            subproblem_prefs,
            candidate_rank,
        }
    }
}

/// Assigns one distinct candidate (by objective vector) to every subproblem.
pub fn stable_match(
    weights: &[ReferencePoint],
    candidates: &[Vec<f64>],
    ideal: &[f64],
) -> Result<Vec<usize>> {
    if candidates.len() < weights.len() {
        return Err(Error::Validation(format!(
            "{} candidates cannot cover {} subproblems",
            candidates.len(),
            weights.len()
        )));
    }
    let prefs = Preferences::build(weights, candidates, ideal);
    deferred_acceptance(&prefs.subproblem_prefs, &prefs.candidate_rank)
}
