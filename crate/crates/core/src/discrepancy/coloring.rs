use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::net::{EvaluationNet, Probe};
use crate::error::{Error, Result};
use crate::geometry::{PointSet, SmoothedRange};
use crate::matching::{min_cost_matching_with, Matching, MatchingOptions};
use crate::rng::{self, Purpose};

/// A +/-1 labelling that is antisymmetric on every pair of its matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    signs: Vec<i8>,
    seed: u64,
    matching: Matching,
}

impl Coloring {
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Indices coloured +1, ascending.
    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.signs.len()).filter(|&i| self.signs[i] > 0).collect()
    }

    fn check(&self, points: &PointSet) -> Result<()> {
        if self.signs.len() != points.len() {
            return Err(Error::ColoringSize {
                coloring: self.signs.len(),
                points: points.len(),
            });
        }
        Ok(())
    }
}

/// One fair coin per pair, drawn in pair order; heads gives the smaller
/// index +1. An unmatched leftover is coloured +1.
pub fn color_from_matching(matching: &Matching, seed: u64) -> Coloring {
    color_with_counter(matching, seed, 0)
}

pub(crate) fn color_with_counter(matching: &Matching, seed: u64, counter: u64) -> Coloring {
    let mut rng = rng::stream(seed, Purpose::Coloring, counter);
    let mut signs = vec![0i8; matching.source_size()];
    for &(i, j) in matching.pairs() {
        let s: i8 = if rng.gen::<bool>() { 1 } else { -1 };
        signs[i] = s;
        signs[j] = -s;
    }
    if let Some(u) = matching.unmatched() {
        signs[u] = 1;
    }
    Coloring {
        signs,
        seed,
        matching: matching.clone(),
    }
}

/// Pairwise decomposition of `disc` for one range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyDiagnostics {
    /// `2 |v(p_j) - v(q_j)|` per matched pair.
    pub gaps: Vec<f64>,
    /// `chi(p_j) v(p_j) + chi(q_j) v(q_j)` per matched pair.
    pub contributions: Vec<f64>,
    /// Value of the unmatched point, when there is one.
    pub leftover: f64,
    /// `|sum_p chi(p) v(p)|`.
    pub disc: f64,
}

impl DiscrepancyDiagnostics {
    pub fn sum_sq_gaps(&self) -> f64 {
        self.gaps.iter().map(|d| d * d).sum()
    }

    /// Hoeffding bound `2 exp(-2 alpha^2 / sum gaps^2)` on `Pr[disc >= alpha]`.
    pub fn tail_bound(&self, alpha: f64) -> f64 {
        let s = self.sum_sq_gaps();
        if s == 0.0 {
            return if alpha > 0.0 { 0.0 } else { 1.0 };
        }
        (2.0 * (-2.0 * alpha * alpha / s).exp()).min(1.0)
    }

    /// `(sum gaps^2, m^(1-2/d) (sum gaps^d)^(2/d))` with `m` the number of
    /// pairs; the first never exceeds the second for `d >= 2`.
    pub fn power_mean_sides(&self, d: u32) -> (f64, f64) {
        let m = self.gaps.len() as f64;
        let d = d as f64;
        let lhs = self.sum_sq_gaps();
        let sum_d: f64 = self.gaps.iter().map(|g| g.powf(d)).sum();
        (lhs, m.powf(1.0 - 2.0 / d) * sum_d.powf(2.0 / d))
    }
}

pub fn disc_for_range(points: &PointSet, coloring: &Coloring, range: &SmoothedRange) -> Result<DiscrepancyDiagnostics> {
    coloring.check(points)?;
    if range.dim() != points.dim() {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            found: range.dim(),
        });
    }
    let v: Vec<f64> = points.iter().map(|p| range.value(p)).collect();
    let s = &coloring.signs;
    let pairs = coloring.matching.pairs();
    let gaps = pairs.iter().map(|&(i, j)| 2.0 * (v[i] - v[j]).abs()).collect();
    let contributions = pairs
        .iter()
        .map(|&(i, j)| s[i] as f64 * v[i] + s[j] as f64 * v[j])
        .collect();
    let leftover = coloring.matching.unmatched().map_or(0.0, |u| v[u]);
    let disc = (0..points.len()).map(|i| s[i] as f64 * v[i]).sum::<f64>().abs();
    Ok(DiscrepancyDiagnostics {
        gaps,
        contributions,
        leftover,
        disc,
    })
}

/// Largest discrepancy over `net`, with the first maximising range.
pub fn disc_sup(points: &PointSet, coloring: &Coloring, net: &EvaluationNet) -> Result<(f64, SmoothedRange)> {
    coloring.check(points)?;
    let probe = Probe::Sum {
        points,
        coeffs: coloring.signs.iter().map(|&s| s as f64).collect(),
    };
    let (value, id) = net.argmax(&[probe], |v| v[0].abs())?;
    Ok((value, net.range(id)))
}

/// Matches, colours and keeps the +1 side.
pub fn halve(points: &PointSet, options: &MatchingOptions, seed: u64) -> Result<PointSet> {
    let (keep, _) = halve_indices(points, options, seed, 0)?;
    Ok(points.subset(&keep))
}

pub(crate) fn halve_indices(
    points: &PointSet,
    options: &MatchingOptions,
    seed: u64,
    counter: u64,
) -> Result<(Vec<usize>, Coloring)> {
    let m = min_cost_matching_with(points, options)?;
    let c = color_with_counter(&m, seed, counter);
    Ok((c.positive_indices(), c))
}
