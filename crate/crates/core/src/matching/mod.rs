//! Minimum-cost perfect matchings of point sets and the restricted-length
//! diagnostics that bound matching discrepancy.

pub mod blossom;
mod restricted;

use std::collections::{BinaryHeap, HashSet};
use std::cmp::Reverse;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, dist2, io::fmt_f64, PointSet};

pub use restricted::{clip_interval, edge_types, rho, rho_report, EdgeTypeCounts, RestrictedObject, RhoReport};

/// Default ceiling on points accepted by exact matching.
pub const DEFAULT_EXACT_CAP: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchingMode {
    /// Minimum total Euclidean length (blossom algorithm).
    Exact,
    /// Repeatedly pair the globally closest unmatched pair.
    Greedy,
}

impl fmt::Display for MatchingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchingMode::Exact => "exact",
            MatchingMode::Greedy => "greedy",
        })
    }
}

impl FromStr for MatchingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(MatchingMode::Exact),
            "greedy" => Ok(MatchingMode::Greedy),
            other => Err(Error::param("matching", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingOptions {
    pub mode: MatchingMode,
    pub exact_cap: usize,
}

impl Default for MatchingOptions {
    fn default() -> Self {
        Self {
            mode: MatchingMode::Exact,
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }
}

impl From<MatchingMode> for MatchingOptions {
    fn from(mode: MatchingMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// A pairing of point indices. For odd point counts the largest index is
/// left out and recorded as `unmatched`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
    source_size: usize,
    unmatched: Option<usize>,
}

impl Matching {
    /// Canonicalizes and validates a pairing of `0..source_size`.
    pub fn from_pairs(source_size: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = vec![false; source_size];
        let mut canon: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        for &(i, j) in &canon {
            if i == j || j >= source_size || seen[i] || seen[j] {
                return Err(Error::param("pairs", format!("invalid or repeated pair ({i}, {j})")));
            }
            seen[i] = true;
            seen[j] = true;
        }
        let missing: Vec<usize> = (0..source_size).filter(|&i| !seen[i]).collect();
        let unmatched = match missing.as_slice() {
            [] => None,
            [last] if source_size % 2 == 1 => Some(*last),
            _ => return Err(Error::param("pairs", format!("{} indices left unmatched", missing.len()))),
        };
        canon.sort_unstable();
        Ok(Self {
            pairs: canon,
            source_size,
            unmatched,
        })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn unmatched(&self) -> Option<usize> {
        self.unmatched
    }

    /// `sum |p_i - q_i|^exponent` over matched pairs.
    pub fn cost_power(&self, points: &PointSet, exponent: u32) -> Result<f64> {
        if exponent == 0 {
            return Err(Error::param("exponent", "must be at least 1"));
        }
        self.check_source(points)?;
        Ok(self
            .pairs
            .iter()
            .map(|&(i, j)| dist(points.point(i), points.point(j)).powi(exponent as i32))
            .sum())
    }

    pub(crate) fn check_source(&self, points: &PointSet) -> Result<()> {
        if points.len() != self.source_size {
            return Err(Error::param(
                "matching",
                format!("built for {} points, given {}", self.source_size, points.len()),
            ));
        }
        Ok(())
    }

    /// CSV rows `i,j,length`.
    pub fn to_csv(&self, points: &PointSet) -> String {
        let mut out = String::from("i,j,length\n");
        for &(i, j) in &self.pairs {
            out.push_str(&format!("{i},{j},{}\n", fmt_f64(dist(points.point(i), points.point(j)))));
        }
        out
    }
}

/// `sum |p_i - q_i|^exponent`; free-function form of [`Matching::cost_power`].
pub fn cost_power(matching: &Matching, points: &PointSet, exponent: u32) -> Result<f64> {
    matching.cost_power(points, exponent)
}

/// Minimum-cost matching with the default exact cap.
pub fn min_cost_matching(points: &PointSet, mode: MatchingMode) -> Result<Matching> {
    min_cost_matching_with(points, &mode.into())
}

pub fn min_cost_matching_with(points: &PointSet, options: &MatchingOptions) -> Result<Matching> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let m = n - n % 2;
    let pairs = match options.mode {
        MatchingMode::Exact => {
            if n > options.exact_cap {
                return Err(Error::ExactCapExceeded {
                    n,
                    cap: options.exact_cap,
                });
            }
            exact_pairs(points, m)
        }
        MatchingMode::Greedy => greedy_pairs(points, m),
    };
    Matching::from_pairs(n, pairs)
}

/// Integer edge costs: distances scaled so the bounding diagonal maps to 2^40.
struct CostScale {
    scale: f64,
    big: i64,
}

const COST_RESOLUTION: f64 = (1u64 << 40) as f64;

impl CostScale {
    fn new(points: &PointSet, m: usize) -> Option<Self> {
        let sub = points.subset(&(0..m).collect::<Vec<_>>());
        let (lo, hi) = sub.bounding_box().ok()?;
        let diag = dist(&lo, &hi);
        if !(diag > 0.0) {
            return None;
        }
        Some(Self {
            scale: COST_RESOLUTION / diag,
            big: COST_RESOLUTION as i64 + 2,
        })
    }

    #[inline]
    fn weight(&self, points: &PointSet, i: usize, j: usize) -> i64 {
        let c = (dist(points.point(i), points.point(j)) * self.scale).round() as i64;
        self.big - c
    }
}

const INITIAL_NEIGHBOURS: usize = 12;

/// Exact minimum-cost perfect matching on the first `m` points.
///
/// Solves on a k-nearest-neighbour candidate graph, then prices every absent
/// pair against the final dual solution. Any pair with negative slack is
/// added and the problem re-solved; when no pair violates dual feasibility
/// the sparse optimum is optimal for the complete graph.
fn exact_pairs(points: &PointSet, m: usize) -> Vec<(usize, usize)> {
    let Some(scale) = CostScale::new(points, m) else {
        // all points coincide
        return (0..m / 2).map(|k| (2 * k, 2 * k + 1)).collect();
    };
    let mut k = INITIAL_NEIGHBOURS.min(m - 1);
    let mut edge_set: HashSet<(usize, usize)> = knn_edges(points, m, k);
    loop {
        let mut edges: Vec<(usize, usize, i64)> = edge_set
            .iter()
            .map(|&(i, j)| (i, j, scale.weight(points, i, j)))
            .collect();
        edges.sort_unstable();
        let sol = blossom::max_weight_matching(m, &edges, true);
        if sol.mate.iter().any(Option::is_none) {
            // candidate graph has no perfect matching; widen it
            k = (2 * k).min(m - 1);
            edge_set.extend(knn_edges(points, m, k));
            continue;
        }
        let membership = sol.membership(m);
        let mut violated = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                if sol.slack(&membership, i, j, scale.weight(points, i, j)) < 0 && !edge_set.contains(&(i, j)) {
                    violated.push((i, j));
                }
            }
        }
        if violated.is_empty() {
            return (0..m)
                .filter_map(|i| {
                    let j = sol.mate[i].expect("perfect");
                    (i < j).then_some((i, j))
                })
                .collect();
        }
        edge_set.extend(violated);
    }
}

fn knn_edges(points: &PointSet, m: usize, k: usize) -> HashSet<(usize, usize)> {
    let mut set = HashSet::with_capacity(m * k);
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(m);
    for i in 0..m {
        scratch.clear();
        let pi = points.point(i);
        scratch.extend((0..m).filter(|&j| j != i).map(|j| (dist2(pi, points.point(j)), j)));
        let kk = k.min(scratch.len());
        if kk < scratch.len() {
            scratch.select_nth_unstable_by(kk - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        for &(_, j) in &scratch[..kk] {
            set.insert((i.min(j), i.max(j)));
        }
    }
    set
}

/// Ordered by distance, then by index pair, so ties resolve deterministically.
#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    dist_bits: u64,
    i: usize,
    j: usize,
}

fn nearest_unmatched(points: &PointSet, i: usize, m: usize, matched: &[bool]) -> Option<Candidate> {
    let pi = points.point(i);
    (0..m)
        .filter(|&j| j != i && !matched[j])
        .map(|j| Candidate {
            dist_bits: dist2(pi, points.point(j)).to_bits(),
            i: i.min(j),
            j: i.max(j),
        })
        .min()
}

fn greedy_pairs(points: &PointSet, m: usize) -> Vec<(usize, usize)> {
    let mut matched = vec![false; m];
    let mut heap: BinaryHeap<Reverse<(Candidate, usize)>> = BinaryHeap::with_capacity(m);
    for i in 0..m {
        if let Some(c) = nearest_unmatched(points, i, m, &matched) {
            heap.push(Reverse((c, i)));
        }
    }
    let mut pairs = Vec::with_capacity(m / 2);
    while let Some(Reverse((c, owner))) = heap.pop() {
        if matched[owner] {
            continue;
        }
        if matched[c.i] || matched[c.j] {
            // stale: the owner's neighbour was taken
            if let Some(next) = nearest_unmatched(points, owner, m, &matched) {
                heap.push(Reverse((next, owner)));
            }
            continue;
        }
        matched[c.i] = true;
        matched[c.j] = true;
        pairs.push((c.i, c.j));
    }
    pairs
}
