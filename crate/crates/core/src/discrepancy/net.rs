//! Finite families of smoothed ranges over which suprema are measured.
//!
//! A halfspace net fixes a set of directions and, per direction, a sorted list
//! of offsets. Linear functionals `sum c_i v_h(p_i)` are evaluated over all
//! offsets of a direction in one sweep over the sorted projections.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{boundary_value, dot, KernelKind, KernelProfile, PointSet, SmoothedRange};
use crate::rng::{self, Purpose};

/// Uniform subdivisions inserted between consecutive breakpoints for smooth profiles.
pub const SMOOTH_REFINEMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetMode {
    /// Offsets at every breakpoint of the per-direction evaluation.
    CriticalOffsets,
    /// This many evenly spaced offsets spanning the projected data.
    GridOffsets(usize),
}

#[derive(Debug, Clone, PartialEq)]
enum NetKind {
    Halfspaces {
        directions: Vec<Vec<f64>>,
        offsets: Vec<Vec<f64>>,
    },
    Explicit(Vec<SmoothedRange>),
}

/// Position of a range within a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RangeId {
    pub group: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationNet {
    dim: usize,
    width: f64,
    profile: KernelProfile,
    kind: NetKind,
}

/// A quantity evaluated on every range of a net.
pub(crate) enum Probe<'a> {
    /// `sum_i coeffs[i] * v_h(points[i])`.
    Sum { points: &'a PointSet, coeffs: Vec<f64> },
    /// `max_i v_h(points[i])`, or `-inf` for an empty set.
    MaxValue { points: &'a PointSet },
}

impl Probe<'_> {
    fn points(&self) -> &PointSet {
        match self {
            Probe::Sum { points, .. } | Probe::MaxValue { points } => points,
        }
    }

    fn eval_direct(&self, range: &SmoothedRange) -> f64 {
        match self {
            Probe::Sum { points, coeffs } => points
                .iter()
                .zip(coeffs)
                .map(|(p, c)| c * range.value(p))
                .sum(),
            Probe::MaxValue { points } => points.iter().map(|p| range.value(p)).fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Unit directions: evenly spaced angles in the plane, a Fibonacci lattice on
/// the 2-sphere, seeded Gaussian directions above that.
pub fn directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => (0..count).map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = rng::stream(0, Purpose::NetDirections, dim as u64);
            (0..count)
                .map(|_| loop {
                    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = dot(&v, &v).sqrt();
                    if n > 1e-12 {
                        break v.into_iter().map(|x| x / n).collect();
                    }
                })
                .collect()
        }
    }
}

fn sorted_dedup(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Net of smoothed halfspaces adapted to `points`.
pub fn build_evaluation_net(
    points: &PointSet,
    width: f64,
    profile: KernelProfile,
    n_dirs: usize,
    mode: OffsetMode,
) -> Result<EvaluationNet> {
    if n_dirs == 0 {
        return Err(Error::param("n_dirs", "must be at least 1"));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::param("w", format!("must be positive and finite, got {width}")));
    }
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let dirs = directions(points.dim(), n_dirs);
    let reach = width * profile.support();
    let offsets = dirs
        .par_iter()
        .map(|u| {
            let t: Vec<f64> = points.iter().map(|p| dot(u, p)).collect();
            match mode {
                OffsetMode::CriticalOffsets => critical_offsets(&t, reach, profile),
                OffsetMode::GridOffsets(count) => grid_offsets(&t, reach, count.max(1)),
            }
        })
        .collect();
    Ok(EvaluationNet {
        dim: points.dim(),
        width,
        profile,
        kind: NetKind::Halfspaces {
            directions: dirs,
            offsets,
        },
    })
}

fn critical_offsets(t: &[f64], reach: f64, profile: KernelProfile) -> Vec<f64> {
    let mut b: Vec<f64> = Vec::with_capacity(3 * t.len());
    for &x in t {
        b.push(x - reach);
        b.push(x + reach);
        if profile.kind != KernelKind::Triangle {
            b.push(x);
        }
    }
    let b = sorted_dedup(b);
    if profile.is_piecewise_linear() {
        return b;
    }
    let mut refined = Vec::with_capacity(b.len() * SMOOTH_REFINEMENT);
    for pair in b.windows(2) {
        for k in 0..SMOOTH_REFINEMENT {
            refined.push(pair[0] + (pair[1] - pair[0]) * k as f64 / SMOOTH_REFINEMENT as f64);
        }
    }
    refined.extend(b.last());
    sorted_dedup(refined)
}

fn grid_offsets(t: &[f64], reach: f64, count: usize) -> Vec<f64> {
    let lo = t.iter().copied().fold(f64::INFINITY, f64::min) - reach;
    let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max) + reach;
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    sorted_dedup(
        (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    )
}

impl EvaluationNet {
    /// Net consisting of exactly the given ranges, evaluated directly.
    pub fn from_ranges(ranges: Vec<SmoothedRange>) -> Result<Self> {
        let first = ranges.first().ok_or(Error::EmptyNet)?;
        let (dim, width, profile) = (first.dim(), first.width, first.profile);
        if let Some(r) = ranges.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.dim(),
            });
        }
        Ok(Self {
            dim,
            width,
            profile,
            kind: NetKind::Explicit(ranges),
        })
    }

    /// Kernel ranges centred at each of `centers`; measures kernel-sample error.
    pub fn kernel_centers(centers: &PointSet, width: f64, profile: KernelProfile) -> Result<Self> {
        let ranges = centers
            .iter()
            .map(|c| SmoothedRange::point_centered(c.to_vec(), width, profile))
            .collect::<Result<Vec<_>>>()?;
        Self::from_ranges(ranges)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn profile(&self) -> KernelProfile {
        self.profile
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            NetKind::Halfspaces { offsets, .. } => offsets.iter().map(Vec::len).sum(),
            NetKind::Explicit(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of directions for halfspace nets, 0 otherwise.
    pub fn n_directions(&self) -> usize {
        match &self.kind {
            NetKind::Halfspaces { directions, .. } => directions.len(),
            NetKind::Explicit(_) => 0,
        }
    }

    /// Offsets of direction `group`, if this is a halfspace net.
    pub fn offsets(&self, group: usize) -> Option<&[f64]> {
        match &self.kind {
            NetKind::Halfspaces { offsets, .. } => offsets.get(group).map(Vec::as_slice),
            NetKind::Explicit(_) => None,
        }
    }

    pub fn range(&self, id: RangeId) -> SmoothedRange {
        match &self.kind {
            NetKind::Halfspaces { directions, offsets } => SmoothedRange {
                shape: crate::geometry::RangeShape::Halfspace {
                    normal: directions[id.group].clone(),
                    offset: offsets[id.group][id.index],
                },
                width: self.width,
                profile: self.profile,
            },
            NetKind::Explicit(r) => r[id.index].clone(),
        }
    }

    /// Every range, in net order.
    pub fn ranges(&self) -> Vec<SmoothedRange> {
        self.ids().map(|id| self.range(id)).collect()
    }

    pub fn ids(&self) -> impl Iterator<Item = RangeId> + '_ {
        let groups: Vec<(usize, usize)> = match &self.kind {
            NetKind::Halfspaces { offsets, .. } => offsets.iter().map(Vec::len).enumerate().collect(),
            NetKind::Explicit(r) => vec![(0, r.len())],
        };
        groups
            .into_iter()
            .flat_map(|(g, len)| (0..len).map(move |index| RangeId { group: g, index }))
    }

    pub(crate) fn check_points(&self, points: &PointSet) -> Result<()> {
        if points.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: points.dim(),
            });
        }
        Ok(())
    }

    /// Folds `visit` over every range in net order, with one probe value per
    /// entry of `probes`. Groups are processed in parallel and their
    /// accumulators combined left to right, so the result does not depend on
    /// scheduling.
    pub(crate) fn fold<A, V, R>(&self, probes: &[Probe<'_>], identity: A, visit: V, reduce: R) -> Result<A>
    where
        A: Clone + Send + Sync,
        V: Fn(&mut A, RangeId, &[f64]) + Sync,
        R: Fn(A, A) -> A,
    {
        if self.is_empty() {
            return Err(Error::EmptyNet);
        }
        for p in probes {
            self.check_points(p.points())?;
        }
        let parts: Vec<A> = match &self.kind {
            NetKind::Halfspaces { directions, offsets } => directions
                .par_iter()
                .zip(offsets.par_iter())
                .enumerate()
                .map(|(g, (u, offs))| {
                    let sweeps: Vec<Sweep> = probes.iter().map(|p| Sweep::new(p, u, self.width, self.profile)).collect();
                    let mut acc = identity.clone();
                    let mut values = vec![0.0; probes.len()];
                    for (index, &b) in offs.iter().enumerate() {
                        for (v, s) in values.iter_mut().zip(&sweeps) {
                            *v = s.value(b);
                        }
                        visit(&mut acc, RangeId { group: g, index }, &values);
                    }
                    acc
                })
                .collect(),
            NetKind::Explicit(ranges) => {
                const CHUNK: usize = 64;
                ranges
                    .par_chunks(CHUNK)
                    .enumerate()
                    .map(|(c, chunk)| {
                        let mut acc = identity.clone();
                        let mut values = vec![0.0; probes.len()];
                        for (k, r) in chunk.iter().enumerate() {
                            for (v, p) in values.iter_mut().zip(probes) {
                                *v = p.eval_direct(r);
                            }
                            visit(
                                &mut acc,
                                RangeId {
                                    group: 0,
                                    index: c * CHUNK + k,
                                },
                                &values,
                            );
                        }
                        acc
                    })
                    .collect()
            }
        };
        Ok(parts.into_iter().reduce(reduce).expect("nonempty net"))
    }

    /// Largest `|score(values)|`-style maximum of `score` over the net; the
    /// first range in net order wins ties.
    pub(crate) fn argmax<S>(&self, probes: &[Probe<'_>], score: S) -> Result<(f64, RangeId)>
    where
        S: Fn(&[f64]) -> f64 + Sync,
    {
        let best = self.fold(
            probes,
            None::<(f64, RangeId)>,
            |acc, id, values| {
                let s = score(values);
                if acc.is_none_or(|(b, _)| s > b) {
                    *acc = Some((s, id));
                }
            },
            |a, b| match (a, b) {
                (Some(x), Some(y)) if y.0 > x.0 => Some(y),
                (None, y) => y,
                (x, _) => x,
            },
        )?;
        Ok(best.expect("nonempty net"))
    }
}

/// Per-direction evaluator over sorted projections.
enum Sweep {
    /// Triangle profile: value is `clamp(1/2 + s/(2w), 0, 1)`, so window sums
    /// reduce to prefix sums of `c` and `c t`. Projections are shifted by
    /// `origin` to limit cancellation.
    Linear {
        t: Vec<f64>,
        c_prefix: Vec<f64>,
        ct_prefix: Vec<f64>,
        origin: f64,
        w: f64,
    },
    /// Ball profile: value is the indicator of `t >= b`.
    Step { t: Vec<f64>, c_prefix: Vec<f64> },
    /// Smooth profiles: explicit sum over the support window.
    Window {
        t: Vec<f64>,
        c: Vec<f64>,
        c_prefix: Vec<f64>,
        reach: f64,
        w: f64,
        profile: KernelProfile,
    },
    /// Value at the largest projection.
    Max { t_max: f64, w: f64, profile: KernelProfile },
}

fn prefix(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for v in values {
        acc += v;
        out.push(acc);
    }
    out
}

impl Sweep {
    fn new(probe: &Probe<'_>, u: &[f64], w: f64, profile: KernelProfile) -> Self {
        match probe {
            Probe::MaxValue { points } => Sweep::Max {
                t_max: points.iter().map(|p| dot(u, p)).fold(f64::NEG_INFINITY, f64::max),
                w,
                profile,
            },
            Probe::Sum { points, coeffs } => {
                let mut tc: Vec<(f64, f64)> = points.iter().map(|p| dot(u, p)).zip(coeffs.iter().copied()).collect();
                tc.sort_by(|a, b| a.0.total_cmp(&b.0));
                let t: Vec<f64> = tc.iter().map(|x| x.0).collect();
                let c_prefix = prefix(tc.iter().map(|x| x.1));
                match profile.kind {
                    KernelKind::Triangle => {
                        let origin = t.get(t.len() / 2).copied().unwrap_or(0.0);
                        Sweep::Linear {
                            ct_prefix: prefix(tc.iter().map(|x| x.1 * (x.0 - origin))),
                            t,
                            c_prefix,
                            origin,
                            w,
                        }
                    }
                    KernelKind::Ball => Sweep::Step { t, c_prefix },
                    _ => Sweep::Window {
                        c: tc.iter().map(|x| x.1).collect(),
                        t,
                        c_prefix,
                        reach: w * profile.support(),
                        w,
                        profile,
                    },
                }
            }
        }
    }

    fn value(&self, b: f64) -> f64 {
        match self {
            Sweep::Linear {
                t,
                c_prefix,
                ct_prefix,
                origin,
                w,
            } => {
                let total = *c_prefix.last().unwrap();
                let lo = t.partition_point(|&x| x - b <= -w);
                let hi = t.partition_point(|&x| x - b < *w);
                let inside = total - c_prefix[hi];
                let cw = c_prefix[hi] - c_prefix[lo];
                let ctw = ct_prefix[hi] - ct_prefix[lo];
                // sum over the window of c (1/2 + (t - b)/(2w))
                inside + 0.5 * cw + (ctw - (b - origin) * cw) / (2.0 * w)
            }
            Sweep::Step { t, c_prefix } => {
                let total = *c_prefix.last().unwrap();
                total - c_prefix[t.partition_point(|&x| x < b)]
            }
            Sweep::Window {
                t,
                c,
                c_prefix,
                reach,
                w,
                profile,
            } => {
                let total = *c_prefix.last().unwrap();
                // widened slightly so rounding in s/w never leaves a tail outside
                let edge = reach * (1.0 + 1e-9);
                let lo = t.partition_point(|&x| x - b <= -edge);
                let hi = t.partition_point(|&x| x - b < edge);
                let window: f64 = (lo..hi).map(|i| c[i] * boundary_value(*profile, t[i] - b, *w)).sum();
                total - c_prefix[hi] + window
            }
            Sweep::Max { t_max, w, profile } => {
                if t_max.is_finite() {
                    boundary_value(*profile, t_max - b, *w)
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}
