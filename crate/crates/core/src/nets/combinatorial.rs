//! Every subset of a small point set that a closed halfspace can cut out.
//!
//! Each candidate boundary passes through `d` affinely independent points.
//! Points off the hyperplane fall on the side given by its equation; the
//! defining points are assigned any of the `2^d` sign patterns by tilting the
//! hyperplane within its own span by less than the gap to the other points.

use crate::error::{Error, Result};
use crate::geometry::{dot, KernelProfile, PointSet, SmoothedRange};

use crate::discrepancy::EvaluationNet;

/// Largest supported dimension; enumeration is `O(n^d 2^d)` hyperplanes.
pub const MAX_DIM: usize = 3;

/// Unit normal and offset of halfspaces `{x : normal . x >= offset}` realising
/// every subset of `points` cut by a halfspace (including the empty set and
/// the whole set), possibly with repeats.
pub fn combinatorial_halfspaces(points: &PointSet) -> Result<Vec<(Vec<f64>, f64)>> {
    let d = points.dim();
    if d == 0 || d > MAX_DIM {
        return Err(Error::UnsupportedDimension {
            dim: d,
            what: "exhaustive halfspace enumeration",
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let distinct = distinct_points(points);
    let mut out = Vec::new();
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    let (lo, hi) = distinct
        .iter()
        .map(|p| p[0])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    out.push((e1.clone(), lo - 1.0));
    out.push((e1, hi + 1.0));
    let n = distinct.len();
    let scale = distinct.iter().map(|p| dot(p, p).sqrt()).fold(1.0, f64::max);
    let on_tol = 1e-12 * scale;
    let mut tuple = vec![0usize; d];
    for_each_combination(n, d, &mut tuple, 0, 0, &mut |idx| {
        let defining: Vec<&[f64]> = idx.iter().map(|&i| distinct[i].as_slice()).collect();
        let Some(normal) = hyperplane_normal(&defining) else {
            return;
        };
        let b = dot(&normal, defining[0]);
        let gap = distinct
            .iter()
            .map(|p| (dot(&normal, p) - b).abs())
            .filter(|&f| f > on_tol)
            .fold(f64::INFINITY, f64::min);
        for mask in 0..(1u32 << d) {
            let sigma: Vec<f64> = (0..d).map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 }).collect();
            let Some((v, c)) = tilt(&defining, &sigma) else {
                continue;
            };
            let gmax = distinct.iter().map(|p| (dot(&v, p) + c).abs()).fold(0.0, f64::max);
            let eta = if gap.is_finite() { 0.5 * gap / gmax.max(1e-300) } else { 1.0 / gmax.max(1e-300) };
            for orient in [1.0, -1.0] {
                // orient * (normal . x - b + eta (v . x + c)) >= 0
                let raw: Vec<f64> = normal.iter().zip(&v).map(|(a, t)| orient * (a + eta * t)).collect();
                let off = orient * (b - eta * c);
                let norm = dot(&raw, &raw).sqrt();
                if norm > 0.0 {
                    out.push((raw.iter().map(|x| x / norm).collect(), off / norm));
                }
            }
        }
    });
    Ok(out)
}

/// The combinatorial halfspaces as smoothed ranges of the given profile.
pub fn combinatorial_halfspace_net(points: &PointSet, width: f64, profile: KernelProfile) -> Result<EvaluationNet> {
    let ranges = combinatorial_halfspaces(points)?
        .into_iter()
        .map(|(n, b)| SmoothedRange::halfspace(n, b, width, profile))
        .collect::<Result<Vec<_>>>()?;
    EvaluationNet::from_ranges(ranges)
}

fn distinct_points(points: &PointSet) -> Vec<Vec<f64>> {
    let mut v: Vec<Vec<f64>> = points.iter().map(<[f64]>::to_vec).collect();
    v.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup();
    v
}

fn for_each_combination(n: usize, k: usize, buf: &mut Vec<usize>, depth: usize, start: usize, f: &mut impl FnMut(&[usize])) {
    if depth == k {
        f(buf);
        return;
    }
    for i in start..n {
        buf[depth] = i;
        for_each_combination(n, k, buf, depth + 1, i + 1, f);
    }
}

/// Unit normal of the hyperplane through `d` points in `R^d`.
fn hyperplane_normal(pts: &[&[f64]]) -> Option<Vec<f64>> {
    let n = match pts.len() {
        1 => vec![1.0],
        2 => {
            let e = [pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]];
            vec![-e[1], e[0]]
        }
        3 => {
            let a: Vec<f64> = (0..3).map(|k| pts[1][k] - pts[0][k]).collect();
            let b: Vec<f64> = (0..3).map(|k| pts[2][k] - pts[0][k]).collect();
            vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
        }
        _ => return None,
    };
    let norm = dot(&n, &n).sqrt();
    let scale: f64 = pts.iter().flat_map(|p| p.iter()).map(|x| x.abs()).fold(1.0, f64::max);
    (norm > 1e-12 * scale.powi(pts.len() as i32 - 1)).then(|| n.iter().map(|x| x / norm).collect())
}

/// Affine `g(x) = v . x + c` with `g(p_k) = sigma_k` and `v` in the span of
/// the differences `p_k - p_0`, so `v` is orthogonal to the normal.
fn tilt(pts: &[&[f64]], sigma: &[f64]) -> Option<(Vec<f64>, f64)> {
    let d = pts[0].len();
    let e: Vec<Vec<f64>> = pts[1..].iter().map(|p| p.iter().zip(pts[0]).map(|(a, b)| a - b).collect()).collect();
    let r: Vec<f64> = sigma[1..].iter().map(|s| s - sigma[0]).collect();
    let lambda: Vec<f64> = match e.len() {
        0 => vec![],
        1 => vec![r[0] / dot(&e[0], &e[0])],
        2 => {
            let (g00, g01, g11) = (dot(&e[0], &e[0]), dot(&e[0], &e[1]), dot(&e[1], &e[1]));
            let det = g00 * g11 - g01 * g01;
            if det == 0.0 {
                return None;
            }
            vec![(r[0] * g11 - r[1] * g01) / det, (g00 * r[1] - g01 * r[0]) / det]
        }
        _ => return None,
    };
    let mut v = vec![0.0; d];
    for (l, ek) in lambda.iter().zip(&e) {
        for (vi, x) in v.iter_mut().zip(ek) {
            *vi += l * x;
        }
    }
    let c = sigma[0] - dot(&v, pts[0]);
    Some((v, c))
}
