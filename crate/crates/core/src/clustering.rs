//! Farthest-point k-center clustering under L-infinity and the adaptive
//! cluster complexity `Phi = min_k max{k - 1, k l_k}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist_linf, io::fmt_f64, PointSet};

/// Approximation factor of `Phi` from farthest-point traversal with
/// axis-aligned cubes.
pub const PHI_APPROXIMATION: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Leading constant of [`predict_sample_size`].
pub const PREDICT_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub k: usize,
    /// Twice the largest L-infinity distance to the nearest of the first `k` centers.
    pub ell: f64,
    /// `max{k - 1, k ell}`.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    /// Center indices in selection order; the first is always 0.
    pub center_indices: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub table: Vec<ClusterRow>,
    pub phi: f64,
    /// Smallest `k` attaining `phi`.
    pub best_k: usize,
    pub approximation_factor: f64,
}

impl ClusterSummary {
    pub fn ell(&self, k: usize) -> Option<f64> {
        self.table.get(k.checked_sub(1)?).map(|r| r.ell)
    }

    pub fn phi_k(&self, k: usize) -> Option<f64> {
        self.table.get(k.checked_sub(1)?).map(|r| r.phi)
    }

    /// CSV rows `k,ell_k,phi_k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,ell_k,phi_k\n");
        for r in &self.table {
            out.push_str(&format!("{},{},{}\n", r.k, fmt_f64(r.ell), fmt_f64(r.phi)));
        }
        out
    }
}

/// `ceil(log2 n)`, at least 1.
pub fn default_k_max(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1) as usize
}

/// Gonzalez traversal under L-infinity. The first center is index 0; each
/// later center is the point farthest from the chosen ones, smallest index on
/// ties. `k_max` is capped at `|P|`.
pub fn gonzalez_linf(points: &PointSet, k_max: usize) -> Result<ClusterSummary> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if k_max == 0 {
        return Err(Error::param("k_max", "must be at least 1"));
    }
    let n = points.len();
    let k_max = k_max.min(n);
    let mut nearest: Vec<f64> = vec![f64::INFINITY; n];
    let mut center_indices = Vec::with_capacity(k_max);
    let mut table = Vec::with_capacity(k_max);
    let mut next = 0usize;
    for k in 1..=k_max {
        center_indices.push(next);
        let c = points.point(next);
        nearest.par_iter_mut().enumerate().for_each(|(i, d)| {
            *d = d.min(dist_linf(c, points.point(i)));
        });
        let (far, radius) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bd), (i, &d)| if d > bd { (i, d) } else { (bi, bd) });
        let ell = 2.0 * radius;
        table.push(ClusterRow {
            k,
            ell,
            phi: ((k - 1) as f64).max(k as f64 * ell),
        });
        next = far;
    }
    let (best_k, phi) = table
        .iter()
        .map(|r| (r.k, r.phi))
        .fold((0, f64::INFINITY), |(bk, bp), (k, p)| if p < bp { (k, p) } else { (bk, bp) });
    Ok(ClusterSummary {
        centers: center_indices.iter().map(|&i| points.point(i).to_vec()).collect(),
        center_indices,
        table,
        phi,
        best_k,
        approximation_factor: PHI_APPROXIMATION,
    })
}

/// Size formula `c (Phi/w)^(2(d-1)/(d+2)) (L/eps)^(2d/(d+2))` with the square
/// root of the log term `L` supplied by the caller.
pub fn sample_size_raw(phi: f64, w: f64, eps: f64, d: usize, sqrt_log: f64) -> f64 {
    let d = d as f64;
    PREDICT_CONSTANT * (phi / w).powf(2.0 * (d - 1.0) / (d + 2.0)) * (sqrt_log / eps).powf(2.0 * d / (d + 2.0))
}

/// Predicted epsilon-sample size with `Phi` (or the enclosing cube side) in
/// place of the data extent, rounded up.
pub fn predict_sample_size(phi: f64, w: f64, eps: f64, delta: f64, d: usize) -> Result<usize> {
    if !(phi > 0.0 && w > 0.0) || !phi.is_finite() {
        return Err(Error::param("phi", format!("phi and w must be positive, got {phi}, {w}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if d == 0 {
        return Err(Error::param("d", "must be at least 1"));
    }
    let arg = phi / (w * eps * delta);
    if !(arg > 1.0) {
        return Err(Error::param("phi", format!("phi/(w eps delta) = {arg} leaves no positive logarithm")));
    }
    Ok(sample_size_raw(phi, w, eps, d, arg.ln().sqrt()).ceil() as usize)
}
