//! Matching length restricted to cubes, slabs and spherical shells.

use serde::{Deserialize, Serialize};

use super::Matching;
use crate::error::{Error, Result};
use crate::geometry::{dist, dot, PointSet};

/// Tolerance on segment parameters; tangent segments count as intersecting.
const PARAM_TOL: f64 = 1e-12;

/// Factor by which the diagnostic neighbourhood object is enlarged.
const EXPANSION: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum RestrictedObject {
    /// Axis-aligned cube of side `side`.
    Cube { center: Vec<f64>, side: f64 },
    /// `{x : |normal . x - offset| <= half_width}`.
    Slab {
        normal: Vec<f64>,
        offset: f64,
        half_width: f64,
    },
    /// `{x : radius - half_width <= |x - center| <= radius + half_width}`.
    Shell {
        center: Vec<f64>,
        radius: f64,
        half_width: f64,
    },
}

impl RestrictedObject {
    pub fn cube(center: Vec<f64>, side: f64) -> Result<Self> {
        let o = RestrictedObject::Cube { center, side };
        o.validate()?;
        Ok(o)
    }

    pub fn slab(normal: Vec<f64>, offset: f64, half_width: f64) -> Result<Self> {
        let norm = dot(&normal, &normal).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitNormal { norm });
        }
        let o = RestrictedObject::Slab {
            normal,
            offset,
            half_width,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn shell(center: Vec<f64>, radius: f64, half_width: f64) -> Result<Self> {
        let o = RestrictedObject::Shell {
            center,
            radius,
            half_width,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        let (w, what) = match self {
            RestrictedObject::Cube { side, .. } => (*side, "cube side"),
            RestrictedObject::Slab { half_width, .. } => (*half_width, "slab half-width"),
            RestrictedObject::Shell { half_width, radius, .. } => {
                if !(*radius >= 0.0) {
                    return Err(Error::DegenerateObject(format!("shell radius {radius}")));
                }
                (*half_width, "shell half-width")
            }
        };
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::DegenerateObject(format!("{what} {w}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            RestrictedObject::Cube { center, .. } | RestrictedObject::Shell { center, .. } => center.len(),
            RestrictedObject::Slab { normal, .. } => normal.len(),
        }
    }

    /// The `w` in the `(2w)^d` cap.
    pub fn width(&self) -> f64 {
        match self {
            RestrictedObject::Cube { side, .. } => *side,
            RestrictedObject::Slab { half_width, .. } | RestrictedObject::Shell { half_width, .. } => *half_width,
        }
    }

    /// Same object with its width multiplied by `factor`.
    pub fn expanded(&self, factor: f64) -> Self {
        match self {
            RestrictedObject::Cube { center, side } => RestrictedObject::Cube {
                center: center.clone(),
                side: side * factor,
            },
            RestrictedObject::Slab {
                normal,
                offset,
                half_width,
            } => RestrictedObject::Slab {
                normal: normal.clone(),
                offset: *offset,
                half_width: half_width * factor,
            },
            RestrictedObject::Shell {
                center,
                radius,
                half_width,
            } => RestrictedObject::Shell {
                center: center.clone(),
                radius: *radius,
                half_width: half_width * factor,
            },
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            RestrictedObject::Cube { center, side } => {
                x.iter().zip(center).all(|(a, c)| (a - c).abs() <= side / 2.0)
            }
            RestrictedObject::Slab {
                normal,
                offset,
                half_width,
            } => (dot(normal, x) - offset).abs() <= *half_width,
            RestrictedObject::Shell {
                center,
                radius,
                half_width,
            } => (dist(x, center) - radius).abs() <= *half_width,
        }
    }

    fn check_dim(&self, points: &PointSet) -> Result<()> {
        if self.dim() != points.dim() {
            return Err(Error::DimensionMismatch {
                expected: points.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// `[lo, hi]` parameters of `a + t b` for `lo_v <= a + t b <= hi_v`.
fn linear_interval(a: f64, b: f64, lo_v: f64, hi_v: f64) -> Option<(f64, f64)> {
    if b == 0.0 {
        return (lo_v <= a && a <= hi_v).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let (t0, t1) = ((lo_v - a) / b, (hi_v - a) / b);
    Some((t0.min(t1), t0.max(t1)))
}

/// Open interval of `t` with `|p + t d - c| < r`, if any.
fn ball_interval(p: &[f64], d: &[f64], c: &[f64], r: f64) -> Option<(f64, f64)> {
    let pc: Vec<f64> = p.iter().zip(c).map(|(a, b)| a - b).collect();
    let a = dot(d, d);
    let b = dot(d, &pc);
    let cc = dot(&pc, &pc) - r * r;
    if a == 0.0 {
        return (cc <= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let disc = b * b - a * cc;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some(((-b - s) / a, (-b + s) / a))
}

fn intersect(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.max(b.0), a.1.min(b.1))
}

fn nonempty(iv: (f64, f64)) -> Option<(f64, f64)> {
    (iv.0 <= iv.1 + PARAM_TOL).then(|| (iv.0, iv.1.max(iv.0)))
}

/// Parameters `(t_p, t_q)` in `[0, 1]` of the points of segment `pq` inside
/// `object` closest to `p` and to `q`. `None` when the segment misses it.
pub fn clip_interval(object: &RestrictedObject, p: &[f64], q: &[f64]) -> Option<(f64, f64)> {
    let d: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let unit = (0.0, 1.0);
    match object {
        RestrictedObject::Cube { center, side } => {
            let mut iv = unit;
            for k in 0..p.len() {
                let axis = linear_interval(p[k], d[k], center[k] - side / 2.0, center[k] + side / 2.0)?;
                iv = intersect(iv, axis);
            }
            nonempty(iv)
        }
        RestrictedObject::Slab {
            normal,
            offset,
            half_width,
        } => {
            let a = dot(normal, p);
            let b = dot(normal, &d);
            let iv = linear_interval(a, b, offset - half_width, offset + half_width)?;
            nonempty(intersect(unit, iv))
        }
        RestrictedObject::Shell {
            center,
            radius,
            half_width,
        } => {
            let outer = ball_interval(p, &d, center, radius + half_width)?;
            let outer = nonempty(intersect(unit, outer))?;
            let inner_r = radius - half_width;
            let hole = if inner_r > 0.0 {
                ball_interval(p, &d, center, inner_r)
            } else {
                None
            };
            let Some((h0, h1)) = hole else {
                return Some(outer);
            };
            // outer minus the open hole leaves up to two pieces
            let pieces = [
                nonempty((outer.0, outer.1.min(h0))),
                nonempty((outer.0.max(h1), outer.1)),
            ];
            let first = pieces.iter().flatten().next()?;
            let last = pieces.iter().flatten().last()?;
            Some((first.0, last.1))
        }
    }
}

fn clipped_length(object: &RestrictedObject, p: &[f64], q: &[f64]) -> Option<f64> {
    clip_interval(object, p, q).map(|(t0, t1)| (t1 - t0) * dist(p, q))
}

/// `sum over pairs of min{(2w)^d, |p_B - q_B|^d}` for segments meeting `object`.
pub fn rho(object: &RestrictedObject, matching: &Matching, points: &PointSet, exponent: u32) -> Result<f64> {
    if exponent == 0 {
        return Err(Error::param("exponent", "must be at least 1"));
    }
    object.validate()?;
    object.check_dim(points)?;
    matching.check_source(points)?;
    let cap = (2.0 * object.width()).powi(exponent as i32);
    Ok(matching
        .pairs()
        .iter()
        .filter_map(|&(i, j)| clipped_length(object, points.point(i), points.point(j)))
        .map(|len| len.powi(exponent as i32).min(cap))
        .sum())
}

/// Edge classification against an object `O` and its 20-fold enlargement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeTypeCounts {
    /// Edges whose segment meets `O`.
    pub intersecting: usize,
    /// Both endpoints inside the enlargement.
    pub t1: usize,
    /// One endpoint in `O`, the other outside the enlargement.
    pub t2: usize,
    /// Both endpoints outside the enlargement, segment meeting `O`.
    pub t3: usize,
}

pub fn edge_types(object: &RestrictedObject, matching: &Matching, points: &PointSet) -> Result<EdgeTypeCounts> {
    object.validate()?;
    object.check_dim(points)?;
    matching.check_source(points)?;
    let big = object.expanded(EXPANSION);
    let mut counts = EdgeTypeCounts::default();
    for &(i, j) in matching.pairs() {
        let (p, q) = (points.point(i), points.point(j));
        let meets = clip_interval(object, p, q).is_some();
        let (bp, bq) = (big.contains(p), big.contains(q));
        counts.intersecting += meets as usize;
        if bp && bq {
            counts.t1 += 1;
        } else if (object.contains(p) && !bq) || (object.contains(q) && !bp) {
            counts.t2 += 1;
        } else if !bp && !bq && meets {
            counts.t3 += 1;
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoReport {
    pub object: RestrictedObject,
    pub exponent: u32,
    pub rho: f64,
    pub edge_types: EdgeTypeCounts,
}

pub fn rho_report(object: &RestrictedObject, matching: &Matching, points: &PointSet, exponent: u32) -> Result<RhoReport> {
    Ok(RhoReport {
        object: object.clone(),
        exponent,
        rho: rho(object, matching, points, exponent)?,
        edge_types: edge_types(object, matching, points)?,
    })
}
