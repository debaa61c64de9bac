use serde::{Deserialize, Serialize};

use super::kernel::{KernelKind, KernelProfile};
use super::points::{dist, dot, PointSet};
use crate::error::{Error, Result};

const UNIT_TOLERANCE: f64 = 1e-9;

/// Boundary shape of a smoothed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RangeShape {
    /// Inside is `normal . p >= offset`.
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// Kernel range centred at a point. `half_height` scales the value by 1/2.
    PointCentered {
        center: Vec<f64>,
        #[serde(default)]
        half_height: bool,
    },
    /// Ball of `radius` whose boundary is smoothed over a shell of width 2w.
    SphereBoundary {
        center: Vec<f64>,
        radius: f64,
        inside_is_one: bool,
    },
}

/// A range that maps points to `[0, 1]`, smoothing its boundary over width `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedRange {
    pub shape: RangeShape,
    pub width: f64,
    pub profile: KernelProfile,
}

impl SmoothedRange {
    pub fn halfspace(normal: Vec<f64>, offset: f64, width: f64, profile: KernelProfile) -> Result<Self> {
        check_width(width)?;
        let norm = dot(&normal, &normal).sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitNormal { norm });
        }
        Ok(Self {
            shape: RangeShape::Halfspace { normal, offset },
            width,
            profile,
        })
    }

    /// Halfspace from an arbitrary nonzero direction, normalized here.
    pub fn halfspace_from_direction(direction: &[f64], offset: f64, width: f64, profile: KernelProfile) -> Result<Self> {
        let norm = dot(direction, direction).sqrt();
        if !(norm > 0.0) {
            return Err(Error::NonUnitNormal { norm });
        }
        let normal: Vec<f64> = direction.iter().map(|x| x / norm).collect();
        Self::halfspace(normal, offset / norm, width, profile)
    }

    pub fn point_centered(center: Vec<f64>, width: f64, profile: KernelProfile) -> Result<Self> {
        check_width(width)?;
        Ok(Self {
            shape: RangeShape::PointCentered {
                center,
                half_height: false,
            },
            width,
            profile,
        })
    }

    pub fn point_centered_half_height(center: Vec<f64>, width: f64, profile: KernelProfile) -> Result<Self> {
        let mut r = Self::point_centered(center, width, profile)?;
        if let RangeShape::PointCentered { half_height, .. } = &mut r.shape {
            *half_height = true;
        }
        Ok(r)
    }

    pub fn sphere_boundary(
        center: Vec<f64>,
        radius: f64,
        inside_is_one: bool,
        width: f64,
        profile: KernelProfile,
    ) -> Result<Self> {
        check_width(width)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self {
            shape: RangeShape::SphereBoundary {
                center,
                radius,
                inside_is_one,
            },
            width,
            profile,
        })
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            RangeShape::Halfspace { normal, .. } => normal.len(),
            RangeShape::PointCentered { center, .. } | RangeShape::SphereBoundary { center, .. } => center.len(),
        }
    }

    /// Signed distance to the boundary, positive on the side valued 1.
    /// For point-centred ranges this is the unsigned distance to the centre.
    #[inline]
    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        match &self.shape {
            RangeShape::Halfspace { normal, offset } => dot(normal, p) - offset,
            RangeShape::PointCentered { center, .. } => dist(center, p),
            RangeShape::SphereBoundary {
                center,
                radius,
                inside_is_one,
            } => {
                let s = dist(center, p) - radius;
                if *inside_is_one {
                    -s
                } else {
                    s
                }
            }
        }
    }

    /// `v_h(p)`, checked for dimension.
    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        Ok(self.value(p))
    }

    #[inline]
    pub(crate) fn value(&self, p: &[f64]) -> f64 {
        let s = self.signed_distance(p);
        match &self.shape {
            RangeShape::PointCentered { half_height, .. } => {
                let k = self.profile.k(s / self.width);
                if *half_height {
                    0.5 * k
                } else {
                    k
                }
            }
            _ => boundary_value(self.profile, s, self.width),
        }
    }
}

fn check_width(width: f64) -> Result<()> {
    if width > 0.0 && width.is_finite() {
        Ok(())
    } else {
        Err(Error::param("w", format!("must be positive and finite, got {width}")))
    }
}

/// Value of a smoothed boundary at signed distance `s`.
///
/// Triangle uses the explicit four-case form; smooth profiles use
/// `1 - k(s/w)/2` inside and `k(-s/w)/2` outside. The ball profile is the
/// binary indicator of `s >= 0`. `s == 0` resolves to the inside branch.
#[inline]
pub fn boundary_value(profile: KernelProfile, s: f64, w: f64) -> f64 {
    match profile.kind {
        KernelKind::Ball => {
            if s >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        KernelKind::Triangle => {
            if s >= w {
                1.0
            } else if s >= 0.0 {
                0.5 + s / (2.0 * w)
            } else if s > -w {
                0.5 - (-s) / (2.0 * w)
            } else {
                0.0
            }
        }
        _ => {
            if s >= 0.0 {
                1.0 - 0.5 * profile.k(s / w)
            } else {
                0.5 * profile.k(-s / w)
            }
        }
    }
}

/// Smoothed density estimate: weighted mean of `v_h` over `points`, with
/// weights normalized by their total absolute value.
pub fn sde(points: &PointSet, range: &SmoothedRange) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    points.check_dim(range.dim())?;
    let total = points.total_abs_weight();
    let sum: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| points.weight(i) * range.value(p))
        .sum();
    Ok(sum / total)
}

/// Kernel density estimate at `x` with height-1 kernels.
pub fn kde(points: &PointSet, x: &[f64], width: f64, profile: KernelProfile) -> Result<f64> {
    let range = SmoothedRange::point_centered(x.to_vec(), width, profile)?;
    sde(points, &range)
}

/// Indices `i` with `v_h(p_i) >= tau`.
pub fn superlevel_indices(points: &PointSet, range: &SmoothedRange, tau: f64) -> Result<Vec<usize>> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::param("tau", format!("must lie in (0, 1), got {tau}")));
    }
    points.check_dim(range.dim())?;
    Ok(points
        .iter()
        .enumerate()
        .filter(|(_, p)| range.value(p) >= tau)
        .map(|(i, _)| i)
        .collect())
}
