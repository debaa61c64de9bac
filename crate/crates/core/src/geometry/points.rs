use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite point set in R^d, stored row-major, with optional weights.
///
/// Weights default to +1. Non-negative weights can be attached with
/// [`PointSet::with_weights`]; signed weights (a two-class labelling) only
/// come from [`PointSet::two_class`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl PointSet {
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be positive"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Ok(Self {
            dim,
            coords,
            weights: None,
        })
    }

    /// Builds from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be positive"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        Ok(Self {
            dim,
            coords,
            weights: None,
        })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim: dim.max(1),
            coords: Vec::new(),
            weights: None,
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::WeightLength {
                weights: weights.len(),
                points: self.len(),
            });
        }
        if let Some((index, &weight)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
        {
            return Err(Error::NegativeWeight { index, weight });
        }
        self.weights = Some(weights);
        Ok(self)
    }

    /// Positive class gets weight +1 and negative class -1, so that density
    /// estimates act as a signed classifier score.
    pub fn two_class(positive: &PointSet, negative: &PointSet) -> Result<Self> {
        if positive.dim != negative.dim {
            return Err(Error::DimensionMismatch {
                expected: positive.dim,
                found: negative.dim,
            });
        }
        let mut coords = positive.coords.clone();
        coords.extend_from_slice(&negative.coords);
        let mut weights = vec![1.0; positive.len()];
        weights.extend(std::iter::repeat_n(-1.0, negative.len()));
        Ok(Self {
            dim: positive.dim,
            coords,
            weights: Some(weights),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn has_signed_weights(&self) -> bool {
        self.weights
            .as_ref()
            .is_some_and(|w| w.iter().any(|&x| x < 0.0))
    }

    /// Sum of absolute weights; the normalizer of every density estimate.
    pub fn total_abs_weight(&self) -> f64 {
        match &self.weights {
            None => self.len() as f64,
            Some(w) => w.iter().map(|x| x.abs()).sum(),
        }
    }

    /// Per-point coefficients `w_i / sum |w|`.
    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let total = self.total_abs_weight();
        if total <= 0.0 {
            return Err(Error::param("weights", "total absolute weight is zero"));
        }
        Ok((0..self.len()).map(|i| self.weight(i) / total).collect())
    }

    /// Sub-point-set in the order given by `indices`; weights follow.
    pub fn subset(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        let weights = self
            .weights
            .as_ref()
            .map(|w| indices.iter().map(|&i| w[i]).collect());
        PointSet {
            dim: self.dim,
            coords,
            weights,
        }
    }

    pub fn concat(&self, other: &PointSet) -> Result<PointSet> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let weights = match (&self.weights, &other.weights) {
            (None, None) => None,
            _ => Some(
                (0..self.len())
                    .map(|i| self.weight(i))
                    .chain((0..other.len()).map(|i| other.weight(i)))
                    .collect(),
            ),
        };
        Ok(PointSet {
            dim: self.dim,
            coords,
            weights,
        })
    }

    /// Uniformly rescales every coordinate.
    pub fn scaled(&self, factor: f64) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords.iter().map(|c| c * factor).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Smallest enclosing axis-aligned cube: (lower corner, side length).
    pub fn bounding_cube(&self) -> Result<(Vec<f64>, f64)> {
        let (lo, hi) = self.bounding_box()?;
        let side = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| b - a)
            .fold(0.0_f64, f64::max);
        Ok((lo, side))
    }

    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Ok((lo, hi))
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            })
        } else {
            Ok(())
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist_linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows() {
        let err = PointSet::new(2, &[vec![0.0, 1.0], vec![1.0]]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 1 });
    }

    #[test]
    fn negative_weights_only_via_two_class() {
        let p = PointSet::new(1, &[vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(
            p.clone().with_weights(vec![1.0, -1.0]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        let signed = PointSet::two_class(&p, &p).unwrap();
        assert!(signed.has_signed_weights());
        assert_eq!(signed.total_abs_weight(), 4.0);
    }

    #[test]
    fn bounding_cube_uses_largest_extent() {
        let p = PointSet::new(2, &[vec![0.0, 0.0], vec![3.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let (lo, side) = p.bounding_cube().unwrap();
        assert_eq!(lo, vec![0.0, -1.0]);
        assert_eq!(side, 3.0);
    }
}
