use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Beyond `GAUSSIAN_TRUNCATION * w` the Gaussian profile is exactly zero
/// (k(4) ~ 1.1e-7), which keeps every smoothed range slab-supported.
pub const GAUSSIAN_TRUNCATION: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Ball,
    Triangle,
    Epanechnikov,
    Gaussian,
}

/// Shift-invariant kernel profile `k(z)`, `z = |x - p| / w`, with `k(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub kind: KernelKind,
    /// Profile is treated as exactly zero for `z >= truncation`.
    pub truncation: f64,
}

impl KernelProfile {
    pub const BALL: KernelProfile = KernelProfile::compact(KernelKind::Ball);
    pub const TRIANGLE: KernelProfile = KernelProfile::compact(KernelKind::Triangle);
    pub const EPANECHNIKOV: KernelProfile = KernelProfile::compact(KernelKind::Epanechnikov);
    pub const GAUSSIAN: KernelProfile = KernelProfile {
        kind: KernelKind::Gaussian,
        truncation: GAUSSIAN_TRUNCATION,
    };

    const fn compact(kind: KernelKind) -> Self {
        KernelProfile {
            kind,
            truncation: 1.0,
        }
    }

    pub fn new(kind: KernelKind) -> Self {
        match kind {
            KernelKind::Gaussian => Self::GAUSSIAN,
            k => Self::compact(k),
        }
    }

    /// Evaluates `k(z)` for `z >= 0`.
    #[inline]
    pub fn k(&self, z: f64) -> f64 {
        match self.kind {
            KernelKind::Ball => {
                if z <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::Triangle => (1.0 - z).max(0.0),
            KernelKind::Epanechnikov => (1.0 - z * z).max(0.0),
            KernelKind::Gaussian => {
                if z >= self.truncation {
                    0.0
                } else {
                    (-z * z).exp()
                }
            }
        }
    }

    /// Support radius in units of `w`.
    pub fn support(&self) -> f64 {
        self.truncation
    }

    /// Constant `c1` with `|dv/ds| <= c1 / w` for half-height ranges.
    pub fn slope_constant(&self) -> f64 {
        match self.kind {
            KernelKind::Ball => f64::INFINITY,
            KernelKind::Triangle | KernelKind::Gaussian => 0.5,
            KernelKind::Epanechnikov => 1.0,
        }
    }

    /// True when the smoothed value is piecewise linear in the offset, so that
    /// breakpoints alone locate every extremum.
    pub fn is_piecewise_linear(&self) -> bool {
        matches!(self.kind, KernelKind::Ball | KernelKind::Triangle)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            KernelKind::Ball => "ball",
            KernelKind::Triangle => "triangle",
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for KernelProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "ball" => KernelKind::Ball,
            "triangle" => KernelKind::Triangle,
            "epanechnikov" => KernelKind::Epanechnikov,
            "gaussian" => KernelKind::Gaussian,
            other => return Err(Error::param("profile", format!("unknown profile `{other}`"))),
        };
        Ok(Self::new(kind))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [KernelProfile; 4] = [
        KernelProfile::BALL,
        KernelProfile::TRIANGLE,
        KernelProfile::EPANECHNIKOV,
        KernelProfile::GAUSSIAN,
    ];

    #[test]
    fn normalized_and_non_increasing() {
        for k in ALL {
            assert_eq!(k.k(0.0), 1.0, "{k}");
            let mut prev = 1.0;
            for i in 0..=500 {
                let v = k.k(i as f64 * 0.01);
                assert!(v <= prev, "{k} increases at {i}");
                prev = v;
            }
        }
    }

    #[test]
    fn compact_profiles_vanish_past_one() {
        for k in &ALL[..3] {
            assert_eq!(k.k(1.0 + 1e-12), 0.0);
            assert_eq!(k.k(3.0), 0.0);
        }
        assert_eq!(KernelProfile::GAUSSIAN.k(4.0), 0.0);
        assert!(KernelProfile::GAUSSIAN.k(3.99) > 0.0);
    }

    #[test]
    fn parses_names() {
        assert_eq!("Gaussian".parse::<KernelProfile>().unwrap(), KernelProfile::GAUSSIAN);
        assert!("cosine".parse::<KernelProfile>().is_err());
    }
}
