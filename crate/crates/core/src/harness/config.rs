use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{KernelKind, KernelProfile};
use crate::matching::{MatchingMode, MatchingOptions, DEFAULT_EXACT_CAP};
use crate::nets::LinkedFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub mean: Vec<f64>,
    pub std: f64,
    pub weight: f64,
}

/// Where the points of a run come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Uniform in `[0, side]^d`.
    Uniform { side: f64 },
    GaussianMixture { components: Vec<MixtureComponent> },
    /// Half the points uniform in `[0, cluster_side]^d`, the rest in
    /// `[side - cluster_side, side]^d`.
    TwoClusters { side: f64, cluster_side: f64 },
    /// Point file; `n` is ignored.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sample,
    Net,
    LemmaCheck,
    Cluster,
    Bench,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sample => "sample",
            Mode::Net => "net",
            Mode::LemmaCheck => "lemma-check",
            Mode::Cluster => "cluster",
            Mode::Bench => "bench",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(Mode::Sample),
            "net" | "verify-net" => Ok(Mode::Net),
            "lemma-check" => Ok(Mode::LemmaCheck),
            "cluster" => Ok(Mode::Cluster),
            "bench" => Ok(Mode::Bench),
            other => Err(Error::param("mode", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    pub n: usize,
    pub dim: usize,
    pub w: f64,
    pub profile: KernelKind,
    pub eps: f64,
    pub tau: f64,
    pub delta: f64,
    /// Directions of the halfspace evaluation net.
    pub net_directions: usize,
    /// Sample size for `sample`; derived from `eps` and `delta` when absent.
    #[serde(default)]
    pub sample_size: Option<usize>,
    pub matching: MatchingMode,
    pub exact_cap: usize,
    /// Largest `k` tried by `cluster`; `ceil(log2 n)` when absent.
    #[serde(default)]
    pub k_max: Option<usize>,
    /// Random slabs per seed in `lemma-check`.
    pub slabs: usize,
    pub family: LinkedFamily,
    /// Candidate net to verify in `net` mode instead of building one.
    #[serde(default)]
    pub net_points: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub mode: Mode,
    pub out: PathBuf,
    /// Fill `runtime_ms`; outputs are then no longer reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generator: GeneratorSpec::Uniform { side: 1.0 },
            n: 1024,
            dim: 2,
            w: 0.1,
            profile: KernelKind::Triangle,
            eps: 0.1,
            tau: 0.05,
            delta: 0.1,
            net_directions: 180,
            sample_size: None,
            matching: MatchingMode::Exact,
            exact_cap: DEFAULT_EXACT_CAP,
            k_max: None,
            slabs: 50,
            family: LinkedFamily::Halfspaces,
            net_points: None,
            seeds: vec![0],
            mode: Mode::Sample,
            out: PathBuf::from("results"),
            timing: false,
        }
    }
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {x}")))
    }
}

fn unit_open(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in (0, 1), got {x}")))
    }
}

impl ExperimentConfig {
    pub fn profile(&self) -> KernelProfile {
        KernelProfile::new(self.profile)
    }

    pub fn matching_options(&self) -> MatchingOptions {
        MatchingOptions {
            mode: self.matching,
            exact_cap: self.exact_cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        match &self.generator {
            GeneratorSpec::Uniform { side } => positive("side", *side)?,
            GeneratorSpec::TwoClusters { side, cluster_side } => {
                positive("side", *side)?;
                positive("cluster_side", *cluster_side)?;
                if cluster_side > side {
                    return Err(Error::param("cluster_side", "exceeds side"));
                }
            }
            GeneratorSpec::GaussianMixture { components } => {
                if components.is_empty() {
                    return Err(Error::param("components", "mixture needs at least one component"));
                }
                for c in components {
                    if c.mean.len() != self.dim {
                        return Err(Error::DimensionMismatch {
                            expected: self.dim,
                            found: c.mean.len(),
                        });
                    }
                    positive("std", c.std)?;
                    positive("weight", c.weight)?;
                }
            }
            GeneratorSpec::File { .. } => {}
        }
        if self.n == 0 && !matches!(self.generator, GeneratorSpec::File { .. }) {
            return Err(Error::param("n", "must be at least 1"));
        }
        positive("w", self.w)?;
        unit_open("eps", self.eps)?;
        unit_open("delta", self.delta)?;
        if !(self.tau > 0.0 && self.tau < self.eps) {
            return Err(Error::param("tau", format!("need 0 < tau < eps, got {}", self.tau)));
        }
        if self.net_directions == 0 {
            return Err(Error::param("net_directions", "must be at least 1"));
        }
        if self.sample_size.is_some_and(|s| s < 2) {
            return Err(Error::param("sample_size", "must be at least 2"));
        }
        if self.k_max == Some(0) {
            return Err(Error::param("k_max", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("seeds", "need at least one seed"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON with `out` cleared, so a replay into
    /// another directory carries the same hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let digest = Sha256::digest(serde_json::to_vec(&c).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
