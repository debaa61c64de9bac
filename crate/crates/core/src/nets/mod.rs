//! (eps, tau)-nets and hitting sets of smoothed range spaces, construction
//! through the linked binary range space, and checks of the implications
//! between samples, hitting sets and nets.

mod combinatorial;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{eps_sample_error, EvaluationNet, Probe};
use crate::error::{Error, Result};
use crate::geometry::{dot, PointSet, SmoothedRange};
use crate::rng::{self, Purpose};

pub use combinatorial::{combinatorial_halfspace_net, combinatorial_halfspaces, MAX_DIM};

/// A range where a check failed, with the measured quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub range: SmoothedRange,
    pub sde_p: f64,
    /// `max_{q in Q} v_h(q)`; `None` for empty `Q`.
    pub best_q_value: Option<f64>,
    pub sde_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetReport {
    pub eps: f64,
    pub tau: f64,
    pub is_net: bool,
    pub is_hitting_set: bool,
    /// First range (in net order) with no point of value at least `tau`.
    pub net_witness: Option<Witness>,
    /// First range (in net order) with `sde_Q < tau`.
    pub hitting_witness: Option<Witness>,
    /// Ranges with `sde_P >= eps`.
    pub qualifying_ranges: usize,
}

fn check_eps_tau(eps: f64, tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < eps && eps < 1.0) {
        return Err(Error::param("tau", format!("need 0 < tau < eps < 1, got eps = {eps}, tau = {tau}")));
    }
    Ok(())
}

#[derive(Clone)]
struct Failures {
    qualifying: usize,
    net: Option<(crate::discrepancy::RangeId, [f64; 3])>,
    hitting: Option<(crate::discrepancy::RangeId, [f64; 3])>,
}

/// Runs both the net and the hitting-set checks in one sweep over `net`.
pub fn verify(p: &PointSet, q: &PointSet, eps: f64, tau: f64, net: &EvaluationNet) -> Result<NetReport> {
    check_eps_tau(eps, tau)?;
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let q_coeffs = if q.is_empty() { Vec::new() } else { q.normalized_weights()? };
    let probes = [
        Probe::Sum {
            points: p,
            coeffs: p.normalized_weights()?,
        },
        Probe::Sum { points: q, coeffs: q_coeffs },
        Probe::MaxValue { points: q },
    ];
    let first = |a: Option<_>, b: Option<_>| a.or(b);
    let found = net.fold(
        &probes,
        Failures {
            qualifying: 0,
            net: None,
            hitting: None,
        },
        |acc, id, v| {
            if v[0] >= eps {
                acc.qualifying += 1;
                if acc.net.is_none() && !(v[2] >= tau) {
                    acc.net = Some((id, [v[0], v[1], v[2]]));
                }
                if acc.hitting.is_none() && !(v[1] >= tau) {
                    acc.hitting = Some((id, [v[0], v[1], v[2]]));
                }
            }
        },
        |a, b| Failures {
            qualifying: a.qualifying + b.qualifying,
            net: first(a.net, b.net),
            hitting: first(a.hitting, b.hitting),
        },
    )?;
    let witness = |f: Option<(crate::discrepancy::RangeId, [f64; 3])>| {
        f.map(|(id, v)| Witness {
            range: net.range(id),
            sde_p: v[0],
            sde_q: v[1],
            best_q_value: v[2].is_finite().then_some(v[2]),
        })
    };
    Ok(NetReport {
        eps,
        tau,
        is_net: found.net.is_none(),
        is_hitting_set: found.hitting.is_none(),
        net_witness: witness(found.net),
        hitting_witness: witness(found.hitting),
        qualifying_ranges: found.qualifying,
    })
}

/// Checks that every range with `sde_P >= eps` has a point of `Q` with value
/// at least `tau`. The report also carries the hitting-set verdict.
pub fn verify_eps_tau_net(p: &PointSet, q: &PointSet, eps: f64, tau: f64, net: &EvaluationNet) -> Result<NetReport> {
    verify(p, q, eps, tau, net)
}

/// Checks that every range with `sde_P >= eps` has `sde_Q >= tau`. The report
/// also carries the net verdict.
pub fn verify_hitting_set(p: &PointSet, q: &PointSet, eps: f64, tau: f64, net: &EvaluationNet) -> Result<NetReport> {
    verify(p, q, eps, tau, net)
}

/// Binary range family whose superlevel sets link to the smoothed ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkedFamily {
    /// Smoothed halfspaces; shatter dimension `d`.
    Halfspaces,
    /// Kernel ranges; shatter dimension `d + 1`.
    Balls,
}

impl LinkedFamily {
    pub fn shatter_dimension(self, dim: usize) -> usize {
        match self {
            LinkedFamily::Halfspaces => dim,
            LinkedFamily::Balls => dim + 1,
        }
    }
}

impl fmt::Display for LinkedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkedFamily::Halfspaces => "halfspaces",
            LinkedFamily::Balls => "balls",
        })
    }
}

impl FromStr for LinkedFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "halfspaces" | "halfspace" => Ok(LinkedFamily::Halfspaces),
            "balls" | "ball" => Ok(LinkedFamily::Balls),
            other => Err(Error::param("family", format!("unknown family `{other}`"))),
        }
    }
}

/// `ceil((8 nu / (eps - tau)) ln(8 / ((eps - tau) delta)))`.
pub fn linked_net_size(nu: usize, eps: f64, tau: f64, delta: f64) -> Result<usize> {
    check_eps_tau(eps, tau)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let gap = eps - tau;
    Ok((8.0 * nu as f64 / gap * (8.0 / (gap * delta)).ln()).ceil() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkedNet {
    pub points: PointSet,
    pub indices: Vec<usize>,
    pub family: LinkedFamily,
    pub shatter_dimension: usize,
    /// Size given by the formula; the sample is all of `P` when this reaches `|P|`.
    pub formula_size: usize,
}

/// Uniform random sample sized to be an `(eps - tau)`-net of the linked binary
/// family with probability `1 - delta`.
pub fn build_eps_net_linked(
    p: &PointSet,
    eps: f64,
    tau: f64,
    delta: f64,
    family: LinkedFamily,
    seed: u64,
) -> Result<LinkedNet> {
    if p.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let nu = family.shatter_dimension(p.dim());
    let size = linked_net_size(nu, eps, tau, delta)?;
    let indices: Vec<usize> = if size >= p.len() {
        (0..p.len()).collect()
    } else {
        let mut rng = rng::stream(seed, Purpose::RandomSample, 1);
        let mut idx = index::sample(&mut rng, p.len(), size).into_vec();
        idx.sort_unstable();
        idx
    };
    Ok(LinkedNet {
        points: p.subset(&indices),
        indices,
        family,
        shatter_dimension: nu,
        formula_size: size,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleHittingReport {
    pub sample_error: f64,
    pub eps: f64,
    pub tau: f64,
    /// Whether `sample_error <= eps - tau`.
    pub premise: bool,
    pub is_hitting_set: bool,
    /// The implication `premise => is_hitting_set`.
    pub holds: bool,
}

/// Measures whether a sample with error at most `eps - tau` is a hitting set.
pub fn check_theorem2(p: &PointSet, q: &PointSet, eps: f64, tau: f64, net: &EvaluationNet) -> Result<SampleHittingReport> {
    let (sample_error, _) = eps_sample_error(p, q, net)?;
    let report = verify(p, q, eps, tau, net)?;
    let premise = sample_error <= eps - tau;
    Ok(SampleHittingReport {
        sample_error,
        eps,
        tau,
        premise,
        is_hitting_set: report.is_hitting_set,
        holds: !premise || report.is_hitting_set,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkingReport {
    /// Sample error over every combinatorially distinct halfspace.
    pub binary_error: f64,
    /// Sample error over the smoothed net.
    pub smoothed_error: f64,
    pub tolerance: f64,
    /// `smoothed_error <= binary_error + tolerance`.
    pub holds: bool,
}

/// `max |P cap A| / |P| - |Q cap A| / |Q|` over all halfspaces `A`, by exhaustive
/// enumeration on `P cup Q`.
pub fn binary_halfspace_error(p: &PointSet, q: &PointSet) -> Result<f64> {
    let all = p.concat(q)?;
    let cp = p.normalized_weights()?;
    let cq = q.normalized_weights()?;
    let halfspaces = combinatorial_halfspaces(&all)?;
    let mut best: f64 = 0.0;
    for (n, b) in &halfspaces {
        let inside = |x: &[f64]| dot(n, x) - b >= 0.0;
        let sp: f64 = p.iter().zip(&cp).filter(|(x, _)| inside(x)).map(|(_, c)| c).sum();
        let sq: f64 = q.iter().zip(&cq).filter(|(x, _)| inside(x)).map(|(_, c)| c).sum();
        best = best.max((sp - sq).abs());
    }
    Ok(best)
}

/// Compares the smoothed sample error over `net` with the exhaustive binary
/// halfspace error.
pub fn check_linking_sample(p: &PointSet, q: &PointSet, net: &EvaluationNet, tolerance: f64) -> Result<LinkingReport> {
    let binary_error = binary_halfspace_error(p, q)?;
    let (smoothed_error, _) = eps_sample_error(p, q, net)?;
    Ok(LinkingReport {
        binary_error,
        smoothed_error,
        tolerance,
        holds: smoothed_error <= binary_error + tolerance,
    })
}

/// Whether `Q` meets every halfspace holding at least an `eps` fraction of
/// `P`, checked exhaustively over combinatorially distinct halfspaces.
pub fn is_binary_halfspace_net(p: &PointSet, q: &PointSet, eps: f64) -> Result<bool> {
    let all = p.concat(q)?;
    let cp = p.normalized_weights()?;
    for (n, b) in combinatorial_halfspaces(&all)? {
        let inside = |x: &[f64]| dot(&n, x) - b >= 0.0;
        let mass: f64 = p.iter().zip(&cp).filter(|(x, _)| inside(x)).map(|(_, c)| c).sum();
        if mass >= eps && !q.iter().any(inside) {
            return Ok(false);
        }
    }
    Ok(true)
}
