use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coloring::halve_indices;
use super::net::{EvaluationNet, Probe};
use crate::error::{Error, Result};
use crate::geometry::{PointSet, SmoothedRange};
use crate::matching::MatchingOptions;
use crate::rng::{self, Purpose};

/// Failure probability used by the size formula when none is given.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Leading constant of the size formula.
pub const SIZE_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleTarget {
    Size(usize),
    Epsilon { eps: f64, delta: f64 },
}

/// `ceil((2/eps) sqrt((l/w) ln(l/(w eps delta))))`.
pub fn size_for_epsilon(side: f64, w: f64, eps: f64, delta: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if !(w > 0.0 && side > 0.0) {
        return Err(Error::param("w", "side and width must be positive"));
    }
    let arg = side / (w * eps * delta);
    if !(arg > 1.0) {
        return Err(Error::param(
            "eps",
            format!("l/(w eps delta) = {arg} leaves no positive logarithm"),
        ));
    }
    Ok((SIZE_CONSTANT / eps * ((side / w) * arg.ln()).sqrt()).ceil() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeReduceOutput {
    pub points: PointSet,
    /// Indices into the input of the retained points, ascending.
    pub indices: Vec<usize>,
    pub target_size: usize,
    /// Set when the requested size was not below the input size.
    pub warning: Option<String>,
    /// Size of the uniform pre-sample taken to reach `target * 2^k`, if any.
    pub presample: Option<usize>,
}

/// MergeReduce down to `target` points.
///
/// Unless `|P| = s 2^k` for the target `s`, a uniform sample of `s 2^k` points
/// with `k = floor(log2(|P|/s))` is drawn first. Blocks of `2s` consecutive
/// indices are then merged pairwise and halved back to `2s` until one block
/// remains, which is halved to `s`.
pub fn merge_reduce(
    points: &PointSet,
    target: SampleTarget,
    w: f64,
    matching: &MatchingOptions,
    seed: u64,
) -> Result<MergeReduceOutput> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    let s = match target {
        SampleTarget::Size(s) => s,
        SampleTarget::Epsilon { eps, delta } => {
            let (_, side) = points.bounding_cube()?;
            size_for_epsilon(side, w, eps, delta)?
        }
    };
    if s < 2 {
        return Err(Error::param("target_size", format!("must be at least 2, got {s}")));
    }
    if s >= n {
        return Ok(MergeReduceOutput {
            points: points.clone(),
            indices: (0..n).collect(),
            target_size: s,
            warning: (s > n).then(|| format!("target size {s} exceeds input size {n}; input returned")),
            presample: None,
        });
    }
    let mut levels = 0u32;
    while s << (levels + 1) <= n {
        levels += 1;
    }
    let m = s << levels;
    let mut current: Vec<usize> = if m < n {
        let mut rng = rng::stream(seed, Purpose::Subsample, 0);
        let mut idx = index::sample(&mut rng, n, m).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    let presample = (m < n).then_some(m);
    if levels == 0 {
        return Ok(finish(points, current, s, presample));
    }
    let mut blocks: Vec<Vec<usize>> = current.chunks(2 * s).map(<[usize]>::to_vec).collect();
    let mut round: u64 = 0;
    while blocks.len() > 1 {
        let merged: Vec<Vec<usize>> = blocks
            .chunks(2)
            .map(|pair| pair.concat())
            .collect();
        let base = round << 32;
        blocks = merged
            .par_iter()
            .enumerate()
            .map(|(b, block)| halve_block(points, block, matching, seed, base | b as u64))
            .collect::<Result<Vec<_>>>()?;
        round += 1;
    }
    current = halve_block(points, &blocks[0], matching, seed, round << 32)?;
    Ok(finish(points, current, s, presample))
}

fn halve_block(points: &PointSet, block: &[usize], matching: &MatchingOptions, seed: u64, counter: u64) -> Result<Vec<usize>> {
    let sub = points.subset(block);
    let (keep, _) = halve_indices(&sub, matching, seed, counter)?;
    Ok(keep.into_iter().map(|k| block[k]).collect())
}

fn finish(points: &PointSet, mut indices: Vec<usize>, s: usize, presample: Option<usize>) -> MergeReduceOutput {
    indices.sort_unstable();
    MergeReduceOutput {
        points: points.subset(&indices),
        indices,
        target_size: s,
        warning: None,
        presample,
    }
}

/// Uniform sample of `size` distinct points, in input order.
pub fn random_sample(points: &PointSet, size: usize, seed: u64) -> Result<PointSet> {
    if size > points.len() {
        return Err(Error::param(
            "size",
            format!("{size} exceeds the {} available points", points.len()),
        ));
    }
    let mut rng = rng::stream(seed, Purpose::RandomSample, 0);
    let mut idx = index::sample(&mut rng, points.len(), size).into_vec();
    idx.sort_unstable();
    Ok(points.subset(&idx))
}

/// `max |sde_P(h) - sde_Q(h)|` over `net`, with the first maximising range.
pub fn eps_sample_error(p: &PointSet, q: &PointSet, net: &EvaluationNet) -> Result<(f64, SmoothedRange)> {
    let probes = [
        Probe::Sum {
            points: p,
            coeffs: p.normalized_weights()?,
        },
        Probe::Sum {
            points: q,
            coeffs: q.normalized_weights()?,
        },
    ];
    let (value, id) = net.argmax(&probes, |v| (v[0] - v[1]).abs())?;
    Ok((value, net.range(id)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::{build_evaluation_net, color_from_matching, disc_for_range, disc_sup, OffsetMode};
    use crate::geometry::{sde, KernelProfile};
    use crate::matching::{min_cost_matching, MatchingMode};
    use rand::Rng;

    fn uniform(n: usize, seed: u64) -> PointSet {
        let mut rng = rng::stream(seed, Purpose::Experiment, 4);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen(), rng.gen()]).collect();
        PointSet::new(2, &pts).unwrap()
    }

    #[test]
    fn size_formula() {
        let got = size_for_epsilon(1.0, 0.1, 0.1, 0.1).unwrap();
        let expect = (20.0 * (10.0f64 * 1000.0f64.ln()).sqrt()).ceil() as usize;
        assert_eq!(got, expect);
        assert!(size_for_epsilon(1.0, 10.0, 0.5, 0.5).is_err());
        assert!(size_for_epsilon(1.0, 0.1, 1.5, 0.1).is_err());
    }

    #[test]
    fn epsilon_target_uses_formula() {
        let p = uniform(4096, 1);
        let (_, side) = p.bounding_cube().unwrap();
        let out = merge_reduce(
            &p,
            SampleTarget::Epsilon { eps: 0.2, delta: 0.1 },
            0.2,
            &MatchingMode::Exact.into(),
            3,
        )
        .unwrap();
        assert_eq!(out.points.len(), size_for_epsilon(side, 0.2, 0.2, 0.1).unwrap());
    }

    #[test]
    fn trivial_targets() {
        let p = uniform(50, 2);
        let same = merge_reduce(&p, SampleTarget::Size(50), 0.1, &Default::default(), 0).unwrap();
        assert_eq!(same.points, p);
        assert!(same.warning.is_none());
        let over = merge_reduce(&p, SampleTarget::Size(80), 0.1, &Default::default(), 0).unwrap();
        assert_eq!(over.points, p);
        assert!(over.warning.is_some());
        assert!(merge_reduce(&p, SampleTarget::Size(1), 0.1, &Default::default(), 0).is_err());
    }

    #[test]
    fn power_of_two_reduction_sizes_and_determinism() {
        let p = uniform(1024, 3);
        let a = merge_reduce(&p, SampleTarget::Size(64), 0.1, &Default::default(), 11).unwrap();
        let b = merge_reduce(&p, SampleTarget::Size(64), 0.1, &Default::default(), 11).unwrap();
        assert_eq!(a.points.len(), 64);
        assert_eq!(a, b);
        assert!(a.presample.is_none());
        let c = merge_reduce(&p, SampleTarget::Size(100), 0.1, &Default::default(), 11).unwrap();
        assert_eq!(c.points.len(), 100);
        assert_eq!(c.presample, Some(800));
    }

    #[test]
    fn beats_random_sampling() {
        let p = uniform(1024, 4);
        let net = build_evaluation_net(&p, 0.1, KernelProfile::TRIANGLE, 180, OffsetMode::CriticalOffsets).unwrap();
        let mut mr = Vec::new();
        let mut rs = Vec::new();
        for seed in 0..21 {
            let q = merge_reduce(&p, SampleTarget::Size(64), 0.1, &Default::default(), seed).unwrap();
            mr.push(eps_sample_error(&p, &q.points, &net).unwrap().0);
            let r = random_sample(&p, 64, seed).unwrap();
            rs.push(eps_sample_error(&p, &r, &net).unwrap().0);
        }
        let median = |v: &mut Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        assert!(median(&mut mr) < median(&mut rs));
    }

    #[test]
    fn identical_sets_have_zero_error() {
        let p = uniform(100, 5);
        let net = build_evaluation_net(&p, 0.1, KernelProfile::GAUSSIAN, 20, OffsetMode::CriticalOffsets).unwrap();
        assert!(eps_sample_error(&p, &p, &net).unwrap().0 < 1e-12);
    }

    #[test]
    fn halving_error_is_discrepancy_over_n() {
        let p = uniform(200, 6);
        let m = min_cost_matching(&p, MatchingMode::Exact).unwrap();
        let c = color_from_matching(&m, 8);
        let q = p.subset(&c.positive_indices());
        let net = build_evaluation_net(&p, 0.1, KernelProfile::TRIANGLE, 60, OffsetMode::CriticalOffsets).unwrap();
        let (err, h) = eps_sample_error(&p, &q, &net).unwrap();
        let (sup, _) = disc_sup(&p, &c, &net).unwrap();
        assert!((err - sup / 200.0).abs() < 1e-12);
        let d = disc_for_range(&p, &c, &h).unwrap().disc;
        assert!((err - d / 200.0).abs() < 1e-12);
    }

    #[test]
    fn error_matches_brute_force() {
        let p = uniform(80, 7);
        let q = random_sample(&p, 13, 2).unwrap();
        let net = build_evaluation_net(&p, 0.15, KernelProfile::EPANECHNIKOV, 16, OffsetMode::CriticalOffsets).unwrap();
        let brute = net
            .ranges()
            .iter()
            .map(|h| (sde(&p, h).unwrap() - sde(&q, h).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!((eps_sample_error(&p, &q, &net).unwrap().0 - brute).abs() < 1e-12);
        let kn = EvaluationNet::kernel_centers(&p, 0.15, KernelProfile::GAUSSIAN).unwrap();
        let brute = kn
            .ranges()
            .iter()
            .map(|h| (sde(&p, h).unwrap() - sde(&q, h).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!((eps_sample_error(&p, &q, &kn).unwrap().0 - brute).abs() < 1e-12);
    }

    #[test]
    fn halving_is_unbiased() {
        let p = uniform(64, 8);
        let m = min_cost_matching(&p, MatchingMode::Exact).unwrap();
        let h = crate::geometry::SmoothedRange::halfspace(vec![0.6, 0.8], 0.7, 0.1, KernelProfile::TRIANGLE).unwrap();
        let target = sde(&p, &h).unwrap();
        let trials = 10_000;
        let vals: Vec<f64> = (0..trials)
            .map(|seed| {
                let c = color_from_matching(&m, seed);
                sde(&p.subset(&c.positive_indices()), &h).unwrap()
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / trials as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!((mean - target).abs() < 3.0 * se + 1e-15, "{mean} vs {target} (se {se})");
    }
}
