use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;
use rand_distr::Normal;

use super::config::{ExperimentConfig, GeneratorSpec};
use crate::error::{Error, Result};
use crate::geometry::io::read_points;
use crate::geometry::PointSet;
use crate::rng::{self, Purpose};

/// Points for one seed. Deterministic in `(spec, n, dim, seed)`.
pub fn generate(spec: &GeneratorSpec, n: usize, dim: usize, seed: u64) -> Result<PointSet> {
    if let GeneratorSpec::File { path } = spec {
        return read_points(path, Some(dim));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if dim == 0 {
        return Err(Error::param("dim", "must be at least 1"));
    }
    let mut rng = rng::stream(seed, Purpose::Generator, 0);
    let mut coords = Vec::with_capacity(n * dim);
    match spec {
        GeneratorSpec::Uniform { side } => {
            coords.extend((0..n * dim).map(|_| side * rng.gen::<f64>()));
        }
        GeneratorSpec::TwoClusters { side, cluster_side } => {
            for i in 0..n {
                let base = if i < n.div_ceil(2) { 0.0 } else { side - cluster_side };
                coords.extend((0..dim).map(|_| base + cluster_side * rng.gen::<f64>()));
            }
        }
        GeneratorSpec::GaussianMixture { components } => {
            let pick = WeightedIndex::new(components.iter().map(|c| c.weight))
                .map_err(|e| Error::param("weight", e.to_string()))?;
            for _ in 0..n {
                let c = &components[pick.sample(&mut rng)];
                if c.mean.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: c.mean.len(),
                    });
                }
                let normal = Normal::new(0.0, c.std).map_err(|e| Error::param("std", e.to_string()))?;
                coords.extend(c.mean.iter().map(|m| m + normal.sample(&mut rng)));
            }
        }
        GeneratorSpec::File { .. } => unreachable!(),
    }
    PointSet::from_flat(dim, coords)
}

pub fn generate_for(config: &ExperimentConfig, seed: u64) -> Result<PointSet> {
    generate(&config.generator, config.n, config.dim, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::io::to_csv;
    use crate::harness::config::MixtureComponent;

    #[test]
    fn uniform_in_cube_and_reproducible() {
        let spec = GeneratorSpec::Uniform { side: 1.0 };
        let p = generate(&spec, 1000, 2, 5).unwrap();
        assert_eq!(p.len(), 1000);
        assert!(p.coords().iter().all(|&x| (0.0..=1.0).contains(&x)));
        let q = generate(&spec, 1000, 2, 5).unwrap();
        assert_eq!(to_csv(&p, &[]), to_csv(&q, &[]));
        assert_ne!(p, generate(&spec, 1000, 2, 6).unwrap());
    }

    #[test]
    fn empty_request_is_an_error() {
        assert!(generate(&GeneratorSpec::Uniform { side: 1.0 }, 0, 2, 0).is_err());
    }

    #[test]
    fn two_clusters_sit_in_opposite_corners() {
        let p = generate(&GeneratorSpec::TwoClusters { side: 100.0, cluster_side: 1.0 }, 11, 2, 1).unwrap();
        for (i, x) in p.iter().enumerate() {
            let lo = if i < 6 { 0.0 } else { 99.0 };
            assert!(x.iter().all(|&c| c >= lo && c <= lo + 1.0));
        }
    }

    #[test]
    fn mixture_centres() {
        let spec = GeneratorSpec::GaussianMixture {
            components: vec![
                MixtureComponent { mean: vec![0.0, 0.0], std: 0.01, weight: 1.0 },
                MixtureComponent { mean: vec![5.0, 5.0], std: 0.01, weight: 3.0 },
            ],
        };
        let p = generate(&spec, 4000, 2, 2).unwrap();
        let far = p.iter().filter(|x| x[0] > 2.5).count() as f64 / 4000.0;
        assert!((far - 0.75).abs() < 0.03, "{far}");
        assert!(generate(&spec, 10, 3, 2).is_err());
    }
}
