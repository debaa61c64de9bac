use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, Mode};
use super::generate::generate_for;
use crate::clustering::{default_k_max, gonzalez_linf, predict_sample_size, ClusterRow, PREDICT_CONSTANT};
use crate::discrepancy::{
    build_evaluation_net, color_from_matching, disc_for_range, disc_sup, eps_sample_error, merge_reduce, random_sample,
    EvaluationNet, OffsetMode, SampleTarget, SIZE_CONSTANT, SMOOTH_REFINEMENT,
};
use crate::error::{Error, Result};
use crate::geometry::io::{fmt_f64, read_points};
use crate::geometry::{dot, PointSet, SmoothedRange, GAUSSIAN_TRUNCATION};
use crate::matching::{min_cost_matching_with, rho_report, MatchingMode, MatchingOptions, RestrictedObject, RhoReport};
use crate::nets::{build_eps_net_linked, linked_net_size, verify, LinkedFamily, NetReport};
use crate::rng::{self, Purpose};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rendered outputs of one run, before they touch the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub mode: Mode,
    pub csv: String,
    pub json: String,
}

/// Runs `config` and writes `<out>/<mode>.csv`, `<out>/<mode>.json` and a
/// replayable `<out>/config.json`. Returns the written paths.
pub fn run(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let output = execute(config)?;
    std::fs::create_dir_all(&config.out)?;
    let files = [
        (config.out.join(format!("{}.csv", output.mode)), output.csv),
        (config.out.join(format!("{}.json", output.mode)), output.json),
        (config.out.join("config.json"), config.to_json() + "\n"),
    ];
    let mut written = Vec::new();
    for (path, body) in files {
        std::fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

pub fn execute(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let (header, rows, records) = match config.mode {
        Mode::Sample => collect(config, sample_job)?,
        Mode::Net => collect(config, net_job)?,
        Mode::LemmaCheck => collect(config, lemma_job)?,
        Mode::Cluster => collect(config, cluster_job)?,
        Mode::Bench => collect(config, bench_job)?,
    };
    let hash = config.hash();
    let mut csv = format!("# config_hash: {hash}\n# version: smoothrange {VERSION}\n{header}\n");
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    let doc = json!({
        "config_hash": hash,
        "version": VERSION,
        "mode": config.mode,
        "config": config,
        "constants": {
            "size_constant": SIZE_CONSTANT,
            "predict_constant": PREDICT_CONSTANT,
            "gaussian_truncation": GAUSSIAN_TRUNCATION,
            "smooth_refinement": SMOOTH_REFINEMENT,
        },
        "net_resolution": {
            "directions": config.net_directions,
            "offsets": "critical",
        },
        "records": records,
    });
    Ok(RunOutput {
        mode: config.mode,
        csv,
        json: serde_json::to_string_pretty(&doc).expect("records serialize") + "\n",
    })
}

/// One job's CSV rows and JSON record.
struct JobOutput {
    rows: Vec<String>,
    record: serde_json::Value,
}

type Job = fn(&ExperimentConfig, u64) -> Result<JobOutput>;

fn collect(config: &ExperimentConfig, job: Job) -> Result<(&'static str, Vec<String>, Vec<serde_json::Value>)> {
    let header = match config.mode {
        Mode::Sample => "n,w,profile,seed,size,error,disc,runtime_ms",
        Mode::Net => "n,w,profile,seed,size,formula_size,is_net,is_hitting_set,qualifying_ranges,runtime_ms",
        Mode::LemmaCheck => "n,w,profile,seed,cost_1,cost_d,rho_max,rho_ratio_max,disc_sup,sum_sq_gaps,jensen_holds,runtime_ms",
        Mode::Cluster => "seed,k,ell_k,phi_k",
        Mode::Bench => "n,seed,stage,size,value,runtime_ms",
    };
    let outputs: Vec<JobOutput> = config.seeds.par_iter().map(|&s| job(config, s)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for o in outputs {
        rows.extend(o.rows);
        records.push(o.record);
    }
    Ok((header, rows, records))
}

fn timed<T>(on: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, u128)> {
    let start = Instant::now();
    let value = f()?;
    Ok((value, if on { start.elapsed().as_millis() } else { 0 }))
}

fn halfspace_net(config: &ExperimentConfig, p: &PointSet) -> Result<EvaluationNet> {
    build_evaluation_net(p, config.w, config.profile(), config.net_directions, OffsetMode::CriticalOffsets)
}

fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("record serializes")
}

#[derive(Serialize)]
struct SampleRecord {
    seed: u64,
    n: usize,
    size: usize,
    presample: Option<usize>,
    error: f64,
    disc: f64,
    random_sample_error: f64,
    worst_range: SmoothedRange,
    warning: Option<String>,
    runtime_ms: u128,
}

fn sample_job(config: &ExperimentConfig, seed: u64) -> Result<JobOutput> {
    let p = generate_for(config, seed)?;
    let target = match config.sample_size {
        Some(s) => SampleTarget::Size(s),
        None => SampleTarget::Epsilon {
            eps: config.eps,
            delta: config.delta,
        },
    };
    let (out, ms) = timed(config.timing, || merge_reduce(&p, target, config.w, &config.matching_options(), seed))?;
    let net = halfspace_net(config, &p)?;
    let (error, worst_range) = eps_sample_error(&p, &out.points, &net)?;
    let baseline = random_sample(&p, out.points.len(), seed)?;
    let (random_sample_error, _) = eps_sample_error(&p, &baseline, &net)?;
    let n = p.len();
    let disc = n as f64 * error;
    let row = format!(
        "{n},{},{},{seed},{},{},{},{ms}",
        fmt_f64(config.w),
        config.profile(),
        out.points.len(),
        fmt_f64(error),
        fmt_f64(disc)
    );
    Ok(JobOutput {
        rows: vec![row],
        record: to_value(&SampleRecord {
            seed,
            n,
            size: out.points.len(),
            presample: out.presample,
            error,
            disc,
            random_sample_error,
            worst_range,
            warning: out.warning,
            runtime_ms: ms,
        }),
    })
}

fn net_job(config: &ExperimentConfig, seed: u64) -> Result<JobOutput> {
    let p = generate_for(config, seed)?;
    let formula_size = linked_net_size(config.family.shatter_dimension(config.dim), config.eps, config.tau, config.delta)?;
    let (q, ms) = timed(config.timing, || match &config.net_points {
        Some(path) => read_points(path, Some(config.dim)),
        None => build_eps_net_linked(&p, config.eps, config.tau, config.delta, config.family, seed).map(|n| n.points),
    })?;
    let net = match config.family {
        LinkedFamily::Halfspaces => halfspace_net(config, &p)?,
        LinkedFamily::Balls => EvaluationNet::kernel_centers(&p, config.w, config.profile())?,
    };
    let report: NetReport = verify(&p, &q, config.eps, config.tau, &net)?;
    let row = format!(
        "{},{},{},{seed},{},{formula_size},{},{},{},{ms}",
        p.len(),
        fmt_f64(config.w),
        config.profile(),
        q.len(),
        report.is_net,
        report.is_hitting_set,
        report.qualifying_ranges
    );
    Ok(JobOutput {
        rows: vec![row],
        record: json!({ "seed": seed, "n": p.len(), "size": q.len(), "formula_size": formula_size, "report": report, "runtime_ms": ms }),
    })
}

#[derive(Serialize)]
struct LemmaRecord {
    seed: u64,
    n: usize,
    side: f64,
    cost_1: f64,
    cost_d: f64,
    rho_max: f64,
    rho_ratio_max: f64,
    disc_sup: f64,
    sum_sq_gaps: f64,
    power_mean_bound: f64,
    jensen_holds: bool,
    slabs: Vec<RhoReport>,
    runtime_ms: u128,
}

/// Slab of half-width `w` through a random direction, offset uniform over
/// the projections of `p`.
fn random_slab(p: &PointSet, w: f64, seed: u64, k: u64) -> Result<RestrictedObject> {
    let mut rng = rng::stream(seed, Purpose::Experiment, k);
    let mut u: Vec<f64> = (0..p.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = dot(&u, &u).sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
    let (lo, hi) = p
        .iter()
        .map(|x| dot(&u, x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)));
    let t: f64 = rand::Rng::gen_range(&mut rng, 0.0..=1.0);
    RestrictedObject::slab(u, lo + t * (hi - lo), w)
}

fn lemma_job(config: &ExperimentConfig, seed: u64) -> Result<JobOutput> {
    let p = generate_for(config, seed)?;
    let d = config.dim as u32;
    let (m, ms) = timed(config.timing, || min_cost_matching_with(&p, &config.matching_options()))?;
    let cost_1 = m.cost_power(&p, 1)?;
    let cost_d = m.cost_power(&p, d)?;
    let (_, side) = p.bounding_cube()?;
    let slabs: Vec<RhoReport> = (0..config.slabs as u64)
        .map(|k| rho_report(&random_slab(&p, config.w, seed, k)?, &m, &p, d))
        .collect::<Result<_>>()?;
    let rho_max = slabs.iter().map(|r| r.rho).fold(0.0, f64::max);
    let scale = side.powi(config.dim as i32 - 1) * config.w;
    let rho_ratio_max = if scale > 0.0 { rho_max / scale } else { 0.0 };
    let coloring = color_from_matching(&m, seed);
    let (disc, range) = disc_sup(&p, &coloring, &halfspace_net(config, &p)?)?;
    let diag = disc_for_range(&p, &coloring, &range)?;
    let (lhs, rhs) = diag.power_mean_sides(d.max(2));
    let jensen_holds = lhs <= rhs * (1.0 + 1e-12);
    let row = format!(
        "{},{},{},{seed},{},{},{},{},{},{},{jensen_holds},{ms}",
        p.len(),
        fmt_f64(config.w),
        config.profile(),
        fmt_f64(cost_1),
        fmt_f64(cost_d),
        fmt_f64(rho_max),
        fmt_f64(rho_ratio_max),
        fmt_f64(disc),
        fmt_f64(lhs)
    );
    Ok(JobOutput {
        rows: vec![row],
        record: to_value(&LemmaRecord {
            seed,
            n: p.len(),
            side,
            cost_1,
            cost_d,
            rho_max,
            rho_ratio_max,
            disc_sup: disc,
            sum_sq_gaps: lhs,
            power_mean_bound: rhs,
            jensen_holds,
            slabs,
            runtime_ms: ms,
        }),
    })
}

#[derive(Serialize)]
struct ClusterRecord {
    seed: u64,
    n: usize,
    phi: f64,
    best_k: usize,
    center_indices: Vec<usize>,
    table: Vec<ClusterRow>,
    side: f64,
    predicted_size_adaptive: Option<usize>,
    predicted_size_cube: Option<usize>,
}

fn cluster_job(config: &ExperimentConfig, seed: u64) -> Result<JobOutput> {
    let p = generate_for(config, seed)?;
    let k_max = config.k_max.unwrap_or_else(|| default_k_max(p.len()));
    let s = gonzalez_linf(&p, k_max)?;
    let (_, side) = p.bounding_cube()?;
    let predict = |x: f64| predict_sample_size(x, config.w, config.eps, config.delta, config.dim).ok();
    let rows = s
        .table
        .iter()
        .map(|r| format!("{seed},{},{},{}", r.k, fmt_f64(r.ell), fmt_f64(r.phi)))
        .collect();
    Ok(JobOutput {
        rows,
        record: to_value(&ClusterRecord {
            seed,
            n: p.len(),
            phi: s.phi,
            best_k: s.best_k,
            predicted_size_adaptive: predict(s.phi),
            predicted_size_cube: predict(side),
            center_indices: s.center_indices,
            table: s.table,
            side,
        }),
    })
}

fn bench_job(config: &ExperimentConfig, seed: u64) -> Result<JobOutput> {
    let full = generate_for(config, seed)?;
    let mut sizes: Vec<usize> = [8, 4, 2, 1].iter().map(|f| full.len() / f).filter(|&s| s >= 4).collect();
    sizes.dedup();
    let mut rows = Vec::new();
    let mut record = Vec::new();
    let mut push = |n: usize, stage: &str, size: usize, value: f64, ms: u128| {
        rows.push(format!("{n},{seed},{stage},{size},{},{ms}", fmt_f64(value)));
        record.push(json!({ "n": n, "stage": stage, "size": size, "value": value, "runtime_ms": ms }));
    };
    for n in sizes {
        let p = full.subset(&(0..n).collect::<Vec<_>>());
        for mode in [MatchingMode::Exact, MatchingMode::Greedy] {
            let opts = MatchingOptions {
                mode,
                exact_cap: config.exact_cap,
            };
            if mode == MatchingMode::Exact && n > config.exact_cap {
                continue;
            }
            let (m, ms) = timed(config.timing, || min_cost_matching_with(&p, &opts))?;
            push(n, &format!("{mode}_matching"), m.pairs().len(), m.cost_power(&p, 1)?, ms);
        }
        let target = config.sample_size.unwrap_or(n / 4).max(2);
        if target < n {
            let (out, ms) = timed(config.timing, || {
                merge_reduce(&p, SampleTarget::Size(target), config.w, &config.matching_options(), seed)
            })?;
            let (error, _) = eps_sample_error(&p, &out.points, &halfspace_net(config, &p)?)?;
            push(n, "merge_reduce", out.points.len(), error, ms);
        }
    }
    Ok(JobOutput {
        rows,
        record: json!({ "seed": seed, "stages": record }),
    })
}

/// Point CSV for one seed with the config hash and version as comments.
pub fn generate_csv(config: &ExperimentConfig, seed: u64) -> Result<String> {
    config.validate()?;
    let p = generate_for(config, seed)?;
    let comments = [
        format!("config_hash: {}", config.hash()),
        format!("version: smoothrange {VERSION}"),
        format!("seed: {seed}"),
    ];
    let mut out = String::new();
    let _ = write!(out, "{}", crate::geometry::io::to_csv(&p, &comments));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::GeneratorSpec;

    fn small(mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            n: 256,
            net_directions: 24,
            slabs: 5,
            seeds: vec![1, 2],
            mode,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn every_mode_is_reproducible() {
        for mode in [Mode::Sample, Mode::Net, Mode::LemmaCheck, Mode::Cluster, Mode::Bench] {
            let c = small(mode);
            let a = execute(&c).unwrap();
            let b = execute(&c).unwrap();
            assert_eq!(a, b, "{mode}");
            assert!(a.csv.starts_with(&format!("# config_hash: {}\n", c.hash())));
            assert!(a.json.contains(&c.hash()));
        }
    }

    #[test]
    fn sample_rows_have_the_documented_columns() {
        let mut c = small(Mode::Sample);
        c.n = 1024;
        c.sample_size = Some(64);
        let out = execute(&c).unwrap();
        let lines: Vec<&str> = out.csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], "n,w,profile,seed,size,error,disc,runtime_ms");
        assert_eq!(lines.len(), 3);
        for l in &lines[1..] {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 8);
            assert_eq!((f[0], f[2], f[4], f[7]), ("1024", "triangle", "64", "0"));
            let error: f64 = f[5].parse().unwrap();
            let disc: f64 = f[6].parse().unwrap();
            assert!(error > 0.0 && error < 1.0);
            assert_eq!(disc, 1024.0 * error);
        }
    }

    #[test]
    fn cluster_table_per_seed() {
        let mut c = small(Mode::Cluster);
        c.generator = GeneratorSpec::TwoClusters {
            side: 100.0,
            cluster_side: 1.0,
        };
        c.seeds = vec![4];
        let out = execute(&c).unwrap();
        let rows: Vec<&str> = out.csv.lines().skip(3).collect();
        assert_eq!(rows.len(), 8);
        let phi_2: f64 = rows[1].split(',').nth(3).unwrap().parse().unwrap();
        assert!(phi_2 < 5.0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = small(Mode::Sample);
        c.seeds.clear();
        assert!(execute(&c).is_err());
    }

    #[test]
    fn writes_and_replays() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small(Mode::Cluster);
        c.out = dir.path().join("a");
        let files = run(&c).unwrap();
        assert_eq!(files.len(), 3);
        let replay = ExperimentConfig::from_json(&std::fs::read_to_string(&files[2]).unwrap()).unwrap();
        assert_eq!(replay, c);
        let mut r = replay.clone();
        r.out = dir.path().join("b");
        run(&r).unwrap();
        for name in ["cluster.csv", "cluster.json"] {
            let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
            let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
            if name.ends_with(".csv") {
                assert_eq!(a, b);
            } else {
                // the embedded config differs only in `out`
                let strip = |v: Vec<u8>| {
                    let mut j: serde_json::Value = serde_json::from_slice(&v).unwrap();
                    j["config"]["out"] = serde_json::Value::Null;
                    j
                };
                assert_eq!(strip(a), strip(b));
            }
        }
    }
}
