use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use smoothrange::geometry::KernelProfile;
use smoothrange::harness::{self, ExperimentConfig, GeneratorSpec, MixtureComponent, Mode};
use smoothrange::matching::MatchingMode;
use smoothrange::nets::LinkedFamily;
use smoothrange::Error;

/// Thread count override; the only setting read from the environment.
const THREADS_VAR: &str = "SMOOTHRANGE_THREADS";

#[derive(Parser)]
#[command(name = "smoothrange", version, about = "Epsilon-samples and (eps, tau)-nets for smoothed range spaces")]
struct Cli {
    /// Experiment config JSON; run alone it replays the config as written.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Record wall-clock times in `runtime_ms` (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the generated points of one seed as CSV.
    Gen {
        #[command(flatten)]
        args: ConfigArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// MergeReduce to a sample and measure its error.
    Sample(ConfigArgs),
    /// Build (or read) a candidate net and verify it.
    VerifyNet {
        #[command(flatten)]
        args: ConfigArgs,
        /// Candidate net to verify instead of building one.
        #[arg(long)]
        net_points: Option<PathBuf>,
    },
    /// Matching cost, restricted lengths and discrepancy diagnostics.
    LemmaCheck(ConfigArgs),
    /// Farthest-point clustering table and predicted sample sizes.
    Cluster(ConfigArgs),
    /// Matching and MergeReduce across input sizes.
    Bench(ConfigArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    Uniform,
    GaussianMixture,
    TwoClusters,
    File,
}

#[derive(Args, Default)]
struct ConfigArgs {
    #[arg(long, value_enum)]
    generator: Option<GeneratorKind>,
    /// Cube side for `uniform` and `two-clusters`.
    #[arg(long)]
    side: Option<f64>,
    #[arg(long)]
    cluster_side: Option<f64>,
    /// Mixture components as JSON, `[{"mean": [..], "std": s, "weight": w}, ..]`.
    #[arg(long)]
    components: Option<String>,
    /// Point file for the `file` generator.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    profile: Option<KernelProfile>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    net_directions: Option<usize>,
    #[arg(long)]
    sample_size: Option<usize>,
    #[arg(long)]
    matching: Option<MatchingMode>,
    #[arg(long)]
    exact_cap: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    slabs: Option<usize>,
    #[arg(long)]
    family: Option<LinkedFamily>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn apply(self, c: &mut ExperimentConfig) -> Result<(), Error> {
        let (cur_side, cur_cluster) = match &c.generator {
            GeneratorSpec::Uniform { side } => (*side, 1.0),
            GeneratorSpec::TwoClusters { side, cluster_side } => (*side, *cluster_side),
            _ => (1.0, 1.0),
        };
        let kind = self.generator.or(match &c.generator {
            GeneratorSpec::Uniform { .. } => Some(GeneratorKind::Uniform),
            GeneratorSpec::TwoClusters { .. } => Some(GeneratorKind::TwoClusters),
            _ => None,
        });
        let side = self.side.unwrap_or(cur_side);
        let cluster_side = self.cluster_side.unwrap_or(cur_cluster);
        match kind {
            Some(GeneratorKind::Uniform) => c.generator = GeneratorSpec::Uniform { side },
            Some(GeneratorKind::TwoClusters) => c.generator = GeneratorSpec::TwoClusters { side, cluster_side },
            Some(GeneratorKind::GaussianMixture) => {
                let text = self
                    .components
                    .ok_or_else(|| Error::param("components", "required for the gaussian-mixture generator"))?;
                let components: Vec<MixtureComponent> = serde_json::from_str(&text).map_err(|e| Error::Parse {
                    line: e.line(),
                    message: e.to_string(),
                })?;
                c.generator = GeneratorSpec::GaussianMixture { components };
            }
            Some(GeneratorKind::File) => {
                let path = self.input.ok_or_else(|| Error::param("input", "required for the file generator"))?;
                c.generator = GeneratorSpec::File { path };
            }
            None => {}
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    c.$field = v;
                }
            )*};
        }
        set!(n, dim, w, eps, tau, delta, net_directions, matching, exact_cap, slabs, family, seeds, out);
        if let Some(p) = self.profile {
            c.profile = p.kind;
        }
        if self.sample_size.is_some() {
            c.sample_size = self.sample_size;
        }
        if self.k_max.is_some() {
            c.k_max = self.k_max;
        }
        Ok(())
    }
}

fn load_base(path: Option<&PathBuf>) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::param("SMOOTHRANGE_THREADS", format!("expected a thread count, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::param("SMOOTHRANGE_THREADS", e.to_string()))
}

fn execute(cli: Cli) -> Result<(), Error> {
    configure_threads()?;
    let mut config = load_base(cli.config.as_ref())?;
    config.timing |= cli.timing;
    let (mode, args) = match cli.command {
        None if cli.config.is_some() => {
            report(harness::run(&config)?);
            return Ok(());
        }
        None => return Err(Error::param("command", "give a subcommand or --config to replay")),
        Some(Command::Gen { args, output }) => {
            args.apply(&mut config)?;
            let csv = harness::generate_csv(&config, config.seeds[0])?;
            match output {
                Some(path) => std::fs::write(&path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                None => print!("{csv}"),
            }
            return Ok(());
        }
        Some(Command::Sample(a)) => (Mode::Sample, a),
        Some(Command::VerifyNet { args, net_points }) => {
            if net_points.is_some() {
                config.net_points = net_points;
            }
            (Mode::Net, args)
        }
        Some(Command::LemmaCheck(a)) => (Mode::LemmaCheck, a),
        Some(Command::Cluster(a)) => (Mode::Cluster, a),
        Some(Command::Bench(a)) => (Mode::Bench, a),
    };
    config.mode = mode;
    args.apply(&mut config)?;
    report(harness::run(&config)?);
    Ok(())
}

fn report(paths: Vec<PathBuf>) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim_end()));
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
