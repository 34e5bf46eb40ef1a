use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use deepinit::data::{shepp_logan_dataset, PhantomSpec, DEFAULT_PHANTOM_COUNT, FULL_PHANTOM_COUNT};
use deepinit::experiment::{
    compare_initializations, run_experiment, run_standoff_sweep, sidecar_path, ExperimentConfig,
    ResultRow,
};
use deepinit::numerics::numerical_rank;
use deepinit::sensing::{build_diffraction_matrix, DiffractionSpec, STANDOFF_GRID_M};

#[derive(Parser)]
#[command(name = "deepinit", version, about = "Phase retrieval experiments with generator-initialized Kaczmarz")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run algorithms over a grid of sampling rates and images.
    Run(ExperimentArgs),
    /// Repeat the grid over stand-off distances with diffraction sensing.
    Sweep(ExperimentArgs),
    /// Time spectral against DRGD initialization, both followed by Kaczmarz.
    CompareInit(ExperimentArgs),
    /// Numerical rank of the modulator-to-scene diffraction matrix.
    Rank {
        #[arg(long, default_value_t = 14)]
        side: usize,
        /// Comma-separated distances in meters.
        #[arg(long, value_delimiter = ',')]
        distances: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
    },
    /// Write randomized Shepp-Logan phantoms as an IDX image file.
    SynthPhantoms {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        /// Emit the full 250,000-image set.
        #[arg(long, conflicts_with = "count")]
        full: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 28)]
        side: usize,
    },
}

/// Settings shared by the experiment subcommands. Every flag overrides the
/// same key in `--config`.
#[derive(Args)]
struct ExperimentArgs {
    /// key = value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value setting; may repeat.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// mnist, shepp-logan or generator.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    mnist_images: Option<String>,
    /// Comma-separated list of wf, twf, rk, drgd, deepinit.
    #[arg(long)]
    algorithm: Option<String>,
    /// gaussian, diffraction or diffraction:<standoff in m>.
    #[arg(long)]
    sensing: Option<String>,
    #[arg(long)]
    standoffs: Option<String>,
    #[arg(long)]
    rates: Option<String>,
    #[arg(long)]
    images: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Generator weight file, or `synthetic` for the built-in generator.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    out_csv: Option<String>,
    #[arg(long)]
    dump_dir: Option<String>,
    /// Iteration budget for every classical solver.
    #[arg(long)]
    k_max: Option<String>,
    #[arg(long)]
    i_max: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    twf_lb: Option<String>,
    #[arg(long)]
    twf_ub: Option<String>,
    /// adam or plain.
    #[arg(long)]
    optimizer: Option<String>,
    /// spectral or random.
    #[arg(long)]
    rk_init: Option<String>,
    /// uniform or norm-weighted.
    #[arg(long)]
    row_selection: Option<String>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_text(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("dataset", &self.dataset),
            ("mnist-images", &self.mnist_images),
            ("algorithm", &self.algorithm),
            ("sensing", &self.sensing),
            ("standoffs", &self.standoffs),
            ("rates", &self.rates),
            ("images", &self.images),
            ("seed", &self.seed),
            ("weights", &self.weights),
            ("out-csv", &self.out_csv),
            ("dump-dir", &self.dump_dir),
            ("k-max", &self.k_max),
            ("i-max", &self.i_max),
            ("eta", &self.eta),
            ("lambda", &self.lambda),
            ("twf-lb", &self.twf_lb),
            ("twf-ub", &self.twf_ub),
            ("optimizer", &self.optimizer),
            ("rk-init", &self.rk_init),
            ("row-selection", &self.row_selection),
        ];
        cfg.apply(flags.iter().filter_map(|(k, v)| v.as_ref().map(|v| (*k, v.as_str()))))?;
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got '{kv}'");
            };
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }
}

fn report(cfg: &ExperimentConfig, rows: &[ResultRow]) {
    println!(
        "wrote {} rows to {} (settings in {})",
        rows.len(),
        cfg.out_csv.display(),
        sidecar_path(&cfg.out_csv).display()
    );
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            report(&cfg, &run_experiment(&cfg)?);
        }
        Command::Sweep(args) => {
            let mut cfg = args.resolve()?;
            if cfg.sensing == deepinit::experiment::SensingChoice::Gaussian {
                cfg.set("sensing", "diffraction")?;
            }
            report(&cfg, &run_standoff_sweep(&cfg)?);
        }
        Command::CompareInit(args) => {
            let cfg = args.resolve()?;
            report(&cfg, &compare_initializations(&cfg)?);
        }
        Command::Rank {
            side,
            distances,
            rel_tol,
        } => {
            println!("distance_m,rank,pixels");
            for d in distances.unwrap_or_else(|| STANDOFF_GRID_M.to_vec()) {
                let m = build_diffraction_matrix(&DiffractionSpec::thz(d).with_grid_side(side))?;
                println!("{d},{},{}", numerical_rank(&m, rel_tol)?, side * side);
            }
        }
        Command::SynthPhantoms {
            out,
            count,
            full,
            seed,
            side,
        } => {
            let count = if full {
                FULL_PHANTOM_COUNT
            } else {
                count.unwrap_or(DEFAULT_PHANTOM_COUNT)
            };
            let spec = PhantomSpec {
                side,
                ..PhantomSpec::shepp_logan(seed)
            };
            shepp_logan_dataset(&spec, count)?.export_idx(&out, None)?;
            println!("wrote {count} phantoms of {side}x{side} to {}", out.display());
        }
    }
    Ok(())
}
