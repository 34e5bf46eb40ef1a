//! Experiment harness: runs solvers over a grid of sampling rates, images
//! and (optionally) stand-off distances, scores every reconstruction and
//! writes a CSV table, PGM dumps and a sidecar with the resolved settings.
//!
//! Every grid cell owns a generator seeded from `(seed, rate_index,
//! image_index)`, so the table does not depend on scheduling. Within a cell
//! all algorithms see the same sensing operator, and every Kaczmarz phase
//! draws rows from the same stream.

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use config::{
    parse_config_text, Algorithm, ExperimentConfig, GeneratorChoice, RkInit, SensingChoice,
    TargetSource,
};
pub use output::{pgm_bytes, rows_to_csv, write_pgm, ResultRow, CSV_HEADER};

use crate::classical::{
    randomized_kaczmarz_with, resolve_init, spectral_init, truncated_wirtinger_flow,
    wirtinger_flow, ClassicalConfig, Initialization,
};
use crate::data::{load_mnist, shepp_logan_dataset, DatasetSource, PhantomSpec};
use crate::error::{Error, Result};
use crate::generative::{deepinit, drgd, synthetic_generator, DrgdConfig, GeneratorNet, SYNTHETIC_LATENT_DIM};
use crate::metrics::QualityScore;
use crate::numerics::{derive_seed, ComplexMatrix, SeededRng};
use crate::sensing::{
    build_diffraction_matrix, effective_rows, generate_masks, intensity_forward, DiffractionSpec,
    SensingOperator, SCENE_TO_DETECTOR_M,
};

const SENSING_STREAM: u64 = 0;
const DRGD_STREAM: u64 = 1;
const RK_STREAM: u64 = 2;
const INIT_STREAM: u64 = 3;
const TARGET_STREAM: u64 = 0x7a;
const SELECT_STREAM: u64 = 0x5e;

/// `round(rate · n)` with halves rounded away from zero.
pub fn measurement_count(rate: f64, n: usize) -> Result<usize> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::InvalidParameter(format!("sampling rate must be positive, got {rate}")));
    }
    let m = (rate * n as f64).round();
    if m < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "sampling rate {rate} gives no measurements for n = {n}"
        )));
    }
    Ok(m as usize)
}

/// Generator of cell `(rate_index, image_index)`.
pub fn cell_seed(seed: u64, rate_index: usize, image_index: usize) -> u64 {
    derive_seed(seed, &[rate_index as u64, image_index as u64])
}

/// Ground-truth images, each tagged with its index in the source.
#[derive(Debug, Clone)]
pub struct Targets {
    pub images: Vec<(usize, Vec<f64>)>,
    pub width: usize,
    pub height: usize,
    pub name: &'static str,
}

fn square_side(n: usize) -> Option<usize> {
    let s = (n as f64).sqrt().round() as usize;
    (s * s == n).then_some(s)
}

pub fn load_generator(cfg: &ExperimentConfig, side: usize) -> Result<Option<GeneratorNet>> {
    Ok(match &cfg.generator {
        None => None,
        Some(GeneratorChoice::Synthetic) => Some(synthetic_generator(side, SYNTHETIC_LATENT_DIM)),
        Some(GeneratorChoice::Weights(path)) => Some(GeneratorNet::load(path)?),
    })
}

pub fn load_targets(cfg: &ExperimentConfig, generator: Option<&GeneratorNet>) -> Result<Targets> {
    let select_seed = derive_seed(cfg.seed, &[SELECT_STREAM]);
    let pick = |ds: crate::data::ImageDataset, name| -> Result<Targets> {
        let images = ds
            .select(cfg.num_images, select_seed)?
            .into_iter()
            .map(|i| (i, ds.images[i].clone()))
            .collect();
        Ok(Targets {
            images,
            width: ds.width,
            height: ds.height,
            name,
        })
    };
    match cfg.dataset {
        TargetSource::Dataset(DatasetSource::Mnist) => {
            let path = cfg.mnist_images.as_deref().ok_or_else(|| {
                Error::InvalidParameter("dataset mnist needs --mnist-images".into())
            })?;
            pick(load_mnist(path, None)?, "mnist")
        }
        TargetSource::Dataset(DatasetSource::SheppLogan) => {
            let spec = PhantomSpec {
                side: cfg.phantom_side,
                ..PhantomSpec::shepp_logan(derive_seed(cfg.seed, &[TARGET_STREAM]))
            };
            let pool = cfg.phantom_pool.max(cfg.num_images);
            pick(shepp_logan_dataset(&spec, pool)?, "shepp-logan")
        }
        TargetSource::GeneratorRange => {
            let g = generator
                .ok_or_else(|| Error::InvalidParameter("dataset generator needs --weights".into()))?;
            let side = square_side(g.output_dim()).ok_or_else(|| {
                Error::InvalidParameter("generator output is not a square image".into())
            })?;
            let images = (0..cfg.num_images)
                .map(|i| {
                    let mut rng = SeededRng::new(derive_seed(cfg.seed, &[TARGET_STREAM, i as u64]));
                    let z: Vec<f64> = (0..g.latent_dim()).map(|_| rng.standard_normal()).collect();
                    Ok((i, g.forward(&z)?))
                })
                .collect::<Result<_>>()?;
            Ok(Targets {
                images,
                width: side,
                height: side,
                name: "generator",
            })
        }
    }
}

/// How measurement matrices are formed for one stand-off setting.
enum Plan {
    Gaussian,
    Diffraction {
        standoff_m: f64,
        d_ms: ComplexMatrix,
        d_sd: ComplexMatrix,
    },
}

impl Plan {
    fn standoff(&self) -> Option<f64> {
        match self {
            Plan::Gaussian => None,
            Plan::Diffraction { standoff_m, .. } => Some(*standoff_m),
        }
    }

    fn diffraction(standoff_m: f64, width: usize, height: usize) -> Result<Self> {
        if width != height {
            return Err(Error::InvalidParameter("diffraction sensing needs square images".into()));
        }
        Ok(Plan::Diffraction {
            standoff_m,
            d_ms: build_diffraction_matrix(&DiffractionSpec::thz(standoff_m).with_grid_side(width))?,
            d_sd: build_diffraction_matrix(
                &DiffractionSpec::thz(SCENE_TO_DETECTOR_M).with_grid_side(width),
            )?,
        })
    }

    /// Diffraction operators are rescaled to unit mean energy per entry; with
    /// simulated noise-free data this leaves the problem unchanged.
    fn operator(&self, m: usize, n: usize, density: f64, rng: &mut SeededRng) -> Result<SensingOperator> {
        match self {
            Plan::Gaussian => SensingOperator::gaussian(rng, m, n),
            Plan::Diffraction { d_ms, d_sd, .. } => {
                let masks = generate_masks(rng, m, n, density)?;
                effective_rows(&masks, d_ms, d_sd)?.unit_energy()
            }
        }
    }
}

struct Cell<'a> {
    cfg: &'a ExperimentConfig,
    a: SensingOperator,
    y: Vec<f64>,
    generator: Option<&'a GeneratorNet>,
    width: usize,
    height: usize,
    rng: SeededRng,
    sweep: bool,
}

/// A solver's output with its total and initialization times.
struct Outcome {
    reconstruction: Vec<f64>,
    wall: Duration,
    init: Duration,
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed()))
}

fn median(mut times: Vec<Duration>) -> Duration {
    times.sort();
    times[times.len() / 2]
}

impl Cell<'_> {
    fn generator(&self) -> Result<&GeneratorNet> {
        self.generator
            .ok_or_else(|| Error::InvalidParameter("generative algorithms need --weights".into()))
    }

    fn drgd_config(&self) -> DrgdConfig {
        DrgdConfig {
            i_max: self.cfg.i_max,
            step_size: self.cfg.eta,
            reg_weight: self.cfg.lambda,
            rng: self.rng.derive(&[DRGD_STREAM]),
            optimizer: self.cfg.optimizer,
        }
    }

    fn classical_config(&self, k_max: usize, x0: Vec<f64>) -> ClassicalConfig {
        let (lb, ub) = self.cfg.twf_bounds(self.sweep);
        ClassicalConfig {
            k_max,
            step_size: self.cfg.wf_step_max,
            step_ramp: self.cfg.wf_step_ramp,
            twf_lb: lb,
            twf_ub: ub,
            rng: self.rng.derive(&[RK_STREAM]),
            init: Initialization::Provided(x0),
            row_selection: self.cfg.row_selection,
        }
    }

    fn kaczmarz(&self, x0: &[f64]) -> Result<(Vec<f64>, Duration)> {
        let mut rng = self.rng.derive(&[RK_STREAM]);
        let r = randomized_kaczmarz_with(
            &self.a,
            &self.y,
            x0,
            self.cfg.rk_k_max,
            &mut rng,
            self.cfg.row_selection,
        )?;
        Ok((r.reconstruction, r.wall_time))
    }

    fn run(&self, alg: Algorithm) -> Result<Outcome> {
        let (a, y) = (&self.a, self.y.as_slice());
        match alg {
            Algorithm::Wf | Algorithm::Twf => {
                let (x0, init) = timed(|| spectral_init(a, y))?;
                let report = if alg == Algorithm::Wf {
                    wirtinger_flow(a, y, &self.classical_config(self.cfg.wf_k_max, x0))?
                } else {
                    truncated_wirtinger_flow(a, y, &self.classical_config(self.cfg.twf_k_max, x0))?
                };
                Ok(Outcome {
                    reconstruction: report.reconstruction,
                    wall: init + report.wall_time,
                    init,
                })
            }
            Algorithm::Rk => {
                let (x0, init) = timed(|| match self.cfg.rk_init {
                    RkInit::Spectral => spectral_init(a, y),
                    RkInit::Random => {
                        let mut rng = self.rng.derive(&[INIT_STREAM]);
                        resolve_init(a, y, &Initialization::RandomUnit, &mut rng)
                    }
                })?;
                let (reconstruction, t) = self.kaczmarz(&x0)?;
                Ok(Outcome {
                    reconstruction,
                    wall: init + t,
                    init,
                })
            }
            Algorithm::Drgd => {
                let g = self.generator()?;
                let (_, report) = drgd(a, y, g, &self.drgd_config(), self.width, self.height)?;
                Ok(Outcome {
                    reconstruction: report.reconstruction,
                    wall: report.wall_time,
                    init: Duration::ZERO,
                })
            }
            Algorithm::DeepInit => {
                let g = self.generator()?;
                let mut rng = self.rng.derive(&[RK_STREAM]);
                let report = deepinit(
                    a,
                    y,
                    g,
                    &self.drgd_config(),
                    self.cfg.rk_k_max,
                    &mut rng,
                    self.width,
                    self.height,
                )?;
                Ok(Outcome {
                    reconstruction: report.reconstruction,
                    wall: report.wall_time,
                    init: report.phases[0].wall_time,
                })
            }
        }
    }

    /// Spectral and DRGD initializations, each followed by the same Kaczmarz run.
    fn compare(&self) -> Result<Vec<(&'static str, Outcome)>> {
        let (a, y) = (&self.a, self.y.as_slice());
        let g = self.generator()?;
        let repeats = self.cfg.timing_repeats;
        let mut times = Vec::with_capacity(repeats);
        let mut x_spectral = Vec::new();
        for _ in 0..repeats {
            let (x, t) = timed(|| spectral_init(a, y))?;
            x_spectral = x;
            times.push(t);
        }
        let t_spectral = median(std::mem::take(&mut times));
        let mut x_drgd = Vec::new();
        for _ in 0..repeats {
            let ((_, report), t) =
                timed(|| drgd(a, y, g, &self.drgd_config(), self.width, self.height))?;
            x_drgd = report.reconstruction;
            times.push(t);
        }
        let t_drgd = median(times);
        let mut out = Vec::with_capacity(2);
        for (name, x0, init) in [("spectral+rk", x_spectral, t_spectral), ("drgd+rk", x_drgd, t_drgd)] {
            let (reconstruction, t) = self.kaczmarz(&x0)?;
            out.push((
                name,
                Outcome {
                    reconstruction,
                    wall: init + t,
                    init,
                },
            ));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Run,
    Sweep,
    CompareInit,
}

type Keyed = ((usize, usize, usize, usize), ResultRow, Option<(PathBuf, Vec<f64>)>);

fn dump_name(alg: &str, rate: f64, image: usize, standoff: Option<f64>) -> String {
    let alg = alg.replace('+', "_");
    match standoff {
        Some(d) => format!("{alg}_rate{rate}_img{image}_d{d}.pgm"),
        None => format!("{alg}_rate{rate}_img{image}.pgm"),
    }
}

fn run_grid(cfg: &ExperimentConfig, mode: Mode) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let synthetic_side = match cfg.dataset {
        TargetSource::Dataset(DatasetSource::Mnist) => 28,
        _ => cfg.phantom_side,
    };
    let generator = load_generator(cfg, synthetic_side)?;
    let targets = load_targets(cfg, generator.as_ref())?;
    let (width, height) = (targets.width, targets.height);
    let n = width * height;
    if let Some(g) = &generator {
        if g.output_dim() != n {
            return Err(Error::DimensionMismatch {
                context: "generator output",
                expected: n,
                actual: g.output_dim(),
            });
        }
    }
    if mode == Mode::CompareInit && generator.is_none() {
        return Err(Error::InvalidParameter(
            "compare-init needs a generator: pass --weights <file> or --weights synthetic".into(),
        ));
    }

    let plans: Vec<Plan> = match (mode, cfg.sensing) {
        (Mode::Sweep, SensingChoice::Gaussian) => {
            return Err(Error::InvalidParameter("the stand-off sweep needs diffraction sensing".into()))
        }
        (Mode::Sweep, _) => {
            if cfg.standoffs.is_empty() {
                return Err(Error::InvalidParameter("no stand-off distances given".into()));
            }
            cfg.standoffs
                .iter()
                .map(|&d| Plan::diffraction(d, width, height))
                .collect::<Result<_>>()?
        }
        (_, SensingChoice::Gaussian) => vec![Plan::Gaussian],
        (_, SensingChoice::Diffraction { standoff_m }) => {
            vec![Plan::diffraction(standoff_m, width, height)?]
        }
    };
    let counts: Vec<usize> = cfg
        .sampling_rates
        .iter()
        .map(|&r| measurement_count(r, n))
        .collect::<Result<_>>()?;

    let num_images = targets.images.len();
    let cells: Vec<(usize, usize, usize)> = (0..plans.len())
        .flat_map(|p| (0..counts.len()).flat_map(move |r| (0..num_images).map(move |i| (p, r, i))))
        .collect();
    let dumping = cfg.dump_dir.is_some();

    let results: Vec<Vec<Keyed>> = cells
        .par_iter()
        .map(|&(p, r, i)| -> Result<Vec<Keyed>> {
            let (image_index, truth) = &targets.images[i];
            let seed = cell_seed(cfg.seed, r, i);
            let rng = SeededRng::new(seed);
            let a = plans[p].operator(counts[r], n, cfg.mask_density, &mut rng.derive(&[SENSING_STREAM]))?;
            let y = intensity_forward(&a, truth)?;
            let cell = Cell {
                cfg,
                a,
                y,
                generator: generator.as_ref(),
                width,
                height,
                rng,
                sweep: mode == Mode::Sweep,
            };
            let outcomes: Vec<(&'static str, Outcome)> = match mode {
                Mode::CompareInit => cell.compare()?,
                _ => cfg
                    .algorithms
                    .iter()
                    .map(|&alg| Ok((alg.name(), cell.run(alg)?)))
                    .collect::<Result<_>>()?,
            };
            let rate = cfg.sampling_rates[r];
            let standoff = plans[p].standoff();
            outcomes
                .into_iter()
                .enumerate()
                .map(|(k, (name, out))| {
                    let score = QualityScore::evaluate(&out.reconstruction, truth, width, height)?;
                    let row = ResultRow {
                        dataset: targets.name,
                        algorithm: name,
                        sampling_rate: rate,
                        standoff_m: standoff,
                        image_index: *image_index,
                        seed,
                        ssim: score.ssim,
                        psnr: score.psnr,
                        aligned_rel_error: score.aligned_rel_error,
                        wall_time_s: out.wall.as_secs_f64(),
                        init_time_s: out.init.as_secs_f64(),
                    };
                    let dump = dumping.then(|| {
                        let aligned = crate::metrics::sign_align(&out.reconstruction, truth)
                            .expect("lengths checked by evaluate");
                        (PathBuf::from(dump_name(name, rate, *image_index, standoff)), aligned)
                    });
                    Ok(((p, r, i, k), row, dump))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut keyed: Vec<Keyed> = results.into_iter().flatten().collect();
    keyed.sort_by_key(|(key, _, _)| *key);

    if let Some(dir) = &cfg.dump_dir {
        fs::create_dir_all(dir)?;
        for (idx, truth) in &targets.images {
            write_pgm(&dir.join(format!("truth_img{idx}.pgm")), truth, width, height)?;
        }
        for (_, _, dump) in &keyed {
            if let Some((name, img)) = dump {
                write_pgm(&dir.join(name), img, width, height)?;
            }
        }
    }
    let rows: Vec<ResultRow> = keyed.into_iter().map(|(_, row, _)| row).collect();
    write_outputs(cfg, &rows, mode == Mode::Sweep)?;
    Ok(rows)
}

/// Sidecar path holding the resolved settings of a run.
pub fn sidecar_path(out_csv: &Path) -> PathBuf {
    let mut s = out_csv.as_os_str().to_owned();
    s.push(".config");
    PathBuf::from(s)
}

fn write_outputs(cfg: &ExperimentConfig, rows: &[ResultRow], sweep: bool) -> Result<()> {
    if let Some(parent) = cfg.out_csv.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&cfg.out_csv, rows_to_csv(rows))?;
    fs::write(sidecar_path(&cfg.out_csv), cfg.to_text(sweep))?;
    Ok(())
}

/// Runs every configured algorithm on every (rate, image) cell.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_grid(cfg, Mode::Run)
}

/// Repeats the grid for each stand-off distance. The scene-to-detector
/// distance stays fixed, and TWF uses the widened trust window unless set.
pub fn run_standoff_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_grid(cfg, Mode::Sweep)
}

/// Spectral versus DRGD initialization, two rows per (rate, image).
pub fn compare_initializations(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_grid(cfg, Mode::CompareInit)
}
