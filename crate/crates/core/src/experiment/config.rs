//! Experiment configuration as `key = value` text.
//!
//! Keys match the command-line flag names without the leading dashes;
//! underscores and dashes are interchangeable. Blank lines and lines starting
//! with `#` are ignored. Settings are applied in order, so later sources
//! override earlier ones.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::classical::{
    RowSelection, RK_K_MAX, TWF_DEFAULT_BOUNDS, TWF_K_MAX, TWF_SENSITIVITY_BOUNDS, WF_K_MAX,
    WF_STEP_MAX, WF_STEP_RAMP,
};
use crate::data::DatasetSource;
use crate::error::{Error, Result};
use crate::generative::{Optimizer, DRGD_I_MAX, DRGD_REG_WEIGHT, DRGD_STEP_SIZE};
use crate::numerics::RNG_VERSION;
use crate::sensing::{DEFAULT_MASK_DENSITY, MODULATOR_TO_SCENE_M, STANDOFF_GRID_M};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Wf,
    Twf,
    Rk,
    Drgd,
    DeepInit,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Wf,
        Algorithm::Twf,
        Algorithm::Rk,
        Algorithm::Drgd,
        Algorithm::DeepInit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Wf => "wf",
            Algorithm::Twf => "twf",
            Algorithm::Rk => "rk",
            Algorithm::Drgd => "drgd",
            Algorithm::DeepInit => "deepinit",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm '{s}'")))
    }

    pub fn needs_generator(self) -> bool {
        matches!(self, Algorithm::Drgd | Algorithm::DeepInit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensingChoice {
    Gaussian,
    Diffraction { standoff_m: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorChoice {
    Weights(PathBuf),
    /// The built-in smooth test generator.
    Synthetic,
}

/// Starting point of standalone randomized Kaczmarz.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkInit {
    Spectral,
    Random,
}

/// Targets used as ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSource {
    Dataset(DatasetSource),
    /// `G(z)` for standard normal `z`, so every target lies in the generator's range.
    GeneratorRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: TargetSource,
    /// IDX image file for the MNIST dataset.
    pub mnist_images: Option<PathBuf>,
    /// Number of phantoms synthesized before selection.
    pub phantom_pool: usize,
    pub phantom_side: usize,
    pub algorithms: Vec<Algorithm>,
    pub sensing: SensingChoice,
    /// Stand-off distances visited by the sweep.
    pub standoffs: Vec<f64>,
    pub mask_density: f64,
    pub sampling_rates: Vec<f64>,
    pub num_images: usize,
    pub seed: u64,
    pub generator: Option<GeneratorChoice>,
    pub wf_k_max: usize,
    pub twf_k_max: usize,
    pub rk_k_max: usize,
    pub wf_step_max: f64,
    pub wf_step_ramp: f64,
    /// Unset bounds resolve to the standard window, or to the widened
    /// window in the stand-off sweep.
    pub twf_lb: Option<f64>,
    pub twf_ub: Option<f64>,
    pub i_max: usize,
    pub eta: f64,
    pub lambda: f64,
    pub optimizer: Optimizer,
    pub rk_init: RkInit,
    pub row_selection: RowSelection,
    /// Repetitions per initializer when timing, reporting the median.
    pub timing_repeats: usize,
    pub out_csv: PathBuf,
    pub dump_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: TargetSource::Dataset(DatasetSource::SheppLogan),
            mnist_images: None,
            phantom_pool: 100,
            phantom_side: 28,
            algorithms: vec![Algorithm::Rk],
            sensing: SensingChoice::Gaussian,
            standoffs: STANDOFF_GRID_M.to_vec(),
            mask_density: DEFAULT_MASK_DENSITY,
            sampling_rates: vec![0.125, 0.25, 0.5, 1.0, 2.0, 4.0],
            num_images: 5,
            seed: 0,
            generator: None,
            wf_k_max: WF_K_MAX,
            twf_k_max: TWF_K_MAX,
            rk_k_max: RK_K_MAX,
            wf_step_max: WF_STEP_MAX,
            wf_step_ramp: WF_STEP_RAMP,
            twf_lb: None,
            twf_ub: None,
            i_max: DRGD_I_MAX,
            eta: DRGD_STEP_SIZE,
            lambda: DRGD_REG_WEIGHT,
            optimizer: Optimizer::adam(),
            rk_init: RkInit::Spectral,
            row_selection: RowSelection::Uniform,
            timing_repeats: 3,
            out_csv: PathBuf::from("results.csv"),
            dump_dir: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse '{value}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Splits `key = value` lines into pairs.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(parse_config_text(text)?)?;
        Ok(cfg)
    }

    pub fn apply<K: AsRef<str>, V: AsRef<str>>(
        &mut self,
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<()> {
        for (k, v) in pairs {
            self.set(k.as_ref(), v.as_ref())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "dataset" => {
                self.dataset = match v.to_ascii_lowercase().as_str() {
                    "mnist" => TargetSource::Dataset(DatasetSource::Mnist),
                    "shepp-logan" | "shepplogan" | "phantom" => {
                        TargetSource::Dataset(DatasetSource::SheppLogan)
                    }
                    "generator" => TargetSource::GeneratorRange,
                    _ => return Err(Error::InvalidParameter(format!("unknown dataset '{v}'"))),
                }
            }
            "mnist-images" => self.mnist_images = Some(PathBuf::from(v)),
            "phantom-pool" => self.phantom_pool = parse_num(&key, v)?,
            "phantom-side" => self.phantom_side = parse_num(&key, v)?,
            "algorithm" | "algorithms" => {
                self.algorithms = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(Algorithm::parse)
                    .collect::<Result<_>>()?
            }
            "sensing" => {
                let lower = v.to_ascii_lowercase();
                self.sensing = match lower.split_once(':') {
                    None if lower == "gaussian" => SensingChoice::Gaussian,
                    None if lower == "diffraction" => SensingChoice::Diffraction {
                        standoff_m: MODULATOR_TO_SCENE_M,
                    },
                    Some(("diffraction", d)) => SensingChoice::Diffraction {
                        standoff_m: parse_num(&key, d)?,
                    },
                    _ => return Err(Error::InvalidParameter(format!("unknown sensing '{v}'"))),
                }
            }
            "standoff" => {
                self.sensing = SensingChoice::Diffraction {
                    standoff_m: parse_num(&key, v)?,
                }
            }
            "standoffs" => self.standoffs = parse_list(&key, v)?,
            "mask-density" => self.mask_density = parse_num(&key, v)?,
            "rates" => self.sampling_rates = parse_list(&key, v)?,
            "images" => self.num_images = parse_num(&key, v)?,
            "seed" => self.seed = parse_num(&key, v)?,
            "weights" => {
                self.generator = match v {
                    "" | "none" => None,
                    "synthetic" => Some(GeneratorChoice::Synthetic),
                    path => Some(GeneratorChoice::Weights(PathBuf::from(path))),
                }
            }
            "k-max" => {
                let k = parse_num(&key, v)?;
                (self.wf_k_max, self.twf_k_max, self.rk_k_max) = (k, k, k);
            }
            "wf-k-max" => self.wf_k_max = parse_num(&key, v)?,
            "twf-k-max" => self.twf_k_max = parse_num(&key, v)?,
            "rk-k-max" => self.rk_k_max = parse_num(&key, v)?,
            "wf-step-max" => self.wf_step_max = parse_num(&key, v)?,
            "wf-step-ramp" => self.wf_step_ramp = parse_num(&key, v)?,
            "twf-lb" => self.twf_lb = Some(parse_num(&key, v)?),
            "twf-ub" => self.twf_ub = Some(parse_num(&key, v)?),
            "i-max" => self.i_max = parse_num(&key, v)?,
            "eta" => self.eta = parse_num(&key, v)?,
            "lambda" => self.lambda = parse_num(&key, v)?,
            "optimizer" => {
                self.optimizer = match v.to_ascii_lowercase().as_str() {
                    "adam" => Optimizer::adam(),
                    "plain" | "subgradient" => Optimizer::PlainSubgradient,
                    _ => return Err(Error::InvalidParameter(format!("unknown optimizer '{v}'"))),
                }
            }
            "rk-init" => {
                self.rk_init = match v.to_ascii_lowercase().as_str() {
                    "spectral" => RkInit::Spectral,
                    "random" => RkInit::Random,
                    _ => return Err(Error::InvalidParameter(format!("unknown rk-init '{v}'"))),
                }
            }
            "row-selection" => {
                self.row_selection = match v.to_ascii_lowercase().as_str() {
                    "uniform" => RowSelection::Uniform,
                    "norm-weighted" | "weighted" => RowSelection::NormWeighted,
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown row-selection '{v}'"
                        )))
                    }
                }
            }
            "timing-repeats" => self.timing_repeats = parse_num(&key, v)?,
            "out-csv" => self.out_csv = PathBuf::from(v),
            "dump-dir" => self.dump_dir = (!v.is_empty()).then(|| PathBuf::from(v)),
            _ => return Err(Error::InvalidParameter(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    /// TWF window for a normal run or the stand-off sweep.
    pub fn twf_bounds(&self, sweep: bool) -> (f64, f64) {
        let (lb, ub) = if sweep {
            TWF_SENSITIVITY_BOUNDS
        } else {
            TWF_DEFAULT_BOUNDS
        };
        (self.twf_lb.unwrap_or(lb), self.twf_ub.unwrap_or(ub))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.sampling_rates.is_empty() {
            return bad("no sampling rates given".into());
        }
        if let Some(r) = self.sampling_rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return bad(format!("sampling rate must be positive, got {r}"));
        }
        if self.num_images == 0 {
            return bad("images must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithm selected".into());
        }
        if let Some(alg) = self.algorithms.iter().find(|a| a.needs_generator()) {
            if self.generator.is_none() {
                return bad(format!(
                    "algorithm {} needs a generator: pass --weights <file> or --weights synthetic",
                    alg.name()
                ));
            }
        }
        if self.dataset == TargetSource::GeneratorRange && self.generator.is_none() {
            return bad("dataset 'generator' needs --weights".into());
        }
        if self.dataset == TargetSource::Dataset(DatasetSource::Mnist) && self.mnist_images.is_none()
        {
            return bad("dataset mnist needs --mnist-images <idx file>".into());
        }
        if let SensingChoice::Diffraction { standoff_m } = self.sensing {
            if !(standoff_m > 0.0) {
                return bad(format!("stand-off distance must be positive, got {standoff_m}"));
            }
        }
        if self.timing_repeats == 0 {
            return bad("timing-repeats must be at least 1".into());
        }
        Ok(())
    }

    /// Fully resolved settings in the format accepted by [`ExperimentConfig::from_text`].
    pub fn to_text(&self, sweep: bool) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("# rng", RNG_VERSION.to_string());
        put(
            "dataset",
            match self.dataset {
                TargetSource::Dataset(DatasetSource::Mnist) => "mnist",
                TargetSource::Dataset(DatasetSource::SheppLogan) => "shepp-logan",
                TargetSource::GeneratorRange => "generator",
            }
            .into(),
        );
        if let Some(p) = &self.mnist_images {
            put("mnist-images", p.display().to_string());
        }
        put("phantom-pool", self.phantom_pool.to_string());
        put("phantom-side", self.phantom_side.to_string());
        put(
            "algorithms",
            self.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(","),
        );
        put(
            "sensing",
            match self.sensing {
                SensingChoice::Gaussian => "gaussian".into(),
                SensingChoice::Diffraction { standoff_m } => format!("diffraction:{standoff_m}"),
            },
        );
        put("standoffs", join(&self.standoffs));
        put("mask-density", self.mask_density.to_string());
        put("rates", join(&self.sampling_rates));
        put("images", self.num_images.to_string());
        put("seed", self.seed.to_string());
        put(
            "weights",
            match &self.generator {
                None => "none".into(),
                Some(GeneratorChoice::Synthetic) => "synthetic".into(),
                Some(GeneratorChoice::Weights(p)) => p.display().to_string(),
            },
        );
        put("wf-k-max", self.wf_k_max.to_string());
        put("twf-k-max", self.twf_k_max.to_string());
        put("rk-k-max", self.rk_k_max.to_string());
        put("wf-step-max", self.wf_step_max.to_string());
        put("wf-step-ramp", self.wf_step_ramp.to_string());
        let (lb, ub) = self.twf_bounds(sweep);
        put("twf-lb", lb.to_string());
        put("twf-ub", ub.to_string());
        put("i-max", self.i_max.to_string());
        put("eta", self.eta.to_string());
        put("lambda", self.lambda.to_string());
        put(
            "optimizer",
            match self.optimizer {
                Optimizer::PlainSubgradient => "plain",
                Optimizer::Adam { .. } => "adam",
            }
            .into(),
        );
        put(
            "rk-init",
            match self.rk_init {
                RkInit::Spectral => "spectral",
                RkInit::Random => "random",
            }
            .into(),
        );
        put(
            "row-selection",
            match self.row_selection {
                RowSelection::Uniform => "uniform",
                RowSelection::NormWeighted => "norm-weighted",
            }
            .into(),
        );
        put("timing-repeats", self.timing_repeats.to_string());
        put("out-csv", self.out_csv.display().to_string());
        if let Some(d) = &self.dump_dir {
            put("dump-dir", d.display().to_string());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_application_order() {
        let mut cfg = ExperimentConfig::from_text("seed = 3\nrates = 0.5, 1\n# note\nimages=2").unwrap();
        assert_eq!((cfg.seed, cfg.num_images), (3, 2));
        assert_eq!(cfg.sampling_rates, vec![0.5, 1.0]);
        cfg.apply([("--seed", "9"), ("k_max", "10")]).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!((cfg.wf_k_max, cfg.twf_k_max, cfg.rk_k_max), (10, 10, 10));
    }

    #[test]
    fn resolved_text_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply([
            ("algorithms", "wf,deepinit"),
            ("weights", "synthetic"),
            ("sensing", "diffraction:0.02"),
            ("optimizer", "plain"),
            ("dump-dir", "out"),
        ])
        .unwrap();
        let back = ExperimentConfig::from_text(&cfg.to_text(false)).unwrap();
        assert_eq!(back.twf_bounds(false), TWF_DEFAULT_BOUNDS);
        assert_eq!(
            ExperimentConfig {
                twf_lb: None,
                twf_ub: None,
                ..back
            },
            cfg
        );
    }

    #[test]
    fn validation_messages() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("algorithm", "drgd").unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("--weights"), "{err}");
        cfg.set("weights", "synthetic").unwrap();
        cfg.set("rates", "0.5,-1").unwrap();
        assert!(cfg.validate().is_err());
        assert!(cfg.set("bogus", "1").is_err());
        assert!(cfg.set("algorithm", "fienup").is_err());
    }
}
