//! Classical phase retrieval: spectral initialization, Wirtinger Flow,
//! Truncated Wirtinger Flow and randomized Kaczmarz.
//!
//! All solvers recover a real signal `x` from intensities `y = |Ax|²` by
//! (approximately) minimizing the intensity loss `Σ_i (|(Ax)_i|² − y_i)²`.

mod kaczmarz;
mod spectral;
mod wirtinger;

use std::time::Duration;

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::numerics::{real_norm, SeededRng};
use crate::sensing::SensingOperator;

pub use kaczmarz::{randomized_kaczmarz, randomized_kaczmarz_with, Kaczmarz, RowSelection};
pub use spectral::{spectral_init, SPECTRAL_POWER_ITERS, SPECTRAL_POWER_TOL};
pub use wirtinger::{truncated_wirtinger_flow, wirtinger_flow};

pub const WF_K_MAX: usize = 50;
pub const TWF_K_MAX: usize = 200;
pub const RK_K_MAX: usize = 100_000;
/// Step-size cap `μ_max` of the Wirtinger Flow schedule.
pub const WF_STEP_MAX: f64 = 0.2;
/// Ramp constant `k₀` of the schedule `μ_k = min(1 − e^{−k/k₀}, μ_max)`.
pub const WF_STEP_RAMP: f64 = 330.0;
/// Standard TWF trust window.
pub const TWF_DEFAULT_BOUNDS: (f64, f64) = (0.3, 5.0);
/// Widened TWF window used for the diffraction sensitivity sweep.
pub const TWF_SENSITIVITY_BOUNDS: (f64, f64) = (0.001, 500.0);
/// Limit on step halvings after divergent steps, per solver run.
pub const MAX_STEP_HALVINGS: u32 = 10;

/// Where a solver starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Initialization {
    Spectral,
    Provided(Vec<f64>),
    /// Random direction scaled to the energy estimate `sqrt(mean(y))`.
    RandomUnit,
}

#[derive(Debug, Clone)]
pub struct ClassicalConfig {
    pub k_max: usize,
    /// `μ_max` for WF/TWF.
    pub step_size: f64,
    /// `k₀` for WF/TWF.
    pub step_ramp: f64,
    pub twf_lb: f64,
    pub twf_ub: f64,
    pub rng: SeededRng,
    pub init: Initialization,
    pub row_selection: RowSelection,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            k_max: WF_K_MAX,
            step_size: WF_STEP_MAX,
            step_ramp: WF_STEP_RAMP,
            twf_lb: TWF_DEFAULT_BOUNDS.0,
            twf_ub: TWF_DEFAULT_BOUNDS.1,
            rng: SeededRng::new(0),
            init: Initialization::Spectral,
            row_selection: RowSelection::Uniform,
        }
    }
}

impl ClassicalConfig {
    pub fn wirtinger_flow() -> Self {
        Self::default()
    }

    pub fn truncated_wirtinger_flow() -> Self {
        Self {
            k_max: TWF_K_MAX,
            ..Self::default()
        }
    }

    pub fn kaczmarz() -> Self {
        Self {
            k_max: RK_K_MAX,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng = SeededRng::new(seed);
        self
    }

    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn with_init(mut self, init: Initialization) -> Self {
        self.init = init;
        self
    }

    pub fn with_twf_bounds(mut self, lb: f64, ub: f64) -> Self {
        self.twf_lb = lb;
        self.twf_ub = ub;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::InvalidParameter("k_max must be at least 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_ramp > 0.0) {
            return Err(Error::InvalidParameter("step size parameters must be positive".into()));
        }
        if !(self.twf_lb < self.twf_ub) {
            return Err(Error::InvalidParameter(format!(
                "TWF lower bound {} must be below upper bound {}",
                self.twf_lb, self.twf_ub
            )));
        }
        Ok(())
    }
}

/// Trace of one solver phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub name: &'static str,
    pub loss_trace: Vec<f64>,
    pub iterations_run: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub reconstruction: Vec<f64>,
    /// Objective value at logged iterations, starting with the initial point.
    pub loss_trace: Vec<f64>,
    pub iterations_run: usize,
    pub wall_time: Duration,
    /// Per-phase breakdown; a single entry for one-phase solvers.
    pub phases: Vec<PhaseReport>,
}

impl SolverReport {
    pub(crate) fn single(
        name: &'static str,
        reconstruction: Vec<f64>,
        loss_trace: Vec<f64>,
        iterations_run: usize,
        wall_time: Duration,
    ) -> Self {
        Self {
            phases: vec![PhaseReport {
                name,
                loss_trace: loss_trace.clone(),
                iterations_run,
                wall_time,
            }],
            reconstruction,
            loss_trace,
            iterations_run,
            wall_time,
        }
    }
}

/// Logging stride so that at most ~500 loss values are recorded.
pub fn log_interval(iterations: usize) -> usize {
    (iterations / 500).max(1)
}

/// `Σ_i (|(Ax)_i|² − y_i)²` for a real signal.
pub fn intensity_loss(a: &SensingOperator, y: &[f64], x: &[f64]) -> Result<f64> {
    check_len("measurements", a.rows(), y.len())?;
    Ok(loss_from_linear(&a.apply(x)?, y))
}

pub(crate) fn loss_from_linear(u: &[Complex64], y: &[f64]) -> f64 {
    u.iter()
        .zip(y)
        .map(|(u, &yi)| {
            let r = u.norm_sqr() - yi;
            r * r
        })
        .sum()
}

/// Intensity loss and its gradient with respect to a real signal:
/// `∇ = Σ_i 4(|u_i|² − y_i) Re(conj(u_i) A_i)` with `u = Ax`.
pub fn intensity_loss_gradient(
    a: &SensingOperator,
    y: &[f64],
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    check_len("measurements", a.rows(), y.len())?;
    let u = a.apply(x)?;
    let loss = loss_from_linear(&u, y);
    let weights: Vec<Complex64> = u
        .iter()
        .zip(y)
        .map(|(ui, &yi)| 4.0 * (ui.norm_sqr() - yi) * ui)
        .collect();
    Ok((loss, a.adjoint_real(&weights)?))
}

pub(crate) fn resolve_init(
    a: &SensingOperator,
    y: &[f64],
    init: &Initialization,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let x0 = match init {
        Initialization::Spectral => spectral_init(a, y)?,
        Initialization::Provided(x) => {
            check_len("initial estimate", a.cols(), x.len())?;
            x.clone()
        }
        Initialization::RandomUnit => {
            check_len("measurements", a.rows(), y.len())?;
            let scale = (y.iter().sum::<f64>() / y.len() as f64).sqrt();
            let mut v: Vec<f64> = (0..a.cols()).map(|_| rng.standard_normal()).collect();
            let norm = real_norm(&v);
            let scale = if scale > 0.0 { scale } else { 1.0 };
            v.iter_mut().for_each(|t| *t *= scale / norm);
            v
        }
    };
    if real_norm(&x0) == 0.0 {
        return Err(Error::ZeroInitialization);
    }
    Ok(x0)
}
