use std::time::Instant;

use super::net::GeneratorNet;
use super::tv::{tv_norm, tv_subgradient};
pub use crate::classical::MAX_STEP_HALVINGS;
use crate::classical::{
    intensity_loss_gradient, log_interval, randomized_kaczmarz, PhaseReport, SolverReport,
};
use crate::error::{check_len, Error, Result};
use crate::numerics::SeededRng;
use crate::sensing::SensingOperator;

pub const DRGD_I_MAX: usize = 200;
pub const DRGD_STEP_SIZE: f64 = 0.1;
pub const DRGD_REG_WEIGHT: f64 = 0.1;

/// Point in the generator's latent space.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector(pub Vec<f64>);

impl LatentVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    PlainSubgradient,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DrgdConfig {
    pub i_max: usize,
    pub step_size: f64,
    pub reg_weight: f64,
    pub rng: SeededRng,
    pub optimizer: Optimizer,
}

impl Default for DrgdConfig {
    fn default() -> Self {
        Self {
            i_max: DRGD_I_MAX,
            step_size: DRGD_STEP_SIZE,
            reg_weight: DRGD_REG_WEIGHT,
            rng: SeededRng::new(0),
            optimizer: Optimizer::adam(),
        }
    }
}

impl DrgdConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng = SeededRng::new(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParameter("DRGD step size must be positive".into()));
        }
        if !(self.reg_weight >= 0.0 && self.reg_weight.is_finite()) {
            return Err(Error::InvalidParameter("regularization weight must be >= 0".into()));
        }
        Ok(())
    }
}

/// Generative-prior objective `‖y − |A G(z)|²‖² + λ‖G(z)‖_TV` and its
/// (sub)gradient with respect to `z`.
pub fn drgd_objective_gradient(
    a: &SensingOperator,
    y: &[f64],
    g: &GeneratorNet,
    z: &[f64],
    reg_weight: f64,
    width: usize,
    height: usize,
) -> Result<(f64, Vec<f64>)> {
    check_len("generator output", a.cols(), g.output_dim())?;
    let x = g.forward(z)?;
    let (data, mut grad_x) = intensity_loss_gradient(a, y, &x)?;
    let mut objective = data;
    if reg_weight != 0.0 {
        objective += reg_weight * tv_norm(&x, width, height)?;
        for (gx, t) in grad_x.iter_mut().zip(tv_subgradient(&x, width, height)?) {
            *gx += reg_weight * t;
        }
    }
    Ok((objective, g.vjp(z, &grad_x)?))
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

fn propose(
    optimizer: Optimizer,
    state: &AdamState,
    z: &[f64],
    grad: &[f64],
    eta: f64,
) -> (Vec<f64>, AdamState) {
    match optimizer {
        Optimizer::PlainSubgradient => (
            z.iter().zip(grad).map(|(zi, gi)| zi - eta * gi).collect(),
            AdamState {
                m: Vec::new(),
                v: Vec::new(),
                t: state.t + 1,
            },
        ),
        Optimizer::Adam { beta1, beta2, eps } => {
            let t = state.t + 1;
            let m: Vec<f64> = state
                .m
                .iter()
                .zip(grad)
                .map(|(m, g)| beta1 * m + (1.0 - beta1) * g)
                .collect();
            let v: Vec<f64> = state
                .v
                .iter()
                .zip(grad)
                .map(|(v, g)| beta2 * v + (1.0 - beta2) * g * g)
                .collect();
            let c1 = 1.0 - beta1.powi(t);
            let c2 = 1.0 - beta2.powi(t);
            let next = z
                .iter()
                .zip(m.iter().zip(&v))
                .map(|(zi, (mi, vi))| zi - eta * (mi / c1) / ((vi / c2).sqrt() + eps))
                .collect();
            (next, AdamState { m, v, t })
        }
    }
}

/// Deep regularized gradient descent over the latent space.
///
/// Starts from `z⁰ ~ N(0, I_p)` drawn from `cfg.rng` and takes `i_max`
/// optimizer steps. A step that produces a non-finite objective is retried
/// with half the step size, at most [`MAX_STEP_HALVINGS`] times in total.
pub fn drgd(
    a: &SensingOperator,
    y: &[f64],
    g: &GeneratorNet,
    cfg: &DrgdConfig,
    width: usize,
    height: usize,
) -> Result<(LatentVector, SolverReport)> {
    let start = Instant::now();
    cfg.validate()?;
    check_len("measurements", a.rows(), y.len())?;
    check_len("image", width * height, g.output_dim())?;
    let mut rng = cfg.rng.clone();
    let mut z: Vec<f64> = (0..g.latent_dim()).map(|_| rng.standard_normal()).collect();

    let eval = |z: &[f64]| drgd_objective_gradient(a, y, g, z, cfg.reg_weight, width, height);
    let (mut objective, mut grad) = eval(&z)?;
    let mut trace = vec![objective];
    let every = log_interval(cfg.i_max);
    let mut eta = cfg.step_size;
    let mut halvings = 0;
    let mut state = AdamState {
        m: vec![0.0; z.len()],
        v: vec![0.0; z.len()],
        t: 0,
    };
    let mut iterations = 0;

    'outer: for i in 1..=cfg.i_max {
        loop {
            let (candidate, next_state) = propose(cfg.optimizer, &state, &z, &grad, eta);
            let (obj, gr) = eval(&candidate)?;
            if obj.is_finite() && gr.iter().all(|v| v.is_finite()) {
                z = candidate;
                state = next_state;
                objective = obj;
                grad = gr;
                break;
            }
            if halvings == MAX_STEP_HALVINGS {
                log::warn!("drgd: objective diverged after {halvings} step halvings; stopping at iteration {i}");
                break 'outer;
            }
            halvings += 1;
            eta *= 0.5;
            log::warn!("drgd: non-finite objective at iteration {i}; step size halved to {eta}");
        }
        iterations = i;
        if i % every == 0 || i == cfg.i_max {
            trace.push(objective);
        }
    }

    let x = g.forward(&z)?;
    let report = SolverReport::single("drgd", x, trace, iterations, start.elapsed());
    Ok((LatentVector(z), report))
}

/// Generator-initialized phase retrieval: DRGD, then randomized Kaczmarz
/// started from `G(z*)`. The result is free to leave the generator's range.
#[allow(clippy::too_many_arguments)]
pub fn deepinit(
    a: &SensingOperator,
    y: &[f64],
    g: &GeneratorNet,
    cfg: &DrgdConfig,
    k_max: usize,
    rng: &mut SeededRng,
    width: usize,
    height: usize,
) -> Result<SolverReport> {
    let (_, init) = drgd(a, y, g, cfg, width, height)?;
    let rk = randomized_kaczmarz(a, y, &init.reconstruction, k_max, rng)?;
    let phase = |r: &SolverReport| PhaseReport {
        name: r.phases[0].name,
        loss_trace: r.loss_trace.clone(),
        iterations_run: r.iterations_run,
        wall_time: r.wall_time,
    };
    Ok(SolverReport {
        phases: vec![phase(&init), phase(&rk)],
        reconstruction: rk.reconstruction,
        loss_trace: rk.loss_trace,
        iterations_run: init.iterations_run + rk.iterations_run,
        wall_time: init.wall_time + rk.wall_time,
    })
}
