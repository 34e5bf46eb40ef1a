use std::time::Instant;

use num_complex::Complex64;

use super::{
    log_interval, loss_from_linear, resolve_init, ClassicalConfig, SolverReport, MAX_STEP_HALVINGS,
};
use crate::error::{check_len, Error, Result};
use crate::numerics::real_norm;
use crate::sensing::SensingOperator;

/// Wirtinger Flow restricted to real signals.
///
/// Each step moves along `(1/m) Σ_i (|u_i|² − y_i) Re(conj(u_i) A_i)`, i.e. the
/// intensity-loss gradient scaled by `1/(4m)`, with step `μ_k / ‖x⁰‖²` and
/// `μ_k = min(1 − e^{−k/k₀}, μ_max)`.
///
/// A step that would leave the loss non-finite or above its initial value is
/// retried with half the step scale, at most [`MAX_STEP_HALVINGS`] times per
/// run; the halved scale persists for the remaining iterations.
pub fn wirtinger_flow(a: &SensingOperator, y: &[f64], cfg: &ClassicalConfig) -> Result<SolverReport> {
    descend(a, y, cfg, None, "wf")
}

/// Wirtinger Flow where summand `i` only contributes while
/// `lb ≤ √n·|u_i| / (‖A_i‖·‖x‖) ≤ ub`.
///
/// With the window wide open the iterates coincide bit for bit with
/// [`wirtinger_flow`].
pub fn truncated_wirtinger_flow(
    a: &SensingOperator,
    y: &[f64],
    cfg: &ClassicalConfig,
) -> Result<SolverReport> {
    descend(a, y, cfg, Some((cfg.twf_lb, cfg.twf_ub)), "twf")
}

fn descend(
    a: &SensingOperator,
    y: &[f64],
    cfg: &ClassicalConfig,
    window: Option<(f64, f64)>,
    name: &'static str,
) -> Result<SolverReport> {
    let start = Instant::now();
    cfg.validate()?;
    check_len("measurements", a.rows(), y.len())?;
    let mut rng = cfg.rng.clone();
    let mut x = resolve_init(a, y, &cfg.init, &mut rng)?;
    let x0_norm_sq = real_norm(&x).powi(2);
    if x0_norm_sq == 0.0 {
        return Err(Error::ZeroInitialization);
    }

    let m = a.rows() as f64;
    let sqrt_n = (a.cols() as f64).sqrt();
    let row_norms: Vec<f64> = a.row_norms_sq().iter().map(|s| s.sqrt()).collect();
    let every = log_interval(cfg.k_max);

    let mut u = a.apply(&x)?;
    let initial_loss = loss_from_linear(&u, y);
    let mut trace = vec![initial_loss];
    let mut scale = 1.0;
    let mut halvings = 0;
    let mut iterations = 0;
    'outer: for k in 1..=cfg.k_max {
        let x_norm = real_norm(&x);
        let weights: Vec<Complex64> = u
            .iter()
            .zip(y)
            .zip(&row_norms)
            .map(|((&ui, &yi), &ai_norm)| {
                let keep = match window {
                    None => true,
                    Some((lb, ub)) => {
                        let ratio = sqrt_n * ui.norm() / (ai_norm * x_norm);
                        lb <= ratio && ratio <= ub
                    }
                };
                if keep {
                    (ui.norm_sqr() - yi) * ui
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let direction = a.adjoint_real(&weights)?;
        let mu = (1.0 - (-(k as f64) / cfg.step_ramp).exp()).min(cfg.step_size);
        loop {
            let step = scale * mu / (x0_norm_sq * m);
            let candidate: Vec<f64> = x.iter().zip(&direction).map(|(xi, di)| xi - step * di).collect();
            let u_next = a.apply(&candidate)?;
            let loss = loss_from_linear(&u_next, y);
            if loss.is_finite() && loss <= initial_loss {
                x = candidate;
                u = u_next;
                break;
            }
            if halvings == MAX_STEP_HALVINGS {
                log::warn!("{name}: loss diverged after {halvings} step halvings; stopping at iteration {k}");
                break 'outer;
            }
            halvings += 1;
            scale *= 0.5;
            log::info!("{name}: step at iteration {k} raised the loss above its initial value; step scale halved to {scale}");
        }
        iterations = k;
        if k % every == 0 || k == cfg.k_max {
            trace.push(loss_from_linear(&u, y));
        }
    }

    Ok(SolverReport::single(name, x, trace, iterations, start.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::Initialization;
    use crate::numerics::SeededRng;
    use crate::sensing::intensity_forward;

    #[test]
    fn loss_decreases_on_easy_instance() {
        let mut rng = SeededRng::new(2);
        let a = SensingOperator::gaussian(&mut rng, 160, 20).unwrap();
        let x: Vec<f64> = (0..20).map(|_| rng.standard_normal()).collect();
        let y = intensity_forward(&a, &x).unwrap();
        let r = wirtinger_flow(&a, &y, &ClassicalConfig::wirtinger_flow()).unwrap();
        assert!(r.loss_trace.last().unwrap() <= &r.loss_trace[0]);
        assert_eq!(r.iterations_run, 50);
        assert!(r.loss_trace.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn oversized_steps_are_halved() {
        let mut rng = SeededRng::new(3);
        let a = SensingOperator::gaussian(&mut rng, 60, 10).unwrap();
        let x: Vec<f64> = (0..10).map(|_| rng.standard_normal()).collect();
        let y = intensity_forward(&a, &x).unwrap();
        let mut cfg = ClassicalConfig::wirtinger_flow().with_k_max(300);
        cfg.step_size = 1e3;
        cfg.step_ramp = 1e-3;
        let r = wirtinger_flow(&a, &y, &cfg).unwrap();
        let last = *r.loss_trace.last().unwrap();
        assert!(last.is_finite() && last <= r.loss_trace[0]);
        assert!(r.reconstruction.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn inverted_bounds_rejected() {
        let mut rng = SeededRng::new(2);
        let a = SensingOperator::gaussian(&mut rng, 8, 2).unwrap();
        let cfg = ClassicalConfig::truncated_wirtinger_flow().with_twf_bounds(5.0, 0.3);
        let y = vec![1.0; 8];
        assert!(truncated_wirtinger_flow(&a, &y, &cfg).is_err());
    }

    #[test]
    fn zero_magnitude_summand_is_truncated() {
        // Row 1 is orthogonal to x, so u_1 = 0 and only row 0 drives the step.
        let m = crate::numerics::ComplexMatrix::from_real(2, 2, &[1., 0., 0., 1.]).unwrap();
        let a = SensingOperator::new(m, crate::sensing::SensingKind::Gaussian).unwrap();
        let y = [1.0, 4.0];
        let init = Initialization::Provided(vec![2.0, 0.0]);
        let cfg = ClassicalConfig::truncated_wirtinger_flow()
            .with_k_max(1)
            .with_init(init.clone())
            .with_twf_bounds(1e-3, 1e12);
        let r = truncated_wirtinger_flow(&a, &y, &cfg).unwrap();
        assert_eq!(r.reconstruction[1], 0.0);
        assert!(r.reconstruction[0] < 2.0);
    }
}
