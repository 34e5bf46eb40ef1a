use std::time::Instant;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::{log_interval, loss_from_linear, SolverReport};
use crate::error::{check_len, Error, Result};
use crate::numerics::{real_projection, SeededRng};
use crate::sensing::SensingOperator;

/// How the next measurement is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowSelection {
    #[default]
    Uniform,
    /// Probability proportional to `‖a_i‖²`.
    NormWeighted,
}

enum Sampler {
    Uniform(usize),
    Weighted(WeightedIndex<f64>),
}

/// Randomized Kaczmarz iteration for phaseless equations.
///
/// The iterate is complex. A step on row `r` with `u = (Ax)_r` sets
/// `x ← x + (sign(u)·√y_r − u) / ‖A_r‖² · conj(A_r)`, where `sign(u) = u/|u|`
/// and `sign(0) = 1`, so that afterwards `|(Ax)_r| = √y_r`.
pub struct Kaczmarz<'a> {
    a: &'a SensingOperator,
    amplitudes: Vec<f64>,
    x: Vec<Complex64>,
    sampler: Sampler,
    rng: SeededRng,
}

impl<'a> Kaczmarz<'a> {
    pub fn new(
        a: &'a SensingOperator,
        y: &[f64],
        x0: Vec<Complex64>,
        selection: RowSelection,
        rng: SeededRng,
    ) -> Result<Self> {
        check_len("measurements", a.rows(), y.len())?;
        check_len("initial estimate", a.cols(), x0.len())?;
        if let Some(i) = y.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "measurement {i} is not a finite non-negative intensity"
            )));
        }
        let sampler = match selection {
            RowSelection::Uniform => Sampler::Uniform(a.rows()),
            RowSelection::NormWeighted => Sampler::Weighted(
                WeightedIndex::new(a.row_norms_sq())
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?,
            ),
        };
        Ok(Self {
            a,
            amplitudes: y.iter().map(|v| v.sqrt()).collect(),
            x: x0,
            sampler,
            rng,
        })
    }

    /// Performs one projection and returns the row it used.
    pub fn step(&mut self) -> usize {
        let r = match &self.sampler {
            Sampler::Uniform(m) => self.rng.index(*m),
            Sampler::Weighted(w) => w.sample(&mut self.rng),
        };
        let row = self.a.row(r);
        let u = row
            .iter()
            .zip(&self.x)
            .fold(Complex64::new(0.0, 0.0), |acc, (a, x)| acc + a * x);
        let magnitude = u.norm();
        let phase = if magnitude == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            u / magnitude
        };
        let coeff = (phase * self.amplitudes[r] - u) / self.a.row_norms_sq()[r];
        for (xi, ai) in self.x.iter_mut().zip(row) {
            *xi += coeff * ai.conj();
        }
        r
    }

    pub fn iterate(&self) -> &[Complex64] {
        &self.x
    }

    pub fn into_iterate(self) -> Vec<Complex64> {
        self.x
    }
}

/// Randomized Kaczmarz with uniform row selection from a real start point.
pub fn randomized_kaczmarz(
    a: &SensingOperator,
    y: &[f64],
    x0: &[f64],
    k_max: usize,
    rng: &mut SeededRng,
) -> Result<SolverReport> {
    randomized_kaczmarz_with(a, y, x0, k_max, rng, RowSelection::Uniform)
}

/// Runs `k_max` Kaczmarz steps and returns the real part of the iterate after
/// global phase alignment.
pub fn randomized_kaczmarz_with(
    a: &SensingOperator,
    y: &[f64],
    x0: &[f64],
    k_max: usize,
    rng: &mut SeededRng,
    selection: RowSelection,
) -> Result<SolverReport> {
    let start = Instant::now();
    let x0c: Vec<Complex64> = x0.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    let mut solver = Kaczmarz::new(a, y, x0c, selection, rng.clone())?;
    let every = log_interval(k_max);
    let mut trace = vec![loss_from_linear(&a.matrix().matvec(solver.iterate())?, y)];
    for k in 1..=k_max {
        solver.step();
        if k % every == 0 || k == k_max {
            trace.push(loss_from_linear(&a.matrix().matvec(solver.iterate())?, y));
        }
    }
    *rng = solver.rng.clone();
    let reconstruction = if k_max == 0 {
        x0.to_vec()
    } else {
        real_projection(solver.iterate())
    };
    Ok(SolverReport::single("rk", reconstruction, trace, k_max, start.elapsed()))
}
