//! Posterior sampling: mode finding by BFGS with finite-difference
//! gradients, implicit sampling (Gaussian map at the mode with exact
//! reweighting), random-walk Metropolis, and the conditional-mean estimator.
//!
//! Implicit sampling draws `ξ_k ~ N(0, I)`, maps `θ_k = μ + Lξ_k` with
//! `LLᵀ = H⁻¹`, and weights `log w_k = F(μ) − F(θ_k) + ½‖ξ_k‖²`, which makes
//! the weights exactly uniform when `F` is quadratic. Weight evaluations for
//! distinct samples run in parallel; each sample owns a counter-mode RNG
//! stream derived from `(seed, k)`, so parallel and sequential runs produce
//! identical ensembles.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bayes::PosteriorSpec;
use crate::error::{Error, Result};
use crate::exec;

const MAX_ITERATIONS: usize = 200;
const GRADIENT_STEP: f64 = 1e-5;
const HESSIAN_STEP: f64 = 1e-4;
const HESSIAN_EIGEN_FLOOR: f64 = 1e-8;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
const MAX_FIRST_STEP: f64 = 10.0;

/// Result of the mode search, with the finite-difference Hessian at the mode.
#[derive(Debug, Clone)]
pub struct ModeResult {
    pub mode: Vec<f64>,
    /// symmetric positive definite (eigenvalues floored at 1e-8)
    pub hessian: DMatrix<f64>,
    /// `F(mode)`
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// posterior evaluations spent by the search, gradients and Hessian
    pub eval_count: u64,
}

struct CountedObjective<'a, 'b> {
    spec: &'a PosteriorSpec<'b>,
    evals: u64,
}

impl CountedObjective<'_, '_> {
    /// +∞ marks an evaluation failure (e.g. `e^Y` overflow during a line
    /// search); the step is rejected and the search continues.
    fn value_or_inf(&mut self, theta: &[f64]) -> f64 {
        self.evals += 1;
        match self.spec.neg_log_posterior(theta) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    }

    fn gradient(&mut self, theta: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; theta.len()];
        let mut probe = theta.to_vec();
        for i in 0..theta.len() {
            probe[i] = theta[i] + GRADIENT_STEP;
            let plus = self.value_or_inf(&probe);
            probe[i] = theta[i] - GRADIENT_STEP;
            let minus = self.value_or_inf(&probe);
            probe[i] = theta[i];
            grad[i] = (plus - minus) / (2.0 * GRADIENT_STEP);
        }
        grad
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Quasi-Newton (BFGS) minimization of the negative log-posterior with
/// central-difference gradients, started at `start` and stopped when
/// `‖∇F‖ ≤ tol` or progress stagnates. The Hessian at the mode comes from
/// central second differences, symmetrized, with eigenvalues floored to keep
/// it positive definite.
pub fn find_mode(spec: &PosteriorSpec<'_>, start: &[f64], tol: f64) -> Result<ModeResult> {
    if start.len() != spec.parameter_dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.parameter_dim(),
            got: start.len(),
        });
    }
    let m = start.len();
    let mut obj = CountedObjective { spec, evals: 0 };

    let mut x = start.to_vec();
    let mut fx = {
        obj.evals += 1;
        let v = spec.neg_log_posterior(&x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("posterior at the start point"));
        }
        v
    };
    let mut grad = obj.gradient(&x);
    let mut inv_hessian = DMatrix::<f64>::identity(m, m) / norm(&grad).max(1.0);

    let mut iterations = 0;
    let mut converged = norm(&grad) <= tol;
    while !converged {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::OptimizerCap(MAX_ITERATIONS));
        }
        iterations += 1;

        let g = DVector::from_column_slice(&grad);
        let direction = -(&inv_hessian * &g);
        let dir_norm = direction.norm();
        if dir_norm == 0.0 {
            break;
        }
        let slope = g.dot(&direction);
        let mut step = (MAX_FIRST_STEP / dir_norm).min(1.0);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate: Vec<f64> = x
                .iter()
                .zip(direction.iter())
                .map(|(xi, di)| xi + step * di)
                .collect();
            let fc = obj.value_or_inf(&candidate);
            if fc.is_finite() && fc <= fx + ARMIJO_C1 * step * slope {
                accepted = Some((candidate, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((x_next, f_next)) = accepted else {
            break; // line search stagnated at the resolution of F
        };

        let grad_next = obj.gradient(&x_next);
        let s: Vec<f64> = x_next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_next.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let s = DVector::from_column_slice(&s);
            let y = DVector::from_column_slice(&y);
            let rho = 1.0 / sy;
            let identity = DMatrix::<f64>::identity(m, m);
            let left = &identity - rho * &s * y.transpose();
            let right = &identity - rho * &y * s.transpose();
            inv_hessian = &left * inv_hessian * &right + rho * &s * s.transpose();
        }

        let stalled = (f_next - fx).abs() <= 1e-12 * (1.0 + fx.abs()) && norm(&s) <= 1e-9;
        x = x_next;
        fx = f_next;
        grad = grad_next;
        converged = norm(&grad) <= tol;
        if stalled {
            break;
        }
    }

    let hessian = finite_difference_hessian(&mut obj, &x, fx)?;
    Ok(ModeResult {
        gradient_norm: norm(&grad),
        mode: x,
        hessian,
        value: fx,
        iterations,
        eval_count: obj.evals,
    })
}

fn finite_difference_hessian(
    obj: &mut CountedObjective<'_, '_>,
    x: &[f64],
    fx: f64,
) -> Result<DMatrix<f64>> {
    let m = x.len();
    let h = HESSIAN_STEP;
    let mut hess = DMatrix::<f64>::zeros(m, m);
    let mut probe = x.to_vec();
    for i in 0..m {
        probe[i] = x[i] + h;
        let plus = obj.value_or_inf(&probe);
        probe[i] = x[i] - h;
        let minus = obj.value_or_inf(&probe);
        probe[i] = x[i];
        hess[(i, i)] = (plus - 2.0 * fx + minus) / (h * h);
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let mut at = |si: f64, sj: f64| {
                probe[i] = x[i] + si * h;
                probe[j] = x[j] + sj * h;
                let v = obj.value_or_inf(&probe);
                probe[i] = x[i];
                probe[j] = x[j];
                v
            };
            let value = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0))
                / (4.0 * h * h);
            hess[(i, j)] = value;
            hess[(j, i)] = value;
        }
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("finite-difference Hessian"));
    }
    // floor the spectrum to enforce positive definiteness
    let eigen = hess
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::Eigensolve("mode Hessian"))?;
    let floored = DMatrix::from_diagonal(&eigen.eigenvalues.map(|v| v.max(HESSIAN_EIGEN_FLOOR)));
    let rebuilt = &eigen.eigenvectors * floored * eigen.eigenvectors.transpose();
    if Cholesky::new(rebuilt.clone()).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(rebuilt)
}

/// Samples with normalized importance weights and the posterior-evaluation
/// cost incurred producing them.
#[derive(Debug, Clone)]
pub struct WeightedEnsemble {
    pub samples: Vec<Vec<f64>>,
    /// normalized, sums to one
    pub weights: Vec<f64>,
    /// end-to-end posterior evaluations: mode search plus one per sample
    pub eval_count: u64,
    /// effective sample size `(Σw)²/Σw²`
    pub ess: f64,
    /// set when `ess < 0.1·n`
    pub degenerate: bool,
}

/// Importance sampling with the Gaussian map at the mode: `θ_k = μ + Lξ_k`,
/// `LLᵀ = H⁻¹`, with exact reweighting against `F`.
pub fn implicit_sample(
    spec: &PosteriorSpec<'_>,
    mode: &ModeResult,
    n: usize,
    seed: u64,
) -> Result<WeightedEnsemble> {
    if n == 0 {
        return Err(Error::Config("implicit sampling needs n ≥ 1".into()));
    }
    let m = mode.mode.len();
    let h_chol = Cholesky::new(mode.hessian.clone()).ok_or(Error::NotPositiveDefinite)?;
    let h_inv = h_chol.inverse();
    let l = Cholesky::new(h_inv)
        .ok_or(Error::NotPositiveDefinite)?
        .unpack();

    let f_mode = mode.value;
    let draws = exec::map_indexed(n, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let xi: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let xi_v = DVector::from_column_slice(&xi);
        let shift = &l * &xi_v;
        let theta: Vec<f64> = mode
            .mode
            .iter()
            .zip(shift.iter())
            .map(|(mu, s)| mu + s)
            .collect();
        let log_weight = match spec.neg_log_posterior(&theta) {
            Ok(f) if f.is_finite() => f_mode - f + 0.5 * xi_v.norm_squared(),
            _ => f64::NEG_INFINITY,
        };
        (theta, log_weight)
    });

    let max_log = draws
        .iter()
        .map(|d| d.1)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max_log.is_finite() {
        return Err(Error::NonFinite("all importance weights"));
    }
    let mut samples = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (theta, lw) in draws {
        samples.push(theta);
        weights.push((lw - max_log).exp());
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

    Ok(WeightedEnsemble {
        eval_count: mode.eval_count + n as u64,
        degenerate: ess < 0.1 * n as f64,
        samples,
        weights,
        ess,
    })
}

/// A Metropolis chain with its acceptance rate and evaluation cost.
#[derive(Debug, Clone)]
pub struct McmcChain {
    /// `n_steps + 1` states including the start
    pub states: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    pub eval_count: u64,
}

/// Random-walk Metropolis with isotropic Gaussian proposals
/// `θ' ~ N(θ, step_sd² I)`; accepts with probability
/// `min(1, exp(F(θ) − F(θ')))`.
pub fn rw_metropolis(
    spec: &PosteriorSpec<'_>,
    start: &[f64],
    n_steps: usize,
    step_sd: f64,
    seed: u64,
) -> Result<McmcChain> {
    if !(step_sd > 0.0) {
        return Err(Error::Config("proposal step must be positive".into()));
    }
    if start.len() != spec.parameter_dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.parameter_dim(),
            got: start.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = start.to_vec();
    let mut f_current = spec.neg_log_posterior(&current)?;
    let mut eval_count = 1u64;
    let mut accepted = 0usize;

    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(current.clone());
    for _ in 0..n_steps {
        let proposal: Vec<f64> = current
            .iter()
            .map(|&c| c + step_sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        eval_count += 1;
        let f_proposal = match spec.neg_log_posterior(&proposal) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        };
        let log_ratio = f_current - f_proposal;
        let u: f64 = rng.random();
        if u.ln() < log_ratio {
            current = proposal;
            f_current = f_proposal;
            accepted += 1;
        }
        states.push(current.clone());
    }

    Ok(McmcChain {
        states,
        acceptance_rate: accepted as f64 / n_steps.max(1) as f64,
        eval_count,
    })
}

/// `Σ w_k θ_k`, the minimum mean-square-error estimate of the parameters.
pub fn conditional_mean(ensemble: &WeightedEnsemble) -> Vec<f64> {
    let m = ensemble.samples.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; m];
    for (sample, &w) in ensemble.samples.iter().zip(&ensemble.weights) {
        for (acc, &s) in mean.iter_mut().zip(sample) {
            *acc += w * s;
        }
    }
    mean
}

/// Euclidean norm of the estimation error `‖θ̂ − θ_true‖`.
pub fn estimation_error(estimate: &[f64], truth: &[f64]) -> f64 {
    debug_assert_eq!(estimate.len(), truth.len());
    estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}
