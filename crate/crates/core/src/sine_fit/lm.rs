//! Levenberg-Marquardt fitting of [`SumOfSines`] to a sampled target.
//!
//! Damping follows Marquardt: the normal matrix is augmented with
//! `λ·diag(JᵀJ)`, `λ` starts at 1e-3 and moves by a factor of ten.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{initialize_from_spectrum, SumOfSines, MAX_TERMS};
use crate::error::{Error, Result};
use crate::waveform::SampledWaveform;

#[derive(Debug, Clone, PartialEq)]
pub struct LmOptions {
    pub max_iters: usize,
    pub initial_lambda: f64,
    pub lambda_factor: f64,
    /// Converged once an accepted step lowers the cost by less than this
    /// fraction.
    pub cost_tolerance: f64,
    /// Converged once `‖Jᵀr‖∞` drops below this.
    pub gradient_tolerance: f64,
    /// Gives up when λ grows past this without finding a descent step.
    pub max_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            initial_lambda: 1e-3,
            lambda_factor: 10.0,
            cost_tolerance: 1e-12,
            gradient_tolerance: 1e-10,
            max_lambda: 1e16,
        }
    }
}

/// Fit quality plus the optimizer's bookkeeping.
///
/// Reports built by [`goodness`] alone carry `iterations == 0`,
/// `converged == false` and an empty cost trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub r_squared: f64,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_lambda: f64,
    /// Cost `½Σr²` after the initial guess and after each accepted step.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub cost_trace: Vec<f64>,
}

/// `r_i = target_i - model(t_i)`.
pub fn residuals(model: &SumOfSines, target: &SampledWaveform) -> Vec<f64> {
    target
        .times()
        .zip(target.values())
        .map(|(t, y)| y - model.eval(t))
        .collect()
}

/// Analytic `∂r_i/∂(a_k, b_k, c_k)`, one row per sample, three columns per
/// term in `(a, b, c)` order.
pub fn jacobian(model: &SumOfSines, target: &SampledWaveform) -> DMatrix<f64> {
    let terms = model.terms();
    let mut jac = DMatrix::zeros(target.len(), 3 * terms.len());
    for (i, t) in target.times().enumerate() {
        for (k, term) in terms.iter().enumerate() {
            let (s, c) = (term.frequency * t + term.phase).sin_cos();
            jac[(i, 3 * k)] = -s;
            jac[(i, 3 * k + 1)] = -term.amplitude * t * c;
            jac[(i, 3 * k + 2)] = -term.amplitude * c;
        }
    }
    jac
}

/// `R² = 1 - SS_res/SS_tot` (floored at 0) and `rmse = √(SS_res/n)`.
pub fn goodness(model: &SumOfSines, target: &SampledWaveform) -> Result<FitReport> {
    let n = target.len() as f64;
    let mean = target.values().iter().sum::<f64>() / n;
    let ss_tot: f64 = target.values().iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let ss_res: f64 = residuals(model, target).iter().map(|r| r * r).sum();
    Ok(FitReport {
        r_squared: (1.0 - ss_res / ss_tot).clamp(0.0, 1.0),
        rmse: (ss_res / n).sqrt(),
        iterations: 0,
        converged: false,
        final_lambda: 0.0,
        cost_trace: Vec::new(),
    })
}

/// Fits `terms` sines to `target`, starting from `init` or, when absent,
/// from [`initialize_from_spectrum`]. The returned model is canonical.
pub fn lm_fit(
    target: &SampledWaveform,
    terms: usize,
    init: Option<&SumOfSines>,
    options: &LmOptions,
) -> Result<(SumOfSines, FitReport)> {
    if terms == 0 || terms > MAX_TERMS {
        return Err(Error::BadInput(format!("term count must be 1..={MAX_TERMS}, got {terms}")));
    }
    if target.len() < 3 * terms + 1 {
        return Err(Error::Underdetermined { samples: target.len(), params: 3 * terms });
    }
    if target.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::BadInput("target contains non-finite samples".into()));
    }
    let start = match init {
        Some(m) if m.len() != terms => {
            return Err(Error::BadInput(format!(
                "initial model has {} terms, expected {terms}",
                m.len()
            )))
        }
        Some(m) => m.clone(),
        None => initialize_from_spectrum(target, terms)?,
    };
    let support = start.support();

    let mut params = start.to_params();
    let mut model = start;
    let mut r = DVector::from_vec(residuals(&model, target));
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = options.initial_lambda;
    let mut trace = vec![cost];
    let mut converged = false;
    let mut iterations = 0;

    // Normal equations are rebuilt only after an accepted step.
    let mut jtj = DMatrix::zeros(0, 0);
    let mut grad = DVector::zeros(0);
    let mut stale = true;

    while iterations < options.max_iters {
        if stale {
            let jac = jacobian(&model, target);
            jtj = jac.tr_mul(&jac);
            grad = jac.tr_mul(&r);
            stale = false;
        }
        if grad.amax() < options.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let max_diag = jtj.diagonal().max();
        let mut damped = jtj.clone();
        for i in 0..damped.nrows() {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12 * max_diag).max(f64::MIN_POSITIVE);
        }
        let step = damped.cholesky().map(|ch| ch.solve(&(-&grad)));
        let Some(step) = step else {
            lambda *= options.lambda_factor;
            if lambda > options.max_lambda {
                break;
            }
            continue;
        };

        let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, d)| p + d).collect();
        let trial_model = SumOfSines::from_params(&trial, support);
        let accepted = trial_model.ok().and_then(|m| {
            let r_new = DVector::from_vec(residuals(&m, target));
            let c_new = 0.5 * r_new.norm_squared();
            (c_new.is_finite() && c_new < cost).then_some((m, r_new, c_new))
        });

        match accepted {
            Some((m, r_new, c_new)) => {
                let rel_decrease = (cost - c_new) / cost;
                params = trial;
                model = m;
                r = r_new;
                cost = c_new;
                trace.push(cost);
                lambda /= options.lambda_factor;
                stale = true;
                if rel_decrease < options.cost_tolerance {
                    converged = true;
                    break;
                }
            }
            None => {
                lambda *= options.lambda_factor;
                if lambda > options.max_lambda {
                    break;
                }
            }
        }
    }

    let fitted = model.canonicalize();
    let quality = goodness(&fitted, target)?;
    let report = FitReport {
        iterations,
        converged,
        final_lambda: lambda,
        cost_trace: trace,
        ..quality
    };
    Ok((fitted, report))
}
