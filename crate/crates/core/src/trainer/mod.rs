//! Fitting regression weights by Nelder-Mead over the phase cosines.
//!
//! The optimizer works on the cosines `c_m = cos(phi_m)` directly. By default
//! `c_0` is pinned to -1, so the free variables are the weights themselves
//! (`W_m = -c_m / c_0 = c_m`). Cosines outside `[-1, 1]` are allowed during
//! the search: the circuit backends divide every cosine by the common factor
//! `s = max(1, max |c_m|)`, run the circuit at `acos(c_m / s)`, and multiply
//! the measured cost by `s^2`. The cost is quadratic in the cosines, so this
//! reproduces the analytic cost exactly while keeping the weights intact.
//!
//! With `c_0` free, the raw cost would shrink to zero along with all the
//! cosines, so the objective divides it by `c_0^2`; this is the cost in units
//! where the response cosine has magnitude one.

mod ensemble;
mod sin_demo;

pub use ensemble::{fit_ensemble, EnsembleOptions, EnsembleResult, StandardErrorMode};
pub use sin_demo::{fit_nonlinear_sin_demo, SinDemoConfig, SinDemoResult};

use serde::{Deserialize, Serialize};

use crate::data::StandardizedTable;
use crate::encoding::{prepare_exact, PreparedState, Scheme};
use crate::error::{Error, Result};
use crate::measurement::{
    exact_expectation, metrics_from_null_cost, shot_estimate_compact, shot_estimate_one_hot,
};
use crate::optim::{nelder_mead, NelderMeadConfig};
use crate::regression::{
    apply_regression_map, cost_from_cosines, cosines_to_weights, regression_pre_projection,
    PhaseVector, MIN_RESPONSE_COSINE,
};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegularizationParams {
    pub alpha_l1: f64,
    pub beta_l2: f64,
}

impl RegularizationParams {
    pub fn penalty(&self, weights: &[f64]) -> f64 {
        let l1: f64 = weights.iter().map(|w| w.abs()).sum();
        let l2: f64 = weights.iter().map(|w| w * w).sum();
        self.alpha_l1 * l1 + self.beta_l2 * l2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CostBackend {
    /// Closed-form row-sum cost.
    Analytic,
    /// Simulated circuit with exact expectation of the cost operator.
    CircuitExact { scheme: Scheme },
    /// Simulated circuit read out with a finite-shot estimator.
    Shots {
        scheme: Scheme,
        shots: u64,
        readout_delta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub backend: CostBackend,
    pub max_restarts: usize,
    pub nm_tolerance_f: f64,
    pub nm_tolerance_x: f64,
    pub max_iterations_per_restart: usize,
    /// Simplex scale of the first restart; halved on every later restart.
    pub initial_scale: f64,
    pub fix_c0_to_minus_one: bool,
    /// Starting weights; zeros when absent.
    pub initial_weights: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            backend: CostBackend::Analytic,
            max_restarts: 20,
            nm_tolerance_f: 1e-16,
            nm_tolerance_x: 1e-10,
            max_iterations_per_restart: 20_000,
            initial_scale: 0.5,
            fix_c0_to_minus_one: true,
            initial_weights: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub weights: Vec<f64>,
    /// Phases actually applied in the circuit, `acos(c_m / s)`.
    pub phases: PhaseVector,
    /// Optimizer variables `c_m` before rescaling.
    pub cosines: Vec<f64>,
    /// Common rescaling factor `s` used to reach the phases.
    pub phase_scale: f64,
    /// Backend cost with the response cosine normalized to magnitude one,
    /// `C(phases) * s^2 / c_0^2`.
    pub cost: f64,
    /// Cost plus the elastic-net penalty.
    pub objective: f64,
    pub r_squared: f64,
    pub restarts_used: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Scales cosines into `[-1, 1]` by their common largest magnitude.
pub fn rescale_cosines(cosines: &[f64]) -> (Vec<f64>, f64) {
    let s = cosines.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    (cosines.iter().map(|c| (c / s).clamp(-1.0, 1.0)).collect(), s)
}

/// Evaluates the cost at arbitrary real cosines through a chosen backend.
pub struct CostEvaluator<'a> {
    std: &'a StandardizedTable,
    backend: CostBackend,
    prepared: Option<PreparedState>,
    seed: u64,
    calls: u64,
}

impl<'a> CostEvaluator<'a> {
    pub fn new(std: &'a StandardizedTable, backend: CostBackend, seed: u64) -> Result<Self> {
        let prepared = match backend {
            CostBackend::Analytic => None,
            CostBackend::CircuitExact { scheme } | CostBackend::Shots { scheme, .. } => {
                Some(prepare_exact(std, scheme)?)
            }
        };
        Ok(Self {
            std,
            backend,
            prepared,
            seed,
            calls: 0,
        })
    }

    /// Cost at `cosines`. Shot backends draw a fresh derived seed per call.
    pub fn cost(&mut self, cosines: &[f64]) -> Result<f64> {
        let prep = match (&self.backend, &self.prepared) {
            (CostBackend::Analytic, _) | (_, None) => return Ok(cost_from_cosines(self.std, cosines)),
            (_, Some(p)) => p,
        };
        let (unit, s) = rescale_cosines(cosines);
        let phases = PhaseVector::from_cosines(&unit)?;
        let value = match self.backend {
            CostBackend::Shots {
                shots,
                readout_delta,
                ..
            } => {
                let pre = regression_pre_projection(prep, &phases)?;
                let seed = derive_seed(self.seed, self.calls);
                self.calls += 1;
                let est = if prep.layout.is_one_hot() {
                    shot_estimate_one_hot(&pre, &prep.layout, shots, readout_delta, seed)?
                } else {
                    shot_estimate_compact(&pre, &prep.layout, shots, readout_delta, seed)?
                };
                est.value
            }
            _ => {
                let (psi0, _) = apply_regression_map(prep, &phases)?;
                exact_expectation(&psi0, &prep.layout)?
            }
        };
        Ok(value * s * s)
    }
}

fn to_cosines_fixed(weights: &[f64]) -> Vec<f64> {
    std::iter::once(-1.0).chain(weights.iter().copied()).collect()
}

/// Minimizes backend cost plus `alpha sum |W| + beta sum W^2` with warm
/// restarts. Each restart starts a fresh simplex at the previous optimum with
/// half the previous scale; the loop ends once two consecutive restart optima
/// differ by less than `nm_tolerance_f`.
pub fn fit(std: &StandardizedTable, reg: &RegularizationParams, config: &TrainConfig) -> Result<FitResult> {
    let m = std.features();
    if config.nm_tolerance_f <= 0.0 || config.nm_tolerance_x <= 0.0 {
        return Err(Error::InvalidArgument("optimizer tolerances must be positive".into()));
    }
    if config.max_restarts == 0 {
        return Err(Error::InvalidArgument("need at least one optimizer restart".into()));
    }
    let w0 = match &config.initial_weights {
        Some(w) if w.len() != m => {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: w.len(),
            })
        }
        Some(w) => w.clone(),
        None => vec![0.0; m],
    };
    let fixed = config.fix_c0_to_minus_one;
    let to_cosines = |x: &[f64]| -> Vec<f64> {
        if fixed {
            to_cosines_fixed(x)
        } else {
            x.to_vec()
        }
    };
    let mut x = if fixed { w0 } else { to_cosines_fixed(&w0) };

    let mut evaluator = CostEvaluator::new(std, config.backend, config.seed)?;
    let failure = std::cell::RefCell::new(None);
    let mut objective = |x: &[f64]| -> f64 {
        let c = to_cosines(x);
        if c[0].abs() <= MIN_RESPONSE_COSINE {
            return f64::INFINITY;
        }
        let weights: Vec<f64> = c[1..].iter().map(|v| -v / c[0]).collect();
        match evaluator.cost(&c) {
            Ok(cost) => cost / (c[0] * c[0]) + reg.penalty(&weights),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };

    let mut scale = config.initial_scale;
    let mut previous: Option<f64> = None;
    let mut converged = false;
    let mut restarts_used = 0;
    let mut iterations = 0;
    let mut best_value = f64::INFINITY;
    for _ in 0..config.max_restarts {
        let nm = NelderMeadConfig {
            tolerance_f: config.nm_tolerance_f,
            tolerance_x: config.nm_tolerance_x,
            max_iterations: config.max_iterations_per_restart,
            initial_scale: scale,
        };
        let result = nelder_mead(&mut objective, &x, &nm);
        let result = match (result, failure.borrow_mut().take()) {
            (_, Some(e)) => return Err(e),
            (r, None) => r?,
        };
        restarts_used += 1;
        iterations += result.iterations;
        if result.value <= best_value {
            best_value = result.value;
            x = result.point;
        }
        if let Some(prev) = previous {
            if (prev - result.value).abs() < config.nm_tolerance_f {
                converged = true;
                break;
            }
        }
        previous = Some(result.value);
        scale *= 0.5;
    }

    let cosines = to_cosines(&x);
    if cosines[0].abs() <= MIN_RESPONSE_COSINE {
        return Err(Error::DegeneratePhase(cosines[0].abs()));
    }
    let weights = cosines_to_weights(&cosines)?.weights;
    let (unit, phase_scale) = rescale_cosines(&cosines);
    let cost = evaluator.cost(&cosines)? / (cosines[0] * cosines[0]);
    Ok(FitResult {
        phases: PhaseVector::from_cosines(&unit)?,
        objective: cost + reg.penalty(&weights),
        r_squared: metrics_from_null_cost(cost, std.c0).r2,
        weights,
        cosines,
        phase_scale,
        cost,
        restarts_used,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{standardize, RawTable};
    use crate::rng::Stream;

    fn noisy_table(seed: u64) -> StandardizedTable {
        sized_table(12, seed)
    }

    fn sized_table(rows: usize, seed: u64) -> StandardizedTable {
        let mut rng = Stream::new(seed);
        let features = 2;
        let mut v = Vec::new();
        for _ in 0..rows {
            let x1 = rng.uniform_in(-1.0, 1.0);
            let x2 = rng.uniform_in(-1.0, 1.0);
            v.extend([0.7 * x1 - 0.4 * x2 + 0.2 * rng.standard_normal(), x1, x2]);
        }
        standardize(&RawTable::new(rows, features, v).unwrap(), true).unwrap()
    }

    #[test]
    fn rescale_keeps_ratios() {
        let (u, s) = rescale_cosines(&[-1.0, 2.5, 0.5]);
        assert_eq!(s, 2.5);
        assert_eq!(u, vec![-0.4, 1.0, 0.2]);
        let (u, s) = rescale_cosines(&[-1.0, 0.3]);
        assert_eq!((u, s), (vec![-1.0, 0.3], 1.0));
    }

    #[test]
    fn circuit_backend_matches_analytic_outside_unit_interval() {
        let std = sized_table(4, 3);
        let c = [-1.0, 1.7, -0.2];
        let analytic = cost_from_cosines(&std, &c);
        for scheme in [Scheme::OneHot, Scheme::CompactBinary] {
            let mut ev = CostEvaluator::new(&std, CostBackend::CircuitExact { scheme }, 0).unwrap();
            assert!((ev.cost(&c).unwrap() - analytic).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_reports_consistent_fields() {
        let std = noisy_table(5);
        let r = fit(&std, &RegularizationParams::default(), &TrainConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.cosines[0], -1.0);
        assert_eq!(r.weights, r.cosines[1..].to_vec());
        assert!((r.cost - cost_from_cosines(&std, &r.cosines)).abs() < 1e-15);
        assert!((r.r_squared - (1.0 - r.cost / std.c0)).abs() < 1e-15);
        let w = crate::regression::phases_to_weights(&r.phases).unwrap().weights;
        for (a, b) in w.iter().zip(&r.weights) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn free_response_cosine_gives_same_weights() {
        let std = noisy_table(8);
        let fixed = fit(&std, &RegularizationParams::default(), &TrainConfig::default()).unwrap();
        let free = fit(
            &std,
            &RegularizationParams::default(),
            &TrainConfig {
                fix_c0_to_minus_one: false,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        for (a, b) in fixed.weights.iter().zip(&free.weights) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn bad_config_rejected() {
        let std = noisy_table(1);
        let cfg = TrainConfig {
            initial_weights: Some(vec![0.0]),
            ..TrainConfig::default()
        };
        assert!(matches!(
            fit(&std, &RegularizationParams::default(), &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
