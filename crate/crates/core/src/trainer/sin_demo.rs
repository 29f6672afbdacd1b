//! Fitting `sin(x)` with a polynomial basis and a small L1 penalty.

use serde::{Deserialize, Serialize};

use super::{fit, FitResult, RegularizationParams, TrainConfig};
use crate::data::{build_power_features, standardize, RawTable};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinDemoConfig {
    pub rows: usize,
    pub max_power: usize,
    pub alpha_l1: f64,
    /// Magnitude of the starting weights on odd powers; their signs
    /// alternate `+, -, +, ...` starting at `x^1`. Even powers start at 0.
    pub initial_magnitude: f64,
    pub grid_points: usize,
    pub seed: u64,
    pub train: TrainConfig,
}

impl Default for SinDemoConfig {
    fn default() -> Self {
        Self {
            rows: 32,
            max_power: 15,
            alpha_l1: 1.2e-7,
            initial_magnitude: 0.1,
            grid_points: 201,
            seed: 2024,
            // Fifteen coupled power columns need a looser stop than the
            // default or the restarts never settle on consecutive optima.
            train: TrainConfig {
                nm_tolerance_f: 1e-13,
                max_restarts: 40,
                ..TrainConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinDemoResult {
    pub fit: FitResult,
    /// Polynomial coefficients of `x^1 .. x^max_power` in raw units.
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// `(x, prediction, sin x)` over an even grid on `[-1, 1]`.
    pub curve: Vec<[f64; 3]>,
    pub max_abs_error: f64,
}

impl SinDemoResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept
            + self
                .weights
                .iter()
                .enumerate()
                .map(|(p, w)| w * x.powi(p as i32 + 1))
                .sum::<f64>()
    }
}

/// Alternating-sign start: `+a` on `x^1`, `-a` on `x^3`, `+a` on `x^5`, ...
pub fn alternating_odd_ansatz(max_power: usize, magnitude: f64) -> Vec<f64> {
    (1..=max_power)
        .map(|p| match p % 4 {
            1 => magnitude,
            3 => -magnitude,
            _ => 0.0,
        })
        .collect()
}

/// Draws `x ~ U[-1, 1)`, fits `sin x` on the powers `x .. x^max_power`
/// (columns equalized), and maps the weights back to polynomial coefficients.
pub fn fit_nonlinear_sin_demo(config: &SinDemoConfig) -> Result<SinDemoResult> {
    if config.grid_points < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points".into()));
    }
    let mut rng = Stream::new(config.seed);
    let x: Vec<f64> = (0..config.rows).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
    let raw = RawTable::from_columns(&y, &build_power_features(&x, config.max_power)?)?;
    let std = standardize(&raw, true)?;

    // The ansatz is given in raw polynomial units; move it to standardized ones.
    let ansatz = alternating_odd_ansatz(config.max_power, config.initial_magnitude);
    let initial: Vec<f64> = ansatz
        .iter()
        .enumerate()
        .map(|(i, w)| w * std.column_scales[i + 1] / std.column_scales[0])
        .collect();
    let train = TrainConfig {
        initial_weights: Some(initial),
        ..config.train.clone()
    };
    let reg = RegularizationParams {
        alpha_l1: config.alpha_l1,
        beta_l2: 0.0,
    };
    let fit = fit(&std, &reg, &train)?;
    let weights = std.to_original_weights(&fit.weights);
    let intercept = std.column_means[0]
        - weights
            .iter()
            .zip(&std.column_means[1..])
            .map(|(w, mean)| w * mean)
            .sum::<f64>();

    let mut result = SinDemoResult {
        fit,
        weights,
        intercept,
        curve: Vec::new(),
        max_abs_error: 0.0,
    };
    let n = config.grid_points;
    result.curve = (0..n)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            [x, result.predict(x), x.sin()]
        })
        .collect();
    result.max_abs_error = result
        .curve
        .iter()
        .map(|[_, p, s]| (p - s).abs())
        .fold(0.0, f64::max);
    Ok(result)
}
