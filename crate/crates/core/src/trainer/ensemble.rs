//! Bootstrap ensembles of independent fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit, RegularizationParams, TrainConfig};
use crate::data::{batch_indices, standardize, BootstrapPlan, RawTable};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StandardErrorMode {
    /// Standard deviation of the per-batch weights.
    BatchSpread,
    /// Standard deviation divided by the square root of the batch count.
    MeanError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub equalize_columns: bool,
    pub standard_error: StandardErrorMode,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            equalize_columns: true,
            standard_error: StandardErrorMode::BatchSpread,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    /// Mean weights in the units of the raw table.
    pub mean_weights: Vec<f64>,
    /// Absent when fewer than two batches succeeded.
    pub std_errors: Option<Vec<f64>>,
    /// `mean / std_error` where the standard error is positive.
    pub t_stats: Option<Vec<Option<f64>>>,
    pub per_batch_weights: Vec<Vec<f64>>,
    pub batch_size: usize,
    pub num_batches: usize,
    pub failed_batches: Vec<BatchFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub batch: usize,
    pub reason: String,
}

fn fit_batch(
    raw: &RawTable,
    plan: &BootstrapPlan,
    batch: usize,
    reg: &RegularizationParams,
    config: &TrainConfig,
    options: &EnsembleOptions,
) -> Result<Vec<f64>> {
    let table = raw.select_rows(&batch_indices(raw.rows(), plan, batch))?;
    let std = standardize(&table, options.equalize_columns)?;
    let cfg = TrainConfig {
        seed: derive_seed(config.seed, batch as u64),
        ..config.clone()
    };
    let result = fit(&std, reg, &cfg)?;
    Ok(std.to_original_weights(&result.weights))
}

/// Standardizes and fits every bootstrap batch independently (in parallel on
/// the current rayon pool) and aggregates the weights.
///
/// Batch `b` uses rows drawn from `derive_seed(plan.seed, b)` and trains with
/// seed `derive_seed(config.seed, b)`, so the outcome does not depend on
/// scheduling. Failed batches are listed and left out of the statistics.
pub fn fit_ensemble(
    raw: &RawTable,
    plan: &BootstrapPlan,
    reg: &RegularizationParams,
    config: &TrainConfig,
    options: &EnsembleOptions,
) -> Result<EnsembleResult> {
    if plan.num_batches == 0 || plan.batch_size == 0 {
        return Err(Error::InvalidArgument("bootstrap plan needs positive sizes".into()));
    }
    let outcomes: Vec<Result<Vec<f64>>> = (0..plan.num_batches)
        .into_par_iter()
        .map(|b| fit_batch(raw, plan, b, reg, config, options))
        .collect();

    let mut per_batch_weights = Vec::new();
    let mut failed_batches = Vec::new();
    for (batch, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(w) => per_batch_weights.push(w),
            Err(e) => failed_batches.push(BatchFailure {
                batch,
                reason: e.to_string(),
            }),
        }
    }
    if per_batch_weights.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "all {} bootstrap batches failed; first error: {}",
            plan.num_batches, failed_batches[0].reason
        )));
    }

    let m = raw.features();
    let n = per_batch_weights.len();
    let mut mean_weights = Vec::with_capacity(m);
    let mut spreads = Vec::with_capacity(m);
    for i in 0..m {
        // summing in sorted order makes the mean independent of batch order
        let mut column: Vec<f64> = per_batch_weights.iter().map(|w| w[i]).collect();
        column.sort_by(f64::total_cmp);
        let mean = column.iter().sum::<f64>() / n as f64;
        mean_weights.push(mean);
        if n > 1 {
            let mut dev: Vec<f64> = column.iter().map(|w| (w - mean).powi(2)).collect();
            dev.sort_by(f64::total_cmp);
            spreads.push((dev.iter().sum::<f64>() / (n - 1) as f64).sqrt());
        }
    }
    let std_errors = (n > 1).then(|| match options.standard_error {
        StandardErrorMode::BatchSpread => spreads,
        StandardErrorMode::MeanError => spreads.iter().map(|s| s / (n as f64).sqrt()).collect(),
    });
    let t_stats = std_errors.as_ref().map(|se| {
        mean_weights
            .iter()
            .zip(se)
            .map(|(w, s)| (*s > 0.0).then(|| w / s))
            .collect()
    });
    Ok(EnsembleResult {
        mean_weights,
        std_errors,
        t_stats,
        per_batch_weights,
        batch_size: plan.batch_size,
        num_batches: plan.num_batches,
        failed_batches,
    })
}
