//! Closed-form qubit, gate and shot-cost accounting for both encoders.
//!
//! Asymptotic classes are instantiated with constant factor 1. Each estimate
//! carries the formulas it used so callers can rescale the constants.

use serde::{Deserialize, Serialize};

use crate::encoding::ceil_log2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResourceScheme {
    OneHot,
    /// Binary keys plus an `N_P`-bit quantum memory register per cell.
    CompactWithMemory,
    /// Binary keys with the digitized angles supplied as classical controls.
    CompactMemoryFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateModel {
    /// One- and two-qubit gates only.
    LocalDigital,
    /// Globally addressed entangling gates act on a whole feature at once.
    GlobalAnalog,
    /// Global gates plus compiler-optimized compact state preparation.
    CompiledOptimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub scheme: ResourceScheme,
    pub gate_model: GateModel,
    pub rows: usize,
    pub features: usize,
    pub bits: usize,
    pub qubit_count: u64,
    pub state_prep_gates: u64,
    pub regression_map_gates: u64,
    pub total_gates: u64,
    /// `total_gates * qubit_count`.
    pub shot_cost: u64,
    /// Formula used for each count, in the order qubits, prep, map.
    pub formulas: Vec<String>,
}

fn product(factors: &[u64]) -> Result<u64> {
    factors
        .iter()
        .try_fold(1u64, |acc, f| acc.checked_mul(*f))
        .ok_or_else(|| Error::InvalidArgument("resource count overflows u64".into()))
}

/// Counts for an `rows x features` table (plus response column) at `bits`
/// digitization bits. `bits` only matters for the memory register.
pub fn estimate(
    rows: usize,
    features: usize,
    bits: usize,
    scheme: ResourceScheme,
    gate_model: GateModel,
) -> Result<ResourceEstimate> {
    if rows == 0 || features == 0 || bits == 0 {
        return Err(Error::InvalidArgument(
            "rows, features and bits must be positive".into(),
        ));
    }
    let (l, m, p) = (rows as u64, features as u64, bits as u64);
    let cols = m + 1;
    let n_m = ceil_log2(features + 1) as u64;
    let n_k = ceil_log2(rows) as u64 + n_m;
    let keys = 1u64 << n_k;
    let global = gate_model != GateModel::LocalDigital;

    let (qubits, prep, map, formulas) = match scheme {
        ResourceScheme::OneHot => {
            let cells = product(&[l, cols])?;
            let (map, map_formula) = if global {
                (cols, "map = M+1 (one global phase per column)")
            } else {
                (cells, "map = L(M+1) (one two-qubit phase per cell)")
            };
            (
                cells + 1,
                cells,
                map,
                vec![
                    "qubits = L(M+1) + 1 ancilla",
                    "prep = L(M+1) chain gadgets",
                    map_formula,
                ],
            )
        }
        ResourceScheme::CompactWithMemory | ResourceScheme::CompactMemoryFree => {
            let with_memory = scheme == ResourceScheme::CompactWithMemory;
            let mut qubits = n_k + 1;
            if with_memory {
                qubits += product(&[l, cols, p])?;
            }
            let (prep, prep_formula) = match (with_memory, gate_model) {
                (true, GateModel::LocalDigital) => (
                    product(&[l, m, p, n_k, keys])?,
                    "prep = L M N_P N_K 2^N_K (locally decomposed keyed rotations)",
                ),
                (true, GateModel::GlobalAnalog) => {
                    (product(&[l, m, p, keys])?, "prep = L M N_P 2^N_K")
                }
                (true, GateModel::CompiledOptimized) => (product(&[l, m, p])?, "prep = L M N_P"),
                (false, GateModel::CompiledOptimized) => (product(&[l, m])?, "prep = L M"),
                (false, _) => (product(&[l, m, keys])?, "prep = L M 2^N_K"),
            };
            let (map, map_formula) = if global {
                (cols, "map = M+1 (one global phase per column)")
            } else {
                (
                    product(&[1 << n_m, cols])?,
                    "map = 2^N_M (M+1) (one keyed phase per column code)",
                )
            };
            let qubit_formula = if with_memory {
                "qubits = N_L + N_M + 1 ancilla + L(M+1) N_P memory"
            } else {
                "qubits = N_L + N_M + 1 ancilla"
            };
            (qubits, prep, map, vec![qubit_formula, prep_formula, map_formula])
        }
    };
    let total = prep
        .checked_add(map)
        .ok_or_else(|| Error::InvalidArgument("resource count overflows u64".into()))?;
    Ok(ResourceEstimate {
        scheme,
        gate_model,
        rows,
        features,
        bits,
        qubit_count: qubits,
        state_prep_gates: prep,
        regression_map_gates: map,
        total_gates: total,
        shot_cost: product(&[total, qubits])?,
        formulas: formulas.into_iter().map(String::from).collect(),
    })
}

/// Classical reference cost `L^2 M^3`, memory and arithmetic lumped together.
pub fn classical_reference_cost(rows: usize, features: usize) -> Result<u64> {
    let (l, m) = (rows as u64, features as u64);
    product(&[l, l, m, m, m])
}

/// Shot-cost ratio of the memory-free compact encoder over one-hot.
pub fn shot_cost_ratio(rows: usize, features: usize, gate_model: GateModel) -> Result<f64> {
    let compact = estimate(rows, features, 1, ResourceScheme::CompactMemoryFree, gate_model)?;
    let one_hot = estimate(rows, features, 1, ResourceScheme::OneHot, gate_model)?;
    Ok(compact.shot_cost as f64 / one_hot.shot_cost as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub intercept: f64,
    pub slope: f64,
    /// Largest `|y - fit| / |y|` over the inputs.
    pub max_relative_residual: f64,
}

/// Least-squares fit of `y = intercept + slope * log2(x)`.
pub fn fit_log2(xs: &[f64], ys: &[f64]) -> Result<LogFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("log fit needs two or more paired points".into()));
    }
    if xs.iter().any(|x| *x <= 0.0) {
        return Err(Error::InvalidArgument("log fit needs positive abscissae".into()));
    }
    let n = xs.len() as f64;
    let u: Vec<f64> = xs.iter().map(|x| x.log2()).collect();
    let (mu, my) = (u.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = u.iter().map(|a| (a - mu).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("log fit needs distinct abscissae".into()));
    }
    let sxy: f64 = u.iter().zip(ys).map(|(a, b)| (a - mu) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mu;
    let max_relative_residual = u
        .iter()
        .zip(ys)
        .map(|(a, y)| ((y - intercept - slope * a) / y).abs())
        .fold(0.0, f64::max);
    Ok(LogFit {
        intercept,
        slope,
        max_relative_residual,
    })
}
