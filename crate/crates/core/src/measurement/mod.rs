//! The cost operator and everything that estimates its expectation.
//!
//! In cell coordinates the cost operator is `I_L (x) J_{M+1}`: it sums the
//! amplitudes of each row and adds up the squared row sums. Because `J^2 =
//! (M+1) J`, its only eigenvalues are 0 and `M+1`.

mod shadow;
mod shots;

pub use shadow::{
    median_of_means, pauli_shadow_estimate, shadow_snapshot_variance, shadow_x_string_estimate,
    ShadowConfig,
};
pub use shots::{
    noisy_mean_compact, noisy_mean_one_hot, shot_estimate_compact, shot_estimate_one_hot,
    ONE_HOT_SETTINGS,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::StandardizedTable;
use crate::encoding::EncodingLayout;
use crate::error::{Error, Result};
use crate::regression::PhaseVector;
use crate::statevector::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    Exact,
    GroupedPauliShots,
    CompactXBasisShots,
    PauliShadows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub value: f64,
    pub estimator: EstimatorKind,
    pub shots: u64,
    pub std_error: f64,
    pub readout_delta: f64,
    pub seed: Option<u64>,
}

impl CostEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            estimator: EstimatorKind::Exact,
            shots: 0,
            std_error: 0.0,
            readout_delta: 0.0,
            seed: None,
        }
    }
}

/// `<psi0| M |psi0>` on an unnormalized state.
///
/// Accepts either the data register alone or the data register with the
/// ancilla on top, in which case only the ancilla-0 branch is read.
/// Amplitudes outside the layout's code space are ignored.
pub fn exact_expectation(psi0: &StateVector, layout: &EncodingLayout) -> Result<f64> {
    let n = layout.data_qubits();
    if psi0.num_qubits() != n && psi0.num_qubits() != n + 1 {
        return Err(Error::LayoutMismatch(format!(
            "state has {} qubits, layout needs {n} (or {} with ancilla)",
            psi0.num_qubits(),
            n + 1
        )));
    }
    let amps = psi0.amplitudes();
    Ok((0..layout.rows)
        .map(|l| {
            (0..layout.cols())
                .map(|m| amps[layout.code_index(l, m)])
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum())
}

/// Dense cost operator on the `L (M+1)` cell basis, row-major.
pub fn cost_operator_matrix(rows: usize, features: usize) -> Vec<f64> {
    let cols = features + 1;
    let n = rows * cols;
    let mut mat = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i / cols == j / cols {
                mat[i * n + j] = 1.0;
            }
        }
    }
    mat
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for j in 0..n {
                    out[i * n + j] += aik * b[k * n + j];
                }
            }
        }
    }
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The square of the cost operator next to two candidate closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub rows: usize,
    pub features: usize,
    pub dim: usize,
    pub operator: Vec<f64>,
    pub squared: Vec<f64>,
    /// `I + M * op`.
    pub identity_plus_m: Vec<f64>,
    /// `(M+1) * op`.
    pub m_plus_one_times: Vec<f64>,
    pub identity_plus_m_deviation: f64,
    pub m_plus_one_deviation: f64,
}

pub fn operator_identity_check(rows: usize, features: usize) -> Result<IdentityCheck> {
    let dim = rows * (features + 1);
    if dim == 0 || dim > 12 {
        return Err(Error::InvalidArgument(format!(
            "dense identity check limited to L(M+1) <= 12, got {dim}"
        )));
    }
    let op = cost_operator_matrix(rows, features);
    let squared = mat_mul(&op, &op, dim);
    let m = features as f64;
    let identity_plus_m: Vec<f64> = op
        .iter()
        .enumerate()
        .map(|(i, v)| if i / dim == i % dim { 1.0 } else { 0.0 } + m * v)
        .collect();
    let m_plus_one_times: Vec<f64> = op.iter().map(|v| (m + 1.0) * v).collect();
    Ok(IdentityCheck {
        rows,
        features,
        dim,
        identity_plus_m_deviation: max_abs_diff(&squared, &identity_plus_m),
        m_plus_one_deviation: max_abs_diff(&squared, &m_plus_one_times),
        operator: op,
        squared,
        identity_plus_m,
        m_plus_one_times,
    })
}

/// `lambda` in `op^2 = lambda * op`, read off one row block. Errors if the
/// block does not satisfy such an identity.
pub fn squared_operator_factor(features: usize) -> Result<f64> {
    let n = features + 1;
    let block = cost_operator_matrix(1, features);
    let sq = mat_mul(&block, &block, n);
    let lambda = sq[0] / block[0];
    if block.iter().zip(&sq).any(|(b, s)| (s - lambda * b).abs() > 1e-12 * lambda) {
        return Err(Error::InvalidArgument("operator square is not a multiple".into()));
    }
    Ok(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub c: f64,
    pub c0: f64,
    pub r2: f64,
}

/// `C0 = cos^2(phi_0) / (1 + F)` and `R^2 = 1 - C / C0`.
pub fn model_metrics(c: f64, std: &StandardizedTable, phases: &PhaseVector) -> ModelMetrics {
    metrics_from_null_cost(c, phases.phis[0].cos().powi(2) * std.c0)
}

pub fn metrics_from_null_cost(c: f64, c0: f64) -> ModelMetrics {
    ModelMetrics {
        c,
        c0,
        r2: 1.0 - c / c0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceFormula {
    /// `1 + M C - C^2`, built on `op^2 = I + M op`.
    IdentityPlusScaled,
    /// `lambda C - C^2` with `op^2 = lambda op` checked numerically.
    OperatorDerived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotBudget {
    pub formula: VarianceFormula,
    pub epsilon: f64,
    pub alpha_conf: f64,
    pub variance: f64,
    /// `2 sigma^2 ln(1/alpha) / epsilon^2` before rounding up.
    pub unrounded: f64,
    pub required_shots: u64,
}

/// Bernstein-style shot count `ceil(2 sigma^2 ln(1/alpha) / epsilon^2)`.
///
/// For the operator-derived variance the per-shot variable is the ancilla-0
/// projector times the cost operator measured on the full pre-projection
/// state. Its second moment is `lambda C` with no extra normalization term,
/// so the correction to `lambda C - C^2` is zero.
pub fn required_shots(
    c: f64,
    features: usize,
    epsilon: f64,
    alpha_conf: f64,
    formula: VarianceFormula,
) -> Result<ShotBudget> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if !(alpha_conf > 0.0 && alpha_conf < 1.0) {
        return Err(Error::InvalidArgument("confidence level must lie in (0, 1)".into()));
    }
    let variance = match formula {
        VarianceFormula::IdentityPlusScaled => 1.0 + features as f64 * c - c * c,
        VarianceFormula::OperatorDerived => squared_operator_factor(features)? * c - c * c,
    }
    .max(0.0);
    let unrounded = 2.0 * variance * (1.0 / alpha_conf).ln() / (epsilon * epsilon);
    Ok(ShotBudget {
        formula,
        epsilon,
        alpha_conf,
        variance,
        unrounded,
        required_shots: unrounded.ceil() as u64,
    })
}

/// Both budgets, identity-plus-scaled form first.
pub fn shot_budgets(c: f64, features: usize, epsilon: f64, alpha_conf: f64) -> Result<[ShotBudget; 2]> {
    Ok([
        required_shots(c, features, epsilon, alpha_conf, VarianceFormula::IdentityPlusScaled)?,
        required_shots(c, features, epsilon, alpha_conf, VarianceFormula::OperatorDerived)?,
    ])
}
