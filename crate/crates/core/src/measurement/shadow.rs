//! Random single-qubit Pauli classical shadows for the compact cost.
//!
//! Each snapshot measures every qubit in a uniformly random X, Y or Z basis.
//! Inverting the measurement channel qubit by qubit turns an outcome `s = +-1`
//! in the X basis into the unbiased estimate `3 s` of `<X>` (and 0 when the
//! qubit was measured in another basis). The compact cost operator is
//! `I_rows (x) prod_{q in columns} (I + X_q)`, so one snapshot estimates it as
//! `prod_{q in columns} (1 + 3 [basis_q = X] s_q)`, which is the sum of the
//! `2^N_M` Pauli X-string estimates.

use serde::{Deserialize, Serialize};

use crate::encoding::EncodingLayout;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::statevector::{QubitIndex, Sampler, StateVector};

use super::{CostEstimate, EstimatorKind};

const MAX_SHADOW_QUBITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowConfig {
    pub snapshots: usize,
    /// Number of column qubits the observable acts on non-trivially.
    pub locality: usize,
    /// Median-of-means group count.
    pub groups: usize,
    pub seed: u64,
}

impl ShadowConfig {
    /// Groups default to `ceil(2 ln(1/0.05)) = 6`.
    pub fn new(snapshots: usize, locality: usize, seed: u64) -> Self {
        Self {
            snapshots,
            locality,
            groups: groups_for_confidence(0.05),
            seed,
        }
    }

    /// Snapshot count `ceil(c ln(2^k) 4^k / epsilon^2)` for locality `k`,
    /// never fewer than the group count.
    pub fn for_accuracy(locality: usize, epsilon: f64, constant: f64, seed: u64) -> Self {
        let k = locality as f64;
        let n = (constant * k * std::f64::consts::LN_2 * 4f64.powf(k) / (epsilon * epsilon)).ceil();
        let mut config = Self::new(n as usize, locality, seed);
        config.snapshots = config.snapshots.max(config.groups);
        config
    }

    pub fn shadow_norm_bound(&self) -> f64 {
        4f64.powi(self.locality as i32)
    }
}

/// `ceil(2 ln(1/alpha))`, at least 1.
pub fn groups_for_confidence(alpha: f64) -> usize {
    ((2.0 * (1.0 / alpha).ln()).ceil() as usize).max(1)
}

/// Median of the means of `groups` contiguous chunks whose sizes differ by
/// at most one.
pub fn median_of_means(values: &[f64], groups: usize) -> Result<f64> {
    if groups == 0 || values.len() < groups {
        return Err(Error::TooFewSnapshots {
            snapshots: values.len(),
            groups,
        });
    }
    let (base, extra) = (values.len() / groups, values.len() % groups);
    let mut start = 0;
    let mut means: Vec<f64> = (0..groups)
        .map(|g| {
            let len = base + usize::from(g < extra);
            let chunk = &values[start..start + len];
            start += len;
            chunk.iter().sum::<f64>() / len as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let mid = groups / 2;
    Ok(if groups % 2 == 1 {
        means[mid]
    } else {
        0.5 * (means[mid - 1] + means[mid])
    })
}

/// Basis code per qubit: 0 = X, 1 = Y, 2 = Z.
fn basis_digit(setting: usize, q: usize) -> usize {
    setting / 3usize.pow(q as u32) % 3
}

fn rotated_distribution(state: &StateVector, setting: usize) -> Result<Vec<f64>> {
    let mut s = state.clone();
    for q in 0..state.num_qubits() {
        match basis_digit(setting, q) {
            0 => s.apply_hadamard(QubitIndex(q))?,
            1 => {
                s.apply_s_dagger(QubitIndex(q))?;
                s.apply_hadamard(QubitIndex(q))?;
            }
            _ => {}
        }
    }
    Ok(s.probabilities())
}

fn snapshot_value(setting: usize, outcome: usize, x_qubits: &[QubitIndex]) -> f64 {
    x_qubits
        .iter()
        .map(|q| {
            if basis_digit(setting, q.0) == 0 {
                let s = if outcome & q.mask() == 0 { 1.0 } else { -1.0 };
                1.0 + 3.0 * s
            } else {
                1.0
            }
        })
        .product()
}

fn check_shadow_state(state: &StateVector) -> Result<()> {
    if state.num_qubits() > MAX_SHADOW_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "shadow simulation limited to {MAX_SHADOW_QUBITS} qubits"
        )));
    }
    if (state.computed_norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("shadow input must be normalized".into()));
    }
    Ok(())
}

/// Shadow estimate of `<prod_{q in x_qubits} (I + X_q)>` on a normalized
/// state. Returns the median-of-means value and the plain standard error of
/// the snapshot mean. An empty qubit list is the identity and gives exactly 1.
pub fn shadow_x_string_estimate(
    state: &StateVector,
    x_qubits: &[QubitIndex],
    config: &ShadowConfig,
) -> Result<(f64, f64)> {
    check_shadow_state(state)?;
    if config.snapshots < config.groups || config.groups == 0 {
        return Err(Error::TooFewSnapshots {
            snapshots: config.snapshots,
            groups: config.groups,
        });
    }
    let n = state.num_qubits();
    let settings = 3usize.pow(n as u32);
    let mut samplers: Vec<Option<Sampler>> = vec![None; settings];
    let mut rng = Stream::new(config.seed);
    let mut values = Vec::with_capacity(config.snapshots);
    for _ in 0..config.snapshots {
        let mut setting = 0;
        let mut place = 1;
        for _ in 0..n {
            setting += rng.index_below(3) * place;
            place *= 3;
        }
        let sampler = match &mut samplers[setting] {
            Some(s) => s,
            slot => slot.insert(Sampler::from_weights(&rotated_distribution(state, setting)?)?),
        };
        let outcome = sampler.draw(&mut rng);
        values.push(snapshot_value(setting, outcome, x_qubits));
    }
    let estimate = median_of_means(&values, config.groups)?;
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0).max(1.0);
    Ok((estimate, (var / len).sqrt()))
}

/// Exact single-snapshot variance of the estimator above, averaging over all
/// `3^n` basis choices and their outcome distributions.
pub fn shadow_snapshot_variance(state: &StateVector, x_qubits: &[QubitIndex]) -> Result<f64> {
    check_shadow_state(state)?;
    let settings = 3usize.pow(state.num_qubits() as u32);
    let (mut first, mut second) = (0.0, 0.0);
    for setting in 0..settings {
        for (b, p) in rotated_distribution(state, setting)?.into_iter().enumerate() {
            let v = snapshot_value(setting, b, x_qubits);
            first += p * v;
            second += p * v * v;
        }
    }
    let (first, second) = (first / settings as f64, second / settings as f64);
    Ok(second - first * first)
}

/// Shadow estimate of the compact cost on the unnormalized post-selected
/// data state: the state is normalized for the protocol and the result is
/// rescaled by its squared norm.
pub fn pauli_shadow_estimate(
    psi0: &StateVector,
    layout: &EncodingLayout,
    config: &ShadowConfig,
) -> Result<CostEstimate> {
    if layout.is_one_hot() || psi0.num_qubits() != layout.data_qubits() {
        return Err(Error::LayoutMismatch(
            "shadow estimation needs the compact data register".into(),
        ));
    }
    let norm_sqr = psi0.computed_norm_sqr();
    if norm_sqr == 0.0 {
        return Ok(CostEstimate {
            value: 0.0,
            estimator: EstimatorKind::PauliShadows,
            shots: config.snapshots as u64,
            std_error: 0.0,
            readout_delta: 0.0,
            seed: Some(config.seed),
        });
    }
    let state = psi0.normalized()?;
    let cols: Vec<QubitIndex> = layout.column_qubits().collect();
    let (value, se) = shadow_x_string_estimate(&state, &cols, config)?;
    Ok(CostEstimate {
        value: value * norm_sqr,
        estimator: EstimatorKind::PauliShadows,
        shots: config.snapshots as u64,
        std_error: se * norm_sqr,
        readout_delta: 0.0,
        seed: Some(config.seed),
    })
}
