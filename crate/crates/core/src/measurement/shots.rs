//! Finite-shot estimators of the cost with symmetric readout bit flips.
//!
//! Each estimator is a list of measurement settings. A setting fixes the
//! basis change applied before a computational-basis readout and the value
//! each (possibly flipped) outcome contributes. The estimate is the sum over
//! settings of the mean shot value; shots are split evenly across settings
//! with any remainder going to the first ones.

use crate::encoding::EncodingLayout;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Stream};
use crate::statevector::{QubitIndex, Sampler, StateVector};

use super::{CostEstimate, EstimatorKind};

/// Number of settings used by the one-hot estimator.
pub const ONE_HOT_SETTINGS: usize = 3;

struct Setting {
    probs: Vec<f64>,
    values: Vec<f64>,
}

fn check_pre_state(pre: &StateVector, layout: &EncodingLayout, want_one_hot: bool) -> Result<()> {
    if layout.is_one_hot() != want_one_hot {
        return Err(Error::LayoutMismatch(format!(
            "estimator does not apply to a {:?} layout",
            layout.scheme
        )));
    }
    if pre.num_qubits() != layout.data_qubits() + 1 {
        return Err(Error::LayoutMismatch(format!(
            "expected data register plus ancilla ({} qubits), got {}",
            layout.data_qubits() + 1,
            pre.num_qubits()
        )));
    }
    Ok(())
}

/// One setting: Hadamard on every column qubit. A shot scores `2^N_M` when
/// the ancilla and all column bits read 0, since
/// `(I + X)^{(x) N_M} = 2^N_M H^{(x) N_M} |0><0| H^{(x) N_M}`.
fn compact_settings(pre: &StateVector, layout: &EncodingLayout) -> Result<Vec<Setting>> {
    check_pre_state(pre, layout, false)?;
    let mut rotated = pre.clone();
    for q in layout.column_qubits() {
        rotated.apply_hadamard(q)?;
    }
    let mask = ((1usize << layout.n_m) - 1) | layout.ancilla().mask();
    let scale = (1usize << layout.n_m) as f64;
    let values = (0..pre.dim())
        .map(|b| if b & mask == 0 { scale } else { 0.0 })
        .collect();
    Ok(vec![Setting {
        probs: rotated.probabilities(),
        values,
    }])
}

/// Three settings for `I_code + sum_row_pairs (X_j X_k + Y_j Y_k) / 2`, all
/// multiplied by the ancilla-0 projector.
///
/// Z setting: a shot scores 1 when the ancilla reads 0 and exactly one data
/// qubit is excited (the identity restricted to the one-hot code space).
/// X and Y settings: every data qubit is rotated to the X (or Y) basis; with
/// the ancilla at 0 a shot scores `1/2 sum_{j<k in row} (-1)^(b_j + b_k)`.
fn one_hot_settings(pre: &StateVector, layout: &EncodingLayout) -> Result<Vec<Setting>> {
    check_pre_state(pre, layout, true)?;
    let n_data = layout.data_qubits();
    let anc = layout.ancilla().mask();
    let data_mask = (1usize << n_data) - 1;
    let cols = layout.cols();
    let row_masks: Vec<usize> = (0..layout.rows)
        .map(|l| ((1usize << cols) - 1) << (l * cols))
        .collect();
    let pair_value = |b: usize| -> f64 {
        if b & anc != 0 {
            return 0.0;
        }
        // sum over pairs of s_j s_k = ((sum s)^2 - r) / 2 with sum s = r - 2 k
        row_masks
            .iter()
            .map(|&rm| {
                let k = (b & rm).count_ones() as f64;
                let s = cols as f64 - 2.0 * k;
                (s * s - cols as f64) / 2.0
            })
            .sum::<f64>()
            * 0.5
    };

    let z_values = (0..pre.dim())
        .map(|b| {
            if b & anc == 0 && (b & data_mask).count_ones() == 1 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let pair_values: Vec<f64> = (0..pre.dim()).map(pair_value).collect();

    let mut x_state = pre.clone();
    let mut y_state = pre.clone();
    for q in (0..n_data).map(QubitIndex) {
        x_state.apply_hadamard(q)?;
        y_state.apply_s_dagger(q)?;
        y_state.apply_hadamard(q)?;
    }
    Ok(vec![
        Setting {
            probs: pre.probabilities(),
            values: z_values,
        },
        Setting {
            probs: x_state.probabilities(),
            values: pair_values.clone(),
        },
        Setting {
            probs: y_state.probabilities(),
            values: pair_values,
        },
    ])
}

/// Pushes an outcome distribution through independent bit flips with
/// probability `delta` on each of `n` bits.
fn flip_channel(probs: &mut [f64], n: usize, delta: f64) {
    if delta == 0.0 {
        return;
    }
    for q in 0..n {
        let m = 1usize << q;
        for i in 0..probs.len() {
            if i & m == 0 {
                let (p0, p1) = (probs[i], probs[i | m]);
                probs[i] = (1.0 - delta) * p0 + delta * p1;
                probs[i | m] = delta * p0 + (1.0 - delta) * p1;
            }
        }
    }
}

fn noisy_mean(settings: Vec<Setting>, n: usize, delta: f64) -> f64 {
    settings
        .into_iter()
        .map(|mut s| {
            let total: f64 = s.probs.iter().sum();
            flip_channel(&mut s.probs, n, delta);
            s.probs.iter().zip(&s.values).map(|(p, v)| p * v).sum::<f64>() / total
        })
        .sum()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::InvalidArgument(format!("readout error {delta} outside [0, 0.5)")));
    }
    Ok(())
}

/// Exact expectation of the compact estimator under readout error `delta`
/// (the infinite-shot limit of [`shot_estimate_compact`]).
pub fn noisy_mean_compact(pre: &StateVector, layout: &EncodingLayout, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(noisy_mean(compact_settings(pre, layout)?, pre.num_qubits(), delta))
}

/// Exact expectation of the one-hot estimator under readout error `delta`.
pub fn noisy_mean_one_hot(pre: &StateVector, layout: &EncodingLayout, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(noisy_mean(one_hot_settings(pre, layout)?, pre.num_qubits(), delta))
}

fn run_settings(
    settings: &[Setting],
    n: usize,
    shots: u64,
    delta: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    let count = settings.len() as u64;
    if shots < count {
        return Err(Error::InvalidArgument(format!(
            "{shots} shots cannot cover {count} measurement settings"
        )));
    }
    let mut value = 0.0;
    let mut var_of_mean = 0.0;
    for (s, setting) in settings.iter().enumerate() {
        let n_s = shots / count + u64::from((s as u64) < shots % count);
        let sampler = Sampler::from_weights(&setting.probs)?;
        let mut rng = Stream::new(derive_seed(seed, s as u64));
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n_s {
            let mut b = sampler.draw(&mut rng);
            if delta > 0.0 {
                for q in 0..n {
                    if rng.chance(delta) {
                        b ^= 1 << q;
                    }
                }
            }
            let v = setting.values[b];
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n_s as f64;
        let var = (sum_sq / n_s as f64 - mean * mean).max(0.0);
        value += mean;
        var_of_mean += var / n_s as f64;
    }
    Ok((value, var_of_mean.sqrt()))
}

/// Compact-encoding estimate from a single X-basis setting on the column
/// register. `pre` is the data register plus ancilla before projection.
pub fn shot_estimate_compact(
    pre: &StateVector,
    layout: &EncodingLayout,
    shots: u64,
    delta: f64,
    seed: u64,
) -> Result<CostEstimate> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    check_delta(delta)?;
    let settings = compact_settings(pre, layout)?;
    let (value, std_error) = run_settings(&settings, pre.num_qubits(), shots, delta, seed)?;
    Ok(CostEstimate {
        value,
        estimator: EstimatorKind::CompactXBasisShots,
        shots,
        std_error,
        readout_delta: delta,
        seed: Some(seed),
    })
}

/// One-hot estimate from the computational, all-X and all-Y settings.
pub fn shot_estimate_one_hot(
    pre: &StateVector,
    layout: &EncodingLayout,
    shots: u64,
    delta: f64,
    seed: u64,
) -> Result<CostEstimate> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    check_delta(delta)?;
    let settings = one_hot_settings(pre, layout)?;
    let (value, std_error) = run_settings(&settings, pre.num_qubits(), shots, delta, seed)?;
    Ok(CostEstimate {
        value,
        estimator: EstimatorKind::GroupedPauliShots,
        shots,
        std_error,
        readout_delta: delta,
        seed: Some(seed),
    })
}
