//! Data-state preparation for the one-hot and compact binary layouts.
//!
//! One-hot: cell `(l, m)` owns qubit `j = m + l (M+1)` and the data state is
//! `sum_j x_j |1_j>`. Compact: the low `N_M` qubits hold the column index and
//! the next `N_L` qubits the row index, so cell `(l, m)` is basis index
//! `m | l << N_M`. Padding cells (`m > M` or `l >= L`) always have zero
//! amplitude.
//!
//! When a circuit needs an ancilla it is qubit `data_qubits()`, directly above
//! the data register; the compact memory register sits above the ancilla.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::{DigitizedTable, StandardizedTable};
use crate::error::{Error, Result};
use crate::statevector::{DiagonalPhaseSpec, ProjectionBasis, QubitIndex, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    OneHot,
    CompactBinary,
    /// Compact indexing with amplitudes written directly, no circuit.
    ExactInjection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmplitudeModel {
    Exact,
    SinOfDigitized,
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingLayout {
    pub scheme: Scheme,
    pub rows: usize,
    pub features: usize,
    /// Row-register width `N_L` (compact only; zero for one-hot).
    pub n_l: usize,
    /// Column-register width `N_M` (compact only; zero for one-hot).
    pub n_m: usize,
    /// Bits per cell held in the memory register, when one is simulated.
    pub memory_bits: Option<usize>,
}

impl EncodingLayout {
    pub fn one_hot(rows: usize, features: usize) -> Self {
        Self {
            scheme: Scheme::OneHot,
            rows,
            features,
            n_l: 0,
            n_m: 0,
            memory_bits: None,
        }
    }

    pub fn compact(rows: usize, features: usize) -> Self {
        Self {
            scheme: Scheme::CompactBinary,
            rows,
            features,
            n_l: ceil_log2(rows),
            n_m: ceil_log2(features + 1),
            memory_bits: None,
        }
    }

    pub fn for_scheme(scheme: Scheme, rows: usize, features: usize) -> Self {
        match scheme {
            Scheme::OneHot => Self::one_hot(rows, features),
            Scheme::CompactBinary => Self::compact(rows, features),
            Scheme::ExactInjection => Self {
                scheme,
                ..Self::compact(rows, features)
            },
        }
    }

    pub fn is_one_hot(&self) -> bool {
        self.scheme == Scheme::OneHot
    }

    pub fn cols(&self) -> usize {
        self.features + 1
    }

    /// Number of real (non-padding) cells, `L (M+1)`.
    pub fn cells(&self) -> usize {
        self.rows * self.cols()
    }

    /// `N_K = N_L + N_M`.
    pub fn n_k(&self) -> usize {
        self.n_l + self.n_m
    }

    /// Padded cell count of the compact register, `2^N_K`.
    pub fn padded_cells(&self) -> usize {
        1 << self.n_k()
    }

    pub fn data_qubits(&self) -> usize {
        if self.is_one_hot() {
            self.cells()
        } else {
            self.n_k()
        }
    }

    pub fn ancilla(&self) -> QubitIndex {
        QubitIndex(self.data_qubits())
    }

    pub fn memory_qubits(&self) -> usize {
        self.memory_bits.map_or(0, |b| b * self.cells())
    }

    /// Memory qubit holding bit `j` (0-based) of cell `k`.
    pub fn memory_qubit(&self, k: usize, j: usize) -> QubitIndex {
        let bits = self.memory_bits.unwrap_or(0);
        QubitIndex(self.data_qubits() + 1 + k * bits + j)
    }

    pub fn total_qubits(&self) -> usize {
        self.data_qubits() + 1 + self.memory_qubits()
    }

    pub fn column_qubits(&self) -> impl Iterator<Item = QubitIndex> {
        (0..self.n_m).map(QubitIndex)
    }

    pub fn row_qubits(&self) -> impl Iterator<Item = QubitIndex> + '_ {
        (self.n_m..self.n_k()).map(QubitIndex)
    }

    /// Data-register basis index of cell `(l, m)`.
    pub fn code_index(&self, l: usize, m: usize) -> usize {
        if self.is_one_hot() {
            1 << (m + l * self.cols())
        } else {
            m | l << self.n_m
        }
    }

    /// Inverse of [`code_index`](Self::code_index) on the code space.
    pub fn cell_of_index(&self, index: usize) -> Option<(usize, usize)> {
        if self.is_one_hot() {
            if !index.is_power_of_two() {
                return None;
            }
            let j = index.trailing_zeros() as usize;
            (j < self.cells()).then(|| (j / self.cols(), j % self.cols()))
        } else {
            let m = index & ((1 << self.n_m) - 1);
            let l = index >> self.n_m;
            (m < self.cols() && l < self.rows).then_some((l, m))
        }
    }

    pub fn check_table(&self, rows: usize, features: usize) -> Result<()> {
        if rows != self.rows || features != self.features {
            return Err(Error::LayoutMismatch(format!(
                "layout is {}x{}, table is {}x{}",
                self.rows,
                self.cols(),
                rows,
                features + 1
            )));
        }
        Ok(())
    }
}

/// A data-register state together with how it was made.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedState {
    /// Data register only; any ancilla or memory used in preparation has been
    /// projected out and the conditional state renormalized.
    pub state: StateVector,
    pub layout: EncodingLayout,
    pub success_probability: f64,
    pub amplitude_model: AmplitudeModel,
}

/// Writes `x_lm` straight into the amplitudes. Compact layouts pad with zeros.
pub fn prepare_exact(std: &StandardizedTable, scheme: Scheme) -> Result<PreparedState> {
    let layout = EncodingLayout::for_scheme(scheme, std.rows(), std.features());
    let n = layout.data_qubits();
    if n > 24 {
        return Err(Error::InvalidArgument(format!("{n} data qubits is too many to simulate")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for l in 0..std.rows() {
        for m in 0..std.cols() {
            amps[layout.code_index(l, m)] = Complex64::new(std.get(l, m), 0.0);
        }
    }
    Ok(PreparedState {
        state: StateVector::from_amplitudes(amps)?,
        layout,
        success_probability: 1.0,
        amplitude_model: AmplitudeModel::Exact,
    })
}

/// Angles for the one-hot gadget chain so that the final amplitude on qubit
/// `j` is `amplitudes[j]`. The input should have unit norm.
///
/// Every angle except the last is `atan2(tail_norm, x_j)` and so lies in
/// `[0, pi]`; the last is `atan2(x_{K-1}, x_{K-2})` and carries the sign of
/// the final amplitude. A zero tail gives angle 0 (or `pi` for a negative
/// `x_j`), which leaves the rest of the chain empty.
pub fn chain_angles(amplitudes: &[f64]) -> Vec<f64> {
    let k = amplitudes.len();
    if k < 2 {
        return Vec::new();
    }
    let mut tail = vec![0.0f64; k + 1];
    for j in (0..k).rev() {
        tail[j] = tail[j + 1].hypot(amplitudes[j]);
    }
    (0..k - 1)
        .map(|j| {
            if j == k - 2 {
                amplitudes[k - 1].atan2(amplitudes[k - 2])
            } else {
                tail[j + 1].atan2(amplitudes[j])
            }
        })
        .collect()
}

/// One-hot preparation by the gadget chain: start from `|1_0>`, then for each
/// neighbouring pair apply controlled-`R_y(theta_j)` (control `j`, target
/// `j+1`) followed by CNOT (control `j+1`, target `j`).
pub fn prepare_one_hot_chain(std: &StandardizedTable) -> Result<PreparedState> {
    let layout = EncodingLayout::one_hot(std.rows(), std.features());
    let k = layout.cells();
    if k < 2 {
        return Err(Error::InvalidTable("chain needs at least two cells".into()));
    }
    if k > 24 {
        return Err(Error::InvalidArgument(format!("{k} data qubits is too many to simulate")));
    }
    let mut state = StateVector::zero_state(k);
    state.apply_x(QubitIndex(0))?;
    for (j, theta) in chain_angles(std.values()).into_iter().enumerate() {
        state.apply_controlled_ry(QubitIndex(j), QubitIndex(j + 1), theta)?;
        state.apply_cnot(QubitIndex(j + 1), QubitIndex(j))?;
    }
    Ok(PreparedState {
        state,
        layout,
        success_probability: 1.0,
        amplitude_model: AmplitudeModel::Exact,
    })
}

/// Compact preparation with the digitized values held in a simulated memory
/// register. Each `U_D^k` is built from ancilla-signed phases controlled on
/// the key `k` and on one memory bit at a time.
pub fn prepare_compact_with_memory(dig: &DigitizedTable) -> Result<PreparedState> {
    let mut layout = EncodingLayout::compact(dig.rows, dig.features);
    layout.memory_bits = Some(dig.n_bits);
    let total = layout.total_qubits();
    if total > 24 {
        return Err(Error::InvalidArgument(format!(
            "{total} qubits with memory is too many to simulate; use the memory-free path"
        )));
    }
    let mut pattern = 0usize;
    for k in 0..layout.cells() {
        for (j, &bit) in dig.bits[k].iter().enumerate() {
            if bit {
                pattern |= layout.memory_qubit(k, j).mask();
            }
        }
    }
    let mut state = initial_compact_state(&layout, pattern)?;
    let ancilla = layout.ancilla();
    for l in 0..dig.rows {
        for m in 0..dig.cols() {
            let k = l * dig.cols() + m;
            let key = key_controls(&layout, layout.code_index(l, m));
            for (j, &dtheta) in dig.delta_thetas.iter().enumerate() {
                // Z on the memory bit is +1 for |0> and -1 for |1>.
                for (bit, sign) in [(false, 1.0), (true, -1.0)] {
                    let mut controls = key.clone();
                    controls.push((layout.memory_qubit(k, j), bit));
                    let spec = DiagonalPhaseSpec::new(controls, -sign * dtheta, Some(ancilla));
                    state.apply_controlled_diagonal_phase(&spec)?;
                }
            }
        }
    }
    finish_compact(state, layout, pattern)
}

/// Same output as [`prepare_compact_with_memory`], with each cell's total
/// phase `x~_k` applied directly as one ancilla-signed phase on key `k`.
pub fn prepare_compact_memory_free(dig: &DigitizedTable) -> Result<PreparedState> {
    let layout = EncodingLayout::compact(dig.rows, dig.features);
    let mut state = initial_compact_state(&layout, 0)?;
    for l in 0..dig.rows {
        for m in 0..dig.cols() {
            let k = l * dig.cols() + m;
            let spec = DiagonalPhaseSpec::new(
                key_controls(&layout, layout.code_index(l, m)),
                -dig.x_tilde[k],
                Some(layout.ancilla()),
            );
            state.apply_controlled_diagonal_phase(&spec)?;
        }
    }
    finish_compact(state, layout, 0)
}

/// Uniform data register, ancilla `|+>`, memory holding `pattern`.
fn initial_compact_state(layout: &EncodingLayout, pattern: usize) -> Result<StateVector> {
    let total = layout.total_qubits();
    let mut state = StateVector::basis_state(total, pattern)?;
    for q in 0..=layout.data_qubits() {
        state.apply_hadamard(QubitIndex(q))?;
    }
    Ok(state)
}

fn key_controls(layout: &EncodingLayout, key: usize) -> Vec<(QubitIndex, bool)> {
    (0..layout.n_k())
        .map(|q| (QubitIndex(q), key >> q & 1 == 1))
        .collect()
}

/// Projects the ancilla onto `|->`, reads off the data-register amplitudes at
/// the memory pattern and removes the global `-i` phase.
fn finish_compact(state: StateVector, layout: EncodingLayout, pattern: usize) -> Result<PreparedState> {
    let ancilla = layout.ancilla();
    let (projected, p) = state.project_qubit(ancilla, ProjectionBasis::XMinus)?;
    if p <= 1e-300 {
        return Err(Error::ZeroSuccessProbability);
    }
    let data_dim = 1 << layout.data_qubits();
    let amps = projected.amplitudes();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let conditional: Vec<Complex64> = (0..data_dim)
        .map(|i| (amps[i | pattern] - amps[i | ancilla.mask() | pattern]) * s * Complex64::i())
        .collect();
    let captured: f64 = conditional.iter().map(|a| a.norm_sqr()).sum();
    if (captured - p).abs() > 1e-12 * p.max(1.0) {
        return Err(Error::LayoutMismatch(
            "memory register is entangled with the data register".into(),
        ));
    }
    let mut data = StateVector::from_amplitudes(conditional)?;
    data.renormalize()?;
    Ok(PreparedState {
        state: data,
        layout,
        success_probability: p,
        amplitude_model: AmplitudeModel::SinOfDigitized,
    })
}

/// Success probability of the compact preparation next to the two closed
/// forms it is usually approximated by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbabilityReport {
    /// `(1/K) sum_k sin^2 x~_k`, `K = 2^N_K`.
    pub exact: f64,
    /// Small-angle form `(1/K) sum_k x~_k^2`.
    pub small_angle: f64,
    /// `(1+M)/K`, which assumes every column carries unit energy.
    pub per_column_unit_energy: f64,
}

pub fn success_probability_report(dig: &DigitizedTable) -> SuccessProbabilityReport {
    let k = EncodingLayout::compact(dig.rows, dig.features).padded_cells() as f64;
    SuccessProbabilityReport {
        exact: dig.x_tilde.iter().map(|x| x.sin().powi(2)).sum::<f64>() / k,
        small_angle: dig.x_tilde.iter().map(|x| x * x).sum::<f64>() / k,
        per_column_unit_energy: dig.cols() as f64 / k,
    }
}
