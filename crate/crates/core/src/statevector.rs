//! Dense state vectors and the handful of gates the regression circuits use.
//!
//! Qubit `q` is bit `q` of the amplitude index (little-endian). When a basis
//! state is written as a ket string in this crate, the leftmost character is
//! qubit 0, so `|1000>` is index 1 and `|0001>` is index 8.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

const NORM_SLACK: f64 = 1e-12;
const MAX_QUBITS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QubitIndex(pub usize);

impl QubitIndex {
    #[inline]
    pub fn mask(self) -> usize {
        1 << self.0
    }
}

impl From<usize> for QubitIndex {
    fn from(i: usize) -> Self {
        QubitIndex(i)
    }
}

/// A 2x2 complex matrix acting on the `(|0>, |1>)` pair of one qubit.
pub type Gate1 = [[Complex64; 2]; 2];

/// Ancilla-signed multi-controlled phase.
///
/// Every basis state whose bits match all `controls` picks up
/// `exp(i * (-1)^b * angle)`, where `b` is the bit of `sign_qubit` (or 0 when
/// there is no sign qubit).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPhaseSpec {
    pub controls: Vec<(QubitIndex, bool)>,
    pub angle: f64,
    pub sign_qubit: Option<QubitIndex>,
}

impl DiagonalPhaseSpec {
    pub fn new(controls: Vec<(QubitIndex, bool)>, angle: f64, sign_qubit: Option<QubitIndex>) -> Self {
        Self {
            controls,
            angle,
            sign_qubit,
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let mut seen = 0usize;
        let all = self
            .controls
            .iter()
            .map(|(q, _)| *q)
            .chain(self.sign_qubit);
        for q in all {
            check_qubit(q, num_qubits)?;
            if seen & q.mask() != 0 {
                return Err(Error::DuplicateQubit(q.0));
            }
            seen |= q.mask();
        }
        Ok(())
    }
}

/// Outcome selected by [`StateVector::project_qubit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionBasis {
    Z0,
    Z1,
    XPlus,
    XMinus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
    norm_sqr: f64,
}

fn check_qubit(q: QubitIndex, num_qubits: usize) -> Result<()> {
    if q.0 >= num_qubits {
        Err(Error::QubitOutOfRange {
            index: q.0,
            num_qubits,
        })
    } else {
        Ok(())
    }
}

fn sum_norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Self {
        Self::basis_state(num_qubits, 0).expect("index 0 is always valid")
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "{num_qubits} qubits exceeds the dense limit of {MAX_QUBITS}"
            )));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
            norm_sqr: 1.0,
        })
    }

    /// Wraps an amplitude vector whose length is a power of two and whose
    /// squared norm does not exceed one.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector length {dim} is not a power of two"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "{num_qubits} qubits exceeds the dense limit of {MAX_QUBITS}"
            )));
        }
        let norm_sqr = sum_norm_sqr(&amplitudes);
        if !norm_sqr.is_finite() || norm_sqr > 1.0 + NORM_SLACK {
            return Err(Error::InvalidArgument(format!(
                "squared norm {norm_sqr} exceeds one"
            )));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
            norm_sqr,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    /// Cached squared norm.
    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }

    /// Squared norm recomputed from the amplitudes.
    pub fn computed_norm_sqr(&self) -> f64 {
        sum_norm_sqr(&self.amplitudes)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Appends one new most-significant qubit prepared in `qubit_state`.
    /// The new qubit gets index `num_qubits()`.
    pub fn with_appended_qubit(&self, qubit_state: [Complex64; 2]) -> Result<StateVector> {
        if self.num_qubits + 1 > MAX_QUBITS {
            return Err(Error::InvalidArgument("dense qubit limit reached".into()));
        }
        let mut amplitudes = Vec::with_capacity(self.dim() * 2);
        amplitudes.extend(self.amplitudes.iter().map(|a| a * qubit_state[0]));
        amplitudes.extend(self.amplitudes.iter().map(|a| a * qubit_state[1]));
        let norm_sqr = self.norm_sqr * (qubit_state[0].norm_sqr() + qubit_state[1].norm_sqr());
        Ok(StateVector {
            num_qubits: self.num_qubits + 1,
            amplitudes,
            norm_sqr,
        })
    }

    /// Divides out the norm so that `norm_sqr() == 1`.
    pub fn renormalize(&mut self) -> Result<()> {
        let n2 = self.computed_norm_sqr();
        if n2 <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / n2.sqrt();
        for a in &mut self.amplitudes {
            *a *= inv;
        }
        self.norm_sqr = self.computed_norm_sqr();
        Ok(())
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let mut out = self.clone();
        out.renormalize()?;
        Ok(out)
    }

    /// Applies an arbitrary 2x2 matrix to `target`. The cached norm is left
    /// untouched, so callers must only pass unitaries.
    pub fn apply_single_qubit(&mut self, target: QubitIndex, gate: &Gate1) -> Result<()> {
        check_qubit(target, self.num_qubits)?;
        let stride = target.mask();
        for block in self.amplitudes.chunks_exact_mut(stride * 2) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = gate[0][0] * x0 + gate[0][1] * x1;
                *a1 = gate[1][0] * x0 + gate[1][1] * x1;
            }
        }
        Ok(())
    }

    /// `R_y(theta) = [[cos theta, -sin theta], [sin theta, cos theta]]`.
    ///
    /// The full angle is used (not `theta / 2`), so `R_y(pi/2)|0> = |1>`.
    pub fn apply_ry(&mut self, target: QubitIndex, theta: f64) -> Result<()> {
        self.apply_single_qubit(target, &ry_matrix(theta))
    }

    pub fn apply_hadamard(&mut self, target: QubitIndex) -> Result<()> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = [
            [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        ];
        self.apply_single_qubit(target, &g)
    }

    pub fn apply_x(&mut self, target: QubitIndex) -> Result<()> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        self.apply_single_qubit(target, &[[zero, one], [one, zero]])
    }

    pub fn apply_z(&mut self, target: QubitIndex) -> Result<()> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        self.apply_single_qubit(target, &[[one, zero], [zero, -one]])
    }

    /// `S^dagger = diag(1, -i)`.
    pub fn apply_s_dagger(&mut self, target: QubitIndex) -> Result<()> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        self.apply_single_qubit(target, &[[one, zero], [zero, Complex64::new(0.0, -1.0)]])
    }

    /// Applies `gate` to `target` on the subspace where `control` is 1.
    pub fn apply_controlled(&mut self, control: QubitIndex, target: QubitIndex, gate: &Gate1) -> Result<()> {
        check_qubit(control, self.num_qubits)?;
        check_qubit(target, self.num_qubits)?;
        if control == target {
            return Err(Error::DuplicateQubit(control.0));
        }
        let (cm, tm) = (control.mask(), target.mask());
        for i in 0..self.dim() {
            if i & cm != 0 && i & tm == 0 {
                let j = i | tm;
                let (x0, x1) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = gate[0][0] * x0 + gate[0][1] * x1;
                self.amplitudes[j] = gate[1][0] * x0 + gate[1][1] * x1;
            }
        }
        Ok(())
    }

    pub fn apply_controlled_ry(&mut self, control: QubitIndex, target: QubitIndex, theta: f64) -> Result<()> {
        self.apply_controlled(control, target, &ry_matrix(theta))
    }

    pub fn apply_cnot(&mut self, control: QubitIndex, target: QubitIndex) -> Result<()> {
        check_qubit(control, self.num_qubits)?;
        check_qubit(target, self.num_qubits)?;
        if control == target {
            return Err(Error::DuplicateQubit(control.0));
        }
        let (cm, tm) = (control.mask(), target.mask());
        for i in 0..self.dim() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
        Ok(())
    }

    pub fn apply_controlled_diagonal_phase(&mut self, spec: &DiagonalPhaseSpec) -> Result<()> {
        spec.validate(self.num_qubits)?;
        let (mut mask, mut want) = (0usize, 0usize);
        for &(q, bit) in &spec.controls {
            mask |= q.mask();
            if bit {
                want |= q.mask();
            }
        }
        let plus = Complex64::from_polar(1.0, spec.angle);
        let minus = Complex64::from_polar(1.0, -spec.angle);
        let sign_mask = spec.sign_qubit.map_or(0, QubitIndex::mask);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == want {
                *a *= if i & sign_mask == 0 { plus } else { minus };
            }
        }
        Ok(())
    }

    /// Projects `target` onto one outcome without renormalizing.
    ///
    /// Returns the projected (generally subnormalized) state and its squared
    /// norm. X-basis outcomes are computed as `H P_z H`.
    pub fn project_qubit(&self, target: QubitIndex, basis: ProjectionBasis) -> Result<(StateVector, f64)> {
        check_qubit(target, self.num_qubits)?;
        let mut out = self.clone();
        let (x_basis, keep_one) = match basis {
            ProjectionBasis::Z0 => (false, false),
            ProjectionBasis::Z1 => (false, true),
            ProjectionBasis::XPlus => (true, false),
            ProjectionBasis::XMinus => (true, true),
        };
        if x_basis {
            out.apply_hadamard(target)?;
        }
        let m = target.mask();
        for (i, a) in out.amplitudes.iter_mut().enumerate() {
            if (i & m != 0) != keep_one {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if x_basis {
            out.apply_hadamard(target)?;
        }
        out.norm_sqr = out.computed_norm_sqr();
        let p = out.norm_sqr;
        Ok((out, p))
    }

    /// `shots` i.i.d. basis-state indices drawn from `|a_i|^2 / norm^2`.
    pub fn sample_bitstrings(&self, shots: usize, rng_seed: u64) -> Result<Vec<usize>> {
        let sampler = Sampler::new(self)?;
        let mut rng = Stream::new(rng_seed);
        Ok((0..shots).map(|_| sampler.draw(&mut rng)).collect())
    }
}

/// Inverse-CDF sampler over the computational basis.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    pub fn new(state: &StateVector) -> Result<Self> {
        Self::from_weights(&state.probabilities())
    }

    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let mut acc = 0.0;
        let cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            cdf: cdf.into_iter().map(|c| c / acc).collect(),
        })
    }

    #[inline]
    pub fn draw(&self, rng: &mut Stream) -> usize {
        let u = rng.uniform();
        let i = self.cdf.partition_point(|&c| c <= u);
        // u < 1 always, but rounding can leave the last cdf entry below 1
        i.min(self.cdf.len() - 1)
    }
}

pub fn ry_matrix(theta: f64) -> Gate1 {
    let (s, c) = theta.sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// Renders `index` as a ket string with qubit 0 first.
pub fn format_bitstring(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn random_state(n: usize, seed: u64, scale: f64) -> StateVector {
        let mut rng = Stream::new(seed);
        let mut v: Vec<Complex64> = (0..1 << n)
            .map(|_| Complex64::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)))
            .collect();
        let norm = sum_norm_sqr(&v).sqrt();
        for a in &mut v {
            *a *= scale / norm;
        }
        StateVector::from_amplitudes(v).unwrap()
    }

    #[test]
    fn ry_identity_and_quarter_turn() {
        let mut s = StateVector::zero_state(1);
        s.apply_ry(QubitIndex(0), 0.0).unwrap();
        assert!(close(s.amplitude(0), c(1.0), 1e-15));
        let mut s = StateVector::zero_state(1);
        s.apply_ry(QubitIndex(0), PI / 2.0).unwrap();
        assert!(close(s.amplitude(1), c(1.0), 1e-15));
        assert!(s.amplitude(0).norm() < 1e-15);
    }

    #[test]
    fn one_hot_gadget_moves_excitation() {
        // |10> : qubit 0 set. Controlled-Ry(theta) 0 -> 1, then CNOT 1 -> 0.
        let theta = 0.3;
        let mut s = StateVector::basis_state(2, 0b01).unwrap();
        s.apply_controlled_ry(QubitIndex(0), QubitIndex(1), theta).unwrap();
        s.apply_cnot(QubitIndex(1), QubitIndex(0)).unwrap();
        // Oracle: 4x4 gadget matrix times the basis vector, expanded by hand.
        assert!(close(s.amplitude(0b01), c(0.955_336_489_125_606), 1e-12));
        assert!(close(s.amplitude(0b10), c(0.295_520_206_661_339_6), 1e-12));
        assert!(s.amplitude(0b00).norm() < 1e-15 && s.amplitude(0b11).norm() < 1e-15);
    }

    #[test]
    fn diagonal_phase_zero_angle_is_identity() {
        let mut s = random_state(3, 5, 1.0);
        let before = s.clone();
        let spec = DiagonalPhaseSpec::new(vec![(QubitIndex(1), true)], 0.0, Some(QubitIndex(0)));
        s.apply_controlled_diagonal_phase(&spec).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn diagonal_phase_single_control() {
        let phi = 0.42;
        let mut s = StateVector::basis_state(1, 1).unwrap();
        let spec = DiagonalPhaseSpec::new(vec![(QubitIndex(0), true)], phi, None);
        s.apply_controlled_diagonal_phase(&spec).unwrap();
        assert!(close(s.amplitude(1), Complex64::from_polar(1.0, phi), 1e-15));
    }

    #[test]
    fn diagonal_phase_enumerated() {
        let s0 = random_state(3, 11, 1.0);
        let mut s = s0.clone();
        let spec = DiagonalPhaseSpec::new(
            vec![(QubitIndex(1), true), (QubitIndex(2), false)],
            0.7,
            Some(QubitIndex(0)),
        );
        s.apply_controlled_diagonal_phase(&spec).unwrap();
        for i in 0..8usize {
            let (b0, b1, b2) = (i & 1, i >> 1 & 1, i >> 2 & 1);
            let expected = if b1 == 1 && b2 == 0 {
                let sign = if b0 == 0 { 1.0 } else { -1.0 };
                s0.amplitude(i) * Complex64::from_polar(1.0, sign * 0.7)
            } else {
                s0.amplitude(i)
            };
            assert!(close(s.amplitude(i), expected, 1e-15), "index {i}");
        }
    }

    #[test]
    fn diagonal_phase_rejects_bad_specs() {
        let mut s = StateVector::zero_state(2);
        let dup = DiagonalPhaseSpec::new(vec![(QubitIndex(1), true)], 0.1, Some(QubitIndex(1)));
        assert!(matches!(s.apply_controlled_diagonal_phase(&dup), Err(Error::DuplicateQubit(1))));
        let oob = DiagonalPhaseSpec::new(vec![(QubitIndex(2), true)], 0.1, None);
        assert!(matches!(
            s.apply_controlled_diagonal_phase(&oob),
            Err(Error::QubitOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn hadamard_and_cnot_basics() {
        let mut s = StateVector::zero_state(1);
        s.apply_hadamard(QubitIndex(0)).unwrap();
        assert!(close(s.amplitude(0), c(FRAC_1_SQRT_2), 1e-15));
        assert!(close(s.amplitude(1), c(FRAC_1_SQRT_2), 1e-15));

        let psi = random_state(3, 2, 1.0);
        let mut twice = psi.clone();
        twice.apply_hadamard(QubitIndex(1)).unwrap();
        twice.apply_hadamard(QubitIndex(1)).unwrap();
        for i in 0..8 {
            assert!(close(twice.amplitude(i), psi.amplitude(i), 1e-14));
        }

        // |10> (qubit 0 set) -> |11>
        let mut s = StateVector::basis_state(2, 0b01).unwrap();
        s.apply_cnot(QubitIndex(0), QubitIndex(1)).unwrap();
        assert!(close(s.amplitude(0b11), c(1.0), 1e-15));
        assert!(s.apply_cnot(QubitIndex(0), QubitIndex(0)).is_err());
        assert!(s.apply_hadamard(QubitIndex(5)).is_err());
    }

    #[test]
    fn projection_examples() {
        let mut plus = StateVector::zero_state(1);
        plus.apply_hadamard(QubitIndex(0)).unwrap();
        let (p0, prob) = plus.project_qubit(QubitIndex(0), ProjectionBasis::Z0).unwrap();
        assert!((prob - 0.5).abs() < 1e-15);
        assert!(close(p0.amplitude(0), c(FRAC_1_SQRT_2), 1e-15));
        assert!(p0.amplitude(1).norm() < 1e-15);

        let zero = StateVector::zero_state(1);
        let (p1, prob) = zero.project_qubit(QubitIndex(0), ProjectionBasis::Z1).unwrap();
        assert_eq!(prob, 0.0);
        assert_eq!(p1.computed_norm_sqr(), 0.0);

        let (_, pm) = plus.project_qubit(QubitIndex(0), ProjectionBasis::XMinus).unwrap();
        assert!(pm.abs() < 1e-15);
        let (pp_state, pp) = plus.project_qubit(QubitIndex(0), ProjectionBasis::XPlus).unwrap();
        assert!((pp - 1.0).abs() < 1e-15);
        assert!(close(pp_state.amplitude(1), c(FRAC_1_SQRT_2), 1e-15));
    }

    #[test]
    fn sampling_deterministic_state_and_seed() {
        let s = StateVector::zero_state(3);
        assert_eq!(s.sample_bitstrings(5, 1).unwrap(), vec![0; 5]);
        assert_eq!(format_bitstring(0, 3), "000");
        assert_eq!(format_bitstring(1, 4), "1000");

        let r = random_state(4, 8, 1.0);
        assert_eq!(r.sample_bitstrings(100, 77).unwrap(), r.sample_bitstrings(100, 77).unwrap());
        assert_ne!(r.sample_bitstrings(100, 77).unwrap(), r.sample_bitstrings(100, 78).unwrap());
    }

    #[test]
    fn sampling_plus_state_is_fair() {
        let mut s = StateVector::zero_state(1);
        s.apply_hadamard(QubitIndex(0)).unwrap();
        let n = 100_000;
        let ones = s.sample_bitstrings(n, 2024).unwrap().iter().filter(|&&b| b == 1).count();
        let frac = ones as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((frac - 0.5).abs() < 5.0 * sigma, "frac {frac}");
    }

    #[test]
    fn sampling_zero_state_errors() {
        let s = StateVector::from_real(&[0.0, 0.0]).unwrap();
        assert!(matches!(s.sample_bitstrings(1, 0), Err(Error::ZeroNorm)));
    }

    #[test]
    fn sampling_uses_normalized_distribution() {
        // subnormalized (0.3, 0.4): p(1) = 0.64
        let s = StateVector::from_real(&[0.3, 0.4]).unwrap();
        let n = 100_000;
        let ones = s.sample_bitstrings(n, 5).unwrap().iter().filter(|&&b| b == 1).count();
        let frac = ones as f64 / n as f64;
        assert!((frac - 0.64).abs() < 5.0 * (0.64 * 0.36 / n as f64).sqrt());
    }

    fn apply_gate(s: &mut StateVector, which: u8, a: usize, b: usize, angle: f64) {
        let (qa, qb) = (QubitIndex(a), QubitIndex(b));
        match which {
            0 => s.apply_ry(qa, angle).unwrap(),
            1 => s.apply_hadamard(qa).unwrap(),
            2 => s.apply_cnot(qa, qb).unwrap(),
            3 => s.apply_controlled_ry(qa, qb, angle).unwrap(),
            4 => s.apply_s_dagger(qa).unwrap(),
            _ => s
                .apply_controlled_diagonal_phase(&DiagonalPhaseSpec::new(
                    vec![(qa, true)],
                    angle,
                    Some(qb),
                ))
                .unwrap(),
        }
    }

    proptest! {
        #[test]
        fn gates_are_unitary_and_linear(
            seed in 0u64..10_000,
            which in 0u8..6,
            a in 0usize..4,
            shift in 1usize..4,
            angle in -7.0f64..7.0,
            alpha in -0.7f64..0.7,
            beta in -0.7f64..0.7,
        ) {
            let b = (a + shift) % 4;
            let psi = random_state(4, seed, 1.0);
            let chi = random_state(4, seed + 1, 1.0);

            let mut g_psi = psi.clone();
            apply_gate(&mut g_psi, which, a, b, angle);
            prop_assert!((g_psi.computed_norm_sqr() - psi.norm_sqr()).abs() < 1e-12);
            prop_assert!((g_psi.norm_sqr() - g_psi.computed_norm_sqr()).abs() < 1e-12);

            let mut g_chi = chi.clone();
            apply_gate(&mut g_chi, which, a, b, angle);

            // scale both by 1/2 so the combination stays within the unit ball
            let combo: Vec<Complex64> = psi.amplitudes().iter().zip(chi.amplitudes())
                .map(|(p, q)| 0.5 * (alpha * p + beta * q)).collect();
            let mut g_combo = StateVector::from_amplitudes(combo).unwrap();
            apply_gate(&mut g_combo, which, a, b, angle);
            for i in 0..16 {
                let expect = 0.5 * (alpha * g_psi.amplitude(i) + beta * g_chi.amplitude(i));
                prop_assert!((g_combo.amplitude(i) - expect).norm() < 1e-12);
            }
        }

        #[test]
        fn projection_complete_and_idempotent(seed in 0u64..10_000, target in 0usize..4) {
            let psi = random_state(4, seed, 0.9);
            let q = QubitIndex(target);
            for (b0, b1) in [(ProjectionBasis::Z0, ProjectionBasis::Z1), (ProjectionBasis::XPlus, ProjectionBasis::XMinus)] {
                let (s0, p0) = psi.project_qubit(q, b0).unwrap();
                let (_, p1) = psi.project_qubit(q, b1).unwrap();
                prop_assert!((p0 + p1 - psi.norm_sqr()).abs() < 1e-12);
                let (s00, p00) = s0.project_qubit(q, b0).unwrap();
                prop_assert!((p00 - p0).abs() < 1e-12);
                for i in 0..16 {
                    prop_assert!((s00.amplitude(i) - s0.amplitude(i)).norm() < 1e-12);
                }
            }
        }
    }
}
