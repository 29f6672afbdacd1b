//! The controlled-phase regression map and its closed-form cost.
//!
//! With the ancilla in `|+>`, column `m` picks up `exp(i (-1)^b phi_m)` where
//! `b` is the ancilla bit. A Hadamard on the ancilla followed by projection
//! onto `|0>` leaves `sum_lm x_lm cos(phi_m) |lm>`. Putting the opposite sign
//! convention on the ancilla gives the same cosine map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::StandardizedTable;
use crate::encoding::PreparedState;
use crate::error::{Error, Result};
use crate::statevector::{DiagonalPhaseSpec, ProjectionBasis, QubitIndex, StateVector};

/// Smallest `|cos phi_0|` from which weights are recovered.
pub const MIN_RESPONSE_COSINE: f64 = 1e-9;

/// Phases `phi_0 .. phi_M`, response first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector {
    pub phis: Vec<f64>,
}

impl PhaseVector {
    pub fn new(phis: Vec<f64>) -> Self {
        Self { phis }
    }

    /// Phases `acos(c_m)`; every cosine must lie in `[-1, 1]`.
    pub fn from_cosines(cosines: &[f64]) -> Result<Self> {
        if let Some(c) = cosines.iter().find(|c| !(c.abs() <= 1.0)) {
            return Err(Error::InvalidArgument(format!("cosine {c} outside [-1, 1]")));
        }
        Ok(Self::new(cosines.iter().map(|c| c.acos()).collect()))
    }

    pub fn cosines(&self) -> Vec<f64> {
        self.phis.iter().map(|p| p.cos()).collect()
    }

    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub weights: Vec<f64>,
}

/// `W_m = -cos(phi_m) / cos(phi_0)` for `m = 1..M`.
pub fn phases_to_weights(phases: &PhaseVector) -> Result<WeightVector> {
    cosines_to_weights(&phases.cosines())
}

pub fn cosines_to_weights(cosines: &[f64]) -> Result<WeightVector> {
    let c0 = cosines[0];
    if !(c0.abs() > MIN_RESPONSE_COSINE) {
        return Err(Error::DegeneratePhase(c0.abs()));
    }
    Ok(WeightVector {
        weights: cosines[1..].iter().map(|c| -c / c0).collect(),
    })
}

/// Row residuals `sum_m x_lm c_m`.
fn row_sums(std: &StandardizedTable, cosines: &[f64]) -> Vec<f64> {
    (0..std.rows())
        .map(|l| std.row(l).iter().zip(cosines).map(|(x, c)| x * c).sum())
        .collect()
}

/// `sum_l (sum_m x_lm c_m)^2` for arbitrary real `c` (no `[-1, 1]` limit).
pub fn cost_from_cosines(std: &StandardizedTable, cosines: &[f64]) -> f64 {
    row_sums(std, cosines).iter().map(|r| r * r).sum()
}

pub fn analytic_cost(std: &StandardizedTable, phases: &PhaseVector) -> Result<f64> {
    check_len(std, phases)?;
    Ok(cost_from_cosines(std, &phases.cosines()))
}

/// `dC/dphi_m = -2 sin(phi_m) sum_l x_lm r_l` with `r_l` the row residual.
pub fn analytic_gradient(std: &StandardizedTable, phases: &PhaseVector) -> Result<Vec<f64>> {
    check_len(std, phases)?;
    let r = row_sums(std, &phases.cosines());
    Ok((0..std.cols())
        .map(|m| {
            let s: f64 = (0..std.rows()).map(|l| std.get(l, m) * r[l]).sum();
            -2.0 * phases.phis[m].sin() * s
        })
        .collect())
}

fn check_len(std: &StandardizedTable, phases: &PhaseVector) -> Result<()> {
    if phases.len() != std.cols() {
        return Err(Error::DimensionMismatch {
            expected: std.cols(),
            found: phases.len(),
        });
    }
    Ok(())
}

/// Data register plus ancilla after the controlled phases and the ancilla
/// Hadamard, before any measurement. The ancilla is the top qubit.
pub fn regression_pre_projection(prep: &PreparedState, phases: &PhaseVector) -> Result<StateVector> {
    let layout = &prep.layout;
    if phases.len() != layout.cols() {
        return Err(Error::DimensionMismatch {
            expected: layout.cols(),
            found: phases.len(),
        });
    }
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut state = prep.state.with_appended_qubit([h, h])?;
    let ancilla = layout.ancilla();
    if layout.is_one_hot() {
        for l in 0..layout.rows {
            for m in 0..layout.cols() {
                let q = QubitIndex(m + l * layout.cols());
                let spec = DiagonalPhaseSpec::new(vec![(q, true)], phases.phis[m], Some(ancilla));
                state.apply_controlled_diagonal_phase(&spec)?;
            }
        }
    } else {
        for m in 0..layout.cols() {
            let controls = layout
                .column_qubits()
                .map(|q| (q, m >> q.0 & 1 == 1))
                .collect();
            let spec = DiagonalPhaseSpec::new(controls, phases.phis[m], Some(ancilla));
            state.apply_controlled_diagonal_phase(&spec)?;
        }
    }
    state.apply_hadamard(ancilla)?;
    Ok(state)
}

/// Runs the map and post-selects the ancilla on `|0>`.
///
/// Returns the unnormalized data-register state (ancilla removed) and the
/// post-selection probability, which equals its squared norm.
pub fn apply_regression_map(prep: &PreparedState, phases: &PhaseVector) -> Result<(StateVector, f64)> {
    let pre = regression_pre_projection(prep, phases)?;
    let (projected, p) = pre.project_qubit(prep.layout.ancilla(), ProjectionBasis::Z0)?;
    let data_dim = 1 << prep.layout.data_qubits();
    let psi0 = StateVector::from_amplitudes(projected.amplitudes()[..data_dim].to_vec())?;
    Ok((psi0, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{standardize, RawTable};
    use crate::encoding::{prepare_exact, Scheme};
    use crate::rng::Stream;
    use std::f64::consts::PI;

    fn quarter() -> StandardizedTable {
        StandardizedTable::from_normalized(2, 1, vec![0.5; 4]).unwrap()
    }

    fn random_std(rows: usize, features: usize, seed: u64) -> StandardizedTable {
        let mut rng = Stream::new(seed);
        let v = (0..rows * (features + 1)).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        standardize(&RawTable::new(rows, features, v).unwrap(), true).unwrap()
    }

    #[test]
    fn trivial_phases() {
        for scheme in [Scheme::OneHot, Scheme::CompactBinary] {
            let prep = prepare_exact(&quarter(), scheme).unwrap();
            let (psi, p) = apply_regression_map(&prep, &PhaseVector::new(vec![0.0, 0.0])).unwrap();
            assert!((p - 1.0).abs() < 1e-12);
            for (a, b) in psi.amplitudes().iter().zip(prep.state.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
            let (_, p) = apply_regression_map(&prep, &PhaseVector::new(vec![PI / 2.0; 2])).unwrap();
            assert!(p < 1e-12);
        }
    }

    #[test]
    fn hand_expanded_two_by_two() {
        let phases = PhaseVector::new(vec![PI, 0.0]);
        let compact = prepare_exact(&quarter(), Scheme::CompactBinary).unwrap();
        let (psi, p) = apply_regression_map(&compact, &phases).unwrap();
        let expect = [-0.5, 0.5, -0.5, 0.5];
        for i in 0..4 {
            assert!((psi.amplitude(i) - Complex64::new(expect[i], 0.0)).norm() < 1e-12);
        }
        assert!((p - 1.0).abs() < 1e-12);

        let one_hot = prepare_exact(&quarter(), Scheme::OneHot).unwrap();
        let (psi, _) = apply_regression_map(&one_hot, &phases).unwrap();
        for (j, e) in expect.iter().enumerate() {
            assert!((psi.amplitude(1 << j).re - e).abs() < 1e-12);
        }
    }

    #[test]
    fn ancilla_probability_matches_formula() {
        let std = random_std(3, 2, 4);
        let phases = PhaseVector::new(vec![2.0, 0.3, -1.1]);
        let prep = prepare_exact(&std, Scheme::CompactBinary).unwrap();
        let (_, p) = apply_regression_map(&prep, &phases).unwrap();
        let c = phases.cosines();
        let expect: f64 = (0..3)
            .flat_map(|l| (0..3).map(move |m| (l, m)))
            .map(|(l, m)| (std.get(l, m) * c[m]).powi(2))
            .sum();
        assert!((p - expect).abs() < 1e-10);
    }

    #[test]
    fn weights_from_phases() {
        let w = |phis: Vec<f64>| phases_to_weights(&PhaseVector::new(phis)).unwrap().weights[0];
        assert!((w(vec![PI, 0.0]) - 1.0).abs() < 1e-15);
        assert!((w(vec![PI, PI]) + 1.0).abs() < 1e-15);
        assert!((w(vec![PI, PI / 3.0]) - 0.5).abs() < 1e-15);
        assert!(matches!(
            phases_to_weights(&PhaseVector::new(vec![PI / 2.0, 0.0])),
            Err(Error::DegeneratePhase(_))
        ));
    }

    #[test]
    fn analytic_cost_examples() {
        let t = quarter();
        let cost = |phis: Vec<f64>| analytic_cost(&t, &PhaseVector::new(phis)).unwrap();
        assert!(cost(vec![PI, 0.0]).abs() < 1e-15);
        assert!((cost(vec![PI, PI / 2.0]) - 0.5).abs() < 1e-15);
        assert!((cost(vec![PI, PI]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let std = random_std(4, 3, 7);
        let phases = PhaseVector::new(vec![2.9, 0.4, -2.2, 1.3]);
        let g = analytic_gradient(&std, &phases).unwrap();
        let h = 1e-5;
        for m in 0..4 {
            let mut plus = phases.clone();
            let mut minus = phases.clone();
            plus.phis[m] += h;
            minus.phis[m] -= h;
            let fd = (analytic_cost(&std, &plus).unwrap() - analytic_cost(&std, &minus).unwrap()) / (2.0 * h);
            assert!((fd - g[m]).abs() <= 1e-6 * g[m].abs().max(1e-8), "m={m}: {fd} vs {}", g[m]);
        }
    }

    #[test]
    fn gradient_vanishes_at_perfect_fit() {
        let g = analytic_gradient(&quarter(), &PhaseVector::new(vec![PI, 0.0])).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn periodicity_and_common_scale() {
        let std = random_std(3, 2, 12);
        let phases = PhaseVector::new(vec![2.5, 0.7, -0.4]);
        let base = analytic_cost(&std, &phases).unwrap();
        let neg = PhaseVector::new(phases.phis.iter().map(|p| -p).collect());
        let shifted = PhaseVector::new(phases.phis.iter().map(|p| p + 2.0 * PI).collect());
        assert!((analytic_cost(&std, &neg).unwrap() - base).abs() < 1e-14);
        assert!((analytic_cost(&std, &shifted).unwrap() - base).abs() < 1e-14);

        let c = phases.cosines();
        let scaled: Vec<f64> = c.iter().map(|v| 0.3 * v).collect();
        assert!((cost_from_cosines(&std, &scaled) / base - 0.09).abs() < 1e-12);
        let w1 = cosines_to_weights(&c).unwrap().weights;
        let w2 = cosines_to_weights(&scaled).unwrap().weights;
        for (a, b) in w1.iter().zip(&w2) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
