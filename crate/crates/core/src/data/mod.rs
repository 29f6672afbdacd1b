//! Tables, standardization, digitization, synthetic data and resampling.

mod io;

pub use io::{
    load_csv, load_results_json, parse_csv, save_results_json, table_to_csv, write_csv,
    write_table_csv, ResultsDocument,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, Stream};

/// An `L x (M+1)` table, row-major, with the response in column 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    rows: usize,
    features: usize,
    values: Vec<f64>,
    names: Vec<String>,
}

fn default_names(features: usize) -> Vec<String> {
    std::iter::once("y".to_string())
        .chain((1..=features).map(|m| format!("x{m}")))
        .collect()
}

impl RawTable {
    pub fn new(rows: usize, features: usize, values: Vec<f64>) -> Result<Self> {
        if rows < 2 {
            return Err(Error::InvalidTable(format!("need at least 2 rows, got {rows}")));
        }
        if features < 1 {
            return Err(Error::InvalidTable("need at least one feature column".into()));
        }
        if values.len() != rows * (features + 1) {
            return Err(Error::DimensionMismatch {
                expected: rows * (features + 1),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTable(format!(
                "non-finite value at row {}, column {}",
                i / (features + 1),
                i % (features + 1)
            )));
        }
        Ok(Self {
            rows,
            features,
            values,
            names: default_names(features),
        })
    }

    /// Builds a table from a response column and feature columns.
    pub fn from_columns(y: &[f64], features: &[Vec<f64>]) -> Result<Self> {
        let rows = y.len();
        if let Some(bad) = features.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: bad.len(),
            });
        }
        let mut values = Vec::with_capacity(rows * (features.len() + 1));
        for l in 0..rows {
            values.push(y[l]);
            values.extend(features.iter().map(|c| c[l]));
        }
        Self::new(rows, features.len(), values)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.features + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.features + 1,
                found: names.len(),
            });
        }
        self.names = names;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn cols(&self) -> usize {
        self.features + 1
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.values[l * self.cols() + m]
    }

    pub fn row(&self, l: usize) -> &[f64] {
        let c = self.cols();
        &self.values[l * c..(l + 1) * c]
    }

    pub fn column(&self, m: usize) -> Vec<f64> {
        (0..self.rows).map(|l| self.get(l, m)).collect()
    }

    /// New table made of the given source rows, in order, repeats allowed.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.cols());
        for &i in indices {
            if i >= self.rows {
                return Err(Error::InvalidArgument(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        let mut t = Self::new(indices.len(), self.features, values)?;
        t.names = self.names.clone();
        Ok(t)
    }
}

/// Mean-centered, globally normalized table ready for amplitude encoding.
///
/// `values[l][m] = (raw[l][m] - column_means[m]) / column_scales[m]` and the
/// values have unit total energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedTable {
    rows: usize,
    features: usize,
    values: Vec<f64>,
    pub column_means: Vec<f64>,
    pub column_scales: Vec<f64>,
    /// Divisor that brought the (optionally equalized) centered table to unit energy.
    pub global_norm: f64,
    /// Mean feature energy relative to the response energy, `F / M`.
    pub variance_ratio: f64,
    /// Total feature energy relative to the response energy.
    pub f: f64,
    /// Null-model cost `1 / (1 + F)`, the response energy after normalization.
    pub c0: f64,
    pub equalized: bool,
}

fn column_energies(values: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut e = vec![0.0; cols];
    for l in 0..rows {
        for m in 0..cols {
            e[m] += values[l * cols + m].powi(2);
        }
    }
    e
}

impl StandardizedTable {
    /// Wraps values that already have unit total energy, keeping them as-is
    /// (identity means and scales). Useful for hand-built and random test
    /// tables; no centering is imposed.
    pub fn from_normalized(rows: usize, features: usize, values: Vec<f64>) -> Result<Self> {
        let cols = features + 1;
        if rows == 0 || features == 0 || values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows.max(1) * cols,
                found: values.len(),
            });
        }
        let e = column_energies(&values, rows, cols);
        let total: f64 = e.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidTable(format!(
                "total squared norm {total} is not 1"
            )));
        }
        if e[0] <= 0.0 {
            return Err(Error::ZeroVarianceColumn { column: 0 });
        }
        let f = e[1..].iter().sum::<f64>() / e[0];
        Ok(Self {
            rows,
            features,
            values,
            column_means: vec![0.0; cols],
            column_scales: vec![1.0; cols],
            global_norm: 1.0,
            variance_ratio: f / features as f64,
            f,
            c0: 1.0 / (1.0 + f),
            equalized: false,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn cols(&self) -> usize {
        self.features + 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.values[l * self.cols() + m]
    }

    pub fn row(&self, l: usize) -> &[f64] {
        let c = self.cols();
        &self.values[l * c..(l + 1) * c]
    }

    /// Converts weights fitted on this table back to the units of the raw
    /// table it was standardized from.
    pub fn to_original_weights(&self, weights: &[f64]) -> Vec<f64> {
        weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * self.column_scales[0] / self.column_scales[i + 1])
            .collect()
    }

    /// Treats these values as a raw table (for re-standardization).
    pub fn as_raw(&self) -> Result<RawTable> {
        RawTable::new(self.rows, self.features, self.values.clone())
    }
}

/// Centers every column, optionally rescales each to unit norm, then divides
/// by the global norm so the whole table has unit energy.
pub fn standardize(raw: &RawTable, equalize_columns: bool) -> Result<StandardizedTable> {
    let (rows, cols) = (raw.rows(), raw.cols());
    let means: Vec<f64> = (0..cols)
        .map(|m| (0..rows).map(|l| raw.get(l, m)).sum::<f64>() / rows as f64)
        .collect();
    let mut values: Vec<f64> = raw
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v - means[i % cols])
        .collect();

    let energies = column_energies(&values, rows, cols);
    for (m, &e) in energies.iter().enumerate() {
        // relative test: a constant column leaves only rounding residue
        let scale = (0..rows).map(|l| raw.get(l, m).abs()).fold(0.0, f64::max);
        if e <= (1e-14 * scale).powi(2) * rows as f64 || e == 0.0 {
            return Err(Error::ZeroVarianceColumn { column: m });
        }
    }

    let mut scales = vec![1.0; cols];
    if equalize_columns {
        for m in 0..cols {
            scales[m] = energies[m].sqrt();
        }
        for (i, v) in values.iter_mut().enumerate() {
            *v /= scales[i % cols];
        }
    }
    let e = column_energies(&values, rows, cols);
    let total: f64 = e.iter().sum();
    let global_norm = total.sqrt();
    for v in &mut values {
        *v /= global_norm;
    }
    for s in &mut scales {
        *s *= global_norm;
    }
    let f = e[1..].iter().sum::<f64>() / e[0];
    Ok(StandardizedTable {
        rows,
        features: raw.features(),
        values,
        column_means: means,
        column_scales: scales,
        global_norm,
        variance_ratio: f / raw.features() as f64,
        f,
        c0: 1.0 / (1.0 + f),
        equalized: equalize_columns,
    })
}

/// Signed-binary expansion of every cell: `x~ = sum_j 2^-j (-1)^bit_j`.
///
/// Cells are in row-major `(l, m)` order, `k = l (M+1) + m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitizedTable {
    pub rows: usize,
    pub features: usize,
    pub n_bits: usize,
    /// `bits[k][j]` for bit `j = 1..=n_bits` stored at index `j - 1`.
    pub bits: Vec<Vec<bool>>,
    pub delta_thetas: Vec<f64>,
    pub x_tilde: Vec<f64>,
}

impl DigitizedTable {
    pub fn cols(&self) -> usize {
        self.features + 1
    }

    pub fn cells(&self) -> usize {
        self.x_tilde.len()
    }
}

/// Greedy signed-binary digits of `x` (expected in `[-1, 1]`) and the value
/// they represent. At each step the digit is chosen to move toward the
/// remaining residual; ties (zero residual) pick the positive digit.
pub fn digitize_value(x: f64, n_bits: usize) -> (Vec<bool>, f64) {
    let mut r = x;
    let mut step = 1.0;
    let mut bits = Vec::with_capacity(n_bits);
    for _ in 0..n_bits {
        step *= 0.5;
        if r >= 0.0 {
            bits.push(false);
            r -= step;
        } else {
            bits.push(true);
            r += step;
        }
    }
    let value = signed_binary_value(&bits);
    (bits, value)
}

pub fn signed_binary_value(bits: &[bool]) -> f64 {
    let mut step = 1.0;
    bits.iter()
        .map(|&b| {
            step *= 0.5;
            if b {
                -step
            } else {
                step
            }
        })
        .sum()
}

pub fn digitize(std: &StandardizedTable, n_bits: usize) -> Result<DigitizedTable> {
    if n_bits == 0 {
        return Err(Error::InvalidArgument("need at least one bit of precision".into()));
    }
    let (bits, x_tilde) = std.values().iter().map(|&x| digitize_value(x, n_bits)).unzip();
    Ok(DigitizedTable {
        rows: std.rows(),
        features: std.features(),
        n_bits,
        bits,
        delta_thetas: (1..=n_bits).map(|j| 0.5f64.powi(j as i32)).collect(),
        x_tilde,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub features: usize,
    pub true_weights: Vec<f64>,
    pub noise_std: f64,
    pub seed: u64,
}

/// Linear synthetic data with per-row multiplicative weight noise.
///
/// For each row, in order: `M` features `x_i ~ U[-1, 1)`, then `M` normals
/// `z_i`; the row's weights are `w_i = W_i (1 + noise_std * z_i)` and the
/// response is `y = sum_i x_i w_i`. The normals are drawn even when
/// `noise_std` is zero so the feature stream does not depend on it.
pub fn generate_linear_synthetic(spec: &SyntheticSpec) -> Result<RawTable> {
    if spec.true_weights.len() != spec.features {
        return Err(Error::DimensionMismatch {
            expected: spec.features,
            found: spec.true_weights.len(),
        });
    }
    if !(spec.noise_std >= 0.0) {
        return Err(Error::InvalidArgument("noise_std must be non-negative".into()));
    }
    let mut rng = Stream::new(spec.seed);
    let cols = spec.features + 1;
    let mut values = Vec::with_capacity(spec.rows * cols);
    let mut x = vec![0.0; spec.features];
    for _ in 0..spec.rows {
        for xi in &mut x {
            *xi = rng.uniform_in(-1.0, 1.0);
        }
        let mut y = 0.0;
        for (xi, wi) in x.iter().zip(&spec.true_weights) {
            y += xi * wi * (1.0 + spec.noise_std * rng.standard_normal());
        }
        values.push(y);
        values.extend_from_slice(&x);
    }
    RawTable::new(spec.rows, spec.features, values)
}

/// Columns `x^1 .. x^max_power`.
pub fn build_power_features(x: &[f64], max_power: usize) -> Result<Vec<Vec<f64>>> {
    if max_power == 0 {
        return Err(Error::InvalidArgument("max_power must be at least 1".into()));
    }
    Ok((1..=max_power)
        .map(|p| x.iter().map(|v| v.powi(p as i32)).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapPlan {
    pub num_batches: usize,
    pub batch_size: usize,
    pub seed: u64,
}

/// Row indices for every batch. Batch `b` draws from its own stream seeded
/// with `derive_seed(plan.seed, b)`, so batches can be produced in any order.
pub fn bootstrap_indices(rows: usize, plan: &BootstrapPlan) -> Vec<Vec<usize>> {
    (0..plan.num_batches)
        .map(|b| batch_indices(rows, plan, b))
        .collect()
}

pub fn batch_indices(rows: usize, plan: &BootstrapPlan, batch: usize) -> Vec<usize> {
    let mut rng = Stream::new(derive_seed(plan.seed, batch as u64));
    (0..plan.batch_size).map(|_| rng.index_below(rows)).collect()
}

pub fn bootstrap_batches(raw: &RawTable, plan: &BootstrapPlan) -> Result<Vec<RawTable>> {
    if plan.num_batches == 0 || plan.batch_size == 0 {
        return Err(Error::InvalidArgument("bootstrap plan needs positive sizes".into()));
    }
    bootstrap_indices(raw.rows(), plan)
        .iter()
        .map(|idx| raw.select_rows(idx))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_raw(rows: usize, features: usize, seed: u64) -> RawTable {
        let mut rng = Stream::new(seed);
        let values = (0..rows * (features + 1)).map(|_| rng.uniform_in(-3.0, 5.0)).collect();
        RawTable::new(rows, features, values).unwrap()
    }

    #[test]
    fn equalized_c0_matches_column_count() {
        for (features, expect) in [(1, 0.5), (6, 1.0 / 7.0)] {
            let std = standardize(&random_raw(20, features, 3), true).unwrap();
            assert!((std.c0 - expect).abs() < 1e-12);
            assert!((std.variance_ratio - 1.0).abs() < 1e-12);
            for m in 0..=features {
                let e: f64 = (0..20).map(|l| std.get(l, m).powi(2)).sum();
                assert!((e - 1.0 / (features + 1) as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn standardized_columns_centered_and_normalized() {
        for eq in [false, true] {
            let std = standardize(&random_raw(13, 4, 9), eq).unwrap();
            for m in 0..5 {
                let s: f64 = (0..13).map(|l| std.get(l, m)).sum();
                assert!(s.abs() < 1e-10);
            }
            let total: f64 = std.values().iter().map(|v| v * v).sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!((std.f - 4.0 * std.variance_ratio).abs() < 1e-12);
            assert!((std.c0 - 1.0 / (1.0 + std.f)).abs() < 1e-12);
        }
    }

    #[test]
    fn c0_is_response_energy() {
        let std = standardize(&random_raw(10, 3, 4), false).unwrap();
        let e0: f64 = (0..10).map(|l| std.get(l, 0).powi(2)).sum();
        assert!((std.c0 - e0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_rejected_with_index() {
        let raw = RawTable::from_columns(&[1.0, 2.0, 3.0], &[vec![1.0, 2.0, 0.5], vec![7.0; 3]]).unwrap();
        assert!(matches!(standardize(&raw, true), Err(Error::ZeroVarianceColumn { column: 2 })));
    }

    #[test]
    fn original_weights_undo_scaling() {
        // y = 3 x1 - 2 x2 + 4 exactly; the fitted standardized weights map back.
        let mut rng = Stream::new(1);
        let x1: Vec<f64> = (0..30).map(|_| rng.uniform_in(0.0, 10.0)).collect();
        let x2: Vec<f64> = (0..30).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 3.0 * a - 2.0 * b + 4.0).collect();
        let raw = RawTable::from_columns(&y, &[x1, x2]).unwrap();
        let std = standardize(&raw, true).unwrap();
        // in standardized units the exact weights are s_m / s_0 times the raw ones
        let w_std = [
            3.0 * std.column_scales[1] / std.column_scales[0],
            -2.0 * std.column_scales[2] / std.column_scales[0],
        ];
        for l in 0..30 {
            let pred = w_std[0] * std.get(l, 1) + w_std[1] * std.get(l, 2);
            assert!((pred - std.get(l, 0)).abs() < 1e-12);
        }
        let back = std.to_original_weights(&w_std);
        assert!((back[0] - 3.0).abs() < 1e-12 && (back[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn standardize_idempotent() {
        for eq in [false, true] {
            let once = standardize(&random_raw(9, 2, 21), eq).unwrap();
            let twice = standardize(&once.as_raw().unwrap(), eq).unwrap();
            for (a, b) in once.values().iter().zip(twice.values()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn digitize_examples() {
        assert_eq!(digitize_value(0.5, 1), (vec![false], 0.5));
        assert_eq!(digitize_value(0.0, 2), (vec![false, true], 0.25));
        let (bits, v) = digitize_value(-0.8125, 4);
        // closest representable value by exhaustive search over all 16 patterns
        let best = (0..16u32)
            .map(|p| signed_binary_value(&(0..4).map(|j| p >> j & 1 == 1).collect::<Vec<_>>()))
            .min_by(|a, b| (a + 0.8125).abs().total_cmp(&(b + 0.8125).abs()))
            .unwrap();
        assert_eq!(v, best);
        assert_eq!(v, -0.8125);
        assert_eq!(bits, vec![true, true, true, false]);
    }

    #[test]
    fn digitize_grid_bound() {
        for n in 1..=8 {
            let bound = 0.5f64.powi(n as i32);
            for i in -1000..=1000 {
                let x = i as f64 * 1e-3;
                let (_, v) = digitize_value(x, n);
                assert!((v - x).abs() <= bound + 1e-15, "x={x} n={n}");
            }
        }
    }

    #[test]
    fn digitize_table_consistent() {
        let std = standardize(&random_raw(4, 1, 2), true).unwrap();
        let d = digitize(&std, 6).unwrap();
        assert_eq!(d.cells(), 8);
        for k in 0..8 {
            assert_eq!(d.x_tilde[k], signed_binary_value(&d.bits[k]));
            assert!((d.x_tilde[k] - std.values()[k]).abs() <= 1.0 / 64.0);
        }
        assert_eq!(d.delta_thetas, vec![0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625]);
    }

    #[test]
    fn synthetic_noise_free_is_exact() {
        let spec = SyntheticSpec {
            rows: 5,
            features: 1,
            true_weights: vec![1.0],
            noise_std: 0.0,
            seed: 3,
        };
        let t = generate_linear_synthetic(&spec).unwrap();
        assert_eq!(t.column(0), t.column(1));
        assert_eq!(t, generate_linear_synthetic(&spec).unwrap());
        for v in t.column(1) {
            assert!((-1.0..1.0).contains(&v));
        }
    }

    #[test]
    fn power_features() {
        let cols = build_power_features(&[0.5, -1.0], 4).unwrap();
        assert_eq!(cols[0], vec![0.5, -1.0]);
        assert_eq!(cols[1], vec![0.25, 1.0]);
        assert_eq!(cols[2], vec![0.125, -1.0]);
        assert_eq!(cols[3][1], 1.0);
        assert!(build_power_features(&[1.0], 0).is_err());
    }

    #[test]
    fn bootstrap_containment_and_determinism() {
        let raw = random_raw(12, 2, 5);
        let plan = BootstrapPlan {
            num_batches: 1,
            batch_size: 12,
            seed: 99,
        };
        let batches = bootstrap_batches(&raw, &plan).unwrap();
        for l in 0..12 {
            let row = batches[0].row(l);
            assert!((0..12).any(|s| raw.row(s) == row));
        }
        assert_eq!(batches, bootstrap_batches(&raw, &plan).unwrap());
    }

    #[test]
    fn bootstrap_distinct_fraction() {
        let (rows, size, n) = (50usize, 30usize, 1000usize);
        let plan = BootstrapPlan {
            num_batches: n,
            batch_size: size,
            seed: 4,
        };
        let fracs: Vec<f64> = bootstrap_indices(rows, &plan)
            .into_iter()
            .map(|mut idx| {
                idx.sort_unstable();
                idx.dedup();
                idx.len() as f64 / rows as f64
            })
            .collect();
        let mean = fracs.iter().sum::<f64>() / n as f64;
        let var = fracs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let expect = 1.0 - (1.0 - 1.0 / rows as f64).powi(size as i32);
        assert!((mean - expect).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} vs {expect}");
    }

    #[test]
    fn bootstrap_exchangeable_under_row_permutation() {
        let raw = random_raw(10, 1, 8);
        let perm: Vec<usize> = vec![3, 7, 0, 9, 1, 4, 8, 2, 6, 5];
        let permuted = raw.select_rows(&perm).unwrap();
        let plan = BootstrapPlan {
            num_batches: 5,
            batch_size: 10,
            seed: 17,
        };
        let from_permuted = bootstrap_batches(&permuted, &plan).unwrap();
        for (b, idx) in bootstrap_indices(10, &plan).iter().enumerate() {
            let mapped: Vec<usize> = idx.iter().map(|&i| perm[i]).collect();
            assert_eq!(from_permuted[b], raw.select_rows(&mapped).unwrap());
        }
    }

    proptest! {
        #[test]
        fn digitize_error_bound(x in -1.0f64..=1.0, n in 1usize..20) {
            let (bits, v) = digitize_value(x, n);
            prop_assert_eq!(bits.len(), n);
            prop_assert!((v - x).abs() <= 0.5f64.powi(n as i32) + 1e-15);
        }
    }
}
