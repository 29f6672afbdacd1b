//! Derivative-free Nelder-Mead minimization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    /// Stop when `f_worst - f_best` falls below this.
    pub tolerance_f: f64,
    /// Stop when every vertex lies within this distance (max norm) of the best.
    pub tolerance_x: f64,
    pub max_iterations: usize,
    /// Initial simplex is `x0` plus `initial_scale` along each axis.
    pub initial_scale: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            tolerance_f: 1e-12,
            tolerance_x: 1e-10,
            max_iterations: 10_000,
            initial_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit before either tolerance.
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> Result<f64> {
    let v = f(x);
    if v.is_nan() {
        return Err(Error::NanObjective { point: x.to_vec() });
    }
    Ok(v)
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimizes `f` from `x0` with coefficients (reflect 1, expand 2,
/// contract 1/2, shrink 1/2). Fully deterministic.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    config: &NelderMeadConfig,
) -> Result<NelderMeadResult> {
    let n = x0.len();
    if n == 0 {
        let value = eval(&mut f, x0)?;
        return Ok(NelderMeadResult {
            point: Vec::new(),
            value,
            iterations: 0,
            converged: true,
        });
    }
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += config.initial_scale;
        simplex.push(v);
    }
    let mut values = simplex.iter().map(|x| eval(&mut f, x)).collect::<Result<Vec<f64>>>()?;

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // stable sort keeps ties in insertion order
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let f_spread = values[n] - values[0];
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread < config.tolerance_f || x_spread < config.tolerance_x {
            converged = true;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = affine(&centroid, &worst, -REFLECT);
        let fr = eval(&mut f, &reflected)?;

        if fr < values[0] {
            let expanded = affine(&centroid, &reflected, EXPAND);
            let fe = eval(&mut f, &expanded)?;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (candidate, fc, accept) = if fr < values[n] {
            let outside = affine(&centroid, &reflected, CONTRACT);
            let fc = eval(&mut f, &outside)?;
            (outside, fc, fc <= fr)
        } else {
            let inside = affine(&centroid, &worst, CONTRACT);
            let fc = eval(&mut f, &inside)?;
            (inside, fc, fc < values[n])
        };
        if accept {
            simplex[n] = candidate;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = affine(&best, &simplex[i], SHRINK);
            values[i] = eval(&mut f, &simplex[i])?;
        }
    }
    Ok(NelderMeadResult {
        point: simplex.swap_remove(0),
        value: values[0],
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> NelderMeadConfig {
        NelderMeadConfig {
            tolerance_f: 1e-20,
            tolerance_x: 1e-12,
            ..Default::default()
        }
    }

    #[test]
    fn sphere() {
        let r = nelder_mead(|x| x.iter().map(|v| v * v).sum(), &[1.0, 1.0], &tight()).unwrap();
        assert!(r.point.iter().all(|v| v.abs() < 1e-8), "{:?}", r.point);
        assert!(r.converged);
    }

    #[test]
    fn shifted_quadratic() {
        let f = |x: &[f64]| (x[0] - 2.0).powi(2) + 10.0 * (x[1] + 3.0).powi(2);
        let r = nelder_mead(f, &[0.0, 0.0], &tight()).unwrap();
        assert!((r.point[0] - 2.0).abs() < 1e-6 && (r.point[1] + 3.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock_with_restarts() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let mut x = vec![-1.2, 1.0];
        for _ in 0..5 {
            x = nelder_mead(f, &x, &tight()).unwrap().point;
        }
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] - 1.0).abs() < 1e-4, "{x:?}");
    }

    #[test]
    fn nan_is_reported_with_point() {
        let err = nelder_mead(|x| if x[0] > 0.2 { f64::NAN } else { x[0] }, &[0.0], &tight()).unwrap_err();
        match err {
            Error::NanObjective { point } => assert_eq!(point, vec![0.5]),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let cfg = NelderMeadConfig {
            max_iterations: 3,
            ..tight()
        };
        let r = nelder_mead(|x| x.iter().map(|v| v * v).sum(), &[5.0, -4.0, 3.0], &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(4) + (x[1] * x[0]).sin().powi(2);
        let a = nelder_mead(f, &[1.0, 2.0], &tight()).unwrap();
        let b = nelder_mead(f, &[1.0, 2.0], &tight()).unwrap();
        assert_eq!(a, b);
    }
}
