//! Damped least squares for small parameter vectors.

use crate::error::{Result, SpinError};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop once the relative decrease of the cost falls below this.
    pub relative_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iterations: 500, relative_tolerance: 1e-14, initial_damping: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: DVector<f64>,
    /// Σ r².
    pub cost: f64,
    pub iterations: usize,
    /// Cost after each accepted step, starting with the initial cost.
    pub history: Vec<f64>,
    /// s²(JᵀJ)⁻¹ at the optimum, with s² = cost/(n - p); None if singular.
    pub covariance: Option<DMatrix<f64>>,
}

/// Minimizes Σ r(x)² given a closure returning residuals and their Jacobian.
///
/// The damping term is λ·diag(JᵀJ) (Marquardt scaling) and only cost-decreasing steps are taken.
pub fn levenberg_marquardt<F>(mut model: F, x0: DVector<f64>, opts: &FitOptions) -> Result<FitResult>
where
    F: FnMut(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
{
    let mut x = x0;
    let (mut r, mut jac) = model(&x);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(SpinError::FitFailed("non-finite residuals at the starting point".into()));
    }
    let mut history = vec![cost];
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &x + &step;
            let (r_new, j_new) = model(&trial);
            let c_new = r_new.norm_squared();
            if c_new.is_finite() && c_new < cost {
                let decrease = (cost - c_new) / cost.max(f64::MIN_POSITIVE);
                x = trial;
                r = r_new;
                jac = j_new;
                cost = c_new;
                history.push(cost);
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if decrease < opts.relative_tolerance {
                    return Ok(finish(x, cost, iterations, history, &jac, r.len()));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || cost == 0.0 {
            break;
        }
    }
    Ok(finish(x, cost, iterations, history, &jac, r.len()))
}

fn finish(x: DVector<f64>, cost: f64, iterations: usize, history: Vec<f64>, jac: &DMatrix<f64>, n: usize) -> FitResult {
    let p = x.len();
    let covariance = if n > p {
        (jac.transpose() * jac).try_inverse().map(|inv| inv * (cost / (n - p) as f64))
    } else {
        None
    };
    FitResult { params: x, cost, iterations, history, covariance }
}

/// Fits a·sin(ωx + φ) (+ b) with fixed angular frequency ω. Returns (a, φ, σ_a, b), a ≥ 0.
pub fn fit_sine(xs: &[f64], ys: &[f64], freq: f64, offset: bool) -> Result<(f64, f64, f64, f64)> {
    let n = xs.len();
    if n < 3 || n != ys.len() {
        return Err(SpinError::InsufficientData("a sine fit needs at least three points".into()));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(SpinError::FitFailed("non-finite data".into()));
    }
    // Fourier component at the fit frequency
    let mean = if offset { ys.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let (mut s, mut c) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        s += (y - mean) * (freq * x).sin();
        c += (y - mean) * (freq * x).cos();
    }
    let (s, c) = (2.0 * s / n as f64, 2.0 * c / n as f64);
    let mut x0 = vec![(s * s + c * c).sqrt().max(1e-6), c.atan2(s)];
    if offset {
        x0.push(mean);
    }
    let p = x0.len();
    let model = |q: &DVector<f64>| {
        let mut r = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, p);
        for k in 0..n {
            let arg = freq * xs[k] + q[1];
            let (sa, ca) = arg.sin_cos();
            r[k] = q[0] * sa + if offset { q[2] } else { 0.0 } - ys[k];
            jac[(k, 0)] = sa;
            jac[(k, 1)] = q[0] * ca;
            if offset {
                jac[(k, 2)] = 1.0;
            }
        }
        (r, jac)
    };
    let fit = levenberg_marquardt(model, DVector::from_vec(x0), &FitOptions::default())?;
    let (mut a, mut phase) = (fit.params[0], fit.params[1]);
    if a < 0.0 {
        a = -a;
        phase += std::f64::consts::PI;
    }
    phase = (phase + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
    let sigma = fit.covariance.as_ref().map(|cov| cov[(0, 0)].max(0.0).sqrt()).unwrap_or(0.0);
    let off = if offset { fit.params[2] } else { 0.0 };
    Ok((a, phase, sigma, off))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SineFit {
    pub amplitude: f64,
    /// Angular frequency.
    pub freq: f64,
    pub phase: f64,
    pub offset: f64,
    pub amplitude_sigma: f64,
    pub freq_sigma: f64,
}

/// Fits a·sin(ωx + φ) (+ b) with ω free, starting from the fixed-frequency fit at `freq0`.
pub fn fit_sine_free(xs: &[f64], ys: &[f64], freq0: f64, offset: bool) -> Result<SineFit> {
    let (a0, p0, _, b0) = fit_sine(xs, ys, freq0, offset)?;
    let n = xs.len();
    // phase referenced to the middle of the data keeps it decorrelated from ω
    let xm = 0.5 * (xs[0] + xs[n - 1]);
    let mut x0 = vec![a0, freq0, p0 + freq0 * xm];
    if offset {
        x0.push(b0);
    }
    let p = x0.len();
    let model = |q: &DVector<f64>| {
        let mut r = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, p);
        for k in 0..n {
            let u = xs[k] - xm;
            let (sa, ca) = (q[1] * u + q[2]).sin_cos();
            r[k] = q[0] * sa + if offset { q[3] } else { 0.0 } - ys[k];
            jac[(k, 0)] = sa;
            jac[(k, 1)] = q[0] * ca * u;
            jac[(k, 2)] = q[0] * ca;
            if offset {
                jac[(k, 3)] = 1.0;
            }
        }
        (r, jac)
    };
    let fit = levenberg_marquardt(model, DVector::from_vec(x0), &FitOptions::default())?;
    let q = &fit.params;
    let sigma = |k: usize| fit.covariance.as_ref().map(|c| c[(k, k)].max(0.0).sqrt()).unwrap_or(0.0);
    let (mut a, mut phase) = (q[0], q[2] - q[1] * xm);
    if a < 0.0 {
        a = -a;
        phase += std::f64::consts::PI;
    }
    phase = (phase + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
    Ok(SineFit {
        amplitude: a,
        freq: q[1],
        phase,
        offset: if offset { q[3] } else { 0.0 },
        amplitude_sigma: sigma(0),
        freq_sigma: sigma(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_sine() {
        let xs: Vec<f64> = (0..40).map(|k| k as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.74 * (16.0 * x + 0.3).sin()).collect();
        let (a, p, s, _) = fit_sine(&xs, &ys, 16.0, false).unwrap();
        assert!((a - 0.74).abs() < 1e-10);
        assert!((p - 0.3).abs() < 1e-10);
        assert!(s < 1e-8);
    }

    #[test]
    fn negative_amplitude_folds_into_phase() {
        let xs: Vec<f64> = (0..40).map(|k| k as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -(16.0 * x).sin() + 2.0).collect();
        let (a, p, _, off) = fit_sine(&xs, &ys, 16.0, true).unwrap();
        assert!((a - 1.0).abs() < 1e-10);
        assert!((p.abs() - std::f64::consts::PI).abs() < 1e-9);
        assert!((off - 2.0).abs() < 1e-10);
    }

    #[test]
    fn free_frequency_is_recovered() {
        let xs: Vec<f64> = (0..200).map(|k| k as f64 * 0.002).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.9 * (16.3 * x - 1.0).sin() + 0.1).collect();
        let f = fit_sine_free(&xs, &ys, 16.0, true).unwrap();
        assert!((f.freq - 16.3).abs() < 1e-9, "{}", f.freq);
        assert!((f.amplitude - 0.9).abs() < 1e-9);
        assert!((f.phase + 1.0).abs() < 1e-9);
        assert!((f.offset - 0.1).abs() < 1e-9);
    }

    #[test]
    fn cost_history_is_monotone() {
        let xs: Vec<f64> = (0..30).map(|k| k as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (-0.7 * x).exp()).collect();
        let model = |q: &DVector<f64>| {
            let r = DVector::from_iterator(30, xs.iter().zip(&ys).map(|(x, y)| q[0] * (-q[1] * x).exp() - y));
            let j = DMatrix::from_fn(30, 2, |k, c| {
                let e = (-q[1] * xs[k]).exp();
                if c == 0 { e } else { -q[0] * xs[k] * e }
            });
            (r, j)
        };
        let fit = levenberg_marquardt(model, DVector::from_vec(vec![1.0, 0.1]), &FitOptions::default()).unwrap();
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
        assert!((fit.params[1] - 0.7).abs() < 1e-8);
    }
}
