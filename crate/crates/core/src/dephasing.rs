//! Classical magnetic-field noise: dephasing of coherences ρ_{m,m'} and of Ramsey fringes.

use crate::density::DensityMatrix;
use crate::error::{Result, SpinError};
use crate::fit::{levenberg_marquardt, FitOptions};
use crate::linalg::{c, C64};
use crate::measurement::{BOHR_MAGNETON_OVER_HBAR, DEFAULT_LANDE_G};
use crate::rng::{stream, Domain};
use crate::spin::SpinQuantumNumber;
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Field offset b drawn once per shot, b ~ N(0, b_rms²).
    StaticGaussian,
    /// White field noise: the Larmor phase diffuses with ⟨δφ²⟩ = 2Dγ²t.
    Markovian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// b_rms in T (static) or D in T²·s (Markovian).
    pub scale: f64,
    pub lande_g: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, scale: f64, lande_g: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !(lande_g > 0.0 && lande_g.is_finite()) {
            return Err(SpinError::InvalidConfig("noise scale and Landé factor must be positive".into()));
        }
        Ok(NoiseModel { kind, scale, lande_g })
    }

    /// Static noise whose coherent-state (n = 1) 1/e time is `tau0`.
    pub fn static_for_coherence_time(tau0: f64, lande_g: f64) -> Result<Self> {
        let gamma = BOHR_MAGNETON_OVER_HBAR * lande_g;
        Self::new(NoiseKind::StaticGaussian, 2f64.sqrt() / (gamma * tau0), lande_g)
    }

    /// Markovian noise whose n = 1 1/e time is `tau0`.
    pub fn markovian_for_coherence_time(tau0: f64, lande_g: f64) -> Result<Self> {
        let gamma = BOHR_MAGNETON_OVER_HBAR * lande_g;
        Self::new(NoiseKind::Markovian, 1.0 / (gamma * gamma * tau0), lande_g)
    }

    pub fn default_lande(kind: NoiseKind, scale: f64) -> Result<Self> {
        Self::new(kind, scale, DEFAULT_LANDE_G)
    }

    /// γ = μ_B g_J/ħ in rad/(s·T).
    pub fn gyromagnetic(&self) -> f64 {
        BOHR_MAGNETON_OVER_HBAR * self.lande_g
    }

    /// Variance of the accumulated Larmor phase after time t.
    pub fn phase_variance(&self, t: f64) -> f64 {
        let g = self.gyromagnetic();
        match self.kind {
            NoiseKind::StaticGaussian => (g * self.scale * t).powi(2),
            NoiseKind::Markovian => 2.0 * self.scale * g * g * t.abs(),
        }
    }
}

/// ⟨e^{inδφ(t)}⟩: static → exp(-n²(γbt)²/2), Markovian → exp(-n²Dγ²t).
pub fn coherence_decay(n: u32, model: &NoiseModel, t: f64) -> f64 {
    (-(n as f64).powi(2) * model.phase_variance(t) / 2.0).exp()
}

/// Analytic 1/e time of coherence_decay for order n.
pub fn one_over_e_time(n: u32, model: &NoiseModel) -> Result<f64> {
    if n == 0 {
        return Err(SpinError::InvalidConfig("coherence order must be at least 1".into()));
    }
    let g = model.gyromagnetic();
    let n = n as f64;
    Ok(match model.kind {
        NoiseKind::StaticGaussian => 2f64.sqrt() / (n * g * model.scale),
        NoiseKind::Markovian => 1.0 / (n * n * model.scale * g * g),
    })
}

/// Sampled phase path δφ(t_k) for one shot.
fn phase_path(model: &NoiseModel, times: &[f64], rng: &mut impl rand::Rng) -> Vec<f64> {
    let g = model.gyromagnetic();
    match model.kind {
        NoiseKind::StaticGaussian => {
            let b: f64 = StandardNormal.sample(rng);
            times.iter().map(|t| g * model.scale * b * t).collect()
        }
        NoiseKind::Markovian => {
            let mut phi = 0.0;
            let mut last = 0.0;
            times
                .iter()
                .map(|&t| {
                    let z: f64 = StandardNormal.sample(rng);
                    phi += z * model.phase_variance(t - last).sqrt();
                    last = t;
                    phi
                })
                .collect()
        }
    }
}

/// Monte-Carlo ⟨e^{inδφ(t)}⟩ at each time, from `runs` independent phase paths.
fn simulate_phasor(model: &NoiseModel, n: u32, times: &[f64], runs: usize, seed: u64, domain: Domain) -> Vec<C64> {
    let sums = (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, domain, k);
            phase_path(model, times, &mut rng).into_iter().map(|p| C64::from_polar(1.0, n as f64 * p)).collect::<Vec<_>>()
        })
        .reduce(
            || vec![C64::new(0.0, 0.0); times.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    sums.into_iter().map(|s| s / runs as f64).collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpinError::InvalidConfig("times must be nonnegative and strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayShape {
    Exponential,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// 1/e time of A·exp(-t/τ).
    pub exponential_tau: f64,
    /// 1/e time of A·exp(-(t/τ)²).
    pub gaussian_tau: f64,
    /// m_z(t) = ⟨J cos(ω_L t + δφ)⟩ for Ramsey runs, empty otherwise.
    pub fringe: Vec<f64>,
}

impl DecayCurve {
    fn fitted(times: Vec<f64>, values: Vec<f64>, fringe: Vec<f64>) -> Result<Self> {
        let exponential_tau = fit_decay(&times, &values, DecayShape::Exponential)?;
        let gaussian_tau = fit_decay(&times, &values, DecayShape::Gaussian)?;
        Ok(DecayCurve { times, values, exponential_tau, gaussian_tau, fringe })
    }

    pub fn tau(&self, shape: DecayShape) -> f64 {
        match shape {
            DecayShape::Exponential => self.exponential_tau,
            DecayShape::Gaussian => self.gaussian_tau,
        }
    }
}

/// Least-squares 1/e time of A·f(t/τ); infinite when the data do not decay.
pub fn fit_decay(times: &[f64], values: &[f64], shape: DecayShape) -> Result<f64> {
    check_times(times)?;
    if values.len() != times.len() {
        return Err(SpinError::DimensionMismatch { expected: times.len(), found: values.len() });
    }
    let a0 = values.iter().copied().fold(0.0, f64::max);
    if a0 <= 0.0 {
        return Err(SpinError::Degenerate("no signal to fit".into()));
    }
    let last = times[times.len() - 1];
    if values.iter().all(|v| (v - a0).abs() <= 1e-12 * a0) {
        return Ok(f64::INFINITY);
    }
    let guess = times.iter().zip(values).find(|(_, v)| **v < a0 / std::f64::consts::E).map(|(t, _)| *t).unwrap_or(last);
    // parameters (A, ln τ) keep τ positive
    let model = |q: &DVector<f64>| {
        let tau = q[1].exp();
        let n = times.len();
        let mut r = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, 2);
        for k in 0..n {
            let x = times[k] / tau;
            let (f, dfdx) = match shape {
                DecayShape::Exponential => ((-x).exp(), -(-x).exp()),
                DecayShape::Gaussian => ((-x * x).exp(), -2.0 * x * (-x * x).exp()),
            };
            r[k] = q[0] * f - values[k];
            jac[(k, 0)] = f;
            jac[(k, 1)] = q[0] * dfdx * (-x);
        }
        (r, jac)
    };
    let x0 = DVector::from_vec(vec![a0, guess.max(last * 1e-6).ln()]);
    let fit = levenberg_marquardt(model, x0, &FitOptions::default())?;
    Ok(fit.params[1].exp())
}

/// Monte-Carlo Ramsey signal of a coherent state: envelope J_⊥(t) = J|⟨e^{iδφ}⟩| and fringe
/// m_z(t) = J⟨cos(ω_L t + δφ)⟩, with both decay fits.
pub fn ramsey_simulate(model: &NoiseModel, j: SpinQuantumNumber, omega_larmor: f64, times: &[f64], runs: usize, seed: u64) -> Result<DecayCurve> {
    coherence_curve(model, 1, j.value(), omega_larmor, times, runs, seed)
}

/// Monte-Carlo |⟨e^{inδφ(t)}⟩|, the decay of coherences n = m - m' apart.
pub fn coherence_simulate(model: &NoiseModel, n: u32, times: &[f64], runs: usize, seed: u64) -> Result<DecayCurve> {
    coherence_curve(model, n, 1.0, 0.0, times, runs, seed)
}

fn coherence_curve(model: &NoiseModel, n: u32, amplitude: f64, omega: f64, times: &[f64], runs: usize, seed: u64) -> Result<DecayCurve> {
    if runs == 0 {
        return Err(SpinError::InvalidConfig("at least one run is required".into()));
    }
    check_times(times)?;
    let phasors = simulate_phasor(model, n, times, runs, seed, Domain::Dephasing);
    let values = phasors.iter().map(|z| amplitude * z.norm()).collect();
    let fringe = if omega != 0.0 {
        times.iter().zip(&phasors).map(|(t, z)| amplitude * (z * C64::from_polar(1.0, omega * t)).re).collect()
    } else {
        Vec::new()
    };
    DecayCurve::fitted(times.to_vec(), values, fringe)
}

/// Noise-averaged e^{-iδφJz} ρ e^{iδφJz} after time t; populations are untouched.
pub fn kitten_dephase(rho: &DensityMatrix, model: &NoiseModel, t: f64, runs: usize, seed: u64) -> Result<DensityMatrix> {
    if runs == 0 {
        return Err(SpinError::InvalidConfig("at least one run is required".into()));
    }
    let d = rho.dim();
    // ⟨e^{-inδφ}⟩ for every separation n, sharing the same phase draws
    let phases: Vec<f64> = (0..runs as u64)
        .into_par_iter()
        .map(|k| phase_path(model, &[t], &mut stream(seed, Domain::Dephasing, k))[0])
        .collect();
    let factors: Vec<C64> = (0..d).map(|n| phases.iter().map(|p| C64::from_polar(1.0, -(n as f64) * p)).sum::<C64>() / runs as f64).collect();
    Ok(apply_factors(rho, |n| if n >= 0 { factors[n as usize] } else { factors[(-n) as usize].conj() }))
}

/// Exact noise average: ρ_{m,m'} · ⟨e^{-i(m-m')δφ}⟩.
pub fn dephase_exact(rho: &DensityMatrix, model: &NoiseModel, t: f64) -> DensityMatrix {
    apply_factors(rho, |n| c(coherence_decay(n.unsigned_abs() as u32, model, t), 0.0))
}

fn apply_factors(rho: &DensityMatrix, factor: impl Fn(i64) -> C64) -> DensityMatrix {
    let mut e = rho.elements().clone();
    for a in 0..rho.dim() {
        for b in 0..rho.dim() {
            if a != b {
                e[(a, b)] *= factor(a as i64 - b as i64);
            }
        }
    }
    DensityMatrix::from_accumulated(rho.j(), e)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub order: u32,
    pub times: Vec<f64>,
    /// max |⟨e^{inδφ(t)}⟩ - ⟨e^{iδφ(nt)}⟩| from the closed forms.
    pub analytic_max_difference: f64,
    /// Largest |difference|/standard error between independent Monte-Carlo estimates.
    pub max_z_score: f64,
    pub shots: usize,
}

/// Checks ⟨e^{inδφ(t)}⟩ = ⟨e^{iδφ(nt)}⟩ for static noise, analytically and by Monte-Carlo.
pub fn scaling_identity_check(model: &NoiseModel, order: u32, times: &[f64], shots: usize, seed: u64) -> Result<ScalingReport> {
    if model.kind != NoiseKind::StaticGaussian {
        return Err(SpinError::UnsupportedModel("the time-scaling identity holds only for static noise".into()));
    }
    check_times(times)?;
    if shots < 2 {
        return Err(SpinError::InvalidConfig("need at least two shots".into()));
    }
    let n = order as f64;
    let analytic_max_difference = times
        .iter()
        .map(|&t| (coherence_decay(order, model, t) - coherence_decay(1, model, n * t)).abs())
        .fold(0.0, f64::max);
    let scaled: Vec<f64> = times.iter().map(|t| n * t).collect();
    let lhs = cos_samples(model, order, times, shots, seed, 0);
    let rhs = cos_samples(model, 1, &scaled, shots, seed, 1);
    let max_z_score = lhs
        .iter()
        .zip(&rhs)
        .map(|((m1, v1), (m2, v2))| {
            let se = ((v1 + v2) / shots as f64).sqrt();
            if se == 0.0 {
                if (m1 - m2).abs() < 1e-12 { 0.0 } else { f64::INFINITY }
            } else {
                (m1 - m2).abs() / se
            }
        })
        .fold(0.0, f64::max);
    Ok(ScalingReport { order, times: times.to_vec(), analytic_max_difference, max_z_score, shots })
}

/// Sample mean and variance of cos(nδφ(t)) at each time, from an independent stream block.
fn cos_samples(model: &NoiseModel, n: u32, times: &[f64], shots: usize, seed: u64, block: u64) -> Vec<(f64, f64)> {
    let per_shot: Vec<Vec<f64>> = (0..shots as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, Domain::DephasingCheck, block * shots as u64 + k);
            phase_path(model, times, &mut rng).into_iter().map(|p| (n as f64 * p).cos()).collect()
        })
        .collect();
    (0..times.len())
        .map(|i| {
            let mean = per_shot.iter().map(|s| s[i]).sum::<f64>() / shots as f64;
            let var = per_shot.iter().map(|s| (s[i] - mean).powi(2)).sum::<f64>() / (shots - 1) as f64;
            (mean, var)
        })
        .collect()
}
