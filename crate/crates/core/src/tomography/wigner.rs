//! Spherical harmonics and the angular Wigner function W(θ, φ) = Σ ρ_ℓ^m Y_ℓ^m(θ, φ).

use super::multipole::{multipole_decompose, MultipoleDecomposition};
use crate::density::DensityMatrix;
use crate::error::{Result, SpinError};
use crate::linalg::C64;
use serde::Serialize;
use std::f64::consts::PI;

/// Normalized associated Legendre values P̄_ℓ^m(cos θ) for 0 ≤ m ≤ ℓ ≤ `lmax`, stored as
/// `[ℓ][m]`, such that Y_ℓ^m = P̄_ℓ^m e^{imφ} with the Condon-Shortley phase.
pub fn normalized_legendre(lmax: usize, theta: f64) -> Vec<Vec<f64>> {
    let (s, x) = theta.sin_cos();
    let mut p = vec![vec![0.0; lmax + 1]; lmax + 1];
    p[0][0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=lmax {
        p[m][m] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..lmax {
        p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * x * p[m][m];
    }
    for m in 0..=lmax {
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    p
}

pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> C64 {
    if m.unsigned_abs() as usize > l {
        return C64::new(0.0, 0.0);
    }
    let p = normalized_legendre(l, theta)[l][m.unsigned_abs() as usize];
    let y = C64::from_polar(p, m.abs() as f64 * phi);
    if m >= 0 {
        y
    } else if m % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// θ nodes at Clenshaw-Curtis points (poles included) and equispaced φ nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub theta_weights: Vec<f64>,
}

impl SphereGrid {
    /// `n_theta` ≥ 3 (odd) polar nodes θ_k = πk/(n_theta-1); `n_phi` ≥ 1 azimuthal nodes 2πk/n_phi.
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 3 || n_theta % 2 == 0 || n_phi == 0 {
            return Err(SpinError::InvalidConfig("sphere grid needs an odd n_theta ≥ 3 and n_phi ≥ 1".into()));
        }
        let n = n_theta - 1;
        let thetas = (0..=n).map(|k| PI * k as f64 / n as f64).collect();
        let phis = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        Ok(SphereGrid { thetas, phis, theta_weights: clenshaw_curtis(n) })
    }

    pub fn standard() -> Self {
        Self::new(181, 360).expect("valid grid")
    }

    /// ∫ f dΩ for values laid out as `[theta][phi]`.
    pub fn integrate(&self, values: &[Vec<f64>]) -> f64 {
        let dphi = 2.0 * PI / self.phis.len() as f64;
        values.iter().zip(&self.theta_weights).map(|(row, w)| w * dphi * row.iter().sum::<f64>()).sum()
    }
}

/// Weights for ∫_{-1}^{1} f(x) dx at x_k = cos(πk/n), n even.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let ck = if k == 0 || k == n { 1.0 } else { 2.0 };
            let mut s = 0.0;
            for j in 1..=n / 2 {
                let bj = if 2 * j == n { 1.0 } else { 2.0 };
                s += bj / (4.0 * (j * j) as f64 - 1.0) * (2.0 * PI * (j * k) as f64 / n as f64).cos();
            }
            ck / n as f64 * (1.0 - s)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerField {
    pub grid: SphereGrid,
    /// W at `[theta][phi]`.
    pub values: Vec<Vec<f64>>,
    /// Largest |Im W| encountered before taking the real part.
    pub imaginary_residue: f64,
}

impl WignerField {
    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// (θ, φ) of the largest value.
    pub fn argmax(&self) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for (a, row) in self.values.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if v > best.0 {
                    best = (v, a, b);
                }
            }
        }
        (self.grid.thetas[best.1], self.grid.phis[best.2])
    }
}

pub fn wigner_from_multipoles(dec: &MultipoleDecomposition, grid: &SphereGrid) -> WignerField {
    let lmax = dec.coefficients.len() - 1;
    let mut residue: f64 = 0.0;
    let values = grid
        .thetas
        .iter()
        .map(|&theta| {
            let p = normalized_legendre(lmax, theta);
            // radial sums a_m = Σ_ℓ ρ_ℓ^m P̄_ℓ^|m| for m = -lmax..lmax
            let a: Vec<C64> = (-(lmax as i64)..=lmax as i64)
                .map(|m| {
                    let am = m.unsigned_abs() as usize;
                    let sign = if m < 0 && am % 2 == 1 { -1.0 } else { 1.0 };
                    (am..=lmax).map(|l| dec.coefficients[l][(m + l as i64) as usize] * (sign * p[l][am])).sum()
                })
                .collect();
            grid.phis
                .iter()
                .map(|&phi| {
                    let w: C64 = a
                        .iter()
                        .enumerate()
                        .map(|(k, am)| am * C64::from_polar(1.0, (k as f64 - lmax as f64) * phi))
                        .sum();
                    residue = residue.max(w.im.abs());
                    w.re
                })
                .collect()
        })
        .collect();
    WignerField { grid: grid.clone(), values, imaginary_residue: residue }
}

pub fn wigner(rho: &DensityMatrix, grid: &SphereGrid) -> WignerField {
    wigner_from_multipoles(&multipole_decompose(rho), grid)
}
