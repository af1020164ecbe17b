//! Far-detuned light shift of a J → J+1 transition and the matching dipole operators.

use crate::angular::clebsch_gordan;
use crate::error::{Result, SpinError};
use crate::linalg::{c, CMatrix, C64};
use crate::spin::SpinOperatorSet;
use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightShiftParams {
    /// Natural linewidth Γ, 1/s.
    pub linewidth: f64,
    /// Resonance wavelength λ₀, m.
    pub resonance_wavelength: f64,
    /// Detuning Δ, rad/s.
    pub detuning: f64,
    /// Intensity I, W/m².
    pub intensity: f64,
    /// Polarization û (Cartesian, complex).
    pub polarization: [C64; 3],
}

impl LightShiftParams {
    pub fn validate(&self) -> Result<()> {
        let n: f64 = self.polarization.iter().map(|z| z.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-12 {
            return Err(SpinError::NonUnitPolarization(n.sqrt()));
        }
        if !(self.linewidth > 0.0 && self.resonance_wavelength > 0.0 && self.detuning != 0.0 && self.intensity >= 0.0) {
            return Err(SpinError::InvalidConfig("light-shift parameters out of range".into()));
        }
        Ok(())
    }

    pub fn resonance_angular_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.resonance_wavelength
    }

    /// V₀/ħ = 3πc²ΓI / (2ħω₀³Δ), rad/s.
    pub fn v0(&self) -> f64 {
        let w0 = self.resonance_angular_frequency();
        3.0 * PI * SPEED_OF_LIGHT.powi(2) * self.linewidth * self.intensity / (2.0 * w0.powi(3) * self.detuning) / HBAR
    }

    /// Twisting coupling ω = -V₀/((J+1)(2J+1)) for linear polarization.
    pub fn twisting_coupling(&self, j: f64) -> f64 {
        -self.v0() / ((j + 1.0) * (2.0 * j + 1.0))
    }

    /// Intensity that produces twisting coupling `omega`.
    pub fn intensity_for_coupling(&self, omega: f64, j: f64) -> f64 {
        let unit = LightShiftParams { intensity: 1.0, ..*self };
        omega / unit.twisting_coupling(j)
    }

    /// Photon scattering rate scale (Γ/Δ)V₀, 1/s; multiplies the dipole operator A.
    pub fn scattering_rate_scale(&self) -> f64 {
        self.linewidth / self.detuning * self.v0()
    }
}

/// Polarization (x̂ + iεŷ)/√(1+ε²).
pub fn elliptical_polarization(epsilon: f64) -> [C64; 3] {
    let n = (1.0 + epsilon * epsilon).sqrt();
    [c(1.0 / n, 0.0), c(0.0, epsilon / n), c(0.0, 0.0)]
}

/// Symmetric tensor part ((û*·J)(û·J) + (û·J)(û*·J))/2.
pub fn tensor_part(ops: &SpinOperatorSet, u: &[C64; 3]) -> CMatrix {
    let uc = [u[0].conj(), u[1].conj(), u[2].conj()];
    let a = ops.along_complex(&uc);
    let b = ops.along_complex(u);
    (&a * &b + &b * &a) * c(0.5, 0.0)
}

/// Vector part i(2J+3)/2 (û*×û)·J, the effective magnetic field of circular light.
pub fn vector_part(ops: &SpinOperatorSet, u: &[C64; 3]) -> CMatrix {
    let uc = [u[0].conj(), u[1].conj(), u[2].conj()];
    let cross = [
        uc[1] * u[2] - uc[2] * u[1],
        uc[2] * u[0] - uc[0] * u[2],
        uc[0] * u[1] - uc[1] * u[0],
    ];
    let jv = ops.j.value();
    ops.along_complex(&cross) * (c(0.0, 1.0) * (2.0 * jv + 3.0) / 2.0)
}

/// Dimensionless bracket of the light-shift operator, V̂ = V₀ · bracket.
pub fn light_shift_bracket(ops: &SpinOperatorSet, u: &[C64; 3]) -> CMatrix {
    let jv = ops.j.value();
    let j2 = ops.casimir();
    let uc = [u[0].conj(), u[1].conj(), u[2].conj()];
    let a = ops.along_complex(&uc);
    let b = ops.along_complex(u);
    let sym = &a * &b + &b * &a;
    let cross = [
        uc[1] * u[2] - uc[2] * u[1],
        uc[2] * u[0] - uc[0] * u[2],
        uc[0] * u[1] - uc[1] * u[0],
    ];
    let p = (jv + 1.0) * (2.0 * jv + 1.0);
    ops.identity() * c((2.0 * jv + 3.0) / (3.0 * (2.0 * jv + 1.0)), 0.0)
        - ops.along_complex(&cross) * c(0.0, (2.0 * jv + 3.0) / (2.0 * p))
        - (sym * c(3.0, 0.0) - j2 * c(2.0, 0.0)) * c(1.0 / (6.0 * p), 0.0)
}

/// Light-shift operator V̂ in rad/s.
pub fn light_shift_operator(p: &LightShiftParams, ops: &SpinOperatorSet) -> Result<CMatrix> {
    p.validate()?;
    Ok(light_shift_bracket(ops, &p.polarization) * c(p.v0(), 0.0))
}

/// Spherical components u_q, q = -1, 0, 1.
fn spherical(u: &[C64; 3]) -> [C64; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [(u[0] - c(0.0, 1.0) * u[1]) * s, u[2], -(u[0] + c(0.0, 1.0) * u[1]) * s]
}

/// Dipole components D_q (q = -1, 0, 1) mapping the J manifold onto J+1:
/// ⟨J+1 m'|D_q|J m⟩ = ⟨J m; 1 q|J+1 m'⟩.
pub fn dipole_components(ops: &SpinOperatorSet) -> [CMatrix; 3] {
    let tj = ops.j.two_j() as i64;
    let d = ops.dim();
    let de = d + 2;
    let mut out = [CMatrix::zeros(de, d), CMatrix::zeros(de, d), CMatrix::zeros(de, d)];
    for (qi, tq) in [-2i64, 0, 2].into_iter().enumerate() {
        for k in 0..d {
            let tm = 2 * k as i64 - tj;
            let tmp = tm + tq;
            if tmp.abs() > tj + 2 {
                continue;
            }
            let ke = ((tmp + tj + 2) / 2) as usize;
            out[qi][(ke, k)] = c(clebsch_gordan(tj, tm, 2, tq, tj + 2, tmp), 0.0);
        }
    }
    out
}

/// Excitation operator û·d = Σ_q (-1)^q u_q D_{-q}.
pub fn excitation_operator(ops: &SpinOperatorSet, u: &[C64; 3]) -> CMatrix {
    let uq = spherical(u);
    let dq = dipole_components(ops);
    // index 0 ↔ q=-1, 2 ↔ q=+1
    &dq[2] * (-uq[0]) + &dq[1] * uq[1] - &dq[0] * uq[2]
}

/// Jump operators √rate · D_q† (û·d) for the three decay polarizations.
pub fn jump_operators(ops: &SpinOperatorSet, u: &[C64; 3], rate: f64) -> Vec<CMatrix> {
    let exc = excitation_operator(ops, u);
    let s = c(rate.max(0.0).sqrt(), 0.0);
    dipole_components(ops).iter().map(|dq| dq.adjoint() * &exc * s).collect()
}
