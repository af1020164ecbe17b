//! Time evolution under the one-axis-twisting Hamiltonian with a Larmor term,
//! analytic moment formulas, and the imperfect-ensemble model.

pub mod ensemble;
pub mod light_shift;
pub mod mcwf;

pub use ensemble::{ensemble_evolve, EnsembleEvolution, ImperfectionConfig, PulseShape};
pub use light_shift::{light_shift_operator, LightShiftParams};
pub use mcwf::{mcwf_scattering, ScatteringModel};

use crate::error::{Result, SpinError};
use crate::linalg::{c, CMatrix, CVector, HermitianEigen, C64};
use crate::spin::{Direction, SpinOperatorSet, SpinQuantumNumber, StateVector};

/// Couplings of the Hamiltonian H = ω_L b̂·J + ω Jx² (+ optional Jx⁴ correction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    /// Non-linear coupling ω, rad/s.
    pub omega: f64,
    /// Larmor frequency ω_L, rad/s.
    pub omega_larmor: f64,
    pub field_axis: Direction,
    /// Light detuning Δ, rad/s. Only used by the Jx⁴ correction.
    pub detuning: f64,
    pub include_jx4: bool,
}

impl CouplingConfig {
    /// Pure one-axis twisting with coupling ω.
    pub fn twisting(omega: f64) -> Self {
        CouplingConfig { omega, omega_larmor: 0.0, field_axis: Direction::z(), detuning: 0.0, include_jx4: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || self.omega < 0.0 || !self.omega_larmor.is_finite() {
            return Err(SpinError::InvalidConfig("couplings must be finite and omega nonnegative".into()));
        }
        if self.include_jx4 && !(self.detuning.is_finite() && self.detuning != 0.0) {
            return Err(SpinError::InvalidConfig("the Jx^4 correction needs a nonzero detuning".into()));
        }
        Ok(())
    }
}

/// Bare coupling ω_b whose Jx²-renormalized value ω_b + (2J²+3J+1)ω_b²/Δ equals `omega_eff`.
pub fn bare_coupling(omega_eff: f64, detuning: f64, j: SpinQuantumNumber) -> Result<f64> {
    let jv = j.value();
    let a = (2.0 * jv * jv + 3.0 * jv + 1.0) / detuning;
    if a == 0.0 {
        return Ok(omega_eff);
    }
    let disc = 1.0 + 4.0 * a * omega_eff;
    if disc < 0.0 {
        return Err(SpinError::InvalidConfig("coupling too strong for the Jx^4 renormalization".into()));
    }
    // root continuously connected to ω_b = ω_eff as a → 0
    Ok(2.0 * omega_eff / (1.0 + disc.sqrt()))
}

/// Light-induced part ω·S + ω²/Δ·[(2J²+3J+1)S + S²] for a tensor operator S.
pub(crate) fn light_part(s: &CMatrix, vector: &CMatrix, omega: f64, jx4: Option<(f64, f64)>) -> CMatrix {
    let mut h = s * c(omega, 0.0) + vector * c(omega, 0.0);
    if let Some((detuning, jv)) = jx4 {
        let k = omega * omega / detuning;
        h += (s * c(2.0 * jv * jv + 3.0 * jv + 1.0, 0.0) + s * s) * c(k, 0.0);
    }
    h
}

/// H = ω_L (b̂·J) + ω Jx², plus (ω²/Δ)[(2J²+3J+1)Jx² + Jx⁴] when requested.
pub fn hamiltonian(cfg: &CouplingConfig, ops: &SpinOperatorSet) -> CMatrix {
    let jx2 = &ops.jx * &ops.jx;
    let zero = CMatrix::zeros(ops.dim(), ops.dim());
    let jx4 = cfg.include_jx4.then_some((cfg.detuning, ops.j.value()));
    ops.along(cfg.field_axis) * c(cfg.omega_larmor, 0.0) + light_part(&jx2, &zero, cfg.omega, jx4)
}

/// exp(-iHt)|ψ⟩.
pub fn evolve(state: &StateVector, h: &CMatrix, t: f64) -> Result<StateVector> {
    if h.nrows() != state.dim() {
        return Err(SpinError::DimensionMismatch { expected: state.dim(), found: h.nrows() });
    }
    let eig = HermitianEigen::new(h);
    let out = eig.evolve_coords(&eig.to_eigenbasis(state.amplitudes()), t);
    Ok(StateVector::from_raw(state.j(), out))
}

/// Reusable propagator for one Hamiltonian evaluated at many times.
#[derive(Debug, Clone)]
pub struct Propagator {
    j: SpinQuantumNumber,
    eig: HermitianEigen,
}

impl Propagator {
    pub fn new(j: SpinQuantumNumber, h: &CMatrix) -> Self {
        Propagator { j, eig: HermitianEigen::new(h) }
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> StateVector {
        StateVector::from_raw(self.j, self.eig.evolve_coords(&self.eig.to_eigenbasis(state.amplitudes()), t))
    }

    pub fn matrix(&self, t: f64) -> CMatrix {
        self.eig.propagator(t)
    }
}

fn ln_factorial(n: i64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Wigner small-d element d^J_{m'm}(β) = ⟨m'|exp(-iβJy)|m⟩ from the explicit sum.
pub fn wigner_small_d(j: SpinQuantumNumber, m_prime: f64, m: f64, beta: f64) -> f64 {
    let tj = j.two_j() as i64;
    let a = ((j.value() + m_prime).round()) as i64; // j + m'
    let b = ((j.value() + m).round()) as i64; // j + m
    let jpm_p = a;
    let jmm_p = tj - a;
    let jpm = b;
    let jmm = tj - b;
    let diff = a - b; // m' - m
    let (s, co) = (beta / 2.0).sin_cos();
    let pre = 0.5 * (ln_factorial(jpm_p) + ln_factorial(jmm_p) + ln_factorial(jpm) + ln_factorial(jmm));
    let kmin = 0.max(-diff);
    let kmax = jpm.min(jmm_p);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let ln_den = ln_factorial(jpm - k) + ln_factorial(k) + ln_factorial(jmm_p - k) + ln_factorial(k + diff);
        let pc = (tj - 2 * k - diff) as i32;
        let ps = (2 * k + diff) as i32;
        let sign = if (k + diff) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (pre - ln_den).exp() * co.powi(pc) * s.powi(ps);
    }
    sum
}

/// Closed-form twisted state from |-J⟩_z: Σ_m e^{-i m² ωt} ⟨m_x|-J_z⟩ |m⟩_x, built from
/// Wigner d-matrix elements rather than a numerical exponential.
pub fn oat_closed_form(j: SpinQuantumNumber, omega_t: f64) -> StateVector {
    let d = j.dim();
    let jv = j.value();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut amps = CVector::zeros(d);
    for m in j.m_values() {
        let weight = wigner_small_d(j, -jv, m, half_pi) * C64::from_polar(1.0, -m * m * omega_t);
        for (kz, mp) in j.m_values().enumerate() {
            amps[kz] += weight * wigner_small_d(j, mp, m, half_pi);
        }
    }
    StateVector::from_raw(j, amps)
}

/// Ideal kitten (|-J⟩ + i|J⟩)/√2 up to global phase.
pub fn kitten_state(j: SpinQuantumNumber) -> StateVector {
    let mut a = CVector::zeros(j.dim());
    a[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    a[j.dim() - 1] = c(0.0, std::f64::consts::FRAC_1_SQRT_2);
    StateVector::from_raw(j, a)
}

/// Revival state at ωt = nπ/2 from |-J⟩_z, for integer J.
///
/// Odd n gives (e^{-inπ/4}|-J⟩ + (-1)^J e^{inπ/4}|J⟩)/√2; even n returns to |-J⟩ or flips to |J⟩.
pub fn revival_state(j: SpinQuantumNumber, n: u32) -> Result<StateVector> {
    if j.two_j() % 2 != 0 {
        return Err(SpinError::InvalidConfig("revival states are tabulated for integer J".into()));
    }
    let jint = j.two_j() / 2;
    let mut a = CVector::zeros(j.dim());
    let last = j.dim() - 1;
    if n % 2 == 0 {
        // exp(-iπJx²) = exp(-iπJx) for integer m, a π rotation
        let flipped = (n / 2) % 2 == 1;
        a[if flipped { last } else { 0 }] = c(1.0, 0.0);
    } else {
        let phase = std::f64::consts::FRAC_PI_4 * n as f64;
        let sign = if jint % 2 == 0 { 1.0 } else { -1.0 };
        a[0] = C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -phase);
        a[last] = C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phase) * sign;
    }
    Ok(StateVector::from_raw(j, a))
}

/// ⟨Jz⟩ under pure twisting from |-J⟩_z: -J cos^{2J-1}(ωt).
pub fn analytic_mz(j: SpinQuantumNumber, omega_t: f64) -> f64 {
    -j.value() * omega_t.cos().powi(j.two_j() as i32 - 1)
}

/// ΔJz² under pure twisting from |-J⟩_z.
pub fn analytic_varz(j: SpinQuantumNumber, omega_t: f64) -> f64 {
    let jv = j.value();
    let n = j.two_j() as i32;
    let first = jv * jv * (1.0 - omega_t.cos().powi(2 * (n - 1)));
    let coeff = jv * (jv - 0.5) / 2.0;
    let second = if coeff == 0.0 { 0.0 } else { coeff * (1.0 - (2.0 * omega_t).cos().powi(n - 2)) };
    first - second
}

/// Collapse time t_c with ω t_c = 1/√(2J).
pub fn collapse_omega_t(j: SpinQuantumNumber) -> f64 {
    1.0 / (2.0 * j.value()).sqrt()
}

/// Short-time Gaussian approximant of ⟨Jz⟩.
pub fn gaussian_mz(j: SpinQuantumNumber, omega_t: f64) -> f64 {
    let x = omega_t / collapse_omega_t(j);
    -j.value() * (-x * x / 2.0).exp()
}

/// Short-time Gaussian approximant of ΔJz², with plateau J(J+1/2)/2.
pub fn gaussian_varz(j: SpinQuantumNumber, omega_t: f64) -> f64 {
    let jv = j.value();
    let x = omega_t / collapse_omega_t(j);
    let plateau = jv * (jv + 0.5) / 2.0;
    let mz = gaussian_mz(j, omega_t);
    let rate = if jv > 0.5 { (2.0 * jv * jv - 2.0 * jv + 1.0) / (jv * (jv - 0.5)) } else { 0.0 };
    plateau - mz * mz + plateau * (-rate * x * x).exp()
}
