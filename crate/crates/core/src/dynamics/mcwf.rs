//! Monte-Carlo wave-function unraveling of off-resonant photon scattering.

use super::ensemble::jump;
use super::light_shift::{jump_operators, light_shift_operator, LightShiftParams};
use crate::density::DensityMatrix;
use crate::error::{Result, SpinError};
use crate::linalg::{add_outer, c, matvec_into, norm_sqr, CMatrix, C64};
use crate::rng::{stream, Domain};
use crate::spin::{Direction, SpinOperatorSet, StateVector};
use rand::Rng;
use rayon::prelude::*;

/// Coherent Hamiltonian plus Rayleigh/Raman jump channels of the J → J+1 line.
#[derive(Debug, Clone)]
pub struct ScatteringModel {
    pub hamiltonian: CMatrix,
    pub jumps: Vec<CMatrix>,
}

impl ScatteringModel {
    /// Light shift V̂ with jump rates set by (Γ/Δ)V₀.
    pub fn from_light(p: &LightShiftParams, ops: &SpinOperatorSet) -> Result<Self> {
        let hamiltonian = light_shift_operator(p, ops)?;
        let jumps = jump_operators(ops, &p.polarization, p.scattering_rate_scale());
        Ok(ScatteringModel { hamiltonian, jumps })
    }

    pub fn with_field(mut self, ops: &SpinOperatorSet, omega_larmor: f64, axis: Direction) -> Self {
        self.hamiltonian += ops.along(axis) * c(omega_larmor, 0.0);
        self
    }

    pub fn effective_hamiltonian(&self) -> CMatrix {
        let mut h = self.hamiltonian.clone();
        for l in &self.jumps {
            h -= l.adjoint() * l * c(0.0, 0.5);
        }
        h
    }

    /// Probability of at least one jump during `t` starting from `initial`.
    pub fn jump_probability(&self, initial: &StateVector, t: f64) -> f64 {
        let u = (self.effective_hamiltonian() * c(0.0, -t)).exp();
        1.0 - (u * initial.amplitudes()).norm_squared()
    }

    /// Rescales all jump rates so that the jump probability over `t` equals `p`.
    pub fn calibrated(&self, initial: &StateVector, t: f64, p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(SpinError::InvalidConfig(format!("jump probability {p} outside [0, 1)")));
        }
        let scaled = |f: f64| ScatteringModel {
            hamiltonian: self.hamiltonian.clone(),
            jumps: self.jumps.iter().map(|l| l * c(f.sqrt(), 0.0)).collect(),
        };
        if p == 0.0 {
            return Ok(scaled(0.0));
        }
        let base = self.jump_probability(initial, t);
        if base <= 0.0 {
            return Err(SpinError::Degenerate("model has no scattering to rescale".into()));
        }
        let (mut lo, mut hi) = (0.0, p / base * 2.0);
        while scaled(hi).jump_probability(initial, t) < p {
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if scaled(mid).jump_probability(initial, t) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(scaled(0.5 * (lo + hi)))
    }
}

/// Average of normalized quantum trajectories under `model` for duration `t`.
pub fn mcwf_scattering(initial: &StateVector, model: &ScatteringModel, t: f64, trajectories: usize, seed: u64) -> Result<DensityMatrix> {
    if trajectories == 0 {
        return Err(SpinError::InvalidConfig("at least one trajectory is required".into()));
    }
    let d = initial.dim();
    if model.hamiltonian.nrows() != d {
        return Err(SpinError::DimensionMismatch { expected: d, found: model.hamiltonian.nrows() });
    }
    let steps = ((t / super::ensemble::MAX_STEP).ceil() as usize).max(200);
    let dt = t / steps as f64;
    let step = (model.effective_hamiltonian() * c(0.0, -dt)).exp();
    let parts: Vec<CMatrix> = (0..trajectories as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, Domain::Trajectory, k);
            let mut psi: Vec<C64> = initial.amplitudes().iter().copied().collect();
            let mut scratch = vec![C64::new(0.0, 0.0); d];
            let mut threshold: f64 = rng.random();
            for _ in 0..steps {
                matvec_into(&step, &psi, &mut scratch);
                psi.copy_from_slice(&scratch);
                if norm_sqr(&psi) < threshold {
                    jump(&model.jumps, &mut psi, &mut rng, &mut scratch);
                    threshold = rng.random();
                }
            }
            let mut rho = CMatrix::zeros(d, d);
            add_outer(&mut rho, &psi, 1.0 / norm_sqr(&psi));
            rho
        })
        .collect();
    let mut total = CMatrix::zeros(d, d);
    for p in &parts {
        total += p;
    }
    Ok(DensityMatrix::from_accumulated(initial.j(), total / c(trajectories as f64, 0.0)))
}
