//! Projective readout along arbitrary axes, multinomial atom-number sampling and the
//! magnetic rotation pulse that maps an equatorial axis onto z.

use crate::error::{Result, SpinError};
use crate::linalg::{c, CMatrix, C64};
use crate::rng::{stream, Domain};
use crate::spin::{Direction, QuantumState, SpinOperatorSet, SpinQuantumNumber, StateVector};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Bohr magneton over ħ, rad/(s·T).
pub const BOHR_MAGNETON_OVER_HBAR: f64 = 9.274_010_078_3e-24 / 1.054_571_817e-34;
/// Default Landé factor of the ground state.
pub const DEFAULT_LANDE_G: f64 = 1.2416;

/// Probabilities Π_m (m = -J..J) for one measurement axis, optionally with sampled counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDistribution {
    pub two_j: u32,
    pub theta: f64,
    pub phi: f64,
    pub probabilities: Vec<f64>,
    pub counts: Option<Vec<u64>>,
    pub atom_total: Option<u64>,
}

impl ProjectionDistribution {
    /// Validates nonnegativity and normalization of `probabilities`.
    pub fn new(j: SpinQuantumNumber, axis: Direction, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != j.dim() {
            return Err(SpinError::DimensionMismatch { expected: j.dim(), found: probabilities.len() });
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= -1e-12)) {
            return Err(SpinError::InvalidState("negative or non-finite probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(SpinError::InvalidState(format!("probabilities sum to {total}")));
        }
        Ok(ProjectionDistribution {
            two_j: j.two_j(),
            theta: axis.theta(),
            phi: axis.phi(),
            probabilities: probabilities.into_iter().map(|p| p.max(0.0)).collect(),
            counts: None,
            atom_total: None,
        })
    }

    /// Empirical distribution from counts.
    pub fn from_counts(j: SpinQuantumNumber, axis: Direction, counts: Vec<u64>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(SpinError::InsufficientData("no atoms counted".into()));
        }
        let probs = counts.iter().map(|&k| k as f64 / total as f64).collect();
        let mut d = Self::new(j, axis, probs)?;
        d.counts = Some(counts);
        d.atom_total = Some(total);
        Ok(d)
    }

    pub fn j(&self) -> SpinQuantumNumber {
        SpinQuantumNumber::from_twice(self.two_j).expect("validated at construction")
    }

    pub fn axis(&self) -> Direction {
        Direction::new(self.theta, self.phi).expect("validated at construction")
    }

    pub fn m_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.j().m_values()
    }

    pub fn probability(&self, m: f64) -> Result<f64> {
        Ok(self.probabilities[self.j().index_of(m)?])
    }
}

/// Rotation R(axis) taking the z basis onto the eigenbasis of n·J.
pub fn axis_rotation(j: SpinQuantumNumber, axis: Direction) -> CMatrix {
    SpinOperatorSet::new(j).axis_rotation(axis)
}

/// Born-rule probabilities of measuring n·J = m.
pub fn projection_probs<S: QuantumState + ?Sized>(state: &S, axis: Direction) -> ProjectionDistribution {
    let j = state.spin();
    let rotation = axis_rotation(j, axis);
    distribution_with_rotation(state, axis, &rotation)
}

pub(crate) fn distribution_with_rotation<S: QuantumState + ?Sized>(state: &S, axis: Direction, rotation: &CMatrix) -> ProjectionDistribution {
    let j = state.spin();
    let mut probs = state.rotated_populations(rotation);
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    ProjectionDistribution {
        two_j: j.two_j(),
        theta: axis.theta(),
        phi: axis.phi(),
        probabilities: probs,
        counts: None,
        atom_total: None,
    }
}

/// Σ (-1)^m Π_m; for half-integer J the sign (-1)^{m+J} is used.
pub fn parity(d: &ProjectionDistribution) -> f64 {
    let j = d.j();
    let integer = j.two_j() % 2 == 0;
    let offset = if integer { (j.value().round() as i64) % 2 } else { 0 };
    d.probabilities
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let exponent = k as i64 + if integer { offset } else { 0 };
            if exponent % 2 == 0 { *p } else { -*p }
        })
        .sum()
}

/// Σ m Π_m.
pub fn magnetization(d: &ProjectionDistribution) -> f64 {
    d.m_values().zip(&d.probabilities).map(|(m, p)| m * p).sum()
}

/// Σ m² Π_m - (Σ m Π_m)².
pub fn variance(d: &ProjectionDistribution) -> f64 {
    let mean = magnetization(d);
    let sq: f64 = d.m_values().zip(&d.probabilities).map(|(m, p)| m * m * p).sum();
    (sq - mean * mean).max(0.0)
}

/// Multinomial draw of `n` atoms over Π_m, via sequential conditional binomials.
pub fn sample_counts(d: &ProjectionDistribution, n: u64, seed: u64) -> Result<ProjectionDistribution> {
    sample_counts_stream(d, n, seed, 0)
}

/// As `sample_counts`, drawing from stream `index` so many settings can share one seed.
pub fn sample_counts_stream(d: &ProjectionDistribution, n: u64, seed: u64, index: u64) -> Result<ProjectionDistribution> {
    if n == 0 {
        return Err(SpinError::InvalidConfig("atom_total must be at least 1".into()));
    }
    let mut rng = stream(seed, Domain::Counts, index);
    let mut remaining = n;
    let mut rest = 1.0f64;
    let mut counts = Vec::with_capacity(d.probabilities.len());
    for (k, &p) in d.probabilities.iter().enumerate() {
        let last = k + 1 == d.probabilities.len();
        let draw = if last || remaining == 0 {
            remaining
        } else {
            let q = if rest > 0.0 { (p / rest).clamp(0.0, 1.0) } else { 0.0 };
            Binomial::new(remaining, q).map_err(|e| SpinError::InvalidState(e.to_string()))?.sample(&mut rng)
        };
        counts.push(draw);
        remaining -= draw;
        rest -= p;
    }
    ProjectionDistribution::from_counts(d.j(), d.axis(), counts)
}

/// Π_m along equatorial axes φ_k.
pub fn equatorial_scan<S: QuantumState + ?Sized>(state: &S, phis: &[f64]) -> Vec<ProjectionDistribution> {
    let ops = SpinOperatorSet::new(state.spin());
    let base = ops.axis_rotation(Direction::x());
    phis.iter()
        .map(|&phi| distribution_with_rotation(state, Direction::equatorial(phi), &equatorial_rotation(&ops, &base, phi)))
        .collect()
}

/// R(φ) = exp(-iφJz) R(x), equal to R(equatorial φ) up to phases of the basis vectors.
pub(crate) fn equatorial_rotation(ops: &SpinOperatorSet, base: &CMatrix, phi: f64) -> CMatrix {
    let mut r = base.clone();
    for (k, mut row) in r.row_iter_mut().enumerate() {
        row *= C64::from_polar(1.0, -phi * ops.j.m_of(k));
    }
    r
}

/// Non-linear Ramsey sequence: Larmor rotation by φ about z, then `second_pulse`, then
/// readout along z.
pub fn ramsey_scan(state: &StateVector, second_pulse: &CMatrix, phis: &[f64]) -> Vec<ProjectionDistribution> {
    let j = state.j();
    let ops = SpinOperatorSet::new(j);
    phis.iter()
        .map(|&phi| {
            let rotated = ops.jz.map_diagonal(|m| C64::from_polar(1.0, -phi * m.re));
            let psi = second_pulse * (state.amplitudes().component_mul(&rotated));
            let probs: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
            let total: f64 = probs.iter().sum();
            ProjectionDistribution {
                two_j: j.two_j(),
                theta: 0.0,
                phi: 0.0,
                probabilities: probs.into_iter().map(|p| p / total).collect(),
                counts: None,
                atom_total: None,
            }
        })
        .collect()
}

/// 2×2 propagator exp(-i (a·σ)/2) for a real rotation vector a.
fn su2(a: [f64; 3]) -> [[C64; 2]; 2] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if n == 0.0 {
        return [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    }
    let (s, co) = (n / 2.0).sin_cos();
    let (x, y, z) = (a[0] / n, a[1] / n, a[2] / n);
    [[c(co, -z * s), c(-y * s, -x * s)], [c(y * s, -x * s), c(co, z * s)]]
}

fn mul2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            out[i][k] = a[i][0] * b[0][k] + a[i][1] * b[1][k];
        }
    }
    out
}

/// Rotation pulse B_y(t) = B_max sin²(πt/τ) on top of a static B_z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationPulse {
    /// Peak transverse field, T.
    pub peak_field: f64,
    /// Duration τ, s.
    pub duration: f64,
    /// Static longitudinal field, T.
    pub static_bz: f64,
    pub lande_g: f64,
}

impl RotationPulse {
    const STEPS: usize = 2000;

    fn gamma(&self) -> f64 {
        BOHR_MAGNETON_OVER_HBAR * self.lande_g
    }

    /// Midpoint rotation vectors γB(t_mid)·dt of each integration step.
    fn step_vectors(&self) -> Vec<[f64; 3]> {
        let dt = self.duration / Self::STEPS as f64;
        let g = self.gamma();
        (0..Self::STEPS)
            .map(|k| {
                let t = (k as f64 + 0.5) * dt;
                let by = self.peak_field * (PI * t / self.duration).sin().powi(2);
                [0.0, g * by * dt, g * self.static_bz * dt]
            })
            .collect()
    }

    /// Total propagator in the spin-1/2 representation.
    pub fn su2(&self) -> [[C64; 2]; 2] {
        self.step_vectors().iter().fold([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]], |acc, a| mul2(&su2(*a), &acc))
    }

    /// Axis n̂ whose n̂·J is mapped onto Jz by the pulse (U† Jz U = n̂·J).
    pub fn mapped_axis(&self) -> [f64; 3] {
        let u = self.su2();
        // U† σ_z U = n·σ
        let (a, b, cc, d) = (u[0][0], u[0][1], u[1][0], u[1][1]);
        let off = a.conj() * b - cc.conj() * d;
        let (nx, ny) = (off.re, -off.im);
        let nz = a.norm_sqr() - cc.norm_sqr();
        [nx, ny, nz]
    }

    /// Full propagator for spin J by stepping with exact exponentials of each midpoint generator.
    pub fn propagator(&self, ops: &SpinOperatorSet) -> CMatrix {
        let mut u = ops.identity();
        for a in self.step_vectors() {
            let n = (a[1] * a[1] + a[2] * a[2]).sqrt();
            if n == 0.0 {
                continue;
            }
            let axis = Direction::from_vector(a).expect("nonzero");
            u = ops.rotation(axis, n) * u;
        }
        u
    }

    /// Peak field that makes the mapped axis equatorial, searched near the value giving a
    /// bare π/2 rotation.
    pub fn calibrate(duration: f64, static_bz: f64, lande_g: f64) -> Result<RotationPulse> {
        let mut pulse = RotationPulse { peak_field: 0.0, duration, static_bz, lande_g };
        let nominal = PI / (pulse.gamma() * duration);
        let nz = |b: f64| RotationPulse { peak_field: b, ..pulse }.mapped_axis()[2];
        let (mut lo, mut hi) = (0.5 * nominal, 1.5 * nominal);
        if nz(lo).signum() == nz(hi).signum() {
            return Err(SpinError::FitFailed("no equatorial mapping near a π/2 rotation".into()));
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if nz(mid).signum() == nz(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        pulse.peak_field = 0.5 * (lo + hi);
        Ok(pulse)
    }

    /// Azimuth of the mapped equatorial axis folded into (-π/2, π/2].
    pub fn mapped_azimuth(&self) -> f64 {
        let n = self.mapped_axis();
        let mut phi = n[1].atan2(n[0]);
        while phi > PI / 2.0 {
            phi -= PI;
        }
        while phi <= -PI / 2.0 {
            phi += PI;
        }
        phi
    }
}

/// Applies the rotation pulse to a state.
pub fn by_pulse_map(state: &StateVector, pulse: &RotationPulse) -> Result<StateVector> {
    if pulse.duration <= 0.0 {
        return Err(SpinError::InvalidConfig("pulse duration must be positive".into()));
    }
    let ops = SpinOperatorSet::new(state.j());
    state.apply(&pulse.propagator(&ops))
}
