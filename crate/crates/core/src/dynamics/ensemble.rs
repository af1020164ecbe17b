//! Ensemble-averaged pulse model: intensity and ellipticity spread, tilted field,
//! initial-state leak, finite pulse response time and photon scattering.

use super::light_shift::{elliptical_polarization, jump_operators, tensor_part, vector_part};
use super::{bare_coupling, CouplingConfig};
use crate::density::DensityMatrix;
use crate::error::{Result, SpinError};
use crate::linalg::{add_outer, c, matvec_into, norm_sqr, CMatrix, CVector, HermitianEigen, C64};
use crate::measurement::ProjectionDistribution;
use crate::rng::{stream, Domain};
use crate::spin::{basis_state, Direction, SpinOperatorSet, SpinQuantumNumber, StateVector};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Longest integration step for time-dependent pulses, s.
pub const MAX_STEP: f64 = 1e-9;
/// Step counts are capped so dimensionless time units stay tractable.
const MAX_STEPS_PER_SEGMENT: f64 = 1e6;
/// Exponential tails are followed for this many time constants.
const TAIL_CONSTANTS: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    Square,
    /// Low-pass response with time constant τ; the light area equals that of the square pulse.
    ExponentialRise { time_constant: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImperfectionConfig {
    /// r.m.s. relative intensity spread δI/I.
    pub intensity_rms_fraction: f64,
    /// r.m.s. Stokes ellipticity s₃; the ellipticity ε has r.m.s. s₃/2.
    pub stokes_s3: f64,
    /// Field direction b̂; must be unit-norm.
    pub field_axis_components: [f64; 3],
    /// Population initially in |-J+1⟩_z.
    pub initial_leak_fraction: f64,
    /// Pulse response time constant, s; 0 means a square pulse.
    pub pulse_rise_time: f64,
    /// Photon-scattering probability over the π/2 twisting pulse.
    pub scattering_probability: f64,
    pub ensemble_samples: usize,
}

impl ImperfectionConfig {
    pub fn ideal() -> Self {
        ImperfectionConfig {
            intensity_rms_fraction: 0.0,
            stokes_s3: 0.0,
            field_axis_components: [0.0, 0.0, 1.0],
            initial_leak_fraction: 0.0,
            pulse_rise_time: 0.0,
            scattering_probability: 0.0,
            ensemble_samples: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fractions = [
            ("intensity_rms_fraction", self.intensity_rms_fraction),
            ("stokes_s3", self.stokes_s3),
            ("initial_leak_fraction", self.initial_leak_fraction),
            ("scattering_probability", self.scattering_probability),
        ];
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(SpinError::InvalidConfig(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.scattering_probability >= 1.0 {
            return Err(SpinError::InvalidConfig("scattering_probability must be below 1".into()));
        }
        Direction::from_unit_vector(self.field_axis_components, 1e-9)?;
        if !(self.pulse_rise_time >= 0.0 && self.pulse_rise_time.is_finite()) {
            return Err(SpinError::InvalidConfig("pulse_rise_time must be nonnegative".into()));
        }
        if self.ensemble_samples == 0 {
            return Err(SpinError::InvalidConfig("ensemble_samples must be at least 1".into()));
        }
        Ok(())
    }

    pub fn pulse_shape(&self) -> PulseShape {
        if self.pulse_rise_time > 0.0 {
            PulseShape::ExponentialRise { time_constant: self.pulse_rise_time }
        } else {
            PulseShape::Square
        }
    }

    fn is_random(&self) -> bool {
        self.intensity_rms_fraction > 0.0 || self.stokes_s3 > 0.0
    }
}

/// Relative intensity and ellipticity of one ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSample {
    pub intensity_factor: f64,
    pub ellipticity: f64,
}

/// Draws member `index`: truncated Gaussian intensity (±4σ), then Gaussian ellipticity.
pub fn draw_sample(imp: &ImperfectionConfig, seed: u64, index: u64) -> EnsembleSample {
    let mut rng = stream(seed, Domain::Ensemble, index);
    let sigma = imp.intensity_rms_fraction;
    let delta = loop {
        let z: f64 = StandardNormal.sample(&mut rng);
        if z.abs() <= 4.0 {
            break z * sigma;
        }
    };
    let z: f64 = StandardNormal.sample(&mut rng);
    EnsembleSample { intensity_factor: 1.0 + delta, ellipticity: z * imp.stokes_s3 / 2.0 }
}

/// Piecewise-analytic light profile s(t) with its per-step integrals of s and s².
#[derive(Debug, Clone)]
pub(crate) struct StepGrid {
    pub dt: Vec<f64>,
    pub area: Vec<f64>,
    pub area_sq: Vec<f64>,
}

impl StepGrid {
    pub fn new(shape: PulseShape, duration: f64, max_step: f64) -> Self {
        let max_step = max_step.max(duration / MAX_STEPS_PER_SEGMENT);
        let mut grid = StepGrid::empty();
        if duration <= 0.0 {
            return grid;
        }
        match shape {
            PulseShape::Square => {
                let n = (duration / max_step).ceil().max(1.0) as usize;
                let h = duration / n as f64;
                for _ in 0..n {
                    grid.push(h, h, h);
                }
            }
            PulseShape::ExponentialRise { time_constant: tau } => {
                let n = (duration / max_step).ceil().max(1.0) as usize;
                let h = duration / n as f64;
                for k in 0..n {
                    let (t0, t1) = (k as f64 * h, (k + 1) as f64 * h);
                    let (e0, e1) = ((-t0 / tau).exp(), (-t1 / tau).exp());
                    let a = h + tau * (e1 - e0);
                    let b = h + 2.0 * tau * (e1 - e0) - 0.5 * tau * (e1 * e1 - e0 * e0);
                    grid.push(h, a, b);
                }
                let top = 1.0 - (-duration / tau).exp();
                let tail = TAIL_CONSTANTS * tau;
                let max_step = max_step.max(tail / MAX_STEPS_PER_SEGMENT);
                let n = (tail / max_step).ceil().max(1.0) as usize;
                let h = tail / n as f64;
                for k in 0..n {
                    let (e0, e1) = ((-(k as f64) * h / tau).exp(), (-((k + 1) as f64) * h / tau).exp());
                    grid.push(h, top * tau * (e0 - e1), top * top * 0.5 * tau * (e0 * e0 - e1 * e1));
                }
            }
        }
        grid
    }

    pub fn empty() -> Self {
        StepGrid { dt: Vec::new(), area: Vec::new(), area_sq: Vec::new() }
    }

    fn push(&mut self, dt: f64, a: f64, b: f64) {
        self.dt.push(dt);
        self.area.push(a);
        self.area_sq.push(b);
    }

    pub fn len(&self) -> usize {
        self.dt.len()
    }

    pub fn uniform_dt(&self) -> bool {
        self.dt.windows(2).all(|w| w[0] == w[1])
    }
}

/// Light-induced generator of one member at full intensity, split into a tensor part
/// (diagonal in its own eigenbasis) and a vector part (diagonal along z).
#[derive(Debug, Clone)]
pub(crate) struct MemberLight {
    s_eig: HermitianEigen,
    omega: f64,
    /// Vector-part eigenvalues along z (the vector part is ∝ Jz for û in the xy plane).
    vector_diag: Vec<f64>,
    jx4: Option<f64>,
    renorm: f64,
    decay: Option<(f64, f64, f64)>,
    jumps: Vec<CMatrix>,
}

impl MemberLight {
    pub fn new(ops: &SpinOperatorSet, omega: f64, epsilon: f64, detuning: Option<f64>, kappa: f64) -> Self {
        let u = elliptical_polarization(epsilon);
        let s = tensor_part(ops, &u);
        let v = vector_part(ops, &u);
        let jv = ops.j.value();
        let p = (jv + 1.0) * (2.0 * jv + 1.0);
        let alpha = (2.0 * jv + 3.0) / (3.0 * (2.0 * jv + 1.0)) + jv * (jv + 1.0) / (3.0 * p);
        MemberLight {
            s_eig: HermitianEigen::new(&s),
            omega,
            vector_diag: (0..ops.dim()).map(|k| v[(k, k)].re).collect(),
            jx4: detuning.map(|d| omega * omega / d),
            renorm: 2.0 * jv * jv + 3.0 * jv + 1.0,
            decay: (kappa > 0.0).then_some((kappa, alpha, p)),
            jumps: if kappa > 0.0 { jump_operators(ops, &u, kappa) } else { Vec::new() },
        }
    }

    /// Time-independent Hermitian light Hamiltonian at full intensity.
    pub fn hamiltonian(&self) -> CMatrix {
        let s = self.s_eig.apply_fn(|l| c(l, 0.0));
        let mut h = &s * c(self.omega, 0.0);
        for (k, v) in self.vector_diag.iter().enumerate() {
            h[(k, k)] += c(self.omega * v, 0.0);
        }
        if let Some(k4) = self.jx4 {
            h += (&s * c(self.renorm, 0.0) + &s * &s) * c(k4, 0.0);
        }
        h
    }

    /// Non-Hermitian effective Hamiltonian H - iR/2 at full intensity, with R = Σ L†L.
    pub fn effective_hamiltonian(&self, field: &CMatrix) -> CMatrix {
        let mut h = self.hamiltonian() + field;
        for l in &self.jumps {
            h -= l.adjoint() * l * c(0.0, 0.5);
        }
        h
    }
}

/// Split-step propagation through a time-dependent pulse for one member.
pub(crate) struct Stepper<'a> {
    light: &'a MemberLight,
    grid: &'a StepGrid,
    field_half: &'a [CMatrix],
    field_full: &'a [CMatrix],
    // scratch
    a: Vec<C64>,
    b: Vec<C64>,
}

impl<'a> Stepper<'a> {
    pub fn new(light: &'a MemberLight, grid: &'a StepGrid, field_half: &'a [CMatrix], field_full: &'a [CMatrix]) -> Self {
        let d = light.vector_diag.len();
        Stepper { light, grid, field_half, field_full, a: vec![C64::new(0.0, 0.0); d], b: vec![C64::new(0.0, 0.0); d] }
    }

    /// Field matrices are indexed per step when dt varies, or a single shared entry.
    fn field_at<'m>(mats: &'m [CMatrix], k: usize) -> Option<&'m CMatrix> {
        match mats.len() {
            0 => None,
            1 => Some(&mats[0]),
            _ => Some(&mats[k]),
        }
    }

    /// Propagates `psi` in place; with `threshold`, performs quantum jumps whenever the
    /// squared norm drops below it. Returns the unnormalized final state.
    pub fn run(&mut self, psi: &mut [C64], mut threshold: Option<(f64, &mut ChaCha20Rng)>) {
        let d = psi.len();
        let light = self.light;
        let n = self.grid.len();
        if let Some(f) = Self::field_at(self.field_half, 0) {
            matvec_into(f, psi, &mut self.a);
            psi.copy_from_slice(&self.a);
        }
        for k in 0..n {
            let area = self.grid.area[k];
            let area_sq = self.grid.area_sq[k];
            // vector part and its decay share the z basis
            for (m, v) in light.vector_diag.iter().enumerate() {
                let mut z = c(0.0, -area * light.omega * v);
                if let Some((kappa, _, p)) = light.decay {
                    z.re += 0.5 * area * kappa * v / p;
                }
                psi[m] *= z.exp();
            }
            let vecs = &light.s_eig.vectors;
            for (col, out) in self.b.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..d {
                    acc += vecs[(r, col)].conj() * psi[r];
                }
                *out = acc;
            }
            for (col, sigma) in light.s_eig.values.iter().enumerate() {
                let mut phase = area * light.omega * sigma;
                if let Some(k4) = light.jx4 {
                    phase += area_sq * k4 * (light.renorm * sigma + sigma * sigma);
                }
                let mut z = c(0.0, -phase);
                if let Some((kappa, alpha, p)) = light.decay {
                    z.re -= 0.5 * area * kappa * (alpha - sigma / p);
                }
                self.b[col] *= z.exp();
            }
            matvec_into(vecs, &self.b, psi);
            let field = if k + 1 == n { Self::field_at(self.field_half, k) } else { Self::field_at(self.field_full, k) };
            if let Some(f) = field {
                matvec_into(f, psi, &mut self.a);
                psi.copy_from_slice(&self.a);
            }
            if let Some((r, rng)) = threshold.as_mut() {
                if norm_sqr(psi) < *r {
                    jump(&light.jumps, psi, rng, &mut self.a);
                    *r = rng.random::<f64>();
                }
            }
        }
    }
}

/// Applies one randomly selected jump and renormalizes.
pub(crate) fn jump(jumps: &[CMatrix], psi: &mut [C64], rng: &mut ChaCha20Rng, scratch: &mut [C64]) {
    let weights: Vec<f64> = jumps
        .iter()
        .map(|l| {
            matvec_into(l, psi, scratch);
            norm_sqr(scratch)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return;
    }
    let mut pick = rng.random::<f64>() * total;
    let mut chosen = jumps.len() - 1;
    for (q, w) in weights.iter().enumerate() {
        if pick < *w {
            chosen = q;
            break;
        }
        pick -= w;
    }
    matvec_into(&jumps[chosen], psi, scratch);
    let n = norm_sqr(scratch).sqrt();
    for (p, s) in psi.iter_mut().zip(scratch.iter()) {
        *p = s / n;
    }
}

enum MemberPath {
    /// Square pulse without scattering: exact eigendecomposition of the full Hamiltonian.
    Exact { eig: HermitianEigen, coords: Vec<CVector> },
    Stepped { light: MemberLight },
}

struct Member {
    path: MemberPath,
}

/// Prepared ensemble that can be evaluated at many pulse durations.
pub struct EnsembleEvolution {
    j: SpinQuantumNumber,
    shape: PulseShape,
    seed: u64,
    /// Pure initial states with their weights (main state, leak state).
    initial: Vec<(f64, StateVector)>,
    field: CMatrix,
    members: Vec<Member>,
    scattering_rate: f64,
}

impl EnsembleEvolution {
    pub fn new(initial: &StateVector, cfg: &CouplingConfig, imp: &ImperfectionConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        imp.validate()?;
        let j = initial.j();
        let ops = SpinOperatorSet::new(j);
        let axis = Direction::from_unit_vector(imp.field_axis_components, 1e-9)?;
        let field = ops.along(axis) * c(cfg.omega_larmor, 0.0);
        let detuning = cfg.include_jx4.then_some(cfg.detuning);

        let mut initial_states = vec![(1.0 - imp.initial_leak_fraction, initial.clone())];
        if imp.initial_leak_fraction > 0.0 {
            let leak = basis_state(j, -j.value() + 1.0, Direction::z())?;
            initial_states.push((imp.initial_leak_fraction, leak));
        }

        let scattering_rate = if imp.scattering_probability > 0.0 {
            calibrate_rate(&ops, initial, cfg, &field, imp.scattering_probability)?
        } else {
            0.0
        };

        let count = if imp.is_random() { imp.ensemble_samples } else { 1 };
        let exact = matches!(imp.pulse_shape(), PulseShape::Square) && scattering_rate == 0.0;
        let members: Vec<Member> = (0..count as u64)
            .into_par_iter()
            .map(|index| {
                let sample = if imp.is_random() {
                    draw_sample(imp, seed, index)
                } else {
                    EnsembleSample { intensity_factor: 1.0, ellipticity: 0.0 }
                };
                let omega = cfg.omega * sample.intensity_factor;
                let light = MemberLight::new(&ops, omega, sample.ellipticity, detuning, scattering_rate * sample.intensity_factor);
                let path = if exact {
                    let eig = HermitianEigen::new(&(light.hamiltonian() + &field));
                    let coords = initial_states.iter().map(|(_, s)| eig.to_eigenbasis(s.amplitudes())).collect();
                    MemberPath::Exact { eig, coords }
                } else {
                    MemberPath::Stepped { light }
                };
                Member { path }
            })
            .collect();

        Ok(EnsembleEvolution { j, shape: imp.pulse_shape(), seed, initial: initial_states, field, members, scattering_rate })
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    /// Calibrated scattering rate scale at nominal intensity, 1/s.
    pub fn scattering_rate(&self) -> f64 {
        self.scattering_rate
    }

    /// Ensemble-averaged density matrix after a pulse of duration `t` (the square-pulse
    /// duration with the same light area).
    pub fn state_at(&self, t: f64) -> DensityMatrix {
        let d = self.j.dim();
        let stepped = self.members.iter().any(|m| matches!(m.path, MemberPath::Stepped { .. }));
        let grid = if stepped { StepGrid::new(self.shape, t, MAX_STEP) } else { StepGrid::empty() };
        let (field_half, field_full) = self.field_steps(&grid);
        let contributions: Vec<CMatrix> = self
            .members
            .par_iter()
            .enumerate()
            .map(|(index, member)| {
                let mut rho = CMatrix::zeros(d, d);
                for (which, (w, state)) in self.initial.iter().enumerate() {
                    match &member.path {
                        MemberPath::Exact { eig, coords } => {
                            let psi = eig.evolve_coords(&coords[which], t);
                            add_outer(&mut rho, psi.as_slice(), *w);
                        }
                        MemberPath::Stepped { light } => {
                            let mut stepper = Stepper::new(light, &grid, &field_half, &field_full);
                            let stream_id = (index as u64) * 4 + which as u64;
                            conditioned_average(&mut stepper, state, self.seed, stream_id, *w, &mut rho);
                        }
                    }
                }
                rho
            })
            .collect();
        let mut total = CMatrix::zeros(d, d);
        for r in &contributions {
            total += r;
        }
        total /= c(self.members.len() as f64, 0.0);
        DensityMatrix::from_accumulated(self.j, total)
    }

    /// Non-linear Ramsey sequence on every member: pulse of duration `t`, Larmor phase φ
    /// about z, the same pulse again, then z readout. Each member sees its own light in both
    /// pulses. Needs square pulses without scattering.
    pub fn ramsey_scan(&self, t: f64, phis: &[f64]) -> Result<Vec<ProjectionDistribution>> {
        let d = self.j.dim();
        let mut propagated = Vec::with_capacity(self.members.len());
        for member in &self.members {
            let MemberPath::Exact { eig, coords } = &member.path else {
                return Err(SpinError::InvalidConfig("Ramsey scans need square pulses without scattering".into()));
            };
            let u = eig.propagator(t);
            let states: Vec<CVector> = coords.iter().map(|x| eig.evolve_coords(x, t)).collect();
            propagated.push((u, states));
        }
        let weights: Vec<f64> = self.initial.iter().map(|(w, _)| *w).collect();
        let ms: Vec<f64> = self.j.m_values().collect();
        let dists = phis
            .par_iter()
            .map(|&phi| {
                let phase: Vec<C64> = ms.iter().map(|m| C64::from_polar(1.0, -phi * m)).collect();
                let mut probs = vec![0.0; d];
                let mut rotated = vec![C64::new(0.0, 0.0); d];
                let mut out = vec![C64::new(0.0, 0.0); d];
                for (u, states) in &propagated {
                    for (psi, w) in states.iter().zip(&weights) {
                        for k in 0..d {
                            rotated[k] = psi[k] * phase[k];
                        }
                        matvec_into(u, &rotated, &mut out);
                        for k in 0..d {
                            probs[k] += w * out[k].norm_sqr();
                        }
                    }
                }
                let total: f64 = probs.iter().sum();
                probs.iter_mut().for_each(|p| *p /= total);
                ProjectionDistribution::new(self.j, Direction::z(), probs)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(dists)
    }

    fn field_steps(&self, grid: &StepGrid) -> (Vec<CMatrix>, Vec<CMatrix>) {
        if self.field.norm() == 0.0 || grid.len() == 0 {
            return (Vec::new(), Vec::new());
        }
        let eig = HermitianEigen::new(&self.field);
        if grid.uniform_dt() {
            let h = grid.dt[0];
            return (vec![eig.propagator(h / 2.0)], vec![eig.propagator(h)]);
        }
        // half step after step k and the merged half steps of k and k+1
        let half = grid.dt.iter().map(|h| eig.propagator(h / 2.0)).collect();
        let full = (0..grid.len())
            .map(|k| {
                let next = grid.dt.get(k + 1).copied().unwrap_or(grid.dt[k]);
                eig.propagator((grid.dt[k] + next) / 2.0)
            })
            .collect();
        (half, full)
    }
}

/// Adds w·E[|ψ⟩⟨ψ|] for one member: the no-jump branch exactly, plus the jump branch
/// weighted by its probability and sampled from trajectories conditioned on a jump.
fn conditioned_average(stepper: &mut Stepper, state: &StateVector, seed: u64, stream_id: u64, w: f64, rho: &mut CMatrix) {
    let mut psi: Vec<C64> = state.amplitudes().iter().copied().collect();
    stepper.run(&mut psi, None);
    let survive = norm_sqr(&psi);
    add_outer(rho, &psi, w);
    let jump_weight = 1.0 - survive;
    if stepper.light.jumps.is_empty() || jump_weight <= 1e-15 {
        return;
    }
    let mut rng = stream(seed, Domain::Trajectory, stream_id);
    let first = survive + (1.0 - survive) * rng.random::<f64>();
    let mut psi: Vec<C64> = state.amplitudes().iter().copied().collect();
    stepper.run(&mut psi, Some((first, &mut rng)));
    let n = norm_sqr(&psi);
    add_outer(rho, &psi, w * jump_weight / n);
}

/// Scattering rate scale κ (at nominal intensity) giving jump probability `p` over the
/// π/2 twisting pulse from `initial`.
fn calibrate_rate(ops: &SpinOperatorSet, initial: &StateVector, cfg: &CouplingConfig, field: &CMatrix, p: f64) -> Result<f64> {
    if cfg.omega <= 0.0 {
        return Err(SpinError::InvalidConfig("scattering calibration needs a nonzero coupling".into()));
    }
    let omega_eff = effective_coupling(cfg, ops.j);
    let t = std::f64::consts::FRAC_PI_2 / omega_eff;
    let detuning = cfg.include_jx4.then_some(cfg.detuning);
    let loss = |kappa: f64| -> f64 {
        let light = MemberLight::new(ops, cfg.omega, 0.0, detuning, kappa);
        let u = (light.effective_hamiltonian(field) * c(0.0, -t)).exp();
        1.0 - (u * initial.amplitudes()).norm_squared()
    };
    let mut hi = 1.0 / t;
    while loss(hi) < p {
        hi *= 2.0;
        if hi > 1e6 / t {
            return Err(SpinError::InvalidConfig("scattering probability cannot be reached".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if loss(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Observed twisting coupling: ω itself, or ω + (2J²+3J+1)ω²/Δ with the Jx⁴ correction.
pub fn effective_coupling(cfg: &CouplingConfig, j: SpinQuantumNumber) -> f64 {
    if cfg.include_jx4 {
        let jv = j.value();
        cfg.omega + (2.0 * jv * jv + 3.0 * jv + 1.0) * cfg.omega * cfg.omega / cfg.detuning
    } else {
        cfg.omega
    }
}

/// Coupling config whose effective twisting rate equals `omega_eff`.
pub fn with_effective_coupling(cfg: &CouplingConfig, omega_eff: f64, j: SpinQuantumNumber) -> Result<CouplingConfig> {
    let omega = if cfg.include_jx4 { bare_coupling(omega_eff, cfg.detuning, j)? } else { omega_eff };
    Ok(CouplingConfig { omega, ..*cfg })
}

/// Ensemble-averaged state after a pulse of duration `t`.
pub fn ensemble_evolve(initial: &StateVector, cfg: &CouplingConfig, imp: &ImperfectionConfig, t: f64, seed: u64) -> Result<DensityMatrix> {
    Ok(EnsembleEvolution::new(initial, cfg, imp, seed)?.state_at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, hamiltonian};
    use std::f64::consts::PI;

    fn j8() -> SpinQuantumNumber {
        SpinQuantumNumber::from_twice(16).unwrap()
    }

    fn start() -> StateVector {
        basis_state(j8(), -8.0, Direction::z()).unwrap()
    }

    fn field_cfg() -> CouplingConfig {
        CouplingConfig {
            omega: 1.0,
            omega_larmor: 0.016,
            field_axis: Direction::from_vector([0.09, -0.11, 0.98]).unwrap(),
            detuning: 0.0,
            include_jx4: false,
        }
    }

    fn tilted_imp() -> ImperfectionConfig {
        let b = Direction::from_vector([0.09, -0.11, 0.98]).unwrap().unit_vector();
        ImperfectionConfig { field_axis_components: b, ..ImperfectionConfig::ideal() }
    }

    #[test]
    fn ideal_single_member_matches_evolve() {
        let cfg = field_cfg();
        let rho = ensemble_evolve(&start(), &cfg, &tilted_imp(), PI / 2.0, 1).unwrap();
        let ops = SpinOperatorSet::new(j8());
        let psi = evolve(&start(), &hamiltonian(&cfg, &ops), PI / 2.0).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!(rho.fidelity_with_pure(&psi).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn rise_time_zero_limit_matches_square_pulse() {
        // a very fast response reproduces the square pulse
        let cfg = field_cfg();
        let mut imp = tilted_imp();
        imp.pulse_rise_time = 1e-3;
        let grid = StepGrid::new(imp.pulse_shape(), PI / 2.0, 2e-4);
        assert!((grid.area.iter().sum::<f64>() - PI / 2.0).abs() < 1e-9);
        let ops = SpinOperatorSet::new(j8());
        let light = MemberLight::new(&ops, 1.0, 0.0, None, 0.0);
        let field = ops.along(Direction::from_unit_vector(imp.field_axis_components, 1e-9).unwrap()) * c(cfg.omega_larmor, 0.0);
        let eig = HermitianEigen::new(&field);
        let half: Vec<CMatrix> = grid.dt.iter().map(|h| eig.propagator(h / 2.0)).collect();
        let full: Vec<CMatrix> = (0..grid.len())
            .map(|k| eig.propagator((grid.dt[k] + grid.dt.get(k + 1).copied().unwrap_or(grid.dt[k])) / 2.0))
            .collect();
        let mut st = Stepper::new(&light, &grid, &half, &full);
        let mut psi: Vec<C64> = start().amplitudes().iter().copied().collect();
        st.run(&mut psi, None);
        let exact = evolve(&start(), &hamiltonian(&cfg, &ops), PI / 2.0).unwrap();
        let got = StateVector::normalized(j8(), CVector::from_vec(psi)).unwrap();
        // the tail adds 16τ of free precession, so compare after undoing it
        let back = evolve(&got, &field, -16.0 * 1e-3).unwrap();
        assert!(back.fidelity(&exact).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn stepper_matches_exact_square_pulse() {
        let cfg = CouplingConfig { detuning: -400.0, include_jx4: true, ..field_cfg() };
        let ops = SpinOperatorSet::new(j8());
        let light = MemberLight::new(&ops, 1.0, 0.02, Some(-400.0), 0.0);
        let axis = Direction::from_vector([0.09, -0.11, 0.98]).unwrap();
        let field = ops.along(axis) * c(cfg.omega_larmor, 0.0);
        let grid = StepGrid::new(PulseShape::Square, PI / 2.0, 1e-3);
        let eig = HermitianEigen::new(&field);
        let h = grid.dt[0];
        let half = [eig.propagator(h / 2.0)];
        let full = [eig.propagator(h)];
        let mut st = Stepper::new(&light, &grid, &half, &full);
        let mut psi: Vec<C64> = start().amplitudes().iter().copied().collect();
        st.run(&mut psi, None);
        let exact = evolve(&start(), &(light.hamiltonian() + &field), PI / 2.0).unwrap();
        let got = StateVector::normalized(j8(), CVector::from_vec(psi)).unwrap();
        assert!(got.fidelity(&exact).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn intensity_spread_reduces_cat_coherence() {
        let cfg = CouplingConfig::twisting(1.0);
        let imp = ImperfectionConfig { intensity_rms_fraction: 0.06, ensemble_samples: 400, ..ImperfectionConfig::ideal() };
        let rho = ensemble_evolve(&start(), &cfg, &imp, PI / 2.0, 5).unwrap();
        let r = rho.coherence_ratio().unwrap();
        assert!(r < 1.0 && r > 0.5, "{r}");
    }

    #[test]
    fn ensemble_is_bit_reproducible() {
        let cfg = CouplingConfig::twisting(1.0);
        let imp = ImperfectionConfig { intensity_rms_fraction: 0.06, stokes_s3: 1e-3, ensemble_samples: 50, ..ImperfectionConfig::ideal() };
        let a = ensemble_evolve(&start(), &cfg, &imp, 1.0, 9).unwrap();
        let b = ensemble_evolve(&start(), &cfg, &imp, 1.0, 9).unwrap();
        assert_eq!(a.elements(), b.elements());
    }

    #[test]
    fn scattering_calibration_hits_target() {
        let cfg = CouplingConfig::twisting(2.0 * PI * 1.98e6);
        let imp = ImperfectionConfig { scattering_probability: 0.007, ..ImperfectionConfig::ideal() };
        let ev = EnsembleEvolution::new(&start(), &cfg, &imp, 3).unwrap();
        let t = PI / 2.0 / cfg.omega;
        let ops = SpinOperatorSet::new(j8());
        let light = MemberLight::new(&ops, cfg.omega, 0.0, None, ev.scattering_rate());
        let grid = StepGrid::new(PulseShape::Square, t, MAX_STEP);
        let mut st = Stepper::new(&light, &grid, &[], &[]);
        let mut psi: Vec<C64> = start().amplitudes().iter().copied().collect();
        st.run(&mut psi, None);
        assert!((1.0 - norm_sqr(&psi) - 0.007).abs() < 1e-5);
        let rho = ev.state_at(t);
        assert!((rho.elements().trace().re - 1.0).abs() < 1e-12);
        assert!(rho.purity() < 1.0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut imp = ImperfectionConfig::ideal();
        imp.field_axis_components = [0.09, -0.11, 0.98];
        assert!(imp.validate().is_err());
        let mut imp = ImperfectionConfig::ideal();
        imp.initial_leak_fraction = 1.5;
        assert!(imp.validate().is_err());
    }

    #[test]
    fn ensemble_ramsey_matches_pure_sequence() {
        let cfg = CouplingConfig::twisting(1.0);
        let ev = EnsembleEvolution::new(&start(), &cfg, &ImperfectionConfig::ideal(), 0).unwrap();
        let t = PI / 2.0;
        let ops = SpinOperatorSet::new(j8());
        let h = crate::dynamics::hamiltonian(&cfg, &ops);
        let kit = evolve(&start(), &h, t).unwrap();
        let u = crate::linalg::expm_hermitian(&h, t);
        let phis = [0.0, 0.05, 0.3];
        let want = crate::measurement::ramsey_scan(&kit, &u, &phis);
        let got = ev.ramsey_scan(t, &phis).unwrap();
        for (a, b) in got.iter().zip(&want) {
            for (p, q) in a.probabilities.iter().zip(&b.probabilities) {
                assert!((p - q).abs() < 1e-10);
            }
        }
        let mut imp = ImperfectionConfig::ideal();
        imp.pulse_rise_time = 1e-3;
        let stepped = EnsembleEvolution::new(&start(), &cfg, &imp, 0).unwrap();
        assert!(stepped.ramsey_scan(t, &phis).is_err());
    }
}
