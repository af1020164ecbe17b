//! Run configuration: one JSON document, every physical quantity with its unit in the key.

use super::HarnessError;
use crate::budget::{BudgetParameters, FieldMode, Scenario};
use crate::dephasing::{NoiseKind, NoiseModel};
use crate::dynamics::{CouplingConfig, ImperfectionConfig};
use crate::measurement::DEFAULT_LANDE_G;
use crate::spin::SpinQuantumNumber;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    /// Observed twisting rate ω.
    pub omega_rad_per_s: f64,
    pub detuning_rad_per_s: f64,
    pub include_jx4: bool,
    pub field_amplitude_tesla: f64,
    pub field_axis: [f64; 3],
    pub lande_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImperfectionSection {
    pub intensity_rms_fraction: f64,
    pub stokes_s3: f64,
    pub initial_leak_fraction: f64,
    pub pulse_rise_time_s: f64,
    pub scattering_probability: f64,
    pub ensemble_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub kind: NoiseKind,
    /// 1/e time of the coherent-state Ramsey envelope.
    pub coherence_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Points over ωt ∈ [0, 2π], endpoints included.
    pub evolve_points: usize,
    /// Points over φ ∈ [0, π/J) for equatorial and Ramsey scans.
    pub phase_points: usize,
    pub tomography_settings: usize,
    pub bootstrap_resamples: usize,
    pub kitten_wait_times_s: Vec<f64>,
    pub ramsey_wait_times_s: Vec<f64>,
    /// Wait time of the dephased Wigner snapshot.
    pub snapshot_wait_time_s: f64,
    pub monte_carlo_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub two_j: u32,
    pub coupling: CouplingSection,
    pub imperfections: ImperfectionSection,
    pub noise: NoiseSection,
    /// Atoms per measurement setting; absent means exact probabilities.
    #[serde(default)]
    pub atom_total: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub scans: ScanSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = BudgetParameters::default();
        RunConfig {
            schema_version: SCHEMA_VERSION,
            two_j: b.two_j,
            coupling: CouplingSection {
                omega_rad_per_s: b.omega,
                detuning_rad_per_s: b.detuning,
                include_jx4: true,
                field_amplitude_tesla: b.field_amplitude,
                field_axis: b.field_axis,
                lande_g: DEFAULT_LANDE_G,
            },
            imperfections: ImperfectionSection {
                intensity_rms_fraction: b.intensity_rms_fraction,
                stokes_s3: b.stokes_s3,
                initial_leak_fraction: b.initial_leak_fraction,
                pulse_rise_time_s: b.pulse_rise_time,
                scattering_probability: b.scattering_probability,
                ensemble_samples: b.ensemble_samples,
            },
            noise: NoiseSection { kind: NoiseKind::StaticGaussian, coherence_time_s: 740e-6 },
            atom_total: None,
            seed: Some(1),
            output_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
            scans: ScanSection {
                evolve_points: 201,
                phase_points: 256,
                tomography_settings: 33,
                bootstrap_resamples: 50,
                kitten_wait_times_s: (0..16).map(|k| k as f64 * 10e-6).collect(),
                ramsey_wait_times_s: (0..21).map(|k| k as f64 * 100e-6).collect(),
                snapshot_wait_time_s: 70e-6,
                monte_carlo_runs: 100_000,
            },
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.into()));
        if self.schema_version != SCHEMA_VERSION {
            return bad(&format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        self.spin()?;
        if self.needs_seed() && self.seed.is_none() {
            return bad("a seed is required when sampling or ensemble averaging is enabled");
        }
        if self.atom_total == Some(0) {
            return bad("atom_total must be positive");
        }
        let s = &self.scans;
        if s.evolve_points < 2 || s.phase_points < 16 || s.monte_carlo_runs == 0 {
            return bad("evolve_points ≥ 2, phase_points ≥ 16 and monte_carlo_runs ≥ 1 are required");
        }
        if s.bootstrap_resamples != 0 && s.bootstrap_resamples < 50 {
            return bad("bootstrap_resamples must be 0 or at least 50");
        }
        for times in [&s.kitten_wait_times_s, &s.ramsey_wait_times_s] {
            if times.len() < 3 || times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
                return bad("wait-time grids need at least 3 increasing nonnegative times");
            }
        }
        if !(s.snapshot_wait_time_s >= 0.0) {
            return bad("snapshot_wait_time_s must be nonnegative");
        }
        if !(self.coupling.omega_rad_per_s > 0.0) {
            return bad("omega_rad_per_s must be positive");
        }
        self.noise_model()?;
        let (cfg, imp) = self.ensemble_configs()?;
        cfg.validate()?;
        imp.validate()?;
        Ok(())
    }

    fn needs_seed(&self) -> bool {
        let i = &self.imperfections;
        self.atom_total.is_some() || i.intensity_rms_fraction > 0.0 || i.stokes_s3 > 0.0 || i.scattering_probability > 0.0
    }

    /// Seed in effect; commands without randomness still record 0.
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn spin(&self) -> Result<SpinQuantumNumber, HarnessError> {
        Ok(SpinQuantumNumber::from_twice(self.two_j)?)
    }

    pub fn budget_parameters(&self) -> BudgetParameters {
        let (c, i) = (&self.coupling, &self.imperfections);
        BudgetParameters {
            two_j: self.two_j,
            omega: c.omega_rad_per_s,
            field_amplitude: c.field_amplitude_tesla,
            lande_g: c.lande_g,
            field_axis: c.field_axis,
            detuning: c.detuning_rad_per_s,
            intensity_rms_fraction: i.intensity_rms_fraction,
            stokes_s3: i.stokes_s3,
            initial_leak_fraction: i.initial_leak_fraction,
            pulse_rise_time: i.pulse_rise_time_s,
            scattering_probability: i.scattering_probability,
            ensemble_samples: i.ensemble_samples,
            area_range: [0.4 * PI, 0.6 * PI],
        }
    }

    /// Every configured imperfection switched on.
    pub fn scenario(&self) -> Scenario {
        Scenario { jx4: self.coupling.include_jx4, field: FieldMode::Tilted, ..Scenario::ALL }
    }

    pub fn ensemble_configs(&self) -> Result<(CouplingConfig, ImperfectionConfig), HarnessError> {
        Ok(self.budget_parameters().configure(self.scenario())?)
    }

    pub fn noise_model(&self) -> Result<NoiseModel, HarnessError> {
        let tau = self.noise.coherence_time_s;
        let g = self.coupling.lande_g;
        Ok(match self.noise.kind {
            NoiseKind::StaticGaussian => NoiseModel::static_for_coherence_time(tau, g)?,
            NoiseKind::Markovian => NoiseModel::markovian_for_coherence_time(tau, g)?,
        })
    }

    /// SHA-256 of the canonical JSON form, ignoring where and how outputs are written.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
            map.remove("format");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}
