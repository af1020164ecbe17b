//! Density-matrix reconstruction from z and equatorial projection data.

pub mod multipole;
pub mod wigner;

pub use multipole::{multipole_decompose, multipole_reconstruct, MultipoleDecomposition, TensorBasis};
pub use wigner::{normalized_legendre, spherical_harmonic, wigner, wigner_from_multipoles, SphereGrid, WignerField};

use crate::density::DensityMatrix;
use crate::error::{Result, SpinError};
use crate::fit::{levenberg_marquardt, FitOptions};
use crate::linalg::{c, CMatrix, HermitianEigen, C64};
use crate::measurement::{equatorial_rotation, equatorial_scan, projection_probs, sample_counts_stream, ProjectionDistribution};
use crate::metrology::{PhaseScan, Provenance};
use crate::rng::{stream, Domain};
use crate::spin::{Direction, SpinOperatorSet, SpinQuantumNumber};
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Number of equatorial settings used when none are specified.
pub const DEFAULT_EQUATORIAL_SETTINGS: usize = 33;

/// `count` equally spaced azimuths covering the half turn [φ₀, φ₀ + π).
pub fn equatorial_angles(phi0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| phi0 + PI * k as f64 / count as f64).collect()
}

#[derive(Debug, Clone)]
pub struct TomographyDataset {
    z_distribution: ProjectionDistribution,
    equatorial: PhaseScan,
    phase_corrections: Vec<f64>,
}

/// On-disk dataset layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub j: f64,
    pub z_counts: Vec<u64>,
    pub settings: Vec<SettingRecord>,
    pub atom_total: u64,
    #[serde(default)]
    pub phase_corrections: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingRecord {
    pub phi: f64,
    pub counts: Vec<u64>,
}

impl TomographyDataset {
    /// `phase_corrections` may be empty (no correction) or hold one offset per equatorial setting.
    pub fn new(z_distribution: ProjectionDistribution, equatorial: PhaseScan, phase_corrections: Vec<f64>) -> Result<Self> {
        if z_distribution.two_j != equatorial.j().two_j() {
            return Err(SpinError::InvalidConfig("z and equatorial data disagree on J".into()));
        }
        if z_distribution.theta.abs() > 1e-9 {
            return Err(SpinError::InvalidConfig("first record must be a z-axis distribution".into()));
        }
        if equatorial.distributions().iter().any(|d| (d.theta - PI / 2.0).abs() > 1e-9) {
            return Err(SpinError::InvalidConfig("settings must lie on the equator".into()));
        }
        let phis = equatorial.phis();
        if phis[phis.len() - 1] - phis[0] > PI + 1e-9 {
            return Err(SpinError::InvalidConfig("equatorial angles must lie within one half turn".into()));
        }
        let phase_corrections = if phase_corrections.is_empty() { vec![0.0; phis.len()] } else { phase_corrections };
        if phase_corrections.len() != phis.len() || phase_corrections.iter().any(|p| !p.is_finite()) {
            return Err(SpinError::InvalidConfig("need one finite phase correction per setting".into()));
        }
        Ok(TomographyDataset { z_distribution, equatorial, phase_corrections })
    }

    /// Exact (atoms = None) or multinomially sampled data for ρ.
    pub fn synthetic(rho: &DensityMatrix, phis: &[f64], atoms: Option<u64>, seed: u64) -> Result<Self> {
        let z = projection_probs(rho, Direction::z());
        let eq = equatorial_scan(rho, phis);
        let (z, eq, provenance) = match atoms {
            None => (z, eq, Provenance::Exact),
            Some(n) => {
                let z = sample_counts_stream(&z, n, seed, 0)?;
                let eq = eq.iter().enumerate().map(|(k, d)| sample_counts_stream(d, n, seed, k as u64 + 1)).collect::<Result<_>>()?;
                (z, eq, Provenance::Sampled)
            }
        };
        Self::new(z, PhaseScan::new(phis.to_vec(), eq, provenance)?, Vec::new())
    }

    pub fn from_file(file: &DatasetFile) -> Result<Self> {
        let j = SpinQuantumNumber::new(file.j)?;
        let z = ProjectionDistribution::from_counts(j, Direction::z(), file.z_counts.clone())?;
        let mut settings = file.settings.clone();
        let mut corrections = file.phase_corrections.clone();
        if !corrections.is_empty() && corrections.len() != settings.len() {
            return Err(SpinError::InvalidConfig("phase_corrections must match settings".into()));
        }
        let mut order: Vec<usize> = (0..settings.len()).collect();
        order.sort_by(|&a, &b| settings[a].phi.total_cmp(&settings[b].phi));
        settings = order.iter().map(|&k| settings[k].clone()).collect();
        if !corrections.is_empty() {
            corrections = order.iter().map(|&k| corrections[k]).collect();
        }
        let dists = settings
            .iter()
            .map(|s| ProjectionDistribution::from_counts(j, Direction::equatorial(s.phi), s.counts.clone()))
            .collect::<Result<Vec<_>>>()?;
        let scan = PhaseScan::new(settings.iter().map(|s| s.phi).collect(), dists, Provenance::Sampled)?;
        Self::new(z, scan, corrections)
    }

    /// Requires counted data.
    pub fn to_file(&self) -> Result<DatasetFile> {
        let counts = |d: &ProjectionDistribution| d.counts.clone().ok_or_else(|| SpinError::InvalidState("dataset has no counts".into()));
        Ok(DatasetFile {
            j: self.j().value(),
            z_counts: counts(&self.z_distribution)?,
            settings: self
                .equatorial
                .phis()
                .iter()
                .zip(self.equatorial.distributions())
                .map(|(&phi, d)| Ok(SettingRecord { phi, counts: counts(d)? }))
                .collect::<Result<_>>()?,
            atom_total: self.z_distribution.atom_total.unwrap_or(0),
            phase_corrections: self.phase_corrections.clone(),
        })
    }

    pub fn j(&self) -> SpinQuantumNumber {
        self.z_distribution.j()
    }

    pub fn z_distribution(&self) -> &ProjectionDistribution {
        &self.z_distribution
    }

    pub fn equatorial(&self) -> &PhaseScan {
        &self.equatorial
    }

    pub fn phase_corrections(&self) -> &[f64] {
        &self.phase_corrections
    }

    /// Measurement axes with phase corrections applied, z first.
    pub fn axes(&self) -> Vec<Direction> {
        std::iter::once(Direction::z())
            .chain(self.equatorial.phis().iter().zip(&self.phase_corrections).map(|(p, dp)| Direction::equatorial(p + dp)))
            .collect()
    }

    fn records(&self) -> impl Iterator<Item = &ProjectionDistribution> {
        std::iter::once(&self.z_distribution).chain(self.equatorial.distributions())
    }
}

/// Born-rule distributions of ρ along each axis.
pub fn forward_model(rho: &DensityMatrix, axes: &[Direction]) -> Vec<ProjectionDistribution> {
    axes.iter().map(|&a| projection_probs(rho, a)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographySettings {
    pub max_iterations: usize,
    pub relative_tolerance: f64,
}

impl Default for TomographySettings {
    fn default() -> Self {
        TomographySettings { max_iterations: 500, relative_tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct TomographyFit {
    pub density: DensityMatrix,
    /// Σ (Π_pred - Π_obs)² at the optimum.
    pub cost: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// Rank of the linear map from Hermitian ρ to the recorded probabilities.
    pub linear_rank: usize,
    pub parameter_count: usize,
    /// The data do not pin down every element; the returned ρ is one of many minimizers.
    pub under_determined: bool,
}

/// Measurement vectors and observations: one row per (setting, outcome).
struct Problem {
    d: usize,
    vectors: Vec<Vec<C64>>,
    observed: Vec<f64>,
    /// √weight per row.
    scale: Vec<f64>,
}

impl Problem {
    fn new(data: &TomographyDataset) -> Self {
        let j = data.j();
        let ops = SpinOperatorSet::new(j);
        let d = ops.dim();
        let base = ops.axis_rotation(Direction::x());
        let mut rotations = vec![CMatrix::identity(d, d)];
        for (p, dp) in data.equatorial.phis().iter().zip(&data.phase_corrections) {
            rotations.push(equatorial_rotation(&ops, &base, p + dp));
        }
        let mut vectors = Vec::new();
        let mut observed = Vec::new();
        for (r, dist) in rotations.iter().zip(data.records()) {
            for m in 0..d {
                vectors.push(r.column(m).iter().copied().collect());
                observed.push(dist.probabilities[m]);
            }
        }
        let n = observed.len();
        Problem { d, vectors, observed, scale: vec![1.0; n] }
    }

    fn parameter_count(&self) -> usize {
        self.d * self.d
    }

    /// Real design matrix of the map from Hermitian ρ (diagonal, then Re/Im of upper entries).
    fn design(&self) -> DMatrix<f64> {
        let d = self.d;
        let mut a = DMatrix::zeros(self.vectors.len(), d * d);
        for (k, v) in self.vectors.iter().enumerate() {
            let mut col = 0;
            for i in 0..d {
                a[(k, col)] = v[i].norm_sqr() * self.scale[k];
                col += 1;
            }
            for i in 0..d {
                for l in (i + 1)..d {
                    let z = v[i].conj() * v[l];
                    a[(k, col)] = 2.0 * z.re * self.scale[k];
                    a[(k, col + 1)] = -2.0 * z.im * self.scale[k];
                    col += 2;
                }
            }
        }
        a
    }

    fn hermitian_from(&self, x: &DVector<f64>) -> CMatrix {
        let d = self.d;
        let mut rho = CMatrix::zeros(d, d);
        let mut col = 0;
        for i in 0..d {
            rho[(i, i)] = c(x[col], 0.0);
            col += 1;
        }
        for i in 0..d {
            for l in (i + 1)..d {
                rho[(i, l)] = c(x[col], x[col + 1]);
                rho[(l, i)] = c(x[col], -x[col + 1]);
                col += 2;
            }
        }
        rho
    }

    /// Least-squares linear inversion projected onto density matrices, or 𝟙/d on failure.
    fn linear_start(&self) -> (CMatrix, usize) {
        let d = self.d;
        let a = self.design();
        let b = DVector::from_iterator(self.observed.len(), self.observed.iter().zip(&self.scale).map(|(o, s)| o * s));
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let tol = 1e-10 * smax.max(f64::MIN_POSITIVE);
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        let rho = svd.solve(&b, tol).ok().map(|x| self.hermitian_from(&x)).and_then(project_to_density);
        (rho.unwrap_or_else(|| CMatrix::identity(d, d) / c(d as f64, 0.0)), rank)
    }

    fn slots(&self) -> Vec<(usize, usize, bool)> {
        let mut s = Vec::with_capacity(self.d * self.d);
        for a in 0..self.d {
            s.push((a, a, false));
            for b in 0..a {
                s.push((a, b, false));
                s.push((a, b, true));
            }
        }
        s
    }

    fn lower_from(&self, slots: &[(usize, usize, bool)], x: &DVector<f64>) -> CMatrix {
        let mut l = CMatrix::zeros(self.d, self.d);
        for (p, &(a, b, imag)) in slots.iter().enumerate() {
            if imag {
                l[(a, b)].im = x[p];
            } else {
                l[(a, b)].re = x[p];
            }
        }
        l
    }

    fn params_from(&self, slots: &[(usize, usize, bool)], l: &CMatrix) -> DVector<f64> {
        DVector::from_iterator(slots.len(), slots.iter().map(|&(a, b, imag)| if imag { l[(a, b)].im } else { l[(a, b)].re }))
    }

    /// Residuals √w(Π_pred - Π_obs) and their Jacobian for ρ = L†L/Tr(L†L).
    fn residuals(&self, slots: &[(usize, usize, bool)], x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.d;
        let l = self.lower_from(slots, x);
        let t: f64 = x.norm_squared();
        let rows = self.vectors.len();
        let mut r = DVector::zeros(rows);
        let mut jac = DMatrix::zeros(rows, slots.len());
        let mut w = vec![C64::new(0.0, 0.0); d];
        for (k, v) in self.vectors.iter().enumerate() {
            for a in 0..d {
                w[a] = (0..=a).map(|b| l[(a, b)] * v[b]).sum();
            }
            let n: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            let pi = n / t;
            let s = self.scale[k];
            r[k] = s * (pi - self.observed[k]);
            for (p, &(a, b, imag)) in slots.iter().enumerate() {
                let z = w[a].conj() * v[b];
                let dn = if imag { -2.0 * z.im } else { 2.0 * z.re };
                jac[(k, p)] = s * (dn - pi * 2.0 * x[p]) / t;
            }
        }
        (r, jac)
    }

    fn solve(&self, start: &DVector<f64>, settings: &TomographySettings) -> Result<(DVector<f64>, crate::fit::FitResult)> {
        let slots = self.slots();
        let opts = FitOptions { max_iterations: settings.max_iterations, relative_tolerance: settings.relative_tolerance, initial_damping: 1e-3 };
        let fit = levenberg_marquardt(|x| self.residuals(&slots, x), start.clone(), &opts)?;
        Ok((fit.params.clone(), fit))
    }

    fn density(&self, x: &DVector<f64>, j: SpinQuantumNumber) -> DensityMatrix {
        let l = self.lower_from(&self.slots(), x);
        DensityMatrix::from_accumulated(j, l.adjoint() * l)
    }

    /// Lower-triangular L with L†L = ρ (slightly regularized so L is invertible).
    fn start_params(&self, rho: &CMatrix) -> DVector<f64> {
        let d = self.d;
        let reg = rho * c(1.0 - 1e-6, 0.0) + CMatrix::identity(d, d) * c(1e-6 / d as f64, 0.0);
        let flipped = CMatrix::from_fn(d, d, |i, k| reg[(d - 1 - i, d - 1 - k)]);
        let l = match flipped.cholesky() {
            Some(ch) => {
                let lower = ch.l();
                let upper = CMatrix::from_fn(d, d, |i, k| lower[(d - 1 - i, d - 1 - k)]);
                upper.adjoint()
            }
            None => CMatrix::identity(d, d) / c((d as f64).sqrt(), 0.0),
        };
        self.params_from(&self.slots(), &l)
    }
}

/// Hermitian matrix → nearest unit-trace PSD matrix in Frobenius norm.
fn project_to_density(h: CMatrix) -> Option<CMatrix> {
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    let eig = HermitianEigen::new(&h);
    let lambda = simplex_projection(eig.values.as_slice());
    let mut rho = CMatrix::zeros(h.nrows(), h.ncols());
    for (k, &l) in lambda.iter().enumerate() {
        if l > 0.0 {
            let v = eig.vectors.column(k);
            rho += &v * v.adjoint() * c(l, 0.0);
        }
    }
    Some(rho)
}

/// Euclidean projection onto {x ≥ 0, Σx = 1}.
fn simplex_projection(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if s - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|x| (x - shift).max(0.0)).collect()
}

pub fn fit_density_matrix(data: &TomographyDataset) -> Result<TomographyFit> {
    fit_density_matrix_with(data, &TomographySettings::default())
}

/// Least-squares fit over ρ = L†L/Tr(L†L), L lower triangular, started from the projected
/// linear inversion.
pub fn fit_density_matrix_with(data: &TomographyDataset, settings: &TomographySettings) -> Result<TomographyFit> {
    let problem = Problem::new(data);
    let (rho0, rank) = problem.linear_start();
    let start = problem.start_params(&rho0);
    let (params, fit) = problem.solve(&start, settings)?;
    let count = problem.parameter_count();
    Ok(TomographyFit {
        density: problem.density(&params, data.j()),
        cost: fit.cost,
        iterations: fit.iterations,
        history: fit.history,
        linear_rank: rank,
        parameter_count: count,
        under_determined: rank < count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapErrors {
    pub resamples: usize,
    /// Standard deviation of |ρ_{m,m'}| across resamples, Jz basis order.
    pub element_std: Vec<Vec<f64>>,
    /// Standard deviation of |ρ_{-J,J}|.
    pub extremal_coherence_std: f64,
    pub coherence_ratio_std: f64,
}

/// Random-weight bootstrap: each resample reweights every record by an independent Exp(1)
/// weight and reruns the full estimator, linear start included. Counted data are reweighted per detected
/// atom (the histogram becomes Gamma(n_m, 1) draws); probability-only data per setting.
pub fn bootstrap_errors(data: &TomographyDataset, settings: &TomographySettings, n_resamples: usize, seed: u64) -> Result<BootstrapErrors> {
    if n_resamples < 50 {
        return Err(SpinError::InvalidConfig("bootstrap needs at least 50 resamples".into()));
    }
    let base = Problem::new(data);
    let d = base.d;
    let records: Vec<&ProjectionDistribution> = data.records().collect();
    let fits: Vec<DensityMatrix> = (0..n_resamples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, Domain::Bootstrap, k);
            let mut problem = Problem { d, vectors: base.vectors.clone(), observed: base.observed.clone(), scale: base.scale.clone() };
            for (s, rec) in records.iter().enumerate() {
                let rows = s * d..(s + 1) * d;
                match &rec.counts {
                    Some(counts) => {
                        let drawn: Vec<f64> = counts
                            .iter()
                            .map(|&n| if n == 0 { 0.0 } else { Gamma::new(n as f64, 1.0).expect("positive shape").sample(&mut rng) })
                            .collect();
                        let total: f64 = drawn.iter().sum();
                        for (row, x) in rows.zip(drawn) {
                            problem.observed[row] = x / total;
                        }
                    }
                    None => {
                        let w: f64 = Exp1.sample(&mut rng);
                        for row in rows {
                            problem.scale[row] = w.sqrt();
                        }
                    }
                }
            }
            let start = problem.start_params(&problem.linear_start().0);
            problem.solve(&start, settings).map(|(x, _)| problem.density(&x, data.j()))
        })
        .collect::<Result<_>>()?;
    let n = fits.len() as f64;
    let std = |f: &dyn Fn(&DensityMatrix) -> f64| {
        let vals: Vec<f64> = fits.iter().map(f).collect();
        let mean = vals.iter().sum::<f64>() / n;
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let element_std = (0..d).map(|a| (0..d).map(|b| std(&|r: &DensityMatrix| r.elements()[(a, b)].norm())).collect()).collect();
    Ok(BootstrapErrors {
        resamples: n_resamples,
        element_std,
        extremal_coherence_std: std(&|r: &DensityMatrix| r.elements()[(0, d - 1)].norm()),
        coherence_ratio_std: std(&|r: &DensityMatrix| r.coherence_ratio().unwrap_or(0.0)),
    })
}

/// 2|ρ_{-J,J}| / (ρ_{-J,-J} + ρ_{J,J}).
pub fn coherence_ratio(rho: &DensityMatrix) -> Result<f64> {
    rho.coherence_ratio()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::kitten_state;
    use crate::spin::basis_state;

    fn j8() -> SpinQuantumNumber {
        SpinQuantumNumber::from_twice(16).unwrap()
    }

    #[test]
    fn forward_model_references() {
        let j = j8();
        let down = basis_state(j, -8.0, Direction::z()).unwrap().to_density();
        let p = forward_model(&down, &[Direction::z()]);
        assert_eq!(p[0].probabilities[0], 1.0);
        let mixed = forward_model(&DensityMatrix::maximally_mixed(j), &[Direction::new(0.4, 1.1).unwrap()]);
        assert!(mixed[0].probabilities.iter().all(|p| (p - 1.0 / 17.0).abs() < 1e-12));
        let kit = kitten_state(j).to_density();
        let phis = [0.1, -0.05];
        let a = forward_model(&kit, &phis.map(Direction::equatorial));
        let b = equatorial_scan(&kit, &phis);
        for (x, y) in a.iter().zip(&b) {
            for (p, q) in x.probabilities.iter().zip(&y.probabilities) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simplex_projection_properties() {
        let p = simplex_projection(&[0.5, 0.7, -0.2]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p[0] - 0.4).abs() < 1e-15 && (p[1] - 0.6).abs() < 1e-15 && p[2] == 0.0);
        assert_eq!(simplex_projection(&[0.2, 0.8]), vec![0.2, 0.8]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let j = SpinQuantumNumber::from_twice(3).unwrap();
        let data = TomographyDataset::synthetic(&DensityMatrix::maximally_mixed(j), &equatorial_angles(0.0, 5), None, 0).unwrap();
        let problem = Problem::new(&data);
        let slots = problem.slots();
        let x = DVector::from_fn(slots.len(), |k, _| 0.3 + 0.1 * (k as f64).sin());
        let (_, jac) = problem.residuals(&slots, &x);
        let h = 1e-6;
        for p in 0..slots.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[p] += h;
            xm[p] -= h;
            let fd = (problem.residuals(&slots, &xp).0 - problem.residuals(&slots, &xm).0) / (2.0 * h);
            assert!((fd - jac.column(p)).norm() < 1e-8, "param {p}");
        }
    }

    #[test]
    fn dataset_validation() {
        let j = j8();
        let rho = DensityMatrix::maximally_mixed(j);
        let wide: Vec<f64> = (0..5).map(|k| k as f64).collect();
        assert!(TomographyDataset::synthetic(&rho, &wide, None, 0).is_err());
        let data = TomographyDataset::synthetic(&rho, &equatorial_angles(0.2, 5), Some(1000), 4).unwrap();
        let file = data.to_file().unwrap();
        let back = TomographyDataset::from_file(&file).unwrap();
        assert_eq!(back.to_file().unwrap(), file);
        assert!(TomographyDataset::synthetic(&rho, &equatorial_angles(0.2, 5), None, 4).unwrap().to_file().is_err());
    }

    #[test]
    fn phase_corrections_shift_the_axes() {
        let j = j8();
        let kit = kitten_state(j).to_density();
        let phis = equatorial_angles(0.0, 33);
        let shifted: Vec<f64> = phis.iter().map(|p| p + 0.01).collect();
        let data = TomographyDataset::synthetic(&kit, &shifted, None, 0).unwrap();
        let corrected = TomographyDataset::new(data.z_distribution().clone(), PhaseScan::new(phis.clone(), data.equatorial().distributions().to_vec(), Provenance::Exact).unwrap(), vec![0.01; 33]).unwrap();
        let fit = fit_density_matrix(&corrected).unwrap();
        assert!(fit.density.fidelity_with_pure(&kitten_state(j)).unwrap() > 0.999);
    }

    #[test]
    fn exact_kitten_round_trip() {
        let j = j8();
        let kit = kitten_state(j);
        let data = TomographyDataset::synthetic(&kit.to_density(), &equatorial_angles(0.0, 33), None, 0).unwrap();
        let fit = fit_density_matrix(&data).unwrap();
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.density.fidelity_with_pure(&kit).unwrap() > 0.999);
        assert!(fit.under_determined);
        assert_eq!(fit.parameter_count, 289);
        assert!((coherence_ratio(&fit.density).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sampled_mixed_state() {
        let j = j8();
        let rho = DensityMatrix::maximally_mixed(j);
        let data = TomographyDataset::synthetic(&rho, &equatorial_angles(0.0, 33), Some(90_000), 9).unwrap();
        let fit = fit_density_matrix(&data).unwrap();
        let err = (fit.density.elements() - rho.elements()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 0.01, "{err}");
    }

    #[test]
    fn bootstrap_on_small_spin() {
        let j = SpinQuantumNumber::from_twice(2).unwrap();
        let kit = kitten_state(j).to_density();
        let settings = TomographySettings::default();
        let exact = TomographyDataset::synthetic(&kit, &equatorial_angles(0.0, 5), None, 0).unwrap();
        let zero = bootstrap_errors(&exact, &settings, 50, 1).unwrap();
        let worst = zero.element_std.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        assert!(worst < 1e-6, "{worst:e}");
        assert!(bootstrap_errors(&exact, &settings, 49, 1).is_err());

        let sampled = TomographyDataset::synthetic(&kit, &equatorial_angles(0.0, 5), Some(2000), 3).unwrap();
        let a = bootstrap_errors(&sampled, &settings, 50, 7).unwrap();
        assert_eq!(a, bootstrap_errors(&sampled, &settings, 50, 7).unwrap());
        assert!(a.element_std[0][0] > 1e-4 && a.element_std[0][0] < 0.05);
    }
}
