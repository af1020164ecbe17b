//! Phase sensitivity: standard-quantum-limit references, gains from parity contrast,
//! Ramsey magnetization fringes, Hellinger distance and Fisher information.

use crate::density::DensityMatrix;
use crate::error::{Result, SpinError};
use crate::fit::fit_sine;
use crate::linalg::{c, CMatrix, HermitianEigen};
use crate::measurement::{magnetization, parity, variance, ProjectionDistribution};
use crate::spin::{Direction, SpinOperatorSet, SpinQuantumNumber};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Sampled,
}

/// Distributions recorded at strictly increasing phases.
#[derive(Debug, Clone)]
pub struct PhaseScan {
    phis: Vec<f64>,
    distributions: Vec<ProjectionDistribution>,
    provenance: Provenance,
}

impl PhaseScan {
    pub fn new(phis: Vec<f64>, distributions: Vec<ProjectionDistribution>, provenance: Provenance) -> Result<Self> {
        if phis.len() != distributions.len() || phis.is_empty() {
            return Err(SpinError::InvalidConfig("phase scan needs one distribution per phase".into()));
        }
        if phis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SpinError::InvalidConfig("phases must be strictly increasing".into()));
        }
        let two_j = distributions[0].two_j;
        if distributions.iter().any(|d| d.two_j != two_j) {
            return Err(SpinError::InvalidConfig("all distributions must share J".into()));
        }
        Ok(PhaseScan { phis, distributions, provenance })
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn distributions(&self) -> &[ProjectionDistribution] {
        &self.distributions
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn j(&self) -> SpinQuantumNumber {
        self.distributions[0].j()
    }

    /// Whether the scan covers a full period of a signal with angular frequency `freq`.
    fn covers_period(&self, freq: f64) -> bool {
        let n = self.phis.len();
        if n < 3 {
            return false;
        }
        let span = self.phis[n - 1] - self.phis[0];
        let spacing = span / (n - 1) as f64;
        span + spacing >= 2.0 * std::f64::consts::PI / freq * (1.0 - 1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GainMethod {
    Parity,
    Magnetization,
    Hellinger,
    Fisher,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainReport {
    pub gain: f64,
    pub method: GainMethod,
    pub uncertainty: f64,
    /// Upper bound 2ΔJz²/J when the z variance is known.
    pub bound: Option<f64>,
    /// Fitted contrast, amplitude or slope behind the gain.
    pub fitted: f64,
    pub fitted_phase: f64,
}

/// Standard quantum limit 1/√(2J).
pub fn sql_phase_uncertainty(j: SpinQuantumNumber) -> f64 {
    1.0 / (2.0 * j.value()).sqrt()
}

/// Heisenberg limit 1/(2J).
pub fn heisenberg_phase_uncertainty(j: SpinQuantumNumber) -> f64 {
    1.0 / (2.0 * j.value())
}

/// Δφ = ΔO / |d⟨O⟩/dφ| from mean and variance curves, by central differences.
pub fn phase_uncertainty(mean: impl Fn(f64) -> f64, variance: impl Fn(f64) -> f64, phi: f64) -> Result<f64> {
    let h = 1e-5;
    let slope = (mean(phi + h) - mean(phi - h)) / (2.0 * h);
    let spread = variance(phi).max(0.0).sqrt();
    if slope.abs() < 1e-9 * spread.max(1.0) {
        return Err(SpinError::StationaryPoint(slope));
    }
    Ok(spread / slope.abs())
}

pub fn parity_gain(j: SpinQuantumNumber, contrast: f64) -> f64 {
    2.0 * j.value() * contrast * contrast
}

pub fn magnetization_gain(j: SpinQuantumNumber, amplitude: f64, z_variance: f64) -> f64 {
    if amplitude == 0.0 {
        return 0.0;
    }
    2.0 * j.value() * amplitude * amplitude / z_variance
}

/// Upper bound 2ΔJz²/J on the gain of a state with z variance `z_variance`.
pub fn variance_bound(j: SpinQuantumNumber, z_variance: f64) -> f64 {
    2.0 * z_variance / j.value()
}

/// Fits C·sin(2Jφ + φ₀) to the parity and returns G = 2JC².
pub fn gain_from_parity(scan: &PhaseScan) -> Result<GainReport> {
    let j = scan.j();
    let freq = 2.0 * j.value();
    if !scan.covers_period(freq) {
        return Err(SpinError::InsufficientData("parity scan must span one period".into()));
    }
    let ys: Vec<f64> = scan.distributions.iter().map(parity).collect();
    let (contrast, phase, sigma, _) = fit_sine(&scan.phis, &ys, freq, false)?;
    Ok(GainReport {
        gain: parity_gain(j, contrast),
        method: GainMethod::Parity,
        uncertainty: 4.0 * j.value() * contrast * sigma,
        bound: None,
        fitted: contrast,
        fitted_phase: phase,
    })
}

/// Fits A·cos(2Jφ + φ₀) + B to the magnetization and returns G = 2J A²/ΔJz², with ΔJz²
/// taken from the points where the fitted fringe is near its midline.
pub fn gain_from_magnetization(scan: &PhaseScan) -> Result<GainReport> {
    let j = scan.j();
    let freq = 2.0 * j.value();
    if !scan.covers_period(freq) {
        return Err(SpinError::InsufficientData("Ramsey scan must span one period".into()));
    }
    let ys: Vec<f64> = scan.distributions.iter().map(magnetization).collect();
    // A cos(x + φ₀) = A sin(x + φ₀ + π/2)
    let (amp, sine_phase, sigma, _) = fit_sine(&scan.phis, &ys, freq, true)?;
    let phase = sine_phase - std::f64::consts::FRAC_PI_2;
    let closeness: Vec<f64> = scan.phis.iter().map(|p| (freq * p + phase).cos().abs()).collect();
    let mut near: Vec<usize> = (0..closeness.len()).filter(|&k| closeness[k] < 0.3).collect();
    if near.is_empty() {
        let best = (0..closeness.len()).min_by(|&a, &b| closeness[a].total_cmp(&closeness[b])).expect("nonempty");
        near.push(best);
    }
    // error propagation over the window: ΔJz² at the midline is mean(var)/mean(sin²)
    let sin2 = near.iter().map(|&k| 1.0 - closeness[k].powi(2)).sum::<f64>();
    let var = near.iter().map(|&k| variance(&scan.distributions[k])).sum::<f64>() / sin2;
    if amp > 0.0 && var <= 0.0 {
        return Err(SpinError::Degenerate("vanishing variance at the fringe midline".into()));
    }
    let gain = magnetization_gain(j, amp, var);
    Ok(GainReport {
        gain,
        method: GainMethod::Magnetization,
        uncertainty: if amp > 0.0 { 2.0 * gain * sigma / amp } else { 0.0 },
        bound: None,
        fitted: amp,
        fitted_phase: phase,
    })
}

/// d_H with d_H² = ½ Σ (√P_m - √Q_m)².
pub fn hellinger_distance(p: &ProjectionDistribution, q: &ProjectionDistribution) -> Result<f64> {
    if p.two_j != q.two_j {
        return Err(SpinError::DimensionMismatch { expected: p.probabilities.len(), found: q.probabilities.len() });
    }
    let s: f64 = p.probabilities.iter().zip(&q.probabilities).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    Ok((0.5 * s).sqrt().min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HellingerOptions {
    /// Half-width of the small-angle window; defaults to 0.3/(2J).
    pub window: Option<f64>,
    /// Subtract the leading multinomial bias (2J)/(8N) per sampled distribution from d_H².
    pub bias_correction: bool,
    /// z variance of the probed state, to report the bound 2ΔJz²/J.
    pub z_variance: Option<f64>,
}

impl Default for HellingerOptions {
    fn default() -> Self {
        HellingerOptions { window: None, bias_correction: true, z_variance: None }
    }
}

/// Hellinger distances d_H(φ, φ₀) for every scan point, bias-corrected if requested.
pub fn hellinger_curve(scan: &PhaseScan, reference: usize, opts: &HellingerOptions) -> Result<Vec<f64>> {
    let refd = &scan.distributions[reference];
    let j = scan.j();
    let bias = |d: &ProjectionDistribution| d.atom_total.map(|n| 2.0 * j.value() / (8.0 * n as f64)).unwrap_or(0.0);
    scan.distributions
        .iter()
        .map(|d| {
            let h = hellinger_distance(d, refd)?;
            if opts.bias_correction && !std::ptr::eq(d, refd) {
                Ok((h * h - bias(d) - bias(refd)).max(0.0).sqrt())
            } else {
                Ok(h)
            }
        })
        .collect()
}

/// Slope of d_H(φ, φ₀) near the scan point closest to φ₀, normalized so a coherent state
/// gives G = 1 and the ideal cat G = 2J.
pub fn gain_from_hellinger(scan: &PhaseScan, phi0: f64, opts: &HellingerOptions) -> Result<GainReport> {
    let j = scan.j();
    let reference = (0..scan.phis.len())
        .min_by(|&a, &b| (scan.phis[a] - phi0).abs().total_cmp(&(scan.phis[b] - phi0).abs()))
        .expect("nonempty scan");
    let center = scan.phis[reference];
    let window = opts.window.unwrap_or(0.3 / (2.0 * j.value()));
    let curve = hellinger_curve(scan, reference, opts)?;
    let points: Vec<(f64, f64)> = scan
        .phis
        .iter()
        .zip(&curve)
        .enumerate()
        .filter(|(k, (p, _))| *k != reference && (*p - center).abs() <= window * (1.0 + 1e-12))
        .map(|(_, (p, d))| ((p - center).abs(), *d))
        .collect();
    if points.len() < 5 {
        return Err(SpinError::InsufficientData(format!("{} points in the small-angle window, need 5", points.len())));
    }
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let slope = points.iter().map(|(x, d)| x * d).sum::<f64>() / sxx;
    let rss: f64 = points.iter().map(|(x, d)| (d - slope * x).powi(2)).sum();
    let slope_sigma = (rss / (points.len() - 1) as f64 / sxx).sqrt();
    let sql_slope = (j.value() / 4.0).sqrt();
    let gain = (slope / sql_slope).powi(2);
    Ok(GainReport {
        gain,
        method: GainMethod::Hellinger,
        uncertainty: 2.0 * gain * slope_sigma / slope.abs().max(f64::MIN_POSITIVE),
        bound: opts.z_variance.map(|v| variance_bound(j, v)),
        fitted: slope,
        fitted_phase: center,
    })
}

/// Classical Fisher information F(φ) = Σ (∂Π_m)²/Π_m from a scan, using a three-point
/// derivative around the scan point nearest to φ; terms with Π_m < 1e-12 are dropped.
pub fn classical_fisher(scan: &PhaseScan, phi: f64) -> Result<f64> {
    let n = scan.phis.len();
    if n < 3 {
        return Err(SpinError::InsufficientData("Fisher information needs three scan points".into()));
    }
    let k = (0..n)
        .min_by(|&a, &b| (scan.phis[a] - phi).abs().total_cmp(&(scan.phis[b] - phi).abs()))
        .expect("nonempty")
        .clamp(1, n - 2);
    let (x0, x1, x2) = (scan.phis[k - 1], scan.phis[k], scan.phis[k + 1]);
    let w0 = (x1 - x2) / ((x0 - x1) * (x0 - x2));
    let w1 = (2.0 * x1 - x0 - x2) / ((x1 - x0) * (x1 - x2));
    let w2 = (x1 - x0) / ((x2 - x0) * (x2 - x1));
    let (d0, d1, d2) = (&scan.distributions[k - 1], &scan.distributions[k], &scan.distributions[k + 1]);
    let mut f = 0.0;
    for m in 0..d1.probabilities.len() {
        let p = d1.probabilities[m];
        if p < 1e-12 {
            continue;
        }
        let dp = w0 * d0.probabilities[m] + w1 * p + w2 * d2.probabilities[m];
        f += dp * dp / p;
    }
    Ok(f)
}

/// Exact classical Fisher information of the equatorial readout at azimuth φ.
pub fn equatorial_fisher(rho: &DensityMatrix, phi: f64) -> f64 {
    let ops = SpinOperatorSet::new(rho.j());
    let r = ops.axis_rotation(Direction::equatorial(phi));
    let comm = (&ops.jz * rho.elements() - rho.elements() * &ops.jz) * c(0.0, 1.0);
    let p = r.adjoint() * rho.elements() * &r;
    let dp = r.adjoint() * comm * &r;
    (0..ops.dim())
        .filter(|&k| p[(k, k)].re > 1e-12)
        .map(|k| dp[(k, k)].re.powi(2) / p[(k, k)].re)
        .sum()
}

/// Quantum Fisher information 2 Σ (λ_i - λ_k)²/(λ_i + λ_k) |⟨i|G|k⟩|².
pub fn quantum_fisher(rho: &DensityMatrix, generator: &CMatrix) -> f64 {
    let eig = HermitianEigen::new(rho.elements());
    let g = eig.vectors.adjoint() * generator * &eig.vectors;
    let n = eig.dim();
    let mut f = 0.0;
    for i in 0..n {
        for k in 0..n {
            let s = eig.values[i] + eig.values[k];
            if s > 1e-14 {
                let d = eig.values[i] - eig.values[k];
                f += 2.0 * d * d / s * g[(i, k)].norm_sqr();
            }
        }
    }
    f
}

/// Quantum Fisher information for rotations about z, in units of the SQL 2J.
pub fn z_rotation_gain(rho: &DensityMatrix) -> f64 {
    let ops = SpinOperatorSet::new(rho.j());
    quantum_fisher(rho, &ops.jz) / (2.0 * rho.j().value())
}
