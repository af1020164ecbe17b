//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance` runs everything; `-- 4 7` selects criteria.

use spincat::budget::{imperfection_budget, BudgetParameters, ROW_NAMES};
use spincat::dephasing::{
    coherence_decay, coherence_simulate, fit_decay, one_over_e_time, scaling_identity_check, DecayShape, NoiseModel,
};
use spincat::dynamics::{
    analytic_mz, analytic_varz, gaussian_varz, hamiltonian, kitten_state, revival_state, CouplingConfig, Propagator,
};
use spincat::fit::fit_sine_free;
use spincat::harness::{run_command, write_artifact, Command, RunConfig, RunContext};
use spincat::measurement::{equatorial_scan, magnetization, parity, projection_probs, variance, DEFAULT_LANDE_G};
use spincat::metrology::{classical_fisher, gain_from_hellinger, gain_from_parity, parity_gain, HellingerOptions, PhaseScan, Provenance};
use spincat::tomography::wigner::{wigner, SphereGrid};
use spincat::tomography::{bootstrap_errors, coherence_ratio, equatorial_angles, fit_density_matrix, TomographyDataset, TomographySettings};
use spincat::{basis_state, DensityMatrix, Direction, SpinOperatorSet, SpinQuantumNumber, StateVector};
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

type Outcome = (bool, String);

fn j8() -> SpinQuantumNumber {
    SpinQuantumNumber::from_twice(16).unwrap()
}

fn down(j: SpinQuantumNumber) -> StateVector {
    basis_state(j, -j.value(), Direction::z()).unwrap()
}

fn twisting(j: SpinQuantumNumber) -> Propagator {
    Propagator::new(j, &hamiltonian(&CouplingConfig::twisting(1.0), &SpinOperatorSet::new(j)))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn analytic_oracle() -> Outcome {
    let j = j8();
    let (u, start) = (twisting(j), down(j));
    let (mut err_mz, mut err_var): (f64, f64) = (0.0, 0.0);
    for k in 0..200 {
        let wt = 2.0 * PI * k as f64 / 199.0;
        let d = projection_probs(&u.evolve(&start, wt), Direction::z());
        err_mz = err_mz.max((magnetization(&d) - analytic_mz(j, wt)).abs());
        err_var = err_var.max((variance(&d) - analytic_varz(j, wt)).abs());
    }
    (err_mz < 1e-9 && err_var < 1e-9, format!("200 points, max|Δm_z| = {err_mz:.2e}, max|ΔJz² error| = {err_var:.2e} (< 1e-9)"))
}

fn kitten_fidelity() -> Outcome {
    let j = j8();
    let (u, start) = (twisting(j), down(j));
    let kitten = kitten_state(j).fidelity(&u.evolve(&start, PI / 2.0)).unwrap();
    let revivals: Vec<f64> = [2u32, 3, 4].iter().map(|&n| revival_state(j, n).unwrap().fidelity(&u.evolve(&start, n as f64 * PI / 2.0)).unwrap()).collect();
    let worst = revivals.iter().copied().fold(kitten, f64::min);
    (
        worst > 1.0 - 1e-10,
        format!("kitten 1-F = {:.1e}; revivals at π, 3π/2, 2π: 1-F = {:.1e}, {:.1e}, {:.1e} (< 1e-10)", 1.0 - kitten, 1.0 - revivals[0], 1.0 - revivals[1], 1.0 - revivals[2]),
    )
}

fn collapse_plateau() -> Outcome {
    let j = j8();
    let (u, start) = (twisting(j), down(j));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=1600 {
        let wt = PI * (0.2 + 0.16 * k as f64 / 1600.0);
        let v = variance(&projection_probs(&u.evolve(&start, wt), Direction::z()));
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let limit = j.value() * (j.value() + 0.5) / 2.0;
    let gauss = gaussian_varz(j, 0.36 * PI);
    let ok = lo >= 33.0 && hi <= 34.5 && (limit - 34.0).abs() < 1e-12 && (gauss - limit).abs() < 1e-6;
    (ok, format!("ΔJz² ∈ [{lo:.4}, {hi:.4}] on [0.2π, 0.36π]; Gaussian approximant at 0.36π = {gauss:.9} vs J(J+1/2)/2 = {limit}"))
}

fn parity_metrology() -> Outcome {
    let j = j8();
    let phis: Vec<f64> = (0..256).map(|k| k as f64 * PI / 8.0 / 256.0).collect();
    let scan = PhaseScan::new(phis.clone(), equatorial_scan(&kitten_state(j), &phis), Provenance::Exact).unwrap();
    let report = gain_from_parity(&scan).unwrap();
    let ys: Vec<f64> = scan.distributions().iter().map(parity).collect();
    let period = 2.0 * PI / fit_sine_free(&phis, &ys, 2.0 * j.value(), false).unwrap().freq;
    let degraded = parity_gain(j, 0.74);
    let ok = (report.fitted - 1.0).abs() <= 1e-3 && (period - PI / 8.0).abs() <= 1e-6 && (report.gain - 16.0).abs() <= 0.05 && (degraded - 8.76).abs() < 5e-3;
    (ok, format!("C = {:.6}, period - π/8 = {:.1e}, G = {:.4}; C = 0.74 gives G = {degraded:.4} (measured 8.8(4))", report.fitted, period - PI / 8.0, report.gain))
}

fn hellinger_metrology() -> Outcome {
    let j = j8();
    let phis: Vec<f64> = (0..256).map(|k| k as f64 * PI / 8.0 / 256.0).collect();
    let phi0 = phis[128];
    let kitten = kitten_state(j);
    let coherent = basis_state(j, j.value(), Direction::y()).unwrap();
    let opts = |s: &StateVector| HellingerOptions { z_variance: Some(spincat::variance(&SpinOperatorSet::new(j).jz, s).unwrap()), ..HellingerOptions::default() };
    let scan_k = PhaseScan::new(phis.clone(), equatorial_scan(&kitten, &phis), Provenance::Exact).unwrap();
    let scan_c = PhaseScan::new(phis.clone(), equatorial_scan(&coherent, &phis), Provenance::Exact).unwrap();
    let gk = gain_from_hellinger(&scan_k, phi0, &opts(&kitten)).unwrap();
    let gc = gain_from_hellinger(&scan_c, phi0, &opts(&coherent)).unwrap();
    let ratio2 = (gk.fitted / gc.fitted).powi(2);
    let fisher = classical_fisher(&scan_k, phi0).unwrap();
    let cross = 8.0 * gk.fitted * gk.fitted / fisher;
    let bound = gk.bound.unwrap();
    let fisher_gain = fisher / (2.0 * j.value());
    let ok = (ratio2 / 16.0 - 1.0).abs() <= 0.02 && (cross - 1.0).abs() <= 0.01 && gk.gain <= bound && fisher_gain <= bound;
    (
        ok,
        format!(
            "(slope ratio)² = {ratio2:.4} (coherent slope {:.4} vs √2); 8·slope²/F = {cross:.5}; G_H = {:.4}, F/2J = {fisher_gain:.4} ≤ {bound:.4}",
            gc.fitted, gk.gain
        ),
    )
}

/// Reference corrections in table order, and whether the row depends on unstated cloud geometry.
const REFERENCE_ROWS: [(f64, bool); 8] = [(-1.43, true), (-0.41, true), (-0.22, false), (-0.34, false), (-0.06, false), (-0.18, false), (-0.18, false), (-0.09, false)];

fn imperfection_budget_check() -> Outcome {
    let t = Instant::now();
    let table = imperfection_budget(&BudgetParameters::default(), 1).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let mut ok = (table.combined.gain - 14.5).abs() <= 0.5 && elapsed <= 300.0;
    let in_band = (table.combined.gain - 1.0..=table.combined.gain).contains(&13.9);
    ok &= in_band;
    let mut rows = Vec::new();
    for ((row, (reference, geometry)), name) in table.rows.iter().zip(REFERENCE_ROWS).zip(ROW_NAMES) {
        let row_ok = (row.correction - reference).abs() <= 0.4;
        ok &= row_ok;
        rows.push(format!("{name} {:+.3} (ref {reference:+.2}{}{})", row.correction, if geometry { ", geometry" } else { "" }, if row_ok { "" } else { ", OUT" }));
    }
    (
        ok,
        format!(
            "combined G = {:.3} (ΔG {:+.3}); 13.9 in [{:.2}, {:.2}]: {in_band}; {:.0} s for {} samples; rows: {}",
            table.combined.gain,
            table.combined.correction,
            table.combined.gain - 1.0,
            table.combined.gain,
            elapsed,
            BudgetParameters::default().ensemble_samples,
            rows.join("; ")
        ),
    )
}

fn tomography_round_trip() -> Outcome {
    let j = j8();
    let kitten = kitten_state(j);
    let truth = DensityMatrix::from_pure(&kitten);
    let angles = equatorial_angles(0.0, 33);
    let exact = TomographyDataset::synthetic(&truth, &angles, None, 0).unwrap();
    let fidelity = fit_density_matrix(&exact).unwrap().density.fidelity_with_pure(&kitten).unwrap();

    let truth_ratio = coherence_ratio(&truth).unwrap();
    let mut ratios = Vec::new();
    let mut extremal = Vec::new();
    let mut first = None;
    for seed in 1..=50u64 {
        let data = TomographyDataset::synthetic(&truth, &angles, Some(90_000), seed).unwrap();
        let rho = fit_density_matrix(&data).unwrap().density;
        ratios.push(coherence_ratio(&rho).unwrap());
        extremal.push(rho.elements()[(0, j.dim() - 1)].norm());
        if first.is_none() {
            first = Some(data);
        }
    }
    let med = median(&ratios);
    let (_, scatter_ratio) = mean_std(&ratios);
    let (_, scatter_extremal) = mean_std(&extremal);
    let boot = bootstrap_errors(&first.unwrap(), &TomographySettings::default(), 50, 7).unwrap();
    let q_ratio = boot.coherence_ratio_std / scatter_ratio;
    let q_extremal = boot.extremal_coherence_std / scatter_extremal;
    let within = |q: f64| (0.5..=2.0).contains(&q);
    let ok = fidelity > 0.999 && (med - truth_ratio).abs() <= 0.05 && within(q_ratio) && within(q_extremal);
    (
        ok,
        format!(
            "exact-data fidelity {fidelity:.6}; median coherence ratio over 50 seeds {med:.4} (truth {truth_ratio:.4}); bootstrap/scatter std: ratio {:.2e}/{:.2e} = {q_ratio:.2}, |ρ_-J,J| {:.2e}/{:.2e} = {q_extremal:.2}",
            boot.coherence_ratio_std, scatter_ratio, boot.extremal_coherence_std, scatter_extremal
        ),
    )
}

fn wigner_properties() -> Outcome {
    let j = j8();
    let grid = SphereGrid::standard();
    let w = wigner(&DensityMatrix::from_pure(&kitten_state(j)), &grid);
    let target = (4.0 * PI / 17.0).sqrt();
    let mixed = wigner(&DensityMatrix::maximally_mixed(j), &grid);
    let spread = mixed.max() - mixed.min();
    let ok = w.imaginary_residue < 1e-10 && (w.integral() - target).abs() < 1e-6 && w.min() < 0.0 && spread < 1e-10;
    (
        ok,
        format!(
            "residue {:.1e}; ∫W dΩ - √(4π/17) = {:.1e}; kitten W_min = {:.4}; mixed-state spread {spread:.1e}",
            w.imaginary_residue,
            w.integral() - target,
            w.min()
        ),
    )
}

fn dephasing_scaling() -> Outcome {
    let tau0 = 740e-6;
    let stat = NoiseModel::static_for_coherence_time(tau0, DEFAULT_LANDE_G).unwrap();
    let markov = NoiseModel::markovian_for_coherence_time(tau0, DEFAULT_LANDE_G).unwrap();
    let times: Vec<f64> = (1..=10).map(|k| k as f64 * 8e-6).collect();
    let report = scaling_identity_check(&stat, 16, &times, 100_000, 11).unwrap();

    let gauss_tau = |n: u32, span: f64| {
        let ts: Vec<f64> = (0..=40).map(|k| k as f64 * span / 40.0).collect();
        let vs: Vec<f64> = ts.iter().map(|&t| coherence_decay(n, &stat, t)).collect();
        fit_decay(&ts, &vs, DecayShape::Gaussian).unwrap()
    };
    let static_ratio = gauss_tau(1, 2.0 * tau0) / gauss_tau(16, 2.0 * tau0 / 16.0);
    let markov_ratio = one_over_e_time(1, &markov).unwrap() / one_over_e_time(16, &markov).unwrap();

    let runs = 100_000;
    let t1: Vec<f64> = (0..=20).map(|k| k as f64 * 100e-6).collect();
    let t16: Vec<f64> = (0..=15).map(|k| k as f64 * 10e-6).collect();
    let mc = coherence_simulate(&stat, 1, &t1, runs, 3).unwrap().gaussian_tau / coherence_simulate(&stat, 16, &t16, runs, 4).unwrap().gaussian_tau;

    let ok = report.analytic_max_difference < 1e-12 && report.max_z_score < 3.0 && (static_ratio - 16.0).abs() < 1e-6 && (markov_ratio - 256.0).abs() < 1e-9;
    (
        ok,
        format!(
            "identity: analytic {:.1e}, Monte-Carlo max z = {:.2} over {} shots; τ₀/τ static (Gaussian fit) = {static_ratio:.6}, Markovian = {markov_ratio:.3}; sampled-curve Gaussian fit {mc:.2} (measured 13(2), comparison only)",
            report.analytic_max_difference, report.max_z_score, report.shots
        ),
    )
}

fn run_twice(cfg: &RunConfig, cmd: Command) -> Result<usize, String> {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut payloads = Vec::new();
    for dir in &dirs {
        let ctx = RunContext { out_dir: dir.path().to_path_buf(), format: cfg.format, config_hash: cfg.hash(), seed: cfg.seed() };
        let mut files = Vec::new();
        for a in run_command(cmd, cfg, None).map_err(|e| e.to_string())? {
            let path = write_artifact(&ctx, &a).map_err(|e| e.to_string())?;
            files.push((a.name.clone(), std::fs::read(path).unwrap()));
        }
        payloads.push(files);
    }
    if payloads[0] != payloads[1] {
        let name = payloads[0].iter().zip(&payloads[1]).find(|(a, b)| a != b).map(|(a, _)| a.0.clone()).unwrap_or_default();
        return Err(format!("{cmd:?}: {name} differs"));
    }
    Ok(payloads[0].len())
}

fn determinism() -> Outcome {
    let mut full = RunConfig::default();
    full.atom_total = Some(90_000);
    full.seed = Some(5);
    let mut small = full.clone();
    small.two_j = 4;
    small.imperfections.ensemble_samples = 40;
    small.scans.monte_carlo_runs = 4000;
    let mut json = small.clone();
    json.format = spincat::harness::OutputFormat::Json;
    let plan = [
        (&full, Command::Evolve),
        (&full, Command::Parity),
        (&full, Command::Ramsey),
        (&full, Command::Hellinger),
        (&small, Command::Tomo),
        (&small, Command::Budget),
        (&json, Command::Evolve),
    ];
    let mut files = 0;
    for (cfg, cmd) in plan {
        match run_twice(cfg, cmd) {
            Ok(n) => files += n,
            Err(e) => return (false, e),
        }
    }
    (true, format!("{files} payloads byte-identical across re-runs (all commands, sampling on, CSV and JSON)"))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "analytic-oracle equivalence", analytic_oracle),
        (2, "kitten and revival fidelity", kitten_fidelity),
        (3, "collapse plateau", collapse_plateau),
        (4, "parity metrology", parity_metrology),
        (5, "Hellinger metrology", hellinger_metrology),
        (6, "imperfection budget", imperfection_budget_check),
        (7, "tomography round trip", tomography_round_trip),
        (8, "Wigner properties", wigner_properties),
        (9, "dephasing scaling", dephasing_scaling),
        (10, "determinism", determinism),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| (false, "panicked".into()));
        failed += usize::from(!ok);
        println!("{} {id:>2} {name}: {detail} [{:.1} s]", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
