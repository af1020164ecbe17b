//! Irreducible tensor operators T_ℓ^m and the multipole expansion of ρ.

use crate::angular::clebsch_gordan;
use crate::density::DensityMatrix;
use crate::error::{Result, SpinError};
use crate::linalg::{c, CMatrix, C64};
use crate::spin::SpinQuantumNumber;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nonzero entries (row, col, value) of T_ℓ^m for every ℓ ≤ 2J, |m| ≤ ℓ.
#[derive(Debug)]
pub struct TensorBasis {
    j: SpinQuantumNumber,
    entries: Vec<Vec<Vec<(usize, usize, f64)>>>,
}

impl TensorBasis {
    fn build(j: SpinQuantumNumber) -> Self {
        let tj = j.two_j() as i64;
        let d = j.dim();
        let entries = (0..=tj)
            .map(|l| {
                (-l..=l)
                    .map(|m| {
                        let mut list = Vec::new();
                        // T_ℓ^m[m1, m2] = (-1)^{J-m2} ⟨J m1; J -m2 | ℓ m⟩
                        for col in 0..d {
                            let tm2 = 2 * col as i64 - tj;
                            let tm1 = tm2 + 2 * m;
                            if tm1.abs() > tj {
                                continue;
                            }
                            let row = ((tm1 + tj) / 2) as usize;
                            let sign = if ((tj - tm2) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                            let v = sign * clebsch_gordan(tj, tm1, tj, -tm2, 2 * l, 2 * m);
                            if v != 0.0 {
                                list.push((row, col, v));
                            }
                        }
                        list
                    })
                    .collect()
            })
            .collect();
        TensorBasis { j, entries }
    }

    /// Shared basis for spin `j`, computed once per process.
    pub fn for_spin(j: SpinQuantumNumber) -> Arc<TensorBasis> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<TensorBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard.entry(j.two_j()).or_insert_with(|| Arc::new(TensorBasis::build(j))).clone()
    }

    pub fn max_rank(&self) -> usize {
        self.j.two_j() as usize
    }

    pub fn operator(&self, l: usize, m: i64) -> CMatrix {
        let d = self.j.dim();
        let mut t = CMatrix::zeros(d, d);
        for &(r, col, v) in &self.entries[l][(m + l as i64) as usize] {
            t[(r, col)] = c(v, 0.0);
        }
        t
    }

    fn entries(&self, l: usize, m: i64) -> &[(usize, usize, f64)] {
        &self.entries[l][(m + l as i64) as usize]
    }
}

/// Coefficients ρ_ℓ^m = Tr(T_ℓ^m† ρ), stored as `coefficients[ℓ][m + ℓ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleDecomposition {
    pub j: SpinQuantumNumber,
    pub coefficients: Vec<Vec<C64>>,
}

impl MultipoleDecomposition {
    pub fn get(&self, l: usize, m: i64) -> Option<C64> {
        if m.unsigned_abs() as usize > l {
            return None;
        }
        self.coefficients.get(l).map(|row| row[(m + l as i64) as usize])
    }

    /// Largest violation of ρ_ℓ^{-m} = (-1)^m (ρ_ℓ^m)*.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, row) in self.coefficients.iter().enumerate() {
            for m in 0..=l as i64 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let a = row[(l as i64 + m) as usize];
                let b = row[(l as i64 - m) as usize];
                worst = worst.max((b - a.conj() * sign).norm());
            }
        }
        worst
    }
}

pub fn multipole_decompose(rho: &DensityMatrix) -> MultipoleDecomposition {
    let basis = TensorBasis::for_spin(rho.j());
    let e = rho.elements();
    let coefficients = (0..=basis.max_rank())
        .map(|l| {
            (-(l as i64)..=l as i64)
                .map(|m| basis.entries(l, m).iter().map(|&(r, col, v)| e[(r, col)] * v).sum())
                .collect()
        })
        .collect();
    MultipoleDecomposition { j: rho.j(), coefficients }
}

/// Σ ρ_ℓ^m T_ℓ^m, validated as a density matrix.
pub fn multipole_reconstruct(dec: &MultipoleDecomposition) -> Result<DensityMatrix> {
    let basis = TensorBasis::for_spin(dec.j);
    if dec.coefficients.len() != basis.max_rank() + 1 {
        return Err(SpinError::DimensionMismatch { expected: basis.max_rank() + 1, found: dec.coefficients.len() });
    }
    let d = dec.j.dim();
    let mut rho = CMatrix::zeros(d, d);
    for (l, row) in dec.coefficients.iter().enumerate() {
        for (k, &coef) in row.iter().enumerate() {
            for &(r, col, v) in basis.entries(l, k as i64 - l as i64) {
                rho[(r, col)] += coef * v;
            }
        }
    }
    DensityMatrix::new(dec.j, rho)
}
