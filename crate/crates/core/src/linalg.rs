//! Small dense complex linear-algebra helpers built on nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entrywise deviation of `m` from its conjugate transpose.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for k in i..n {
            worst = worst.max((m[(i, k)] - m[(k, i)].conj()).norm());
        }
    }
    worst
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        let n = m.nrows();
        // symmetrize so round-off in the input cannot leak into the decomposition
        let sym = (m + m.adjoint()) * c(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
        HermitianEigen { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// V f(Λ) V† for a complex-valued spectral function.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for col in 0..n {
            let w = f(self.values[col]);
            for r in 0..n {
                scaled[(r, col)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// exp(-i H t).
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.apply_fn(|l| C64::from_polar(1.0, -l * t))
    }

    /// Coordinates of `v` in the eigenbasis.
    pub fn to_eigenbasis(&self, v: &CVector) -> CVector {
        self.vectors.ad_mul(v)
    }

    /// exp(-i H t) v given the eigenbasis coordinates of v.
    pub fn evolve_coords(&self, coords: &CVector, t: f64) -> CVector {
        let phased = CVector::from_fn(self.dim(), |k, _| {
            coords[k] * C64::from_polar(1.0, -self.values[k] * t)
        });
        &self.vectors * phased
    }
}

/// exp(-i H t) for Hermitian H.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    HermitianEigen::new(h).propagator(t)
}

/// y = A x written out for speed in inner loops; `y` must not alias `x`.
#[inline]
pub fn matvec_into(a: &CMatrix, x: &[C64], y: &mut [C64]) {
    let n = a.nrows();
    let m = a.ncols();
    for v in y.iter_mut() {
        *v = C64::new(0.0, 0.0);
    }
    let data = a.as_slice();
    for col in 0..m {
        let xc = x[col];
        if xc.re == 0.0 && xc.im == 0.0 {
            continue;
        }
        let column = &data[col * n..(col + 1) * n];
        for (yr, ar) in y.iter_mut().zip(column) {
            *yr += ar * xc;
        }
    }
}

/// ρ += w |ψ⟩⟨ψ|
pub fn add_outer(rho: &mut CMatrix, psi: &[C64], w: f64) {
    let n = psi.len();
    for col in 0..n {
        let cc = psi[col].conj() * w;
        for r in 0..n {
            rho[(r, col)] += psi[r] * cc;
        }
    }
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|k| m[(k, k)]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        &a + a.adjoint()
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let h = random_hermitian(9, 3);
        let e = HermitianEigen::new(&h);
        let back = e.apply_fn(|l| c(l, 0.0));
        assert!((back - &h).norm() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn propagator_matches_taylor_series() {
        let h = random_hermitian(6, 11) * c(0.3, 0.0);
        let t = 0.7;
        let a = &h * c(0.0, -t);
        let mut term = CMatrix::identity(6, 6);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &a / c(k as f64, 0.0);
            sum += &term;
        }
        assert!((expm_hermitian(&h, t) - sum).norm() < 1e-12);
    }

    #[test]
    fn matvec_matches_nalgebra() {
        let a = random_hermitian(5, 2);
        let x = CVector::from_fn(5, |k, _| c(k as f64, 1.0 - k as f64));
        let mut y = vec![C64::new(0.0, 0.0); 5];
        matvec_into(&a, x.as_slice(), &mut y);
        let expect = &a * &x;
        for k in 0..5 {
            assert!((y[k] - expect[k]).norm() < 1e-14);
        }
    }
}
