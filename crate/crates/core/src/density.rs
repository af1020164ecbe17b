use crate::error::{Result, SpinError};
use crate::linalg::{add_outer, c, hermiticity_defect, trace, CMatrix, HermitianEigen};
use crate::spin::{SpinQuantumNumber, StateVector};

const TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite matrix in the Jz basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    j: SpinQuantumNumber,
    elements: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity to 1e-10.
    pub fn new(j: SpinQuantumNumber, elements: CMatrix) -> Result<Self> {
        let d = j.dim();
        if elements.nrows() != d || elements.ncols() != d {
            return Err(SpinError::DimensionMismatch { expected: d, found: elements.nrows() });
        }
        let herm = hermiticity_defect(&elements);
        if herm > TOL {
            return Err(SpinError::NotHermitian(herm));
        }
        let tr = trace(&elements);
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(SpinError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = HermitianEigen::new(&elements).values[0];
        if min < -TOL {
            return Err(SpinError::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix { j, elements })
    }

    /// Wraps a matrix produced by a trace-preserving construction, symmetrizing
    /// and renormalizing away round-off.
    pub(crate) fn from_accumulated(j: SpinQuantumNumber, elements: CMatrix) -> Self {
        let sym = (&elements + elements.adjoint()) * c(0.5, 0.0);
        let tr = trace(&sym).re;
        DensityMatrix { j, elements: sym / c(tr, 0.0) }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let mut m = CMatrix::zeros(state.dim(), state.dim());
        add_outer(&mut m, state.amplitudes().as_slice(), 1.0);
        DensityMatrix { j: state.j(), elements: m }
    }

    pub fn maximally_mixed(j: SpinQuantumNumber) -> Self {
        let d = j.dim();
        DensityMatrix { j, elements: CMatrix::identity(d, d) / c(d as f64, 0.0) }
    }

    /// Σ w_k |ψ_k⟩⟨ψ_k| with nonnegative weights summing to 1.
    pub fn mixture(weights: &[f64], states: &[StateVector]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(SpinError::InvalidConfig("weights and states must be nonempty and equally long".into()));
        }
        let j = states[0].j();
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > TOL {
            return Err(SpinError::InvalidConfig("mixture weights must be nonnegative and sum to 1".into()));
        }
        let mut m = CMatrix::zeros(j.dim(), j.dim());
        for (w, s) in weights.iter().zip(states) {
            s.check_same_j(j)?;
            add_outer(&mut m, s.amplitudes().as_slice(), *w);
        }
        Ok(DensityMatrix { j, elements: m })
    }

    pub fn j(&self) -> SpinQuantumNumber {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    /// ⟨m|ρ|m'⟩.
    pub fn element(&self, m: f64, m_prime: f64) -> Result<crate::linalg::C64> {
        Ok(self.elements[(self.j.index_of(m)?, self.j.index_of(m_prime)?)])
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.elements[(k, k)].re).collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.elements * &self.elements).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        HermitianEigen::new(&self.elements).values
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn fidelity_with_pure(&self, state: &StateVector) -> Result<f64> {
        state.check_same_j(self.j)?;
        let a = state.amplitudes();
        Ok(a.dotc(&(&self.elements * a)).re)
    }

    /// Unitary conjugation U ρ U†.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        DensityMatrix::from_accumulated(self.j, u * &self.elements * u.adjoint())
    }

    /// Normalized coherence 2|ρ(-J,J)| / (ρ(-J,-J) + ρ(J,J)).
    pub fn coherence_ratio(&self) -> Result<f64> {
        let last = self.dim() - 1;
        let denom = self.elements[(0, 0)].re + self.elements[(last, last)].re;
        if denom.abs() < 1e-15 {
            return Err(SpinError::Degenerate("extreme populations vanish".into()));
        }
        Ok(2.0 * self.elements[(0, last)].norm() / denom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{basis_state, Direction};

    #[test]
    fn rejects_non_positive_matrix() {
        let j = SpinQuantumNumber::from_twice(1).unwrap();
        let m = CMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(matches!(DensityMatrix::new(j, m), Err(SpinError::InvalidState(_))));
    }

    #[test]
    fn pure_state_has_unit_purity() {
        let j = SpinQuantumNumber::from_twice(16).unwrap();
        let s = basis_state(j, 3.0, Direction::new(1.0, 2.0).unwrap()).unwrap();
        let rho = DensityMatrix::from_pure(&s);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!(DensityMatrix::new(j, rho.elements().clone()).is_ok());
        assert!((DensityMatrix::maximally_mixed(j).purity() - 1.0 / 17.0).abs() < 1e-14);
    }

    #[test]
    fn coherence_ratio_of_cat_is_one() {
        let j = SpinQuantumNumber::from_twice(16).unwrap();
        let mut a = crate::linalg::CVector::zeros(17);
        a[0] = c(1.0, 0.0);
        a[16] = c(0.0, 1.0);
        let s = StateVector::normalized(j, a).unwrap();
        assert!((s.to_density().coherence_ratio().unwrap() - 1.0).abs() < 1e-12);
    }
}
