//! Spin quantum numbers, angular-momentum operators, directions and pure states.
//!
//! Basis index k corresponds to the Jz projection m = -J + k.

use crate::density::DensityMatrix;
use crate::error::{Result, SpinError};
use crate::linalg::{c, hermiticity_defect, CMatrix, CVector, HermitianEigen, C64};
use std::f64::consts::PI;

/// Spin quantum number J, stored as 2J so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinQuantumNumber {
    two_j: u32,
}

impl SpinQuantumNumber {
    pub fn from_twice(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(SpinError::InvalidConfig("J must be at least 1/2".into()));
        }
        Ok(SpinQuantumNumber { two_j })
    }

    pub fn new(j: f64) -> Result<Self> {
        let two = 2.0 * j;
        if !two.is_finite() || (two - two.round()).abs() > 1e-9 || two.round() < 1.0 {
            return Err(SpinError::InvalidConfig(format!("J = {j} is not a positive multiple of 1/2")));
        }
        Self::from_twice(two.round() as u32)
    }

    pub fn two_j(self) -> u32 {
        self.two_j
    }

    pub fn value(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.two_j as usize + 1
    }

    /// Projection of basis index k.
    pub fn m_of(self, k: usize) -> f64 {
        k as f64 - self.value()
    }

    pub fn m_values(self) -> impl Iterator<Item = f64> {
        let j = self.value();
        (0..self.dim()).map(move |k| k as f64 - j)
    }

    /// Basis index of projection m, validating that m - J is an integer in range.
    pub fn index_of(self, m: f64) -> Result<usize> {
        let k = m + self.value();
        if !k.is_finite() || (k - k.round()).abs() > 1e-9 || k.round() < 0.0 || k.round() > self.two_j as f64 {
            return Err(SpinError::ProjectionOutOfRange { j: self.value(), m });
        }
        Ok(k.round() as usize)
    }
}

/// Unit vector on the sphere, polar angle in [0, π] and azimuth in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() || !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(SpinError::InvalidConfig(format!("bad direction theta={theta}, phi={phi}")));
        }
        Ok(Direction { theta: theta.clamp(0.0, PI), phi: phi.rem_euclid(2.0 * PI) })
    }

    pub fn z() -> Self {
        Direction { theta: 0.0, phi: 0.0 }
    }

    pub fn minus_z() -> Self {
        Direction { theta: PI, phi: 0.0 }
    }

    pub fn x() -> Self {
        Direction { theta: PI / 2.0, phi: 0.0 }
    }

    pub fn y() -> Self {
        Direction { theta: PI / 2.0, phi: PI / 2.0 }
    }

    pub fn equatorial(phi: f64) -> Self {
        Direction { theta: PI / 2.0, phi: phi.rem_euclid(2.0 * PI) }
    }

    /// Direction of a nonzero Cartesian vector; the vector is normalized.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(SpinError::InvalidConfig("zero or non-finite direction vector".into()));
        }
        let theta = (v[2] / n).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]);
        Direction::new(theta, phi)
    }

    /// Like `from_vector` but rejects vectors that are not unit within `tol`.
    pub fn from_unit_vector(v: [f64; 3], tol: f64) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (n - 1.0).abs() > tol {
            return Err(SpinError::InvalidConfig(format!("axis {v:?} has norm {n}, expected 1")));
        }
        Self::from_vector(v)
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    pub fn phi(self) -> f64 {
        self.phi
    }

    pub fn unit_vector(self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Jx, Jy, Jz, J+ and J- for one J (Condon–Shortley phases).
#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    pub j: SpinQuantumNumber,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    pub jplus: CMatrix,
    pub jminus: CMatrix,
}

impl SpinOperatorSet {
    pub fn new(j: SpinQuantumNumber) -> Self {
        let d = j.dim();
        let jv = j.value();
        let mut jplus = CMatrix::zeros(d, d);
        for k in 0..d - 1 {
            let m = j.m_of(k);
            jplus[(k + 1, k)] = c((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
        let jminus = jplus.adjoint();
        let jx = (&jplus + &jminus) * c(0.5, 0.0);
        let jy = (&jplus - &jminus) * c(0.0, -0.5);
        let jz = CMatrix::from_fn(d, d, |r, col| if r == col { c(j.m_of(r), 0.0) } else { c(0.0, 0.0) });
        SpinOperatorSet { j, jx, jy, jz, jplus, jminus }
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dim(), self.dim())
    }

    /// n·J for a real 3-vector (not required to be unit).
    pub fn along_vector(&self, n: [f64; 3]) -> CMatrix {
        &self.jx * c(n[0], 0.0) + &self.jy * c(n[1], 0.0) + &self.jz * c(n[2], 0.0)
    }

    pub fn along(&self, axis: Direction) -> CMatrix {
        self.along_vector(axis.unit_vector())
    }

    /// u·J for a complex 3-vector.
    pub fn along_complex(&self, u: &[C64; 3]) -> CMatrix {
        &self.jx * u[0] + &self.jy * u[1] + &self.jz * u[2]
    }

    pub fn casimir(&self) -> CMatrix {
        &self.jx * &self.jx + &self.jy * &self.jy + &self.jz * &self.jz
    }

    /// Rotation R(axis) taking |m⟩_z onto |m⟩_axis: a rotation by θ about (-sin φ, cos φ, 0).
    pub fn axis_rotation(&self, axis: Direction) -> CMatrix {
        let (sp, cp) = axis.phi().sin_cos();
        let generator = self.along_vector([-sp, cp, 0.0]);
        HermitianEigen::new(&generator).propagator(axis.theta())
    }

    /// exp(-i angle n·J).
    pub fn rotation(&self, axis: Direction, angle: f64) -> CMatrix {
        HermitianEigen::new(&self.along(axis)).propagator(angle)
    }
}

/// Normalized pure state in the Jz basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    j: SpinQuantumNumber,
    amplitudes: CVector,
}

impl StateVector {
    /// Builds a state from amplitudes that must already be normalized within 1e-10.
    pub fn new(j: SpinQuantumNumber, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != j.dim() {
            return Err(SpinError::DimensionMismatch { expected: j.dim(), found: amplitudes.len() });
        }
        let n = amplitudes.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-10 {
            return Err(SpinError::InvalidState(format!("norm {n} differs from 1")));
        }
        Ok(StateVector { j, amplitudes })
    }

    /// Builds a state from arbitrary nonzero amplitudes, normalizing them.
    pub fn normalized(j: SpinQuantumNumber, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != j.dim() {
            return Err(SpinError::DimensionMismatch { expected: j.dim(), found: amplitudes.len() });
        }
        let n = amplitudes.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(SpinError::InvalidState("zero or non-finite amplitudes".into()));
        }
        Ok(StateVector { j, amplitudes: amplitudes / c(n, 0.0) })
    }

    pub(crate) fn from_raw(j: SpinQuantumNumber, amplitudes: CVector) -> Self {
        debug_assert_eq!(amplitudes.len(), j.dim());
        let n = amplitudes.norm();
        StateVector { j, amplitudes: amplitudes / c(n, 0.0) }
    }

    pub fn j(&self) -> SpinQuantumNumber {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Amplitude ⟨m|ψ⟩ in the Jz basis.
    pub fn amplitude(&self, m: f64) -> Result<C64> {
        Ok(self.amplitudes[self.j.index_of(m)?])
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_j(other.j)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// |⟨self|other⟩|²; insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn z_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn apply(&self, op: &CMatrix) -> Result<StateVector> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(SpinError::DimensionMismatch { expected: self.dim(), found: op.nrows() });
        }
        StateVector::normalized(self.j, op * &self.amplitudes)
    }

    pub(crate) fn check_same_j(&self, other: SpinQuantumNumber) -> Result<()> {
        if self.j != other {
            return Err(SpinError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// |m⟩ along `axis`, i.e. R(axis)|m⟩_z.
pub fn basis_state(j: SpinQuantumNumber, m: f64, axis: Direction) -> Result<StateVector> {
    let k = j.index_of(m)?;
    let mut v = CVector::zeros(j.dim());
    v[k] = c(1.0, 0.0);
    if axis.theta() == 0.0 {
        return Ok(StateVector { j, amplitudes: v });
    }
    let ops = SpinOperatorSet::new(j);
    let r = ops.axis_rotation(axis);
    Ok(StateVector::from_raw(j, r.column(k).into_owned()))
}

/// exp(-i angle n·J)|ψ⟩.
pub fn rotate(state: &StateVector, axis: Direction, angle: f64) -> StateVector {
    let ops = SpinOperatorSet::new(state.j);
    let r = ops.rotation(axis, angle);
    StateVector::from_raw(state.j, r * &state.amplitudes)
}

/// States and mixed states that can be measured.
pub trait QuantumState {
    fn spin(&self) -> SpinQuantumNumber;
    /// Tr(O ρ) with its imaginary part; O is not checked.
    fn raw_expectation(&self, op: &CMatrix) -> C64;
    /// Populations in the eigenbasis of n·J selected by `rotation` = R(axis).
    fn rotated_populations(&self, rotation: &CMatrix) -> Vec<f64>;
}

impl QuantumState for StateVector {
    fn spin(&self) -> SpinQuantumNumber {
        self.j
    }

    fn raw_expectation(&self, op: &CMatrix) -> C64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }

    fn rotated_populations(&self, rotation: &CMatrix) -> Vec<f64> {
        rotation.ad_mul(&self.amplitudes).iter().map(|a| a.norm_sqr()).collect()
    }
}

impl QuantumState for DensityMatrix {
    fn spin(&self) -> SpinQuantumNumber {
        self.j()
    }

    fn raw_expectation(&self, op: &CMatrix) -> C64 {
        crate::linalg::trace(&(op * self.elements()))
    }

    fn rotated_populations(&self, rotation: &CMatrix) -> Vec<f64> {
        let m = rotation.adjoint() * self.elements() * rotation;
        (0..m.nrows()).map(|k| m[(k, k)].re.max(0.0)).collect()
    }
}

/// ⟨O⟩ for a Hermitian observable; rejects non-Hermitian operators.
pub fn expectation<S: QuantumState + ?Sized>(op: &CMatrix, state: &S) -> Result<f64> {
    let d = state.spin().dim();
    if op.nrows() != d || op.ncols() != d {
        return Err(SpinError::DimensionMismatch { expected: d, found: op.nrows() });
    }
    let defect = hermiticity_defect(op);
    let scale = op.norm().max(1.0);
    if defect > 1e-10 * scale {
        return Err(SpinError::NotHermitian(defect));
    }
    let v = state.raw_expectation(op);
    if v.im.abs() > 1e-9 * scale {
        return Err(SpinError::ImaginaryResidue(v.im));
    }
    Ok(v.re)
}

/// ⟨O²⟩ - ⟨O⟩².
pub fn variance<S: QuantumState + ?Sized>(op: &CMatrix, state: &S) -> Result<f64> {
    let mean = expectation(op, state)?;
    let sq = expectation(&(op * op), state)?;
    Ok((sq - mean * mean).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spin(j2: u32) -> SpinQuantumNumber {
        SpinQuantumNumber::from_twice(j2).unwrap()
    }

    #[test]
    fn commutation_relations_hold() {
        for j2 in 1..=17 {
            let ops = SpinOperatorSet::new(spin(j2));
            let comm = crate::linalg::commutator(&ops.jx, &ops.jy);
            assert!((comm - &ops.jz * c(0.0, 1.0)).norm() < 1e-12);
            let jv = spin(j2).value();
            let cas = ops.casimir() - ops.identity() * c(jv * (jv + 1.0), 0.0);
            assert!(cas.norm() < 1e-11);
        }
    }

    #[test]
    fn x_basis_state_is_eigenvector_of_jx() {
        let j = spin(16);
        let ops = SpinOperatorSet::new(j);
        for m in [-8.0, -3.0, 0.0, 5.0, 8.0] {
            let s = basis_state(j, m, Direction::x()).unwrap();
            let resid = &ops.jx * s.amplitudes() - s.amplitudes() * c(m, 0.0);
            assert!(resid.norm() < 1e-10);
        }
    }

    #[test]
    fn invalid_projection_is_rejected() {
        let j = spin(16);
        assert!(matches!(basis_state(j, 9.0, Direction::z()), Err(SpinError::ProjectionOutOfRange { .. })));
        assert!(basis_state(j, 0.5, Direction::z()).is_err());
        assert!(basis_state(spin(1), 0.5, Direction::z()).is_ok());
    }

    #[test]
    fn non_hermitian_expectation_is_rejected() {
        let j = spin(4);
        let ops = SpinOperatorSet::new(j);
        let s = basis_state(j, 1.0, Direction::z()).unwrap();
        assert!(matches!(expectation(&ops.jplus, &s), Err(SpinError::NotHermitian(_))));
    }

    proptest! {
        #[test]
        fn basis_states_are_eigenstates_along_any_axis(j2 in 1u32..=16, k in 0usize..17,
                theta in 0.0..PI, phi in 0.0..(2.0 * PI)) {
            let j = spin(j2);
            let k = k % j.dim();
            let m = j.m_of(k);
            let axis = Direction::new(theta, phi).unwrap();
            let s = basis_state(j, m, axis).unwrap();
            let ops = SpinOperatorSet::new(j);
            let mean = expectation(&ops.along(axis), &s).unwrap();
            let var = variance(&ops.along(axis), &s).unwrap();
            prop_assert!((mean - m).abs() < 1e-9);
            prop_assert!(var < 1e-9);
        }

        #[test]
        fn rotation_preserves_norm(j2 in 1u32..=16, theta in 0.0..PI, phi in 0.0..6.28, angle in -7.0..7.0f64) {
            let j = spin(j2);
            let s = basis_state(j, j.value(), Direction::new(theta, phi).unwrap()).unwrap();
            let r = rotate(&s, Direction::new(phi / 2.0, theta).unwrap(), angle);
            prop_assert!((r.amplitudes().norm() - 1.0).abs() < 1e-12);
        }
    }
}
