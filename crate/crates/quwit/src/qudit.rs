//! States, unitaries, projectors and the handful of primitive operations the
//! witness machinery is built from.
//!
//! Density matrices are validated on construction: Hermitian and unit trace
//! to 1e-12, positive semidefinite up to a -1e-10 eigenvalue floor. Keeping
//! the checks in the constructors means any `QuantumState` in circulation is
//! trustworthy.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{inner, mgs_orthonormalize, norm_sqr, outer, ComplexMatrix};

/// Tolerance for invariants that must hold by construction.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Eigenvalue floor for positivity checks; absorbs roundoff from products of
/// validated operators.
pub const PSD_FLOOR: f64 = -1e-10;
/// Band within which user-supplied coefficient vectors get renormalized
/// instead of rejected.
pub const RENORMALIZE_BAND: f64 = 1e-9;

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<Complex64>,
}

impl PureState {
    /// Requires the amplitudes to be normalized to within 1e-12.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let n2 = norm_sqr(&amps);
        if (n2 - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::NotNormalized { norm_sqr: n2 });
        }
        Ok(PureState { amps })
    }

    /// Accepts amplitudes whose norm² is within 1e-9 of 1 and rescales them
    /// exactly; anything further out is rejected.
    pub fn renormalized(amps: Vec<Complex64>) -> Result<Self> {
        let n2 = norm_sqr(&amps);
        if (n2 - 1.0).abs() > RENORMALIZE_BAND {
            return Err(Error::NotNormalized { norm_sqr: n2 });
        }
        let s = 1.0 / n2.sqrt();
        Ok(PureState {
            amps: amps.into_iter().map(|a| a * s).collect(),
        })
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        PureState { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        inner(&self.amps, &other.amps)
    }
}

/// A complete orthonormal set of `dim` pure states.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    states: Vec<PureState>,
}

impl OrthonormalBasis {
    pub fn new(states: Vec<PureState>) -> Result<Self> {
        let dim = states.len();
        if dim == 0 {
            return Err(Error::DimensionTooSmall { min: 1, actual: 0 });
        }
        let mut max_dev: f64 = 0.0;
        for (i, a) in states.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: a.dim(),
                });
            }
            for (j, b) in states.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((a.inner(b) - expect).norm());
            }
        }
        if max_dev > CONSTRUCTION_TOL {
            return Err(Error::NotOrthonormal { deviation: max_dev });
        }
        Ok(OrthonormalBasis { states })
    }

    pub fn computational(dim: usize) -> Self {
        OrthonormalBasis {
            states: (0..dim).map(|k| PureState::basis_state(dim, k)).collect(),
        }
    }

    /// Basis formed by the columns of a unitary.
    pub fn from_unitary_columns(u: &UnitaryChannel) -> Self {
        let states = (0..u.dim())
            .map(|j| PureState {
                amps: u.matrix().column(j),
            })
            .collect();
        OrthonormalBasis { states }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &PureState {
        &self.states[i]
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }
}

/// Density matrix with the usual invariants enforced.
#[derive(Debug, Clone)]
pub struct QuantumState {
    rho: ComplexMatrix,
}

impl QuantumState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::DimensionMismatch {
                expected: rho.rows(),
                actual: rho.cols(),
            });
        }
        let herm = rho.hermitian_deviation();
        if herm > CONSTRUCTION_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > CONSTRUCTION_TOL || tr.im.abs() > CONSTRUCTION_TOL {
            return Err(Error::BadTrace { trace: tr.re });
        }
        let (eigs, _) = rho.hermitian_eigen()?;
        if let Some(&min) = eigs.first() {
            if min < PSD_FLOOR {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
        }
        Ok(QuantumState { rho })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        QuantumState {
            rho: outer(psi.amplitudes(), psi.amplitudes()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        QuantumState {
            rho: ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// Eigenvalues of the density matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.rho.hermitian_eigen().expect("validated Hermitian").0
    }
}

/// Unitary evolution, U†U = I to 1e-12 entrywise.
#[derive(Debug, Clone)]
pub struct UnitaryChannel {
    matrix: ComplexMatrix,
}

impl UnitaryChannel {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                actual: matrix.cols(),
            });
        }
        let dev = matrix.unitary_deviation();
        if dev > CONSTRUCTION_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(UnitaryChannel { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryChannel {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    /// Diagonal unitary from unit-modulus phases.
    pub fn from_phases(phases: &[Complex64]) -> Result<Self> {
        UnitaryChannel::new(ComplexMatrix::from_diag(phases))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> UnitaryChannel {
        UnitaryChannel {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn apply_to_vector(&self, psi: &PureState) -> Result<PureState> {
        let amps = self.matrix.matvec(psi.amplitudes())?;
        Ok(PureState { amps })
    }
}

/// Orthogonal projector: Hermitian and idempotent to 1e-12.
#[derive(Debug, Clone)]
pub struct Projector {
    matrix: ComplexMatrix,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                actual: matrix.cols(),
            });
        }
        let herm = matrix.hermitian_deviation();
        if herm > CONSTRUCTION_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let sq = matrix.mul(&matrix)?;
        let idem = sq.max_abs_diff(&matrix);
        if idem > CONSTRUCTION_TOL {
            return Err(Error::NotIdempotent { deviation: idem });
        }
        Ok(Projector { matrix })
    }

    pub fn onto_pure(psi: &PureState) -> Self {
        Projector {
            matrix: outer(psi.amplitudes(), psi.amplitudes()),
        }
    }

    pub fn onto_basis_state(dim: usize, index: usize) -> Self {
        Projector::onto_pure(&PureState::basis_state(dim, index))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round() as usize
    }
}

/// Combine basis states with the given coefficients. The coefficient vector
/// must be normalized to within 1e-9; inside that band it is rescaled.
pub fn make_superposition(
    basis: &OrthonormalBasis,
    coefficients: &[Complex64],
) -> Result<PureState> {
    if coefficients.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: coefficients.len(),
        });
    }
    let n2 = norm_sqr(coefficients);
    if (n2 - 1.0).abs() > RENORMALIZE_BAND {
        return Err(Error::NotNormalized { norm_sqr: n2 });
    }
    let dim = basis.dim();
    let mut amps = vec![Complex64::ZERO; dim];
    for (coeff, state) in coefficients.iter().zip(basis.states()) {
        for (a, b) in amps.iter_mut().zip(state.amplitudes()) {
            *a += coeff * b;
        }
    }
    // exact renormalization absorbs both the input band and summation noise
    let s = 1.0 / norm_sqr(&amps).sqrt();
    Ok(PureState {
        amps: amps.into_iter().map(|a| a * s).collect(),
    })
}

/// ρ ↦ UρU†.
pub fn apply_unitary(state: &QuantumState, u: &UnitaryChannel) -> Result<QuantumState> {
    if state.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            actual: u.dim(),
        });
    }
    let rho = u.matrix.mul(&state.rho)?.mul(&u.matrix.adjoint())?;
    QuantumState::new(rho)
}

/// Complete dephasing in `basis`: ρ ↦ Σₘ ⟨ψₘ|ρ|ψₘ⟩ |ψₘ⟩⟨ψₘ|.
///
/// This is the channel a measure-and-forget ("blind") measurement applies: it
/// kills every coherence between basis states and keeps the populations.
pub fn apply_dephasing(state: &QuantumState, basis: &OrthonormalBasis) -> Result<QuantumState> {
    if state.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            actual: basis.dim(),
        });
    }
    let dim = state.dim();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for m in basis.states() {
        let rv = state.rho.matvec(m.amplitudes())?;
        let pop = inner(m.amplitudes(), &rv); // ⟨ψₘ|ρ|ψₘ⟩, real for Hermitian ρ
        let proj = outer(m.amplitudes(), m.amplitudes());
        rho = rho.add(&proj.scale(Complex64::new(pop.re, 0.0)))?;
    }
    QuantumState::new(rho)
}

/// Tr(Πρ), clamped to [0, 1] after checking it already lies within 1e-12 of
/// that interval.
pub fn born_probability(state: &QuantumState, projector: &Projector) -> Result<f64> {
    if state.dim() != projector.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            actual: projector.dim(),
        });
    }
    let p = projector.matrix.mul(&state.rho)?.trace().re;
    if !(-CONSTRUCTION_TOL..=1.0 + CONSTRUCTION_TOL).contains(&p) {
        return Err(Error::ProbabilityRange { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Haar-distributed random unitary, deterministic in `seed`.
///
/// Columns of a complex Gaussian matrix are orthonormalized; Gram-Schmidt
/// fixes the R factor's diagonal to be real positive, which removes the phase
/// ambiguity and leaves the Haar measure.
pub fn random_unitary(dim: usize, seed: u64) -> Result<UnitaryChannel> {
    if dim == 0 {
        return Err(Error::DimensionTooSmall { min: 1, actual: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            m.set(i, j, Complex64::new(re, im));
        }
    }
    mgs_orthonormalize(&mut m)?;
    UnitaryChannel::new(m)
}

/// Haar-distributed random pure state, deterministic in `seed`.
pub fn random_pure_state(dim: usize, seed: u64) -> Result<PureState> {
    let u = random_unitary(dim, seed)?;
    Ok(PureState {
        amps: u.matrix().column(0),
    })
}
