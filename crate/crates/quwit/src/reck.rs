//! Factorization of an N-mode unitary into two-level rotations.
//!
//! `decompose` right-multiplies U by two-level rotations E_{i,j}, nulling the
//! strictly lower triangle row by row from the bottom (within a row, from the
//! diagonal outward), until only a diagonal of unit-modulus phases remains:
//!
//!   U · E_{N,N-1} · E_{N,N-2} · … · E_{2,1} = D,
//!
//! so U = (E_{N,N-1} · … · E_{2,1} · D⁻¹)⁻¹. The plan stores every rotation
//! (identity blocks included, N(N-1)/2 in total) plus the diagonal of D⁻¹,
//! and `reconstruct` replays the product to recover U.
//!
//! Rotations with equal i+j act on disjoint mode pairs and can fire
//! simultaneously; `layers` groups them accordingly into 2N-3 layers, layer
//! l holding the rotations with i+j = 2N-l.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::qudit::UnitaryChannel;

/// Unitary mixing of modes j and i (one-based labels, j < i), identity on
/// the rest. `block[r][c]` addresses the (j,i)×(j,i) submatrix, so
/// `block[0][0]` sits at (j,j) and `block[1][1]` at (i,i).
#[derive(Debug, Clone)]
pub struct TwoLevelRotation {
    pub i: usize,
    pub j: usize,
    pub block: [[Complex64; 2]; 2],
}

impl TwoLevelRotation {
    pub fn is_identity(&self, tol: f64) -> bool {
        (self.block[0][0] - Complex64::new(1.0, 0.0)).norm() <= tol
            && (self.block[1][1] - Complex64::new(1.0, 0.0)).norm() <= tol
            && self.block[0][1].norm() <= tol
            && self.block[1][0].norm() <= tol
    }
}

/// Ordered factorization of one unitary: rotations in elimination order
/// followed by output phases.
#[derive(Debug, Clone)]
pub struct DecompositionPlan {
    dim: usize,
    rotations: Vec<TwoLevelRotation>,
    phases: Vec<Complex64>,
}

impl DecompositionPlan {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rotations(&self) -> &[TwoLevelRotation] {
        &self.rotations
    }

    /// Diagonal of D⁻¹, one unit-modulus phase per mode.
    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    pub fn layer_count(&self) -> usize {
        if self.dim < 2 {
            0
        } else {
            2 * self.dim - 3
        }
    }

    /// One-based layer of a rotation: rotations in the same layer touch
    /// disjoint mode pairs.
    pub fn layer_of(&self, rotation: &TwoLevelRotation) -> usize {
        2 * self.dim - rotation.i - rotation.j
    }

    /// Rotation indices grouped by layer, elimination order kept inside each
    /// group. `layers()[l]` is layer l+1.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        let mut layers = vec![Vec::new(); self.layer_count()];
        for (idx, rot) in self.rotations.iter().enumerate() {
            layers[self.layer_of(rot) - 1].push(idx);
        }
        layers
    }

    /// Replay the factorization: (E₁ · … · E_K · D⁻¹)⁻¹.
    pub fn reconstruct(&self) -> Result<UnitaryChannel> {
        let n = self.dim;
        let mut m = ComplexMatrix::identity(n);
        for rot in &self.rotations {
            apply_rotation_right(&mut m, rot);
        }
        for (k, phase) in self.phases.iter().enumerate() {
            for r in 0..n {
                m.set(r, k, m.get(r, k) * phase);
            }
        }
        UnitaryChannel::new(m.adjoint())
    }

    /// Largest entrywise deviation between the replayed product and `u`.
    pub fn reconstruction_error(&self, u: &UnitaryChannel) -> Result<f64> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: u.dim(),
            });
        }
        Ok(self.reconstruct()?.matrix().max_abs_diff(u.matrix()))
    }
}

/// m ← m · E(rot), touching only columns j and i.
fn apply_rotation_right(m: &mut ComplexMatrix, rot: &TwoLevelRotation) {
    let (j, i) = (rot.j - 1, rot.i - 1);
    for k in 0..m.rows() {
        let mj = m.get(k, j);
        let mi = m.get(k, i);
        m.set(k, j, mj * rot.block[0][0] + mi * rot.block[1][0]);
        m.set(k, i, mj * rot.block[0][1] + mi * rot.block[1][1]);
    }
}

const NULLED: f64 = 1e-14;

/// Factor `u` into two-level rotations and output phases.
pub fn decompose(u: &UnitaryChannel) -> Result<DecompositionPlan> {
    let n = u.dim();
    let mut t = u.matrix().clone();
    let mut rotations = Vec::with_capacity(n * (n - 1) / 2);
    for i in (2..=n).rev() {
        for j in (1..i).rev() {
            let a = t.get(i - 1, j - 1);
            let b = t.get(i - 1, i - 1);
            let block = if a.norm() < NULLED {
                [
                    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                ]
            } else {
                let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
                [
                    [b / r, a.conj() / r],
                    [-a / r, b.conj() / r],
                ]
            };
            let rot = TwoLevelRotation { i, j, block };
            if !rot.is_identity(0.0) {
                apply_rotation_right(&mut t, &rot);
            }
            rotations.push(rot);
        }
    }
    // the residue is diagonal; store its inverse, normalized to unit modulus
    let phases: Vec<Complex64> = (0..n)
        .map(|k| {
            let d = t.get(k, k);
            let mag = d.norm();
            if mag < NULLED {
                Complex64::new(1.0, 0.0)
            } else {
                (d / mag).conj()
            }
        })
        .collect();
    Ok(DecompositionPlan {
        dim: n,
        rotations,
        phases,
    })
}
