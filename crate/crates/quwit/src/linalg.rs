//! Small dense complex matrices.
//!
//! Everything in this crate works on dimensions of a few dozen at most, so a
//! flat row-major `Vec<Complex64>` is the whole storage story. The only
//! nontrivial routines are a cyclic Jacobi eigensolver for Hermitian matrices
//! and modified Gram-Schmidt, which together cover positivity checks, basis
//! completion and Haar sampling.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, *d);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(ComplexMatrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum::<Complex64>()
            })
            .collect())
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                actual: other.rows * other.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max entrywise deviation of U†U from the identity.
    pub fn unitary_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self.adjoint().mul(self).expect("square");
        gram.max_abs_diff(&ComplexMatrix::identity(self.rows))
    }

    /// Max entrywise deviation of A from A†.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    /// Eigenvalues and eigenvectors of a Hermitian matrix by cyclic Jacobi
    /// rotations. Eigenvalues come back ascending; column k of the returned
    /// matrix is the eigenvector for eigenvalue k.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: self.cols,
            });
        }
        let dev = self.hermitian_deviation();
        if dev > 1e-8 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let n = self.rows;
        let mut a = self.clone();
        // Symmetrize away representation noise so the iteration sees an
        // exactly Hermitian operator.
        for p in 0..n {
            let d = a.get(p, p);
            a.set(p, p, Complex64::new(d.re, 0.0));
            for q in p + 1..n {
                let m = 0.5 * (a.get(p, q) + a.get(q, p).conj());
                a.set(p, q, m);
                a.set(q, p, m.conj());
            }
        }
        let mut vecs = ComplexMatrix::identity(n);
        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
        let tol = scale * 1e-15;
        for _sweep in 0..64 {
            let off: f64 = {
                let mut s = 0.0;
                for p in 0..n {
                    for q in p + 1..n {
                        s += a.get(p, q).norm_sqr();
                    }
                }
                s.sqrt()
            };
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    let r = apq.norm();
                    if r <= tol * 1e-2 {
                        continue;
                    }
                    let phase = apq / r;
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    let tau = (aqq - app) / (2.0 * r);
                    // smaller root of t^2 - 2 tau t - 1 = 0
                    let t = -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // A <- J† A J with the rotation in the (p, q) plane
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp + s * phase.conj() * akq);
                        a.set(k, q, -s * phase * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk + s * phase * aqk);
                        a.set(q, k, -s * phase.conj() * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = vecs.get(k, p);
                        let vkq = vecs.get(k, q);
                        vecs.set(k, p, c * vkp + s * phase.conj() * vkq);
                        vecs.set(k, q, -s * phase * vkp + c * vkq);
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite"));
        let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
        let mut sorted_vecs = ComplexMatrix::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                sorted_vecs.set(k, new_col, vecs.get(k, old_col));
            }
        }
        Ok((values, sorted_vecs))
    }
}

/// ⟨a|b⟩ with the conjugate on the left argument.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// |a⟩⟨b| as a matrix.
pub fn outer(a: &[Complex64], b: &[Complex64]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.len(), b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out.set(i, j, x * y.conj());
        }
    }
    out
}

/// Extend `first` to a full orthonormal set, filling in from the
/// computational basis. Column 0 of the result is `first`; the completion is
/// deterministic.
pub fn complete_orthonormal(first: &[Complex64]) -> Result<ComplexMatrix> {
    let n = first.len();
    let nrm = norm_sqr(first);
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm_sqr: nrm });
    }
    let scale = 1.0 / nrm.sqrt();
    let mut cols: Vec<Vec<Complex64>> = vec![first.iter().map(|a| a * scale).collect()];
    let mut seed = 0usize;
    while cols.len() < n {
        if seed >= n {
            return Err(Error::NotOrthonormal { deviation: 1.0 });
        }
        let mut v = vec![Complex64::ZERO; n];
        v[seed] = Complex64::ONE;
        seed += 1;
        // two Gram-Schmidt passes keep orthogonality near machine precision
        for _ in 0..2 {
            for c in &cols {
                let proj = inner(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
        }
        let rem = norm_sqr(&v);
        if rem < 1e-12 {
            continue; // seed was (nearly) inside the span; try the next one
        }
        let s = 1.0 / rem.sqrt();
        for vi in &mut v {
            *vi *= s;
        }
        cols.push(v);
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        for (i, x) in c.iter().enumerate() {
            out.set(i, j, *x);
        }
    }
    Ok(out)
}

/// Orthonormalize the columns of `m` in place by modified Gram-Schmidt with
/// reorthogonalization. The implied R factor has a positive real diagonal,
/// which is exactly the phase convention Haar sampling needs.
pub fn mgs_orthonormalize(m: &mut ComplexMatrix) -> Result<()> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: m.cols(),
        });
    }
    for j in 0..n {
        let mut v = m.column(j);
        for _ in 0..2 {
            for k in 0..j {
                let q = m.column(k);
                let proj = inner(&q, &v);
                for (vi, qi) in v.iter_mut().zip(&q) {
                    *vi -= proj * qi;
                }
            }
        }
        let nrm = norm_sqr(&v).sqrt();
        if nrm < 1e-12 {
            return Err(Error::NotOrthonormal { deviation: nrm });
        }
        for (i, vi) in v.iter().enumerate() {
            m.set(i, j, vi / nrm);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_multiplication_is_neutral() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.5, -1.0)],
            vec![c(-3.0, 0.0), c(0.0, 4.0)],
        ])
        .unwrap();
        let i = ComplexMatrix::identity(2);
        assert_eq!(a.mul(&i).unwrap(), a);
        assert_eq!(i.mul(&a).unwrap(), a);
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.5, -1.0)],
            vec![c(-3.0, 1.0), c(0.0, 4.0)],
        ])
        .unwrap();
        let ad = a.adjoint();
        assert_eq!(ad.get(0, 1), c(-3.0, -1.0));
        assert_eq!(ad.get(1, 0), c(0.5, 1.0));
        assert_eq!(ad.adjoint(), a);
    }

    #[test]
    fn mul_dimension_mismatch_is_rejected() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 2);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn trace_sums_diagonal() {
        let a = ComplexMatrix::from_diag(&[c(1.0, 1.0), c(2.0, -3.0)]);
        assert_eq!(a.trace(), c(3.0, -2.0));
    }

    #[test]
    fn eigen_diagonal_matrix_returns_sorted_diagonal() {
        let a = ComplexMatrix::from_diag(&[c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]);
        let (vals, _) = a.hermitian_eigen().unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-13);
        assert!((vals[1] - 2.0).abs() < 1e-13);
        assert!((vals[2] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn eigen_pauli_x() {
        let x = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let (vals, vecs) = x.hermitian_eigen().unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-13);
        assert!((vals[1] - 1.0).abs() < 1e-13);
        // eigenvector residual ‖Xv - λv‖
        for k in 0..2 {
            let v = vecs.column(k);
            let xv = x.matvec(&v).unwrap();
            let res: f64 = xv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - vals[k] * b).norm_sqr())
                .sum();
            assert!(res.sqrt() < 1e-12);
        }
    }

    #[test]
    fn eigen_complex_hermitian_2x2() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let a = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let (vals, _) = a.hermitian_eigen().unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-13);
        assert!((vals[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn eigen_random_hermitian_diagonalizes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 2..=9 {
            let mut a = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                a.set(i, i, c(rng.random::<f64>() - 0.5, 0.0));
                for j in i + 1..n {
                    let v = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    a.set(i, j, v);
                    a.set(j, i, v.conj());
                }
            }
            let (vals, vecs) = a.hermitian_eigen().unwrap();
            // V should be unitary and A V = V diag(vals)
            assert!(vecs.unitary_deviation() < 1e-12);
            let av = a.mul(&vecs).unwrap();
            let vd = vecs.mul(&ComplexMatrix::from_diag(
                &vals.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>(),
            ))
            .unwrap();
            assert!(av.max_abs_diff(&vd) < 1e-11);
            let tr: f64 = vals.iter().sum();
            assert!((tr - a.trace().re).abs() < 1e-11);
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.5, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(a.hermitian_eigen(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn completion_builds_unitary_with_given_first_column() {
        let v = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let m = complete_orthonormal(&v).unwrap();
        assert!(m.unitary_deviation() < 1e-12);
        assert!((m.get(0, 0) - v[0]).norm() < 1e-12);
        assert!((m.get(1, 0) - v[1]).norm() < 1e-12);
    }

    #[test]
    fn completion_skips_parallel_seed() {
        // first vector is e0 itself, so the e0 seed must be skipped
        let v = vec![Complex64::ONE, Complex64::ZERO, Complex64::ZERO];
        let m = complete_orthonormal(&v).unwrap();
        assert!(m.unitary_deviation() < 1e-12);
    }

    #[test]
    fn mgs_produces_unitary_with_positive_diagonal_r() {
        let mut m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(2.0, -1.0)],
            vec![c(0.0, 3.0), c(1.0, 0.5)],
        ])
        .unwrap();
        let original = m.clone();
        mgs_orthonormalize(&mut m).unwrap();
        assert!(m.unitary_deviation() < 1e-13);
        // R = Q† A must have positive real diagonal
        let r = m.adjoint().mul(&original).unwrap();
        for i in 0..2 {
            let d = r.get(i, i);
            assert!(d.re > 0.0 && d.im.abs() < 1e-13);
        }
    }
}
