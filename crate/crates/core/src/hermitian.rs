//! Dense complex Hermitian matrices and the spectral primitives the
//! estimators consume: masked construction, matvec, leading eigenvector.
//!
//! Storage is a dense row-major square of `Complex64` with both triangles
//! materialized. Constructors write one triangle and mirror the other, so
//! conjugate symmetry holds exactly, not just within tolerance.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::par;
use crate::rng::rng_from;

/// Dense complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    /// The zero matrix of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        Self {
            dim: n,
            entries: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Builds from a generator over the upper triangle `j <= k`.
    ///
    /// The lower triangle is the conjugate mirror; diagonal values keep
    /// only their real part.
    pub fn from_upper<F>(n: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        let mut m = Self::zeros(n);
        for j in 0..n {
            for k in j..n {
                let v = f(j, k);
                if j == k {
                    m.entries[j * n + j] = Complex64::new(v.re, 0.0);
                } else {
                    m.entries[j * n + k] = v;
                    m.entries[k * n + j] = v.conj();
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.dim + k]
    }

    /// Sets the (j,k) entry and its conjugate mirror; a diagonal value
    /// keeps only its real part.
    pub fn set_pair(&mut self, j: usize, k: usize, v: Complex64) {
        let n = self.dim;
        if j == k {
            self.entries[j * n + j] = Complex64::new(v.re, 0.0);
        } else {
            self.entries[j * n + k] = v;
            self.entries[k * n + j] = v.conj();
        }
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.entries[j * self.dim..(j + 1) * self.dim]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.re == 0.0 && e.im == 0.0)
    }

    /// Gershgorin bound: the largest absolute row sum. Shifting by this
    /// value makes the matrix positive semidefinite.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|j| self.row(j).iter().map(|e| e.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Dense matrix-vector product; `result[j] = sum_k M[j][k] v[k]`.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        // Rows are independent, each with a sequential inner sum, so the
        // parallel result is bit-identical to the sequential one.
        Ok(par::map_indexed(self.dim, |j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, x) in self.row(j).iter().zip(v) {
                acc += m * x;
            }
            acc
        }))
    }
}

/// Entrywise product of a Hermitian data matrix with a 0/1 Hermitian mask.
pub fn hadamard_mask(data: &HermitianMatrix, mask: &HermitianMatrix) -> Result<HermitianMatrix> {
    if data.dim != mask.dim {
        return Err(Error::DimensionMismatch {
            expected: data.dim,
            found: mask.dim,
        });
    }
    let n = data.dim;
    for j in 0..n {
        for k in j..n {
            let m = mask.get(j, k);
            if m.im != 0.0 || (m.re != 0.0 && m.re != 1.0) {
                return Err(Error::NonBinaryMask {
                    row: j,
                    col: k,
                    value: m.re,
                });
            }
        }
    }
    Ok(HermitianMatrix::from_upper(n, |j, k| {
        if mask.get(j, k).re == 1.0 {
            data.get(j, k)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// An eigenpair with the solver's convergence certificate.
#[derive(Debug, Clone)]
pub struct EigPair {
    /// Eigenvalue (real; the matrix is Hermitian).
    pub value: f64,
    /// Unit-norm eigenvector.
    pub vector: Vec<Complex64>,
    pub converged: bool,
    pub iterations: usize,
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Leading eigenpair by power iteration on the Gershgorin-shifted matrix.
///
/// The shift `s = max_j sum_k |M[j][k]|` makes `M + sI` positive
/// semidefinite, so iterating it converges to the algebraically largest
/// eigenvalue of `M`. The start vector is seeded random complex; the
/// stopping rule is the successive-iterate angle `1 - |v_t^H v_{t-1}|`
/// because eigenvectors are phase classes, not points.
pub fn leading_eigenvector(
    m: &HermitianMatrix,
    tol: f64,
    max_iter: usize,
    rng_seed: u64,
) -> Result<EigPair> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
    }
    if m.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let n = m.dim;
    let shift = m.max_abs_row_sum();

    let mut rng = rng_from(rng_seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = l2_norm(&v);
    v.iter_mut().for_each(|x| *x /= norm);

    let mut converged = false;
    let mut iterations = max_iter;
    for it in 1..=max_iter {
        let mut w = m.matvec(&v)?;
        for (wj, vj) in w.iter_mut().zip(&v) {
            *wj += shift * vj;
        }
        let norm = l2_norm(&w);
        if norm == 0.0 {
            return Err(Error::IterationBreakdown);
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let overlap = dot(&w, &v).norm();
        v = w;
        if 1.0 - overlap < tol {
            converged = true;
            iterations = it;
            break;
        }
    }

    // Rayleigh quotient on the unshifted matrix; equals the shifted
    // quotient minus the shift.
    let mv = m.matvec(&v)?;
    let value = dot(&v, &mv).re;
    Ok(EigPair {
        value,
        vector: v,
        converged,
        iterations,
    })
}
