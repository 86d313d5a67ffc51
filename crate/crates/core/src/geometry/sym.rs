use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};

/// Maximum number of cyclic Jacobi sweeps before the eigensolver gives up.
const MAX_JACOBI_SWEEPS: usize = 64;

/// A real symmetric `D x D` matrix. Symmetry is exact: every constructor
/// either mirrors or averages with the transpose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix<const D: usize>(SMatrix<f64, D, D>);

pub type Sym3 = SymMatrix<3>;

impl<const D: usize> SymMatrix<D> {
    pub fn zeros() -> Self {
        Self(SMatrix::zeros())
    }

    pub fn identity() -> Self {
        Self(SMatrix::identity())
    }

    pub fn from_diagonal(diag: [f64; D]) -> Self {
        Self(SMatrix::from_diagonal(&SVector::from(diag)))
    }

    /// `(m + mᵀ) / 2`. Idempotent, and the identity on symmetric input.
    pub fn symmetrize(m: &SMatrix<f64, D, D>) -> Self {
        let mut out = *m;
        for i in 0..D {
            for j in (i + 1)..D {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        Self(out)
    }

    /// Builds the matrix from its upper triangle (`i <= j`), mirroring it below the diagonal.
    pub fn from_upper(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = SMatrix::zeros();
        for i in 0..D {
            for j in i..D {
                let v = f(i, j);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Self(out)
    }

    /// Row-major construction; fails unless the rows are exactly symmetric.
    pub fn from_rows(rows: [[f64; D]; D]) -> Option<Self> {
        let m = SMatrix::<f64, D, D>::from_fn(|i, j| rows[i][j]);
        if m != m.transpose() {
            return None;
        }
        Some(Self(m))
    }

    pub fn as_matrix(&self) -> &SMatrix<f64, D, D> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `g · self · gᵀ`, re-symmetrized to absorb rounding.
    pub fn congruence(&self, g: &SMatrix<f64, D, D>) -> Self {
        Self::symmetrize(&(g * self.0 * g.transpose()))
    }

    /// `a · self · a` for symmetric `a`.
    pub fn sandwich(&self, a: &SymMatrix<D>) -> Self {
        Self::symmetrize(&(a.0 * self.0 * a.0))
    }

    /// Applies a scalar function to the spectrum: `V · diag(f(λ)) · Vᵀ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let eig = sym_eig(self)?;
        Ok(eig.recompose(f))
    }
}

impl<const D: usize> Default for SymMatrix<D> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const D: usize> Add for SymMatrix<D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl<const D: usize> Sub for SymMatrix<D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl<const D: usize> Neg for SymMatrix<D> {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl<const D: usize> Mul<f64> for SymMatrix<D> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0 * rhs)
    }
}

/// Spectral decomposition `m = V · diag(λ) · Vᵀ` with eigenvalues sorted
/// in descending order and orthonormal eigenvector columns.
#[derive(Debug, Clone, Copy)]
pub struct SymEigen<const D: usize> {
    pub eigenvalues: [f64; D],
    pub eigenvectors: SMatrix<f64, D, D>,
}

impl<const D: usize> SymEigen<D> {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::INFINITY)
    }

    /// `V · diag(f(λ_i)) · Vᵀ`.
    pub fn recompose(&self, f: impl Fn(f64) -> f64) -> SymMatrix<D> {
        let v = &self.eigenvectors;
        let mut scaled = *v;
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            for i in 0..D {
                scaled[(i, k)] *= fl;
            }
        }
        SymMatrix::symmetrize(&(scaled * v.transpose()))
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig<const D: usize>(m: &SymMatrix<D>) -> Result<SymEigen<D>> {
    let mut a = m.0;
    let mut v = SMatrix::<f64, D, D>::identity();
    let scale = a.norm();
    let tol = (f64::EPSILON * 0.5 * scale).powi(2);

    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        for p in 0..D {
            for q in (p + 1)..D {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off <= tol || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..D {
            for q in (p + 1)..D {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.5 / theta
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..D {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let kp = c * akp - s * akq;
                    let kq = s * akp + c * akq;
                    a[(k, p)] = kp;
                    a[(p, k)] = kp;
                    a[(k, q)] = kq;
                    a[(q, k)] = kq;
                }
                for k in 0..D {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence);
    }

    let mut order: [usize; D] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues = std::array::from_fn(|k| a[(order[k], order[k])]);
    let eigenvectors = SMatrix::from_fn(|i, k| v[(i, order[k])]);
    Ok(SymEigen {
        eigenvalues,
        eigenvectors,
    })
}
