//! Riemannian structure of the SPD cone under the affine-invariant metric.
//!
//! With `p^{1/2}` the principal square root,
//!
//! ```text
//! exp_p(v) = p^{1/2} exp(p^{-1/2} v p^{-1/2}) p^{1/2}
//! log_p(q) = p^{1/2} log(p^{-1/2} q p^{-1/2}) p^{1/2}
//! ρ(p, q)  = ‖log(p^{-1/2} q p^{-1/2})‖_F
//! ```
//!
//! The "whitened" tangent `p^{-1/2} v p^{-1/2}` is the image of `v` under the
//! isometry that carries `p` to the identity; its Frobenius norm is the
//! Riemannian norm of `v` at `p`.

use super::sym::{sym_eig, SymMatrix};
use crate::error::{Error, Result};

/// Eigenvalue floor below which a matrix is not treated as positive definite.
pub const SPD_MIN_EIGENVALUE: f64 = 1e-12;

/// Karcher iteration stops once the whitened update has Frobenius norm below this.
pub const KARCHER_TOLERANCE: f64 = 1e-10;
pub const KARCHER_MAX_ITERATIONS: usize = 100;

/// Weight sums within this distance of one are renormalized silently.
const WEIGHT_SUM_SLACK: f64 = 1e-9;

/// A symmetric positive definite matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdPoint<const D: usize>(SymMatrix<D>);

pub type Spd3 = SpdPoint<3>;

impl<const D: usize> SpdPoint<D> {
    /// Validates `m` by its smallest eigenvalue.
    pub fn new(m: SymMatrix<D>) -> Result<Self> {
        let min_eigenvalue = sym_eig(&m)?.min_eigenvalue();
        if min_eigenvalue > SPD_MIN_EIGENVALUE {
            Ok(Self(m))
        } else {
            Err(Error::NotSpd { min_eigenvalue })
        }
    }

    pub fn identity() -> Self {
        Self(SymMatrix::identity())
    }

    pub fn as_sym(&self) -> &SymMatrix<D> {
        &self.0
    }

    /// `(p^{1/2}, p^{-1/2})` from a single eigendecomposition.
    pub fn sqrt_pair(&self) -> Result<(SymMatrix<D>, SymMatrix<D>)> {
        let eig = sym_eig(&self.0)?;
        let min_eigenvalue = eig.min_eigenvalue();
        if min_eigenvalue <= SPD_MIN_EIGENVALUE {
            return Err(Error::NotSpd { min_eigenvalue });
        }
        Ok((eig.recompose(f64::sqrt), eig.recompose(|l| 1.0 / l.sqrt())))
    }
}

/// Matrix exponential of a symmetric matrix.
pub fn mat_exp_sym<const D: usize>(v: &SymMatrix<D>) -> Result<SpdPoint<D>> {
    Ok(SpdPoint(v.map_spectrum(f64::exp)?))
}

/// Principal matrix logarithm of an SPD matrix.
pub fn mat_log_spd<const D: usize>(p: &SpdPoint<D>) -> Result<SymMatrix<D>> {
    log_checked(&p.0)
}

fn log_checked<const D: usize>(m: &SymMatrix<D>) -> Result<SymMatrix<D>> {
    let eig = sym_eig(m)?;
    let min_eigenvalue = eig.min_eigenvalue();
    if min_eigenvalue <= SPD_MIN_EIGENVALUE {
        return Err(Error::NotSpd { min_eigenvalue });
    }
    Ok(eig.recompose(f64::ln))
}

/// Riemannian exponential at `base`.
pub fn spd_exp<const D: usize>(base: &SpdPoint<D>, v: &SymMatrix<D>) -> Result<SpdPoint<D>> {
    let (sqrt, inv_sqrt) = base.sqrt_pair()?;
    exp_whitened(&sqrt, &v.sandwich(&inv_sqrt))
}

/// Riemannian logarithm: the tangent at `base` pointing to `target`.
pub fn spd_log<const D: usize>(base: &SpdPoint<D>, target: &SpdPoint<D>) -> Result<SymMatrix<D>> {
    let (sqrt, inv_sqrt) = base.sqrt_pair()?;
    Ok(log_whitened(&inv_sqrt, target)?.sandwich(&sqrt))
}

/// Affine-invariant geodesic distance.
pub fn spd_dist<const D: usize>(a: &SpdPoint<D>, b: &SpdPoint<D>) -> Result<f64> {
    let (_, inv_sqrt) = a.sqrt_pair()?;
    let eig = sym_eig(&b.0.sandwich(&inv_sqrt))?;
    let min_eigenvalue = eig.min_eigenvalue();
    if min_eigenvalue <= SPD_MIN_EIGENVALUE {
        return Err(Error::NotSpd { min_eigenvalue });
    }
    Ok(eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// `log(p^{-1/2} q p^{-1/2})` given `p^{-1/2}`: the tangent from `p` to `q`
/// expressed in the identity frame.
pub fn log_whitened<const D: usize>(
    inv_sqrt: &SymMatrix<D>,
    target: &SpdPoint<D>,
) -> Result<SymMatrix<D>> {
    log_checked(&target.0.sandwich(inv_sqrt))
}

/// `p^{1/2} exp(w) p^{1/2}` given `p^{1/2}`: the inverse of [`log_whitened`].
pub fn exp_whitened<const D: usize>(
    sqrt: &SymMatrix<D>,
    whitened: &SymMatrix<D>,
) -> Result<SpdPoint<D>> {
    Ok(SpdPoint(mat_exp_sym(whitened)?.0.sandwich(sqrt)))
}

/// Outcome of the Karcher mean fixed-point iteration.
#[derive(Debug, Clone, Copy)]
pub struct KarcherMean<const D: usize> {
    pub mean: SpdPoint<D>,
    /// Frobenius norm of the last whitened update.
    pub residual: f64,
    pub iterations: usize,
}

/// Validates nonnegative weights and returns them normalized to sum one.
pub fn normalized_weights(weights: &[f64]) -> Result<Vec<f64>> {
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::BadWeights(format!("weight {w} is negative or not finite")));
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::BadWeights("weights sum to zero".into()));
    }
    if (sum - 1.0).abs() > WEIGHT_SUM_SLACK {
        return Err(Error::BadWeights(format!("weights sum to {sum}, expected 1")));
    }
    Ok(weights.iter().map(|w| w / sum).collect())
}

/// Weighted Karcher (Fréchet) mean, iterating
/// `μ ← exp_μ(Σ w_i log_μ(p_i))` from the heaviest point.
pub fn karcher_mean<const D: usize>(
    points: &[SpdPoint<D>],
    weights: &[f64],
) -> Result<KarcherMean<D>> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if points.len() != weights.len() {
        return Err(Error::BadWeights(format!(
            "{} weights for {} points",
            weights.len(),
            points.len()
        )));
    }
    let weights = normalized_weights(weights)?;
    let active: Vec<(f64, &SpdPoint<D>)> = weights
        .iter()
        .zip(points)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, p)| (*w, p))
        .collect();

    // Heaviest point first; ties go to the lowest index.
    let start = active
        .iter()
        .enumerate()
        .fold(0, |best, (k, (w, _))| if *w > active[best].0 { k } else { best });
    let mut mean = *active[start].1;
    if active.len() == 1 {
        return Ok(KarcherMean {
            mean,
            residual: 0.0,
            iterations: 0,
        });
    }

    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < KARCHER_MAX_ITERATIONS {
        let (sqrt, inv_sqrt) = mean.sqrt_pair()?;
        let mut step = SymMatrix::zeros();
        for (w, p) in &active {
            step = step + log_whitened(&inv_sqrt, p)? * *w;
        }
        residual = step.frobenius_norm();
        mean = exp_whitened(&sqrt, &step)?;
        iterations += 1;
        if residual <= KARCHER_TOLERANCE {
            break;
        }
    }
    Ok(KarcherMean {
        mean,
        residual,
        iterations,
    })
}
