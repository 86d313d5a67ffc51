use std::fmt::Debug;

use super::spd::{karcher_mean, normalized_weights, spd_dist, spd_exp, spd_log, SpdPoint};
use super::sym::SymMatrix;
use crate::error::{Error, Result};

/// The codomain of an approximation problem: a metric space with
/// exponential/logarithm maps and a weighted mean.
pub trait ValueSpace: Send + Sync {
    type Value: Clone + Debug + Send + Sync;
    type Tangent: Clone + Debug + Send + Sync;

    fn dist(&self, a: &Self::Value, b: &Self::Value) -> Result<f64>;
    fn log_at(&self, base: &Self::Value, target: &Self::Value) -> Result<Self::Tangent>;
    fn exp_at(&self, base: &Self::Value, v: &Self::Tangent) -> Result<Self::Value>;
    /// Weighted mean with nonnegative weights summing to one.
    fn weighted_mean(&self, values: &[Self::Value], weights: &[f64]) -> Result<Self::Value>;
}

/// The real line with ordinary arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarLine;

impl ValueSpace for ScalarLine {
    type Value = f64;
    type Tangent = f64;

    fn dist(&self, a: &f64, b: &f64) -> Result<f64> {
        Ok((a - b).abs())
    }

    fn log_at(&self, base: &f64, target: &f64) -> Result<f64> {
        Ok(target - base)
    }

    fn exp_at(&self, base: &f64, v: &f64) -> Result<f64> {
        Ok(base + v)
    }

    fn weighted_mean(&self, values: &[f64], weights: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if values.len() != weights.len() {
            return Err(Error::BadWeights(format!(
                "{} weights for {} values",
                weights.len(),
                values.len()
            )));
        }
        let weights = normalized_weights(weights)?;
        // Offsets from the first value keep constant inputs exact.
        let reference = values[0];
        let offset: f64 = values.iter().zip(&weights).map(|(v, w)| w * (v - reference)).sum();
        Ok(reference + offset)
    }
}

/// SPD matrices with the affine-invariant metric; the mean is the Karcher mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpdManifold<const D: usize>;

impl<const D: usize> ValueSpace for SpdManifold<D> {
    type Value = SpdPoint<D>;
    type Tangent = SymMatrix<D>;

    fn dist(&self, a: &SpdPoint<D>, b: &SpdPoint<D>) -> Result<f64> {
        spd_dist(a, b)
    }

    fn log_at(&self, base: &SpdPoint<D>, target: &SpdPoint<D>) -> Result<SymMatrix<D>> {
        spd_log(base, target)
    }

    fn exp_at(&self, base: &SpdPoint<D>, v: &SymMatrix<D>) -> Result<SpdPoint<D>> {
        spd_exp(base, v)
    }

    fn weighted_mean(&self, values: &[SpdPoint<D>], weights: &[f64]) -> Result<SpdPoint<D>> {
        Ok(karcher_mean(values, weights)?.mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sym::Sym3;

    #[test]
    fn scalar_line_is_plain_arithmetic() {
        let s = ScalarLine;
        assert_eq!(s.weighted_mean(&[2.0, 4.0], &[0.5, 0.5]).unwrap(), 3.0);
        assert_eq!(s.dist(&-1.0, &2.5).unwrap(), 3.5);
        assert_eq!(s.log_at(&1.0, &4.0).unwrap(), 3.0);
        assert_eq!(s.exp_at(&1.0, &3.0).unwrap(), 4.0);
        assert!(s.weighted_mean(&[], &[]).is_err());
    }

    #[test]
    fn spd_space_delegates_to_geometry() {
        let s = SpdManifold::<3>;
        let a = SpdPoint::new(Sym3::from_diagonal([1.0, 4.0, 9.0])).unwrap();
        let b = SpdPoint::new(Sym3::from_diagonal([4.0, 1.0, 1.0])).unwrap();
        let m = s.weighted_mean(&[a, b], &[0.5, 0.5]).unwrap();
        let want = Sym3::from_diagonal([2.0, 2.0, 3.0]);
        assert!((*m.as_sym() - want).frobenius_norm() < 1e-10);
        let v = s.log_at(&a, &b).unwrap();
        let back = s.exp_at(&a, &v).unwrap();
        assert!(s.dist(&back, &b).unwrap() < 1e-10);
    }
}
