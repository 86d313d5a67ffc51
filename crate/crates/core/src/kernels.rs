//! Radial kernels on the normalized radius `u = r / δ`, and the mesh norm
//! used to pick `δ` from the data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Point;

/// Candidate grid used to estimate the fill distance: `MESH_GRID x MESH_GRID`
/// points on the unit square.
pub const MESH_GRID: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// `exp(-2 u²)`, global support.
    Gaussian,
    /// `(1 - u)₊⁴ (4u + 1)`, the C² Wendland function, supported on `u < 1`.
    Wendland,
}

impl KernelFamily {
    /// Kernel profile; `u` must be nonnegative.
    #[inline]
    pub fn profile(self, u: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => (-2.0 * u * u).exp(),
            KernelFamily::Wendland => {
                if u >= 1.0 {
                    0.0
                } else {
                    let t = 1.0 - u;
                    let t2 = t * t;
                    t2 * t2 * (4.0 * u + 1.0)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    delta: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("kernel scale must be positive, got {delta}")));
        }
        Ok(Self { family, delta })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Kernel value at a normalized radius.
    pub fn eval(&self, u: f64) -> Result<f64> {
        kernel_eval(self.family, u)
    }

    /// Kernel weight of a site at Euclidean distance `r` from the query.
    #[inline]
    pub fn weight(&self, r: f64) -> f64 {
        self.family.profile(r / self.delta)
    }
}

pub fn kernel_eval(family: KernelFamily, u: f64) -> Result<f64> {
    if u < 0.0 || u.is_nan() {
        return Err(Error::NegativeRadius(u));
    }
    Ok(family.profile(u))
}

/// Fill distance `sup_y min_i ‖y - x_i‖` of `sites` in the unit square,
/// with the supremum taken over a `MESH_GRID x MESH_GRID` candidate grid.
pub fn mesh_norm(sites: &[Point]) -> Result<f64> {
    if sites.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let step = 1.0 / (MESH_GRID - 1) as f64;
    let mut worst_sq: f64 = 0.0;
    for gi in 0..MESH_GRID {
        let gx = gi as f64 * step;
        for gj in 0..MESH_GRID {
            let gy = gj as f64 * step;
            let mut nearest_sq = f64::INFINITY;
            for s in sites {
                let dx = s[0] - gx;
                let dy = s[1] - gy;
                let d = dx * dx + dy * dy;
                if d < nearest_sq {
                    nearest_sq = d;
                    // This candidate can no longer raise the maximum.
                    if nearest_sq <= worst_sq {
                        break;
                    }
                }
            }
            worst_sq = worst_sq.max(nearest_sq);
        }
    }
    Ok(worst_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wendland_values() {
        assert_eq!(kernel_eval(KernelFamily::Wendland, 0.0).unwrap(), 1.0);
        assert_eq!(kernel_eval(KernelFamily::Wendland, 1.0).unwrap(), 0.0);
        assert_eq!(kernel_eval(KernelFamily::Wendland, 2.0).unwrap(), 0.0);
        assert!((kernel_eval(KernelFamily::Wendland, 0.5).unwrap() - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn gaussian_values() {
        assert_eq!(kernel_eval(KernelFamily::Gaussian, 0.0).unwrap(), 1.0);
        assert!((kernel_eval(KernelFamily::Gaussian, 1.0).unwrap() - (-2f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn negative_radius_is_rejected() {
        for family in [KernelFamily::Gaussian, KernelFamily::Wendland] {
            assert_eq!(kernel_eval(family, -0.1), Err(Error::NegativeRadius(-0.1)));
        }
    }

    #[test]
    fn kernels_are_nonincreasing() {
        for family in [KernelFamily::Gaussian, KernelFamily::Wendland] {
            let values: Vec<f64> =
                (0..1000).map(|k| kernel_eval(family, k as f64 * 0.003).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[1] <= w[0]), "{family:?}");
            assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn wendland_vanishes_outside_support() {
        for k in 0..1000 {
            let u = 1.0 + k as f64 * 0.01;
            assert_eq!(kernel_eval(KernelFamily::Wendland, u).unwrap(), 0.0);
        }
    }

    #[test]
    fn spec_rejects_nonpositive_scale() {
        assert!(KernelSpec::new(KernelFamily::Gaussian, 0.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Gaussian, f64::NAN).is_err());
        let k = KernelSpec::new(KernelFamily::Wendland, 0.5).unwrap();
        assert!((k.weight(0.25) - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn mesh_norm_single_center_site() {
        let h = mesh_norm(&[[0.5, 0.5]]).unwrap();
        assert!((h - 0.5f64.sqrt()).abs() <= 0.01);
    }

    #[test]
    fn mesh_norm_corners() {
        let h = mesh_norm(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!((h - 0.5 * 2f64.sqrt()).abs() <= 0.01);
    }

    #[test]
    fn mesh_norm_empty() {
        assert_eq!(mesh_norm(&[]), Err(Error::EmptyDataset));
    }

    #[test]
    fn mesh_norm_shrinks_under_insertion() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.random_range(2..60);
            let sites: Vec<Point> =
                (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
            let k = rng.random_range(1..n);
            let subset = &sites[..k];
            assert!(mesh_norm(&sites).unwrap() <= mesh_norm(subset).unwrap());
        }
    }

    #[test]
    fn mesh_norm_pruning_matches_plain_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let sites: Vec<Point> =
            (0..40).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let step = 1.0 / (MESH_GRID - 1) as f64;
        let mut plain: f64 = 0.0;
        for gi in 0..MESH_GRID {
            for gj in 0..MESH_GRID {
                let g = [gi as f64 * step, gj as f64 * step];
                let nearest = sites
                    .iter()
                    .map(|s| crate::distance(s, &g))
                    .fold(f64::INFINITY, f64::min);
                plain = plain.max(nearest);
            }
        }
        assert!((mesh_norm(&sites).unwrap() - plain).abs() < 1e-15);
    }
}
