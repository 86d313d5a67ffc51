//! Target functions, noise models and site sampling.

use std::f64::consts::PI;

use nalgebra::SMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{mat_exp_sym, Spd3, Sym3, SymMatrix};
use crate::Point;

/// Grid resolution (per axis) and number of noise draws per grid point
/// used for the numeric SPD signal-to-noise ratio.
pub const SNR_GRID: usize = 50;
pub const SNR_DRAWS: usize = 1000;

/// Noise standard deviation `p`, with `SNR = 1 / p²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    p: f64,
}

impl NoiseSpec {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::InvalidConfig(format!("noise scale must be >= 0, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn from_snr(snr: f64) -> Result<Self> {
        if !(snr > 0.0) {
            return Err(Error::InvalidConfig(format!("SNR must be positive, got {snr}")));
        }
        Self::new(1.0 / snr.sqrt())
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// `exp(x² + y²) + 3`.
pub fn target_smooth(x: f64, y: f64) -> f64 {
    (x * x + y * y).exp() + 3.0
}

/// `sin(2πx) cos(4πy) (1 + ν p)`; `nu = 0` gives the noiseless target.
pub fn target_wave(x: f64, y: f64, nu: f64, p: f64) -> f64 {
    (2.0 * PI * x).sin() * (4.0 * PI * y).cos() * (1.0 + nu * p)
}

/// The symmetric tangent-space field `A(x, y)` underlying the SPD target.
pub fn spd_field(x: f64, y: f64) -> Sym3 {
    let a11 = (2.0 * PI * y).sin() * (2.0 * PI * x).cos();
    let a33 = (PI * x).cos();
    Sym3::from_rows([[a11, y * y, x * y], [y * y, 1.0, 0.0], [x * y, 0.0, a33]])
        .expect("symmetric by construction")
}

/// `exp(sym(A (I + p Σ)))`, where `sym(B) = (B + Bᵀ)/2`. With `p = 0` this
/// is the noiseless `exp(A)`.
pub fn target_spd(x: f64, y: f64, sigma: &Sym3, p: f64) -> Result<Spd3> {
    let a = spd_field(x, y);
    let b = a.as_matrix() * (SMatrix::<f64, 3, 3>::identity() + sigma.as_matrix() * p);
    mat_exp_sym(&Sym3::symmetrize(&b))
}

/// Symmetric matrix with i.i.d. standard normal entries on and above the
/// diagonal, drawn row by row.
pub fn random_symmetric_gaussian<const D: usize, R: Rng + ?Sized>(rng: &mut R) -> SymMatrix<D> {
    SymMatrix::from_upper(|_, _| rng.sample(StandardNormal))
}

/// I.i.d. uniform points on the unit square.
pub fn sample_sites<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<Point> {
    (0..count).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
}

/// Uniform `n x n` evaluation grid on `[0.05, 0.95]²` (the center for `n = 1`).
pub fn eval_grid(n: usize) -> Vec<Point> {
    let coord = |k: usize| {
        if n <= 1 {
            0.5
        } else {
            0.05 + 0.9 * k as f64 / (n - 1) as f64
        }
    };
    (0..n).flat_map(|i| (0..n).map(move |j| [coord(i), coord(j)])).collect()
}

/// Monte-Carlo mean of `‖A‖_F² / ‖A Σ‖_F²` over a `grid x grid` lattice on
/// the unit square with `draws` fresh `Σ` per lattice point.
pub fn frobenius_snr<const D: usize, R: Rng + ?Sized>(
    field: impl Fn(f64, f64) -> SymMatrix<D>,
    grid: usize,
    draws: usize,
    rng: &mut R,
) -> f64 {
    let step = if grid > 1 { 1.0 / (grid - 1) as f64 } else { 0.0 };
    let mut total = 0.0;
    for i in 0..grid {
        for j in 0..grid {
            let a = field(i as f64 * step, j as f64 * step);
            let signal = a.frobenius_norm().powi(2);
            for _ in 0..draws {
                let sigma = random_symmetric_gaussian::<D, R>(rng);
                total += signal / (a.as_matrix() * sigma.as_matrix()).norm_squared();
            }
        }
    }
    total / (grid * grid * draws) as f64
}

/// Noise scale of the SPD experiment together with its numeric SNR ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdSnr {
    pub p: f64,
    /// Mean of `‖A‖_F² / ‖A Σ‖_F²`; this ratio does not involve `p`.
    pub ratio: f64,
}

pub fn snr_numeric_spd<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<SpdSnr> {
    if !(p > 0.0) {
        return Err(Error::InvalidConfig(format!("noise scale must be positive, got {p}")));
    }
    let ratio = frobenius_snr(spd_field, SNR_GRID, SNR_DRAWS, rng);
    Ok(SpdSnr { p, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sym_eig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    #[test]
    fn smooth_target_values() {
        assert_eq!(target_smooth(0.0, 0.0), 4.0);
        assert!((target_smooth(1.0, 0.0) - (E + 3.0)).abs() < 1e-15);
        assert_eq!(target_smooth(0.3, 0.8), target_smooth(0.8, 0.3));
    }

    #[test]
    fn wave_target_values() {
        assert!((target_wave(0.25, 0.0, 0.0, 0.5) - 1.0).abs() < 1e-15);
        assert!((target_wave(0.25, 0.25, 0.0, 0.5) + 1.0).abs() < 1e-15);
        assert_eq!(target_wave(0.0, 0.3, 1.7, 2.0), 0.0);
    }

    #[test]
    fn spd_field_entries() {
        let a = spd_field(0.5, 1.0);
        assert!(a.get(0, 0).abs() < 1e-15);
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(a.get(0, 2), 0.5);
        assert!(a.get(2, 2).abs() < 1e-15);
        let origin = target_spd(0.0, 0.0, &Sym3::zeros(), 0.0).unwrap();
        assert!((*origin.as_sym() - Sym3::from_diagonal([1.0, E, E])).frobenius_norm() < 1e-14);
    }

    #[test]
    fn noiseless_spd_target_is_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in sample_sites(200, &mut rng) {
            let g = target_spd(p[0], p[1], &Sym3::identity(), 0.0).unwrap();
            assert!(sym_eig(g.as_sym()).unwrap().min_eigenvalue() > 0.0);
        }
    }

    #[test]
    fn noise_spec_from_snr() {
        assert_eq!(NoiseSpec::from_snr(4.0).unwrap().p(), 0.5);
        assert_eq!(NoiseSpec::from_snr(0.25).unwrap().p(), 2.0);
        assert!(NoiseSpec::from_snr(0.0).is_err());
        assert!(NoiseSpec::new(-1.0).is_err());
    }

    #[test]
    fn sites_in_unit_square_and_seeded() {
        let a = sample_sites(196, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a.len(), 196);
        assert!(a.iter().flatten().all(|c| (0.0..=1.0).contains(c)));
        assert_eq!(a, sample_sites(196, &mut ChaCha8Rng::seed_from_u64(3)));
        assert_eq!(sample_sites(121, &mut ChaCha8Rng::seed_from_u64(4)).len(), 121);
    }

    #[test]
    fn eval_grid_layout() {
        let g = eval_grid(21);
        assert_eq!(g.len(), 441);
        assert_eq!(g[0], [0.05, 0.05]);
        assert!((g[440][0] - 0.95).abs() < 1e-15 && (g[440][1] - 0.95).abs() < 1e-15);
        assert_eq!(eval_grid(1), vec![[0.5, 0.5]]);
    }

    #[test]
    fn snr_ratio_ignores_p_and_field_scale() {
        let a = snr_numeric_spd(0.1, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = snr_numeric_spd(1.0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a.ratio, b.ratio);
        let scaled = frobenius_snr(|x, y| spd_field(x, y) * 7.5, SNR_GRID, 20, &mut ChaCha8Rng::seed_from_u64(6));
        let plain = frobenius_snr(spd_field, SNR_GRID, 20, &mut ChaCha8Rng::seed_from_u64(6));
        assert!((scaled - plain).abs() <= 1e-12 * plain);
        assert!(snr_numeric_spd(0.0, &mut ChaCha8Rng::seed_from_u64(5)).is_err());
    }

    #[test]
    fn one_by_one_snr_matches_direct_simulation() {
        let field = |_: f64, _: f64| SymMatrix::<1>::from_diagonal([2.0]);
        let got = frobenius_snr(field, 3, 200, &mut ChaCha8Rng::seed_from_u64(7));
        // Same stream, drawn directly: ‖2‖² / ‖2σ‖² = 1 / σ².
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 9 * 200;
        let oracle = (0..n)
            .map(|_| {
                let s: f64 = rng.sample(StandardNormal);
                1.0 / (s * s)
            })
            .sum::<f64>()
            / n as f64;
        assert!((got - oracle).abs() <= 1e-12 * oracle);
    }
}
