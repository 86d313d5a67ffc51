//! Single-scale quasi-interpolation operators.
//!
//! All operators weight data site `x_i` by `K(‖x_i - s‖ / δ)` at the query
//! `s`. When every weight vanishes (a compactly supported kernel with no site
//! in range) they return the value at the nearest site.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{karcher_mean, sym_eig, SpdPoint, Sym3, SymMatrix};
use crate::kernels::KernelSpec;
use crate::{distance, Point};

/// Tikhonov shift added to the MLS normal matrix before solving.
pub const MLS_REGULARIZATION: f64 = 1e-12;
/// MLS falls back to the Shepard mean above this normal-matrix condition number.
pub const MLS_MAX_CONDITION: f64 = 1e12;

/// Data sites paired with samples of the function to approximate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteredDataset<V> {
    sites: Vec<Point>,
    values: Vec<V>,
}

impl<V: Clone> ScatteredDataset<V> {
    pub fn new(sites: Vec<Point>, values: Vec<V>) -> Result<Self> {
        if sites.len() != values.len() {
            return Err(Error::LengthMismatch {
                sites: sites.len(),
                values: values.len(),
            });
        }
        if sites.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self { sites, values })
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// The sub-dataset at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.sites[i]).collect(),
            indices.iter().map(|&i| self.values[i].clone()).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Shepard,
    Mls,
}

/// Normalized Shepard weights at one query.
#[derive(Debug, Clone, PartialEq)]
pub enum ShepardWeights {
    /// `(site index, weight)` for every site with positive kernel weight;
    /// the weights sum to one.
    Weighted(Vec<(usize, f64)>),
    /// No site lies in the kernel support; use this (nearest) site.
    Nearest(usize),
}

pub fn shepard_weights(sites: &[Point], kernel: &KernelSpec, s: &Point) -> Result<ShepardWeights> {
    if sites.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut active = Vec::new();
    let mut total = 0.0;
    for (i, x) in sites.iter().enumerate() {
        let w = kernel.weight(distance(x, s));
        if w > 0.0 {
            active.push((i, w));
            total += w;
        }
    }
    if active.is_empty() {
        return Ok(ShepardWeights::Nearest(nearest_site(sites, s)));
    }
    for (_, w) in &mut active {
        *w /= total;
    }
    Ok(ShepardWeights::Weighted(active))
}

/// Index of the site closest to `s`; ties go to the lowest index.
pub fn nearest_site(sites: &[Point], s: &Point) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, x) in sites.iter().enumerate() {
        let d = distance(x, s);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Convex combination of `values` under normalized weights.
///
/// Accumulates offsets from the first active value so that constant data
/// is reproduced exactly, and clamps to the active range.
pub(crate) fn convex_combination(values: &[f64], weights: &[(usize, f64)]) -> f64 {
    let reference = values[weights[0].0];
    let mut lo = reference;
    let mut hi = reference;
    let mut offset = 0.0;
    for &(i, w) in weights {
        let v = values[i];
        lo = lo.min(v);
        hi = hi.max(v);
        offset += w * (v - reference);
    }
    (reference + offset).clamp(lo, hi)
}

/// Shepard quasi-interpolant `Σ f_i K(r_i) / Σ K(r_i)`.
pub fn shepard_eval(data: &ScatteredDataset<f64>, kernel: &KernelSpec, s: &Point) -> Result<f64> {
    Ok(match shepard_weights(&data.sites, kernel, s)? {
        ShepardWeights::Weighted(w) => convex_combination(&data.values, &w),
        ShepardWeights::Nearest(i) => data.values[i],
    })
}

/// Shepard weights applied through the Karcher mean.
pub fn shepard_eval_manifold<const D: usize>(
    data: &ScatteredDataset<SpdPoint<D>>,
    kernel: &KernelSpec,
    s: &Point,
) -> Result<SpdPoint<D>> {
    match shepard_weights(&data.sites, kernel, s)? {
        ShepardWeights::Weighted(w) => {
            let points: Vec<SpdPoint<D>> = w.iter().map(|&(i, _)| data.values[i]).collect();
            let weights: Vec<f64> = w.iter().map(|&(_, wi)| wi).collect();
            Ok(karcher_mean(&points, &weights)?.mean)
        }
        ShepardWeights::Nearest(i) => Ok(data.values[i]),
    }
}

/// Linear moving least squares: the value at `s` of the degree-1 polynomial
/// minimizing `Σ K(r_i) (p(x_i) - f_i)²`.
///
/// The normal equations are assembled in the basis `{1, (x - s)/δ}` with
/// weights normalized to sum one, so the constant coefficient is `p(s)` and
/// the condition number is independent of the data scale. Rank-deficient
/// configurations (fewer than three sites in general position) fall back to
/// the Shepard mean.
pub fn mls_eval(data: &ScatteredDataset<f64>, kernel: &KernelSpec, s: &Point) -> Result<f64> {
    let weights = match shepard_weights(&data.sites, kernel, s)? {
        ShepardWeights::Weighted(w) => w,
        ShepardWeights::Nearest(i) => return Ok(data.values[i]),
    };
    let inv_delta = 1.0 / kernel.delta();
    // Fit offsets from the Shepard value: the fit reproduces constants, and
    // this keeps the regularization from biasing constant data.
    let shepard = convex_combination(&data.values, &weights);
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for &(i, w) in &weights {
        let x = data.sites[i];
        let b = Vector3::new(1.0, (x[0] - s[0]) * inv_delta, (x[1] - s[1]) * inv_delta);
        normal += b * b.transpose() * w;
        rhs += b * (w * (data.values[i] - shepard));
    }

    let eig = sym_eig(&Sym3::symmetrize(&normal))?;
    let (max, min) = (eig.eigenvalues[0], eig.min_eigenvalue());
    if !(min > 0.0) || max / min > MLS_MAX_CONDITION {
        return Ok(shepard);
    }
    let regularized = normal + Matrix3::identity() * MLS_REGULARIZATION;
    match regularized.cholesky() {
        Some(chol) => Ok(shepard + chol.solve(&rhs)[0]),
        None => Ok(shepard),
    }
}

/// A single-scale scalar operator bound to its data and kernel.
#[derive(Debug, Clone)]
pub struct Approximant {
    data: ScatteredDataset<f64>,
    kernel: KernelSpec,
    method: Method,
}

impl Approximant {
    pub fn new(data: ScatteredDataset<f64>, kernel: KernelSpec, method: Method) -> Self {
        Self {
            data,
            kernel,
            method,
        }
    }

    pub fn data(&self) -> &ScatteredDataset<f64> {
        &self.data
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn eval(&self, s: &Point) -> Result<f64> {
        match self.method {
            Method::Shepard => shepard_eval(&self.data, &self.kernel, s),
            Method::Mls => mls_eval(&self.data, &self.kernel, s),
        }
    }
}

/// Manifold Shepard operator bound to SPD-valued data.
#[derive(Debug, Clone)]
pub struct ManifoldShepard<const D: usize> {
    data: ScatteredDataset<SpdPoint<D>>,
    kernel: KernelSpec,
}

impl<const D: usize> ManifoldShepard<D> {
    pub fn new(data: ScatteredDataset<SpdPoint<D>>, kernel: KernelSpec) -> Self {
        Self { data, kernel }
    }

    pub fn data(&self) -> &ScatteredDataset<SpdPoint<D>> {
        &self.data
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn eval(&self, s: &Point) -> Result<SpdPoint<D>> {
        shepard_eval_manifold(&self.data, &self.kernel, s)
    }
}

/// Entrywise Shepard interpolation of a field of symmetric matrices.
#[derive(Debug, Clone)]
pub struct TangentShepard<const D: usize> {
    data: ScatteredDataset<SymMatrix<D>>,
    kernel: KernelSpec,
}

impl<const D: usize> TangentShepard<D> {
    pub fn new(data: ScatteredDataset<SymMatrix<D>>, kernel: KernelSpec) -> Self {
        Self { data, kernel }
    }

    pub fn data(&self) -> &ScatteredDataset<SymMatrix<D>> {
        &self.data
    }

    pub fn eval(&self, s: &Point) -> Result<SymMatrix<D>> {
        Ok(match shepard_weights(&self.data.sites, &self.kernel, s)? {
            ShepardWeights::Weighted(w) => w
                .iter()
                .fold(SymMatrix::zeros(), |acc, &(i, wi)| acc + self.data.values[i] * wi),
            ShepardWeights::Nearest(i) => self.data.values[i],
        })
    }
}
