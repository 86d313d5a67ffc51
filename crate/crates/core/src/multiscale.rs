//! Nested data hierarchies and the iterative multiscale error-correction
//! scheme
//!
//! ```text
//! M_0 = 0,  E_0 f = f
//! M_i f = M_{i-1} f + Q_i E_{i-1} f
//! E_i f = E_{i-1} f - Q_i E_{i-1} f
//! ```
//!
//! where `Q_i` is a single-scale operator over the `i`-th subset. For SPD
//! data the sum and difference become the Riemannian exponential and
//! logarithm.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{exp_whitened, log_whitened, spd_exp, spd_log, SpdPoint, SymMatrix};
use crate::kernels::{mesh_norm, KernelFamily, KernelSpec};
use crate::operators::{Approximant, ManifoldShepard, Method, ScatteredDataset, TangentShepard};
use crate::Point;

/// Kernel support as a multiple of the mesh norm.
pub const DEFAULT_MESH_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchySpec {
    levels: usize,
    lambda: f64,
}

impl HierarchySpec {
    pub fn new(levels: usize, lambda: f64) -> Result<Self> {
        if levels < 1 {
            return Err(Error::InvalidConfig("at least one level is required".into()));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidConfig(format!("growth rate must lie in (0, 1], got {lambda}")));
        }
        Ok(Self { levels, lambda })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Nested index sets `X_1 ⊂ … ⊂ X_n`, each sorted ascending; the last one
/// holds every index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    subsets: Vec<Vec<usize>>,
}

impl Hierarchy {
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn levels(&self) -> usize {
        self.subsets.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.subsets.iter().map(Vec::len).collect()
    }
}

/// Draws `X_{i-1}` uniformly without replacement from `X_i`, with
/// `|X_{i-1}| = max(1, round(λ |X_i|))`, starting from all `n` indices.
pub fn build_hierarchy<R: Rng + ?Sized>(n: usize, spec: &HierarchySpec, rng: &mut R) -> Hierarchy {
    let mut subsets = vec![(0..n).collect::<Vec<usize>>()];
    for _ in 1..spec.levels {
        let parent = subsets.last().expect("nonempty");
        let size = ((spec.lambda * parent.len() as f64).round() as usize).clamp(1, parent.len());
        let mut child: Vec<usize> = index::sample(rng, parent.len(), size)
            .into_iter()
            .map(|k| parent[k])
            .collect();
        child.sort_unstable();
        subsets.push(child);
    }
    subsets.reverse();
    Hierarchy { subsets }
}

/// How each level picks its kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelRule {
    /// `δ = factor · mesh_norm(level sites)`, recomputed per level.
    MeshScaled { family: KernelFamily, factor: f64 },
    Fixed(KernelSpec),
}

impl KernelRule {
    pub fn mesh_scaled(family: KernelFamily) -> Self {
        KernelRule::MeshScaled {
            family,
            factor: DEFAULT_MESH_FACTOR,
        }
    }

    pub fn kernel_for(&self, sites: &[Point]) -> Result<KernelSpec> {
        match *self {
            KernelRule::MeshScaled { family, factor } => {
                KernelSpec::new(family, factor * mesh_norm(sites)?)
            }
            KernelRule::Fixed(spec) => Ok(spec),
        }
    }
}

/// A fitted scalar multiscale approximant `M_n = s_1 + … + s_n`.
#[derive(Debug, Clone)]
pub struct MultiscaleScalar {
    levels: Vec<Approximant>,
    residuals: Vec<Vec<f64>>,
    max_level_residual: Vec<f64>,
}

impl MultiscaleScalar {
    pub fn levels(&self) -> &[Approximant] {
        &self.levels
    }

    /// `E_i f` at every data site, for `i = 0..=n` (`E_0 f = f`).
    pub fn residuals(&self) -> &[Vec<f64>] {
        &self.residuals
    }

    /// `max_{j ∈ X_i} |E_i f(x_j)|` for each level `i`.
    pub fn max_level_residual(&self) -> &[f64] {
        &self.max_level_residual
    }

    /// `M_n` at `s`.
    pub fn eval(&self, s: &Point) -> Result<f64> {
        self.eval_partial(self.levels.len(), s)
    }

    /// `M_i` at `s`: the sum of the first `i` level approximants.
    pub fn eval_partial(&self, upto: usize, s: &Point) -> Result<f64> {
        let Some((first, rest)) = self.levels[..upto].split_first() else {
            return Ok(0.0);
        };
        rest.iter().try_fold(first.eval(s)?, |acc, level| Ok(acc + level.eval(s)?))
    }
}

pub fn ms_fit_scalar(
    data: &ScatteredDataset<f64>,
    hierarchy: &Hierarchy,
    rule: &KernelRule,
    method: Method,
) -> Result<MultiscaleScalar> {
    check_hierarchy(hierarchy, data.len())?;
    let mut residual = data.values().to_vec();
    let mut residuals = vec![residual.clone()];
    let mut levels = Vec::with_capacity(hierarchy.levels());
    let mut max_level_residual = Vec::with_capacity(hierarchy.levels());

    for subset in hierarchy.subsets() {
        let sites: Vec<Point> = subset.iter().map(|&j| data.sites()[j]).collect();
        let kernel = rule.kernel_for(&sites)?;
        let values = subset.iter().map(|&j| residual[j]).collect();
        let level = Approximant::new(ScatteredDataset::new(sites, values)?, kernel, method);
        for (e, x) in residual.iter_mut().zip(data.sites()) {
            *e -= level.eval(x)?;
        }
        max_level_residual.push(subset.iter().map(|&j| residual[j].abs()).fold(0.0, f64::max));
        residuals.push(residual.clone());
        levels.push(level);
    }
    Ok(MultiscaleScalar {
        levels,
        residuals,
        max_level_residual,
    })
}

/// Frame in which residual tangent vectors are interpolated across sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TangentFrame {
    /// Residual `log_c(f)` is carried to the identity by the isometry
    /// `v ↦ c^{-1/2} v c^{-1/2}` before interpolation, and back at the
    /// evaluation base. On commuting data this is multiscale on `log f`.
    #[default]
    Identity,
    /// Residual tangents are used as raw symmetric matrices.
    Ambient,
}

impl TangentFrame {
    fn residual<const D: usize>(self, current: &SpdPoint<D>, target: &SpdPoint<D>) -> Result<SymMatrix<D>> {
        match self {
            TangentFrame::Identity => log_whitened(&current.sqrt_pair()?.1, target),
            TangentFrame::Ambient => spd_log(current, target),
        }
    }

    fn apply<const D: usize>(self, current: &SpdPoint<D>, v: &SymMatrix<D>) -> Result<SpdPoint<D>> {
        match self {
            TangentFrame::Identity => exp_whitened(&current.sqrt_pair()?.0, v),
            TangentFrame::Ambient => spd_exp(current, v),
        }
    }
}

/// A fitted SPD-valued multiscale approximant: manifold Shepard on `X_1`,
/// followed by tangent corrections on `X_2, …, X_n`.
#[derive(Debug, Clone)]
pub struct MultiscaleSpd<const D: usize> {
    base: ManifoldShepard<D>,
    corrections: Vec<TangentShepard<D>>,
    frame: TangentFrame,
    approximations: Vec<SpdPoint<D>>,
    max_level_residual: Vec<f64>,
}

impl<const D: usize> MultiscaleSpd<D> {
    pub fn base(&self) -> &ManifoldShepard<D> {
        &self.base
    }

    pub fn corrections(&self) -> &[TangentShepard<D>] {
        &self.corrections
    }

    pub fn frame(&self) -> TangentFrame {
        self.frame
    }

    /// Final approximation `M_n` at every data site.
    pub fn site_approximations(&self) -> &[SpdPoint<D>] {
        &self.approximations
    }

    /// Largest Frobenius norm of the residual tangents fitted at each level
    /// `i >= 2`.
    pub fn max_level_residual(&self) -> &[f64] {
        &self.max_level_residual
    }

    pub fn eval(&self, s: &Point) -> Result<SpdPoint<D>> {
        let mut p = self.base.eval(s)?;
        for correction in &self.corrections {
            p = self.frame.apply(&p, &correction.eval(s)?)?;
        }
        Ok(p)
    }
}

pub fn ms_fit_manifold<const D: usize>(
    data: &ScatteredDataset<SpdPoint<D>>,
    hierarchy: &Hierarchy,
    rule: &KernelRule,
    frame: TangentFrame,
) -> Result<MultiscaleSpd<D>> {
    check_hierarchy(hierarchy, data.len())?;
    let subsets = hierarchy.subsets();
    let first = data.subset(&subsets[0])?;
    let kernel = rule.kernel_for(first.sites())?;
    let base = ManifoldShepard::new(first, kernel);
    let mut approximations = data
        .sites()
        .iter()
        .map(|x| base.eval(x))
        .collect::<Result<Vec<_>>>()?;

    let mut corrections = Vec::with_capacity(subsets.len().saturating_sub(1));
    let mut max_level_residual = Vec::new();
    for subset in &subsets[1..] {
        let sites: Vec<Point> = subset.iter().map(|&j| data.sites()[j]).collect();
        let kernel = rule.kernel_for(&sites)?;
        let tangents = subset
            .iter()
            .map(|&j| frame.residual(&approximations[j], &data.values()[j]))
            .collect::<Result<Vec<_>>>()?;
        max_level_residual.push(tangents.iter().map(|t| t.frobenius_norm()).fold(0.0, f64::max));
        let field = TangentShepard::new(ScatteredDataset::new(sites, tangents)?, kernel);
        for (c, x) in approximations.iter_mut().zip(data.sites()) {
            *c = frame.apply(c, &field.eval(x)?)?;
        }
        corrections.push(field);
    }
    Ok(MultiscaleSpd {
        base,
        corrections,
        frame,
        approximations,
        max_level_residual,
    })
}

fn check_hierarchy(hierarchy: &Hierarchy, n: usize) -> Result<()> {
    match hierarchy.subsets().last() {
        Some(top) if top.len() == n => Ok(()),
        _ => Err(Error::InvalidConfig(format!(
            "hierarchy does not cover the {n}-site dataset"
        ))),
    }
}
