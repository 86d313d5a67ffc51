//! Seeded Monte-Carlo comparisons of single-scale and multiscale
//! approximation.
//!
//! Each trial draws a dataset, its noise, and a hierarchy from its own
//! random stream, keyed by `(seed, sweep index, trial index, purpose)`, so
//! results do not depend on scheduling or worker count. Single-scale and
//! multiscale operators see the same dataset within a trial.

pub mod targets;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::geometry::{ScalarLine, Spd3, SpdManifold, Sym3, ValueSpace};
use crate::kernels::KernelFamily;
use crate::multiscale::{
    build_hierarchy, ms_fit_manifold, ms_fit_scalar, Hierarchy, HierarchySpec, KernelRule,
    TangentFrame,
};
use crate::operators::{Approximant, ManifoldShepard, Method, ScatteredDataset};
use crate::stats::{metrics_from_samples, summarize, MetricsSummary, PointMetrics};
use crate::Point;

use targets::{
    eval_grid, random_symmetric_gaussian, sample_sites, snr_numeric_spd, target_smooth,
    target_spd, target_wave, NoiseSpec,
};

pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_LEVELS: usize = 3;
pub const DEFAULT_LAMBDA: f64 = 0.8;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_GRID: usize = 21;
pub const WAVE_SITES: usize = 196;
pub const SPD_SITES: usize = 121;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Linear MLS with a Gaussian kernel on the smooth target, noiseless,
    /// swept over dataset size.
    MlsSize,
    /// Shepard with the Wendland kernel on the noisy wave target, swept over SNR.
    ShepardSnr,
    /// Manifold Shepard on the noisy SPD target, swept over SNR.
    SpdSnr,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 3] =
        [ExperimentKind::MlsSize, ExperimentKind::ShepardSnr, ExperimentKind::SpdSnr];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::MlsSize => "mls-size",
            ExperimentKind::ShepardSnr => "shepard-snr",
            ExperimentKind::SpdSnr => "spd-snr",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn param_name(self) -> &'static str {
        match self {
            ExperimentKind::MlsSize => "n_sites",
            ExperimentKind::ShepardSnr | ExperimentKind::SpdSnr => "snr",
        }
    }

    pub fn default_sweep(self) -> Vec<f64> {
        match self {
            ExperimentKind::MlsSize => vec![100.0, 200.0, 400.0, 800.0],
            ExperimentKind::ShepardSnr | ExperimentKind::SpdSnr => {
                vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
            }
        }
    }

    fn method(self) -> Method {
        match self {
            ExperimentKind::MlsSize => Method::Mls,
            ExperimentKind::ShepardSnr | ExperimentKind::SpdSnr => Method::Shepard,
        }
    }

    fn kernel_family(self) -> KernelFamily {
        match self {
            ExperimentKind::MlsSize => KernelFamily::Gaussian,
            ExperimentKind::ShepardSnr | ExperimentKind::SpdSnr => KernelFamily::Wendland,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub trials: usize,
    pub levels: usize,
    pub lambda: f64,
    pub seed: u64,
    /// Dataset sizes (`mls-size`) or SNR values (the noisy experiments).
    pub sweep: Vec<f64>,
    /// Evaluation grid resolution per axis.
    pub grid: usize,
    /// Reuse trial 0's sites and hierarchy in every trial, so that only the
    /// noise varies.
    pub freeze_design: bool,
    pub frame: TangentFrame,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            trials: DEFAULT_TRIALS,
            levels: DEFAULT_LEVELS,
            lambda: DEFAULT_LAMBDA,
            seed: DEFAULT_SEED,
            sweep: experiment.default_sweep(),
            grid: DEFAULT_GRID,
            freeze_design: false,
            frame: TangentFrame::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::InvalidConfig("trials must be at least 2".into()));
        }
        HierarchySpec::new(self.levels, self.lambda)?;
        if self.sweep.is_empty() {
            return Err(Error::InvalidConfig("sweep must not be empty".into()));
        }
        if self.grid < 1 {
            return Err(Error::InvalidConfig("grid must be at least 1".into()));
        }
        for &v in &self.sweep {
            match self.experiment {
                ExperimentKind::MlsSize => {
                    if !(v >= 1.0 && v.fract() == 0.0 && v.is_finite()) {
                        return Err(Error::InvalidConfig(format!(
                            "dataset sizes must be positive integers, got {v}"
                        )));
                    }
                }
                _ => {
                    NoiseSpec::from_snr(v)?;
                    if !v.is_finite() {
                        return Err(Error::InvalidConfig(format!("SNR must be finite, got {v}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn sites_for(&self, sweep_value: f64) -> usize {
        match self.experiment {
            ExperimentKind::MlsSize => sweep_value as usize,
            ExperimentKind::ShepardSnr => WAVE_SITES,
            ExperimentKind::SpdSnr => SPD_SITES,
        }
    }

    fn noise_for(&self, sweep_value: f64) -> Result<NoiseSpec> {
        match self.experiment {
            ExperimentKind::MlsSize => NoiseSpec::new(0.0),
            _ => NoiseSpec::from_snr(sweep_value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    Single,
    Multi,
}

impl Approach {
    pub fn name(self) -> &'static str {
        match self {
            Approach::Single => "single",
            Approach::Multi => "multi",
        }
    }
}

/// Per-point metrics of one approach at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachResult {
    pub points: Vec<PointMetrics>,
    pub summary: MetricsSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param_value: f64,
    /// Noise standard deviation used at this sweep value.
    pub noise_scale: f64,
    pub single: ApproachResult,
    pub multi: ApproachResult,
}

impl SweepResult {
    pub fn approach(&self, approach: Approach) -> &ApproachResult {
        match approach {
            Approach::Single => &self.single,
            Approach::Multi => &self.multi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub experiment: ExperimentKind,
    pub eval_points: Vec<Point>,
    pub sweeps: Vec<SweepResult>,
    /// Numeric Frobenius SNR ratio (SPD experiment only).
    pub spd_snr_ratio: Option<f64>,
}

/// Purpose tags separating the random streams of one trial.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Sites = 1,
    Noise = 2,
    Hierarchy = 3,
    Snr = 4,
}

fn stream(seed: u64, sweep: usize, trial: usize, purpose: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key
        .chunks_exact_mut(8)
        .zip([seed, sweep as u64, trial as u64, purpose as u64])
    {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

struct TrialDesign {
    sites: Vec<Point>,
    hierarchy: Hierarchy,
}

fn trial_design(cfg: &ExperimentConfig, sweep: usize, trial: usize, n: usize) -> Result<TrialDesign> {
    let design_trial = if cfg.freeze_design { 0 } else { trial };
    let sites = sample_sites(n, &mut stream(cfg.seed, sweep, design_trial, Stream::Sites));
    let spec = HierarchySpec::new(cfg.levels, cfg.lambda)?;
    let hierarchy =
        build_hierarchy(n, &spec, &mut stream(cfg.seed, sweep, design_trial, Stream::Hierarchy));
    Ok(TrialDesign { sites, hierarchy })
}

/// Single-scale and multiscale evaluations of one trial on the grid.
type TrialOutput<V> = (Vec<V>, Vec<V>);

fn scalar_trial(
    cfg: &ExperimentConfig,
    sweep: usize,
    trial: usize,
    eval_points: &[Point],
) -> Result<TrialOutput<f64>> {
    let value = cfg.sweep[sweep];
    let design = trial_design(cfg, sweep, trial, cfg.sites_for(value))?;
    let p = cfg.noise_for(value)?.p();
    let values: Vec<f64> = match cfg.experiment {
        ExperimentKind::MlsSize => design.sites.iter().map(|x| target_smooth(x[0], x[1])).collect(),
        _ => {
            let mut rng = stream(cfg.seed, sweep, trial, Stream::Noise);
            design
                .sites
                .iter()
                .map(|x| target_wave(x[0], x[1], rand::Rng::sample(&mut rng, rand_distr::StandardNormal), p))
                .collect()
        }
    };
    let data = ScatteredDataset::new(design.sites, values)?;
    let rule = KernelRule::mesh_scaled(cfg.experiment.kernel_family());
    let method = cfg.experiment.method();

    let single = Approximant::new(data.clone(), rule.kernel_for(data.sites())?, method);
    let multi = ms_fit_scalar(&data, &design.hierarchy, &rule, method)?;
    let single_values = eval_points.iter().map(|s| single.eval(s)).collect::<Result<_>>()?;
    let multi_values = eval_points.iter().map(|s| multi.eval(s)).collect::<Result<_>>()?;
    Ok((single_values, multi_values))
}

fn spd_trial(
    cfg: &ExperimentConfig,
    sweep: usize,
    trial: usize,
    eval_points: &[Point],
) -> Result<TrialOutput<Spd3>> {
    let value = cfg.sweep[sweep];
    let design = trial_design(cfg, sweep, trial, cfg.sites_for(value))?;
    let p = cfg.noise_for(value)?.p();
    let mut rng = stream(cfg.seed, sweep, trial, Stream::Noise);
    let values = design
        .sites
        .iter()
        .map(|x| {
            let sigma: Sym3 = random_symmetric_gaussian(&mut rng);
            target_spd(x[0], x[1], &sigma, p)
        })
        .collect::<Result<Vec<_>>>()?;
    let data = ScatteredDataset::new(design.sites, values)?;
    let rule = KernelRule::mesh_scaled(KernelFamily::Wendland);

    let single = ManifoldShepard::new(data.clone(), rule.kernel_for(data.sites())?);
    let multi = ms_fit_manifold(&data, &design.hierarchy, &rule, cfg.frame)?;
    let single_values = eval_points.iter().map(|s| single.eval(s)).collect::<Result<_>>()?;
    let multi_values = eval_points.iter().map(|s| multi.eval(s)).collect::<Result<_>>()?;
    Ok((single_values, multi_values))
}

/// Runs every `(sweep, trial)` pair, then reduces per sweep value in order.
fn run_generic<S, F>(
    cfg: &ExperimentConfig,
    space: &S,
    exec: Execution,
    truth: &[S::Value],
    eval_points: &[Point],
    trial_fn: F,
) -> Result<Vec<SweepResult>>
where
    S: ValueSpace,
    F: Fn(&ExperimentConfig, usize, usize, &[Point]) -> Result<TrialOutput<S::Value>> + Sync + Send,
{
    let trials = cfg.trials;
    let outputs = map_indexed(cfg.sweep.len() * trials, exec, |k| {
        let (sweep, trial) = (k / trials, k % trials);
        trial_fn(cfg, sweep, trial, eval_points).map_err(|e| Error::TrialFailed {
            sweep,
            trial,
            message: e.to_string(),
        })
    });
    let outputs = outputs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut results = Vec::with_capacity(cfg.sweep.len());
    for (sweep, chunk) in outputs.chunks(trials).enumerate() {
        let reduce = |pick: fn(&TrialOutput<S::Value>) -> &Vec<S::Value>| -> Result<ApproachResult> {
            let points = map_indexed(eval_points.len(), exec, |k| {
                let samples: Vec<S::Value> = chunk.iter().map(|out| pick(out)[k].clone()).collect();
                metrics_from_samples(space, &samples, &truth[k])
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let summary = summarize(&points)?;
            Ok(ApproachResult { points, summary })
        };
        let value = cfg.sweep[sweep];
        results.push(SweepResult {
            param_value: value,
            noise_scale: cfg.noise_for(value)?.p(),
            single: reduce(|o| &o.0)?,
            multi: reduce(|o| &o.1)?,
        });
    }
    Ok(results)
}

pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<MetricsTable> {
    cfg.validate()?;
    let eval_points = eval_grid(cfg.grid);
    let (sweeps, spd_snr_ratio) = match cfg.experiment {
        ExperimentKind::MlsSize => {
            let truth: Vec<f64> = eval_points.iter().map(|s| target_smooth(s[0], s[1])).collect();
            (run_generic(cfg, &ScalarLine, exec, &truth, &eval_points, scalar_trial)?, None)
        }
        ExperimentKind::ShepardSnr => {
            let truth: Vec<f64> =
                eval_points.iter().map(|s| target_wave(s[0], s[1], 0.0, 0.0)).collect();
            (run_generic(cfg, &ScalarLine, exec, &truth, &eval_points, scalar_trial)?, None)
        }
        ExperimentKind::SpdSnr => {
            let truth = eval_points
                .iter()
                .map(|s| target_spd(s[0], s[1], &Sym3::zeros(), 0.0))
                .collect::<Result<Vec<_>>>()?;
            let sweeps =
                run_generic(cfg, &SpdManifold::<3>, exec, &truth, &eval_points, spd_trial)?;
            let p = cfg.noise_for(cfg.sweep[0])?.p();
            let snr = snr_numeric_spd(p, &mut stream(cfg.seed, 0, 0, Stream::Snr))?;
            (sweeps, Some(snr.ratio))
        }
    };
    Ok(MetricsTable {
        experiment: cfg.experiment,
        eval_points,
        sweeps,
        spd_snr_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            trials: 3,
            grid: 3,
            sweep: vec![kind.default_sweep()[0]],
            ..ExperimentConfig::new(kind)
        }
    }

    #[test]
    fn names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(ExperimentKind::from_name(k.name()), Some(k));
        }
        assert_eq!(ExperimentKind::from_name("nope"), None);
    }

    #[test]
    fn config_validation() {
        let base = ExperimentConfig::new(ExperimentKind::ShepardSnr);
        assert!(base.validate().is_ok());
        for bad in [
            ExperimentConfig { trials: 1, ..base.clone() },
            ExperimentConfig { levels: 0, ..base.clone() },
            ExperimentConfig { lambda: 1.5, ..base.clone() },
            ExperimentConfig { sweep: vec![], ..base.clone() },
            ExperimentConfig { sweep: vec![0.0], ..base.clone() },
            ExperimentConfig { grid: 0, ..base.clone() },
            ExperimentConfig { sweep: vec![10.5], ..ExperimentConfig::new(ExperimentKind::MlsSize) },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn streams_are_distinct_and_stable() {
        use rand::Rng;
        let a: u64 = stream(1, 0, 0, Stream::Sites).random();
        let b: u64 = stream(1, 0, 0, Stream::Noise).random();
        let c: u64 = stream(1, 0, 1, Stream::Sites).random();
        let d: u64 = stream(1, 0, 0, Stream::Sites).random();
        assert!(a != b && a != c);
        assert_eq!(a, d);
    }

    #[test]
    fn smoke_runs_all_experiments() {
        for kind in ExperimentKind::ALL {
            let table = run_experiment(&small(kind), Execution::Sequential).unwrap();
            assert_eq!(table.sweeps.len(), 1);
            assert_eq!(table.sweeps[0].single.points.len(), 9);
            assert_eq!(table.spd_snr_ratio.is_some(), kind == ExperimentKind::SpdSnr);
        }
    }

    #[test]
    fn execution_mode_does_not_change_results() {
        let cfg = ExperimentConfig { sweep: vec![1.0, 4.0], ..small(ExperimentKind::ShepardSnr) };
        let a = run_experiment(&cfg, Execution::Sequential).unwrap();
        let b = run_experiment(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_level_multiscale_equals_single_scale() {
        for kind in ExperimentKind::ALL {
            let cfg = ExperimentConfig { levels: 1, ..small(kind) };
            let table = run_experiment(&cfg, Execution::Sequential).unwrap();
            for sweep in &table.sweeps {
                assert_eq!(sweep.single, sweep.multi, "{kind:?}");
            }
        }
    }

    #[test]
    fn frozen_noiseless_design_has_zero_variance() {
        // Noise enters multiplicatively, so p = 0 needs SNR = ∞; emulate it with
        // a huge SNR whose noise underflows against the signal.
        let cfg = ExperimentConfig {
            freeze_design: true,
            sweep: vec![1e300],
            ..small(ExperimentKind::ShepardSnr)
        };
        let table = run_experiment(&cfg, Execution::Sequential).unwrap();
        for approach in [Approach::Single, Approach::Multi] {
            for m in &table.sweeps[0].approach(approach).points {
                assert_eq!(m.variance, 0.0);
            }
        }
        // The noiseless size sweep with a frozen design is deterministic too.
        let cfg = ExperimentConfig { freeze_design: true, ..small(ExperimentKind::MlsSize) };
        let table = run_experiment(&cfg, Execution::Sequential).unwrap();
        assert!(table.sweeps[0].multi.points.iter().all(|m| m.variance == 0.0));
    }

    #[test]
    fn trial_errors_carry_their_coordinates() {
        let cfg = small(ExperimentKind::ShepardSnr);
        let err = run_generic(&cfg, &ScalarLine, Execution::Sequential, &[0.0; 9], &eval_grid(3), |_, _, t, _| {
            if t == 1 {
                Err(Error::EmptyDataset)
            } else {
                Ok((vec![0.0; 9], vec![0.0; 9]))
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::TrialFailed { sweep: 0, trial: 1, .. }));
    }
}
