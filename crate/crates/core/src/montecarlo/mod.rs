//! Monte Carlo path simulation and first-passage estimators.
//!
//! Every path draws from its own counter-based stream keyed by
//! `(seed, path index)`, and per-path values are reduced in index order,
//! so estimates do not depend on the worker count.

mod estimators;
mod rng;
mod simulate;
mod stats;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::model::{Drift, LevyModel};

pub use estimators::{
    estimate_creeping, estimate_passage_below_laplace, estimate_survival, estimate_upcross_laplace,
    martingale_check,
};
pub use rng::stream_rng;
pub use simulate::{simulate_path, simulate_path_from, Crossing, JumpMark, PathSample, PathStatus};
pub use stats::{ks_test, pairwise, Welford};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SmallJumpMode {
    /// Compensated jumps below the cutoff are dropped.
    DriftOnly,
    /// Jumps below the cutoff are replaced by a Brownian motion of equal
    /// variance.
    #[default]
    GaussianCompensation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Fixed binary tree over path-ordered values; bitwise reproducible.
    #[default]
    Pairwise,
    /// Per-worker Welford accumulators merged as they finish.
    Streaming,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MCConfig {
    pub dt: f64,
    /// `None` picks `50/|Ψ'(0+)|` for drifting models.
    pub horizon: Option<f64>,
    pub paths: usize,
    pub seed: u64,
    /// `None` picks the largest cutoff meeting the normal-approximation
    /// criterion.
    pub small_jump_cutoff: Option<f64>,
    pub small_jump_mode: SmallJumpMode,
    /// Lengthen steps far from every barrier.
    pub aggregate: bool,
    pub reduction: Reduction,
    pub min_crossings: usize,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            horizon: None,
            paths: 100_000,
            seed: 0,
            small_jump_cutoff: None,
            small_jump_mode: SmallJumpMode::default(),
            aggregate: true,
            reduction: Reduction::default(),
            min_crossings: 10,
        }
    }
}

impl MCConfig {
    pub fn new(dt: f64, horizon: Option<f64>, paths: usize, seed: u64) -> Self {
        Self {
            dt,
            horizon,
            paths,
            seed,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LevyError::BadConfig(e.to_string()))
    }

    /// Horizon actually simulated for `model`.
    pub fn resolved_horizon(&self, model: &LevyModel) -> Result<f64> {
        let h = match self.horizon {
            Some(h) => h,
            None => match model.drift() {
                Drift::Oscillating => {
                    return Err(LevyError::BadConfig(
                        "horizon is required for oscillating models".into(),
                    ))
                }
                _ => 50.0 / model.psi_prime(0.0).abs(),
            },
        };
        if !(h.is_finite() && h > 0.0) {
            return Err(LevyError::BadConfig(format!(
                "horizon must be finite and > 0, got {h}"
            )));
        }
        Ok(h)
    }

    pub fn check(&self, model: &LevyModel) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(LevyError::BadConfig(format!(
                "dt must be finite and > 0, got {}",
                self.dt
            )));
        }
        if self.paths == 0 {
            return Err(LevyError::BadConfig("paths must be >= 1".into()));
        }
        let horizon = self.resolved_horizon(model)?;
        if self.dt > horizon {
            return Err(LevyError::BadConfig(format!(
                "dt = {} exceeds horizon = {horizon}",
                self.dt
            )));
        }
        if let Some(eps) = self.small_jump_cutoff {
            if !(eps.is_finite() && eps > 0.0 && eps <= 1.0) {
                return Err(LevyError::BadConfig(format!(
                    "small_jump_cutoff must lie in (0, 1], got {eps}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub analytic_target: Option<f64>,
    pub z_score: Option<f64>,
    /// Paths that crossed the relevant level before the horizon.
    pub crossings: usize,
}

impl Estimate {
    pub(crate) fn from_summary(summary: Welford, target: Option<f64>, crossings: usize) -> Self {
        let stderr = summary.stderr();
        let z_score = target.map(|t| {
            let diff = summary.mean - t;
            if stderr > 0.0 {
                diff / stderr
            } else if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            }
        });
        Self {
            mean: summary.mean,
            stderr,
            n: summary.count,
            analytic_target: target,
            z_score,
            crossings,
        }
    }

    pub fn within(&self, k: f64) -> bool {
        self.z_score.is_some_and(|z| z.abs() <= k)
    }
}

/// Worker pool sized by `LEVY_FLUCT_THREADS` when set.
pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("LEVY_FLUCT_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            builder = builder.num_threads(n);
        }
        builder.build().expect("thread pool")
    })
}

/// Evaluates `f` on every path index and reduces the values.
pub(crate) fn reduce_paths<F>(paths: usize, reduction: Reduction, f: F) -> (Welford, usize)
where
    F: Fn(u64) -> (f64, bool) + Sync,
{
    use rayon::prelude::*;
    pool().install(|| match reduction {
        Reduction::Pairwise => {
            let values: Vec<(f64, bool)> = (0..paths as u64).into_par_iter().map(&f).collect();
            let xs: Vec<f64> = values.iter().map(|v| v.0).collect();
            (pairwise(&xs), values.iter().filter(|v| v.1).count())
        }
        Reduction::Streaming => (0..paths as u64)
            .into_par_iter()
            .fold(
                || (Welford::default(), 0usize),
                |(mut w, c), i| {
                    let (x, hit) = f(i);
                    w.push(x);
                    (w, c + hit as usize)
                },
            )
            .reduce(
                || (Welford::default(), 0),
                |a, b| (a.0.merge(b.0), a.1 + b.1),
            ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert!(MCConfig::new(1e-3, None, 10, 1).check(&bm).is_err());
        assert!(MCConfig::new(1e-3, Some(1.0), 10, 1).check(&bm).is_ok());
        assert!(MCConfig::new(2.0, Some(1.0), 10, 1).check(&bm).is_err());
        assert!(MCConfig::new(1e-3, Some(1.0), 0, 1).check(&bm).is_err());
        let up = LevyModel::brownian(2.0, 1.0).unwrap();
        assert_eq!(
            MCConfig::new(1e-3, None, 10, 1)
                .resolved_horizon(&up)
                .unwrap(),
            25.0
        );
        let mut eps = MCConfig::new(1e-3, Some(1.0), 10, 1);
        eps.small_jump_cutoff = Some(0.0);
        assert!(eps.check(&bm).is_err());
    }

    #[test]
    fn config_json_defaults_and_unknown_fields() {
        let cfg = MCConfig::from_json(r#"{"dt": 0.01, "paths": 5, "seed": 3}"#).unwrap();
        assert_eq!(
            (cfg.dt, cfg.paths, cfg.seed, cfg.horizon),
            (0.01, 5, 3, None)
        );
        assert!(MCConfig::from_json(r#"{"dt": 0.01, "bogus": 1}"#).is_err());
    }

    #[test]
    fn reductions_agree() {
        let f = |i: u64| (((i * 7919) % 101) as f64 / 10.0, i % 3 == 0);
        let (a, ca) = reduce_paths(1000, Reduction::Pairwise, f);
        let (b, cb) = reduce_paths(1000, Reduction::Streaming, f);
        assert_eq!(ca, cb);
        assert!((a.mean - b.mean).abs() < 1e-12 && (a.m2 - b.m2).abs() < 1e-8);
    }
}
