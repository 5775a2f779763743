use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use super::rng::stream_rng;
use super::{MCConfig, SmallJumpMode};
use crate::error::{LevyError, Result};
use crate::model::{JumpFamily, LevyModel};
use crate::special::upper_gamma;

/// Third-moment to variance ratio below which small jumps pass as Gaussian.
const NORMAL_APPROX_RATIO: f64 = 0.01;
/// Aggregated steps must keep the barrier this many standard deviations away.
const AGGREGATE_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpMark {
    /// Grid index of the first point after the jump.
    pub index: usize,
    pub time: f64,
    /// Always negative.
    pub size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub level: f64,
    pub time: f64,
    /// Distance past the level at the crossing; `0` for continuous crossings.
    pub overshoot: f64,
    pub crossed_by_jump: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Completed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub stream_index: u64,
    pub seed: u64,
    pub status: PathStatus,
    pub small_jump_cutoff: Option<f64>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub jump_marks: Vec<JumpMark>,
    pub stopping_info: Vec<Crossing>,
}

impl PathSample {
    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("non-empty path")
    }
}

#[derive(Debug, Clone, Copy)]
enum JumpLaw {
    None,
    Exp {
        mean: f64,
    },
    /// Density `∝ e^{-θy} y^{-1-α}` on `y > ε`.
    Power {
        alpha: f64,
        eps: f64,
        tempering: f64,
    },
}

/// Simulation scheme derived from a model and a configuration.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dynamics {
    pub drift: f64,
    /// Standard deviation per unit time of the Gaussian part, small-jump
    /// proxy included.
    pub sigma: f64,
    /// Gaussian part of the model itself.
    pub model_sigma: f64,
    pub jump_rate: f64,
    law: JumpLaw,
    pub cutoff: Option<f64>,
}

struct SmallJumps {
    rate: f64,
    big_mean: f64,
    variance: f64,
    third: f64,
}

/// `∫_0^ε y^k π(-y) dy` for `k ≥ 2` and the `y ≥ ε` quantities of a
/// (tempered) stable density `C e^{-θy} y^{-1-α}`.
fn small_jumps(c: f64, alpha: f64, tempering: f64, eps: f64) -> SmallJumps {
    let below = |k: f64| {
        let s = k - alpha;
        if tempering > 0.0 {
            c * tempering.powf(-s) * gamma(s) * gamma_lr(s, tempering * eps)
        } else {
            c * eps.powf(s) / s
        }
    };
    let (rate, big_mean) = if tempering > 0.0 {
        (
            c * tempering.powf(alpha) * upper_gamma(-alpha, tempering * eps),
            c * tempering.powf(alpha - 1.0) * upper_gamma(1.0 - alpha, tempering * eps),
        )
    } else {
        (
            c * eps.powf(-alpha) / alpha,
            c * eps.powf(1.0 - alpha) / (alpha - 1.0),
        )
    };
    SmallJumps {
        rate,
        big_mean,
        variance: below(2.0),
        third: below(3.0),
    }
}

fn normal_ratio(s: &SmallJumps) -> f64 {
    s.third / s.variance.powf(1.5)
}

/// Largest cutoff in `(0, 1]` with `m₃(ε)/σ_ε³ < 0.01`.
fn auto_cutoff(c: f64, alpha: f64, tempering: f64) -> f64 {
    let ok = |eps: f64| normal_ratio(&small_jumps(c, alpha, tempering, eps)) < NORMAL_APPROX_RATIO;
    if ok(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (-40.0f64, 0.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.exp()
}

impl Dynamics {
    pub fn new(model: &LevyModel, cfg: &MCConfig) -> Result<Self> {
        let model_sigma = model.sigma2().sqrt();
        let base = Self {
            drift: model.gamma(),
            sigma: model_sigma,
            model_sigma,
            jump_rate: 0.0,
            law: JumpLaw::None,
            cutoff: None,
        };
        let (alpha, tempering) = match model.jumps() {
            JumpFamily::None => return Ok(base),
            JumpFamily::CpExp { rate, jump_rate } => {
                return Ok(Self {
                    jump_rate: rate,
                    law: JumpLaw::Exp {
                        mean: 1.0 / jump_rate,
                    },
                    ..base
                })
            }
            JumpFamily::Stable { alpha, .. } => (alpha, 0.0),
            JumpFamily::TemperedStable {
                alpha, tempering, ..
            } => (alpha, tempering),
        };
        let c = model.levy_density(1.0) * tempering.exp();
        let eps = match cfg.small_jump_cutoff {
            Some(e) => e,
            None => auto_cutoff(c, alpha, tempering),
        };
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(LevyError::BadConfig(format!(
                "small_jump_cutoff must lie in (0, 1], got {eps}"
            )));
        }
        let s = small_jumps(c, alpha, tempering, eps);
        let extra = match cfg.small_jump_mode {
            SmallJumpMode::DriftOnly => 0.0,
            SmallJumpMode::GaussianCompensation => s.variance,
        };
        Ok(Self {
            // jumps are compensated, so the big ones carry a drift of +E|J|·rate
            drift: model.gamma() + s.big_mean,
            sigma: (model.sigma2() + extra).sqrt(),
            jump_rate: s.rate,
            law: JumpLaw::Power {
                alpha,
                eps,
                tempering,
            },
            cutoff: Some(eps),
            ..base
        })
    }

    /// Magnitude of one jump.
    fn jump_size(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.law {
            JumpLaw::None => 0.0,
            JumpLaw::Exp { mean } => mean * rng.sample::<f64, _>(Exp1),
            JumpLaw::Power {
                alpha,
                eps,
                tempering,
            } => loop {
                let u: f64 = 1.0 - rng.random::<f64>();
                let y = eps * u.powf(-1.0 / alpha);
                if tempering == 0.0 || rng.random::<f64>() < (-tempering * (y - eps)).exp() {
                    break y;
                }
            },
        }
    }

    fn clock(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.jump_rate > 0.0 {
            rng.sample::<f64, _>(Exp1) / self.jump_rate
        } else {
            f64::INFINITY
        }
    }
}

/// Uniform-grid path started at 0 over the configured horizon.
pub fn simulate_path(model: &LevyModel, cfg: &MCConfig, stream_index: u64) -> Result<PathSample> {
    simulate_path_from(model, cfg, stream_index, 0.0, &[])
}

/// Uniform-grid path started at `start`, recording the first grid-detected
/// crossing of each level (downward for levels below `start`, upward
/// otherwise).
pub fn simulate_path_from(
    model: &LevyModel,
    cfg: &MCConfig,
    stream_index: u64,
    start: f64,
    levels: &[f64],
) -> Result<PathSample> {
    cfg.check(model)?;
    let horizon = cfg.resolved_horizon(model)?;
    let dy = Dynamics::new(model, cfg)?;
    let mut rng = stream_rng(cfg.seed, stream_index);
    let steps = (horizon / cfg.dt).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut jump_marks = Vec::new();
    let mut open: Vec<Option<Crossing>> = vec![None; levels.len()];
    let sqrt_dt = cfg.dt.sqrt();
    let mut x = start;
    let mut next_jump = dy.clock(&mut rng);
    times.push(0.0);
    values.push(x);
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * cfg.dt;
        let t1 = k as f64 * cfg.dt;
        let z: f64 = rng.sample(StandardNormal);
        let mut y = x + dy.drift * cfg.dt + dy.sigma * sqrt_dt * z;
        let before_jumps = y;
        let mut jumped = false;
        while next_jump <= t1 {
            let size = -dy.jump_size(&mut rng);
            jump_marks.push(JumpMark {
                index: k,
                time: next_jump,
                size,
            });
            y += size;
            jumped = true;
            next_jump += dy.clock(&mut rng);
        }
        for (slot, &level) in open.iter_mut().zip(levels) {
            if slot.is_some() {
                continue;
            }
            let down = level < start;
            let crossed = if down { y < level } else { y >= level };
            if crossed {
                let by_jump = down && jumped && before_jumps >= level;
                *slot = Some(Crossing {
                    level,
                    time: if by_jump { t1 } else { 0.5 * (t0 + t1) },
                    overshoot: if down { level - y } else { y - level },
                    crossed_by_jump: by_jump,
                });
            }
        }
        x = y;
        times.push(t1);
        values.push(x);
    }
    Ok(PathSample {
        stream_index,
        seed: cfg.seed,
        status: PathStatus::Completed,
        small_jump_cutoff: dy.cutoff,
        times,
        values,
        jump_marks,
        stopping_info: open.into_iter().flatten().collect(),
    })
}

/// Event-driven walker for first passage problems: exact jump times,
/// bridge-corrected crossing checks between skeleton points, and dyadic
/// step lengthening while every barrier is far away.
pub(crate) struct Walker<'a> {
    dy: &'a Dynamics,
    rng: ChaCha8Rng,
    dt: f64,
    aggregate: bool,
}

pub(crate) enum Passage {
    Crossed(Crossing),
    /// Position at the horizon.
    Survived(f64),
}

impl<'a> Walker<'a> {
    pub fn new(dy: &'a Dynamics, cfg: &MCConfig, stream_index: u64) -> Self {
        Self {
            dy,
            rng: stream_rng(cfg.seed, stream_index),
            dt: cfg.dt,
            aggregate: cfg.aggregate,
        }
    }

    /// Runs from `start` until the first exit from `(lower, upper)` or the
    /// horizon. Continuous crossings are dated at the step midpoint.
    pub fn run(
        &mut self,
        start: f64,
        lower: Option<f64>,
        upper: Option<f64>,
        horizon: f64,
    ) -> Passage {
        let lo = lower.unwrap_or(f64::NEG_INFINITY);
        let hi = upper.unwrap_or(f64::INFINITY);
        let (mu, sigma) = (self.dy.drift, self.dy.sigma);
        let diffusive_jump = self.dy.model_sigma == 0.0;
        let clear = |dist: f64, h: f64| dist - mu.abs() * h > AGGREGATE_SIGMAS * sigma * h.sqrt();
        let mut t = 0.0;
        let mut x = start;
        let mut h = self.dt;
        let mut next_jump = self.dy.clock(&mut self.rng);
        while t < horizon {
            if self.aggregate {
                let dist = (x - lo).min(hi - x);
                if clear(dist, 2.0 * h) {
                    h *= 2.0;
                } else {
                    while h > self.dt && !clear(dist, h) {
                        h = (0.5 * h).max(self.dt);
                    }
                }
            }
            let mut step = h.min(horizon - t);
            let jump_now = next_jump <= t + step;
            if jump_now {
                step = next_jump - t;
            }
            let z: f64 = self.rng.sample(StandardNormal);
            let y = x + mu * step + sigma * step.sqrt() * z;
            let mid = t + 0.5 * step;
            let bridge = |a: f64, b: f64, rng: &mut ChaCha8Rng| {
                sigma > 0.0
                    && step > 0.0
                    && rng.random::<f64>() < (-2.0 * a * b / (sigma * sigma * step)).exp()
            };
            if y <= lo || bridge(x - lo, y - lo, &mut self.rng) {
                return Passage::Crossed(Crossing {
                    level: lo,
                    time: mid,
                    overshoot: 0.0,
                    crossed_by_jump: diffusive_jump,
                });
            }
            if y >= hi || bridge(hi - x, hi - y, &mut self.rng) {
                return Passage::Crossed(Crossing {
                    level: hi,
                    time: mid,
                    overshoot: 0.0,
                    crossed_by_jump: false,
                });
            }
            t += step;
            x = y;
            if jump_now {
                x -= self.dy.jump_size(&mut self.rng);
                if x < lo {
                    return Passage::Crossed(Crossing {
                        level: lo,
                        time: t,
                        overshoot: lo - x,
                        crossed_by_jump: true,
                    });
                }
                next_jump = t + self.dy.clock(&mut self.rng);
            }
        }
        Passage::Survived(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_cutoff_meets_criterion() {
        let c = 1.5 * 0.5 / gamma(0.5);
        let eps = auto_cutoff(c, 1.5, 0.0);
        // m₃/σ³ = ε^{α/2} (2-α)^{3/2} / ((3-α)√C) for the stable density
        let ratio = eps.powf(0.75) * 0.5f64.powf(1.5) / (1.5 * c.sqrt());
        assert!((ratio - NORMAL_APPROX_RATIO).abs() < 1e-9, "{eps} {ratio}");
        let tempered = small_jumps(c, 1.5, 2.0, 1e-3);
        let stable = small_jumps(c, 1.5, 0.0, 1e-3);
        assert!((tempered.variance / stable.variance - 1.0).abs() < 2e-3);
    }

    #[test]
    fn small_jump_moments_match_quadrature() {
        use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
        let (c, alpha, theta, eps) = (0.7, 1.3, 1.5, 0.05);
        let s = small_jumps(c, alpha, theta, eps);
        let dens = |y: f64| c * (-theta * y).exp() * y.powf(-1.0 - alpha);
        let opts = QuadOptions::default();
        let var = integrate(|y| y * y * dens(y), 0.0, eps, &opts)
            .unwrap()
            .value;
        let rate = integrate_to_infinity(dens, eps, 1.0, &opts).unwrap().value;
        let mean = integrate_to_infinity(|y| y * dens(y), eps, 1.0, &opts)
            .unwrap()
            .value;
        assert!(
            (s.variance / var - 1.0).abs() < 1e-6,
            "{} {var}",
            s.variance
        );
        assert!((s.rate / rate - 1.0).abs() < 1e-8);
        assert!((s.big_mean / mean - 1.0).abs() < 1e-8);
    }

    #[test]
    fn jump_marks_are_negative_and_explain_increments() {
        let model = LevyModel::new(
            2.0,
            2.0,
            JumpFamily::CpExp {
                rate: 1.0,
                jump_rate: 1.0,
            },
        )
        .unwrap();
        let cfg = MCConfig::new(0.01, Some(20.0), 1, 5);
        let p = simulate_path(&model, &cfg, 0).unwrap();
        assert!(!p.jump_marks.is_empty());
        assert!(p.jump_marks.iter().all(|j| j.size < 0.0));
        assert_eq!(p.values.len(), p.times.len());
        assert_eq!(p.times.len(), 2001);
    }
}
