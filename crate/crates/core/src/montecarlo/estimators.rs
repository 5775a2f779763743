use super::simulate::{Dynamics, Passage, Walker};
use super::{reduce_paths, Estimate, MCConfig};
use crate::error::{LevyError, Result};
use crate::fluctuation::{creeping_probability, passage_below_laplace};
use crate::model::{Drift, LevyModel};
use crate::scale::ScaleEngine;

struct Prepared {
    dy: Dynamics,
    horizon: f64,
}

fn prepare(model: &LevyModel, cfg: &MCConfig) -> Result<Prepared> {
    cfg.check(model)?;
    Ok(Prepared {
        dy: Dynamics::new(model, cfg)?,
        horizon: cfg.resolved_horizon(model)?,
    })
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(crate::error::bad_param(
            name,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn require_crossings(cfg: &MCConfig, crossings: usize) -> Result<()> {
    if crossings < cfg.min_crossings.min(cfg.paths) {
        Err(LevyError::InsufficientCrossings {
            crossings,
            paths: cfg.paths,
        })
    } else {
        Ok(())
    }
}

/// `E[e^{-qτ_a⁺}; τ_a⁺ ≤ horizon]` from 0; target `e^{-aΦ(q)}`.
pub fn estimate_upcross_laplace(
    model: &LevyModel,
    cfg: &MCConfig,
    a: f64,
    q: f64,
) -> Result<Estimate> {
    positive("a", a)?;
    positive("q", q)?;
    let p = prepare(model, cfg)?;
    let (summary, crossings) = reduce_paths(cfg.paths, cfg.reduction, |i| {
        match Walker::new(&p.dy, cfg, i).run(0.0, None, Some(a), p.horizon) {
            Passage::Crossed(c) => ((-q * c.time).exp(), true),
            Passage::Survived(_) => (0.0, false),
        }
    });
    require_crossings(cfg, crossings)?;
    let target = (-a * model.phi(q)?).exp();
    Ok(Estimate::from_summary(summary, Some(target), crossings))
}

/// `E_x[e^{-βτ₀⁻}; τ₀⁻ ≤ horizon]`; target `Z^{(β)}(x) - βW^{(β)}(x)/Φ(β)`.
///
/// Truncation at the horizon can only lower the estimate.
pub fn estimate_passage_below_laplace(
    model: &LevyModel,
    cfg: &MCConfig,
    x: f64,
    beta: f64,
) -> Result<Estimate> {
    positive("x", x)?;
    positive("beta", beta)?;
    let p = prepare(model, cfg)?;
    let (summary, crossings) = reduce_paths(cfg.paths, cfg.reduction, |i| {
        match Walker::new(&p.dy, cfg, i).run(x, Some(0.0), None, p.horizon) {
            Passage::Crossed(c) => ((-beta * c.time).exp(), true),
            Passage::Survived(_) => (0.0, false),
        }
    });
    require_crossings(cfg, crossings)?;
    let engine = ScaleEngine::new(*model);
    let target = passage_below_laplace(&engine, beta, x)?;
    Ok(Estimate::from_summary(summary, Some(target), crossings))
}

/// Fraction of paths from `x` whose first passage below 0 is continuous,
/// with overshoot within `3σ√dt`.
pub fn estimate_creeping(model: &LevyModel, cfg: &MCConfig, x: f64) -> Result<Estimate> {
    positive("x", x)?;
    let p = prepare(model, cfg)?;
    let threshold = 3.0 * p.dy.model_sigma * cfg.dt.sqrt();
    let (summary, crossings) = reduce_paths(cfg.paths, cfg.reduction, |i| {
        match Walker::new(&p.dy, cfg, i).run(x, Some(0.0), None, p.horizon) {
            Passage::Crossed(c) => {
                let creep = !c.crossed_by_jump && c.overshoot.abs() <= threshold;
                (if creep { 1.0 } else { 0.0 }, true)
            }
            Passage::Survived(_) => (0.0, false),
        }
    });
    require_crossings(cfg, crossings)?;
    let engine = ScaleEngine::new(*model);
    let target = creeping_probability(&engine, x)?;
    Ok(Estimate::from_summary(summary, Some(target), crossings))
}

/// Fraction of paths from `x` still above 0 at the horizon; target
/// `Ψ'(0+)W(x)`. Truncation can only raise the estimate.
pub fn estimate_survival(model: &LevyModel, cfg: &MCConfig, x: f64) -> Result<Estimate> {
    positive("x", x)?;
    let regime = model.drift();
    if regime != Drift::ToPlusInfinity {
        return Err(LevyError::WrongRegime(format!("{regime:?}")));
    }
    let p = prepare(model, cfg)?;
    let (summary, crossings) = reduce_paths(cfg.paths, cfg.reduction, |i| {
        match Walker::new(&p.dy, cfg, i).run(x, Some(0.0), None, p.horizon) {
            Passage::Crossed(_) => (0.0, true),
            Passage::Survived(_) => (1.0, false),
        }
    });
    let engine = ScaleEngine::new(*model);
    let target = model.psi_prime(0.0) * engine.w(0.0, x)?;
    Ok(Estimate::from_summary(summary, Some(target), crossings))
}

/// Sample mean of `e^{λX_t - Ψ(λ)t}`; target 1.
pub fn martingale_check(
    model: &LevyModel,
    cfg: &MCConfig,
    lambda: f64,
    t: f64,
) -> Result<Estimate> {
    positive("t", t)?;
    let cfg = MCConfig {
        horizon: Some(t),
        ..cfg.clone()
    };
    let p = prepare(model, &cfg)?;
    let psi = model.psi(lambda);
    let (summary, _) = reduce_paths(cfg.paths, cfg.reduction, |i| {
        match Walker::new(&p.dy, &cfg, i).run(0.0, None, None, t) {
            Passage::Survived(x) => ((lambda * x - psi * t).exp(), false),
            Passage::Crossed(_) => unreachable!("no barriers"),
        }
    });
    Ok(Estimate::from_summary(summary, Some(1.0), 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JumpFamily;

    fn model_b() -> LevyModel {
        LevyModel::new(
            2.0,
            2.0,
            JumpFamily::CpExp {
                rate: 1.0,
                jump_rate: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn upcross_brownian_small() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        let cfg = MCConfig::new(1e-3, Some(30.0), 4000, 11);
        let e = estimate_upcross_laplace(&bm, &cfg, 1.0, 2.0).unwrap();
        assert!((e.analytic_target.unwrap() - (-2f64).exp()).abs() < 1e-10);
        assert!(e.within(4.0), "{e:?}");
    }

    #[test]
    fn passage_model_b_small() {
        let cfg = MCConfig::new(1e-3, Some(20.0), 4000, 12);
        let e = estimate_passage_below_laplace(&model_b(), &cfg, 1.0, 2.5).unwrap();
        assert!(e.within(4.0), "{e:?}");
    }

    #[test]
    fn survival_regime_and_small_x() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        let cfg = MCConfig::new(1e-3, Some(10.0), 100, 1);
        assert!(matches!(
            estimate_survival(&bm, &cfg, 1.0),
            Err(LevyError::WrongRegime(_))
        ));
        let up = LevyModel::brownian(1.0, 1.0).unwrap();
        let e = estimate_survival(&up, &MCConfig::new(1e-3, None, 2000, 2), 1e-9).unwrap();
        assert!(e.mean < 0.01 && e.analytic_target.unwrap() < 1e-8);
    }

    #[test]
    fn insufficient_crossings() {
        let up = LevyModel::brownian(5.0, 0.1).unwrap();
        let cfg = MCConfig::new(1e-3, None, 50, 3);
        assert!(matches!(
            estimate_passage_below_laplace(&up, &cfg, 10.0, 1.0),
            Err(LevyError::InsufficientCrossings { .. })
        ));
    }
}
