//! Masses of the excursion measure `n` of `X` away from `0`, together with
//! the normalising constants and local-time quantities built from them.
//!
//! All entrance-law quantities are normalised with the local-time constant
//! set to one.

use serde::Serialize;

use crate::error::{bad_param, LevyError, Result};
use crate::extended::Extended;
use crate::model::Drift;
use crate::quad::{integrate, integrate_half_line, QuadOptions};
use crate::scale::ScaleEngine;

pub use crate::fluctuation::constant_a;

fn opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-12,
        ..QuadOptions::default()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad_param(name, format!("must be finite and > 0, got {v}")))
    }
}

fn split(phi: f64) -> f64 {
    5.0 / phi.max(1.0)
}

/// One row of excursion masses at killing rate `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensityTable {
    pub beta: f64,
    /// `n(ζ > e_β)`
    pub total: f64,
    /// `n(e_β < ζ = τ_0^- < ∞)`
    pub upper_creep: f64,
    /// `n(τ_0^- = ∞)`
    pub stay_positive_forever: f64,
    /// `n(0 < τ_0^- < e_β < ζ)`
    pub cross_before: f64,
    /// `n(τ_0^- = 0, e_β < ζ < ∞)`
    pub negative_start_finite: f64,
    /// `n(τ_0^- = 0, ζ = ∞)`
    pub negative_start_infinite: f64,
    /// `n(e_β < τ_0^- < ζ)`
    pub cross_after: f64,
    /// `total` minus the sum of the partition pieces.
    pub residual: f64,
}

impl IntensityTable {
    pub fn negative_start_total(&self) -> f64 {
        self.negative_start_finite + self.negative_start_infinite
    }

    /// `|residual| / (1 + total)`.
    pub fn relative_residual(&self) -> f64 {
        self.residual.abs() / (1.0 + self.total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativeStart {
    pub finite: f64,
    pub infinite: f64,
    pub total: f64,
}

/// `n(ζ > e_β) = 1/Φ'(β) = Ψ'(Φ(β))`.
pub fn intensity_total(engine: &ScaleEngine, beta: f64) -> Result<f64> {
    positive("beta", beta)?;
    Ok(engine.model().psi_prime(engine.phi(beta)?))
}

/// `n(ζ = ∞) = Ψ'(Φ(0)+)`.
pub fn intensity_total_infinite(engine: &ScaleEngine) -> Result<f64> {
    let model = engine.model();
    Ok(match model.drift() {
        Drift::Oscillating => 0.0,
        _ => model.psi_prime(engine.phi(0.0)?),
    })
}

/// `n(e_β < ζ = τ_0^- < ∞) = σ²/2 (Φ(β) - Φ(0))`.
pub fn intensity_upper_creep(engine: &ScaleEngine, beta: f64) -> Result<f64> {
    positive("beta", beta)?;
    Ok(0.5 * engine.model().sigma2() * (engine.phi(beta)? - engine.phi(0.0)?))
}

/// `n(τ_0^- = ∞) = Ψ'(0+)` when drifting to `+∞`, else zero.
pub fn intensity_stay_positive(engine: &ScaleEngine) -> f64 {
    let model = engine.model();
    match model.drift() {
        Drift::ToPlusInfinity => model.psi_prime(0.0),
        _ => 0.0,
    }
}

// ∫_0^∞ e^{-pu} u Π̄⁻(u) du
fn tilted_tail_moment(engine: &ScaleEngine, p: f64) -> Result<f64> {
    let model = engine.model();
    if !model.has_jumps() {
        return Ok(0.0);
    }
    let r = integrate_half_line(|u| (-p * u).exp() * u * model.pi_tail(u), split(p), &opts())?;
    Ok(r.value)
}

/// `n(0 < τ_0^- < e_β < ζ) = Φ(β) ∫_0^∞ e^{-Φ(β)u} u Π̄⁻(u) du`.
pub fn intensity_cross_before(engine: &ScaleEngine, beta: f64) -> Result<f64> {
    positive("beta", beta)?;
    let phi = engine.phi(beta)?;
    Ok(phi * tilted_tail_moment(engine, phi)?)
}

/// The `ζ = ∞` analogue of [`intensity_cross_before`], with `Φ(0)`.
pub fn intensity_cross_before_infinite(engine: &ScaleEngine) -> Result<f64> {
    let phi0 = engine.phi(0.0)?;
    if phi0 == 0.0 {
        return Ok(0.0);
    }
    Ok(phi0 * tilted_tail_moment(engine, phi0)?)
}

/// Masses of excursions that start by jumping below zero, split by lifetime.
pub fn intensity_negative_start(engine: &ScaleEngine, beta: f64) -> Result<NegativeStart> {
    positive("beta", beta)?;
    let half = 0.5 * engine.model().sigma2();
    let phi0 = engine.phi(0.0)?;
    let finite = half * (engine.phi(beta)? - phi0);
    let infinite = half * phi0;
    Ok(NegativeStart {
        finite,
        infinite,
        total: finite + infinite,
    })
}

/// `n(e_β < τ_0^- < ζ) = ∫_0^∞ Π̄⁻(y)(e^{-Φ(0)y} - e^{-Φ(β)y}) dy`.
pub fn intensity_cross_after(engine: &ScaleEngine, beta: f64) -> Result<f64> {
    positive("beta", beta)?;
    let model = engine.model();
    if !model.has_jumps() {
        return Ok(0.0);
    }
    let phi0 = engine.phi(0.0)?;
    let gap = engine.phi(beta)? - phi0;
    let r = integrate_half_line(
        |y| model.pi_tail(y) * (-phi0 * y).exp() * -(-gap * y).exp_m1(),
        split(phi0 + gap),
        &opts(),
    )?;
    Ok(r.value)
}

/// `n(ζ > e_β)` minus the sum of its five partition pieces.
pub fn decomposition_residual(engine: &ScaleEngine, beta: f64) -> Result<f64> {
    intensity_table(engine, beta).map(|t| t.residual)
}

pub fn intensity_table(engine: &ScaleEngine, beta: f64) -> Result<IntensityTable> {
    let total = intensity_total(engine, beta)?;
    let upper_creep = intensity_upper_creep(engine, beta)?;
    let stay_positive_forever = intensity_stay_positive(engine);
    let cross_before = intensity_cross_before(engine, beta)?;
    let negative = intensity_negative_start(engine, beta)?;
    let cross_after = intensity_cross_after(engine, beta)?;
    let residual =
        total - (negative.total + cross_before + upper_creep + stay_positive_forever + cross_after);
    Ok(IntensityTable {
        beta,
        total,
        upper_creep,
        stay_positive_forever,
        cross_before,
        negative_start_finite: negative.finite,
        negative_start_infinite: negative.infinite,
        cross_after,
        residual,
    })
}

/// The `β → 0` values of every [`IntensityTable`] column.
pub fn intensity_limits(engine: &ScaleEngine) -> Result<IntensityTable> {
    let total = intensity_total_infinite(engine)?;
    let stay_positive_forever = intensity_stay_positive(engine);
    let cross_before = intensity_cross_before_infinite(engine)?;
    let negative_start_infinite = 0.5 * engine.model().sigma2() * engine.phi(0.0)?;
    let residual = total - (negative_start_infinite + cross_before + stay_positive_forever);
    Ok(IntensityTable {
        beta: 0.0,
        total,
        upper_creep: 0.0,
        stay_positive_forever,
        cross_before,
        negative_start_finite: 0.0,
        negative_start_infinite,
        cross_after: 0.0,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntranceConstants {
    pub c_neg: f64,
    pub c_pos: f64,
    pub c_stay: f64,
}

/// The normalisers `1/(Φ(β)Φ'(β))`, `1/(1 - σ²Φ'(β)Φ(β)/2)` and
/// `Φ'(β)/(1 - σ²Φ(β)Φ'(β)/2)`.
pub fn entrance_constants(engine: &ScaleEngine, beta: f64) -> Result<EntranceConstants> {
    positive("beta", beta)?;
    let phi = engine.phi(beta)?;
    let dphi = engine.phi_prime(beta)?;
    let denominator = 1.0 - 0.5 * engine.model().sigma2() * dphi * phi;
    if !(denominator > 0.0) {
        return Err(LevyError::DegenerateDenominator {
            beta,
            value: denominator,
        });
    }
    Ok(EntranceConstants {
        c_neg: 1.0 / (phi * dphi),
        c_pos: 1.0 / denominator,
        c_stay: dphi / denominator,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntranceLaplace {
    /// `∫ f(x)(e^{-Φ(q)x} - W^(q)(-x)/Φ'(q)) dx`
    pub full: f64,
    /// `∫_0^∞ e^{-Φ(q)x} f(x) dx`
    pub positive: f64,
}

/// Laplace functionals of the entrance law for `f` supported in `[lo, hi]`.
pub fn entrance_law_laplace<F>(
    engine: &ScaleEngine,
    q: f64,
    f: F,
    lo: f64,
    hi: f64,
) -> Result<EntranceLaplace>
where
    F: Fn(f64) -> f64,
{
    positive("q", q)?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad_param("support", "needs a bounded interval lo < hi"));
    }
    let phi = engine.phi(q)?;
    let dphi = engine.phi_prime(q)?;
    let o = opts();
    let positive = if hi > 0.0 {
        integrate(|x| (-phi * x).exp() * f(x), lo.max(0.0), hi, &o)?.value
    } else {
        0.0
    };
    let negative = if lo < 0.0 {
        let mut failure = None;
        let r = integrate(
            |x| match engine.w_complement(q, -x) {
                Ok(c) => c / dphi * f(x),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            lo,
            hi.min(0.0),
            &o,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        r.value
    } else {
        0.0
    };
    Ok(EntranceLaplace {
        full: positive + negative,
        positive,
    })
}

/// `∫_0^∞ e^{-Φ(0)u} u Π̄⁻(u) du`, infinite for infinite-variance models
/// that do not drift to `-∞`.
pub fn overshoot_mass(engine: &ScaleEngine) -> Result<Extended> {
    let model = engine.model();
    if !model.has_jumps() {
        return Ok(Extended::Finite(0.0));
    }
    let phi0 = engine.phi(0.0)?;
    if model.drift() != Drift::ToMinusInfinity && model.psi_second(0.0).is_infinite() {
        return Ok(Extended::Infinite);
    }
    Ok(Extended::Finite(tilted_tail_moment(engine, phi0)?))
}

/// The same mass as [`overshoot_mass`], assembled from the occupation
/// density `e^{-Φ(0)y}` of `n̲` and the jump weight `∫ π(-v) g⁻(y - v) dv`.
pub fn overshoot_mass_by_occupation(engine: &ScaleEngine) -> Result<Extended> {
    let model = *engine.model();
    if !model.has_jumps() {
        return Ok(Extended::Finite(0.0));
    }
    if model.drift() != Drift::ToMinusInfinity && model.psi_second(0.0).is_infinite() {
        return Ok(Extended::Infinite);
    }
    let phi0 = engine.phi(0.0)?;
    let g_minus = |x: f64| {
        if phi0 == 0.0 {
            -x
        } else {
            -(phi0 * x).exp_m1() / phi0
        }
    };
    let o = QuadOptions {
        abs_tol: 1e-11,
        rel_tol: 1e-10,
        ..QuadOptions::default()
    };
    let mut failure = None;
    let r = integrate_half_line(
        |y| {
            let inner = integrate_half_line(
                |s| model.levy_density(y + s) * g_minus(-s),
                y.clamp(1e-12, 1.0),
                &o,
            );
            match inner {
                Ok(v) => occupation_density(engine, y) * v.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        split(phi0),
        &o,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Extended::Finite(r.value))
}

/// Occupation density of `n̲`: `e^{-Φ(0)y}` on `y > 0`.
pub fn occupation_density(engine: &ScaleEngine, y: f64) -> f64 {
    if y > 0.0 {
        (-engine.model().phi0() * y).exp()
    } else {
        0.0
    }
}

/// Laplace exponent `1/Φ'(λ)` of the inverse local time at zero.
pub fn inverse_local_time(engine: &ScaleEngine, lambda: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    Ok(1.0 / engine.phi_prime(lambda)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftEstimate {
    /// `(λ, 1/(λΦ'(λ)))` pairs on the extrapolation grid.
    pub samples: Vec<(f64, f64)>,
    pub estimate: f64,
}

/// Drift of the inverse local time, `lim_{λ→∞} 1/(λΦ'(λ))`, sampled on
/// `λ ∈ {1e2, …, 1e8}`.
pub fn subordinator_drift(engine: &ScaleEngine) -> Result<DriftEstimate> {
    let mut samples = Vec::new();
    for k in 2..=8 {
        let lambda = 10f64.powi(k);
        samples.push((lambda, inverse_local_time(engine, lambda)? / lambda));
    }
    // the ratio decays like a power of λ; extrapolate geometrically
    let n = samples.len();
    let (a, b) = (samples[n - 2].1, samples[n - 1].1);
    let estimate = if a > b && a > 0.0 {
        let ratio = b / a;
        b * ratio / (1.0 - ratio)
    } else {
        b
    };
    Ok(DriftEstimate {
        samples,
        estimate: estimate.max(0.0),
    })
}

/// `n̄(ζ > e_β) = Φ(β)` and `n̲(ζ > e_β) = β/Φ(β)` for the excursions of the
/// process reflected at its supremum and infimum.
pub fn reflected_masses(engine: &ScaleEngine, beta: f64) -> Result<(f64, f64)> {
    positive("beta", beta)?;
    let phi = engine.phi(beta)?;
    Ok((phi, beta / phi))
}
