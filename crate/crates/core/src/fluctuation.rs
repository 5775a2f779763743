//! Resolvent densities, passage transforms, the excessive functions `h_β`
//! and `g`, creeping and survival probabilities, and the jump kernel `K_β`.
//!
//! With `u_q(y) = Φ'(q)e^{-Φ(q)y} - W^(q)(-y)`, the value at a negative
//! argument is taken from [`ScaleEngine::w_complement`], so the
//! exponential growth of the two terms never cancels numerically.

use std::time::Instant;

use serde::Serialize;

use crate::error::{bad_param, Result};
use crate::extended::Extended;
use crate::model::Drift;
use crate::quad::{integrate, integrate_sqrt_origin, integrate_to_infinity, QuadOptions};
use crate::scale::ScaleEngine;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad_param(name, format!("must be finite and > 0, got {v}")))
    }
}

/// `u_q(y)`, the density of `∫_0^∞ e^{-qt} P(X_t ∈ dy) dt` for `X_0 = 0`.
pub fn resolvent_density(engine: &ScaleEngine, q: f64, y: f64) -> Result<f64> {
    positive("q", q)?;
    if y >= 0.0 {
        let phi = engine.phi(q)?;
        Ok(engine.phi_prime(q)? * (-phi * y).exp())
    } else {
        engine.w_complement(q, -y)
    }
}

/// `h_β(y) = u_β(0) - u_β(-y) = Φ'(β)(1 - e^{yΦ(β)}) + W^(β)(y)`.
pub fn h_beta(engine: &ScaleEngine, beta: f64, y: f64) -> Result<f64> {
    positive("beta", beta)?;
    h_beta_with_floor(engine, beta, y, 0.0)
}

fn h_beta_with_floor(engine: &ScaleEngine, beta: f64, y: f64, abs_floor: f64) -> Result<f64> {
    let phi = engine.phi(beta)?;
    let dphi = engine.phi_prime(beta)?;
    if y <= 0.0 {
        return Ok(-dphi * (phi * y).exp_m1());
    }
    if phi * y < 1.0 {
        Ok(engine.w(beta, y)? - dphi * (phi * y).exp_m1())
    } else {
        // here h_β is comparable to Φ'(β), so the complement only needs
        // accuracy relative to that
        let floor = abs_floor.max(engine.config().precision_target * dphi);
        Ok(dphi - engine.w_complement_with_floor(beta, y, floor)?)
    }
}

/// `E_y[e^{-βT_0}] = u_β(-y)/u_β(0)`.
pub fn hitting_laplace(engine: &ScaleEngine, beta: f64, y: f64) -> Result<f64> {
    positive("beta", beta)?;
    if y == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - h_beta(engine, beta, y)? / engine.phi_prime(beta)?)
}

/// `E_y[e^{-βτ_0^-}] = Z^(β)(y) - (β/Φ(β)) W^(β)(y)` for `y > 0`.
pub fn passage_below_laplace(engine: &ScaleEngine, beta: f64, y: f64) -> Result<f64> {
    positive("beta", beta)?;
    positive("y", y)?;
    engine.passage_below(beta, y)
}

/// `E_x[e^{-βτ_0^-}; X_{τ_0^-} = 0] = σ²/2 (W^(β)'(x) - Φ(β)W^(β)(x))`.
pub fn creeping_laplace(engine: &ScaleEngine, beta: f64, x: f64) -> Result<f64> {
    positive("x", x)?;
    let s2 = engine.model().sigma2();
    if s2 == 0.0 {
        return Ok(0.0);
    }
    let phi = engine.phi(beta)?;
    Ok(0.5 * s2 * (engine.w_prime(beta, x)? - phi * engine.w(beta, x)?))
}

/// `P_x(τ_0^- < ∞, X_{τ_0^-} = 0)`.
pub fn creeping_probability(engine: &ScaleEngine, x: f64) -> Result<f64> {
    creeping_laplace(engine, 0.0, x)
}

/// `P_x(τ_0^- = ∞) = Ψ'(0+)W(x)`, zero unless the process drifts to `+∞`.
pub fn survival_probability(engine: &ScaleEngine, x: f64) -> Result<f64> {
    positive("x", x)?;
    let model = engine.model();
    if model.drift() != Drift::ToPlusInfinity {
        return Ok(0.0);
    }
    Ok(model.psi_prime(0.0) * engine.w(0.0, x)?)
}

fn kernel_opts(deadline: Option<Instant>) -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-9,
        rel_tol: 1e-8,
        max_intervals: 2000,
        deadline,
    }
}

// Gauss–Legendre nodes and weights on [-1, 1], 8 points.
const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

// ∫_{x-y}^x f by 8-point Gauss–Legendre.
fn gauss<F: Fn(f64) -> Result<f64>>(f: F, x: f64, y: f64) -> Result<f64> {
    let (mid, half) = (x - 0.5 * y, 0.5 * y);
    let mut sum = 0.0;
    for &(node, weight) in &GL8 {
        sum += weight * (f(mid - half * node)? + f(mid + half * node)?);
    }
    Ok(half * sum)
}

/// The kernel weight `e^{-Φy}W(x) - W(x - y)`.
///
/// Short steps integrate the derivative so the difference keeps its relative
/// accuracy. For large `Φx` both terms grow like `e^{Φx}`; writing
/// `W = Φ'e^{Φx} - W_c` cancels that growth exactly and leaves
/// `W_c(x - y) - e^{-Φy}W_c(x)` in terms of the bounded complement.
struct Weight<'a> {
    engine: &'a ScaleEngine,
    beta: f64,
    phi: f64,
    x: f64,
    at_x: f64,
    complement: Option<(f64, f64)>,
}

impl<'a> Weight<'a> {
    fn new(engine: &'a ScaleEngine, beta: f64, x: f64) -> Result<Self> {
        let phi = engine.phi(beta)?;
        if phi * x <= 1.0 {
            return Ok(Self {
                engine,
                beta,
                phi,
                x,
                at_x: engine.w(beta, x)?,
                complement: None,
            });
        }
        let floor = engine.config().precision_target * engine.phi_prime(beta)?;
        Ok(Self {
            engine,
            beta,
            phi,
            x,
            at_x: engine.w_complement_with_floor(beta, x, floor)?,
            complement: Some((floor, floor * phi)),
        })
    }

    fn at(&self, y: f64) -> Result<f64> {
        let (engine, beta, x) = (self.engine, self.beta, self.x);
        let decay = (-self.phi * y).exp_m1();
        match self.complement {
            None if y >= 0.25 * x => Ok(decay * self.at_x + self.at_x - engine.w(beta, x - y)?),
            None => Ok(decay * self.at_x + gauss(|z| engine.w_prime(beta, z), x, y)?),
            Some((floor, _)) if y >= 0.25 * x => {
                Ok(engine.w_complement_with_floor(beta, x - y, floor)? - (decay + 1.0) * self.at_x)
            }
            Some((_, slope_floor)) => Ok(-decay * self.at_x
                - gauss(
                    |z| engine.w_complement_prime_with_floor(beta, z, slope_floor),
                    x,
                    y,
                )?),
        }
    }
}

// ∫_0^∞ (e^{-Φy}W(x) - W(x-y)) T(y) dy, split at the kink y = x.
fn kernel_outer<T>(
    engine: &ScaleEngine,
    beta: f64,
    x: f64,
    mut tail: T,
    deadline: Option<Instant>,
) -> Result<f64>
where
    T: FnMut(f64) -> Result<f64>,
{
    positive("x", x)?;
    if !(beta >= 0.0) {
        return Err(bad_param("beta", "must be >= 0"));
    }
    if !engine.model().has_jumps() {
        return Ok(0.0);
    }
    let weight = Weight::new(engine, beta, x)?;
    let opts = kernel_opts(deadline);
    let mut failure = None;
    let mut integrand = |y: f64| {
        let w = match weight.at(y) {
            Ok(w) => w,
            Err(e) => {
                failure.get_or_insert(e);
                return 0.0;
            }
        };
        if w == 0.0 {
            return 0.0;
        }
        match tail(y) {
            Ok(t) => w * t,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let head = integrate_sqrt_origin(&mut integrand, x, &opts)?;
    let rest = integrate_to_infinity(&mut integrand, x, 1.0 / weight.phi.max(1.0), &opts)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(head.value + rest.value)
}

/// `K_β f(x) = ∫_0^∞ dy (e^{-Φ(β)y}W^(β)(x) - W^(β)(x-y)) ∫_{(-∞,-y)} Π(dz) f(y, y+z)`.
///
/// `f(before, after)` receives the pre-jump level `y > 0` and the post-jump
/// level `y + z < 0`.
pub fn kernel_k<F>(
    engine: &ScaleEngine,
    beta: f64,
    x: f64,
    f: F,
    deadline: Option<Instant>,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let model = *engine.model();
    let opts = kernel_opts(deadline);
    let tail = |y: f64| -> Result<f64> {
        let scale = y.clamp(1e-6, 1.0);
        let r = integrate_to_infinity(|s| model.levy_density(y + s) * f(y, -s), 0.0, scale, &opts)?;
        Ok(r.value)
    };
    kernel_outer(engine, beta, x, tail, deadline)
}

/// `K_β 1(x) = E_x[e^{-βτ_0^-}; X_{τ_0^- -} > 0]`, using the closed-form tail.
pub fn kernel_k_unit(engine: &ScaleEngine, beta: f64, x: f64) -> Result<f64> {
    let model = *engine.model();
    kernel_outer(engine, beta, x, |y| Ok(model.pi_tail(y)), None)
}

/// Resolvent density of the `β`-killed process conditioned to avoid `0`,
/// killed at rate `λ`, from `x` to `y`.
pub fn conditioned_resolvent_density(
    engine: &ScaleEngine,
    beta: f64,
    lambda: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    positive("beta", beta)?;
    positive("lambda", lambda)?;
    if x == 0.0 || y == 0.0 {
        return Err(bad_param("x, y", "must both be nonzero"));
    }
    conditioned_density_with_floor(engine, beta, lambda, x, y, 0.0)
}

// `abs_floor` relaxes the inversion error test on the negative half-line,
// where the complement is tiny and its relative accuracy degrades
fn conditioned_density_with_floor(
    engine: &ScaleEngine,
    beta: f64,
    lambda: f64,
    x: f64,
    y: f64,
    abs_floor: f64,
) -> Result<f64> {
    let q = beta + lambda;
    let u = |z: f64| {
        if z >= 0.0 {
            resolvent_density(engine, q, z)
        } else {
            engine.w_complement_with_floor(q, -z, abs_floor)
        }
    };
    let killed = u(y - x)? - u(-x)? / u(0.0)? * u(y)?;
    Ok(killed * h_beta_with_floor(engine, beta, y, abs_floor)? / h_beta(engine, beta, x)?)
}

/// `(1 - e^{xΦ(β)})/Φ(β)`.
pub fn g_minus_beta(engine: &ScaleEngine, beta: f64, x: f64) -> Result<f64> {
    positive("beta", beta)?;
    let phi = engine.phi(beta)?;
    Ok(-(x * phi).exp_m1() / phi)
}

/// The limit `lim_{β→0} Φ'(β)Φ(β)`.
pub fn constant_a(engine: &ScaleEngine) -> f64 {
    let model = engine.model();
    let phi0 = model.phi0();
    match model.drift() {
        Drift::ToMinusInfinity => phi0 / model.psi_prime(phi0),
        Drift::Oscillating => {
            let curvature = model.psi_second(0.0);
            if curvature.is_finite() {
                1.0 / curvature
            } else {
                0.0
            }
        }
        Drift::ToPlusInfinity => 0.0,
    }
}

/// The `β → 0` limits of the excessive functions.
#[derive(Debug, Clone, Copy)]
pub struct GFamily<'a> {
    engine: &'a ScaleEngine,
    pub drift: Drift,
    pub phi0: f64,
    pub constant_a: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GFamilySummary {
    pub drift: Drift,
    pub phi0: f64,
    pub constant_a: f64,
    pub g_tilde_infinite: bool,
}

pub fn g_family(engine: &ScaleEngine) -> Result<GFamily<'_>> {
    let regime = engine.model().validate()?;
    Ok(GFamily {
        engine,
        drift: regime.drift,
        phi0: regime.phi0,
        constant_a: constant_a(engine),
    })
}

impl GFamily<'_> {
    /// `(1 - e^{Φ(0)x})/Φ(0)`, equal to `-x` when `Φ(0) = 0`.
    pub fn g(&self, x: f64) -> f64 {
        if self.phi0 == 0.0 {
            -x
        } else {
            -(self.phi0 * x).exp_m1() / self.phi0
        }
    }

    /// `g` on `x < 0`, zero elsewhere.
    pub fn g_minus(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.g(x)
        } else {
            0.0
        }
    }

    /// `W(x)` on `x ≥ 0`, zero elsewhere.
    pub fn g_plus(&self, x: f64) -> Result<f64> {
        self.engine.w(0.0, x)
    }

    /// `lim_{β→0} h_β(x)Φ(β)/(βΦ'(β))`.
    pub fn g_tilde(&self, x: f64) -> Result<Extended> {
        let model = self.engine.model();
        let plus = if x > 0.0 { self.g_plus(x)? } else { 0.0 };
        match self.drift {
            Drift::ToMinusInfinity => Ok(Extended::Infinite),
            Drift::ToPlusInfinity => Ok(Extended::Finite(plus)),
            Drift::Oscillating => {
                let curvature = model.psi_second(0.0);
                let linear = if curvature.is_finite() {
                    x / curvature
                } else {
                    0.0
                };
                Ok(Extended::Finite(plus - linear))
            }
        }
    }

    /// `lim_{β→0} h_β(x)/(Φ(β)Φ'(β)) = g(x) + W(x)/A` for `x > 0`.
    pub fn h_limit(&self, x: f64) -> Result<Extended> {
        if x <= 0.0 {
            return Ok(Extended::Finite(self.g_minus(x)));
        }
        if self.constant_a == 0.0 {
            return Ok(Extended::Infinite);
        }
        Ok(Extended::Finite(
            self.g(x) + self.g_plus(x)? / self.constant_a,
        ))
    }

    pub fn summary(&self) -> GFamilySummary {
        GFamilySummary {
            drift: self.drift,
            phi0: self.phi0,
            constant_a: self.constant_a,
            g_tilde_infinite: self.drift == Drift::ToMinusInfinity,
        }
    }
}

/// `∫_ℝ u_q(y) dy`, which should equal `1/q`.
pub fn resolvent_mass(engine: &ScaleEngine, q: f64) -> Result<f64> {
    positive("q", q)?;
    let phi = engine.phi(q)?;
    let dphi = engine.phi_prime(q)?;
    let positive_part = dphi / phi;
    let mut failure = None;
    // the inverted integrand carries noise near 1e-7·Φ'(q) in its far tail
    let opts = QuadOptions {
        abs_tol: 1e-8 * positive_part,
        rel_tol: 1e-8,
        ..QuadOptions::default()
    };
    let r = integrate_to_infinity(
        |x| match engine.w_complement_with_floor(q, x, 1e-7 * dphi) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0 / phi.max(1.0),
        &opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(positive_part + r?.value)
}

const NEGATIVE_DEPTH: f64 = 1e4;

/// `∫_ℝ` of the conditioned resolvent density over the target level, with
/// the negative half-line truncated below `x.min(0) - 10⁴`.
pub fn conditioned_resolvent_mass(
    engine: &ScaleEngine,
    beta: f64,
    lambda: f64,
    x: f64,
) -> Result<f64> {
    positive("beta", beta)?;
    positive("lambda", lambda)?;
    let mut failure = None;
    let opts = QuadOptions {
        abs_tol: 1e-8,
        rel_tol: 1e-8,
        ..QuadOptions::default()
    };
    let mut density = |y: f64| {
        if y == 0.0 {
            return 0.0;
        }
        match conditioned_density_with_floor(engine, beta, lambda, x, y, 1e-10) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    // u has a square-root cusp at 0 without a Gaussian part, so the density
    // can have one at y = 0 and at y = x; each piece gets a square-root map
    // towards its cusp
    let (lo, hi) = (x.min(0.0), x.max(0.0));
    let half = 0.5 * (hi - lo);
    let mut total = 0.0;
    total += integrate_sqrt_origin(|t| density(lo + t), half, &opts)?.value;
    total += integrate_sqrt_origin(|t| density(hi - t), half, &opts)?.value;
    // above max(x, 0) the density decays like e^{-Φ(β+λ)y}
    let depth = 40.0 / engine.phi(beta + lambda)?.max(1e-3);
    total += integrate_sqrt_origin(|t| density(hi + t), 1.0, &opts)?.value;
    total += integrate(|t| density(hi + t), 1.0, 1.0 + depth, &opts)?.value;
    // the negative tail decays only polynomially without a Gaussian part and
    // the complement's relative accuracy degrades far out, so it stops at a
    // finite depth; the dropped mass is positive
    total += integrate_sqrt_origin(|t| density(lo - t), 1.0, &opts)?.value;
    let mut a = 1.0;
    while a < NEGATIVE_DEPTH {
        total += integrate(|t| density(lo - t), a, 10.0 * a, &opts)?.value;
        a *= 10.0;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpFamily, LevyModel};

    fn bm() -> ScaleEngine {
        ScaleEngine::new(LevyModel::brownian(0.0, 1.0).unwrap())
    }

    fn model_b() -> ScaleEngine {
        ScaleEngine::new(
            LevyModel::new(
                2.0,
                2.0,
                JumpFamily::CpExp {
                    rate: 1.0,
                    jump_rate: 1.0,
                },
            )
            .unwrap(),
        )
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn resolvent_examples() {
        let e = bm();
        let want = 0.5 * (-2.0f64).exp();
        assert!(close(resolvent_density(&e, 2.0, 1.0).unwrap(), want, 1e-14));
        assert!(close(
            resolvent_density(&e, 2.0, -1.0).unwrap(),
            want,
            1e-12
        ));
        assert!(close(resolvent_density(&e, 2.0, 0.0).unwrap(), 0.5, 1e-15));
        let b = model_b();
        assert!(close(
            resolvent_density(&b, 2.5, 0.0).unwrap(),
            1.0 / 3.75,
            1e-14
        ));
    }

    #[test]
    fn h_beta_examples() {
        let e = bm();
        let want = 0.5 * (1.0 - (-2.0f64).exp());
        assert!(close(h_beta(&e, 2.0, -1.0).unwrap(), want, 1e-14));
        assert_eq!(h_beta(&e, 2.0, 0.0).unwrap(), 0.0);
        assert!(close(h_beta(&e, 2.0, 1.0).unwrap(), want, 1e-12));
        // both branches of the positive side agree where they meet
        let b = model_b();
        let phi = b.phi(2.5).unwrap();
        let y = 1.0 / phi;
        let direct = b.w(2.5, y).unwrap() - b.phi_prime(2.5).unwrap() * (phi * y).exp_m1();
        assert!(close(h_beta(&b, 2.5, y).unwrap(), direct, 1e-12));
    }

    #[test]
    fn hitting_examples() {
        let e = bm();
        assert_eq!(hitting_laplace(&e, 2.0, 0.0).unwrap(), 1.0);
        assert!(close(
            hitting_laplace(&e, 2.0, -1.0).unwrap(),
            (-2.0f64).exp(),
            1e-13
        ));
        assert!(close(
            hitting_laplace(&e, 2.0, 1.0).unwrap(),
            (-2.0f64).exp(),
            1e-11
        ));
    }

    #[test]
    fn passage_examples() {
        let e = bm();
        assert!(close(
            passage_below_laplace(&e, 2.0, 1.0).unwrap(),
            (-2.0f64).exp(),
            1e-13
        ));
        assert!(close(
            passage_below_laplace(&e, 2.0, 1e-9).unwrap(),
            1.0,
            1e-8
        ));
        let v = passage_below_laplace(&model_b(), 2.5, 1.0).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn creeping_and_survival_examples() {
        for &x in &[0.3, 1.0, 4.0] {
            assert!(close(creeping_probability(&bm(), x).unwrap(), 1.0, 1e-14));
        }
        let st = ScaleEngine::new(LevyModel::stable(1.5, 1.0).unwrap());
        assert_eq!(creeping_probability(&st, 1.0).unwrap(), 0.0);
        let c = creeping_probability(&model_b(), 1.0).unwrap();
        assert!(c > 0.0 && c < 1.0);
        let up = ScaleEngine::new(LevyModel::brownian(1.0, 1.0).unwrap());
        assert!(close(
            survival_probability(&up, 1.0).unwrap(),
            1.0 - (-2.0f64).exp(),
            1e-14
        ));
        assert_eq!(survival_probability(&bm(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_k_unit(&bm(), 0.0, 1.0).unwrap(), 0.0);
        let b = model_b();
        for &x in &[0.2, 1.0, 3.0] {
            let k = kernel_k_unit(&b, 2.5, x).unwrap();
            let generic = kernel_k(&b, 2.5, x, |_, _| 1.0, None).unwrap();
            let creep = creeping_laplace(&b, 2.5, x).unwrap();
            let passage = passage_below_laplace(&b, 2.5, x).unwrap();
            assert!(k >= 0.0 && k <= passage);
            assert!(close(generic, k, 1e-8));
            // jumping below plus creeping exhausts the passage transform
            assert!(
                close(k + creep, passage, 1e-8),
                "x={x}: {k} + {creep} vs {passage}"
            );
        }
    }

    #[test]
    fn kernel_weight_is_nonnegative() {
        let b = model_b();
        let (phi, x) = (b.phi(2.5).unwrap(), 1.5);
        let wx = b.w(2.5, x).unwrap();
        for k in 0..200 {
            let y = k as f64 * 0.02;
            assert!((-phi * y).exp() * wx - b.w(2.5, x - y).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn conditioned_resolvent_examples() {
        let e = bm();
        assert!(conditioned_resolvent_density(&e, 1.0, 1.0, 1.0, 1.0).unwrap() > 0.0);
        assert!(
            conditioned_resolvent_density(&e, 1.0, 1.0, 1.0, 1e-12)
                .unwrap()
                .abs()
                < 1e-10
        );
        let mass = conditioned_resolvent_mass(&e, 1.0, 1.0, 1.0).unwrap();
        let want = 1.0 - (-(-2.0f64).exp_m1()) / (2.0 * -(-(2.0f64.sqrt())).exp_m1());
        assert!(close(mass, want, 1e-7), "{mass} {want}");
    }

    #[test]
    fn constant_a_cases() {
        let a = |m: LevyModel| constant_a(&ScaleEngine::new(m));
        assert!(close(a(LevyModel::brownian(0.0, 1.0).unwrap()), 1.0, 1e-15));
        assert_eq!(a(LevyModel::brownian(1.0, 1.0).unwrap()), 0.0);
        assert!(close(
            a(LevyModel::brownian(-1.0, 1.0).unwrap()),
            2.0,
            1e-14
        ));
        assert_eq!(a(LevyModel::stable(1.5, 1.0).unwrap()), 0.0);
    }

    #[test]
    fn g_family_shapes() {
        let e = ScaleEngine::new(LevyModel::brownian(-1.0, 1.0).unwrap());
        let g = g_family(&e).unwrap();
        assert_eq!(g.g(0.0), 0.0);
        assert!(g.g_minus(-1.0) > 0.0);
        assert_eq!(g.g_plus(0.0).unwrap(), 0.0);
        assert!(g.g_tilde(1.0).unwrap().is_infinite());
        let bm = bm();
        let g = g_family(&bm).unwrap();
        assert_eq!(g.g(-2.0), 2.0);
        // oscillating BM: W(x) - x/Ψ''(0+) = 2x - x
        assert!(close(g.g_tilde(3.0).unwrap().to_f64(), 3.0, 1e-14));
        assert!(close(g.h_limit(3.0).unwrap().to_f64(), -3.0 + 6.0, 1e-14));
    }

    #[test]
    fn resolvent_mass_is_inverse_rate() {
        for e in [
            bm(),
            model_b(),
            ScaleEngine::new(LevyModel::stable(1.5, 1.0).unwrap()),
        ] {
            for &q in &[0.5, 2.0, 10.0] {
                let m = resolvent_mass(&e, q).unwrap();
                assert!((q * m - 1.0).abs() < 1e-5, "q={q}: {m}");
            }
        }
    }

    #[test]
    fn g_minus_beta_increases_as_beta_falls() {
        let e = model_b();
        let mut prev = 0.0;
        for &beta in &[10.0, 1.0, 0.1, 1e-3, 1e-6] {
            let v = g_minus_beta(&e, beta, -1.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(close(prev, 1.0, 1e-5));
    }
}
