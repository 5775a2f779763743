//! Parametric spectrally negative Lévy models and their analytic primitives.
//!
//! The Laplace exponent is
//! `Ψ(λ) = γλ + σ²λ²/2 + ψ_jumps(λ)` where the jump part depends on the
//! family:
//!
//! | family            | `ψ_jumps(λ)`                                  | convention     |
//! |-------------------|-----------------------------------------------|----------------|
//! | `cp_exp`          | `-ρλ/(μ+λ)`                                   | uncompensated  |
//! | `stable`          | `cλ^α`                                        | compensated    |
//! | `tempered_stable` | `c((λ+θ)^α - θ^α - αθ^{α-1}λ)`                | compensated    |
//!
//! For the compensated families `γ` is the mean `E[X_1]`, so `Ψ'(0+) = γ`.
//! The drift of the unit-cutoff convention is available through
//! [`LevyModel::cutoff_drift`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{bad_param, LevyError, Result};
use crate::quad::{
    integrate_half_line, integrate_power_origin, integrate_to_infinity, QuadOptions,
};
use crate::special::upper_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpFamily {
    None,
    /// Jumps `-Exp(jump_rate)` arriving at `rate`.
    CpExp {
        rate: f64,
        jump_rate: f64,
    },
    /// Lévy density `C|x|^{-1-α}` on `x < 0`, normalised so `ψ_jumps = cλ^α`.
    Stable {
        alpha: f64,
        scale: f64,
    },
    /// Stable density damped by `e^{-θ|x|}`.
    TemperedStable {
        alpha: f64,
        scale: f64,
        tempering: f64,
    },
}

impl JumpFamily {
    pub fn name(&self) -> &'static str {
        match self {
            JumpFamily::None => "none",
            JumpFamily::CpExp { .. } => "cp_exp",
            JumpFamily::Stable { .. } => "stable",
            JumpFamily::TemperedStable { .. } => "tempered_stable",
        }
    }

    pub fn is_finite_activity(&self) -> bool {
        matches!(self, JumpFamily::None | JumpFamily::CpExp { .. })
    }

    fn check(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(bad_param(field, format!("must be finite and > 0, got {v}")))
            }
        };
        let stable_index = |v: f64| {
            if v > 1.0 && v < 2.0 {
                Ok(())
            } else {
                Err(bad_param(
                    "jumps.alpha",
                    format!("must lie in (1, 2), got {v}"),
                ))
            }
        };
        match *self {
            JumpFamily::None => Ok(()),
            JumpFamily::CpExp { rate, jump_rate } => {
                positive("jumps.rate", rate)?;
                positive("jumps.jump_rate", jump_rate)
            }
            JumpFamily::Stable { alpha, scale } => {
                stable_index(alpha)?;
                positive("jumps.scale", scale)
            }
            JumpFamily::TemperedStable {
                alpha,
                scale,
                tempering,
            } => {
                stable_index(alpha)?;
                positive("jumps.scale", scale)?;
                if tempering.is_finite() && tempering >= 0.0 {
                    Ok(())
                } else {
                    Err(bad_param(
                        "jumps.tempering",
                        format!("must be finite and >= 0, got {tempering}"),
                    ))
                }
            }
        }
    }
}

/// Which form of the Lévy–Khintchine integral the family's `γ` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compensation {
    /// `∫(e^{λx} - 1) Π(dx)`
    Uncompensated,
    /// `∫(e^{λx} - 1 - λx) Π(dx)`
    Compensated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    ToPlusInfinity,
    Oscillating,
    ToMinusInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRegime {
    pub drift: Drift,
    pub phi0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    gamma: f64,
    sigma2: f64,
    #[serde(default = "no_jumps")]
    jumps: JumpFamily,
}

fn no_jumps() -> JumpFamily {
    JumpFamily::None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevyModel {
    gamma: f64,
    sigma2: f64,
    jumps: JumpFamily,
    compensation: Compensation,
}

impl LevyModel {
    /// Builds a model after checking parameter ranges and the unbounded
    /// variation requirement.
    pub fn new(gamma: f64, sigma2: f64, jumps: JumpFamily) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(bad_param("gamma", "must be finite"));
        }
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(bad_param(
                "sigma2",
                format!("must be finite and >= 0, got {sigma2}"),
            ));
        }
        jumps.check()?;
        let compensation = if jumps.is_finite_activity() {
            Compensation::Uncompensated
        } else {
            Compensation::Compensated
        };
        let model = Self {
            gamma,
            sigma2,
            jumps,
            compensation,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn brownian(gamma: f64, sigma2: f64) -> Result<Self> {
        Self::new(gamma, sigma2, JumpFamily::None)
    }

    pub fn stable(alpha: f64, scale: f64) -> Result<Self> {
        Self::new(0.0, 0.0, JumpFamily::Stable { alpha, scale })
    }

    /// Parses the JSON model document; errors carry line/column or field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| {
            LevyError::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e))
        })?;
        Self::new(doc.gamma, doc.sigma2, doc.jumps)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelDocument {
            gamma: self.gamma,
            sigma2: self.sigma2,
            jumps: self.jumps,
        })
        .expect("model document serialises")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn jumps(&self) -> JumpFamily {
        self.jumps
    }

    pub fn compensation(&self) -> Compensation {
        self.compensation
    }

    pub fn has_jumps(&self) -> bool {
        !matches!(self.jumps, JumpFamily::None)
    }

    /// Constant `C` of the Lévy density `C e^{-θ|x|} |x|^{-1-α}`.
    fn stable_density_constant(alpha: f64, scale: f64) -> f64 {
        // Γ(-α) = Γ(2-α) / (α(α-1)) > 0 on (1, 2)
        scale * alpha * (alpha - 1.0) / gamma(2.0 - alpha)
    }

    /// `γ` of the unit-cutoff form `∫(e^{λx} - 1 - λx1_{|x|<1})Π(dx)`.
    pub fn cutoff_drift(&self) -> f64 {
        match self.jumps {
            JumpFamily::None | JumpFamily::CpExp { .. } => self.gamma,
            JumpFamily::Stable { alpha, scale } => {
                let c = Self::stable_density_constant(alpha, scale);
                // ∫_{x<-1} x Π(dx) = -C/(α-1)
                self.gamma + c / (alpha - 1.0)
            }
            JumpFamily::TemperedStable {
                alpha,
                scale,
                tempering,
            } => {
                let c = Self::stable_density_constant(alpha, scale);
                let big = if tempering > 0.0 {
                    c * tempering.powf(alpha - 1.0) * upper_gamma(-alpha + 1.0, tempering)
                } else {
                    c / (alpha - 1.0)
                };
                self.gamma + big
            }
        }
    }

    pub fn psi(&self, lambda: f64) -> f64 {
        let diffusion = self.gamma * lambda + 0.5 * self.sigma2 * lambda * lambda;
        diffusion
            + match self.jumps {
                JumpFamily::None => 0.0,
                JumpFamily::CpExp { rate, jump_rate } => -rate * lambda / (jump_rate + lambda),
                JumpFamily::Stable { alpha, scale } => scale * lambda.powf(alpha),
                JumpFamily::TemperedStable {
                    alpha,
                    scale,
                    tempering,
                } => {
                    scale
                        * ((lambda + tempering).powf(alpha)
                            - tempering.powf(alpha)
                            - alpha * tempering.powf(alpha - 1.0) * lambda)
                }
            }
    }

    /// Analytic continuation of `Ψ` to `Re s > -max(μ, θ)` (principal branch).
    pub fn psi_complex(&self, s: Complex64) -> Complex64 {
        let diffusion = s * self.gamma + s * s * (0.5 * self.sigma2);
        diffusion
            + match self.jumps {
                JumpFamily::None => Complex64::new(0.0, 0.0),
                JumpFamily::CpExp { rate, jump_rate } => -s * rate / (s + jump_rate),
                JumpFamily::Stable { alpha, scale } => {
                    if s == Complex64::new(0.0, 0.0) {
                        s
                    } else {
                        s.powf(alpha) * scale
                    }
                }
                JumpFamily::TemperedStable {
                    alpha,
                    scale,
                    tempering,
                } => {
                    let shifted = s + tempering;
                    let head = if shifted == Complex64::new(0.0, 0.0) {
                        shifted
                    } else {
                        shifted.powf(alpha)
                    };
                    (head - tempering.powf(alpha) - s * (alpha * tempering.powf(alpha - 1.0)))
                        * scale
                }
            }
    }

    /// Right derivative `Ψ'(λ)`; at `λ = 0` this is `Ψ'(0+) = E[X_1]`.
    pub fn psi_prime(&self, lambda: f64) -> f64 {
        let diffusion = self.gamma + self.sigma2 * lambda;
        diffusion
            + match self.jumps {
                JumpFamily::None => 0.0,
                JumpFamily::CpExp { rate, jump_rate } => {
                    -rate * jump_rate / (jump_rate + lambda).powi(2)
                }
                JumpFamily::Stable { alpha, scale } => {
                    if lambda == 0.0 {
                        0.0
                    } else {
                        scale * alpha * lambda.powf(alpha - 1.0)
                    }
                }
                JumpFamily::TemperedStable {
                    alpha,
                    scale,
                    tempering,
                } => {
                    scale
                        * alpha
                        * ((lambda + tempering).powf(alpha - 1.0) - tempering.powf(alpha - 1.0))
                }
            }
    }

    /// `Ψ''(λ)`; returns `+∞` at `λ = 0` for infinite-variance models.
    pub fn psi_second(&self, lambda: f64) -> f64 {
        self.sigma2
            + match self.jumps {
                JumpFamily::None => 0.0,
                JumpFamily::CpExp { rate, jump_rate } => {
                    2.0 * rate * jump_rate / (jump_rate + lambda).powi(3)
                }
                JumpFamily::Stable { alpha, scale } => {
                    if lambda == 0.0 {
                        f64::INFINITY
                    } else {
                        scale * alpha * (alpha - 1.0) * lambda.powf(alpha - 2.0)
                    }
                }
                JumpFamily::TemperedStable {
                    alpha,
                    scale,
                    tempering,
                } => {
                    let base = lambda + tempering;
                    if base == 0.0 {
                        f64::INFINITY
                    } else {
                        scale * alpha * (alpha - 1.0) * base.powf(alpha - 2.0)
                    }
                }
            }
    }

    /// Second divided difference `(Ψ(s) - Ψ(a) - Ψ'(a)(s - a))/(s - a)²`,
    /// evaluated without cancellation when `s` is close to `a > 0`.
    pub fn psi_second_divided(&self, a: f64, s: Complex64) -> Complex64 {
        let gaussian = Complex64::new(0.5 * self.sigma2, 0.0);
        gaussian
            + match self.jumps {
                JumpFamily::None => Complex64::new(0.0, 0.0),
                JumpFamily::CpExp { rate, jump_rate } => {
                    rate * jump_rate / ((jump_rate + a) * (jump_rate + a) * (s + jump_rate))
                }
                JumpFamily::Stable { alpha, scale } => {
                    power_second_divided(alpha, a, s - a) * scale
                }
                JumpFamily::TemperedStable {
                    alpha,
                    scale,
                    tempering,
                } => power_second_divided(alpha, a + tempering, s - a) * scale,
            }
    }

    fn mean_scale(&self) -> f64 {
        let jump_mean = match self.jumps {
            JumpFamily::CpExp { rate, jump_rate } => rate / jump_rate,
            _ => 0.0,
        };
        self.gamma.abs() + jump_mean + 1.0
    }

    /// Drift regime from the sign of `Ψ'(0+)`.
    pub fn drift(&self) -> Drift {
        let slope = self.psi_prime(0.0);
        if slope.abs() <= 1e-14 * self.mean_scale() {
            Drift::Oscillating
        } else if slope > 0.0 {
            Drift::ToPlusInfinity
        } else {
            Drift::ToMinusInfinity
        }
    }

    /// Checks the standing assumption and returns the regime with `Φ(0)`.
    pub fn validate(&self) -> Result<DriftRegime> {
        if self.sigma2 == 0.0 && self.jumps.is_finite_activity() {
            return Err(LevyError::BoundedVariation(format!(
                "sigma2 = 0 with finite-activity jumps ({}) gives bounded variation paths",
                self.jumps.name()
            )));
        }
        let drift = self.drift();
        let phi0 = match drift {
            Drift::ToMinusInfinity => self.largest_root(0.0, 0.0)?,
            _ => 0.0,
        };
        Ok(DriftRegime { drift, phi0 })
    }

    /// `Φ(0)`; zero unless the process drifts to `-∞`.
    pub fn phi0(&self) -> f64 {
        self.validate().map(|r| r.phi0).unwrap_or(f64::NAN)
    }

    /// `Φ(q) = sup{λ ≥ 0 : Ψ(λ) = q}`.
    pub fn phi(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(bad_param("q", format!("must be finite and >= 0, got {q}")));
        }
        let phi0 = self.validate()?.phi0;
        if q == 0.0 {
            return Ok(phi0);
        }
        self.largest_root(q, phi0)
    }

    /// `Φ'(q) = 1/Ψ'(Φ(q))`; `+∞` at `q = 0` for oscillating models.
    pub fn phi_prime(&self, q: f64) -> Result<f64> {
        let root = self.phi(q)?;
        let slope = self.psi_prime(root);
        if q == 0.0 && (self.drift() == Drift::Oscillating || slope <= 0.0) {
            return Ok(f64::INFINITY);
        }
        Ok(1.0 / slope)
    }

    // Largest root of Ψ(λ) = q above `lo`, where Ψ(lo) <= q. Newton from the
    // right endpoint of the bracket is monotone for a convex function;
    // bisection takes over if a step ever leaves the bracket.
    fn largest_root(&self, q: f64, lo: f64) -> Result<f64> {
        let mut lo = lo;
        let mut width = 1.0f64.max(lo);
        let mut hi = lo + width;
        let mut expansions = 0;
        while self.psi(hi) < q || (q == 0.0 && self.psi(hi) <= 0.0) {
            lo = hi;
            width *= 2.0;
            hi = lo + width;
            expansions += 1;
            if expansions > 1100 || !hi.is_finite() {
                return Err(LevyError::ConvergenceFailure(format!(
                    "no bracket for Phi({q}): Psi stayed below q up to {hi}"
                )));
            }
        }
        let mut x = hi;
        for iteration in 0..500 {
            let f = self.psi(x) - q;
            let scale = q.abs().max(self.psi_scale(x));
            if f.abs() <= 4.0 * f64::EPSILON * scale {
                return Ok(x);
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = self.psi_prime(x);
            let mut next = x - f / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-15 * hi.abs() {
                return Ok(next);
            }
            x = next;
            if iteration == 499 {
                break;
            }
        }
        Err(LevyError::ConvergenceFailure(format!(
            "Phi({q}) did not converge; bracket [{lo}, {hi}], residual {}",
            self.psi(x) - q
        )))
    }

    // Magnitude of the individual terms of Ψ(λ), for a rounding-aware stop.
    fn psi_scale(&self, lambda: f64) -> f64 {
        let base = (self.gamma * lambda).abs() + 0.5 * self.sigma2 * lambda * lambda;
        base + match self.jumps {
            JumpFamily::None => 0.0,
            JumpFamily::CpExp { rate, jump_rate } => rate * lambda / (jump_rate + lambda),
            JumpFamily::Stable { alpha, scale } => scale * lambda.powf(alpha),
            JumpFamily::TemperedStable {
                alpha,
                scale,
                tempering,
            } => scale * (lambda + tempering).powf(alpha),
        }
    }

    /// Lévy density `π(-y)` of a jump of size `-y`, `y > 0`.
    pub fn levy_density(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match self.jumps {
            JumpFamily::None => 0.0,
            JumpFamily::CpExp { rate, jump_rate } => rate * jump_rate * (-jump_rate * y).exp(),
            JumpFamily::Stable { alpha, scale } => {
                Self::stable_density_constant(alpha, scale) * y.powf(-1.0 - alpha)
            }
            JumpFamily::TemperedStable {
                alpha,
                scale,
                tempering,
            } => {
                Self::stable_density_constant(alpha, scale)
                    * (-tempering * y).exp()
                    * y.powf(-1.0 - alpha)
            }
        }
    }

    /// `Π̄⁻(x) = Π(-∞, -x)` for `x > 0`.
    pub fn pi_tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::INFINITY;
        }
        match self.jumps {
            JumpFamily::None => 0.0,
            JumpFamily::CpExp { rate, jump_rate } => rate * (-jump_rate * x).exp(),
            JumpFamily::Stable { alpha, scale } => {
                Self::stable_density_constant(alpha, scale) * x.powf(-alpha) / alpha
            }
            JumpFamily::TemperedStable {
                alpha,
                scale,
                tempering,
            } => {
                let c = Self::stable_density_constant(alpha, scale);
                if tempering == 0.0 {
                    c * x.powf(-alpha) / alpha
                } else {
                    c * tempering.powf(alpha) * upper_gamma(-alpha, tempering * x)
                }
            }
        }
    }

    /// Total jump rate `Π̄⁻(0+)`; infinite for the stable families.
    pub fn jump_rate(&self) -> f64 {
        match self.jumps {
            JumpFamily::None => 0.0,
            JumpFamily::CpExp { rate, .. } => rate,
            _ => f64::INFINITY,
        }
    }

    /// `κ̂(λ) = Ψ(λ)/(λ - Φ(0))`, with the removable singularity filled by
    /// `Ψ'(Φ(0))`.
    pub fn ladder_exponent(&self, lambda: f64) -> f64 {
        let phi0 = self.phi0();
        let gap = lambda - phi0;
        if gap == 0.0 {
            return self.psi_prime(phi0);
        }
        let curvature = self.psi_second(phi0);
        if gap.abs() < 1e-7 * phi0.max(1.0) && curvature.is_finite() {
            return self.psi_prime(phi0) + 0.5 * curvature * gap;
        }
        self.psi(lambda) / gap
    }

    /// `Π̄_Ĥ(x) = e^{Φ(0)x} ∫_x^∞ e^{-Φ(0)z} Π̄⁻(z) dz` by quadrature.
    pub fn ladder_tail(&self, x: f64) -> Result<f64> {
        if !self.has_jumps() {
            return Ok(0.0);
        }
        let phi0 = self.phi0();
        let opts = QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            ..QuadOptions::default()
        };
        // Π̄⁻(x + s) varies on the scale of x near s = 0
        let split = x.clamp(1e-12, 1.0 / phi0.max(1.0));
        let r = integrate_half_line(|s| (-phi0 * s).exp() * self.pi_tail(x + s), split, &opts)?;
        Ok(r.value)
    }

    /// `κ̂` through its Lévy–Khintchine form
    /// `Ψ'(0+)∨0 + σ²λ/2 + λ∫_0^∞ e^{-λx} Π̄_Ĥ(x) dx`, using [`Self::ladder_tail`].
    pub fn ladder_exponent_lk(&self, lambda: f64) -> Result<f64> {
        let killing = self.psi_prime(0.0).max(0.0);
        let base = killing + 0.5 * self.sigma2 * lambda;
        if !self.has_jumps() || lambda == 0.0 {
            return Ok(base);
        }
        let opts = QuadOptions {
            abs_tol: 1e-11,
            rel_tol: 1e-10,
            ..QuadOptions::default()
        };
        let mut failure = None;
        let mut integrand = |x: f64| match self.ladder_tail(x) {
            Ok(v) => (-lambda * x).exp() * v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        // Π̄_Ĥ(x) grows like x^{1-α} at the origin
        let alpha = match self.jumps {
            JumpFamily::Stable { alpha, .. } | JumpFamily::TemperedStable { alpha, .. } => alpha,
            _ => 0.0,
        };
        let split = 5.0 / lambda.max(1.0);
        let power = f64::max(2.0, 2.0 / (2.0 - alpha));
        let head = integrate_power_origin(&mut integrand, split, power, &opts)?;
        let tail = integrate_to_infinity(&mut integrand, split, split, &opts)?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(base + lambda * (head.value + tail.value))
    }
}

// Second divided difference of z ↦ z^α at (b, b, b + d), b > 0.
fn power_second_divided(alpha: f64, b: f64, d: Complex64) -> Complex64 {
    let u = d / b;
    let scale = b.powf(alpha - 2.0);
    if u.norm() < 0.5 {
        // Σ_{k≥2} C(α, k) u^{k-2}
        let mut coef = alpha * (alpha - 1.0) / 2.0;
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 2..200 {
            let term = power * coef;
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
            coef *= (alpha - k as f64) / (k as f64 + 1.0);
            power *= u;
        }
        return sum * scale;
    }
    let one = Complex64::new(1.0, 0.0);
    ((one + u).powf(alpha) - one - u * alpha) / (u * u) * scale
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn validate_examples() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap().validate().unwrap();
        assert_eq!(bm.drift, Drift::Oscillating);
        assert_eq!(bm.phi0, 0.0);
        let down = LevyModel::brownian(-1.0, 1.0).unwrap().validate().unwrap();
        assert_eq!(down.drift, Drift::ToMinusInfinity);
        assert!((down.phi0 - 2.0).abs() < 1e-14);
        let err = LevyModel::new(
            0.0,
            0.0,
            JumpFamily::CpExp {
                rate: 1.0,
                jump_rate: 1.0,
            },
        )
        .unwrap_err();
        assert!(matches!(err, LevyError::BoundedVariation(_)));
        let err = LevyModel::new(0.0, 0.0, JumpFamily::None).unwrap_err();
        assert!(matches!(err, LevyError::BoundedVariation(_)));
        let err = LevyModel::new(
            0.0,
            1.0,
            JumpFamily::Stable {
                alpha: 2.5,
                scale: 1.0,
            },
        )
        .unwrap_err();
        assert!(matches!(err, LevyError::BadParameter { .. }));
    }

    #[test]
    fn psi_examples() {
        assert_eq!(LevyModel::brownian(0.0, 1.0).unwrap().psi(2.0), 2.0);
        assert!((model_b().psi(1.0) - 2.5).abs() < 1e-15);
        assert!((LevyModel::stable(1.5, 1.0).unwrap().psi(4.0) - 8.0).abs() < 1e-13);
        for m in [model_b(), LevyModel::stable(1.5, 1.0).unwrap()] {
            assert_eq!(m.psi(0.0), 0.0);
        }
    }

    #[test]
    fn derivative_examples() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert_eq!(bm.psi_prime(0.0), 0.0);
        assert_eq!(bm.psi_second(0.0), 1.0);
        let b = model_b();
        assert!((b.psi_prime(0.0) - 1.0).abs() < 1e-15);
        assert!((b.psi_prime(1.0) - 3.75).abs() < 1e-15);
        assert!(LevyModel::stable(1.5, 1.0)
            .unwrap()
            .psi_second(0.0)
            .is_infinite());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let models = [
            model_b(),
            LevyModel::stable(1.5, 1.0).unwrap(),
            LevyModel::new(
                0.3,
                0.5,
                JumpFamily::TemperedStable {
                    alpha: 1.3,
                    scale: 0.7,
                    tempering: 2.0,
                },
            )
            .unwrap(),
        ];
        for m in models {
            for &l in &[0.3, 1.0, 4.0] {
                let h = 1e-5 * l;
                let d1 = (m.psi(l + h) - m.psi(l - h)) / (2.0 * h);
                let d2 = (m.psi_prime(l + h) - m.psi_prime(l - h)) / (2.0 * h);
                assert!((d1 / m.psi_prime(l) - 1.0).abs() < 1e-7);
                assert!((d2 / m.psi_second(l) - 1.0).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn complex_psi_agrees_on_real_axis() {
        let m = LevyModel::new(
            0.3,
            0.5,
            JumpFamily::TemperedStable {
                alpha: 1.3,
                scale: 0.7,
                tempering: 2.0,
            },
        )
        .unwrap();
        for &l in &[0.1, 1.0, 7.0] {
            let z = m.psi_complex(Complex64::new(l, 0.0));
            assert!((z.re - m.psi(l)).abs() < 1e-12 * m.psi(l).abs().max(1.0));
            assert!(z.im.abs() < 1e-14);
        }
    }

    #[test]
    fn second_divided_difference_matches_definition() {
        let models = [
            model_b(),
            LevyModel::stable(1.5, 1.0).unwrap(),
            LevyModel::new(
                0.3,
                0.5,
                JumpFamily::TemperedStable {
                    alpha: 1.3,
                    scale: 0.7,
                    tempering: 2.0,
                },
            )
            .unwrap(),
        ];
        for m in models {
            let a = 0.8;
            for d in [
                Complex64::new(0.3, 0.2),
                Complex64::new(-0.1, 2.0),
                Complex64::new(1e-3, 1e-3),
                Complex64::new(0.45, 0.0),
            ] {
                let s = a + d;
                let direct = (m.psi_complex(s) - m.psi(a) - d * m.psi_prime(a)) / (d * d);
                let dd = m.psi_second_divided(a, s);
                let tol = if d.norm() < 0.01 { 1e-6 } else { 1e-11 };
                assert!(
                    (dd - direct).norm() < tol * direct.norm(),
                    "{m:?} d={d}: {dd} vs {direct}"
                );
            }
            let at = m.psi_second_divided(a, Complex64::new(a, 0.0));
            assert!((at.re - 0.5 * m.psi_second(a)).abs() < 1e-13);
        }
    }

    #[test]
    fn phi_examples() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert!((bm.phi(2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((model_b().phi(2.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((LevyModel::stable(1.5, 1.0).unwrap().phi(8.0).unwrap() - 4.0).abs() < 1e-13);
        assert!((bm.phi_prime(2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((model_b().phi_prime(2.5).unwrap() - 1.0 / 3.75).abs() < 1e-14);
        assert!(bm.phi_prime(0.0).unwrap().is_infinite());
    }

    #[test]
    fn tail_examples() {
        let cp = model_b();
        assert!((cp.pi_tail(1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(LevyModel::brownian(0.0, 1.0).unwrap().pi_tail(1.0), 0.0);
        let st = LevyModel::stable(1.5, 1.0).unwrap();
        assert!((st.pi_tail(1.0) - 0.5 / gamma(0.5)).abs() < 1e-15);
        // finite activity: Π̄⁻(0+) is the jump rate
        assert!((cp.pi_tail(1e-14) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn stable_tail_reproduces_psi() {
        // ∫_0^∞ (e^{-λy} - 1 + λy) π(-y) dy = λ^α for the chosen normalisation
        let st = LevyModel::stable(1.5, 1.0).unwrap();
        let opts = QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            ..QuadOptions::default()
        };
        for &l in &[0.5, 1.0, 4.0] {
            let r = integrate_half_line(
                |y| {
                    let ly = l * y;
                    let k = if ly < 1e-4 {
                        0.5 * ly * ly - ly * ly * ly / 6.0
                    } else {
                        (-ly).exp_m1() + ly
                    };
                    k * st.levy_density(y)
                },
                5.0 / l,
                &opts,
            )
            .unwrap();
            assert!((r.value / st.psi(l) - 1.0).abs() < 1e-8, "{l}: {}", r.value);
        }
    }

    #[test]
    fn tempered_tail_is_integral_of_density() {
        let m = LevyModel::new(
            0.0,
            0.0,
            JumpFamily::TemperedStable {
                alpha: 1.5,
                scale: 1.0,
                tempering: 1.0,
            },
        )
        .unwrap();
        for &x in &[0.01, 0.5, 2.0, 10.0] {
            let r = integrate_to_infinity(|y| m.levy_density(y), x, x, &QuadOptions::default())
                .unwrap();
            assert!((m.pi_tail(x) / r.value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ladder_examples() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert!((bm.ladder_exponent(3.0) - 1.5).abs() < 1e-15);
        let down = LevyModel::brownian(-1.0, 1.0).unwrap();
        assert!((down.ladder_exponent(2.0) - 1.0).abs() < 1e-12);
        assert!((model_b().ladder_exponent(0.0) - 1.0).abs() < 1e-15);
        assert!((model_b().ladder_tail(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-10);
        assert!((model_b().ladder_tail(0.5).unwrap() - (-0.5f64).exp()).abs() < 1e-10);
        assert_eq!(bm.ladder_tail(1.0).unwrap(), 0.0);
    }

    #[test]
    fn cutoff_drift_matches_explicit_integral() {
        let st = LevyModel::stable(1.5, 1.0).unwrap();
        let r = integrate_to_infinity(
            |y| y * st.levy_density(y),
            1.0,
            1.0,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((st.cutoff_drift() - r.value).abs() < 1e-9);
    }

    #[test]
    fn json_roundtrip_and_diagnostics() {
        let m = LevyModel::from_json(r#"{"gamma": 2, "sigma2": 2, "jumps": {"family": "cp_exp", "rate": 1, "jump_rate": 1}}"#).unwrap();
        assert_eq!(m, model_b());
        assert_eq!(LevyModel::from_json(&m.to_json()).unwrap(), m);
        let err = LevyModel::from_json(
            "{\"gamma\": 0,\n \"sigma2\": 1, \"jumps\": {\"family\": \"levy\"}}",
        )
        .unwrap_err();
        assert!(
            matches!(&err, LevyError::Parse(msg) if msg.contains("line 2")),
            "{err}"
        );
        let err = LevyModel::from_json(
            r#"{"gamma": 0, "sigma2": 0, "jumps": {"family": "stable", "alpha": 0.5, "scale": 1}}"#,
        )
        .unwrap_err();
        assert!(matches!(&err, LevyError::BadParameter { field, .. } if field == "jumps.alpha"));
        let none = LevyModel::from_json(r#"{"gamma": 0, "sigma2": 1}"#).unwrap();
        assert_eq!(none.jumps(), JumpFamily::None);
    }
}
