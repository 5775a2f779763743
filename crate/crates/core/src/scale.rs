//! Scale functions `W^(q)`, `Z^(q)` and `W^(q)'`.
//!
//! `W^(q)` is characterised by `∫_0^∞ e^{-λx} W^(q)(x) dx = 1/(Ψ(λ) - q)` for
//! `λ > Φ(q)`. Three evaluators are provided: closed forms (Brownian,
//! Brownian with exponential jumps, driftless stable), Talbot/Euler
//! inversion of the transform, and the convolution series
//! `W^(β) = Σ β^j W^{*(j+1)}` used only as an oracle.

use std::collections::HashMap;
use std::sync::RwLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{bad_param, LevyError, Result};
use crate::laplace::{invert, InversionMethod};
use crate::model::{JumpFamily, LevyModel};
use crate::quad::{integrate_to_infinity, QuadOptions};
use crate::special::mittag_leffler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMethod {
    /// Closed form when the family has one, inversion otherwise.
    Auto,
    ClosedForm,
    ContourInversion,
    SeriesOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativePolicy {
    /// Invert `λ/(Ψ(λ) - q)`, or differentiate the closed form.
    Analytic,
    /// Centred difference with step `rel_step · x`.
    FiniteDifference { rel_step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleConfig {
    pub method: ScaleMethod,
    pub inversion: InversionMethod,
    /// Nodes of the primary inversion.
    pub nodes: usize,
    /// Nodes of the second inversion used for the error estimate.
    pub check_nodes: usize,
    /// Relative error the inversion must demonstrably reach.
    pub precision_target: f64,
    pub derivative: DerivativePolicy,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self {
            method: ScaleMethod::Auto,
            inversion: InversionMethod::Talbot,
            nodes: 32,
            check_nodes: 24,
            precision_target: 1e-8,
            derivative: DerivativePolicy::Analytic,
        }
    }
}

impl ScaleConfig {
    pub fn with_method(method: ScaleMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    /// Euler-summed Bromwich inversion; its accuracy peaks near 18 terms.
    pub fn euler() -> Self {
        Self {
            method: ScaleMethod::ContourInversion,
            inversion: InversionMethod::Euler,
            nodes: 18,
            check_nodes: 16,
            precision_target: 1e-6,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        let min_nodes = match self.inversion {
            InversionMethod::Talbot => 16,
            InversionMethod::Euler => 8,
        };
        if self.nodes < min_nodes || self.check_nodes < min_nodes {
            return Err(bad_param(
                "nodes",
                format!("need at least {min_nodes} nodes"),
            ));
        }
        if self.nodes == self.check_nodes {
            return Err(bad_param(
                "check_nodes",
                "must differ from nodes to give an error estimate",
            ));
        }
        if !(self.precision_target > 0.0 && self.precision_target <= 1e-3) {
            return Err(bad_param("precision_target", "must lie in (0, 1e-3]"));
        }
        if let DerivativePolicy::FiniteDifference { rel_step } = self.derivative {
            if !(rel_step > 0.0 && rel_step < 0.5) {
                return Err(bad_param("derivative.rel_step", "must lie in (0, 0.5)"));
            }
        }
        Ok(())
    }
}

/// A scale-function value with the evaluator that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleValue {
    pub value: f64,
    pub est_error: f64,
    pub method: ScaleMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Roundtrip {
    pub value: f64,
    pub target: f64,
    pub abs_error: f64,
}

impl Roundtrip {
    pub fn rel_error(&self) -> f64 {
        (self.value - self.target).abs() / self.target.abs()
    }
}

// coef · x^power · e^{rate·x}
#[derive(Debug, Clone, Copy)]
struct ExpTerm {
    coef: f64,
    rate: f64,
    power: u8,
}

/// `W^(q)` as a finite exponential sum (rational transforms).
#[derive(Debug, Clone)]
struct ExpSum {
    terms: Vec<ExpTerm>,
}

impl ExpSum {
    fn value(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * x.powi(t.power as i32) * (t.rate * x).exp())
            .sum()
    }

    fn derivative(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let e = (t.rate * x).exp();
                match t.power {
                    0 => t.coef * t.rate * e,
                    _ => t.coef * e * (t.rate * x + 1.0),
                }
            })
            .sum()
    }

    fn integral(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let r = t.rate;
                let rx = r * x;
                let v = match (t.power, r == 0.0) {
                    (0, true) => x,
                    (0, false) => rx.exp_m1() / r,
                    (_, true) => 0.5 * x * x,
                    (_, false) if rx.abs() < 1e-3 => x * x * (0.5 + rx / 3.0 + rx * rx / 8.0),
                    (_, false) => ((rx - 1.0) * rx.exp() + 1.0) / (r * r),
                };
                t.coef * v
            })
            .sum()
    }

    // The terms other than the dominant Φ'e^{Φx}, when it is a simple root.
    fn rest(&self, phi: f64) -> Option<ExpSum> {
        let mut found = false;
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.power == 0 && t.rate == phi && !found {
                found = true;
            } else if t.rate == phi {
                return None;
            } else {
                terms.push(*t);
            }
        }
        found.then_some(ExpSum { terms })
    }

    // Z^(q) - (q/Φ)W^(q) with the e^{Φx} terms cancelled analytically. The
    // constant terms sum to the limit at infinity, which is zero for q > 0.
    fn passage(&self, x: f64, phi: f64, q: f64) -> Option<f64> {
        let mut sum = 0.0;
        for t in self.rest(phi)?.terms {
            let r = t.rate;
            if r == 0.0 {
                return None;
            }
            let shape = match t.power {
                0 => 1.0 / r - 1.0 / phi,
                _ => (r * x - 1.0) / (r * r) - x / phi,
            };
            sum += q * t.coef * shape * (r * x).exp();
        }
        Some(sum)
    }
}

// Σ_j β^j W^{*(j+1)} at the end of the grid `w0[0], w0[stride], …` of step
// `stride * h`, by the trapezoidal rule; the endpoints vanish since W(0) = 0.
fn convolution_series(beta: f64, w0: &[f64], stride: usize, h: f64) -> Result<f64> {
    let w: Vec<f64> = w0.iter().step_by(stride).copied().collect();
    let n = w.len() - 1;
    let h = h * stride as f64;
    let mut current = w.clone();
    let mut total = w[n];
    let mut weight = 1.0;
    for _ in 1..200 {
        let mut next = vec![0.0; n + 1];
        for k in 1..=n {
            next[k] = h * (1..k).map(|m| current[m] * w[k - m]).sum::<f64>();
        }
        weight *= beta;
        let term = weight * next[n];
        total += term;
        current = next;
        if term.abs() < 1e-12 * total.abs() {
            return Ok(total);
        }
    }
    Err(LevyError::SeriesDivergence(format!(
        "series did not settle at beta = {beta}"
    )))
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect()
}

// Inverse transform of N/P with P real-rooted, given its largest root.
fn rational_inverse(num: &[f64], den: &[f64], largest: f64, dominant_coef: f64) -> Option<ExpSum> {
    let degree = den.len() - 1;
    // deflate P by (λ - largest)
    let mut quotient = vec![0.0; degree];
    let mut carry = 0.0;
    for k in (0..degree).rev() {
        carry = den[k + 1] + carry * largest;
        quotient[k] = carry;
    }
    let mut roots = vec![largest];
    match quotient.len() {
        1 => {}
        2 => roots.push(-quotient[0] / quotient[1]),
        3 => {
            let (a, b, c) = (quotient[2], quotient[1], quotient[0]);
            let disc = (b * b - 4.0 * a * c).max(0.0);
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            if q == 0.0 {
                roots.extend([0.0, 0.0]);
            } else {
                roots.extend([q / a, c / q]);
            }
        }
        _ => return None,
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    let d1 = poly_derivative(den);
    let d2 = poly_derivative(&d1);
    let d3 = poly_derivative(&d2);
    let n1 = poly_derivative(num);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
    let mut terms = Vec::new();
    let mut i = 0;
    while i < roots.len() {
        let r = roots[i];
        let multiplicity = roots[i..].iter().take_while(|&&s| close(s, r)).count();
        match multiplicity {
            1 => {
                let coef = if i == 0 {
                    dominant_coef
                } else {
                    poly_eval(num, r) / poly_eval(&d1, r)
                };
                terms.push(ExpTerm {
                    coef,
                    rate: r,
                    power: 0,
                });
            }
            2 => {
                let r = if i == 0 { largest } else { r };
                let q0 = 0.5 * poly_eval(&d2, r);
                let q1 = if d3.is_empty() {
                    0.0
                } else {
                    poly_eval(&d3, r) / 6.0
                };
                let nr = poly_eval(num, r);
                let nd = if n1.is_empty() {
                    0.0
                } else {
                    poly_eval(&n1, r)
                };
                terms.push(ExpTerm {
                    coef: nr / q0,
                    rate: r,
                    power: 1,
                });
                terms.push(ExpTerm {
                    coef: (nd * q0 - nr * q1) / (q0 * q0),
                    rate: r,
                    power: 0,
                });
            }
            _ => return None,
        }
        i += multiplicity;
    }
    Some(ExpSum { terms })
}

fn phi_key(q: f64) -> u64 {
    q.to_bits()
}

/// Evaluator for the scale functions of one model.
#[derive(Debug)]
pub struct ScaleEngine {
    model: LevyModel,
    config: ScaleConfig,
    phi_cache: RwLock<HashMap<u64, f64>>,
}

impl Clone for ScaleEngine {
    fn clone(&self) -> Self {
        Self {
            model: self.model,
            config: self.config,
            phi_cache: RwLock::new(self.phi_cache.read().map(|m| m.clone()).unwrap_or_default()),
        }
    }
}

impl ScaleEngine {
    pub fn new(model: LevyModel) -> Self {
        Self::with_config(model, ScaleConfig::default()).expect("default configuration is valid")
    }

    pub fn with_config(model: LevyModel, config: ScaleConfig) -> Result<Self> {
        config.check()?;
        Ok(Self {
            model,
            config,
            phi_cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn config(&self) -> &ScaleConfig {
        &self.config
    }

    /// `Φ(q)` through the memo cache.
    pub fn phi(&self, q: f64) -> Result<f64> {
        if let Some(&v) = self
            .phi_cache
            .read()
            .ok()
            .and_then(|m| m.get(&phi_key(q)).copied())
            .as_ref()
        {
            return Ok(v);
        }
        let v = self.model.phi(q)?;
        if let Ok(mut m) = self.phi_cache.write() {
            m.insert(phi_key(q), v);
        }
        Ok(v)
    }

    pub fn phi_prime(&self, q: f64) -> Result<f64> {
        let root = self.phi(q)?;
        if q == 0.0 {
            return self.model.phi_prime(0.0);
        }
        Ok(1.0 / self.model.psi_prime(root))
    }

    fn check_q(q: f64) -> Result<()> {
        if q >= 0.0 && q.is_finite() {
            Ok(())
        } else {
            Err(bad_param("q", format!("must be finite and >= 0, got {q}")))
        }
    }

    /// True when a closed form exists for this family.
    pub fn has_closed_form(&self) -> bool {
        let m = &self.model;
        match m.jumps() {
            JumpFamily::None | JumpFamily::CpExp { .. } => true,
            JumpFamily::Stable { .. } => m.gamma() == 0.0 && m.sigma2() == 0.0,
            JumpFamily::TemperedStable { .. } => false,
        }
    }

    fn resolved_method(&self) -> ScaleMethod {
        match self.config.method {
            ScaleMethod::Auto if self.has_closed_form() => ScaleMethod::ClosedForm,
            ScaleMethod::Auto => ScaleMethod::ContourInversion,
            m => m,
        }
    }

    fn exp_sum(&self, q: f64) -> Result<Option<ExpSum>> {
        let m = &self.model;
        let a = 0.5 * m.sigma2();
        let g = m.gamma();
        let (num, den) = match m.jumps() {
            JumpFamily::None => (vec![1.0], vec![-q, g, a]),
            JumpFamily::CpExp { rate, jump_rate } => (
                vec![jump_rate, 1.0],
                vec![
                    -q * jump_rate,
                    g * jump_rate - q - rate,
                    a * jump_rate + g,
                    a,
                ],
            ),
            _ => return Ok(None),
        };
        let phi = self.phi(q)?;
        let slope = m.psi_prime(phi);
        let dominant = if slope > 0.0 { 1.0 / slope } else { f64::NAN };
        Ok(rational_inverse(&num, &den, phi, dominant))
    }

    fn closed_form_missing(&self) -> LevyError {
        LevyError::BadConfig(format!(
            "no closed-form scale function for family `{}` with gamma = {}, sigma2 = {}",
            self.model.jumps().name(),
            self.model.gamma(),
            self.model.sigma2()
        ))
    }

    // driftless stable: W = x^{α-1} E_{α,α}(k x^α)/c with k = q/c
    fn stable_parts(&self) -> Option<(f64, f64)> {
        match self.model.jumps() {
            JumpFamily::Stable { alpha, scale } if self.has_closed_form() => Some((alpha, scale)),
            _ => None,
        }
    }

    fn closed_w(&self, q: f64, x: f64) -> Result<f64> {
        if let Some(sum) = self.exp_sum(q)? {
            return Ok(sum.value(x));
        }
        if let Some((alpha, c)) = self.stable_parts() {
            return Ok(
                x.powf(alpha - 1.0) * mittag_leffler(alpha, alpha, q / c * x.powf(alpha)) / c,
            );
        }
        Err(self.closed_form_missing())
    }

    fn closed_w_prime(&self, q: f64, x: f64) -> Result<f64> {
        if let Some(sum) = self.exp_sum(q)? {
            return Ok(sum.derivative(x));
        }
        if let Some((alpha, c)) = self.stable_parts() {
            return Ok(x.powf(alpha - 2.0)
                * mittag_leffler(alpha, alpha - 1.0, q / c * x.powf(alpha))
                / c);
        }
        Err(self.closed_form_missing())
    }

    fn closed_z(&self, q: f64, x: f64) -> Result<f64> {
        if let Some(sum) = self.exp_sum(q)? {
            return Ok(1.0 + q * sum.integral(x));
        }
        if let Some((alpha, c)) = self.stable_parts() {
            return Ok(mittag_leffler(alpha, 1.0, q / c * x.powf(alpha)));
        }
        Err(self.closed_form_missing())
    }

    // Inverts `transform` at x with the contour shifted to `shift`, and
    // checks the result against a second node count.
    fn inverted<F>(&self, transform: F, x: f64, shift: f64, offset: f64) -> Result<ScaleValue>
    where
        F: Fn(Complex64) -> Complex64,
    {
        self.inverted_with_floor(transform, x, shift, offset, 0.0)
    }

    // As `inverted`, but errors below `abs_floor` are accepted.
    fn inverted_with_floor<F>(
        &self,
        transform: F,
        x: f64,
        shift: f64,
        offset: f64,
        abs_floor: f64,
    ) -> Result<ScaleValue>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let cfg = &self.config;
        let a = invert(&transform, x, shift, cfg.inversion, cfg.nodes);
        let b = invert(&transform, x, shift, cfg.inversion, cfg.check_nodes);
        let value = a + offset;
        let est_error = (a - b).abs();
        let scale = value.abs().max(f64::MIN_POSITIVE);
        if !value.is_finite() || est_error > (cfg.precision_target * scale).max(abs_floor) {
            return Err(LevyError::InversionFailure {
                estimate: est_error / scale,
                target: cfg.precision_target,
                x,
            });
        }
        Ok(ScaleValue {
            value,
            est_error,
            method: ScaleMethod::ContourInversion,
        })
    }

    fn resolvent_transform(&self, q: f64) -> impl Fn(Complex64) -> Complex64 + '_ {
        move |s| 1.0 / (self.model.psi_complex(s) - q)
    }

    /// `W^(q)(x)` by contour inversion regardless of configuration.
    pub fn w_inverted(&self, q: f64, x: f64) -> Result<ScaleValue> {
        Self::check_q(q)?;
        if x <= 0.0 {
            return Ok(ScaleValue {
                value: 0.0,
                est_error: 0.0,
                method: ScaleMethod::ContourInversion,
            });
        }
        let phi = self.phi(q)?;
        self.inverted(self.resolvent_transform(q), x, phi, 0.0)
    }

    /// `W^(q)(x)` from the closed form; fails for families without one.
    pub fn w_closed(&self, q: f64, x: f64) -> Result<f64> {
        Self::check_q(q)?;
        if x <= 0.0 {
            return Ok(0.0);
        }
        self.closed_w(q, x)
    }

    pub fn w_eval(&self, q: f64, x: f64) -> Result<ScaleValue> {
        Self::check_q(q)?;
        let method = self.resolved_method();
        if x <= 0.0 {
            return Ok(ScaleValue {
                value: 0.0,
                est_error: 0.0,
                method,
            });
        }
        match method {
            ScaleMethod::ClosedForm => Ok(ScaleValue {
                value: self.closed_w(q, x)?,
                est_error: 0.0,
                method,
            }),
            ScaleMethod::SeriesOracle => Ok(ScaleValue {
                value: self.w_series_check(q, x)?,
                est_error: 0.0,
                method,
            }),
            _ => self.w_inverted(q, x),
        }
    }

    /// `W^(q)(x)`; zero for `x < 0`.
    pub fn w(&self, q: f64, x: f64) -> Result<f64> {
        self.w_eval(q, x).map(|v| v.value)
    }

    pub fn w_prime_eval(&self, q: f64, x: f64) -> Result<ScaleValue> {
        Self::check_q(q)?;
        if x <= 0.0 {
            return Err(bad_param(
                "x",
                "w_prime needs x > 0; use w_prime_at_zero for the boundary",
            ));
        }
        if let DerivativePolicy::FiniteDifference { rel_step } = self.config.derivative {
            let h = rel_step * x;
            let up = self.w_eval(q, x + h)?;
            let down = self.w_eval(q, x - h)?;
            return Ok(ScaleValue {
                value: (up.value - down.value) / (2.0 * h),
                est_error: (up.est_error + down.est_error) / (2.0 * h),
                method: up.method,
            });
        }
        match self.resolved_method() {
            ScaleMethod::ClosedForm => Ok(ScaleValue {
                value: self.closed_w_prime(q, x)?,
                est_error: 0.0,
                method: ScaleMethod::ClosedForm,
            }),
            _ => {
                let phi = self.phi(q)?;
                let f = self.resolvent_transform(q);
                self.inverted(move |s| s * f(s), x, phi, 0.0)
            }
        }
    }

    /// Right derivative `W^(q)'(x)` for `x > 0`.
    pub fn w_prime(&self, q: f64, x: f64) -> Result<f64> {
        self.w_prime_eval(q, x).map(|v| v.value)
    }

    /// `W^(q)'(0+) = 2/σ²`, infinite without a Gaussian part.
    pub fn w_prime_at_zero(&self) -> f64 {
        let s2 = self.model.sigma2();
        if s2 > 0.0 {
            2.0 / s2
        } else {
            f64::INFINITY
        }
    }

    pub fn z_eval(&self, q: f64, x: f64) -> Result<ScaleValue> {
        Self::check_q(q)?;
        let method = self.resolved_method();
        if x <= 0.0 || q == 0.0 {
            return Ok(ScaleValue {
                value: 1.0,
                est_error: 0.0,
                method,
            });
        }
        match method {
            ScaleMethod::ClosedForm => Ok(ScaleValue {
                value: self.closed_z(q, x)?,
                est_error: 0.0,
                method,
            }),
            _ => {
                let phi = self.phi(q)?;
                let f = self.resolvent_transform(q);
                self.inverted(move |s| f(s) * q / s, x, phi, 1.0)
            }
        }
    }

    /// `Z^(q)(x) = 1 + q ∫_0^x W^(q)`; one for `x ≤ 0`.
    pub fn z(&self, q: f64, x: f64) -> Result<f64> {
        self.z_eval(q, x).map(|v| v.value)
    }

    /// `Φ'(q)e^{Φ(q)x} - W^(q)(x)` for `x ≥ 0`, which equals the resolvent
    /// density at `-x`. Evaluated without forming the difference.
    pub fn w_complement(&self, q: f64, x: f64) -> Result<f64> {
        self.w_complement_with_floor(q, x, 0.0)
    }

    /// [`Self::w_complement`] accepting absolute inversion errors below
    /// `abs_floor`, for integrands whose far tail is negligible.
    pub fn w_complement_with_floor(&self, q: f64, x: f64, abs_floor: f64) -> Result<f64> {
        Self::check_q(q)?;
        let phi = self.phi(q)?;
        let dphi = self.phi_prime(q)?;
        if !dphi.is_finite() {
            return Err(bad_param(
                "q",
                "Phi'(q) is infinite; the complement is undefined",
            ));
        }
        if x <= 0.0 {
            return Ok(dphi * (phi * x).exp());
        }
        if self.resolved_method() == ScaleMethod::ClosedForm {
            if let Some(rest) = self.exp_sum(q)?.and_then(|s| s.rest(phi)) {
                return Ok(-rest.value(x));
            }
        }
        // Φ'/(λ-Φ) - 1/(Ψ(λ)-q) rewritten as Φ'D₂/(Ψ'(Φ) + (λ-Φ)D₂) with D₂ the
        // second divided difference of Ψ at (Φ, Φ, λ)
        let model = &self.model;
        let slope = model.psi_prime(phi);
        let transform = move |s: Complex64| {
            let d2 = model.psi_second_divided(phi, s);
            d2 * dphi / ((s - phi) * d2 + slope)
        };
        self.inverted_with_floor(transform, x, 0.0, 0.0, abs_floor)
            .map(|v| v.value)
    }

    /// Derivative of [`Self::w_complement`] in `x`, `Φ'Φe^{Φx} - W^(q)'(x)`,
    /// with the same error floor.
    pub fn w_complement_prime_with_floor(&self, q: f64, x: f64, abs_floor: f64) -> Result<f64> {
        Self::check_q(q)?;
        let phi = self.phi(q)?;
        let dphi = self.phi_prime(q)?;
        if !dphi.is_finite() {
            return Err(bad_param(
                "q",
                "Phi'(q) is infinite; the complement is undefined",
            ));
        }
        if x <= 0.0 {
            return Ok(dphi * phi * (phi * x).exp());
        }
        if self.resolved_method() == ScaleMethod::ClosedForm {
            if let Some(rest) = self.exp_sum(q)?.and_then(|s| s.rest(phi)) {
                return Ok(-rest.derivative(x));
            }
        }
        // Φ'Φ/(λ-Φ) - λ/(Ψ(λ)-q) = (Φ'ΦD₂ - 1)/D₁
        let model = &self.model;
        let slope = model.psi_prime(phi);
        let transform = move |s: Complex64| {
            let d2 = model.psi_second_divided(phi, s);
            (d2 * (dphi * phi) - 1.0) / ((s - phi) * d2 + slope)
        };
        self.inverted_with_floor(transform, x, 0.0, 0.0, abs_floor)
            .map(|v| v.value)
    }

    /// `Z^(q)(x) - (q/Φ(q))W^(q)(x)`, the transform of the first passage
    /// below zero. For large `Φ(q)x` the two terms grow like `e^{Φ(q)x}` and
    /// cancel, so the pole-free transform is inverted instead.
    pub fn passage_below(&self, q: f64, x: f64) -> Result<f64> {
        Self::check_q(q)?;
        if q == 0.0 || x <= 0.0 {
            return Ok(1.0);
        }
        let phi = self.phi(q)?;
        if phi * x <= 1.0 {
            return Ok(self.z(q, x)? - q / phi * self.w(q, x)?);
        }
        if self.resolved_method() == ScaleMethod::ClosedForm {
            if let Some(v) = self.exp_sum(q)?.and_then(|s| s.passage(x, phi, q)) {
                return Ok(v);
            }
        }
        // (D₁(λ) - q/Φ)/(λD₁(λ)) with D₁ = Ψ'(Φ) + (λ-Φ)D₂ the divided
        // difference of Ψ at (Φ, λ)
        let model = &self.model;
        let slope = model.psi_prime(phi);
        let ratio = q / phi;
        let transform = move |s: Complex64| {
            let d1 = (s - phi) * model.psi_second_divided(phi, s) + slope;
            (d1 - ratio) / (s * d1)
        };
        let floor = self.config.precision_target;
        self.inverted_with_floor(transform, x, 0.0, 0.0, floor)
            .map(|v| v.value)
    }

    /// `W^(β)(x)` from `Σ_j β^j W^{*(j+1)}(x)` on a uniform grid of step `x/512`.
    pub fn w_series_check(&self, beta: f64, x: f64) -> Result<f64> {
        Self::check_q(beta)?;
        if x <= 0.0 {
            return Ok(0.0);
        }
        let base = |y: f64| -> Result<f64> {
            if self.has_closed_form() {
                self.closed_w(0.0, y)
            } else {
                self.w_inverted(0.0, y).map(|v| v.value)
            }
        };
        let wx = base(x)?;
        if beta == 0.0 {
            return Ok(wx);
        }
        if beta * x * wx >= 1.0 {
            return Err(LevyError::SeriesDivergence(format!(
                "beta * x * W(x) = {:.3} >= 1 at beta = {beta}, x = {x}",
                beta * x * wx
            )));
        }
        const N: usize = 512;
        let h = x / N as f64;
        let mut w0 = vec![0.0; N + 1];
        for (k, v) in w0.iter_mut().enumerate().skip(1) {
            *v = base(k as f64 * h)?;
        }
        w0[N] = wx;
        // the trapezoidal error is O(h^p) with p set by the singularity of W
        // at the origin, so the nested grids are extrapolated
        let coarse = convolution_series(beta, &w0, 4, h)?;
        let middle = convolution_series(beta, &w0, 2, h)?;
        let fine = convolution_series(beta, &w0, 1, h)?;
        let (d1, d2) = (middle - coarse, fine - middle);
        let curvature = d2 - d1;
        if curvature.abs() <= 1e-12 * (fine.abs() + d2.abs()) || d1 * d2 <= 0.0 {
            return Ok(fine);
        }
        Ok(fine - d2 * d2 / curvature)
    }

    /// `∫_0^∞ e^{-λx} W^(q)(x) dx` by quadrature, with the target `1/(Ψ(λ) - q)`.
    pub fn laplace_roundtrip(&self, q: f64, lambda: f64) -> Result<Roundtrip> {
        let phi = self.phi(q)?;
        if lambda <= phi {
            return Err(bad_param("lambda", format!("must exceed Phi(q) = {phi}")));
        }
        let gap = lambda - phi;
        let mut failure = None;
        let opts = QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            ..QuadOptions::default()
        };
        let r = integrate_to_infinity(
            |x| {
                // the integrand decays like e^{-(λ-Φ)x}; past e^{-50} it is noise
                if gap * x > 50.0 {
                    return 0.0;
                }
                match self.w(q, x) {
                    Ok(w) if w.is_infinite() => 0.0,
                    Ok(w) => (-lambda * x).exp() * w,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            0.0,
            1.0 / gap,
            &opts,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Roundtrip {
            value: r.value,
            target: 1.0 / (self.model.psi(lambda) - q),
            abs_error: r.abs_error,
        })
    }
}
