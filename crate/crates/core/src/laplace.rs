//! Numerical inversion of Laplace transforms.
//!
//! Both routines take the transform as a closure on the complex plane and
//! return `f(t)` for a single `t > 0`. A `shift` moves the integration
//! contour: `f(t) = e^{shift·t} L⁻¹[F(· + shift)](t)`, which is how callers
//! keep the rightmost singularity strictly inside the contour.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    /// Fixed Talbot contour.
    Talbot,
    /// Bromwich line with Euler summation of the alternating tail.
    Euler,
}

/// Fixed Talbot rule with `nodes` points on
/// `s(θ) = rθ(cot θ + i)`, `r = 2·nodes/(5t)`.
pub fn talbot<F>(f: F, t: f64, nodes: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    debug_assert!(t > 0.0 && nodes >= 2);
    let m = nodes as f64;
    let r = 2.0 * m / (5.0 * t);
    let mut sum = 0.5 * (f(Complex64::new(r, 0.0)) * (r * t).exp()).re;
    for k in 1..nodes {
        let theta = k as f64 * PI / m;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * t).exp() * f(s) * Complex64::new(1.0, sigma);
        sum += term.re;
    }
    r / m * sum
}

/// Euler-summed Bromwich inversion with `2·order + 1` terms
/// (`order` binomial averaging terms on top of `order` direct terms).
pub fn euler<F>(f: F, t: f64, order: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    debug_assert!(t > 0.0 && order >= 1);
    let m = order;
    let a = m as f64 * LN_10 / 3.0;
    // ξ_k weights: 1/2, 1 (×m), then partial binomial sums scaled by 2^{-m}
    let mut xi = vec![0.0; 2 * m + 1];
    xi[0] = 0.5;
    for w in xi.iter_mut().take(m + 1).skip(1) {
        *w = 1.0;
    }
    let scale = 0.5f64.powi(m as i32);
    xi[2 * m] = scale;
    let mut binom = 1.0;
    for k in 1..m {
        binom *= (m - k + 1) as f64 / k as f64;
        xi[2 * m - k] = xi[2 * m - k + 1] + scale * binom;
    }
    let mut sum = 0.0;
    for (k, w) in xi.iter().enumerate() {
        let s = Complex64::new(a, PI * k as f64) / t;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * w * f(s).re;
    }
    10f64.powf(m as f64 / 3.0) / t * sum
}

/// Inverts `f` at `t` after shifting the contour right by `shift`.
pub fn invert<F>(f: F, t: f64, shift: f64, method: InversionMethod, nodes: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let shifted = |s: Complex64| f(s + shift);
    let raw = match method {
        InversionMethod::Talbot => talbot(shifted, t, nodes),
        InversionMethod::Euler => euler(shifted, t, nodes),
    };
    (shift * t).exp() * raw
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(method: InversionMethod, nodes: usize, tol: f64) {
        // 1/(s+1) ↔ e^{-t}; 1/s² ↔ t; 1/(s² + 1) ↔ sin t; s^{-1/2} ↔ 1/√(πt)
        let cases: [(fn(Complex64) -> Complex64, fn(f64) -> f64); 4] = [
            (|s| 1.0 / (s + 1.0), |t| (-t).exp()),
            (|s| 1.0 / (s * s), |t| t),
            (|s| 1.0 / (s * s + 1.0), |t| t.sin()),
            (|s| 1.0 / s.sqrt(), |t| 1.0 / (PI * t).sqrt()),
        ];
        for (i, (transform, exact)) in cases.iter().enumerate() {
            for &t in &[0.1, 1.0, 3.0] {
                let got = invert(transform, t, 0.0, method, nodes);
                let want = exact(t);
                assert!(
                    (got - want).abs() <= tol * want.abs().max(1e-2),
                    "case {i} t={t}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn talbot_known_pairs() {
        check(InversionMethod::Talbot, 32, 1e-9);
    }

    #[test]
    fn euler_known_pairs() {
        check(InversionMethod::Euler, 18, 1e-7);
    }

    #[test]
    fn shift_moves_past_singularity() {
        // 1/(s-2) ↔ e^{2t}
        for method in [InversionMethod::Talbot, InversionMethod::Euler] {
            let got = invert(|s| 1.0 / (s - 2.0), 1.5, 3.0, method, 24);
            assert!((got / 3f64.exp() - 1.0).abs() < 1e-7, "{method:?}: {got}");
        }
    }
}
