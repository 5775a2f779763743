//! Special functions that `statrs` does not cover: the two-parameter
//! Mittag-Leffler function on the positive axis and the upper incomplete
//! gamma function at negative order.

use statrs::function::gamma::{gamma, ln_gamma};

/// Beyond this value of `z^{1/α}` the exponential term of the asymptotic
/// expansion dominates the algebraic remainder by more than `e^60`.
const ML_ASYMPTOTIC_SWITCH: f64 = 60.0;

/// `E_{α,β}(z) = Σ_k z^k / Γ(αk + β)` for `z ≥ 0`.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> f64 {
    debug_assert!(alpha > 0.0 && beta > 0.0);
    if z <= 0.0 {
        // only the nonnegative axis is needed by the scale functions
        return if z == 0.0 {
            1.0 / gamma(beta)
        } else {
            f64::NAN
        };
    }
    let root = z.powf(1.0 / alpha);
    if root > ML_ASYMPTOTIC_SWITCH {
        return mittag_leffler_asymptotic(alpha, beta, z, root);
    }
    let ln_z = z.ln();
    let mut sum = 0.0;
    let mut past_peak = false;
    let mut prev = f64::NEG_INFINITY;
    for k in 0..10_000 {
        let kf = k as f64;
        let ln_term = kf * ln_z - ln_gamma(alpha * kf + beta);
        let term = ln_term.exp();
        sum += term;
        if ln_term < prev {
            past_peak = true;
        }
        prev = ln_term;
        if past_peak && term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn mittag_leffler_asymptotic(alpha: f64, beta: f64, z: f64, root: f64) -> f64 {
    let lead = root.exp() * z.powf((1.0 - beta) / alpha) / alpha;
    // algebraic remainder -Σ z^{-k}/Γ(β-αk); 1/Γ vanishes at the poles
    let mut rem = 0.0;
    for k in 1..6 {
        let arg = beta - alpha * k as f64;
        if arg <= 0.0 && arg.fract() == 0.0 {
            continue;
        }
        rem -= z.powi(-(k as i32)) / gamma(arg);
    }
    lead + rem
}

/// Upper incomplete gamma `Γ(s, z) = ∫_z^∞ t^{s-1} e^{-t} dt` for `s ∈ (-2, 1)`
/// and `z > 0`.
pub fn upper_gamma(s: f64, z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z >= 1.0 {
        return upper_gamma_cf(s, z);
    }
    // shift up to a positive order, use the lower series, recur back down
    let mut order = s;
    let mut shifts = 0;
    while order <= 0.0 {
        order += 1.0;
        shifts += 1;
    }
    let mut value = gamma(order) - lower_gamma_series(order, z);
    for _ in 0..shifts {
        order -= 1.0;
        value = (value - z.powf(order) * (-z).exp()) / order;
    }
    value
}

fn lower_gamma_series(a: f64, z: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = a;
    for _ in 0..500 {
        n += 1.0;
        term *= z / n;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum * (a * z.ln() - z).exp()
}

// Modified Lentz evaluation of the Legendre continued fraction.
fn upper_gamma_cf(s: f64, z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (s * z.ln() - z).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_to_infinity, QuadOptions};

    #[test]
    fn mittag_leffler_special_cases() {
        // E_{1,1}(z) = e^z, E_{2,1}(z^2) = cosh z, E_{2,2}(z^2) = sinh(z)/z
        for &z in &[0.1, 1.0, 5.0, 30.0] {
            assert!((mittag_leffler(1.0, 1.0, z) / z.exp() - 1.0).abs() < 1e-13);
            assert!((mittag_leffler(2.0, 1.0, z * z) / z.cosh() - 1.0).abs() < 1e-13);
            assert!((mittag_leffler(2.0, 2.0, z * z) / (z.sinh() / z) - 1.0).abs() < 1e-13);
        }
        // on both sides of the asymptotic switch
        for &z in &[3500.0, 3700.0] {
            let exact = (z as f64).sqrt().cosh();
            assert!((mittag_leffler(2.0, 1.0, z) / exact - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn upper_gamma_matches_quadrature() {
        for &s in &[-1.5, -1.2, -0.5, 0.5] {
            for &z in &[0.05, 0.5, 0.99, 1.0, 3.0, 20.0] {
                let opts = QuadOptions {
                    abs_tol: 0.0,
                    rel_tol: 1e-13,
                    ..QuadOptions::default()
                };
                let head =
                    integrate(|t: f64| t.powf(s - 1.0) * (-t).exp(), z, z + 40.0, &opts).unwrap();
                let tail = integrate_to_infinity(
                    |t: f64| t.powf(s - 1.0) * (-t).exp(),
                    z + 40.0,
                    1.0,
                    &opts,
                )
                .unwrap();
                let q = head.value + tail.value;
                let v = upper_gamma(s, z);
                assert!((v / q - 1.0).abs() < 1e-11, "s={s} z={z}: {v} vs {q}");
            }
        }
    }
}
