//! Invariant suites over a model, collected into a machine-readable report.
//!
//! Each check stores the worst error it measured next to the tolerance it
//! was held to. A check that cannot be evaluated fails with the error
//! message as context.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::excursion::{
    entrance_constants, intensity_limits, intensity_table, overshoot_mass,
    overshoot_mass_by_occupation, reflected_masses, subordinator_drift, IntensityTable,
};
use crate::extended::Extended;
use crate::fluctuation::{
    conditioned_resolvent_mass, constant_a, creeping_probability, g_family, g_minus_beta, h_beta,
    hitting_laplace, kernel_k_unit, passage_below_laplace, resolvent_density, resolvent_mass,
    survival_probability,
};
use crate::model::{Drift, LevyModel};
use crate::montecarlo::{
    estimate_creeping, estimate_passage_below_laplace, estimate_survival, estimate_upcross_laplace,
    pool, Estimate, MCConfig,
};
use crate::quad::{integrate_half_line, QuadOptions};
use crate::scale::{ScaleEngine, ScaleMethod};
use crate::tolerances::Tolerances;

pub const SCHEMA: &str = "levy-fluct/1";

/// Killing rates of the partition and monotonicity checks.
pub const BETA_GRID: [f64; 4] = [0.1, 0.5, 2.5, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub status: Status,
    /// Worst error seen; absent when the check could not be evaluated.
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub context: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

pub type Checks = BTreeMap<String, CheckResult>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub total: usize,
}

impl Summary {
    pub fn of(checks: &Checks) -> Self {
        let passed = checks.values().filter(|c| c.passed()).count();
        Self {
            passed,
            failed: checks.len() - passed,
            total: checks.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema: String,
    pub model: serde_json::Value,
    pub tolerances: Tolerances,
    pub monte_carlo: Option<MCConfig>,
    /// Seconds since the Unix epoch; omitted in deterministic mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    pub checks: Checks,
    pub summary: Summary,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = (&String, &CheckResult)> {
        self.checks.iter().filter(|(_, c)| !c.passed())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    pub tolerances: Tolerances,
    /// Runs the Monte Carlo suite with this configuration.
    pub monte_carlo: Option<MCConfig>,
    pub deterministic: bool,
}

pub fn validate(model: &LevyModel, opts: &ValidateOptions) -> ValidationReport {
    let engine = ScaleEngine::new(*model);
    let tol = &opts.tolerances;
    // suites run concurrently; the map orders keys, so assembly is
    // independent of scheduling
    let ((mut checks, scale), (fluct, excursion)) = pool().install(|| {
        rayon::join(
            || rayon::join(|| model_suite(model, tol), || scale_suite(&engine, tol)),
            || {
                rayon::join(
                    || fluctuation_suite(&engine, tol),
                    || excursion_suite(&engine, tol),
                )
            },
        )
    });
    checks.extend(scale);
    checks.extend(fluct);
    checks.extend(excursion);
    if let Some(mc) = &opts.monte_carlo {
        checks.extend(monte_carlo_suite(model, mc, tol));
    }
    let generated_at = if opts.deterministic {
        None
    } else {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs())
    };
    ValidationReport {
        schema: SCHEMA.to_string(),
        model: serde_json::from_str(&model.to_json()).expect("model document is JSON"),
        tolerances: *tol,
        monte_carlo: opts.monte_carlo.clone(),
        generated_at,
        summary: Summary::of(&checks),
        checks,
    }
}

/// Killing rate standing in for `β → 0`. Oscillating models converge
/// like `Φ(β)` or `β/Φ(β)`, whichever is larger, and the latter is only
/// `β^{1-1/α}`-small for stable-like jumps, so the rate is lowered by
/// decades until both are below `1e-7`.
pub fn small_beta(model: &LevyModel) -> f64 {
    if model.drift() != Drift::Oscillating {
        return 1e-8;
    }
    let mut beta = 1e-14;
    while beta > 1e-200 {
        match model.phi(beta) {
            Ok(phi) if phi > 1e-7 || beta > 1e-7 * phi => beta *= 0.1,
            _ => break,
        }
    }
    beta
}

/// Largest error seen so far and where.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: String::new(),
        }
    }

    fn see(&mut self, v: f64, at: impl FnOnce() -> String) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > self.value || self.at.is_empty() {
            self.value = v;
            self.at = at();
        }
    }

    fn finish(self, what: &str) -> Result<(f64, String)> {
        let at = if self.at.is_empty() {
            "no samples".to_string()
        } else {
            format!("{what}; worst at {}", self.at)
        };
        Ok((self.value, at))
    }
}

struct Recorder {
    prefix: &'static str,
    checks: Checks,
}

impl Recorder {
    fn new(prefix: &'static str) -> Self {
        Self {
            prefix,
            checks: Checks::new(),
        }
    }

    fn check<F>(&mut self, name: &str, tolerance: f64, f: F)
    where
        F: FnOnce() -> Result<(f64, String)>,
    {
        let result = match f() {
            Ok((measured, context)) => CheckResult {
                status: if measured <= tolerance {
                    Status::Pass
                } else {
                    Status::Fail
                },
                measured: measured.is_finite().then_some(measured),
                tolerance,
                context,
            },
            Err(e) => CheckResult {
                status: Status::Fail,
                measured: None,
                tolerance,
                context: e.to_string(),
            },
        };
        self.checks
            .insert(format!("{}.{name}", self.prefix), result);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn model_suite(model: &LevyModel, tol: &Tolerances) -> Checks {
    let mut r = Recorder::new("model");
    let qs: Vec<f64> = (-4..=4).map(|k| 10f64.powi(k)).collect();
    r.check("phi_inverse", tol.phi_inverse, || {
        let mut w = Worst::new();
        for &q in &qs {
            let phi = model.phi(q)?;
            w.see(rel(model.psi(phi), q), || format!("q={q}"));
        }
        w.finish("|Ψ(Φ(q)) - q|/q")
    });
    r.check("phi_prime_inverse", tol.phi_prime_inverse, || {
        let mut w = Worst::new();
        for &q in &qs {
            let v = model.phi_prime(q)? * model.psi_prime(model.phi(q)?);
            w.see((v - 1.0).abs(), || format!("q={q}"));
        }
        w.finish("|Φ'(q)Ψ'(Φ(q)) - 1|")
    });
    r.check("phi_monotone", 0.0, || {
        let phi0 = model.phi0();
        let mut prev = phi0;
        let mut bad = 0;
        for &q in &qs {
            let phi = model.phi(q)?;
            bad += (phi <= prev || phi < phi0) as usize;
            prev = phi;
        }
        Ok((
            bad as f64,
            "violations of Φ(0) < Φ(q) strictly increasing".into(),
        ))
    });
    let lambdas = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
    r.check("wiener_hopf", tol.wiener_hopf, || {
        let phi0 = model.phi0();
        let mut w = Worst::new();
        for &l in lambdas.iter().filter(|&&l| (l - phi0).abs() > 1e-6) {
            let psi = model.psi(l);
            let err = (psi - (l - phi0) * model.ladder_exponent_lk(l)?).abs() / (1.0 + psi.abs());
            w.see(err, || format!("λ={l}"));
        }
        w.finish("|Ψ(λ) - (λ-Φ(0))κ̂_LK(λ)|/(1+|Ψ(λ)|)")
    });
    r.check("factor_identity", tol.phi_inverse, || {
        let mut w = Worst::new();
        for &q in &qs {
            let kappa = model.phi(q)?;
            let kappa_hat = (q - model.psi(0.0)) / kappa;
            w.see(rel(kappa * kappa_hat, q), || format!("q={q}"));
        }
        w.finish("|κ(q,0)κ̂(q,0) - q|/q")
    });
    r.check("ladder_bernstein", 0.0, || {
        let grid: Vec<f64> = (1..=40).map(|k| 0.25 * k as f64).collect();
        let v: Vec<f64> = grid.iter().map(|&l| model.ladder_exponent(l)).collect();
        let scale = 1e-9 * (1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        let mut bad = v.iter().filter(|&&x| x < -scale).count();
        bad += v.windows(2).filter(|p| p[1] < p[0] - scale).count();
        bad += v
            .windows(3)
            .filter(|p| p[2] - 2.0 * p[1] + p[0] > scale)
            .count();
        Ok((
            bad as f64,
            "violations of κ̂ ≥ 0, nondecreasing, concave".into(),
        ))
    });
    if model.has_jumps() && model.jumps().is_finite_activity() {
        r.check("jump_rate", tol.phi_inverse, || {
            let total =
                integrate_half_line(|y| model.levy_density(y), 1.0, &QuadOptions::default())?.value;
            Ok((rel(total, model.jump_rate()), "∫π against Π̄⁻(0+)".into()))
        });
    }
    r.checks
}

pub fn scale_suite(engine: &ScaleEngine, tol: &Tolerances) -> Checks {
    let mut r = Recorder::new("scale");
    let model = engine.model();
    let qs = [0.0, 0.5, 2.5];
    let xs = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    r.check("w_support", 0.0, || {
        let mut w = Worst::new();
        for &q in &qs {
            for &x in &[-0.5, -3.0] {
                w.see(engine.w(q, x)?.abs(), || format!("q={q}, x={x}"));
            }
        }
        w.finish("|W(x)| for x < 0")
    });
    r.check("w_at_zero", tol.w_at_zero, || {
        let mut w = Worst::new();
        for &q in &qs {
            w.see(engine.w(q, 0.0)?.abs(), || format!("q={q}"));
        }
        w.finish("|W(0)|")
    });
    r.check("w_monotone", 0.0, || {
        let mut bad = 0;
        for &q in &qs {
            let mut prev = 0.0;
            for k in 1..=50 {
                let v = engine.w(q, 0.1 * k as f64)?;
                bad += (v <= 0.0 || v < prev * (1.0 - 1e-10)) as usize;
                prev = v;
            }
        }
        Ok((
            bad as f64,
            "violations of W > 0 nondecreasing on (0, 5]".into(),
        ))
    });
    if engine.has_closed_form() {
        r.check("oracle", tol.scale_oracle, || {
            let mut w = Worst::new();
            for &q in &qs {
                for &x in &xs {
                    let closed = engine.w_closed(q, x)?;
                    let inverted = engine.w_inverted(q, x)?.value;
                    w.see(rel(inverted, closed), || format!("q={q}, x={x}"));
                }
            }
            w.finish("closed form against contour inversion")
        });
    }
    r.check("series", tol.scale_series, || {
        let mut w = Worst::new();
        for &(beta, x) in &[(0.5, 0.1), (1.0, 0.1), (1.0, 0.25), (2.5, 0.1)] {
            if beta * x * engine.w(0.0, x)? >= 1.0 {
                continue;
            }
            let series = engine.w_series_check(beta, x)?;
            w.see(rel(series, engine.w(beta, x)?), || {
                format!("β={beta}, x={x}")
            });
        }
        w.finish("convolution series against W")
    });
    r.check("laplace_roundtrip", tol.laplace_roundtrip, || {
        let mut w = Worst::new();
        for &q in &[0.0, 1.0, 2.5] {
            let phi = engine.phi(q)?;
            for &gap in &[0.5, 2.0] {
                let rt = engine.laplace_roundtrip(q, phi + gap)?;
                w.see(rt.rel_error(), || format!("q={q}, λ={}", phi + gap));
            }
        }
        w.finish("∫e^{-λx}W against 1/(Ψ(λ)-q)")
    });
    r.check("derivative", tol.derivative, || {
        let mut w = Worst::new();
        let mut unresolved = 0;
        for &q in &[0.0, 1.0] {
            let phi = engine.phi(q)?;
            for &x in &[0.1, 0.5, 1.0, 2.0, 5.0] {
                let h = 1e-3 * f64::min(x, 1.0 / phi);
                let central = |h: f64| -> Result<f64> {
                    Ok((engine.w(q, x + h)? - engine.w(q, x - h)?) / (2.0 * h))
                };
                let fd = (4.0 * central(0.5 * h)? - central(h)?) / 3.0;
                let (value, slope) = (engine.w_eval(q, x)?, engine.w_prime(q, x)?);
                // the difference quotient cannot see slopes below the
                // accuracy of W itself
                let accuracy = match value.method {
                    ScaleMethod::ClosedForm => 1e-14,
                    _ => engine.config().precision_target,
                };
                if slope * h < 1e3 * accuracy * value.value {
                    unresolved += 1;
                    continue;
                }
                w.see(rel(fd, slope), || format!("q={q}, x={x}"));
            }
        }
        w.finish(&format!(
            "Richardson central difference of W against W' ({unresolved} points below resolution)"
        ))
    });
    if model.sigma2() > 0.0 {
        r.check("w_prime_at_zero", tol.boundary_limit, || {
            let want = 2.0 / model.sigma2();
            let limit = extrapolate(|x| engine.w_prime(0.0, x), 1e-4)?;
            Ok((rel(limit, want), "extrapolated W'(0+) against 2/σ²".into()))
        });
    }
    r.checks
}

/// Aitken extrapolation of `r` from `x, x/10, x/100`, exact for
/// `r(x) = r₀ + a x^p` whatever the power `p`.
fn extrapolate<F: Fn(f64) -> Result<f64>>(r: F, x: f64) -> Result<f64> {
    let (r1, r2, r3) = (r(x)?, r(0.1 * x)?, r(0.01 * x)?);
    let (d1, d2) = (r2 - r1, r3 - r2);
    let curvature = d2 - d1;
    if curvature.abs() <= 1e-12 * (r3.abs() + d2.abs()) || d1 * d2 <= 0.0 {
        return Ok(r3);
    }
    Ok(r3 - d2 * d2 / curvature)
}

/// `h_β` ratios at `x = ∓1e-6` against `Φ'(β)Φ(β)` and
/// `1 - σ²Φ'(β)Φ(β)/2`.
pub fn boundary_errors(engine: &ScaleEngine, beta: f64) -> Result<(f64, f64)> {
    let product = engine.phi(beta)? * engine.phi_prime(beta)?;
    let left = extrapolate(|x| Ok(h_beta(engine, beta, -x)? / x), 1e-4)?;
    let right = extrapolate(|x| Ok(h_beta(engine, beta, x)? / engine.w(beta, x)?), 1e-4)?;
    let right_target = 1.0 - 0.5 * engine.model().sigma2() * product;
    Ok((rel(left, product), rel(right, right_target)))
}

pub fn fluctuation_suite(engine: &ScaleEngine, tol: &Tolerances) -> Checks {
    let mut r = Recorder::new("fluct");
    let model = engine.model();
    let small = small_beta(model);
    r.check("resolvent_mass", tol.resolvent_mass, || {
        let mut w = Worst::new();
        for &q in &[0.5, 2.0, 10.0] {
            w.see((q * resolvent_mass(engine, q)? - 1.0).abs(), || {
                format!("q={q}")
            });
        }
        w.finish("|q∫u_q - 1|")
    });
    r.check(
        "resolvent_decomposition",
        tol.resolvent_decomposition,
        || {
            let q = 1.0;
            let u = |y: f64| resolvent_density(engine, q, y);
            let u0 = u(0.0)?;
            let mut w = Worst::new();
            for &x in &[-1.0, 0.5, 2.0] {
                for &y in &[-0.5, 1.0, 3.0] {
                    let whole = u(y - x)?;
                    let killed = u(y - x)? - u(-x)? * u(y)? / u0;
                    let hit = u(-x)? / u0 * u(y)?;
                    w.see((killed + hit - whole).abs() / whole.abs().max(1.0), || {
                        format!("x={x}, y={y}")
                    });
                }
            }
            w.finish("killed plus hitting parts against u_q(y-x)")
        },
    );
    r.check("h_boundary", tol.boundary_limit, || {
        let mut w = Worst::new();
        for &beta in &[0.5, 2.5] {
            let (left, right) = boundary_errors(engine, beta)?;
            w.see(left, || format!("β={beta}, x=-1e-6"));
            w.see(right, || format!("β={beta}, x=1e-6"));
        }
        w.finish("extrapolated h_β ratios")
    });
    r.check("h_bounds", 0.0, || {
        let mut bad = 0;
        for &beta in &[0.5, 2.5] {
            let u0 = resolvent_density(engine, beta, 0.0)?;
            for &y in &[-2.0, -0.5, 0.5, 2.0] {
                let h = h_beta(engine, beta, y)?;
                bad += (h < -1e-12 || h > u0 * (1.0 + 1e-9)) as usize;
                let hit = hitting_laplace(engine, beta, y)?;
                bad += (hit < -1e-12 || hit > 1.0 + 1e-9) as usize;
            }
        }
        Ok((
            bad as f64,
            "violations of 0 ≤ h_β ≤ u_β(0), 0 ≤ E e^{-βT₀} ≤ 1".into(),
        ))
    });
    let xs_neg = [-0.5, -1.0, -2.0];
    r.check("g_minus_limit", tol.g_minus_limit, || {
        let g = g_family(engine)?;
        let mut w = Worst::new();
        for &x in &xs_neg {
            w.see(rel(g_minus_beta(engine, small, x)?, g.g_minus(x)), || {
                format!("x={x}")
            });
        }
        w.finish(&format!("g⁻_β against g⁻ at β={small:e}"))
    });
    r.check("g_minus_monotone", 0.0, || {
        let mut bad = 0;
        for &x in &xs_neg {
            let mut prev = 0.0;
            for k in 0..=8 {
                let beta = 10f64.powi(-k);
                let v = g_minus_beta(engine, beta, x)?;
                let h = h_beta(engine, beta, x)? / (engine.phi(beta)? * engine.phi_prime(beta)?);
                bad += (v <= prev) as usize + (rel(h, v) > 1e-10) as usize;
                prev = v;
            }
        }
        Ok((
            bad as f64,
            "g⁻_β increasing as β falls, equal to h_β/(ΦΦ')".into(),
        ))
    });
    r.check("constant_a", tol.beta_limit, || {
        let a = constant_a(engine);
        let product = engine.phi(small)? * engine.phi_prime(small)?;
        Ok((
            (product - a).abs(),
            format!("A = {a} against Φ'(β)Φ(β) at β={small:e}"),
        ))
    });
    r.check("g_tilde", 0.0, || {
        let g = g_family(engine)?;
        let infinite = g.g_tilde(1.0)?.is_infinite();
        let bad = infinite != (model.drift() == Drift::ToMinusInfinity);
        Ok((
            bad as u8 as f64,
            "g̃ infinite exactly when drifting to -∞".into(),
        ))
    });
    if !model.has_jumps() {
        r.check("continuous_passage", tol.continuous_passage, || {
            let mut w = Worst::new();
            for &beta in &[0.5, 2.0] {
                for &y in &[0.5, 1.0, 2.0] {
                    let p = passage_below_laplace(engine, beta, y)?;
                    let h = hitting_laplace(engine, beta, y)?;
                    w.see((p - h).abs() / h.max(1.0), || format!("β={beta}, y={y}"));
                }
            }
            w.finish("passage below against hitting")
        });
    } else {
        r.check("kernel_identity", tol.kernel_identity, || {
            let mut w = Worst::new();
            for &x in &[0.5, 1.0, 2.0] {
                let k = kernel_k_unit(engine, 2.5, x)?;
                let creep = crate::fluctuation::creeping_laplace(engine, 2.5, x)?;
                let passage = passage_below_laplace(engine, 2.5, x)?;
                w.see((k + creep - passage).abs() / passage.max(1e-300), || {
                    format!("x={x}")
                });
            }
            w.finish("K_β1 + creeping against passage below at β=2.5")
        });
    }
    r.check("probability_ranges", 0.0, || {
        let mut bad = 0;
        let out = |p: f64| !(-1e-9..=1.0 + 1e-9).contains(&p);
        for &x in &[0.1, 1.0, 3.0] {
            bad += out(passage_below_laplace(engine, 1.0, x)?) as usize;
            bad += out(creeping_probability(engine, x)?) as usize;
            bad += out(survival_probability(engine, x)?) as usize;
        }
        Ok((
            bad as f64,
            "passage, creeping and survival outside [0, 1]".into(),
        ))
    });
    r.check("conditioned_mass", tol.resolvent_mass, || {
        // h_β is β-excessive with (β - L)h_β = βu_β(0) off the origin, so
        // λ∫ = 1 - βu_β(0)(1 - E_x[e^{-qT_0}]) / (q h_β(x)) with q = β + λ
        let mut w = Worst::new();
        for &(beta, lambda, x) in &[(1.0, 1.0, 1.0), (0.5, 2.0, -1.0)] {
            let q = beta + lambda;
            let mass = lambda * conditioned_resolvent_mass(engine, beta, lambda, x)?;
            let want = 1.0
                - beta * engine.phi_prime(beta)? * (1.0 - hitting_laplace(engine, q, x)?)
                    / (q * h_beta(engine, beta, x)?);
            w.see((mass - want).abs() / want, || {
                format!("λ∫ = {mass} against {want} at β={beta}, λ={lambda}, x={x}")
            });
        }
        w.finish("conditioned resolvent mass")
    });
    r.checks
}

pub fn excursion_suite(engine: &ScaleEngine, tol: &Tolerances) -> Checks {
    let mut r = Recorder::new("excursion");
    let model = engine.model();
    let tables: Result<Vec<IntensityTable>> = BETA_GRID
        .iter()
        .map(|&b| intensity_table(engine, b))
        .collect();
    let columns = |t: &IntensityTable| {
        [
            t.total,
            t.upper_creep,
            t.stay_positive_forever,
            t.cross_before,
            t.negative_start_finite,
            t.negative_start_infinite,
            t.cross_after,
        ]
    };
    r.check("partition", tol.partition, || {
        let mut w = Worst::new();
        for t in tables.clone()? {
            w.see(t.relative_residual(), || format!("β={}", t.beta));
        }
        w.finish("|residual|/(1 + total)")
    });
    r.check("negative_start_scaling", tol.partition, || {
        let mut w = Worst::new();
        for t in tables.clone()? {
            let want = 0.5 * model.sigma2() * engine.phi(t.beta)?;
            w.see(
                (t.negative_start_total() - want).abs() / (1.0 + want),
                || format!("β={}", t.beta),
            );
        }
        w.finish("negative start total against σ²Φ(β)/2")
    });
    r.check("signs", 0.0, || {
        let mut bad = 0;
        for t in tables.clone()? {
            bad += columns(&t).iter().filter(|&&v| v < -1e-12).count();
            if model.sigma2() == 0.0 {
                bad += (t.upper_creep != 0.0 || t.negative_start_total() != 0.0) as usize;
            }
        }
        Ok((
            bad as f64,
            "negative masses, or Gaussian-only masses without σ²".into(),
        ))
    });
    r.check("beta_monotone", 0.0, || {
        let ts = tables.clone()?;
        let mut bad = 0;
        for pair in ts.windows(2) {
            let (a, b) = (columns(&pair[0]), columns(&pair[1]));
            // crossing before e_β trades a likelier e_β < ζ for a less likely
            // τ₀⁻ < e_β and is not monotone (Φ/(1+Φ)² for Model B)
            bad += a
                .iter()
                .zip(&b)
                .enumerate()
                .filter(|(i, _)| *i != 3)
                .map(|(_, p)| p)
                .filter(|(x, y)| **y < **x - 1e-12 * (1.0 + x.abs()))
                .count();
        }
        Ok((
            bad as f64,
            "masses other than cross_before decreasing in β".into(),
        ))
    });
    let small = small_beta(model);
    r.check("beta_limits", tol.beta_limit, || {
        let (near, lim) = (intensity_table(engine, small)?, intensity_limits(engine)?);
        let mut w = Worst::new();
        let names = [
            "total",
            "upper_creep",
            "stay_positive_forever",
            "cross_before",
            "negative_start_finite",
            "negative_start_infinite",
            "cross_after",
        ];
        for ((a, b), name) in columns(&near).iter().zip(columns(&lim)).zip(names) {
            w.see((a - b).abs(), || name.to_string());
        }
        w.finish(&format!("intensities at β={small:e} against their limits"))
    });
    r.check("temporal_wiener_hopf", tol.temporal_wiener_hopf, || {
        let mut w = Worst::new();
        for &beta in &BETA_GRID {
            let (_, lower) = reflected_masses(engine, beta)?;
            let lhs = resolvent_density(engine, beta, 0.0)? * lower;
            let rhs = beta * engine.phi_prime(beta)? / engine.phi(beta)?;
            w.see(rel(lhs, rhs), || format!("β={beta}"));
        }
        w.finish("u_β(0)n̲(ζ > e_β) against βΦ'(β)/Φ(β)")
    });
    r.check("entrance_constants", 0.0, || {
        let mut bad = 0;
        for &beta in &BETA_GRID {
            let c = entrance_constants(engine, beta)?;
            bad += [c.c_neg, c.c_pos, c.c_stay]
                .iter()
                .filter(|v| !(v.is_finite() && **v > 0.0))
                .count();
        }
        Ok((bad as f64, "non-positive normalisers".into()))
    });
    r.check("overshoot", tol.overshoot, || {
        let (a, b) = (
            overshoot_mass(engine)?,
            overshoot_mass_by_occupation(engine)?,
        );
        let err = match (a, b) {
            (Extended::Infinite, Extended::Infinite) => 0.0,
            (Extended::Finite(x), Extended::Finite(y)) => (x - y).abs() / x.abs().max(1.0),
            _ => f64::INFINITY,
        };
        Ok((err, format!("tail moment {a} against occupation form {b}")))
    });
    r.check("subordinator_drift", tol.subordinator_drift, || {
        let d = subordinator_drift(engine)?;
        Ok((d.estimate.abs(), "extrapolated lim 1/(λΦ'(λ))".into()))
    });
    r.checks
}

/// Horizons for the Monte Carlo checks: Laplace transforms are truncated
/// where `e^{-qt}` is negligible.
fn laplace_horizon(rate: f64) -> Option<f64> {
    Some(15.0 / rate)
}

pub fn monte_carlo_suite(model: &LevyModel, mc: &MCConfig, tol: &Tolerances) -> Checks {
    let mut r = Recorder::new("mc");
    let with = |horizon: Option<f64>| MCConfig {
        horizon,
        ..mc.clone()
    };
    let z = |e: Estimate| -> Result<(f64, String)> {
        Ok((
            e.z_score.map_or(f64::INFINITY, f64::abs),
            format!(
                "estimate {:.6} ± {:.2e} against {:.6} over {} paths",
                e.mean,
                e.stderr,
                e.analytic_target.unwrap_or(f64::NAN),
                e.n
            ),
        ))
    };
    let q = model.psi(1.0).max(0.5);
    r.check("upcross", tol.z_score, || {
        z(estimate_upcross_laplace(
            model,
            &with(laplace_horizon(q)),
            1.0,
            q,
        )?)
    });
    r.check("passage", tol.z_score, || {
        z(estimate_passage_below_laplace(
            model,
            &with(laplace_horizon(2.0)),
            1.0,
            2.0,
        )?)
    });
    let oscillating = model.drift() == Drift::Oscillating;
    if oscillating && !model.jumps().is_finite_activity() {
        // paths of such models cannot be run to an effectively infinite horizon
        r.check("creeping_truncated", tol.z_score, || {
            let e = estimate_creeping(model, &with(Some(1.0)), 1.0)?;
            let excess = e.mean - e.analytic_target.unwrap_or(f64::NAN);
            Ok((
                if excess <= 0.0 {
                    0.0
                } else {
                    excess / e.stderr.max(1e-300)
                },
                format!(
                    "creeping before t=1 {:.6} must not exceed {:?}",
                    e.mean, e.analytic_target
                ),
            ))
        });
    } else {
        let horizon = if oscillating { Some(1e12) } else { mc.horizon };
        r.check("creeping", tol.z_score, || {
            z(estimate_creeping(model, &with(horizon), 1.0)?)
        });
    }
    if model.drift() == Drift::ToPlusInfinity {
        r.check("survival", tol.z_score, || {
            z(estimate_survival(model, mc, 1.0)?)
        });
    }
    r.checks
}
