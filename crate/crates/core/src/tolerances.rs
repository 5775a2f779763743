//! Default tolerances of the validation suites, in one place so that the
//! command line can override them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// `|Ψ(Φ(q)) - q| / q`
    pub phi_inverse: f64,
    /// `Φ'(q)Ψ'(Φ(q)) - 1`
    pub phi_prime_inverse: f64,
    /// Spatial Wiener–Hopf factorisation, relative to `1 + |Ψ(λ)|`.
    pub wiener_hopf: f64,
    /// Closed form against contour inversion.
    pub scale_oracle: f64,
    /// Convolution series against inversion.
    pub scale_series: f64,
    pub laplace_roundtrip: f64,
    /// Finite difference of `W` against `W'`.
    pub derivative: f64,
    /// Absolute bound on `|W(0)|`.
    pub w_at_zero: f64,
    /// `q ∫u_q - 1`
    pub resolvent_mass: f64,
    pub resolvent_decomposition: f64,
    /// `h_β` ratios at `x = ±1e-6`.
    pub boundary_limit: f64,
    /// `g⁻_β → g⁻` at small `β`.
    pub g_minus_limit: f64,
    /// Passage below against hitting for continuous paths.
    pub continuous_passage: f64,
    /// Partition residual relative to `1 + total`.
    pub partition: f64,
    /// Absolute residual for the hand-computed reference row.
    pub partition_reference: f64,
    /// Intensity columns against their `β → 0` values.
    pub beta_limit: f64,
    pub temporal_wiener_hopf: f64,
    /// `K_β1 + creeping = passage below`.
    pub kernel_identity: f64,
    /// Overshoot mass against its occupation-density form.
    pub overshoot: f64,
    /// Extrapolated drift of the inverse local time.
    pub subordinator_drift: f64,
    /// Monte Carlo acceptance in standard errors.
    pub z_score: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            phi_inverse: 1e-10,
            phi_prime_inverse: 1e-9,
            wiener_hopf: 1e-6,
            scale_oracle: 1e-6,
            scale_series: 1e-5,
            laplace_roundtrip: 1e-6,
            derivative: 1e-4,
            w_at_zero: 1e-8,
            resolvent_mass: 1e-5,
            resolvent_decomposition: 1e-10,
            boundary_limit: 1e-3,
            g_minus_limit: 1e-6,
            continuous_passage: 1e-8,
            partition: 1e-6,
            partition_reference: 1e-8,
            beta_limit: 1e-4,
            temporal_wiener_hopf: 1e-10,
            kernel_identity: 1e-6,
            overshoot: 1e-6,
            subordinator_drift: 1e-3,
            z_score: 3.0,
        }
    }
}
