//! Quadrature evaluator for the s-integral representation of the
//! anisotropic pressure kernel,
//! `K(t, x) = ∫₀^∞ G_h(t+s, x_h) G_v(s, x₃) ds`.
//!
//! This route never touches the Fourier symbol; it exists to cross-check
//! the multiplier machinery in [`crate::kernel_inversion`]. The improper
//! integral is split at `S₀ = max(t, 1)` and both halves are mapped onto
//! finite intervals with smooth integrands:
//! - `s ∈ (0, S₀]` via `s = w²` (kills the `s^{−1/2}` endpoint),
//! - `s ∈ [S₀, ∞)` via `s = u^{−2}` (the algebraic tail becomes analytic
//!   at `u = 0`).

use crate::quadrature::adaptive_simpson;
use crate::{AnsError, Result};
use std::f64::consts::PI;

/// `K(t, x)` at horizontal radius `r` and height `z` by adaptive
/// quadrature of the Gaussian s-integral.
pub fn k_value_by_quadrature(t: f64, r: f64, z: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(AnsError::NonPositiveTime(t));
    }
    let s0 = t.max(1.0);
    // Near piece: s = w², ds = 2w dw, G_v(w², z)·2w = e^{−z²/4w²}/√π.
    let near = |w: f64| {
        if w == 0.0 {
            return 0.0;
        }
        let gh = (-r * r / (4.0 * (t + w * w))).exp() / (4.0 * PI * (t + w * w));
        let gv_scaled = (-z * z / (4.0 * w * w)).exp() / PI.sqrt();
        gh * gv_scaled
    };
    // Far piece: s = u⁻², ds = −2u⁻³ du; the Jacobian absorbs all
    // inverse powers and the integrand is analytic at u = 0.
    let far = |u: f64| {
        let a = t * u * u + 1.0;
        let gh_scaled = (-r * r * u * u / (4.0 * a)).exp() / (4.0 * PI * a);
        let gv_scaled = (-z * z * u * u / 4.0).exp() / (4.0 * PI).sqrt();
        2.0 * gh_scaled * gv_scaled
    };
    let near_val = adaptive_simpson(&near, 0.0, s0.sqrt(), tol / 2.0);
    let far_val = adaptive_simpson(&far, 0.0, 1.0 / s0.sqrt(), tol / 2.0);
    Ok(near_val + far_val)
}
