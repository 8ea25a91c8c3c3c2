//! The 2D horizontal heat kernel `G_h(t, x_h) = (4πt)⁻¹ e^{−|x_h|²/4t}`,
//! the 1D vertical Gaussian `G_v`, and closed-form `Lᵖ(ℝ²)` norms of
//! `|x_h|^m ∇_h^{α_h} G_h(t)` for `m ∈ {0,1}`, `|α_h| ≤ 1`.
//!
//! All the integrals reduce to polar form
//! `c(t)ᵖ · ∫|cosθ|^{sp} dθ · ∫ r^{kp+1} e^{−pr²/4t} dr`
//! and evaluate through the Gamma function, so the scaling exponent
//! `−(1−1/p) − |α_h|/2 + m/2` is exact by construction.

use crate::{AnsError, Result};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// `G_h(t, x_h)` at horizontal radius `r`.
pub fn gh_value(t: f64, r: f64) -> f64 {
    (-r * r / (4.0 * t)).exp() / (4.0 * PI * t)
}

/// `G_v(t, x₃)`: the 1D Gaussian heat kernel.
pub fn gv_value(t: f64, z: f64) -> f64 {
    (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// `∂₁G_h(t, x_h)` (by symmetry `∂₂` swaps the roles of `x₁`, `x₂`).
pub fn gh_d1_value(t: f64, x1: f64, x2: f64) -> f64 {
    -x1 / (2.0 * t) * gh_value(t, x1.hypot(x2))
}

/// Horizontal derivative selector for the closed-form norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhDeriv {
    /// `G_h` itself.
    None,
    /// One component `∂₁G_h` (or `∂₂G_h`; same norm by symmetry).
    Component,
    /// The pointwise magnitude `|∇_h G_h| = (r/2t) G_h`.
    GradMagnitude,
}

fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Closed-form `‖ |x_h|^m D G_h(t) ‖_{Lᵖ(ℝ²)}` for `p ∈ [1, ∞]`.
///
/// The integrand is `c(t)·r^k·|cosθ|^s·e^{−r²/4t}` with `k = m + |α|`,
/// `s = |α|` for a derivative component and `0` otherwise.
pub fn gh_lp_norm(t: f64, p: f64, deriv: GhDeriv, m: u8) -> Result<f64> {
    if !(t > 0.0) {
        return Err(AnsError::NonPositiveTime(t));
    }
    if !(p >= 1.0) {
        return Err(AnsError::InvalidNormSpec(format!("p = {p} < 1")));
    }
    if m > 1 {
        return Err(AnsError::InvalidNormSpec(format!("m = {m} not in {{0,1}}")));
    }
    let (k, s, c) = match deriv {
        GhDeriv::None => (m as f64, 0.0, 1.0 / (4.0 * PI * t)),
        GhDeriv::Component => (m as f64 + 1.0, 1.0, 1.0 / (8.0 * PI * t * t)),
        GhDeriv::GradMagnitude => (m as f64 + 1.0, 0.0, 1.0 / (8.0 * PI * t * t)),
    };
    if p == f64::INFINITY {
        // sup over θ at cosθ = 1; sup over r of r^k e^{−r²/4t}.
        let radial = if k == 0.0 {
            1.0
        } else {
            (2.0 * k * t).powf(k / 2.0) * (-k / 2.0).exp()
        };
        return Ok(c * radial);
    }
    // ∫₀^{2π} |cosθ|^σ dθ = 2√π Γ((σ+1)/2) / Γ(σ/2+1)
    let sigma = s * p;
    let angular = 2.0 * PI.sqrt() * gamma((sigma + 1.0) / 2.0) / gamma(sigma / 2.0 + 1.0);
    // ∫₀^∞ r^{kp+1} e^{−pr²/4t} dr = ½ Γ((kp+2)/2) (4t/p)^{(kp+2)/2}
    let nu = k * p + 1.0;
    let radial = 0.5 * gamma((nu + 1.0) / 2.0) * (4.0 * t / p).powf((nu + 1.0) / 2.0);
    Ok((c.powf(p) * angular * radial).powf(1.0 / p))
}

/// Exponent of the exact self-similar scaling
/// `‖|x_h|^m ∇^{α_h} G_h(t)‖_p = t^{exponent} ‖·(1)‖_p`.
pub fn gh_scaling_exponent(p: f64, alpha_h: u32, m: u8) -> f64 {
    let inv_p = if p == f64::INFINITY { 0.0 } else { 1.0 / p };
    -(1.0 - inv_p) - alpha_h as f64 / 2.0 + m as f64 / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_is_one() {
        for t in [0.3, 1.0, 7.5] {
            let n = gh_lp_norm(t, 1.0, GhDeriv::None, 0).unwrap();
            assert!((n - 1.0).abs() < 1e-13, "t={t}: {n}");
        }
    }

    #[test]
    fn l2_closed_form() {
        let n = gh_lp_norm(1.0, 2.0, GhDeriv::None, 0).unwrap();
        let expected = (8.0 * PI).powf(-0.5);
        assert!((n - expected).abs() < 1e-14, "{n} vs {expected}");
    }

    #[test]
    fn sup_norm() {
        let n = gh_lp_norm(2.0, f64::INFINITY, GhDeriv::None, 0).unwrap();
        assert!((n - 1.0 / (8.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn gradient_l1_closed_form() {
        // ‖∂₁G_h(t)‖_{L¹(ℝ²)} = 1/√(πt)
        let n = gh_lp_norm(1.0, 1.0, GhDeriv::Component, 0).unwrap();
        assert!((n - 1.0 / PI.sqrt()).abs() < 1e-13, "{n}");
    }

    #[test]
    fn scaling_law_holds_exactly() {
        for (p, deriv, alpha, m) in [
            (1.0, GhDeriv::Component, 1u32, 0u8),
            (2.0, GhDeriv::None, 0, 0),
            (1.0, GhDeriv::None, 0, 1),
            (3.0, GhDeriv::GradMagnitude, 1, 1),
            (f64::INFINITY, GhDeriv::Component, 1, 0),
        ] {
            let e = gh_scaling_exponent(p, alpha, m);
            for t in [0.5, 2.0, 16.0] {
                let lhs = gh_lp_norm(t, p, deriv, m).unwrap();
                let rhs = t.powf(e) * gh_lp_norm(1.0, p, deriv, m).unwrap();
                assert!(
                    (lhs - rhs).abs() < 1e-12 * rhs.abs(),
                    "p={p}, t={t}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn weighted_norm_against_quadrature() {
        // ‖|x_h| G_h(1)‖_{L¹(ℝ²)} = ∫ r·G·2πr dr = √(4πt)·... checked
        // against direct radial quadrature.
        let t = 1.4;
        let closed = gh_lp_norm(t, 1.0, GhDeriv::None, 1).unwrap();
        let mut sum = 0.0;
        let dr = 1e-4;
        let mut r = dr / 2.0;
        while r < 60.0 {
            sum += r * gh_value(t, r) * 2.0 * PI * r * dr;
            r += dr;
        }
        assert!((closed - sum).abs() < 1e-6, "{closed} vs {sum}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(gh_lp_norm(0.0, 2.0, GhDeriv::None, 0).is_err());
        assert!(gh_lp_norm(1.0, 0.5, GhDeriv::None, 0).is_err());
        assert!(gh_lp_norm(1.0, 2.0, GhDeriv::None, 2).is_err());
    }
}
