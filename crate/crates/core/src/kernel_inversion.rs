//! Continuum inverse Fourier transform of the pressure-kernel symbol
//! `e^{−t|ξ_h|²}/|ξ|²`, evaluated pointwise by quadrature.
//!
//! This is the symbol-side half of the kernel cross-check: it starts from
//! [`crate::operators::kernel_symbol_xi`] and performs the 3D inversion
//! numerically, reducing by horizontal radial symmetry:
//!
//! `K(t, x) = (2π)⁻³ ∫₀^∞ ρ Θ(ρ|x_h|) C(ρ, x₃) dρ`,
//!
//! where `Θ(w) = ∫₀^{2π} cos(w cosθ) dθ` (trapezoid; spectrally accurate)
//! and `C(ρ, z) = ∫_ℝ cos(zξ₃) S(ρ, ξ₃) dξ₃` (adaptive Simpson plus a
//! sine-integral tail for the `1/ξ₃²` decay). The independent quadrature
//! of the Gaussian s-integral lives in [`crate::oracle`].

use crate::operators::{kernel_symbol_xi, DerivOrders, KernelSymbolSpec};
use crate::quadrature::{adaptive_simpson, sine_integral};
use crate::Result;
use std::f64::consts::PI;

const THETA_POINTS: usize = 256;

fn theta_average(w: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..THETA_POINTS {
        let theta = 2.0 * PI * i as f64 / THETA_POINTS as f64;
        sum += (w * theta.cos()).cos();
    }
    sum * 2.0 * PI / THETA_POINTS as f64
}

/// `∫_Ξ^∞ cos(zξ)/ξ² dξ` by parts and the sine integral.
fn tail_inv_sq(z: f64, xi: f64) -> f64 {
    if z == 0.0 {
        return 1.0 / xi;
    }
    (z * xi).cos() / xi - z * (PI / 2.0 - sine_integral(z * xi))
}

/// `∫_Ξ^∞ cos(zξ)/ξ⁴ dξ` reduced to [`tail_inv_sq`].
fn tail_inv_quartic(z: f64, xi: f64) -> f64 {
    if z == 0.0 {
        return 1.0 / (3.0 * xi * xi * xi);
    }
    (z * xi).cos() / (3.0 * xi * xi * xi) - z * (z * xi).sin() / (6.0 * xi * xi)
        - z * z / 6.0 * tail_inv_sq(z, xi)
}

/// `C(ρ, z)`: the vertical-frequency integral of the symbol at fixed
/// horizontal radius `ρ`. `spec` must be the plain kernel spec.
fn vertical_integral(spec: &KernelSymbolSpec, rho: f64, z: f64, tol: f64) -> f64 {
    let xi_cut = 300.0f64.max(30.0 * rho);
    let bulk = adaptive_simpson(
        &|xi: f64| {
            let s = kernel_symbol_xi(spec, [rho, 0.0, xi], [rho, 0.0, xi]);
            (z * xi).cos() * s.re
        },
        0.0,
        xi_cut,
        tol,
    );
    // Symbol tail: e^{−tρ²}[ξ⁻² − ρ²ξ⁻⁴ + O(ξ⁻⁶)].
    let damp = (-spec.t * rho * rho).exp();
    let tail = damp * (tail_inv_sq(z, xi_cut) - rho * rho * tail_inv_quartic(z, xi_cut));
    2.0 * (bulk + tail)
}

/// `K(t, x)` at horizontal radius `r` and height `z`, by numeric
/// inversion of the 3D kernel symbol.
pub fn k_value_from_symbol(t: f64, r: f64, z: f64, tol: f64) -> Result<f64> {
    let spec = KernelSymbolSpec::new([0, 0], 0, false, DerivOrders::none(), t)?;
    let z = z.abs();
    let rho_max = (34.0 / t).sqrt();
    let integrand = |rho: f64| {
        if rho == 0.0 {
            // lim_{ρ→0} ρ·C(ρ,z) = 2·lim ρ e^{−tρ²} ∫₀^∞ dξ/(ρ²+ξ²) = π.
            return theta_average(0.0) * PI;
        }
        rho * theta_average(rho * r) * vertical_integral(&spec, rho, z, tol * (1.0 + 1.0 / rho))
    };
    let val = adaptive_simpson(&integrand, 0.0, rho_max, tol * 40.0);
    Ok(val / (2.0 * PI).powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::k_value_by_quadrature;

    #[test]
    fn matches_center_closed_form() {
        let v = k_value_from_symbol(1.0, 0.0, 0.0, 1e-10).unwrap();
        let expected = PI / (4.0 * PI).powf(1.5);
        assert!((v - expected).abs() < 1e-7, "{v} vs {expected}");
    }

    #[test]
    fn matches_gaussian_quadrature_at_sample_points() {
        for (t, r, z) in [(1.0, 0.0, 1.0), (0.5, 1.5, 0.0), (4.0, 2.0, 2.0)] {
            let a = k_value_from_symbol(t, r, z, 1e-10).unwrap();
            let b = k_value_by_quadrature(t, r, z, 1e-10).unwrap();
            assert!(
                (a - b).abs() < 1e-6,
                "t={t}, r={r}, z={z}: symbol {a} vs quadrature {b}"
            );
        }
    }
}
