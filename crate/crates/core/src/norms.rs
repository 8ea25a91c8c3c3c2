//! Lᵖ, mixed `Lᵖ_h L^q_v`, weighted and Sobolev norms.
//!
//! Mixed norms take the vertical q-norm per horizontal point first, then
//! the horizontal p-norm, each by Riemann sum; `∞`-exponents are grid
//! maxima (a lower bound on the continuum sup within resolution error).
//! The weight `|x_h|^m` is measured from the box center.

use crate::field::ScalarField;
use crate::grid::Axis;
use crate::operators::{derivative, DerivOrders};
use crate::{AnsError, Result};

/// Exponent in `[1, ∞]`; `f64::INFINITY` encodes `∞`.
pub fn valid_exponent(p: f64) -> bool {
    p >= 1.0 && (p.is_finite() || p == f64::INFINITY)
}

/// Specification of a (derivative, weight, mixed-exponent) norm.
#[derive(Debug, Clone, Copy)]
pub struct NormSpec {
    pub p_h: f64,
    pub q_v: f64,
    pub weight_power: u8,
    pub deriv: DerivOrders,
}

impl NormSpec {
    pub fn new(p_h: f64, q_v: f64, weight_power: u8, deriv: DerivOrders) -> Result<Self> {
        if !valid_exponent(p_h) || !valid_exponent(q_v) {
            return Err(AnsError::InvalidNormSpec(format!(
                "exponents ({p_h}, {q_v}) must lie in [1, ∞]"
            )));
        }
        if weight_power > 1 {
            return Err(AnsError::InvalidNormSpec(format!(
                "weight power {weight_power} not in {{0, 1}}"
            )));
        }
        if deriv.total() > 2 {
            return Err(AnsError::InvalidNormSpec(format!(
                "derivative order {} exceeds 2",
                deriv.total()
            )));
        }
        Ok(NormSpec {
            p_h,
            q_v,
            weight_power,
            deriv,
        })
    }

    /// Plain Lᵖ norm: p = q, no weight, no derivative.
    pub fn lp(p: f64) -> Result<Self> {
        Self::new(p, p, 0, DerivOrders::none())
    }

    /// Mixed norm without weight or derivative.
    pub fn mixed(p_h: f64, q_v: f64) -> Result<Self> {
        Self::new(p_h, q_v, 0, DerivOrders::none())
    }
}

/// Mixed/weighted norm of a physical-representation field.
pub fn norm(field: &ScalarField, spec: &NormSpec) -> Result<f64> {
    if field.physical().is_err() {
        return Err(AnsError::RepresentationMismatch {
            expected: "physical",
            found: "spectral",
        });
    }
    let differentiated;
    let work = if spec.deriv.total() > 0 {
        differentiated = derivative(field, spec.deriv)?;
        &differentiated
    } else {
        field
    };
    let grid = work.grid().clone();
    let data = work.physical()?;
    let dxv = grid.dx_v();
    let dxh2 = grid.dx_h() * grid.dx_h();
    let (n1, n2, _n3) = grid.shape();

    let mut outer_max = 0.0f64;
    let mut outer_sum = 0.0f64;
    for i in 0..n1 {
        for j in 0..n2 {
            let weight = if spec.weight_power == 1 {
                grid.coord(Axis::X1, i).hypot(grid.coord(Axis::X2, j))
            } else {
                1.0
            };
            let lane = data.slice(ndarray::s![i, j, ..]);
            let inner = if spec.q_v == f64::INFINITY {
                lane.iter().fold(0.0f64, |m, v| m.max(v.abs())) * weight
            } else {
                let s: f64 = lane.iter().map(|v| v.abs().powf(spec.q_v)).sum();
                (s * dxv).powf(1.0 / spec.q_v) * weight
            };
            if spec.p_h == f64::INFINITY {
                outer_max = outer_max.max(inner);
            } else {
                outer_sum += inner.powf(spec.p_h);
            }
        }
    }
    if spec.p_h == f64::INFINITY {
        Ok(outer_max)
    } else {
        Ok((outer_sum * dxh2).powf(1.0 / spec.p_h))
    }
}

/// Plain Lᵖ norm of a physical field.
pub fn lp_norm(field: &ScalarField, p: f64) -> Result<f64> {
    norm(field, &NormSpec::lp(p)?)
}

/// Sobolev Hˢ norm by Parseval: `√(Σ (1+|ξ|²)ˢ |û|² / V_box)`.
pub fn hs_norm(field: &ScalarField, s: usize) -> Result<f64> {
    if s > 9 {
        return Err(AnsError::SobolevIndex(s));
    }
    let spec_field = field.spectral_owned()?;
    let grid = spec_field.grid().clone();
    let data = spec_field.spectral()?;
    let scale = 1.0 / grid.box_volume();
    let mut sum = 0.0f64;
    for ((i, j, k), v) in data.indexed_iter() {
        let k1 = grid.wavenumber(Axis::X1, i);
        let k2 = grid.wavenumber(Axis::X2, j);
        let k3 = grid.wavenumber(Axis::X3, k);
        let ksq = k1 * k1 + k2 * k2 + k3 * k3;
        sum += (1.0 + ksq).powi(s as i32) * v.norm_sqr();
    }
    Ok((sum * scale).sqrt())
}

/// `Σ (1+|ξ|²)^σ |ξ_h|² |û|² / V_box`: squared Hᵠ norm of the horizontal
/// gradient, used by the solver's energy ledger.
pub fn hs_horizontal_gradient_sq(field: &ScalarField, s: usize) -> Result<f64> {
    if s > 9 {
        return Err(AnsError::SobolevIndex(s));
    }
    let spec_field = field.spectral_owned()?;
    let grid = spec_field.grid().clone();
    let data = spec_field.spectral()?;
    let scale = 1.0 / grid.box_volume();
    let mut sum = 0.0f64;
    for ((i, j, k), v) in data.indexed_iter() {
        let k1 = grid.wavenumber(Axis::X1, i);
        let k2 = grid.wavenumber(Axis::X2, j);
        let k3 = grid.wavenumber(Axis::X3, k);
        let khsq = k1 * k1 + k2 * k2;
        let ksq = khsq + k3 * k3;
        sum += (1.0 + ksq).powi(s as i32) * khsq * v.norm_sqr();
    }
    Ok(sum * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::gaussian::gh_value;
    use crate::grid::Grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn mixed_norm_of_gaussian_times_profile() {
        // ‖G_h(1,x_h)·g(x₃)‖_{L¹_h L^∞_v} = ‖G_h‖_{L¹}·max|g| = max|g|.
        let grid = Grid::new(128, 8, 48.0, 4.0).unwrap();
        let lv = 4.0;
        let g = |z: f64| 1.5 + (2.0 * PI * z / lv).cos();
        let f = ScalarField::from_fn(&grid, |x1, x2, x3| gh_value(1.0, x1.hypot(x2)) * g(x3));
        let val = norm(&f, &NormSpec::mixed(1.0, f64::INFINITY).unwrap()).unwrap();
        assert!((val - 2.5).abs() < 1e-6, "got {val}");
    }

    #[test]
    fn gaussian_l2_closed_form() {
        // ‖G_h(1)‖_{L²(ℝ²)} = (8π)^{−1/2}; realized as L²_h of a field
        // constant in x₃ through the (2, ∞) mixed norm.
        let grid = Grid::new(128, 4, 48.0, 1.0).unwrap();
        let f = ScalarField::from_fn(&grid, |x1, x2, _| gh_value(1.0, x1.hypot(x2)));
        let val = norm(&f, &NormSpec::mixed(2.0, f64::INFINITY).unwrap()).unwrap();
        let expected = (8.0 * PI).powf(-0.5);
        assert!((val - expected).abs() < 1e-6, "got {val}, want {expected}");
    }

    #[test]
    fn parseval_matches_physical_l2() {
        let grid = Grid::new(16, 8, 5.0, 3.0).unwrap();
        let f = ScalarField::from_fn(&grid, |x1, x2, x3| {
            (2.0 * PI * x1 / 5.0).sin() + 0.3 * (2.0 * PI * (x2 + x3) / 5.0).cos()
        });
        let l2 = lp_norm(&f, 2.0).unwrap();
        let h0 = hs_norm(&f, 0).unwrap();
        assert!((l2 - h0).abs() < 1e-10 * l2);
    }

    #[test]
    fn hs_norm_single_mode() {
        let tau = 2.0 * PI;
        let grid = Grid::new(8, 8, tau, tau).unwrap();
        let f = ScalarField::from_fn(&grid, |x1, _, _| x1.cos());
        let h0 = hs_norm(&f, 0).unwrap();
        let expected = (tau.powi(3) / 2.0).sqrt();
        assert!((h0 - expected).abs() < 1e-10 * expected);
        let h1 = hs_norm(&f, 1).unwrap();
        assert!((h1 - 2.0f64.sqrt() * h0).abs() < 1e-10 * h1);
        let zero = ScalarField::zeros_physical(&grid);
        assert_eq!(hs_norm(&zero, 0).unwrap(), 0.0);
    }

    #[test]
    fn mixed_equals_plain_lp_when_exponents_agree() {
        let grid = Grid::new(12, 8, 3.0, 2.0).unwrap();
        let f = ScalarField::from_fn(&grid, |x1, x2, x3| (x1 + 0.5 * x2 - x3).sin() + 0.25);
        for p in [1.0, 2.0, 3.5] {
            let plain = lp_norm(&f, p).unwrap();
            let mixed = norm(&f, &NormSpec::mixed(p, p).unwrap()).unwrap();
            assert!((plain - mixed).abs() < 1e-12 * plain.max(1.0));
        }
    }

    #[test]
    fn rejects_bad_specs_and_representations() {
        assert!(NormSpec::lp(0.5).is_err());
        assert!(NormSpec::new(2.0, 2.0, 2, DerivOrders::none()).is_err());
        assert!(NormSpec::new(2.0, 2.0, 0, DerivOrders::new(2, 1, 0)).is_err());
        let small = Grid::new(8, 8, 1.0, 1.0).unwrap();
        assert!(hs_norm(&ScalarField::zeros_physical(&small), 10).is_err());
        let spectral = ScalarField::zeros_spectral(&small);
        assert!(norm(&spectral, &NormSpec::lp(2.0).unwrap()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn hoelder_interpolation(seed in any::<u64>(), p in 1.0f64..8.0) {
            // ‖f‖_p ≤ ‖f‖_1^{1/p} ‖f‖_∞^{1−1/p}
            let grid = Grid::new(8, 8, 2.0, 2.0).unwrap();
            let mut state = seed | 1;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let mut data = ndarray::Array3::zeros(grid.shape());
            for v in data.iter_mut() { *v = next(); }
            let f = ScalarField::from_physical(&grid, data).unwrap();
            let n1 = lp_norm(&f, 1.0).unwrap();
            let ninf = lp_norm(&f, f64::INFINITY).unwrap();
            let np = lp_norm(&f, p).unwrap();
            prop_assert!(np <= n1.powf(1.0 / p) * ninf.powf(1.0 - 1.0 / p) * (1.0 + 1e-12));
        }
    }
}
