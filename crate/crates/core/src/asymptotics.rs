//! Large-time profiles, remainder series and decay-rate fitting.
//!
//! The leading profile of the horizontal components is
//! `G_h(t,x_h)·∫u_{0,h}dy_h − G_h(t,x_h)·∫₀^∞∫∂₃(u₃u_h)dy_h dτ`; the
//! vertical component is led by `G_h(t,x_h)·∫u_{0,3}dy_h` with second
//! order `−∇_hG_h·∫y_h u_{0,3}dy_h + ∇_hG_h·∫₀^∞∫(u₃u_h)dy_h dτ`.
//! This module computes the per-height horizontal integrals, assembles
//! the tensor-product profiles, subtracts them from stored snapshots and
//! fits power-law exponents in log–log.

use crate::field::{ScalarField, VelocityField};
use crate::gaussian::gh_value;
use crate::grid::{Axis, Grid};
use crate::norms::{lp_norm, norm, NormSpec};
use crate::operators::{dealiased_products, heat_semigroup, product_index, DerivOrders};
use crate::store::SnapshotStore;
use crate::{AnsError, Result};
use ndarray::Array3;
use num_complex::Complex64;
use std::sync::Arc;

/// Samples over `x₃` of a per-height horizontal integral.
#[derive(Debug, Clone)]
pub struct VerticalProfile {
    pub values: Vec<f64>,
    pub provenance: String,
}

impl VerticalProfile {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Riemann `L¹` norm along `x₃`.
    pub fn l1(&self, grid: &Grid) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * grid.dx_v()
    }
}

/// `(t, value)` samples of a decaying quantity.
#[derive(Debug, Clone)]
pub struct DecaySeries {
    label: String,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl DecaySeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(AnsError::BadSeries("times/values length mismatch".into()));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(AnsError::BadSeries("times must increase strictly".into()));
        }
        if !times.iter().chain(values.iter()).all(|v| v.is_finite()) {
            return Err(AnsError::BadSeries("non-finite entry".into()));
        }
        Ok(DecaySeries {
            label: label.into(),
            times,
            values,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// New series with values multiplied by `t^exponent`.
    pub fn scaled_by_power(&self, exponent: f64) -> DecaySeries {
        DecaySeries {
            label: format!("{}_scaled", self.label),
            times: self.times.clone(),
            values: self
                .times
                .iter()
                .zip(&self.values)
                .map(|(t, v)| v * t.powf(exponent))
                .collect(),
        }
    }

    pub fn restricted(&self, window: (f64, f64)) -> DecaySeries {
        let pairs: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= window.0 && **t <= window.1)
            .map(|(t, v)| (*t, *v))
            .collect();
        DecaySeries {
            label: self.label.clone(),
            times: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// Least-squares power-law fit in log–log coordinates.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub n_samples: usize,
}

/// Fit `log v = intercept + slope·log t` over the samples inside `window`.
pub fn fit_rate(series: &DecaySeries, window: (f64, f64)) -> Result<RateFit> {
    let restricted = series.restricted(window);
    let n = restricted.times.len();
    if n < 5 {
        return Err(AnsError::BadSeries(format!(
            "{}: {n} samples in window, need ≥ 5",
            series.label
        )));
    }
    if restricted.values.iter().any(|&v| v <= 0.0) {
        return Err(AnsError::BadSeries(format!(
            "{}: nonpositive values cannot be fitted in log–log",
            series.label
        )));
    }
    let xs: Vec<f64> = restricted.times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = restricted.values.iter().map(|v| v.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n as f64;
    let ybar = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    if sxx == 0.0 {
        return Err(AnsError::BadSeries("degenerate time window".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residual_rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual_rms,
        n_samples: n,
    })
}

/// Per-height horizontal integral `∫ f(y_h, x₃) dy_h` by Riemann sum.
pub fn horizontal_mass(field: &ScalarField) -> Result<VerticalProfile> {
    let grid = field.grid().clone();
    let data = field.physical()?;
    let w = grid.dx_h() * grid.dx_h();
    let mut values = vec![0.0f64; grid.n_v];
    for ((_, _, k), v) in data.indexed_iter() {
        values[k] += v;
    }
    for v in &mut values {
        *v *= w;
    }
    Ok(VerticalProfile {
        values,
        provenance: "horizontal mass".into(),
    })
}

/// Per-height first moments `(∫y₁f dy_h, ∫y₂f dy_h)`, coordinates
/// measured from the box center.
pub fn horizontal_first_moment(field: &ScalarField) -> Result<(VerticalProfile, VerticalProfile)> {
    let grid = field.grid().clone();
    let data = field.physical()?;
    let w = grid.dx_h() * grid.dx_h();
    let mut m1 = vec![0.0f64; grid.n_v];
    let mut m2 = vec![0.0f64; grid.n_v];
    for ((i, j, k), v) in data.indexed_iter() {
        m1[k] += grid.coord(Axis::X1, i) * v;
        m2[k] += grid.coord(Axis::X2, j) * v;
    }
    for v in m1.iter_mut().chain(m2.iter_mut()) {
        *v *= w;
    }
    Ok((
        VerticalProfile {
            values: m1,
            provenance: "first moment y1".into(),
        },
        VerticalProfile {
            values: m2,
            provenance: "first moment y2".into(),
        },
    ))
}

/// Which time-integrated flux profile to accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionKind {
    /// `∫₀^∞ ∫ ∂₃(u₃ u_h) dy_h dτ` (leading-order horizontal correction).
    HorizontalFlux,
    /// `∫₀^∞ ∫ (u₃ u_h) dy_h dτ` (second-order vertical correction).
    VerticalFlux,
}

/// Time-integrated nonlinear correction profiles with a self-fitted
/// truncation-tail estimate.
#[derive(Debug, Clone)]
pub struct CorrectionProfiles {
    pub components: [VerticalProfile; 2],
    /// Estimated absolute size of the neglected `∫_{T_max}^∞` tail.
    pub tail_estimate: f64,
    /// `max_{x₃}|integrand|` per snapshot time (for the tail fit).
    pub integrand_decay: DecaySeries,
    /// Whether the integrand's late-time decay was fit cleanly.
    pub tail_fit_ok: bool,
    pub tail_fit_slope: Option<f64>,
}

/// Horizontal integral of the product flux at one snapshot, per
/// horizontal component: a vertical profile of length `n_v`.
fn flux_profiles(
    grid: &Arc<Grid>,
    products: &[Array3<Complex64>; 6],
    kind: CorrectionKind,
) -> [Vec<f64>; 2] {
    let n_v = grid.n_v;
    let mut out = [vec![0.0f64; n_v], vec![0.0f64; n_v]];
    let k3d = grid.wavenumbers_deriv(Axis::X3).to_vec();
    for (j, out_j) in out.iter_mut().enumerate() {
        let lane: Vec<Complex64> = (0..n_v)
            .map(|k| products[product_index(2, j)][(0, 0, k)])
            .collect();
        // g(x₃ index n) = (1/L_v) Σ_m lane_m (iξ₃)^{0|1} e^{2πi mn/n_v}
        for (n, g) in out_j.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, lm) in lane.iter().enumerate() {
                let factor = match kind {
                    CorrectionKind::HorizontalFlux => Complex64::new(0.0, k3d[m]),
                    CorrectionKind::VerticalFlux => Complex64::new(1.0, 0.0),
                };
                let phase = 2.0 * std::f64::consts::PI * (m * n) as f64 / n_v as f64;
                acc += factor * lm * Complex64::new(phase.cos(), phase.sin());
            }
            *g = acc.re / grid.l_v;
        }
    }
    out
}

/// Trapezoid-in-τ accumulation of the flux profiles over the whole store,
/// with a `C·T_max^{−1/2}`-type tail estimated from the integrand's own
/// late-time decay.
pub fn nonlinear_correction(store: &SnapshotStore, kind: CorrectionKind) -> Result<CorrectionProfiles> {
    if store.len() < 3 {
        return Err(AnsError::StoreTooCoarse(
            "need at least 3 snapshots for the correction integral".into(),
        ));
    }
    let grid = store.grid().clone();
    let times = store.times().to_vec();
    let n_v = grid.n_v;
    let mut acc = [vec![0.0f64; n_v], vec![0.0f64; n_v]];
    let mut sup_series = Vec::with_capacity(times.len());
    let mut prev: Option<[Vec<f64>; 2]> = None;
    for idx in 0..store.len() {
        let spec = store.snapshot(idx).to_spectral()?;
        let comps = [
            spec.components[0].spectral()?,
            spec.components[1].spectral()?,
            spec.components[2].spectral()?,
        ];
        let (products, _) =
            crate::operators::dealiased_products_with_max(spec.grid(), comps)?;
        let g = flux_profiles(&grid, &products, kind);
        let sup = g[0]
            .iter()
            .zip(&g[1])
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0f64, f64::max);
        sup_series.push(sup);
        if let Some(prev_g) = &prev {
            let dt = times[idx] - times[idx - 1];
            for j in 0..2 {
                for k in 0..n_v {
                    acc[j][k] += 0.5 * dt * (prev_g[j][k] + g[j][k]);
                }
            }
        }
        prev = Some(g);
    }
    // Tail model a·τ^s fitted over the last decade of positive samples.
    let t_max = *times.last().unwrap();
    let series = DecaySeries::new(
        match kind {
            CorrectionKind::HorizontalFlux => "flux_d3_u3uh_sup",
            CorrectionKind::VerticalFlux => "flux_u3uh_sup",
        },
        times.iter().copied().skip(1).collect(),
        sup_series.iter().copied().skip(1).collect(),
    )?;
    let fit = fit_rate(&series, (t_max / 10.0, t_max));
    let (tail_estimate, tail_fit_ok, tail_fit_slope) = match fit {
        Ok(f) if f.slope < -1.0 => {
            let a = f.intercept.exp();
            let tail = a * t_max.powf(f.slope + 1.0) / (-f.slope - 1.0);
            (tail, f.residual_rms < 0.5, Some(f.slope))
        }
        Ok(f) => (f64::INFINITY, false, Some(f.slope)),
        Err(_) => (0.0, sup_series.iter().all(|&s| s == 0.0), None),
    };
    Ok(CorrectionProfiles {
        components: [
            VerticalProfile {
                values: acc[0].clone(),
                provenance: format!("{kind:?} component 1"),
            },
            VerticalProfile {
                values: acc[1].clone(),
                provenance: format!("{kind:?} component 2"),
            },
        ],
        tail_estimate,
        integrand_decay: series,
        tail_fit_ok,
        tail_fit_slope,
    })
}

/// Which asymptotic expansion a remainder series subtracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionId {
    /// `u_h − G_h⊗∫u_{0,h} + G_h⊗∫∫∂₃(u₃u_h)`, scaled by `t^{1−1/p}`.
    UhLeading,
    /// `u₃ − G_h⊗∫u_{0,3}`, scaled by `t^{(3/2)(1−1/p)}`.
    U3Leading,
    /// `u₃ − G_h⊗∫u_{0,3} + ∇_hG_h·∫y_h u_{0,3} − ∇_hG_h·∫∫u₃u_h`,
    /// scaled by `t^{(3/2)(1−1/p)+1/(2p)}`.
    U3SecondOrder,
    /// Linear-only: `e^{tΔ_h}u₀` minus its order-m Gaussian expansion,
    /// per-component magnitude, scaled by `t^{(1−1/p)+m/2}`.
    LinearLeading { m: u8 },
    /// Linear-only enhanced dissipation: `e^{tΔ_h}u_{0,3}` minus its
    /// order-m expansion, scaled by `t^{(3/2)(1−1/p)+m/2}`.
    LinearVertical { m: u8 },
}

impl ExpansionId {
    pub fn scale_exponent(&self, p: f64) -> f64 {
        let inv_p = if p == f64::INFINITY { 0.0 } else { 1.0 / p };
        match self {
            ExpansionId::UhLeading => 1.0 - inv_p,
            ExpansionId::U3Leading => 1.5 * (1.0 - inv_p),
            ExpansionId::U3SecondOrder => 1.5 * (1.0 - inv_p) + 0.5 * inv_p,
            ExpansionId::LinearLeading { m } => (1.0 - inv_p) + *m as f64 / 2.0,
            ExpansionId::LinearVertical { m } => 1.5 * (1.0 - inv_p) + *m as f64 / 2.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ExpansionId::UhLeading => "uh_leading".into(),
            ExpansionId::U3Leading => "u3_leading".into(),
            ExpansionId::U3SecondOrder => "u3_second_order".into(),
            ExpansionId::LinearLeading { m } => format!("linear_leading_m{m}"),
            ExpansionId::LinearVertical { m } => format!("linear_vertical_m{m}"),
        }
    }
}

/// `G_h(t)` (or a first derivative) tensored with a vertical profile.
fn gaussian_tensor_field(
    grid: &Arc<Grid>,
    t: f64,
    deriv_axis: Option<Axis>,
    profile: &VerticalProfile,
) -> Array3<f64> {
    let (n1, n2, n3) = grid.shape();
    let mut horizontal = ndarray::Array2::<f64>::zeros((n1, n2));
    for i in 0..n1 {
        for j in 0..n2 {
            let x1 = grid.coord(Axis::X1, i);
            let x2 = grid.coord(Axis::X2, j);
            let g = gh_value(t, x1.hypot(x2));
            horizontal[(i, j)] = match deriv_axis {
                None => g,
                Some(Axis::X1) => -x1 / (2.0 * t) * g,
                Some(Axis::X2) => -x2 / (2.0 * t) * g,
                Some(Axis::X3) => unreachable!("vertical Gaussian derivative unused"),
            };
        }
    }
    let mut out = Array3::zeros((n1, n2, n3));
    for ((i, j, k), v) in out.indexed_iter_mut() {
        *v = horizontal[(i, j)] * profile.values[k];
    }
    out
}

/// Remainder series of an asymptotic expansion over the snapshot times in
/// `window` (intersected with the validity window): returns the unscaled
/// and the theorem-scaled series.
pub fn remainder_series(
    store: &SnapshotStore,
    expansion: ExpansionId,
    p: f64,
    window: (f64, f64),
) -> Result<(DecaySeries, DecaySeries)> {
    let grid = store.grid().clone();
    let t_valid = grid.validity_window();
    let u0 = store.snapshot(0);

    let mass = |c: usize| -> Result<VerticalProfile> { horizontal_mass(&u0.components[c]) };
    let needs_linear = matches!(
        expansion,
        ExpansionId::LinearLeading { .. } | ExpansionId::LinearVertical { .. }
    );

    // Profiles shared across times.
    let mass_h = [mass(0)?, mass(1)?];
    let mass_3 = mass(2)?;
    let moment_3 = horizontal_first_moment(&u0.components[2])?;
    let correction = match expansion {
        ExpansionId::UhLeading => Some(nonlinear_correction(store, CorrectionKind::HorizontalFlux)?),
        ExpansionId::U3SecondOrder => {
            Some(nonlinear_correction(store, CorrectionKind::VerticalFlux)?)
        }
        _ => None,
    };

    let mut ts = Vec::new();
    let mut values = Vec::new();
    for (idx, &t) in store.times().iter().enumerate() {
        if t <= 0.0 || t < window.0 || t > window.1 || t > t_valid {
            continue;
        }
        let u_t = if needs_linear {
            // The expansion targets the pure semigroup evolution.
            let mut comps = Vec::with_capacity(3);
            for c in 0..3 {
                comps.push(heat_semigroup(&u0.components[c], t)?);
            }
            VelocityField::new([comps.remove(0), comps.remove(0), comps.remove(0)])?
        } else {
            store.snapshot(idx).clone()
        };
        let value = match expansion {
            ExpansionId::UhLeading => {
                let corr = correction.as_ref().unwrap();
                let mut mags = Vec::with_capacity(2);
                for j in 0..2 {
                    let mut r = u_t.components[j].physical()?.clone();
                    let lead = gaussian_tensor_field(&grid, t, None, &mass_h[j]);
                    let fix = gaussian_tensor_field(&grid, t, None, &corr.components[j]);
                    ndarray::Zip::from(&mut r).and(&lead).and(&fix).for_each(|r, l, f| {
                        *r = *r - l + f;
                    });
                    mags.push(r);
                }
                let mag = ndarray::Zip::from(&mags[0])
                    .and(&mags[1])
                    .map_collect(|a, b| a.hypot(*b));
                lp_norm(&ScalarField::from_physical(&grid, mag)?, p)?
            }
            ExpansionId::U3Leading => {
                let mut r = u_t.components[2].physical()?.clone();
                let lead = gaussian_tensor_field(&grid, t, None, &mass_3);
                ndarray::Zip::from(&mut r).and(&lead).for_each(|r, l| *r -= l);
                lp_norm(&ScalarField::from_physical(&grid, r)?, p)?
            }
            ExpansionId::U3SecondOrder => {
                let corr = correction.as_ref().unwrap();
                let mut r = u_t.components[2].physical()?.clone();
                let lead = gaussian_tensor_field(&grid, t, None, &mass_3);
                let m1 = gaussian_tensor_field(&grid, t, Some(Axis::X1), &moment_3.0);
                let m2 = gaussian_tensor_field(&grid, t, Some(Axis::X2), &moment_3.1);
                let c1 = gaussian_tensor_field(&grid, t, Some(Axis::X1), &corr.components[0]);
                let c2 = gaussian_tensor_field(&grid, t, Some(Axis::X2), &corr.components[1]);
                ndarray::Zip::indexed(&mut r).for_each(|(i, j, k), r| {
                    *r = *r - lead[(i, j, k)] + m1[(i, j, k)] + m2[(i, j, k)]
                        - c1[(i, j, k)]
                        - c2[(i, j, k)];
                });
                lp_norm(&ScalarField::from_physical(&grid, r)?, p)?
            }
            ExpansionId::LinearLeading { m } => {
                let mut mags: Vec<Array3<f64>> = Vec::with_capacity(3);
                for c in 0..3 {
                    let mut r = u_t.components[c].physical()?.clone();
                    let mass_c = horizontal_mass(&u0.components[c])?;
                    let lead = gaussian_tensor_field(&grid, t, None, &mass_c);
                    ndarray::Zip::from(&mut r).and(&lead).for_each(|r, l| *r -= l);
                    if m >= 1 {
                        // Σ_{|α_h|=1} ∇^α G ⊗ ∫(−y)^α f: subtract
                        // −∂₁G⊗∫y₁f − ∂₂G⊗∫y₂f.
                        let mom = horizontal_first_moment(&u0.components[c])?;
                        let g1 = gaussian_tensor_field(&grid, t, Some(Axis::X1), &mom.0);
                        let g2 = gaussian_tensor_field(&grid, t, Some(Axis::X2), &mom.1);
                        ndarray::Zip::from(&mut r).and(&g1).and(&g2).for_each(|r, a, b| {
                            *r += a + b;
                        });
                    }
                    mags.push(r);
                }
                let mag = ndarray::Zip::from(&mags[0])
                    .and(&mags[1])
                    .and(&mags[2])
                    .map_collect(|a, b, c| (a * a + b * b + c * c).sqrt());
                lp_norm(&ScalarField::from_physical(&grid, mag)?, p)?
            }
            ExpansionId::LinearVertical { m } => {
                let mut r = u_t.components[2].physical()?.clone();
                let lead = gaussian_tensor_field(&grid, t, None, &mass_3);
                ndarray::Zip::from(&mut r).and(&lead).for_each(|r, l| *r -= l);
                if m >= 1 {
                    let g1 = gaussian_tensor_field(&grid, t, Some(Axis::X1), &moment_3.0);
                    let g2 = gaussian_tensor_field(&grid, t, Some(Axis::X2), &moment_3.1);
                    ndarray::Zip::from(&mut r).and(&g1).and(&g2).for_each(|r, a, b| {
                        *r += a + b;
                    });
                }
                lp_norm(&ScalarField::from_physical(&grid, r)?, p)?
            }
        };
        ts.push(t);
        values.push(value);
    }
    if ts.is_empty() {
        return Err(AnsError::BadSeries(format!(
            "no usable snapshot times in [{}, {}]",
            window.0, window.1
        )));
    }
    let label = format!("{}_p{}", expansion.label(), p);
    let unscaled = DecaySeries::new(label, ts, values)?;
    let scaled = unscaled.scaled_by_power(expansion.scale_exponent(p));
    Ok((unscaled, scaled))
}

/// The mixed/weighted diagnostic series of the measured solution plus the
/// linear enhanced-dissipation norms of the initial data.
pub fn diagnostic_norms(store: &SnapshotStore, window: (f64, f64)) -> Result<Vec<DecaySeries>> {
    let grid = store.grid().clone();
    let t_valid = grid.validity_window();
    let u0 = store.snapshot(0);
    let mut ts = Vec::new();
    let mut v_inf_l1 = Vec::new();
    let mut v_w_uh = Vec::new();
    let mut v_w_u3 = Vec::new();
    let mut v_lin_l2 = Vec::new();
    let mut v_lin_inf = Vec::new();
    let spec_inf_l1 = NormSpec::mixed(f64::INFINITY, 1.0)?;
    let spec_w = NormSpec::new(1.0, f64::INFINITY, 1, DerivOrders::none())?;
    for (idx, &t) in store.times().iter().enumerate() {
        if t <= 0.0 || t < window.0 || t > window.1 || t > t_valid {
            continue;
        }
        let u_t = store.snapshot(idx);
        ts.push(t);
        v_inf_l1.push(norm(&u_t.magnitude()?, &spec_inf_l1)?);
        v_w_uh.push(norm(&u_t.horizontal_magnitude()?, &spec_w)?);
        v_w_u3.push(norm(&u_t.components[2], &spec_w)?);
        let lin3 = heat_semigroup(&u0.components[2], t)?;
        v_lin_l2.push(lp_norm(&lin3, 2.0)?);
        v_lin_inf.push(lp_norm(&lin3, f64::INFINITY)?);
    }
    Ok(vec![
        DecaySeries::new("u_LinfhL1v", ts.clone(), v_inf_l1)?,
        DecaySeries::new("xh_uh_L1hLinfv", ts.clone(), v_w_uh)?,
        DecaySeries::new("xh_u3_L1hLinfv", ts.clone(), v_w_u3)?,
        DecaySeries::new("linear_u3_L2", ts.clone(), v_lin_l2)?,
        DecaySeries::new("linear_u3_Linf", ts, v_lin_inf)?,
    ])
}

/// Discrete check of the divergence-free structural identities: the
/// vertical derivative of the mass profile of `u₃` must vanish, and
/// `∫y_k ∂₃u₃ dy_h = ∫u_k dy_h`.
pub fn structural_identity_errors(u: &VelocityField) -> Result<(f64, f64)> {
    let grid = u.grid().clone();
    let mass3 = horizontal_mass(&u.components[2])?;
    // Spectral ∂₃ of the profile via its discrete line transform.
    let n = grid.n_v;
    let mut d_mass = vec![0.0f64; n];
    let k3d = grid.wavenumbers_deriv(Axis::X3).to_vec();
    for (out_idx, dm) in d_mass.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..n {
            // forward then inverse 1D transform with iξ₃ applied
            let mut coeff = Complex64::new(0.0, 0.0);
            for (src_idx, val) in mass3.values.iter().enumerate() {
                let ph = -2.0 * std::f64::consts::PI * (m * src_idx) as f64 / n as f64;
                coeff += val * Complex64::new(ph.cos(), ph.sin());
            }
            let ph = 2.0 * std::f64::consts::PI * (m * out_idx) as f64 / n as f64;
            acc += Complex64::new(0.0, k3d[m]) * coeff * Complex64::new(ph.cos(), ph.sin());
        }
        *dm = acc.re / n as f64;
    }
    let scale3 = mass3.max_abs().max(u.components[2].max_abs());
    let zero1_err = d_mass.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale3.max(1e-300);

    // (zero3): ∫y_k ∂₃u₃ dy_h = ∫u_k dy_h for k = 1, 2.
    let du3 = crate::operators::derivative(&u.components[2], DerivOrders::new(0, 0, 1))?;
    let (m1, m2) = horizontal_first_moment(&du3)?;
    let mh1 = horizontal_mass(&u.components[0])?;
    let mh2 = horizontal_mass(&u.components[1])?;
    let mut zero3_err = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..grid.n_v {
        zero3_err = zero3_err
            .max((m1.values[k] - mh1.values[k]).abs())
            .max((m2.values[k] - mh2.values[k]).abs());
        scale = scale
            .max(mh1.values[k].abs())
            .max(mh2.values[k].abs())
            .max(m1.values[k].abs());
    }
    Ok((zero1_err, zero3_err / scale.max(1e-300)))
}

/// Keep clippy quiet about the helper only used in tests of this module.
#[allow(dead_code)]
fn products_of(u: &VelocityField) -> Result<[Array3<Complex64>; 6]> {
    dealiased_products(u)
}
