//! Linear operators as spectral multipliers: spectral derivatives, the
//! horizontal heat semigroup, the Helmholtz projection, the anisotropic
//! pressure-kernel family `∇_h^β(−Δ_h)^{γ/2}K(t)` and its `sgn(x₃)`-twisted
//! variants, two-thirds dealiasing and pressure recovery.
//!
//! Derivative multipliers follow a parity rule: an odd total order along an
//! axis evaluates `(iξ)^a` on the derivative lattice (Nyquist zeroed) so
//! real fields stay real; even orders use the true lattice. The twisted
//! kernels are reduced to plain multipliers through
//! `sgn(x₃)(−Δ_h)^{1/2}K = −∂₃K`, which makes every operator here a pure
//! 3D multiplier.

use crate::field::{Representation, ScalarField, VelocityField};
use crate::grid::{Axis, Grid};
use crate::{AnsError, Result};
use ndarray::Array3;
use num_complex::Complex64;
use std::sync::Arc;

/// Aggregated derivative orders per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DerivOrders {
    pub a1: u32,
    pub a2: u32,
    pub a3: u32,
}

impl DerivOrders {
    pub fn new(a1: u32, a2: u32, a3: u32) -> Self {
        DerivOrders { a1, a2, a3 }
    }

    pub fn none() -> Self {
        DerivOrders::default()
    }

    pub fn total(&self) -> u32 {
        self.a1 + self.a2 + self.a3
    }

    pub fn axis_order(&self, axis: Axis) -> u32 {
        match axis {
            Axis::X1 => self.a1,
            Axis::X2 => self.a2,
            Axis::X3 => self.a3,
        }
    }
}

/// `(iξ)^a` with the parity rule applied.
pub fn deriv_factor(k_true: f64, k_deriv: f64, order: u32) -> Complex64 {
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let k = if order % 2 == 1 { k_deriv } else { k_true };
    let mag = k.powi(order as i32);
    match order % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Per-axis multiplier table for a derivative order.
fn axis_factors(grid: &Grid, axis: Axis, order: u32) -> Vec<Complex64> {
    grid.wavenumbers(axis)
        .iter()
        .zip(grid.wavenumbers_deriv(axis))
        .map(|(k, kd)| deriv_factor(*k, *kd, order))
        .collect()
}

fn map_spectral<F>(field: &ScalarField, f: F) -> Result<ScalarField>
where
    F: Fn(&Grid, &mut Array3<Complex64>),
{
    let started_physical = field.representation() == Representation::Physical;
    let mut work = field.spectral_owned()?;
    let grid = work.grid().clone();
    f(&grid, work.spectral_mut()?);
    if started_physical {
        work.to_physical()
    } else {
        Ok(work)
    }
}

/// Spectral derivative `∇^α f`, preserving the input representation.
pub fn derivative(field: &ScalarField, orders: DerivOrders) -> Result<ScalarField> {
    let grid = field.grid();
    let limit = (grid.n_h.min(grid.n_v)) as u32;
    if orders.total() >= limit {
        return Err(AnsError::DerivativeOrder {
            order: orders.total() as usize,
        });
    }
    map_spectral(field, |grid, data| {
        let f1 = axis_factors(grid, Axis::X1, orders.a1);
        let f2 = axis_factors(grid, Axis::X2, orders.a2);
        let f3 = axis_factors(grid, Axis::X3, orders.a3);
        for ((i, j, k), v) in data.indexed_iter_mut() {
            *v *= f1[i] * f2[j] * f3[k];
        }
    })
}

/// Horizontal heat semigroup `e^{tΔ_h}`: multiply by `e^{−t|ξ_h|²}`.
/// Modes with `ξ_h = 0` are unchanged. Preserves the representation.
pub fn heat_semigroup(field: &ScalarField, t: f64) -> Result<ScalarField> {
    if t < 0.0 {
        return Err(AnsError::NegativeTime(t));
    }
    map_spectral(field, |grid, data| {
        apply_heat_multiplier(grid, data, t);
    })
}

/// In-place `e^{−t|ξ_h|²}` sweep on spectral data.
pub(crate) fn apply_heat_multiplier(grid: &Grid, data: &mut Array3<Complex64>, t: f64) {
    let kh = grid.wavenumbers(Axis::X1);
    let n = grid.n_h;
    let mut damp = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            damp[i * n + j] = (-t * (kh[i] * kh[i] + kh[j] * kh[j])).exp();
        }
    }
    for ((i, j, _k), v) in data.indexed_iter_mut() {
        *v *= damp[i * n + j];
    }
}

/// `e^{tΔ_h}` applied to every component of a velocity field.
pub fn heat_semigroup_velocity(u: &VelocityField, t: f64) -> Result<VelocityField> {
    let mut out = VelocityField::new([
        heat_semigroup(&u.components[0], t)?,
        heat_semigroup(&u.components[1], t)?,
        heat_semigroup(&u.components[2], t)?,
    ])?;
    out.set_divergence_free(u.divergence_free());
    Ok(out)
}

/// Helmholtz (Leray) projection `û ↦ û − ξ(ξ·û)/|ξ|²`; the `ξ = 0` mode is
/// left unchanged. The output is certified divergence-free.
pub fn helmholtz_project(u: &VelocityField) -> Result<VelocityField> {
    let started_physical = u.representation() == Representation::Physical;
    let spec = u.to_spectral()?;
    let grid = spec.grid().clone();
    let mut c1 = spec.components[0].spectral()?.clone();
    let mut c2 = spec.components[1].spectral()?.clone();
    let mut c3 = spec.components[2].spectral()?.clone();
    project_spectral(&grid, &mut c1, &mut c2, &mut c3);
    let mut out = VelocityField::new([
        ScalarField::from_spectral(&grid, c1)?,
        ScalarField::from_spectral(&grid, c2)?,
        ScalarField::from_spectral(&grid, c3)?,
    ])?;
    out.set_divergence_free(true);
    if started_physical {
        out.to_physical()
    } else {
        Ok(out)
    }
}

pub(crate) fn project_spectral(
    grid: &Grid,
    c1: &mut Array3<Complex64>,
    c2: &mut Array3<Complex64>,
    c3: &mut Array3<Complex64>,
) {
    let k1s = grid.wavenumbers(Axis::X1);
    let k2s = grid.wavenumbers(Axis::X2);
    let k3s = grid.wavenumbers(Axis::X3);
    for ((i, j, k), v1) in c1.indexed_iter_mut() {
        let (k1, k2, k3) = (k1s[i], k2s[j], k3s[k]);
        let ksq = k1 * k1 + k2 * k2 + k3 * k3;
        if ksq == 0.0 {
            continue;
        }
        let v2 = &mut c2[(i, j, k)];
        let v3 = &mut c3[(i, j, k)];
        let dot = (k1 * *v1 + k2 * *v2 + k3 * *v3) / ksq;
        *v1 -= k1 * dot;
        *v2 -= k2 * dot;
        *v3 -= k3 * dot;
    }
}

/// Which time-independent kernel a multiplier is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    /// The anisotropic pressure kernel `K(t)`, symbol `e^{−t|ξ_h|²}/|ξ|²`.
    PressureKernel,
    /// The bare heat semigroup, symbol `e^{−t|ξ_h|²}`.
    Semigroup,
}

/// Specification of `∇^α ∇_h^β (−Δ_h)^{γ/2} K(t)` or its twisted variant
/// `sgn(x₃)·(same)` (`tilde`), as a spectral multiplier.
#[derive(Debug, Clone, Copy)]
pub struct KernelSymbolSpec {
    pub beta: [u32; 2],
    pub gamma: u32,
    pub tilde: bool,
    pub alpha: DerivOrders,
    pub t: f64,
}

impl KernelSymbolSpec {
    pub fn new(beta: [u32; 2], gamma: u32, tilde: bool, alpha: DerivOrders, t: f64) -> Result<Self> {
        if tilde && gamma % 2 == 0 {
            return Err(AnsError::InvalidKernelSpec(format!(
                "tilde kernels require odd γ, got γ = {gamma}"
            )));
        }
        if beta[0] + beta[1] + gamma > 4 {
            return Err(AnsError::InvalidKernelSpec(format!(
                "|β|+γ = {} beyond supported range 0..=4",
                beta[0] + beta[1] + gamma
            )));
        }
        if !(t > 0.0) {
            return Err(AnsError::NonPositiveTime(t));
        }
        Ok(KernelSymbolSpec {
            beta,
            gamma,
            tilde,
            alpha,
            t,
        })
    }

    /// Effective per-axis derivative orders after the tilde reduction
    /// (`sgn(x₃)(−Δ_h)^{γ/2}K = −∂₃(−Δ_h)^{(γ−1)/2}K`).
    pub fn effective_orders(&self) -> DerivOrders {
        DerivOrders::new(
            self.beta[0] + self.alpha.a1,
            self.beta[1] + self.alpha.a2,
            self.alpha.a3 + if self.tilde { 1 } else { 0 },
        )
    }

    /// Power of `|ξ_h|` remaining after the tilde reduction.
    pub fn effective_gamma(&self) -> u32 {
        if self.tilde {
            self.gamma - 1
        } else {
            self.gamma
        }
    }

    fn sign(&self) -> f64 {
        if self.tilde {
            -1.0
        } else {
            1.0
        }
    }
}

/// Kernel symbol at an arbitrary frequency `ξ ∈ ℝ³`; `ξ_deriv` supplies the
/// lattice values used by odd derivative orders (pass `ξ` itself for
/// continuum evaluation). The symbol at `ξ = 0` is `0`.
pub fn kernel_symbol_xi(spec: &KernelSymbolSpec, xi: [f64; 3], xi_deriv: [f64; 3]) -> Complex64 {
    let khsq = xi[0] * xi[0] + xi[1] * xi[1];
    let ksq = khsq + xi[2] * xi[2];
    if ksq == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let orders = spec.effective_orders();
    let mut val = Complex64::new(spec.sign(), 0.0);
    val *= deriv_factor(xi[0], xi_deriv[0], orders.a1);
    val *= deriv_factor(xi[1], xi_deriv[1], orders.a2);
    val *= deriv_factor(xi[2], xi_deriv[2], orders.a3);
    let gamma = spec.effective_gamma();
    if gamma > 0 {
        val *= khsq.sqrt().powi(gamma as i32);
    }
    val * (-spec.t * khsq).exp() / ksq
}

/// Kernel symbol at lattice index `(i, j, k)`.
pub fn kernel_symbol(spec: &KernelSymbolSpec, grid: &Grid, idx: (usize, usize, usize)) -> Complex64 {
    let xi = [
        grid.wavenumber(Axis::X1, idx.0),
        grid.wavenumber(Axis::X2, idx.1),
        grid.wavenumber(Axis::X3, idx.2),
    ];
    let xi_d = [
        grid.wavenumber_deriv(Axis::X1, idx.0),
        grid.wavenumber_deriv(Axis::X2, idx.1),
        grid.wavenumber_deriv(Axis::X3, idx.2),
    ];
    kernel_symbol_xi(spec, xi, xi_d)
}

/// Convolution with the kernel: spectral multiply by [`kernel_symbol`].
/// Preserves the representation; real input yields real output.
pub fn apply_kernel(spec: &KernelSymbolSpec, field: &ScalarField) -> Result<ScalarField> {
    map_spectral(field, |grid, data| {
        for ((i, j, k), v) in data.indexed_iter_mut() {
            *v *= kernel_symbol(spec, grid, (i, j, k));
        }
    })
}

/// Zero every mode outside the 2/3 band, in place.
pub(crate) fn dealias_spectral(grid: &Grid, data: &mut Array3<Complex64>) {
    for ((i, j, k), v) in data.indexed_iter_mut() {
        if !grid.keeps_mode(i, j, k) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
}

/// Two-thirds truncation of a field, preserving the representation.
pub fn dealias(field: &ScalarField) -> Result<ScalarField> {
    map_spectral(field, |grid, data| dealias_spectral(grid, data))
}

/// Dealiased pointwise products of spectral velocity components:
/// `T_{ab} = dealias(F[ũ_a ũ_b])` where `ũ` is the 2/3-truncated field.
/// Returned in the order `(1,1), (1,2), (1,3), (2,2), (2,3), (3,3)`,
/// together with `max|ũ|` (reused for CFL validation).
pub(crate) fn dealiased_products_with_max(
    grid: &Arc<Grid>,
    comps: [&Array3<Complex64>; 3],
) -> Result<([Array3<Complex64>; 6], f64)> {
    let grid_arc = grid.clone();
    let mut truncated_phys = Vec::with_capacity(3);
    let mut max_u = 0.0f64;
    for c in comps {
        let mut s = ScalarField::from_spectral(&grid_arc, (*c).clone())?;
        dealias_spectral(grid, s.spectral_mut()?);
        let phys = s.to_physical()?;
        max_u = max_u.max(phys.max_abs());
        truncated_phys.push(phys);
    }
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let mut out: Vec<Array3<Complex64>> = Vec::with_capacity(6);
    for (a, b) in pairs {
        let pa = truncated_phys[a].physical()?;
        let pb = truncated_phys[b].physical()?;
        let prod = ndarray::Zip::from(pa).and(pb).map_collect(|x, y| x * y);
        let f = ScalarField::from_physical(&grid_arc, prod)?;
        let mut fs = f.to_spectral()?;
        dealias_spectral(grid, fs.spectral_mut()?);
        out.push(fs.spectral()?.clone());
    }
    Ok((out.try_into().expect("exactly six products"), max_u))
}

/// [`dealiased_products_with_max`] for a velocity field, dropping the max.
pub(crate) fn dealiased_products(u: &VelocityField) -> Result<[Array3<Complex64>; 6]> {
    let spec = u.to_spectral()?;
    let comps = [
        spec.components[0].spectral()?,
        spec.components[1].spectral()?,
        spec.components[2].spectral()?,
    ];
    let (products, _) = dealiased_products_with_max(spec.grid(), comps)?;
    Ok(products)
}

pub(crate) fn product_index(a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        (2, 2) => 5,
        _ => unreachable!("component indices must be < 3"),
    }
}

/// Recover the pressure from a divergence-free velocity field:
/// `p̂ = Σ_{k,l} (iξ_k)(iξ_l) T̂_{kl} / |ξ|²` with zero-mean gauge, where
/// `T̂` are the dealiased quadratic products.
pub fn pressure_recover(u: &VelocityField) -> Result<ScalarField> {
    let rel = u.relative_divergence()?;
    if rel > 1e-8 {
        return Err(AnsError::NotSolenoidal(rel));
    }
    let grid = u.grid().clone();
    let products = dealiased_products(u)?;
    let mut p = Array3::<Complex64>::zeros(grid.shape());
    let k1s = grid.wavenumbers(Axis::X1);
    let k2s = grid.wavenumbers(Axis::X2);
    let k3s = grid.wavenumbers(Axis::X3);
    let k1d = grid.wavenumbers_deriv(Axis::X1);
    let k2d = grid.wavenumbers_deriv(Axis::X2);
    let k3d = grid.wavenumbers_deriv(Axis::X3);
    for ((i, j, k), v) in p.indexed_iter_mut() {
        let kt = [k1s[i], k2s[j], k3s[k]];
        let kd = [k1d[i], k2d[j], k3d[k]];
        let ksq = kt[0] * kt[0] + kt[1] * kt[1] + kt[2] * kt[2];
        if ksq == 0.0 {
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..3 {
            for b in 0..3 {
                let mut orders = [0u32; 3];
                orders[a] += 1;
                orders[b] += 1;
                let factor = deriv_factor(kt[0], kd[0], orders[0])
                    * deriv_factor(kt[1], kd[1], orders[1])
                    * deriv_factor(kt[2], kd[2], orders[2]);
                acc += factor * products[product_index(a, b)][(i, j, k)];
            }
        }
        *v = acc / ksq;
    }
    ScalarField::from_spectral(&grid, p)?.to_physical()
}

/// 2D/1D Gaussian selector for pointwise evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianKind {
    Horizontal2D,
    Vertical1D,
}

/// Evaluation request for `G_h(t, ·)` or `G_v(t, ·)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianSpec {
    pub kind: GaussianKind,
    pub t: f64,
}

impl GaussianSpec {
    pub fn new(kind: GaussianKind, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(AnsError::NonPositiveTime(t));
        }
        Ok(GaussianSpec { kind, t })
    }

    /// Evaluate at box-centered offsets: `x_h = (x₁, x₂)` for the 2D
    /// Gaussian (the third coordinate is ignored), `x₃` for the 1D one.
    pub fn eval(&self, points: &[[f64; 3]]) -> Vec<f64> {
        points
            .iter()
            .map(|p| match self.kind {
                GaussianKind::Horizontal2D => crate::gaussian::gh_value(self.t, p[0].hypot(p[1])),
                GaussianKind::Vertical1D => crate::gaussian::gv_value(self.t, p[2]),
            })
            .collect()
    }
}
