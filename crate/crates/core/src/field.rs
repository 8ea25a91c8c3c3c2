//! Scalar and vector fields on a [`Grid`], with physical and spectral
//! representations.
//!
//! Transform convention (fixed): the forward transform is the Riemann-sum
//! approximation of the continuous Fourier transform,
//! `û(ξ) = Σ_x f(x) e^{−iξ·x} · ΔV` with `x` measured from the box
//! center, and the inverse divides the unnormalized inverse DFT by the
//! box volume. Centering amounts to a `(−1)^{i+j+k}` sign on the raw DFT
//! output. Discrete coefficients of center-concentrated fields therefore
//! approximate the continuum transform directly, and no rescaling is
//! needed in norms, masses or profiles.
//!
//! The discrete divergence (and every odd-order derivative) acts through
//! the Nyquist-zeroed wavenumber lattice so that real fields stay real
//! and operators mixing components preserve conjugate symmetry.

use crate::fft;
use crate::grid::{Axis, Grid};
use crate::{AnsError, Result};
use ndarray::Array3;
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

impl Representation {
    fn name(self) -> &'static str {
        match self {
            Representation::Physical => "physical",
            Representation::Spectral => "spectral",
        }
    }
}

#[derive(Debug, Clone)]
enum Data {
    Physical(Array3<f64>),
    Spectral(Array3<Complex64>),
}

/// `(−1)^{i+j+k}`: shifts the DFT phase anchor to the box center.
fn center_signs(data: &mut Array3<Complex64>) {
    for ((i, j, k), v) in data.indexed_iter_mut() {
        if (i + j + k) % 2 == 1 {
            *v = -*v;
        }
    }
}

/// A scalar field sampled on the grid (physical) or expanded in Fourier
/// modes (spectral).
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    data: Data,
}

impl ScalarField {
    pub fn zeros_physical(grid: &Arc<Grid>) -> Self {
        ScalarField {
            grid: grid.clone(),
            data: Data::Physical(Array3::zeros(grid.shape())),
        }
    }

    pub fn zeros_spectral(grid: &Arc<Grid>) -> Self {
        ScalarField {
            grid: grid.clone(),
            data: Data::Spectral(Array3::zeros(grid.shape())),
        }
    }

    pub fn from_physical(grid: &Arc<Grid>, data: Array3<f64>) -> Result<Self> {
        if data.dim() != grid.shape() {
            return Err(AnsError::GridMismatch);
        }
        Ok(ScalarField {
            grid: grid.clone(),
            data: Data::Physical(data),
        })
    }

    pub fn from_spectral(grid: &Arc<Grid>, data: Array3<Complex64>) -> Result<Self> {
        if data.dim() != grid.shape() {
            return Err(AnsError::GridMismatch);
        }
        Ok(ScalarField {
            grid: grid.clone(),
            data: Data::Spectral(data),
        })
    }

    /// Sample `f(x₁, x₂, x₃)` at box-centered coordinates.
    pub fn from_fn<F: Fn(f64, f64, f64) -> f64>(grid: &Arc<Grid>, f: F) -> Self {
        let mut data = Array3::zeros(grid.shape());
        for ((i, j, k), v) in data.indexed_iter_mut() {
            *v = f(
                grid.coord(Axis::X1, i),
                grid.coord(Axis::X2, j),
                grid.coord(Axis::X3, k),
            );
        }
        ScalarField {
            grid: grid.clone(),
            data: Data::Physical(data),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        match &self.data {
            Data::Physical(_) => Representation::Physical,
            Data::Spectral(_) => Representation::Spectral,
        }
    }

    pub fn physical(&self) -> Result<&Array3<f64>> {
        match &self.data {
            Data::Physical(a) => Ok(a),
            Data::Spectral(_) => Err(AnsError::RepresentationMismatch {
                expected: "physical",
                found: "spectral",
            }),
        }
    }

    pub fn spectral(&self) -> Result<&Array3<Complex64>> {
        match &self.data {
            Data::Spectral(a) => Ok(a),
            Data::Physical(_) => Err(AnsError::RepresentationMismatch {
                expected: "spectral",
                found: "physical",
            }),
        }
    }

    pub fn spectral_mut(&mut self) -> Result<&mut Array3<Complex64>> {
        match &mut self.data {
            Data::Spectral(a) => Ok(a),
            Data::Physical(_) => Err(AnsError::RepresentationMismatch {
                expected: "spectral",
                found: "physical",
            }),
        }
    }

    /// Forward transform. Errors when the field is already spectral.
    pub fn to_spectral(&self) -> Result<ScalarField> {
        let phys = self.physical()?;
        let mut data = phys.mapv(|v| Complex64::new(v, 0.0));
        fft::forward(&mut data);
        let vol = self.grid.cell_volume();
        data.mapv_inplace(|c| c * vol);
        center_signs(&mut data);
        Ok(ScalarField {
            grid: self.grid.clone(),
            data: Data::Spectral(data),
        })
    }

    /// Inverse transform. Errors when the field is already physical.
    pub fn to_physical(&self) -> Result<ScalarField> {
        let spec = self.spectral()?;
        let mut work = spec.clone();
        center_signs(&mut work);
        fft::inverse(&mut work);
        let scale = 1.0 / self.grid.box_volume();
        let data = work.mapv(|c| c.re * scale);
        Ok(ScalarField {
            grid: self.grid.clone(),
            data: Data::Physical(data),
        })
    }

    /// Largest imaginary residue of the inverse transform, relative to the
    /// largest physical amplitude. Gauges loss of conjugate symmetry.
    pub fn imaginary_residue(&self) -> Result<f64> {
        let spec = self.spectral()?;
        let mut work = spec.clone();
        center_signs(&mut work);
        fft::inverse(&mut work);
        let max_re = work.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let max_im = work.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if max_re == 0.0 {
            Ok(max_im)
        } else {
            Ok(max_im / max_re)
        }
    }

    /// Ensure a spectral copy, transforming if needed.
    pub fn spectral_owned(&self) -> Result<ScalarField> {
        match self.representation() {
            Representation::Spectral => Ok(self.clone()),
            Representation::Physical => self.to_spectral(),
        }
    }

    /// Ensure a physical copy, transforming if needed.
    pub fn physical_owned(&self) -> Result<ScalarField> {
        match self.representation() {
            Representation::Physical => Ok(self.clone()),
            Representation::Spectral => self.to_physical(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.data {
            Data::Physical(a) => a.iter().fold(0.0, |m, v| m.max(v.abs())),
            Data::Spectral(a) => a.iter().fold(0.0, |m, v| m.max(v.norm())),
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.data {
            Data::Physical(a) => a.iter().all(|v| v.is_finite()),
            Data::Spectral(a) => a.iter().all(|v| v.re.is_finite() && v.im.is_finite()),
        }
    }
}

/// Three-component velocity field on a shared grid.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub components: [ScalarField; 3],
    divergence_free: bool,
}

impl VelocityField {
    pub fn new(components: [ScalarField; 3]) -> Result<Self> {
        let g = components[0].grid();
        if !components.iter().all(|c| c.grid().same_grid(g)) {
            return Err(AnsError::GridMismatch);
        }
        Ok(VelocityField {
            components,
            divergence_free: false,
        })
    }

    pub fn zeros_physical(grid: &Arc<Grid>) -> Self {
        VelocityField {
            components: [
                ScalarField::zeros_physical(grid),
                ScalarField::zeros_physical(grid),
                ScalarField::zeros_physical(grid),
            ],
            divergence_free: true,
        }
    }

    pub fn zeros_spectral(grid: &Arc<Grid>) -> Self {
        VelocityField {
            components: [
                ScalarField::zeros_spectral(grid),
                ScalarField::zeros_spectral(grid),
                ScalarField::zeros_spectral(grid),
            ],
            divergence_free: true,
        }
    }

    /// Sample three component functions at box-centered coordinates.
    pub fn from_fns<F1, F2, F3>(grid: &Arc<Grid>, f1: F1, f2: F2, f3: F3) -> Self
    where
        F1: Fn(f64, f64, f64) -> f64,
        F2: Fn(f64, f64, f64) -> f64,
        F3: Fn(f64, f64, f64) -> f64,
    {
        VelocityField {
            components: [
                ScalarField::from_fn(grid, f1),
                ScalarField::from_fn(grid, f2),
                ScalarField::from_fn(grid, f3),
            ],
            divergence_free: false,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn representation(&self) -> Representation {
        self.components[0].representation()
    }

    pub fn divergence_free(&self) -> bool {
        self.divergence_free
    }

    pub(crate) fn set_divergence_free(&mut self, val: bool) {
        self.divergence_free = val;
    }

    pub fn to_spectral(&self) -> Result<VelocityField> {
        Ok(VelocityField {
            components: [
                self.components[0].spectral_owned()?,
                self.components[1].spectral_owned()?,
                self.components[2].spectral_owned()?,
            ],
            divergence_free: self.divergence_free,
        })
    }

    pub fn to_physical(&self) -> Result<VelocityField> {
        Ok(VelocityField {
            components: [
                self.components[0].physical_owned()?,
                self.components[1].physical_owned()?,
                self.components[2].physical_owned()?,
            ],
            divergence_free: self.divergence_free,
        })
    }

    /// Max over modes of `|ξ·û(ξ)|`, relative to the largest coefficient.
    /// Uses the derivative (Nyquist-zeroed) lattice, the divergence
    /// operator acting on real fields.
    pub fn relative_divergence(&self) -> Result<f64> {
        let spec = self.to_spectral()?;
        let u1 = spec.components[0].spectral()?;
        let u2 = spec.components[1].spectral()?;
        let u3 = spec.components[2].spectral()?;
        let grid = self.grid();
        let mut max_div = 0.0f64;
        let mut max_u = 0.0f64;
        for ((i, j, k), v1) in u1.indexed_iter() {
            let k1 = grid.wavenumber_deriv(Axis::X1, i);
            let k2 = grid.wavenumber_deriv(Axis::X2, j);
            let k3 = grid.wavenumber_deriv(Axis::X3, k);
            let v2 = u2[(i, j, k)];
            let v3 = u3[(i, j, k)];
            let div = (Complex64::i() * (k1 * v1 + k2 * v2 + k3 * v3)).norm();
            max_div = max_div.max(div);
            max_u = max_u.max(v1.norm()).max(v2.norm()).max(v3.norm());
        }
        if max_u == 0.0 {
            Ok(0.0)
        } else {
            Ok(max_div / max_u)
        }
    }

    /// Check the divergence certificate and stamp the flag.
    pub fn certify_divergence_free(&mut self, tol: f64) -> Result<bool> {
        let rel = self.relative_divergence()?;
        self.divergence_free = rel <= tol;
        if self.divergence_free {
            Ok(true)
        } else {
            Err(AnsError::NotSolenoidal(rel))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.max_abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    /// Pointwise Euclidean magnitude of the horizontal pair `(u₁, u₂)`.
    pub fn horizontal_magnitude(&self) -> Result<ScalarField> {
        let a = self.components[0].physical()?;
        let b = self.components[1].physical()?;
        let data = ndarray::Zip::from(a).and(b).map_collect(|x, y| x.hypot(*y));
        ScalarField::from_physical(self.grid(), data)
    }

    /// Pointwise Euclidean magnitude of the full vector.
    pub fn magnitude(&self) -> Result<ScalarField> {
        let a = self.components[0].physical()?;
        let b = self.components[1].physical()?;
        let c = self.components[2].physical()?;
        let data = ndarray::Zip::from(a)
            .and(b)
            .and(c)
            .map_collect(|x, y, z| (x * x + y * y + z * z).sqrt());
        ScalarField::from_physical(self.grid(), data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_spectral_mass() {
        let grid = Grid::new(8, 8, 5.0, 3.0).unwrap();
        let c = 2.5;
        let f = ScalarField::from_fn(&grid, |_, _, _| c);
        let s = f.to_spectral().unwrap();
        let spec = s.spectral().unwrap();
        let expected = c * grid.box_volume();
        assert!((spec[(0, 0, 0)].re - expected).abs() < 1e-9 * expected);
        assert!(spec[(0, 0, 0)].im.abs() < 1e-9 * expected);
        let off: f64 = spec
            .indexed_iter()
            .filter(|((i, j, k), _)| !(*i == 0 && *j == 0 && *k == 0))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-10 * expected);
    }

    #[test]
    fn cosine_has_two_modes() {
        let tau = 2.0 * PI;
        let grid = Grid::new(8, 8, tau, tau).unwrap();
        let f = ScalarField::from_fn(&grid, |x1, _, _| x1.cos());
        let s = f.to_spectral().unwrap();
        let spec = s.spectral().unwrap();
        // cos(x₁) = (e^{ix₁}+e^{−ix₁})/2, so mass (2π)³/2 at ξ=(±1,0,0).
        let expected = tau.powi(3) / 2.0;
        assert!((spec[(1, 0, 0)].re - expected).abs() < 1e-9 * expected);
        assert!((spec[(7, 0, 0)].re - expected).abs() < 1e-9 * expected);
        let others: f64 = spec
            .indexed_iter()
            .filter(|((i, j, k), _)| !((*i == 1 || *i == 7) && *j == 0 && *k == 0))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        assert!(others < 1e-10 * expected);
    }

    #[test]
    fn round_trip_is_tight() {
        let grid = Grid::new(16, 8, 7.0, 3.0).unwrap();
        // Deterministic pseudo-random samples.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut data = Array3::zeros(grid.shape());
        for v in data.iter_mut() {
            *v = next();
        }
        let f = ScalarField::from_physical(&grid, data.clone()).unwrap();
        let back = f.to_spectral().unwrap().to_physical().unwrap();
        let max = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = data
            .iter()
            .zip(back.physical().unwrap().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * max, "round-trip error {err:.3e}");
    }

    #[test]
    fn representation_mismatch_is_reported() {
        let grid = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let f = ScalarField::zeros_physical(&grid);
        assert!(f.to_physical().is_err());
        let s = ScalarField::zeros_spectral(&grid);
        assert!(s.to_spectral().is_err());
    }

    #[test]
    fn divergence_certificate() {
        let grid = Grid::new(16, 16, 2.0 * PI, 2.0 * PI).unwrap();
        // u = (−∂₂ψ, ∂₁ψ, 0) is divergence-free for ψ = sin x₁ sin x₂.
        let mut u = VelocityField::from_fns(
            &grid,
            |x1, x2, _| -x1.sin() * x2.cos(),
            |x1, x2, _| x1.cos() * x2.sin(),
            |_, _, _| 0.0,
        );
        assert!(u.certify_divergence_free(1e-10).is_ok());
        let mut v = VelocityField::from_fns(
            &grid,
            |x1, _, _| x1.sin(),
            |_, _, _| 0.0,
            |_, _, _| 0.0,
        );
        assert!(v.certify_divergence_free(1e-10).is_err());
    }
}
