//! Periodic box discretization.
//!
//! The box `[−L_h/2, L_h/2)² × [−L_v/2, L_v/2)` carries `n_h` points per
//! horizontal axis and `n_v` points on the vertical axis. Coordinates are
//! measured from the box center; the grid point with index `n/2` sits at
//! the origin, so compactly concentrated data is centered by construction.
//!
//! Wavenumbers live on `(2π/L)·ℤ` truncated symmetrically. Each axis keeps
//! two lattices: the true one (Nyquist index carries `−n/2`) and a
//! derivative lattice with the Nyquist entry zeroed, used by odd-order
//! derivative multipliers so real fields stay real.

use crate::{AnsError, Result};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
    X3,
}

/// Discrete periodic box with precomputed wavenumber lattices.
#[derive(Debug)]
pub struct Grid {
    pub n_h: usize,
    pub n_v: usize,
    pub l_h: f64,
    pub l_v: f64,
    k_h: Vec<f64>,
    k_h_deriv: Vec<f64>,
    k_v: Vec<f64>,
    k_v_deriv: Vec<f64>,
    /// Largest kept signed mode per horizontal axis under the 2/3 rule.
    pub dealias_m_h: usize,
    /// Largest kept signed mode on the vertical axis under the 2/3 rule.
    pub dealias_m_v: usize,
}

fn wavenumber_lattice(n: usize, l: f64) -> (Vec<f64>, Vec<f64>) {
    let base = 2.0 * std::f64::consts::PI / l;
    let mut k = Vec::with_capacity(n);
    let mut kd = Vec::with_capacity(n);
    for i in 0..n {
        let m = if i <= n / 2 {
            i as isize
        } else {
            i as isize - n as isize
        };
        // Nyquist convention: index n/2 carries the negative mode.
        let m = if i == n / 2 { -(n as isize) / 2 } else { m };
        k.push(base * m as f64);
        kd.push(if i == n / 2 { 0.0 } else { base * m as f64 });
    }
    (k, kd)
}

impl Grid {
    pub fn new(n_h: usize, n_v: usize, l_h: f64, l_v: f64) -> Result<Arc<Grid>> {
        for (name, n) in [("n_h", n_h), ("n_v", n_v)] {
            if n < 4 {
                return Err(AnsError::InvalidGrid(format!("{name} = {n} < 4")));
            }
            if n % 2 != 0 {
                return Err(AnsError::InvalidGrid(format!("{name} = {n} is odd")));
            }
        }
        for (name, l) in [("L_h", l_h), ("L_v", l_v)] {
            if !(l > 0.0) || !l.is_finite() {
                return Err(AnsError::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        let (k_h, k_h_deriv) = wavenumber_lattice(n_h, l_h);
        let (k_v, k_v_deriv) = wavenumber_lattice(n_v, l_v);
        Ok(Arc::new(Grid {
            n_h,
            n_v,
            l_h,
            l_v,
            k_h,
            k_h_deriv,
            k_v,
            k_v_deriv,
            dealias_m_h: n_h / 3,
            dealias_m_v: n_v / 3,
        }))
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_h, self.n_h, self.n_v)
    }

    pub fn n_points(&self) -> usize {
        self.n_h * self.n_h * self.n_v
    }

    pub fn dx_h(&self) -> f64 {
        self.l_h / self.n_h as f64
    }

    pub fn dx_v(&self) -> f64 {
        self.l_v / self.n_v as f64
    }

    /// Quadrature weight of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.dx_h() * self.dx_h() * self.dx_v()
    }

    pub fn box_volume(&self) -> f64 {
        self.l_h * self.l_h * self.l_v
    }

    /// Physical coordinate of index `i` along `axis`, measured from the box
    /// center. Lies in `[−L/2, L/2)`, which is also the periodically
    /// minimized displacement.
    pub fn coord(&self, axis: Axis, i: usize) -> f64 {
        match axis {
            Axis::X1 | Axis::X2 => (i as f64 - (self.n_h / 2) as f64) * self.dx_h(),
            Axis::X3 => (i as f64 - (self.n_v / 2) as f64) * self.dx_v(),
        }
    }

    /// FFT-ordered wavenumber of index `i` along `axis`.
    pub fn wavenumber(&self, axis: Axis, i: usize) -> f64 {
        match axis {
            Axis::X1 | Axis::X2 => self.k_h[i],
            Axis::X3 => self.k_v[i],
        }
    }

    /// Wavenumber with the Nyquist entry zeroed, for odd-order derivatives.
    pub fn wavenumber_deriv(&self, axis: Axis, i: usize) -> f64 {
        match axis {
            Axis::X1 | Axis::X2 => self.k_h_deriv[i],
            Axis::X3 => self.k_v_deriv[i],
        }
    }

    pub fn wavenumbers(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X1 | Axis::X2 => &self.k_h,
            Axis::X3 => &self.k_v,
        }
    }

    pub fn wavenumbers_deriv(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X1 | Axis::X2 => &self.k_h_deriv,
            Axis::X3 => &self.k_v_deriv,
        }
    }

    /// Signed integer mode of index `i` on an axis with `n` points.
    pub fn signed_mode(n: usize, i: usize) -> isize {
        if i == n / 2 {
            -(n as isize) / 2
        } else if i <= n / 2 {
            i as isize
        } else {
            i as isize - n as isize
        }
    }

    /// Whether spectral index `(i, j, k)` survives the 2/3 truncation.
    pub fn keeps_mode(&self, i: usize, j: usize, k: usize) -> bool {
        let mi = Self::signed_mode(self.n_h, i).unsigned_abs();
        let mj = Self::signed_mode(self.n_h, j).unsigned_abs();
        let mk = Self::signed_mode(self.n_v, k).unsigned_abs();
        mi <= self.dealias_m_h && mj <= self.dealias_m_h && mk <= self.dealias_m_v
    }

    /// Largest time for which whole-space asymptotics are trusted on this
    /// box: `t ≤ (L_h/12)²`, after which horizontal wrap-around is no
    /// longer negligible.
    pub fn validity_window(&self) -> f64 {
        let w = self.l_h / 12.0;
        w * w
    }

    pub fn same_grid(&self, other: &Grid) -> bool {
        self.n_h == other.n_h
            && self.n_v == other.n_v
            && self.l_h == other.l_h
            && self.l_v == other.l_v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_matches_box() {
        let g = Grid::new(64, 32, 100.0, 50.0).unwrap();
        assert!((g.dx_h() - 1.5625).abs() < 1e-15);
        assert!((g.dx_v() - 1.5625).abs() < 1e-15);
    }

    #[test]
    fn unit_box_wavenumbers() {
        let tau = 2.0 * std::f64::consts::PI;
        let g = Grid::new(4, 4, tau, tau).unwrap();
        let ks: Vec<f64> = (0..4).map(|i| g.wavenumber(Axis::X1, i)).collect();
        assert_eq!(ks, vec![0.0, 1.0, -2.0, -1.0]);
        // Nyquist zeroed on the derivative lattice.
        assert_eq!(g.wavenumber_deriv(Axis::X1, 2), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(63, 32, 10.0, 10.0).is_err());
        assert!(Grid::new(2, 32, 10.0, 10.0).is_err());
        assert!(Grid::new(8, 8, 0.0, 10.0).is_err());
        assert!(Grid::new(8, 8, 10.0, -1.0).is_err());
    }

    #[test]
    fn coordinates_centered() {
        let g = Grid::new(8, 8, 16.0, 8.0).unwrap();
        assert_eq!(g.coord(Axis::X1, 4), 0.0);
        assert_eq!(g.coord(Axis::X1, 0), -8.0);
        assert_eq!(g.coord(Axis::X3, 0), -4.0);
    }

    #[test]
    fn validity_window_rule() {
        let g = Grid::new(8, 8, 96.0, 8.0).unwrap();
        assert!((g.validity_window() - 64.0).abs() < 1e-12);
    }
}
