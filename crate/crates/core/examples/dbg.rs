use ans_core::field::{ScalarField, VelocityField};
use ans_core::grid::{Axis, Grid};
use ans_core::operators::helmholtz_project;
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() {
    let grid = Grid::new(16, 8, 5.0, 3.0).unwrap();
    let l = grid.l_h;
    let raw = VelocityField::from_fns(
        &grid,
        move |x1, x2, x3| 0.3 * (2.0 * PI * x1 / l).sin() * (2.0 * PI * (x2 + x3) / l).cos(),
        move |x1, x2, _| 0.3 * (2.0 * PI * (x1 - x2) / l).cos(),
        move |_, x2, x3| 0.3 * (2.0 * PI * (x2 + 2.0 * x3) / l).sin(),
    );
    // Project, then measure divergence by hand on the spectral arrays.
    let proj = helmholtz_project(&raw).unwrap().to_spectral().unwrap();
    let u1 = proj.components[0].spectral().unwrap();
    let u2 = proj.components[1].spectral().unwrap();
    let u3 = proj.components[2].spectral().unwrap();
    let mut worst = 0.0f64;
    let mut worst_idx = (0usize, 0usize, 0usize);
    let mut max_u = 0.0f64;
    for ((i, j, k), v1) in u1.indexed_iter() {
        let k1 = grid.wavenumber(Axis::X1, i);
        let k2 = grid.wavenumber(Axis::X2, j);
        let k3 = grid.wavenumber(Axis::X3, k);
        let div = (Complex64::i() * (k1 * v1 + k2 * u2[(i, j, k)] + k3 * u3[(i, j, k)])).norm();
        max_u = max_u.max(v1.norm()).max(u2[(i, j, k)].norm()).max(u3[(i, j, k)].norm());
        if div > worst {
            worst = div;
            worst_idx = (i, j, k);
        }
    }
    println!("worst div {:.3e} at {:?}, max_u {:.3e}", worst, worst_idx, max_u);
    let (i, j, k) = worst_idx;
    println!("k at worst: {} {} {}", grid.wavenumber(Axis::X1, i), grid.wavenumber(Axis::X2, j), grid.wavenumber(Axis::X3, k));
    println!("u at worst: {} {} {}", u1[worst_idx], u2[worst_idx], u3[worst_idx]);
    // Single-component FFT round-trip sanity at one mode: transform of
    // e^{i 2π x1 / L} should live at mode (1,0,0) only.
    let f = ScalarField::from_fn(&grid, move |x1, _, _| (2.0 * PI * x1 / l).cos());
    let fs = f.to_spectral().unwrap();
    let d = fs.spectral().unwrap();
    println!("cos mode (1,0,0): {}", d[(1, 0, 0)]);
    println!("cos mode (15,0,0): {}", d[(15, 0, 0)]);
    println!("cos mode (2,0,0): {}", d[(2, 0, 0)]);
}
