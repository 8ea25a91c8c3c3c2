//! Time integration by an integrating-factor RK4 scheme.
//!
//! The horizontal diffusion is applied exactly as the multiplier
//! `e^{−dt|ξ_h|²}` (so a linear-only run reproduces the semigroup to
//! machine precision) and RK4 acts on the transformed nonlinearity
//! `−ℙ∇·(u⊗u)`, whose quadratic products are formed pointwise in physical
//! space under two-thirds dealiasing. Dealiased advection is energy
//! neutral, which makes the discrete energy balance
//! `½‖u(t)‖² + ∫₀ᵗ‖∇_h u‖² = ½‖u₀‖²` exact up to time-stepping error.

use crate::field::{ScalarField, VelocityField};
use crate::grid::{Axis, Grid};
use crate::operators::{dealiased_products_with_max, product_index, project_spectral};
use crate::store::{SnapshotSchedule, SnapshotStore};
use crate::{AnsError, Result};
use ndarray::Array3;
use num_complex::Complex64;
use std::sync::Arc;

/// Integrator parameters. The scheme (integrating-factor RK4) and the
/// dealiasing rule (two-thirds) are fixed.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Largest allowed time step; snapshot gaps are subdivided evenly.
    pub dt: f64,
    pub t_end: f64,
    /// Fraction of the advective step-size bound that `dt` must respect.
    pub cfl_safety: f64,
    /// Evolve only `∂ₜu = Δ_h u` (testing and linear diagnostics).
    pub linear_only: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(AnsError::InvalidSolverConfig(format!("dt = {dt}")));
        }
        if t_end < dt {
            return Err(AnsError::InvalidSolverConfig(format!(
                "t_end = {t_end} shorter than one step dt = {dt}"
            )));
        }
        Ok(SolverConfig {
            dt,
            t_end,
            cfl_safety: 0.5,
            linear_only: false,
        })
    }

    pub fn linear(mut self) -> Self {
        self.linear_only = true;
        self
    }
}

/// Per-step energy bookkeeping: `½‖u‖²_{Hᵠ}` and the trapezoid cumulative
/// horizontal dissipation `∫₀ᵗ‖∇_h u‖²_{Hᵠ} dτ` for σ ∈ {0, 1, 2}.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub kinetic: Vec<[f64; 3]>,
    pub dissipation_rate: Vec<[f64; 3]>,
    pub cumulative_dissipation: Vec<[f64; 3]>,
}

impl EnergyLedger {
    fn record(&mut self, t: f64, kinetic: [f64; 3], rate: [f64; 3]) {
        let cumulative = if let (Some(prev_t), Some(prev_rate), Some(prev_cum)) = (
            self.times.last(),
            self.dissipation_rate.last(),
            self.cumulative_dissipation.last(),
        ) {
            let dt = t - prev_t;
            let mut c = *prev_cum;
            for s in 0..3 {
                c[s] += 0.5 * dt * (prev_rate[s] + rate[s]);
            }
            c
        } else {
            [0.0; 3]
        };
        self.times.push(t);
        self.kinetic.push(kinetic);
        self.dissipation_rate.push(rate);
        self.cumulative_dissipation.push(cumulative);
    }

    pub fn is_finite(&self) -> bool {
        self.kinetic.iter().flatten().all(|v| v.is_finite())
            && self.cumulative_dissipation.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest violation of `½‖u(t)‖² + ∫₀ᵗ‖∇_h u‖² = ½‖u₀‖²` at σ = 0,
    /// relative to the initial kinetic energy.
    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.kinetic.first().map(|k| k[0]).unwrap_or(0.0);
        if e0 == 0.0 {
            return 0.0;
        }
        self.kinetic
            .iter()
            .zip(&self.cumulative_dissipation)
            .map(|(k, c)| (k[0] + c[0] - e0).abs() / e0)
            .fold(0.0, f64::max)
    }

    /// Check `‖u(t)‖²_{Hᵠ} + ∫₀ᵗ‖∇_h u‖²_{Hᵠ} ≤ 2‖u₀‖²_{Hᵠ}·(1 + slack)`.
    pub fn satisfies_energy_inequality(&self, sigma: usize, slack: f64) -> bool {
        let e0 = match self.kinetic.first() {
            Some(k) => 2.0 * k[sigma],
            None => return true,
        };
        self.kinetic
            .iter()
            .zip(&self.cumulative_dissipation)
            .all(|(k, c)| 2.0 * k[sigma] + c[sigma] <= 2.0 * e0 * (1.0 + slack))
    }
}

/// Warnings collected during a run (spectral tail, CFL margins).
#[derive(Debug, Clone, Default)]
pub struct RunDiagnostics {
    pub warnings: Vec<String>,
}

type SpectralState = [Array3<Complex64>; 3];

fn state_from_velocity(u: &VelocityField) -> Result<SpectralState> {
    let spec = u.to_spectral()?;
    Ok([
        spec.components[0].spectral()?.clone(),
        spec.components[1].spectral()?.clone(),
        spec.components[2].spectral()?.clone(),
    ])
}

fn velocity_from_state(grid: &Arc<Grid>, state: &SpectralState, solenoidal: bool) -> Result<VelocityField> {
    let mut u = VelocityField::new([
        ScalarField::from_spectral(grid, state[0].clone())?.to_physical()?,
        ScalarField::from_spectral(grid, state[1].clone())?.to_physical()?,
        ScalarField::from_spectral(grid, state[2].clone())?.to_physical()?,
    ])?;
    u.set_divergence_free(solenoidal);
    Ok(u)
}

/// `−ℙ∇·(u⊗u)` with two-thirds dealiasing around the products.
/// Returns the spectral tendency and `max|ũ|` for CFL validation.
fn rhs_spectral(grid: &Arc<Grid>, state: &SpectralState) -> Result<(SpectralState, f64)> {
    let (products, max_u) = dealiased_products_with_max(grid, [&state[0], &state[1], &state[2]])?;
    let k1d = grid.wavenumbers_deriv(Axis::X1).to_vec();
    let k3d = grid.wavenumbers_deriv(Axis::X3).to_vec();
    let shape = grid.shape();
    let mut out: SpectralState = [
        Array3::zeros(shape),
        Array3::zeros(shape),
        Array3::zeros(shape),
    ];
    for (j, out_j) in out.iter_mut().enumerate() {
        for ((i, jj, k), v) in out_j.indexed_iter_mut() {
            let kd = [k1d[i], k1d[jj], k3d[k]];
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..3 {
                acc += Complex64::new(0.0, kd[b]) * products[product_index(b, j)][(i, jj, k)];
            }
            *v = -acc;
        }
    }
    let [mut o1, mut o2, mut o3] = out;
    project_spectral(grid, &mut o1, &mut o2, &mut o3);
    Ok(([o1, o2, o3], max_u))
}

/// Public wrapper: the projected, dealiased advection tendency.
pub fn nonlinear_rhs(u: &VelocityField) -> Result<VelocityField> {
    let rel = u.relative_divergence()?;
    if rel > 1e-8 {
        return Err(AnsError::NotSolenoidal(rel));
    }
    let grid = u.grid().clone();
    let state = state_from_velocity(u)?;
    let (rhs, _) = rhs_spectral(&grid, &state)?;
    velocity_from_state(&grid, &rhs, true)
}

fn heat_damp_table(grid: &Grid, t: f64) -> Vec<f64> {
    let kh = grid.wavenumbers(Axis::X1);
    let n = grid.n_h;
    let mut damp = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            damp[i * n + j] = (-t * (kh[i] * kh[i] + kh[j] * kh[j])).exp();
        }
    }
    damp
}

fn apply_damp(grid: &Grid, damp: &[f64], state: &mut SpectralState) {
    let n = grid.n_h;
    for comp in state.iter_mut() {
        for ((i, j, _k), v) in comp.indexed_iter_mut() {
            *v *= damp[i * n + j];
        }
    }
}

fn axpy(dst: &mut SpectralState, a: f64, src: &SpectralState) {
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        ndarray::Zip::from(d).and(s).for_each(|x, y| *x += a * y);
    }
}

/// Restore `û(−ξ) = conj(û(ξ))` exactly by averaging conjugate pairs.
fn conjugate_symmetrize(grid: &Grid, data: &mut Array3<Complex64>) {
    let (n1, n2, n3) = grid.shape();
    for i in 0..n1 {
        let im = (n1 - i) % n1;
        for j in 0..n2 {
            let jm = (n2 - j) % n2;
            for k in 0..n3 {
                let km = (n3 - k) % n3;
                if (i, j, k) < (im, jm, km) {
                    let a = data[(i, j, k)];
                    let b = data[(im, jm, km)];
                    let avg = 0.5 * (a + b.conj());
                    data[(i, j, k)] = avg;
                    data[(im, jm, km)] = avg.conj();
                } else if (i, j, k) == (im, jm, km) {
                    data[(i, j, k)] = Complex64::new(data[(i, j, k)].re, 0.0);
                }
            }
        }
    }
}

/// Parseval energies in one sweep: `½Σ‖u‖²_{Hᵠ}` and `Σ‖∇_h u‖²_{Hᵠ}`
/// over components, for σ = 0, 1, 2.
fn energy_terms(grid: &Grid, state: &SpectralState) -> ([f64; 3], [f64; 3]) {
    let k1s = grid.wavenumbers(Axis::X1);
    let k3s = grid.wavenumbers(Axis::X3);
    let scale = 1.0 / grid.box_volume();
    let mut kin = [0.0f64; 3];
    let mut grad = [0.0f64; 3];
    for comp in state.iter() {
        for ((i, j, k), v) in comp.indexed_iter() {
            let khsq = k1s[i] * k1s[i] + k1s[j] * k1s[j];
            let ksq = khsq + k3s[k] * k3s[k];
            let a = v.norm_sqr();
            let mut w = 1.0;
            for s in 0..3 {
                kin[s] += w * a;
                grad[s] += w * khsq * a;
                w *= 1.0 + ksq;
            }
        }
    }
    for s in 0..3 {
        kin[s] *= 0.5 * scale;
        grad[s] *= scale;
    }
    (kin, grad)
}

/// Fraction of kinetic energy in the outer quarter of the kept band.
fn spectral_tail_fraction(grid: &Grid, state: &SpectralState) -> f64 {
    let mut total = 0.0f64;
    let mut tail = 0.0f64;
    let cut_h = (0.75 * grid.dealias_m_h as f64) as usize;
    let cut_v = (0.75 * grid.dealias_m_v as f64) as usize;
    for comp in state.iter() {
        for ((i, j, k), v) in comp.indexed_iter() {
            let a = v.norm_sqr();
            total += a;
            let mi = Grid::signed_mode(grid.n_h, i).unsigned_abs();
            let mj = Grid::signed_mode(grid.n_h, j).unsigned_abs();
            let mk = Grid::signed_mode(grid.n_v, k).unsigned_abs();
            if mi > cut_h || mj > cut_h || mk > cut_v {
                tail += a;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

struct Stepper {
    grid: Arc<Grid>,
    cfg: SolverConfig,
}

impl Stepper {
    /// One integrating-factor RK4 step of size `dt` from state `u`.
    fn step(&self, state: &SpectralState, dt: f64) -> Result<SpectralState> {
        let grid = &self.grid;
        let e_half = heat_damp_table(grid, dt / 2.0);
        let e_full = heat_damp_table(grid, dt);

        if self.cfg.linear_only {
            let mut out = state.clone();
            apply_damp(grid, &e_full, &mut out);
            return Ok(out);
        }

        let (k1, max_u) = rhs_spectral(grid, state)?;
        let dx = grid.dx_h().min(grid.dx_v());
        if max_u > 0.0 {
            let limit = self.cfg.cfl_safety * dx / max_u;
            if dt > limit {
                return Err(AnsError::CflViolation { dt, limit, max_u });
            }
        }

        // u_a = E_{dt/2}(u + dt/2 k1)
        let mut ua = state.clone();
        axpy(&mut ua, dt / 2.0, &k1);
        apply_damp(grid, &e_half, &mut ua);
        let (k2, _) = rhs_spectral(grid, &ua)?;

        // u_b = E_{dt/2}u + dt/2 k2
        let mut ub = state.clone();
        apply_damp(grid, &e_half, &mut ub);
        axpy(&mut ub, dt / 2.0, &k2);
        let (k3, _) = rhs_spectral(grid, &ub)?;

        // u_c = E_{dt}u + dt E_{dt/2}k3
        let mut uc = state.clone();
        apply_damp(grid, &e_full, &mut uc);
        let mut k3_half = k3.clone();
        apply_damp(grid, &e_half, &mut k3_half);
        axpy(&mut uc, dt, &k3_half);
        let (k4, _) = rhs_spectral(grid, &uc)?;

        // u' = E_dt u + dt/6 (E_dt k1 + 2E_{dt/2}(k2 + k3) + k4)
        let mut out = state.clone();
        apply_damp(grid, &e_full, &mut out);
        let mut acc = k1;
        apply_damp(grid, &e_full, &mut acc);
        let mut mid = k2;
        axpy(&mut mid, 1.0, &k3);
        apply_damp(grid, &e_half, &mut mid);
        axpy(&mut acc, 2.0, &mid);
        axpy(&mut acc, 1.0, &k4);
        axpy(&mut out, dt / 6.0, &acc);

        let [mut o1, mut o2, mut o3] = out;
        project_spectral(grid, &mut o1, &mut o2, &mut o3);
        conjugate_symmetrize(grid, &mut o1);
        conjugate_symmetrize(grid, &mut o2);
        conjugate_symmetrize(grid, &mut o3);
        Ok([o1, o2, o3])
    }
}

/// Public single-step entry point (validates CFL, returns a certified
/// divergence-free field).
pub fn step(u: &VelocityField, cfg: &SolverConfig, dt: f64) -> Result<VelocityField> {
    let grid = u.grid().clone();
    let state = state_from_velocity(u)?;
    let stepper = Stepper { grid: grid.clone(), cfg: *cfg };
    let next = stepper.step(&state, dt)?;
    velocity_from_state(&grid, &next, true)
}

/// Integrate from `u₀`, emitting snapshots exactly at the scheduled times
/// (gaps are subdivided into equal steps no longer than `cfg.dt`) and
/// recording the energy ledger every step.
pub fn run(
    u0: &VelocityField,
    cfg: &SolverConfig,
    schedule: &SnapshotSchedule,
) -> Result<(SnapshotStore, EnergyLedger, RunDiagnostics)> {
    let grid = u0.grid().clone();
    let rel = u0.relative_divergence()?;
    if rel > 1e-8 {
        return Err(AnsError::NotSolenoidal(rel));
    }
    if schedule.t_end > cfg.t_end * (1.0 + 1e-12) {
        return Err(AnsError::InvalidSolverConfig(format!(
            "schedule reaches t = {} beyond the configured horizon {}",
            schedule.t_end, cfg.t_end
        )));
    }

    let mut state = state_from_velocity(u0)?;
    let stepper = Stepper { grid: grid.clone(), cfg: *cfg };
    let mut store = SnapshotStore::new(grid.clone(), Some(*schedule));
    let mut ledger = EnergyLedger::default();
    let mut diagnostics = RunDiagnostics::default();

    let (kin, rate) = energy_terms(&grid, &state);
    ledger.record(0.0, kin, rate);
    store.push(0.0, velocity_from_state(&grid, &state, true)?)?;

    let times = schedule.times();
    let mut tail_warned = false;
    for window in times.windows(2) {
        let (t_a, t_b) = (window[0], window[1]);
        let n_steps = ((t_b - t_a) / cfg.dt).ceil().max(1.0) as usize;
        let h = (t_b - t_a) / n_steps as f64;
        for step_idx in 0..n_steps {
            state = stepper.step(&state, h)?;
            let t_now = if step_idx + 1 == n_steps {
                t_b
            } else {
                t_a + (step_idx + 1) as f64 * h
            };
            let (kin, rate) = energy_terms(&grid, &state);
            if !kin[0].is_finite() {
                return Err(AnsError::NonFinite { t: t_now });
            }
            ledger.record(t_now, kin, rate);
        }
        if !tail_warned {
            let frac = spectral_tail_fraction(&grid, &state);
            if frac > 1e-8 {
                diagnostics.warnings.push(format!(
                    "spectral tail energy fraction {frac:.3e} above 1e-8 at t = {t_b}; \
                     vertical resolution may be insufficient"
                ));
                tail_warned = true;
            }
        }
        let snap = velocity_from_state(&grid, &state, true)?;
        if !snap.is_finite() {
            return Err(AnsError::NonFinite { t: t_b });
        }
        store.push(t_b, snap)?;
    }
    Ok((store, ledger, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::heat_semigroup;
    use std::f64::consts::PI;

    fn small_solenoidal(grid: &Arc<Grid>, amp: f64) -> VelocityField {
        let l = grid.l_h;
        crate::operators::helmholtz_project(&VelocityField::from_fns(
            grid,
            move |x1, x2, x3| amp * (2.0 * PI * x1 / l).sin() * (2.0 * PI * (x2 + x3) / l).cos(),
            move |x1, x2, _| amp * (2.0 * PI * (x1 - x2) / l).cos(),
            move |_, x2, x3| amp * (2.0 * PI * (x2 + 2.0 * x3) / l).sin(),
        ))
        .unwrap()
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let grid = Grid::new(8, 8, 4.0, 4.0).unwrap();
        let cfg = SolverConfig::new(0.1, 1.0).unwrap();
        let schedule = SnapshotSchedule::with_shape(0.5, 1.0, 4, 1.0).unwrap();
        let (store, ledger, _) = run(&VelocityField::zeros_physical(&grid), &cfg, &schedule).unwrap();
        for i in 0..store.len() {
            assert_eq!(store.snapshot(i).max_abs(), 0.0);
        }
        assert_eq!(ledger.max_relative_energy_drift(), 0.0);
    }

    #[test]
    fn shear_flow_has_no_advection() {
        let grid = Grid::new(16, 16, 5.0, 3.0).unwrap();
        let mut shear = VelocityField::from_fns(
            &grid,
            |_, _, x3| (2.0 * PI * x3 / 3.0).sin(),
            |_, _, _| 0.0,
            |_, _, _| 0.0,
        );
        shear.certify_divergence_free(1e-10).unwrap();
        let rhs = nonlinear_rhs(&shear).unwrap();
        assert!(rhs.max_abs() < 1e-15, "rhs {:.3e}", rhs.max_abs());
        let zero = VelocityField::zeros_physical(&grid);
        assert_eq!(nonlinear_rhs(&zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn advection_is_energy_neutral() {
        let grid = Grid::new(16, 16, 2.0 * PI, 2.0 * PI).unwrap();
        let u = small_solenoidal(&grid, 1.0);
        let rhs = nonlinear_rhs(&u).unwrap();
        // ⟨N(u), u⟩ = 0 for dealiased advection under projection.
        let mut inner = 0.0;
        for c in 0..3 {
            let a = rhs.components[c].physical().unwrap();
            let b = u.components[c].physical().unwrap();
            inner += a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| x * y)
                .sum::<f64>()
                * grid.cell_volume();
        }
        let scale = u.max_abs().powi(3) * grid.box_volume();
        assert!(inner.abs() < 1e-10 * scale, "⟨N,u⟩ = {inner:.3e}");
    }

    #[test]
    fn linear_step_equals_semigroup() {
        let grid = Grid::new(16, 8, 5.0, 3.0).unwrap();
        let u = small_solenoidal(&grid, 0.3);
        let cfg = SolverConfig::new(0.05, 1.0).unwrap().linear();
        let stepped = step(&u, &cfg, 0.05).unwrap();
        for c in 0..3 {
            let expected = heat_semigroup(&u.components[c], 0.05).unwrap();
            let err = stepped.components[c]
                .physical()
                .unwrap()
                .iter()
                .zip(expected.physical().unwrap().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-14 * u.max_abs().max(1.0), "err {err:.3e}");
        }
    }

    #[test]
    fn linear_run_matches_semigroup_at_snapshots() {
        let grid = Grid::new(16, 8, 5.0, 3.0).unwrap();
        let u = small_solenoidal(&grid, 0.3);
        let cfg = SolverConfig::new(0.05, 2.0).unwrap().linear();
        let schedule = SnapshotSchedule::with_shape(0.25, 1.0, 4, 2.0).unwrap();
        let (store, _, _) = run(&u, &cfg, &schedule).unwrap();
        for (idx, &t) in store.times().iter().enumerate() {
            for c in 0..3 {
                let expected = heat_semigroup(&u.components[c], t).unwrap();
                let err = store.snapshot(idx).components[c]
                    .physical()
                    .unwrap()
                    .iter()
                    .zip(expected.physical().unwrap().iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(
                    err < 1e-12 * u.max_abs(),
                    "t = {t}, component {c}: err {err:.3e}"
                );
            }
        }
    }

    #[test]
    fn step_preserves_divergence_and_reality() {
        let grid = Grid::new(16, 16, 2.0 * PI, 2.0 * PI).unwrap();
        let u = small_solenoidal(&grid, 0.5);
        let cfg = SolverConfig::new(0.02, 1.0).unwrap();
        let next = step(&u, &cfg, 0.02).unwrap();
        assert!(next.relative_divergence().unwrap() < 1e-10);
        let residue = next.components[0]
            .to_spectral()
            .unwrap()
            .imaginary_residue()
            .unwrap();
        assert!(residue < 1e-12);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let grid = Grid::new(16, 16, 2.0 * PI, 2.0 * PI).unwrap();
        let u = small_solenoidal(&grid, 5.0);
        let cfg = SolverConfig::new(2.0, 4.0).unwrap();
        match step(&u, &cfg, 2.0) {
            Err(AnsError::CflViolation { max_u, .. }) => assert!(max_u > 0.0),
            other => panic!("expected CFL violation, got {other:?}"),
        }
    }

    /// Local truncation: `‖step(dt) − step(dt/2)²‖ = O(dt⁵)`.
    #[test]
    fn single_step_is_locally_fifth_order() {
        let grid = Grid::new(16, 16, 2.0 * PI, 2.0 * PI).unwrap();
        let u = small_solenoidal(&grid, 0.8);
        let cfg = SolverConfig::new(1.0, 8.0).unwrap();
        let mut errs = Vec::new();
        for &dt in &[0.1, 0.05, 0.025] {
            let coarse = step(&u, &cfg, dt).unwrap();
            let fine = step(&step(&u, &cfg, dt / 2.0).unwrap(), &cfg, dt / 2.0).unwrap();
            let err: f64 = (0..3)
                .map(|c| {
                    coarse.components[c]
                        .physical()
                        .unwrap()
                        .iter()
                        .zip(fine.components[c].physical().unwrap().iter())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            errs.push(err);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        for order in [order1, order2] {
            assert!(
                (4.5..=5.5).contains(&order),
                "local order {order:.2} outside [4.5, 5.5] (errors {errs:?})"
            );
        }
    }

    /// Global convergence order 4, measured by dt-halving on a fixed
    /// horizon against a Richardson reference.
    #[test]
    fn global_temporal_order_is_four() {
        let grid = Grid::new(16, 16, 2.0 * PI, 2.0 * PI).unwrap();
        let u = small_solenoidal(&grid, 0.8);
        let horizon = 0.5;
        let solve = |dt: f64| {
            let cfg = SolverConfig::new(dt, horizon).unwrap();
            let schedule = SnapshotSchedule::with_shape(horizon, horizon, 4, horizon).unwrap();
            let (store, _, _) = run(&u, &cfg, &schedule).unwrap();
            store.snapshot(store.len() - 1).clone()
        };
        let reference = solve(horizon / 64.0);
        let mut errs = Vec::new();
        for div in [4.0, 8.0, 16.0] {
            let s = solve(horizon / div);
            let err: f64 = (0..3)
                .map(|c| {
                    s.components[c]
                        .physical()
                        .unwrap()
                        .iter()
                        .zip(reference.components[c].physical().unwrap().iter())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            errs.push(err);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        for order in [order1, order2] {
            assert!(
                (3.6..=4.4).contains(&order),
                "global order {order:.2} outside [3.6, 4.4] (errors {errs:?})"
            );
        }
    }

    #[test]
    fn energy_ledger_balances_on_small_run() {
        let grid = Grid::new(16, 16, 2.0 * PI, 2.0 * PI).unwrap();
        let u = small_solenoidal(&grid, 0.05);
        let cfg = SolverConfig::new(0.02, 2.0).unwrap();
        let schedule = SnapshotSchedule::with_shape(0.5, 1.0, 4, 2.0).unwrap();
        let (_store, ledger, _) = run(&u, &cfg, &schedule).unwrap();
        assert!(ledger.is_finite());
        let drift = ledger.max_relative_energy_drift();
        assert!(drift < 1e-4, "energy drift {drift:.3e}");
        for sigma in 0..3 {
            assert!(ledger.satisfies_energy_inequality(sigma, 1e-4));
        }
    }
}
