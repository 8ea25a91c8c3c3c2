//! Pseudospectral simulation and verification toolkit for the 3D
//! Navier-Stokes equation with horizontal viscosity
//! `∂ₜu − Δ_h u + (u·∇)u + ∇p = 0`, `∇·u = 0` on a periodic box.
//!
//! The box is a surrogate for the whole space: initial data is compactly
//! concentrated at the box center and measurements are restricted to a
//! validity window during which the horizontally spreading Gaussian has
//! not wrapped around.
//!
//! Module map:
//! - [`grid`]: periodic box discretization, wavenumber lattices.
//! - [`field`]: scalar/vector fields, FFT transforms (Riemann-sum convention).
//! - [`norms`]: Lᵖ, mixed Lᵖ_h L^q_v, weighted and Sobolev norms.
//! - [`operators`]: spectral multipliers (horizontal heat semigroup,
//!   Helmholtz projection, the anisotropic pressure-kernel family,
//!   pressure recovery).
//! - [`gaussian`]: 2D/1D heat-kernel evaluation and closed-form norms.
//! - [`oracle`]: quadrature evaluators used to cross-check kernel code.
//! - [`solver`]: integrating-factor RK4 time stepping with 2/3 dealiasing.
//! - [`store`]: time-indexed snapshot storage and schedules.
//! - [`duhamel`]: the eight-term kernel decomposition of the Duhamel
//!   integral and its reconstruction residual.
//! - [`asymptotics`]: large-time profiles, remainders and decay-rate fits.

pub mod asymptotics;
pub mod duhamel;
mod fft;
pub mod field;
pub mod gaussian;
pub mod grid;
pub mod kernel_inversion;
pub mod norms;
pub mod operators;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod store;

use thiserror::Error;

/// Errors produced by grid construction, transforms, operators, the
/// solver and the analysis layers.
#[derive(Debug, Error)]
pub enum AnsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field is in the {found} representation, expected {expected}")]
    RepresentationMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid norm spec: {0}")]
    InvalidNormSpec(String),
    #[error("derivative order {order} exceeds what the grid resolves")]
    DerivativeOrder { order: usize },
    #[error("Sobolev index {0} outside supported range 0..=9")]
    SobolevIndex(usize),
    #[error("invalid kernel spec: {0}")]
    InvalidKernelSpec(String),
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("velocity field is not divergence-free (relative divergence {0:.3e})")]
    NotSolenoidal(f64),
    #[error("invalid solver config: {0}")]
    InvalidSolverConfig(String),
    #[error("CFL violation: dt = {dt:.3e} exceeds limit {limit:.3e} (max |u| = {max_u:.3e})")]
    CflViolation { dt: f64, limit: f64, max_u: f64 },
    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("requested time {t} is not on the snapshot grid")]
    OffScheduleTime { t: f64 },
    #[error("snapshot store too coarse: {0}")]
    StoreTooCoarse(String),
    #[error("decay series unusable for fitting: {0}")]
    BadSeries(String),
    #[error("duhamel term index {index} out of range for the {side} side")]
    BadTermId { side: &'static str, index: usize },
    #[error("{0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, AnsError>;
