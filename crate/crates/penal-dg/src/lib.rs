//! Nodal discontinuous Galerkin spectral element solver for the linear
//! advection-diffusion equation with volume-penalization immersed boundaries.
//!
//! The solver penalizes the solution, its first derivative, and its second
//! derivative inside a solid region, with per-term penalization parameters
//! (eta1, eta2, eta3). A companion modified-equation engine ([`mea`])
//! computes the truncation-error coefficients of the three-point (N = 2)
//! scheme and verifies the parameter choices that cancel the physical terms
//! inside the solid.
//!
//! Modules:
//! - [`basis`]: Gauss-Lobatto quadrature and Lagrange differentiation
//! - [`mask`]: solid geometry, distances, sharp/smooth mask functions
//! - [`operator1d`]: the 1D penalized DG spatial operator and flux schemes
//! - [`time`]: SSP-RK3 time integration
//! - [`operator2d`]: tensor-product 2D extension
//! - [`diagnostics`]: region error norms, decay sweeps, CSV output
//! - [`mea`]: modified-equation analysis for the three-point scheme
//! - [`config`] / [`presets`]: run configuration and experiment presets

pub mod basis;
pub mod config;
pub mod diagnostics;
pub mod mask;
pub mod mea;
pub mod operator1d;
pub mod operator2d;
pub mod presets;
pub mod time;

/// Errors produced by the solver and analysis modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("polynomial order must be at least 1 (got {0})")]
    InvalidOrder(usize),
    #[error("interpolation nodes must be strictly ascending")]
    DegenerateNodes,
    #[error("smooth mask width must be positive (got {0})")]
    InvalidMaskWidth(f64),
    #[error("invalid penalization: {0}")]
    InvalidPenalization(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("region contains no solution points")]
    EmptyRegion,
    #[error("degenerate sweep ladder: {0}")]
    DegenerateLadder(String),
    #[error("solution diverged at step {step} (largest finite |u| = {max_norm:.3e})")]
    Diverged { step: usize, max_norm: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown analysis family '{0}' (valid: {1})")]
    UnknownFamily(String, &'static str),
    #[error("analysis precondition violated: {0}")]
    MeaPrecondition(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
