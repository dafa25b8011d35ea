//! Centralised numerical tolerances.

/// Algebraic identities (unitality, multiplicativity, trace normalisation).
pub const ALGEBRAIC: f64 = 1e-12;
/// Residuals of iterative optimisation and feasibility solvers.
pub const OPTIMIZATION: f64 = 1e-9;
/// Iteration cap for alternating projection.
pub const PROJECTION_ITER_CAP: usize = 10_000;
/// Default angular resolution for numerical range sweeps.
pub const SWEEP_ANGLES: usize = 720;
/// Relative truncation threshold for lattice shells.
pub const LATTICE_SHELL_REL: f64 = 1e-14;
/// Relative tail threshold for the alpha integral.
pub const ALPHA_TAIL_REL: f64 = 1e-12;
/// Minimal eigenvalue required for a faithful state.
pub const FAITHFUL: f64 = 1e-10;
