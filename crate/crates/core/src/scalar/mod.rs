//! Wick-square quantum inequalities for the free scalar field along timelike
//! worldlines in Minkowski space and its toroidal quotients.

pub mod bound;
pub mod lattice;
pub mod nonminimal;
pub mod sampling;
pub mod twopoint;
pub mod wick;
pub mod worldline;

pub use bound::{
    massless_static_closed_form, wick_dqi_bound, wick_dqi_bound_path, BoundReport, EvalPath, Extrapolation,
    MASSLESS_STATIC_CONSTANT,
};
pub use lattice::{kappa_bar, LatticeSum};
pub use nonminimal::{nonminimal_smearing, thermal_scaling_probe, Curvature, NonMinimalSmearing, ScalingReport};
pub use sampling::{Family, SamplingFunction};
pub use twopoint::{build_twopoint, StateKind, TwoPointFunction};
pub use wick::{
    coincidence_difference, independence_identity_check, wick_aqi_by_rearrangement, wick_difference_expectation,
    wick_one_point, wick_ordering_shift, Estimate, IndependenceDefect, OrderingShift, ShiftedExpectations,
};
pub use worldline::{Ambient, Curve, Point4, Worldline};
