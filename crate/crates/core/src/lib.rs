//! Quantum-inequality bounds for the free scalar field along timelike
//! worldlines, together with a finite-dimensional model of locally covariant
//! quantum field theory in which fields, states and quantum inequalities are
//! explicit matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`category`]: finite categories, functors and natural transformations.
//! * [`worlds`]: matrix worlds, embeddings, states and local physical equivalence.
//! * [`qi`]: absolute and difference quantum inequalities over matrix worlds.
//! * [`field`]: numerical range, spectrum and functional calculus of fields.
//! * [`scalar`]: Wick-square bounds for the free scalar field.
//! * [`geometry`]: timelike diameters, double cones and torus embeddings.
//! * [`oracle`]: independent reference computations used for verification.

pub mod category;
pub mod error;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod qi;
pub mod quad;
pub mod scalar;
pub mod special;
pub mod tol;
pub mod worlds;

pub use category::{FiniteCategory, FunctorData, IsoClassIndex, NatTransData, ValidationReport, Variance};
pub use error::{Error, Result};
pub use field::{AbstractField, ConvexRegion, SpectrumSet};
pub use geometry::{DoubleCone, Event, SupportRegion};
pub use linalg::CMat;
pub use qi::{AbsoluteQI, DifferenceQI, TrivialityReport};
pub use scalar::{BoundReport, SamplingFunction, StateKind, TwoPointFunction, Worldline};
pub use worlds::{DensityState, FieldAssignment, StateSpace, ToyMorphism, ToyScenario, ToyWorld};
