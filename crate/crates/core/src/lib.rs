//! Light-like points of zero mean curvature graphs in Lorentzian manifolds.
//!
//! * [`exprjet`]: expression language and third-order forward-mode jets.
//! * [`lorentz`]: metrics and geodesics.
//! * [`surface`]: graph hypersurfaces, the light-likeness function `B`, the operator `A`.
//! * [`reduction`]: axis decomposition and the reduced ODE normal form.
//! * [`verify`]: machine check of the light-like geodesic theorem.

// Negated comparisons are deliberate: they send NaN down the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod exprjet;
mod linalg;
pub mod lorentz;
mod ode;
pub mod reduction;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
pub use exprjet::{Expression, Jet3};
pub use lorentz::{CausalCharacter, Christoffel, GeodesicPath, MetricField};
pub use reduction::{AxisProfile, OdeState};
pub use surface::{
    ClassifyTolerances, Domain, FirstFundamental, GraphHypersurface, Grid, PointClass, PointKind,
};
pub use verify::{TheoremReport, Verdict, VerifyOptions, VerifyTolerances};
