//! Solutions, a priori bounds and empirical Brouwer degrees for the
//! Tzitzéica equation
//!
//! ```text
//! −Δu + h₁e^{Au} + h₂e^{−Bu} = 0
//! ```
//!
//! and its generalized variant
//!
//! ```text
//! −Δu + h₁e^{Au}(e^{Au} − 1) + h₂e^{−Bu}(e^{−Bu} − 1) = 0
//! ```
//!
//! on finite connected weighted graphs.
//!
//! The crate is organised bottom-up: [`graph`] holds the weighted graph and
//! its discrete operators, [`model`] the residual maps, their deformations
//! and the energy functional, [`estimates`] the closed-form a priori bounds,
//! [`solvers`] Newton, deflation, continuation and box minimization, and
//! [`degree`] the sign-sum degree estimator.

mod coupling;
pub mod degree;
pub mod error;
pub mod estimates;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod solvers;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use degree::{
    degree_single_vertex, estimate_degree, estimate_degree_map, homotopy_degrees,
    verify_homotopy_invariance, Confidence, DegreeReport, DEDUP_RADIUS,
};
pub use error::{Error, Result};
pub use estimates::{
    bounds_classic, bounds_classic_homotopy, bounds_generalized, elliptic_constant, AprioriBox,
};
pub use graph::{graph_constants, Edge, GraphConstants, VertexField, WeightedGraph};
pub use model::{
    default_epsilon, energy, energy_gradient, jacobian, residual, residual_homotopy,
    EquationKind, HomotopyParams, ProblemSpec, TzitzeicaMap,
};
pub use solvers::{
    choose_barriers, continuation, default_t_grid, find_two_solutions, minimize_box, newton,
    newton_deflated, trace_continuation, BarrierPair, Branch, Multiplicity, SolveReport,
    SolverConfig,
};
