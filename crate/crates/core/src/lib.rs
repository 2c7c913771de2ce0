//! Numerical laboratory for the extension form of fractional Lotka-Volterra
//! competition systems: a degenerate-elliptic finite-volume solver with
//! nonlinear conormal boundary conditions, continuation in the competition
//! rate, free-boundary and monotonicity diagnostics, the spherical partition
//! exponents, and the explicit barriers of the decay estimate.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod config;
pub mod continuation;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod par;
pub mod params;
pub mod quad;
pub mod run;
pub mod solver;
pub mod spherical;

pub use error::{Error, Result};
pub use field::{Field, GridFunction};
pub use grid::{build_grid, Grid};
pub use par::Execution;
pub use params::{eval_reaction, ProblemParams, ReactionFamily, ReactionSpec};
pub use solver::{
    boundary_defect, conormal_trace, interior_defect, solve_system, BoundaryData, SolveReport,
    SolverConfig, SweepOrder,
};
pub use continuation::{continue_beta, BetaLadder, SweepRecord, SweepStep};
pub use diagnostics::{
    acf_quotient, almgren_eh, fit_local_exponent, free_boundary, hat_field, holder_quotient,
    morrey_quotient, multiplicity, reflection_residual, segregation_system_residual, HatField,
    RadialProfile, Subdomain,
};
