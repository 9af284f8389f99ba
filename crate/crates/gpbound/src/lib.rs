//! Certified lower bounds for sparse multivariate polynomials.
//!
//! The entry points in [`bounds`] take a [`poly::Polynomial`] whose
//! highest-degree diagonal terms dominate its other monomials, model the
//! bound-computation as a geometric program ([`gp`]), solve it with a
//! log-barrier interior-point method ([`solver`]), and return a floating
//! point number that is a lower bound on the polynomial over all of R^n or
//! over the ball `sum x_i^{2d} <= M`.

pub mod bench;
pub mod bounds;
pub mod gp;
pub mod instance;
pub mod oracle;
pub mod parse;
pub mod poly;
pub mod solver;

pub use bounds::{
    ball_lower_bound, ball_lower_bound_with, closed_form_bound, lagrangian, lower_bound,
    lower_bound_with, Bound, BoundError, BoundKind, BoundOptions, BoundValue, Provenance,
};
pub use oracle::{exact_minimum, lambda_sweep, sample_ball_check, SweepResult, ViolationReport};
pub use poly::{Exponent, PolyError, Polynomial, SupportSets};
pub use solver::{SolverSettings, SolverStatus};
