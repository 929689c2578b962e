//! Numerical solver for Sturm-Liouville problems with an interior discontinuity.
//!
//! The equation `-p(x) y'' + q(x) y = lambda y` is posed on `[a, c) ∪ (c, b]`
//! with piecewise-constant `p`, eigenparameter-dependent boundary conditions at
//! `a` and `b`, and two linear transmission conditions coupling the one-sided
//! limits of `(y, y')` at the interface `c`. Eigenvalues are located as zeros
//! of a characteristic function built from two fundamental solutions shot
//! inward from either endpoint.
//!
//! Module layout:
//! - [`model`]: problem data, validation, transmission minors, case analysis.
//! - [`integrate`]: adaptive Runge-Kutta engine with dense output, plus an
//!   independent Picard/Volterra oracle.
//! - [`fundamental`]: the left- and right-launched fundamental solutions and
//!   the exact interface jump maps.
//! - [`charfn`]: the Wronskian characteristic function with a two-sided
//!   consistency check.
//! - [`asymptotic`]: leading-order formulas for fundamental solutions, the
//!   characteristic function, eigenvalue seeds and eigenfunction shapes.
//! - [`eigen`]: bracketing scan, Brent refinement, residual diagnostics and
//!   eigenfunction assembly.

pub mod asymptotic;
pub mod charfn;
pub mod eigen;
pub mod fundamental;
pub mod integrate;
pub mod model;

pub use charfn::CharSample;
pub use eigen::EigenvalueRecord;
pub use fundamental::FundamentalSolution;
pub use integrate::{PhaseState, Trajectory};
pub use model::{AsymptoticCase, ProblemSpec, ValidatedProblem};
