//! Interior-point solver for smooth nonlinear programs with free slacks and duals
//!
//! ```text
//! minimize f(x)  subject to  h(x) = 0,  c(x) <= 0
//! ```
//!
//! The solver works on a sequence of logarithmic-barrier *relaxation*
//! problems in the extended variables `v = (x, t, s)`. Slacks `t` and duals
//! `s` are never required to be positive; positivity lives in the smooth
//! transforms `z(t, s)` and `y(t, s)` instead (see [`relax`]).
//!
//! A run ends in one of three regular outcomes: an approximate KKT point, an
//! approximate singular (Fritz-John) stationary point, or an approximate
//! infeasible stationary point.
//!
//! ```no_run
//! use relaxip::{catalog, solver::{solve, SolverConfig}};
//!
//! let problem = catalog::lookup_problem("TP1").unwrap();
//! let report = solve(problem.as_ref(), &SolverConfig::default()).unwrap();
//! println!("{:?} at {:?}", report.status, report.x.as_slice());
//! ```

pub mod bfgs;
pub mod catalog;
pub mod derivcheck;
pub mod error;
pub mod merit;
pub mod model;
pub mod relax;
pub mod solver;
pub mod step;
pub mod text;

pub use error::{ConfigError, EvalError, LookupError, ModelError, StepError};
pub use model::{Matrix, Problem, Vector};
