//! Constant-stepsize first-order optimization under generalized smoothness.
//!
//! A function is *ℓ-smooth* when its Hessian norm is bounded by a
//! non-decreasing function of its gradient norm,
//! `‖∇²f(x)‖ ≤ ℓ(‖∇f(x)‖)`. Polynomials, exponentials, rational functions and
//! logarithms all fit this mold with a polynomial `ℓ(u) = L₀ + L_ρ·u^ρ`, even
//! though none of them is Lipschitz smooth.
//!
//! The crate is organized around that observation:
//!
//! - [`smoothness`]: smoothness profiles, the `(r, ℓ)` conversion, effective
//!   constants and the implicit constraints that pin down the gradient bound `G`.
//! - [`objectives`]: a catalog of certified test functions (quadratic,
//!   polynomial, `aˣ`, `a^(bˣ)`, `1/x`, `−log x`, `xᵖ`, `cosh`) and the
//!   piecewise-logarithmic hard instance for constant-stepsize GD.
//! - [`noise`]: seeded, counter-addressed gradient noise (Gaussian,
//!   Student-t, bounded uniform).
//! - [`solvers`]: GD, SGD and the two Nesterov variants with full trajectory
//!   recording.
//! - [`tuner`]: stepsizes and horizons prescribed by the convergence theorems,
//!   and their predicted bound curves.
//! - [`diagnostics`]: trajectory invariants (gradient bounds, descent,
//!   potentials), profile certification and rate fitting.
//! - [`lowerbound`]: the lower-bound experiment on the hard instance.
//! - [`cli`]: the experiment runner behind the `gensmooth` binary.
//!
//! ```
//! use gensmooth::objectives::make_quadratic;
//! use gensmooth::solvers::run_gd;
//! use gensmooth::tuner::tune_gd_convex;
//!
//! let obj = make_quadratic(2.0, 1).unwrap();
//! let params = tune_gd_convex(&obj, &[1.0]).unwrap();
//! assert_eq!(params.eta, 0.25);
//! let traj = run_gd(&obj, &[1.0], params.eta, 50, None).unwrap();
//! assert!(traj.last().f < 1e-12);
//! ```

// `!(a <= b)` is used on purpose so that NaN fails comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod lowerbound;
pub mod noise;
pub mod objectives;
pub mod smoothness;
pub mod solvers;
pub mod tuner;

pub use error::{Error, Result};
pub use objectives::{Convexity, DomainSpec, Objective};
pub use smoothness::EllFunction;
pub use solvers::{Record, StopReason, Trajectory};
pub use tuner::{Method, TunedParams};
