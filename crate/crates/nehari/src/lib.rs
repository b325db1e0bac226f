//! Fiber maps, nonlinear Rayleigh quotients and Nehari-manifold branch
//! solvers for parameter-dependent equations `P(u) + lambda T(u) - Q(u) = 0`
//! built from homogeneous potential operators.
//!
//! The toolkit works in layers:
//!
//! * [`fiber`] — exact scalar analysis of the one-dimensional fiber map
//!   `phi(t) = (A/p) t^p + (lambda B/gamma) t^gamma - (C/q) t^q`:
//!   classification into the three possible shapes, critical points, and the
//!   closed-form parameters at which the shape degenerates.
//! * [`model`] — discrete homogeneous triples `(P, T, Q)` with gradients on
//!   1D/2D Dirichlet grids (a Kirchhoff backend and a nonlinear-eigenvalue
//!   backend), plus a runtime verifier for the structural hypotheses.
//! * [`extremal`] — the extreme parameters `lambda0* < lambda*` as suprema of
//!   the nonlinear Rayleigh quotients, by projected gradient ascent on the
//!   H^1 sphere, with an independent Sobolev-quotient route for the Kirchhoff
//!   model and scaling laws for the eigenvalue model.
//! * [`solver`] — the two solution branches at fixed `lambda` via fibering
//!   reduction: project directions onto the Nehari set through the fiber
//!   roots and minimize the reduced energy over the sphere.
//! * [`bifurcation`] — parameter sweeps, the empirical turning point, fold
//!   continuation and non-existence probes; the data behind a bifurcation
//!   diagram.
//! * [`io`] / [`cli`] — plain-text config parsing, deterministic run
//!   manifests, CSV emission and the `fiber | extremal | solve | sweep |
//!   check` subcommands.
//!
//! Start with the runnable examples (`cargo run --example fiber_portrait`,
//! `bifurcation_diagram`, ...) for end-to-end walkthroughs of each layer.

pub mod bifurcation;
pub mod cli;
pub mod error;
pub mod extremal;
pub mod fiber;
pub mod io;
pub mod model;
mod optim;
pub mod solver;

pub use error::{Error, Result};
pub use extremal::OptimizerOptions;
