//! noetherlab: a workbench for the symmetry structure and conservation laws
//! of the one-dimensional continuum equation
//!
//! ```text
//! phi_tt + G(phi_s) phi_ss - H(phi) = 0
//! ```
//!
//! in mass Lagrangian coordinates `(t, s)`, with `x = phi(t, s)`,
//! `rho = 1/phi_s` and `u = phi_t` giving the Eulerian picture.  Particular
//! choices of `G` and `H` are shallow-water and polytropic-gas models.
//!
//! The crate has four layers:
//!
//! * [`expr`] — a small symbolic kernel: jet-space expression trees, normal
//!   form, partial/total derivatives, substitution, and a structural +
//!   numeric zero test;
//! * [`model`] — the classified `G`/`H` families, the Lagrangian
//!   `L = phi_t^2/2 + g(phi_s) + h(phi)` and its Euler-Lagrange residual,
//!   and the Eulerian system;
//! * [`symmetry`] and [`noether`] — Lie point generators, second
//!   prolongation, admitted-symmetry verification, the classification
//!   catalog as data, the equivalence group, Noether currents and their
//!   Eulerian images;
//! * [`solver`] — a velocity-Verlet mass-grid integrator with conservation
//!   monitors and Eulerian field extraction.
//!
//! Every capability is demonstrated by a runnable example under
//! `examples/`; the `noetherlab` binary wires the same entry points into
//! `verify-symmetries`, `verify-currents`, `derive-current`, `simulate`
//! and `report` subcommands.

pub mod cli;
pub mod config;
pub mod expr;
pub mod model;
pub mod noether;
pub mod report;
pub mod rng;
pub mod solver;
pub mod symmetry;

pub use expr::{Expr, ExprError};
pub use rng::Srng;
