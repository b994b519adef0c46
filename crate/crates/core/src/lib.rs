//! Phase-plane analysis of radial self-similar profiles of the p-Laplace heat equation
//! `u_t = div(|∇u|^{p-2}∇u)` with `p > 2`.
//!
//! Profiles `w(r)` of `u = (±βt)^{-α/β} w((±βt)^{-1/β}|x|)` are studied through the
//! autonomous system `S` in `(τ, y, Y)` and its charts. The crate provides the vector
//! fields, an integrator that handles the Hölder locus `{Y = 0}`, shooting constructions of
//! the special trajectories, and the analysis layer (stationary points, cycles, the
//! connection function `φ`, the critical exponent `α_c` and regime reports).

pub mod analysis;
pub mod error;
pub mod integrate;
pub mod params;
pub mod systems;
pub mod trajectories;

pub use error::{Error, Result};
pub use params::{derive_constants, DerivedConstants, Eps, ProblemParams};
pub use systems::{Chart, ChartState, PhaseState, PointId, ProfileSample};
