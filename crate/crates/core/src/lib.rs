//! Galerkin finite element solver for generalized Forchheimer flows of slightly
//! compressible fluids in the unit square:
//!
//! `ρ_t - ∇·(K(|∇ρ|)∇ρ) = f`, `K(|∇ρ|)∇ρ·ν + ψ = 0` on the boundary,
//!
//! where `K` is derived from a generalized polynomial law `g(s) = Σ aᵢ s^αᵢ`.
//! Space is discretized with continuous P1/P2 Lagrange elements on a structured
//! triangulation, time with backward Euler, and each step is solved by Picard
//! (or Newton) iteration.

pub mod analysis;
pub mod assembly;
pub mod cases;
pub mod cli;
pub mod config;
pub mod error;
pub mod fespace;
pub mod law;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use fespace::{l2_project, DensityField, FeSpace};
pub use law::GeneralizedPolynomial;
pub use mesh::Mesh;
pub use solver::{backward_euler_step, run_simulation, Linearization, RunReport, SolverConfig};
pub use sparse::CsrMatrix;
