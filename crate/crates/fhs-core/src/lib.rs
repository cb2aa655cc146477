//! Numerical ground states for fractional Hamiltonian systems.
//!
//! This crate discretizes the one-dimensional system
//!
//! ```text
//! -D_right^a (D_left^a u)(t) - lambda L(t) u(t) + grad W(t, u(t)) = 0,   u: R -> R^n,
//! ```
//!
//! with order `a` in (1/2, 1), a positive semi-definite matrix weight `L`
//! that vanishes on a core interval, and a superquadratic potential `W`.
//! Ground states are computed by minimizing the energy functional over the
//! Nehari manifold, via Sobolev-gradient descent on the unit sphere of the
//! weighted energy space. The `concentration` module sweeps the parameter
//! `lambda` and tracks localization of the minimizer onto the core interval,
//! where it approaches the ground state of the Dirichlet boundary value
//! problem.
//!
//! Modules follow the pipeline:
//!
//! * [`grid`] - uniform meshes and vector-valued nodal functions,
//! * [`fracops`] - Grunwald-Letnikov derivatives, the stiffness form, and an
//!   FFT Fourier-multiplier oracle,
//! * [`spaces`] - norms, weighted inner products, embedding-constant
//!   estimation,
//! * [`potentials`] - built-in potential/weight families and hypothesis
//!   validators,
//! * [`nehari`] - fibering maps, Nehari projection, sphere-constrained
//!   minimization,
//! * [`solver`] - problem assembly and end-to-end ground-state computation,
//! * [`concentration`] - the large-`lambda` sweep experiment.
//!
//! All operators are pure functions of immutable data. With the default
//! `parallel` feature, multistart solves, hypothesis validation, and the
//! Cholesky factorization fan out over rayon; disabling the feature yields
//! a fully sequential build with identical results.

pub mod concentration;
pub mod error;
pub mod exec;
pub mod fracops;
pub mod gamma;
pub mod grid;
pub mod linalg;
pub mod nehari;
pub mod potentials;
pub mod solver;
pub mod spaces;

mod toeplitz;

pub use error::{FhsError, Result};
pub use exec::ExecMode;
pub use fracops::{FracOrder, FracStiffness, OpSide};
pub use grid::{Grid1D, GridFunction};
