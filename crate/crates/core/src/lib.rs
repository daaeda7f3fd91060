//! Numerical laboratory for Hamiltonian PDEs with symmetry groups `{e}`, `ℝ` and `U(1)`.
//!
//! The crate implements four one-dimensional model systems (a string coupled to a
//! nonlinear point oscillator, a complex Klein–Gordon field with a U(1)-equivariant
//! point nonlinearity, the φ⁴ wave equation and the linear Schrödinger equation),
//! second-order conservative time steppers, a nonlinear eigenvalue solver for
//! stationary orbits and kinks, and diagnostics that measure global attraction to
//! the solitary manifold. Two further modules cover the quasiclassical electron gun
//! (ray tracing with action accumulation) and Fraunhofer diffraction with the screen
//! current density.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constants;
pub mod diagnostics;
pub mod diffraction;
pub mod energy;
pub mod error;
pub mod grid;
pub mod initial;
pub mod integrate;
pub mod linalg;
pub mod models;
pub mod poly;
pub mod quasiclassics;
pub mod report;
pub mod state;
pub mod stationary;

pub use constants::PhysConstants;
pub use energy::discrete_energy;
pub use error::{LabError, Result};
pub use grid::{make_grid, Grid1D};
pub use models::{ModelKind, ModelSpec, NonlinearityMode, NonlinearitySpec, Symmetry};
pub use report::ReportEnvelope;
pub use state::{Field, SimState, TraceSeries};

pub use num_complex::Complex64;
