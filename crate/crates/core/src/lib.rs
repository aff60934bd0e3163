//! Variational polynomial approximations of the time-evolution operator
//! `exp(-iHt)` and their use as a non-perturbative correction to degenerate
//! perturbation theory.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] dense Hermitian linear algebra, moments, exact propagators
//!   and the `l2` distance used by every benchmark.
//! * [`propagator`] Taylor, Chebyshev–Bessel (KPM), variational, closed-form
//!   and residual-action approximants.
//! * [`downfold`] generator pseudoinverse, adjoint-superoperator moments and
//!   effective Hamiltonians.
//! * [`models`] AB bilayer graphene and the Hubbard chain, with the sweeps
//!   that compare standard and improved effective models.
//! * [`bench`] seeded random-matrix ensembles and aggregated distance curves.

pub mod bench;
pub mod bessel;
pub mod downfold;
pub mod ensemble;
pub mod error;
pub mod models;
pub mod ode;
pub mod propagator;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{HermitianOperator, MomentTable, PropagatorMatrix, Method, Spectrum};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
