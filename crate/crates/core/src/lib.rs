//! Two-parameter rectangular matrix pencils `(λ₀A₀ + λ₁A₁ + λ₂A₂)x = 0`.
//!
//! The problem is inflated to Kronecker commutator pencils, deflated to the
//! much smaller Kronecker determinants `Γ₀, Γ₁, Γ₂`, and solved either as a
//! commuting joint eigenproblem (`m = n+1`) or as simultaneous rectangular
//! pencils. Every emitted solution is residual-verified against the input.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod kron_structure;
pub mod linalg_core;
pub mod operators;
pub mod oracle;
pub mod pencil_solvers;
pub mod random;
pub mod scalar;
pub mod svd;
pub mod two_param_solver;

use nalgebra::{Complex, DMatrix, DVector};

pub use config::{PathChoice, SolverConfig};
pub use error::{Error, Result};
pub use linalg_core::PencilProblem;
pub use operators::{DeterminantTriple, Scaling};

/// Complex double.
pub type C64 = Complex<f64>;
/// Dense complex matrix over the real type `R`.
pub type CMatrix<R = f64> = DMatrix<Complex<R>>;
/// Dense complex vector over the real type `R`.
pub type CVector<R = f64> = DVector<Complex<R>>;
/// Problem with complex double entries.
pub type Problem64 = PencilProblem<C64>;
/// Problem with integer entries, for exact `Γ` tables.
pub type IntProblem = PencilProblem<i64>;
