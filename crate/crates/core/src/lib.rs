//! Operator-algebraic toolkit for matrices annihilated by a one-variable
//! polynomial: canonical block-triangular forms built from nested kernels,
//! range and spectral projections, similarity-norm minimization over
//! block-diagonal ideals, and norm-controlled lifting of polynomial
//! relations across quotients of finite direct sums of matrix algebras.
//!
//! The crate is `no_std` (with `alloc`); all IO, serialization and CLI
//! plumbing lives in the companion `algop-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod blockalg;
pub mod cmatrix;
pub mod decomp;
pub mod error;
pub mod lifting;
pub mod linalg;
pub mod polynomial;
pub mod radius;
pub mod tol;

pub use blockalg::{BlockAlgebra, BlockElement, IdealChain, IdealSpec};
pub use cmatrix::{c, cre, CMatrix, C64};
pub use decomp::{NestedKernelFlag, StructureDecomposition, TriangularForm};
pub use error::Error;
pub use lifting::{Approximant, LiftCertificate, LiftProblem, LiftReport};
pub use polynomial::{RootFactor, RootedPolynomial};
pub use radius::{EpsSchedule, RadiusOptions, RadiusResult};
pub use tol::Tolerances;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
