//! Low-rank matrix factorization over the max-times (subtropical) algebra.
//!
//! A nonnegative matrix `A` is approximated by `B ⊠ C` with
//! `(B ⊠ C)_ij = max_s B_is C_sj`. Factors are built one rank-1 block at a
//! time by [`equator::Equator`], using either [`capricorn::Capricorn`]
//! (discrete, flipping noise) or [`cancer::Cancer`] (continuous noise) to
//! propose each block.
//!
//! ```
//! use maxtimes::{factorize, FactorizeOptions, NonNegMatrix};
//!
//! let a = NonNegMatrix::outer(&[1.0, 0.5, 0.0], &[0.2, 0.8, 0.4]).unwrap();
//! let (f, _trace) = factorize(&a, &FactorizeOptions::capricorn(1)).unwrap();
//! assert!(f.error < 1e-12);
//! ```

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cancer;
pub mod capricorn;
pub mod equator;
pub mod error;
pub mod eval;
pub mod factorize;
pub mod matrix;
pub mod objective;
pub mod oracle;
pub mod poly;
pub mod synth;

pub use cancer::{Cancer, CancerParams};
pub use capricorn::{Capricorn, CapricornParams};
pub use equator::{Block, BlockUpdater, Equator, EquatorTrace, Factorization};
pub use error::{Error, Result};
pub use factorize::{factorize, Algorithm, FactorizeOptions};
pub use matrix::{
    maxtimes_product, maxtimes_product_excluding, BinaryMatrix, NonNegMatrix, ObservationMask,
    PatternMatrix,
};
pub use objective::{relative_frobenius, AdditiveObjective};
