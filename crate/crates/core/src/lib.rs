//! Design and evaluation of non-orthogonal unimodular sequence sets for
//! grant-free random access.
//!
//! - [`seqcore`]: unitary generators, partial unitary matrices, masks and
//!   correlation metrics.
//! - [`papr`]: oversampled PAPR evaluation and its summaries.
//! - [`ga`]: the two-stage genetic design (row subsampling, then masking).
//! - [`baselines`]: Gaussian, MUSA and prime-length Zadoff-Chu reference sets.
//! - [`cssim`]: MMV access simulation with SOMP-based activity detection and
//!   channel estimation.

pub mod baselines;
pub mod cssim;
pub mod error;
pub mod ga;
pub mod papr;
pub mod rng;
pub mod seqcore;

pub use error::{Error, Result};
pub use num_complex::Complex64;
