//! Complex sequence algebra: unitary generators, row subsampling, common
//! masks, correlation metrics and descriptor-based regeneration.
//!
//! Indices are 0-based throughout. Subsampled rows appear in ascending index
//! order, which fixes the PAPR of every column for a given descriptor.

mod matrix;
mod metrics;
mod sequence;
mod unitary;

pub use matrix::ComplexMatrix;
pub use metrics::{
    coherence, coherence_of, gram, gram_matrix, welch_bound, welch_cost_f1, welch_cost_of,
};
pub use sequence::{
    apply_mask, mask_matrix, reconstruct, subsample, subsample_matrix, Descriptor, IndexSet,
    MaskSequence, SequenceSet,
};
pub use unitary::{fourier_matrix, zc_matrix, UnitaryFamily, UnitaryKind, UnitaryMatrix};
