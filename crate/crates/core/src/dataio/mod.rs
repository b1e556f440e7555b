//! Dataset formats: LibSVM sparse files, label files, synthetic scenes.

pub mod labels;
pub mod libsvm;
pub mod synth;

pub use labels::{append_record, LabelRecord, LabelStore};
pub use libsvm::{densify, parse_libsvm, sparsify, SparseSample};
