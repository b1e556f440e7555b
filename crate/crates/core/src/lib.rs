//! Lane-change behavior classification from forward-camera frames.
//!
//! The pipeline samples a fixed region ahead of the vehicle, turns it into
//! either a stacked Canny edge vector or a cell HoG descriptor, optionally
//! reduces it with PCA, and classifies it with a cascade of binary C-SVMs
//! (Known/Unknown, Keep/Change, Left/Right).

pub mod dataio;
pub mod error;
pub mod eval;
pub mod features;
pub mod imaging;
pub mod linalg;
pub mod pca;
pub mod pipeline;
pub mod scale;
pub mod svm;

pub use error::{Error, Result};
pub use features::{BehaviorLabel, FeatureKind, FeatureVector, HogParams, Rect, RoiSpec};
pub use imaging::{CannyParams, GrayImage, RgbImage};
