//! Classical red-blood-cell abnormality pipeline.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the whole
//! feature-based path: illumination normalisation and Otsu segmentation
//! ([`imaging`]), the fixed 124-entry feature vector ([`features`]),
//! SMOTE / NearMiss-2 resampling ([`resampling`]), a cost-sensitive RBF
//! SVM trained with SMO ([`classifier`]), cross-validation and
//! imbalance-aware metrics ([`evaluation`]) and ground-truth mask
//! construction from centre-point annotations ([`groundtruth`]).
//!
//! File formats, PNG decoding and the command line live in the
//! `hemo-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod classifier;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod groundtruth;
pub mod imaging;
pub mod pipeline;
pub mod resampling;
pub mod synthetic;

pub use error::{Error, Result};

/// Number of cell classes in the full labelling (normal + ten abnormal types).
pub const NUM_CLASSES: usize = 11;

/// Human-readable names for class ids `0..=10`.
pub const CLASS_NAMES: [&str; NUM_CLASSES] = [
    "Normal",
    "Microcyte",
    "Macrocyte",
    "Spherocyte",
    "Target",
    "Ovalocyte",
    "Stomatocyte",
    "Teardrop",
    "Burr",
    "Hypochromia",
    "Schistocyte",
];
