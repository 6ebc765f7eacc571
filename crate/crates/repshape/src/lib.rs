//! Shape-space analysis of neural network representation matrices.
//!
//! A representation matrix stacks the responses of one network layer to M
//! probe inputs row-wise (M landmarks in N-dimensional unit space). This
//! crate embeds such matrices into Kendall shape space, where two
//! representations are identified whenever one can be superimposed on the
//! other by translation, rescaling, rotation, or reflection, and provides
//! the analyses that live on top of that embedding:
//!
//! - [`repstore`]: ingestion (npy/CSV), PCA reduction, experiment manifests
//! - [`shape`]: preshapes, orthogonal alignment, Riemannian shape distance,
//!   kernel/Bures equivalence, pairwise distance matrices
//! - [`geodesic`]: great-circle geodesics, tangent vectors, trajectory angles
//! - [`landmark`]: per-landmark displacement fields and their PCA
//! - [`mds`]: classical MDS embedding of distance matrices plus PCA axes
//! - [`analyze`]: ridge LOO hyperparameter prediction, augmentation-vs-seed
//!   distance scales, soft-voting ensembles and angle/gain correlation
//! - [`synth`]: seeded synthetic trajectory generator used as a desk-scale
//!   oracle for the full pipeline

pub mod analyze;
pub mod error;
pub mod geodesic;
pub mod landmark;
pub mod mds;
pub mod npy;
pub mod repstore;
pub mod shape;
pub mod synth;

mod linalg;

pub use error::{Result, ShapeError};

// Matrices appear throughout the public API; re-export the crate so
// downstream users stay version-aligned.
pub use nalgebra;
