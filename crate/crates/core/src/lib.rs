//! Mean-curvature boundary point detection on k-NN patches, curvature-based
//! dataset filtering, and the clustering pipelines built on top of it.
//!
//! The usual entry point is [`curvature::mcbp`], which scores every point of
//! a [`Dataset`] and flags the high-curvature ones. [`filter::partition`]
//! splits the data into smooth and boundary subsets, and [`cluster`] holds
//! k-means, HDBSCAN* and the filtered clustering strategies.

pub mod bench;
pub mod cluster;
pub mod curvature;
pub mod data;
pub mod error;
pub mod experiment;
pub mod filter;
pub mod knn;
pub mod laplacian;
pub mod linalg;
pub mod metrics;

pub use curvature::{mcbp, CurvatureReport};
pub use data::Dataset;
pub use error::{Error, Result};
pub use knn::NeighborGraph;
pub use linalg::DenseMatrix;
