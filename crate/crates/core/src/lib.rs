//! Analytic federated learning on frozen embeddings.
//!
//! Each client solves a regularized least-squares problem in closed form and
//! shares only its weight matrix and regularized Gram matrix. The server fuses
//! client weights pairwise with an exact aggregation law, then analytically
//! strips the accumulated regularization. The fused weight equals the weight
//! trained on the pooled data, for any partition of that data — which is what
//! the test suites in this crate verify, down to prediction-level equality.
//!
//! Modules:
//! * [`linalg`] — pseudoinverse, SPD solves, Gram matrices, block identities.
//! * [`data`] — datasets, one-hot labels, non-IID partitioners, embedding files.
//! * [`afl`] — closed-form local training, pairwise aggregation, restoration.
//! * [`baseline`] — a minimal FedAvg linear head for contrast.
//! * [`harness`] — experiment configs, metrics, reports, sweeps, deviation tables.

pub mod afl;
pub mod baseline;
pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::Matrix;
