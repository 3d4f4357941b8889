//! Reconstruction of bandlimited periodic signals from nonuniform generalized samples.

pub mod encoders;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod linalg;
pub mod multichannel;
pub mod operators;
pub mod quad;
pub mod recon;
pub mod signal;
pub mod special;

pub use error::{Error, Result};
