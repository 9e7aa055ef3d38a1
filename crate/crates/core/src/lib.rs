//! Moving-silhouette extraction from fixed-camera frame sequences.
//!
//! Frames are reduced to the HSV Value plane and classified against one of
//! three interchangeable background models (frame differencing, a per-pixel
//! Gaussian, or an adaptive per-pixel Gaussian mixture), then cleaned with
//! binary morphology. A synthetic scene generator and a pixelwise evaluator
//! allow the approaches to be compared against exact ground truth.

pub mod bgmodels;
pub mod cli;
pub mod colorspace;
pub mod error;
pub mod imageio;
pub mod metrics;
pub mod morphology;
pub mod pipeline;
pub mod synthgen;

pub use error::{Error, Result};
