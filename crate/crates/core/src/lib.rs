//! Spectral blending of local and global temporal attention for extending
//! short-clip video latents to long sequences.
//!
//! - [`tensor`]: tensors, the VLT1 file format, seeded sampling
//! - [`spectral`]: 3-D transforms, Gaussian low-pass filter, band masks, blend
//! - [`attention`]: global / windowed / sliding-window temporal attention and
//!   the blended layer
//! - [`analysis`]: band-energy reports and flicker
//! - [`harness`]: toy denoiser, noise rescheduling, benchmarks
//! - [`cli`]: command implementations behind the `spectralblend` binary

pub mod analysis;
pub mod attention;
pub mod cli;
pub mod error;
pub mod harness;
pub mod spectral;
pub mod tensor;

pub use error::{Error, ErrorClass, Result};
