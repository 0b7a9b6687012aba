//! Frequency-domain compression of vision-token feature grids.
//!
//! A vision encoder hands a language model N^2 feature vectors per image.
//! Their energy concentrates in low spatial frequencies, so an N x N x h
//! grid can be sent through a 2D DCT, cut down to its C x C low-frequency
//! corner, and inverse-transformed at size C -- turning N^2 tokens into
//! C^2 with no learned parameters. This crate provides:
//!
//! - [`tensor`]: the portable tensor file format plus grid/sequence
//!   reshaping;
//! - [`dct`]: type-II DCT and inverse, as a direct O(N^2) oracle and an
//!   FFT-based O(N log N) fast path, 1D and separable 2D;
//! - [`fft`]: the underlying complex FFT (radix-2 plus Bluestein);
//! - [`ffc`]: the compressor pipeline and its reports;
//! - [`spectrum`]: frequency-spectrum maps, energy-compaction statistics,
//!   and seeded synthetic feature generators;
//! - [`cost`]: FLOPs and KV-cache accounting for a full vision-language
//!   pipeline with and without compression;
//! - [`verify`]: self-checking property suites behind the CLI `verify`
//!   subcommand.

pub mod cost;
pub mod dct;
pub mod error;
pub mod fft;
pub mod ffc;
pub mod spectrum;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
