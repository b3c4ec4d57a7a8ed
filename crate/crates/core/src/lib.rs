//! Core algorithms for mapping overlit regions of fisheye luminance
//! renderings onto a building facade.
//!
//! The crate is organized around the stages of the analysis pipeline:
//!
//! 1. [`raster`] — calibrated greyscale images and the image-processing
//!    chain: bilateral denoising, luminance binarization, time-frequency
//!    aggregation, majority downsampling, and red-overlay composition.
//! 2. [`projection`] — the viewing frame built from eye/target points,
//!    the equidistant fisheye mapping from pixels to unit directions on
//!    the view hemisphere, and ray/plane intersection producing
//!    facade-local pixel footprints.
//! 3. [`facade`] — the world-space facade rectangle, rasterization of
//!    projected footprints onto a cell grid, multi-view overlap counts,
//!    and outline extraction as closed polygons.
//! 4. [`oracle`] — a synthetic fisheye renderer implementing the inverse
//!    mapping from first principles, used as ground truth in round-trip
//!    tests, plus seeded Gaussian noise injection.
//!
//! All operations are pure functions of their inputs; images and grids
//! are plain owned buffers, so batch stages can run in parallel from the
//! caller's side without shared state.
//!
//! The crate is `no_std`-compatible (requires `alloc`). Float math falls
//! back to `libm` when the `std` feature is disabled.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("lumamap-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod facade;
pub(crate) mod math;
pub mod oracle;
pub mod projection;
pub mod raster;
