//! Reference-plane vehicle speed estimation.
//!
//! A stationary camera is calibrated to the road surface with a planar
//! homography. A license-plate corner is tracked across frames, projected
//! onto the road, and the resulting projected speed is corrected for the
//! height of the plate above the road, either from a known mounting height
//! or from the foreshortening of the plate's top edge.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. Image
//! decoding, file formats and the command line live in the `roadspeed`
//! crate.
//!
//! Modules:
//!
//! * [`geometry`]: homogeneous points, homographies, normalized DLT.
//! * [`simulator`]: pinhole camera, synthetic scenarios, tracks and frames.
//! * [`detection`]: activity gating, color segmentation, plate
//!   classification, corner refinement and track association.
//! * [`ocr`]: glyph segmentation and a sigmoidal multilayer perceptron.
//! * [`speed`]: pairwise projected speeds, median, height correction.
//! * [`pipeline`]: per-frame plate processing and per-track reporting.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod detection;
mod error;
pub mod font;
pub mod geometry;
pub mod linalg;
pub mod math;
pub mod ocr;
pub mod pipeline;
pub mod raster;
pub mod simulator;
pub mod speed;

pub use error::{Error, Result};
pub use geometry::{Correspondence, HomogeneousPoint2, Homography, Point2};
pub use raster::{GrayImage, RgbImage};
