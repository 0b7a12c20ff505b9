//! Visible-light pupillometry toolkit.
//!
//! Trains and evaluates an encoder-decoder network that predicts a pupil
//! segmentation mask and the five parameters of the pupil's elliptical
//! boundary in one forward pass, alongside the classical two-step baseline
//! (segment, then fit an ellipse). A pupillogram analyzer turns time-varying
//! ellipse parameters into pupillary light reflex metrics.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `pupilkit` binary for the batch-oriented command-line interface.

pub mod geometry;

use ndarray::{Array2, Array3};

/// 8-bit RGB image, `height x width x 3`.
pub type RgbImage = Array3<u8>;

/// Binary mask, `height x width`, values 0 or 1.
pub type Mask = Array2<u8>;
