//! Segmentation of bright, roughly isotropic particles in grayscale images
//! with the starlet (isotropic undecimated wavelet) transform.
//!
//! Pipeline:
//!
//! 1. [`starlet`]: à trous decomposition into detail planes `w_1..w_L` and a
//!    smooth residual `c_L`, using the dilated B3-spline kernels of [`kernel`].
//! 2. [`segmentation`]: score map from the detail levels `j ≥ 3`,
//!    thresholding, and sweeps over the decomposition depth `L`.
//! 3. [`evaluation`]: confusion counts, precision/recall/accuracy/F1, and a
//!    color overlay against ground truth.
//!
//! [`io`] reads and writes PGM/PPM/PNG and CSV reports, [`synth`] generates
//! seeded test scenes with exact truth masks, and [`cli`] wires it together.
//!
//! Row loops and sweeps run on rayon when the `parallel` feature (on by
//! default) is enabled; results are bit-identical either way.

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod image;
pub mod io;
pub mod kernel;
pub mod par;
pub mod segmentation;
pub mod starlet;
pub mod synth;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use evaluation::{confusion, metrics, overlay, ConfusionCounts, Metrics, OverlayImage};
pub use image::{BinaryMask, Image};
pub use kernel::{b3_kernel_1d, dilated_kernel_2d, Kernel1D, Kernel2D};
pub use par::Execution;
pub use segmentation::{
    binarize, detail_band_map, detail_sum_map, score_map, segment, segment_with,
    select_optimal_level, sweep_levels, sweep_levels_with, ScoreKind, ScoreMap, SegmentOptions,
    Sweep, SweepConfig, SweepEntry, ThresholdPolicy,
};
pub use starlet::{max_level, mirror_pad, reconstruct, smooth, starlet_decompose, Decomposition};
pub use synth::{generate, LabeledSample, SynthParams};
