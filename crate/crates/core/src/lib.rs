//! Vessel morphometry and segmentation-bias analysis.
//!
//! The crate measures centerline tortuosity of binary vessel segmentations
//! and quantifies how much a segmentation model biases that measurement:
//!
//! * [`raster`], [`io`]: image, mask and stack types with PNG I/O.
//! * [`segment`]: classic Gaussian + adaptive-threshold segmenter.
//! * [`skeleton`]: topology-preserving thinning and graph decomposition.
//! * [`tortuosity`]: regression-residual tortuosity maps.
//! * [`elastic`]: elastic-deformation augmentation.
//! * [`metrics`]: IoU, Dice, relative IoU / tortuosity, repetition schedule.
//! * [`synth`]: synthetic vessel phantoms with analytic oracles.
//! * [`harness`]: dataset preparation, backend protocol and fine-tuning sweeps.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod components;
pub mod elastic;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod raster;
pub mod rng;
pub mod segment;
pub mod skeleton;
pub mod stats;
pub mod synth;
pub mod tortuosity;

pub use elastic::{augment_pair, make_field, warp_image, warp_mask, DisplacementField, ElasticParams};
pub use error::{Error, Result};
pub use raster::{max_intensity_projection, BinaryMask, GrayImage, ImageStack, Pixel, Spacing};
pub use metrics::{dice, iou, relative_iou, relative_tortuosity, repetitions, LabelSet, TortuositySet};
pub use rng::Rng;
pub use segment::{segment, SegmenterParams};
pub use skeleton::{decompose, skeletonize, Segment, Skeleton, SkeletonGraph};
pub use tortuosity::{image_tortuosity, tortuosity_map, Regression, TortuosityMap, TortuosityParams};
