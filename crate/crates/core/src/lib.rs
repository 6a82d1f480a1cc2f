//! Model-agnostic two-stage vision pipeline framework: a concurrent
//! detect-then-segment runtime with bounded-queue handoff and a
//! sequential baseline, detection/segmentation evaluation metrics,
//! image-condition classification, dataset audit tools, and a
//! deterministic synthetic fixture generator.

pub mod condition;
pub mod dataset;
pub mod error;
pub mod fixture;
pub mod frame;
pub mod geometry;
pub mod manifest;
pub mod mask;
pub mod metrics;
pub mod pipeline;
pub mod pnm;
pub mod predictions;

pub use error::{Error, Result};
pub use frame::Frame;
pub use geometry::{box_area, clamp_box, BoundingBox, Detection, PixelRect};
pub use manifest::{parse_manifest, serialize_manifest, AnnotationRecord, Manifest, Split};
pub use mask::{mask_to_global, BitRaster, MaskRaster};
