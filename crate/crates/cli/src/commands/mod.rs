pub mod analyze;
pub mod bench;
pub mod dataset;
pub mod fixture;
pub mod metrics;
pub mod run;

use std::path::Path;

use anyhow::Context;

use crate::fail_runtime;
use detseg_core::frame::Frame;
use detseg_core::manifest::{parse_manifest, Manifest};
use detseg_core::predictions::{parse_predictions, PredictionSet};

/// Load and validate a manifest file (exit 1 on any problem).
pub fn load_manifest(path: &Path) -> anyhow::Result<Manifest> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    let parsed = parse_manifest(&text)
        .map_err(|e| crate::fail_validation(format!("{}: {e}", path.display())))?;
    if parsed.clamp_warnings > 0 {
        eprintln!(
            "warning: {} ground-truth boxes clamped to image bounds in {}",
            parsed.clamp_warnings,
            path.display()
        );
    }
    Ok(parsed.manifest)
}

pub fn load_predictions(path: &Path) -> anyhow::Result<PredictionSet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading predictions {}", path.display()))?;
    parse_predictions(&text).map_err(|e| crate::fail_validation(format!("{}: {e}", path.display())))
}

/// Read one raster image as a frame; failures here are runtime errors
/// (exit 2) because they abort a job mid-flight.
pub fn load_frame(path: &Path, id: u64) -> anyhow::Result<Frame> {
    let img = detseg_core::pnm::read(path)
        .map_err(|e| fail_runtime(format!("image {}: {e}", path.display())))?;
    Frame::new(id, 0.0, img.width, img.height, img.channels, img.pixels, "file")
        .map_err(|e| fail_runtime(format!("image {}: {e}", path.display())))
}
