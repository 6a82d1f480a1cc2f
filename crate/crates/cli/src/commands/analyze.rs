//! `detseg analyze`: per-condition error breakdown at IoU 0.5.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use detseg_core::condition::{categorize, error_breakdown, ConditionThresholds, ImageEvalRecord};
use detseg_core::metrics::match_detections;

use crate::commands::{load_frame, load_manifest, load_predictions};
use crate::output::Format;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Ground-truth manifest JSON file.
    #[arg(long)]
    pub manifest: PathBuf,

    /// Directory the manifest's image paths are relative to.
    #[arg(long)]
    pub images: PathBuf,

    /// Predictions JSON file.
    #[arg(long)]
    pub predictions: PathBuf,

    /// Laplacian-variance blur cutoff.
    #[arg(long, default_value_t = 50.0)]
    pub blur_threshold: f64,

    /// Underexposure mean-intensity cutoff.
    #[arg(long, default_value_t = 40.0)]
    pub dark: f64,

    /// Overexposure mean-intensity cutoff.
    #[arg(long, default_value_t = 200.0)]
    pub bright: f64,

    /// Small-object area fraction.
    #[arg(long, default_value_t = 0.02)]
    pub small_object_frac: f64,

    /// Pairwise ground-truth IoU above which objects count as occluded.
    #[arg(long, default_value_t = 0.5)]
    pub occlusion_iou: f64,
}

pub fn execute(args: &AnalyzeArgs, format: Format) -> anyhow::Result<()> {
    let thresholds = ConditionThresholds {
        blur_laplacian_var: args.blur_threshold,
        dark_mean: args.dark,
        bright_mean: args.bright,
        small_object_area_frac: args.small_object_frac,
        occlusion_iou: args.occlusion_iou,
    };
    thresholds
        .validate()
        .map_err(|e| crate::fail_validation(e.to_string()))?;

    let manifest = load_manifest(&args.manifest)?;
    let predictions = load_predictions(&args.predictions)?;
    let known: std::collections::HashSet<&str> =
        manifest.records.iter().map(|r| r.image_id.as_str()).collect();
    let unknown: Vec<&str> = predictions
        .images
        .iter()
        .map(|p| p.image_id.as_str())
        .filter(|id| !known.contains(id))
        .collect();
    if !unknown.is_empty() {
        return Err(crate::fail_validation(format!(
            "predictions reference unknown image ids: {}",
            unknown.join(", ")
        )));
    }
    let by_image = predictions.by_image();

    let mut records = Vec::with_capacity(manifest.records.len());
    for (i, rec) in manifest.records.iter().enumerate() {
        let frame = load_frame(&args.images.join(&rec.file), i as u64)?;
        let tags = categorize(&frame, rec, &thresholds)?;
        let dets = by_image
            .get(rec.image_id.as_str())
            .map(|d| d.to_vec())
            .unwrap_or_default();
        let outcome = match_detections(&dets, &rec.gt_boxes, 0.5);
        records.push(ImageEvalRecord {
            tags,
            outcome,
            dets,
            gts: rec.gt_boxes.clone(),
        });
    }

    let rows = error_breakdown(&records);
    match format {
        Format::Json => {
            let doc = json!({
                "rows": rows.iter().map(|r| json!({
                    "condition": r.condition.as_str(),
                    "images": r.images,
                    "tp": r.true_positives,
                    "fp": r.false_positives,
                    "fn": r.false_negatives,
                    "precision": r.precision,
                    "recall": r.recall,
                    "map50": r.map50,
                })).collect::<Vec<_>>()
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("valid json"));
        }
        Format::Csv => {
            println!("condition,images,tp,fp,fn,precision,recall,map50");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{:.4},{:.4},{:.4}",
                    r.condition.as_str(),
                    r.images,
                    r.true_positives,
                    r.false_positives,
                    r.false_negatives,
                    r.precision,
                    r.recall,
                    r.map50
                );
            }
        }
    }
    Ok(())
}
