//! `detseg metrics`: detection-quality table for a predictions file.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use detseg_core::metrics::{map_suite, map_sweep_50_95, match_detections, prf1, EvalImage, MatchOutcome};

use crate::commands::{load_manifest, load_predictions};
use crate::output::Format;

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Predictions JSON file.
    #[arg(long)]
    pub predictions: PathBuf,

    /// Ground-truth manifest JSON file.
    #[arg(long)]
    pub manifest: PathBuf,

    /// Add a `map50_95` column: AP averaged over IoU 0.50..0.95 in 0.05
    /// steps, the sweep-style alternative to the single-threshold columns.
    #[arg(long)]
    pub coco_sweep: bool,
}

pub fn execute(args: &MetricsArgs, format: Format) -> anyhow::Result<()> {
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
    let images: Vec<EvalImage> = manifest
        .records
        .iter()
        .map(|rec| EvalImage {
            dets: by_image.get(rec.image_id.as_str()).map(|d| d.to_vec()).unwrap_or_default(),
            gts: rec.gt_boxes.clone(),
        })
        .collect();

    let suite = map_suite(&images)
        .map_err(|e| crate::fail_validation(format!("evaluating {}: {e}", args.predictions.display())))?;
    let mut total = MatchOutcome::default();
    for im in &images {
        total.absorb(&match_detections(&im.dets, &im.gts, 0.5));
    }
    let (precision, recall, f1) = prf1(&total);
    let sweep = if args.coco_sweep {
        Some(map_sweep_50_95(&images).map_err(|e| crate::fail_validation(e.to_string()))?)
    } else {
        None
    };

    match format {
        Format::Json => {
            let mut row = json!({
                "model": predictions.model,
                "map50": suite.map50,
                "map75": suite.map75,
                "map95": suite.map95,
                "precision": precision,
                "recall": recall,
                "f1": f1,
            });
            if let Some(sweep) = sweep {
                row["map50_95"] = json!(sweep);
            }
            let doc = json!({ "rows": [row] });
            println!("{}", serde_json::to_string_pretty(&doc).expect("valid json"));
        }
        Format::Csv => {
            let mut header = "model,map50,map75,map95,precision,recall,f1".to_string();
            let mut row = format!(
                "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
                predictions.model, suite.map50, suite.map75, suite.map95, precision, recall, f1
            );
            if let Some(sweep) = sweep {
                header.push_str(",map50_95");
                row.push_str(&format!(",{sweep:.4}"));
            }
            println!("{header}");
            println!("{row}");
        }
    }
    Ok(())
}
