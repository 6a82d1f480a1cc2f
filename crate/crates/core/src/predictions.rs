//! Detection-predictions JSON consumed by the evaluation tooling.
//!
//! ```json
//! {
//!   "model": "detector-a",
//!   "predictions": [
//!     {"image_id": "img_00001",
//!      "boxes": [{"box": [10.0, 12.0, 40.0, 60.0], "score": 0.93, "class_id": 0}]}
//!   ]
//! }
//! ```
//!
//! The top-level `model` tag is optional and defaults to "model".

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Detection};

#[derive(Debug, Clone, PartialEq)]
pub struct ImagePredictions {
    pub image_id: String,
    pub dets: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub model: String,
    pub images: Vec<ImagePredictions>,
}

impl PredictionSet {
    pub fn by_image(&self) -> HashMap<&str, &[Detection]> {
        self.images
            .iter()
            .map(|p| (p.image_id.as_str(), p.dets.as_slice()))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct PredictionsDoc {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    model: Option<String>,
    predictions: Vec<ImageDoc>,
}

#[derive(Serialize, Deserialize)]
struct ImageDoc {
    image_id: String,
    boxes: Vec<BoxDoc>,
}

#[derive(Serialize, Deserialize)]
struct BoxDoc {
    #[serde(rename = "box")]
    coords: [f64; 4],
    score: f64,
    class_id: u32,
}

pub fn parse_predictions(text: &str) -> Result<PredictionSet> {
    let doc: PredictionsDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let mut seen = std::collections::HashSet::new();
    let mut images = Vec::with_capacity(doc.predictions.len());
    for img in doc.predictions {
        if !seen.insert(img.image_id.clone()) {
            return Err(Error::validation(format!(
                "duplicate image_id `{}` in predictions",
                img.image_id
            )));
        }
        let dets = img
            .boxes
            .into_iter()
            .map(|b| {
                let bbox = BoundingBox::new(b.coords[0], b.coords[1], b.coords[2], b.coords[3])?;
                Detection::new(bbox, b.score, b.class_id)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::validation(format!("image `{}`: {e}", img.image_id)))?;
        images.push(ImagePredictions {
            image_id: img.image_id,
            dets,
        });
    }
    Ok(PredictionSet {
        model: doc.model.unwrap_or_else(|| "model".to_string()),
        images,
    })
}

pub fn serialize_predictions(set: &PredictionSet) -> String {
    let doc = PredictionsDoc {
        model: Some(set.model.clone()),
        predictions: set
            .images
            .iter()
            .map(|img| ImageDoc {
                image_id: img.image_id.clone(),
                boxes: img
                    .dets
                    .iter()
                    .map(|d| BoxDoc {
                        coords: [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max],
                        score: d.score,
                        class_id: d.class_id,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("predictions serialization cannot fail")
}
