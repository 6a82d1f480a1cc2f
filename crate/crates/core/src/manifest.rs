//! Ground-truth manifests: record types and JSON (de)serialization.
//!
//! Wire format:
//!
//! ```json
//! {
//!   "split": "train",
//!   "records": [
//!     {
//!       "image_id": "img_00001",
//!       "file": "images/img_00001.pgm",
//!       "width": 1920, "height": 1080,
//!       "group_id": "vid_0007",
//!       "capture_period": "day",
//!       "gt_boxes": [[100.0, 120.0, 340.5, 300.0]]
//!     }
//!   ]
//! }
//! ```
//!
//! `capture_period` and `condition_tags` are optional; coordinates may be
//! fractional. Boxes are clamped to the image bounds on parse, with the
//! number of clamped boxes reported as warnings.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::condition::ConditionTags;
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapturePeriod {
    Day,
    DuskDawn,
    Night,
}

/// One annotated image: bounds, capture group, and ground-truth boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRecord {
    pub image_id: String,
    /// Path relative to the manifest's image directory.
    pub file: String,
    pub width: u32,
    pub height: u32,
    /// Video/sequence identifier; the unit of split assignment.
    pub group_id: String,
    pub gt_boxes: Vec<BoundingBox>,
    pub condition_tags: Option<ConditionTags>,
    pub capture_period: Option<CapturePeriod>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub split: Split,
    pub records: Vec<AnnotationRecord>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Result of parsing: the validated manifest plus the number of
/// ground-truth boxes that had to be clamped into image bounds.
#[derive(Debug, Clone)]
pub struct ParsedManifest {
    pub manifest: Manifest,
    pub clamp_warnings: usize,
}

#[derive(Serialize, Deserialize)]
struct ManifestDoc {
    split: Split,
    records: Vec<RecordDoc>,
}

#[derive(Serialize, Deserialize)]
struct RecordDoc {
    image_id: String,
    file: String,
    width: i64,
    height: i64,
    group_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    capture_period: Option<CapturePeriod>,
    gt_boxes: Vec<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    condition_tags: Option<Vec<String>>,
}

pub fn parse_manifest(text: &str) -> Result<ParsedManifest> {
    let doc: ManifestDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;

    let mut seen = HashSet::new();
    let mut clamp_warnings = 0usize;
    let mut records = Vec::with_capacity(doc.records.len());
    for rec in doc.records {
        if rec.width < 1 || rec.height < 1 {
            return Err(Error::validation(format!(
                "record `{}`: dimensions {}x{} must be positive",
                rec.image_id, rec.width, rec.height
            )));
        }
        if !seen.insert(rec.image_id.clone()) {
            return Err(Error::validation(format!(
                "duplicate image_id `{}`",
                rec.image_id
            )));
        }
        let (w, h) = (rec.width as u32, rec.height as u32);
        let mut gt_boxes = Vec::with_capacity(rec.gt_boxes.len());
        for raw in &rec.gt_boxes {
            let b = BoundingBox::new(raw[0], raw[1], raw[2], raw[3]).map_err(|e| {
                Error::validation(format!("record `{}`: {e}", rec.image_id))
            })?;
            let clamped = b.clamp(w, h);
            if clamped != b {
                clamp_warnings += 1;
            }
            gt_boxes.push(clamped);
        }
        let condition_tags = rec
            .condition_tags
            .map(|tags| ConditionTags::from_names(&tags))
            .transpose()
            .map_err(|e| Error::validation(format!("record `{}`: {e}", rec.image_id)))?;
        records.push(AnnotationRecord {
            image_id: rec.image_id,
            file: rec.file,
            width: w,
            height: h,
            group_id: rec.group_id,
            gt_boxes,
            condition_tags,
            capture_period: rec.capture_period,
        });
    }

    Ok(ParsedManifest {
        manifest: Manifest {
            split: doc.split,
            records,
        },
        clamp_warnings,
    })
}

pub fn serialize_manifest(m: &Manifest) -> String {
    let doc = ManifestDoc {
        split: m.split,
        records: m
            .records
            .iter()
            .map(|r| RecordDoc {
                image_id: r.image_id.clone(),
                file: r.file.clone(),
                width: r.width as i64,
                height: r.height as i64,
                group_id: r.group_id.clone(),
                capture_period: r.capture_period,
                gt_boxes: r
                    .gt_boxes
                    .iter()
                    .map(|b| [b.x_min, b.y_min, b.x_max, b.y_max])
                    .collect(),
                condition_tags: r.condition_tags.as_ref().map(|t| t.names()),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("manifest serialization cannot fail")
}
