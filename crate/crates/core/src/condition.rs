//! Image-condition classification and the per-condition error breakdown.
//!
//! Images are flagged blurred / under- or overexposed / small-object /
//! occluded from fixed pixel and geometry thresholds; an image with no
//! flags is "normal". Tags are not exclusive: one image may land in
//! several condition buckets, and reports treat buckets as overlapping.

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{BoundingBox, Detection};
use crate::manifest::AnnotationRecord;
use crate::metrics::{self, EvalImage, MatchOutcome};

/// Classification thresholds. Defaults: Laplacian-variance blur cutoff 50,
/// mean-intensity cutoffs 40 (dark) and 200 (bright), small-object area
/// fraction 0.02, and pairwise ground-truth IoU 0.5 for occlusion.
/// Boundary values resolve to the non-extreme class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionThresholds {
    pub blur_laplacian_var: f64,
    pub dark_mean: f64,
    pub bright_mean: f64,
    pub small_object_area_frac: f64,
    pub occlusion_iou: f64,
}

impl Default for ConditionThresholds {
    fn default() -> Self {
        ConditionThresholds {
            blur_laplacian_var: 50.0,
            dark_mean: 40.0,
            bright_mean: 200.0,
            small_object_area_frac: 0.02,
            occlusion_iou: 0.5,
        }
    }
}

impl ConditionThresholds {
    pub fn validate(&self) -> Result<()> {
        if self.dark_mean >= self.bright_mean {
            return Err(Error::validation(format!(
                "dark threshold {} must be below bright threshold {}",
                self.dark_mean, self.bright_mean
            )));
        }
        if !(0.0 < self.small_object_area_frac && self.small_object_area_frac < 1.0) {
            return Err(Error::validation(
                "small-object area fraction must be in (0, 1)",
            ));
        }
        if !(0.0 < self.occlusion_iou && self.occlusion_iou <= 1.0) {
            return Err(Error::validation("occlusion IoU must be in (0, 1]"));
        }
        Ok(())
    }
}

/// The named conditions, plus `Normal` for images with no flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    Blurred,
    Underexposed,
    Overexposed,
    SmallObject,
    Occluded,
    Normal,
}

impl Condition {
    /// Fixed report order.
    pub const ALL: [Condition; 6] = [
        Condition::Blurred,
        Condition::Underexposed,
        Condition::Overexposed,
        Condition::SmallObject,
        Condition::Occluded,
        Condition::Normal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Blurred => "blurred",
            Condition::Underexposed => "underexposed",
            Condition::Overexposed => "overexposed",
            Condition::SmallObject => "small_object",
            Condition::Occluded => "occluded",
            Condition::Normal => "normal",
        }
    }
}

/// Flag set produced by [`categorize`]. Under- and overexposed are
/// mutually exclusive by construction; everything else may combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConditionTags {
    pub blurred: bool,
    pub underexposed: bool,
    pub overexposed: bool,
    pub small_object: bool,
    pub occluded: bool,
}

impl ConditionTags {
    pub fn is_normal(&self) -> bool {
        !(self.blurred || self.underexposed || self.overexposed || self.small_object || self.occluded)
    }

    pub fn has(&self, c: Condition) -> bool {
        match c {
            Condition::Blurred => self.blurred,
            Condition::Underexposed => self.underexposed,
            Condition::Overexposed => self.overexposed,
            Condition::SmallObject => self.small_object,
            Condition::Occluded => self.occluded,
            Condition::Normal => self.is_normal(),
        }
    }

    /// Conditions this image contributes to (`normal` when flag-free).
    pub fn buckets(&self) -> Vec<Condition> {
        Condition::ALL.iter().copied().filter(|c| self.has(*c)).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.buckets()
            .into_iter()
            .filter(|c| *c != Condition::Normal)
            .map(|c| c.as_str().to_string())
            .collect()
    }

    pub fn from_names(names: &[String]) -> Result<Self> {
        let mut tags = ConditionTags::default();
        for n in names {
            match n.as_str() {
                "blurred" => tags.blurred = true,
                "underexposed" => tags.underexposed = true,
                "overexposed" => tags.overexposed = true,
                "small_object" => tags.small_object = true,
                "occluded" => tags.occluded = true,
                other => {
                    return Err(Error::validation(format!("unknown condition tag `{other}`")))
                }
            }
        }
        if tags.underexposed && tags.overexposed {
            return Err(Error::validation(
                "underexposed and overexposed are mutually exclusive",
            ));
        }
        Ok(tags)
    }
}

/// 1-channel copy of a frame. RGB collapses through the usual luma
/// weights `0.299 R + 0.587 G + 0.114 B`, rounded to nearest integer;
/// grayscale input is returned unchanged.
pub fn to_grayscale(f: &Frame) -> Frame {
    if f.channels == 1 {
        return f.clone();
    }
    let mut pixels = Vec::with_capacity(f.pixel_count());
    for chunk in f.pixels.chunks_exact(3) {
        let y = 0.299 * chunk[0] as f64 + 0.587 * chunk[1] as f64 + 0.114 * chunk[2] as f64;
        pixels.push(y.round() as u8);
    }
    Frame {
        channels: 1,
        pixels,
        ..f.clone()
    }
}

/// Population variance of the 4-neighbor Laplacian over interior pixels
/// (border excluded, signed arithmetic). Needs at least a 3x3 image.
pub fn laplacian_variance(f: &Frame) -> Result<f64> {
    if f.channels != 1 {
        return Err(Error::dimension("laplacian variance expects a 1-channel frame"));
    }
    if f.width < 3 || f.height < 3 {
        return Err(Error::dimension(format!(
            "image {}x{} too small for a 3x3 kernel",
            f.width, f.height
        )));
    }
    let mut sum = 0i64;
    let mut sum_sq = 0i64;
    let mut count = 0u64;
    for y in 1..f.height - 1 {
        for x in 1..f.width - 1 {
            let c = f.gray(x, y) as i64;
            let resp = f.gray(x, y - 1) as i64
                + f.gray(x, y + 1) as i64
                + f.gray(x - 1, y) as i64
                + f.gray(x + 1, y) as i64
                - 4 * c;
            sum += resp;
            sum_sq += resp * resp;
            count += 1;
        }
    }
    let mean = sum as f64 / count as f64;
    Ok(sum_sq as f64 / count as f64 - mean * mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exposure {
    Underexposed,
    Overexposed,
    Normal,
}

/// Exposure from mean intensity; boundary values count as normal.
pub fn exposure_class(f: &Frame, t: &ConditionThresholds) -> Exposure {
    let mean = mean_intensity(f);
    if mean < t.dark_mean {
        Exposure::Underexposed
    } else if mean > t.bright_mean {
        Exposure::Overexposed
    } else {
        Exposure::Normal
    }
}

pub fn mean_intensity(f: &Frame) -> f64 {
    let gray;
    let g = if f.channels == 1 {
        f
    } else {
        gray = to_grayscale(f);
        &gray
    };
    g.pixels.iter().map(|&p| p as f64).sum::<f64>() / g.pixels.len() as f64
}

/// True when any ground-truth box covers less than the small-object
/// fraction of the image area.
pub fn small_object_flag(gt_boxes: &[BoundingBox], image_w: u32, image_h: u32, t: &ConditionThresholds) -> bool {
    let image_area = image_w as f64 * image_h as f64;
    gt_boxes
        .iter()
        .any(|b| b.area() / image_area < t.small_object_area_frac)
}

/// True when some pair of distinct ground-truth boxes overlaps with IoU
/// strictly above the occlusion threshold.
pub fn occlusion_flag(gt_boxes: &[BoundingBox], t: &ConditionThresholds) -> bool {
    for i in 0..gt_boxes.len() {
        for j in i + 1..gt_boxes.len() {
            if metrics::iou(&gt_boxes[i], &gt_boxes[j]) > t.occlusion_iou {
                return true;
            }
        }
    }
    false
}

/// Classify one image against its annotation record.
pub fn categorize(f: &Frame, rec: &AnnotationRecord, t: &ConditionThresholds) -> Result<ConditionTags> {
    if f.width != rec.width || f.height != rec.height {
        return Err(Error::dimension(format!(
            "frame {}x{} does not match record `{}` {}x{}",
            f.width, f.height, rec.image_id, rec.width, rec.height
        )));
    }
    let gray = to_grayscale(f);
    let blurred = laplacian_variance(&gray)? < t.blur_laplacian_var;
    let exposure = exposure_class(&gray, t);
    Ok(ConditionTags {
        blurred,
        underexposed: exposure == Exposure::Underexposed,
        overexposed: exposure == Exposure::Overexposed,
        small_object: small_object_flag(&rec.gt_boxes, rec.width, rec.height, t),
        occluded: occlusion_flag(&rec.gt_boxes, t),
    })
}

/// One image's evaluation inputs for the per-condition breakdown:
/// its tags, the IoU-0.5 match outcome, and the raw boxes for AP.
#[derive(Debug, Clone)]
pub struct ImageEvalRecord {
    pub tags: ConditionTags,
    pub outcome: MatchOutcome,
    pub dets: Vec<Detection>,
    pub gts: Vec<BoundingBox>,
}

/// Aggregated metrics for one condition bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionBucket {
    pub condition: Condition,
    pub images: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    /// AP at IoU 0.5 over the bucket's images; 0 when the bucket has no
    /// ground truth (consistent with the 0/0 conventions elsewhere).
    pub map50: f64,
}

/// Accumulate per-image outcomes into every condition bucket the image's
/// tags carry (plus `normal` for untagged images). Buckets overlap when
/// images carry multiple tags. Empty input yields an empty table; only
/// populated buckets are returned, in [`Condition::ALL`] order.
pub fn error_breakdown(per_image: &[ImageEvalRecord]) -> Vec<ConditionBucket> {
    let mut rows = Vec::new();
    for condition in Condition::ALL {
        let members: Vec<&ImageEvalRecord> = per_image
            .iter()
            .filter(|rec| rec.tags.has(condition))
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut total = MatchOutcome::default();
        for rec in &members {
            total.absorb(&rec.outcome);
        }
        let (precision, recall, _) = metrics::prf1(&total);
        let eval_images: Vec<EvalImage> = members
            .iter()
            .map(|rec| EvalImage {
                dets: rec.dets.clone(),
                gts: rec.gts.clone(),
            })
            .collect();
        let map50 = metrics::average_precision(&eval_images, 0.5).unwrap_or(0.0);
        rows.push(ConditionBucket {
            condition,
            images: members.len(),
            true_positives: total.true_positives,
            false_positives: total.false_positives,
            false_negatives: total.false_negatives,
            precision,
            recall,
            map50,
        });
    }
    rows
}
