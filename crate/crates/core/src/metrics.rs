//! Detection and segmentation evaluation: box IoU, CIoU loss, BCE, the
//! weighted composite detection loss, greedy detection matching,
//! precision/recall/F1, average precision with all-point envelope
//! integration, and confusion-matrix pixel metrics (mPLA, mIoU).
//!
//! Everything here is a pure function, safe for unconstrained parallel use.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Detection};
use crate::mask::BitRaster;

/// Probability clamp used by [`bce`] so perfect predictions stay finite.
pub const BCE_EPSILON: f64 = 1e-7;

/// Intersection-over-union of two boxes; 0 when the union has zero area.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let iy = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Complete-IoU loss: `1 - (IoU - rho^2/c^2 - alpha*v)` where `rho` is the
/// center distance, `c` the diagonal of the smallest enclosing box, and `v`
/// the aspect-ratio consistency term `(4/pi^2)(atan(wg/hg) - atan(w/h))^2`.
///
/// `atan(w/h)` is evaluated as `atan2(w, h)` so a zero height resolves to
/// the pi/2 limit; `alpha` resolves to 0 at the IoU = 1, v = 0 singularity.
pub fn ciou_loss(pred: &BoundingBox, gt: &BoundingBox) -> f64 {
    let iou_v = iou(pred, gt);

    let (pcx, pcy) = pred.center();
    let (gcx, gcy) = gt.center();
    let rho2 = (pcx - gcx).powi(2) + (pcy - gcy).powi(2);

    let enc_w = pred.x_max.max(gt.x_max) - pred.x_min.min(gt.x_min);
    let enc_h = pred.y_max.max(gt.y_max) - pred.y_min.min(gt.y_min);
    let c2 = enc_w * enc_w + enc_h * enc_h;
    let center_term = if c2 > 0.0 { rho2 / c2 } else { 0.0 };

    let v = (4.0 / (PI * PI))
        * (aspect_angle(gt.width(), gt.height()) - aspect_angle(pred.width(), pred.height()))
            .powi(2);
    let denom = (1.0 - iou_v) + v;
    let alpha = if denom > 0.0 { v / denom } else { 0.0 };

    1.0 - (iou_v - center_term - alpha * v)
}

/// `atan(w/h)` with the h = 0 limit resolved to pi/2 (and 0 for a point box).
fn aspect_angle(w: f64, h: f64) -> f64 {
    if h == 0.0 {
        if w == 0.0 {
            0.0
        } else {
            FRAC_PI_2
        }
    } else {
        (w / h).atan()
    }
}

/// Binary cross-entropy of a predicted probability against a hard label.
/// The prediction is clamped to `[eps, 1 - eps]` with eps = 1e-7.
pub fn bce(p: f64, y: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    let p_hat = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
    Ok(if y { -p_hat.ln() } else { -(1.0 - p_hat).ln() })
}

/// Weights for the composite detection loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_iou: f64,
    pub lambda_cls: f64,
    pub lambda_obj: f64,
}

impl LossWeights {
    pub fn new(lambda_iou: f64, lambda_cls: f64, lambda_obj: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda_iou", lambda_iou),
            ("lambda_cls", lambda_cls),
            ("lambda_obj", lambda_obj),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(LossWeights {
            lambda_iou,
            lambda_cls,
            lambda_obj,
        })
    }
}

/// Weighted sum of the localization, classification, and objectness terms.
pub fn composite_loss(w: &LossWeights, l_iou: f64, l_cls: f64, l_obj: f64) -> Result<f64> {
    for (name, v) in [("l_iou", l_iou), ("l_cls", l_cls), ("l_obj", l_obj)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    Ok(w.lambda_iou * l_iou + w.lambda_cls * l_cls + w.lambda_obj * l_obj)
}

/// Per-detection flag produced by matching, sorted by descending score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionFlag {
    pub score: f64,
    pub is_tp: bool,
}

/// Counts from matching one image's detections against its ground truth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchOutcome {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// One entry per detection, descending score.
    pub flags: Vec<DetectionFlag>,
}

impl MatchOutcome {
    pub fn absorb(&mut self, other: &MatchOutcome) {
        self.true_positives += other.true_positives;
        self.false_positives += other.false_positives;
        self.false_negatives += other.false_negatives;
        self.flags.extend_from_slice(&other.flags);
    }
}

/// Greedy one-to-one matching at IoU threshold `tau`.
///
/// Detections are processed in descending score (ties keep input order);
/// each claims the unmatched ground-truth box of highest IoU when that IoU
/// reaches `tau` (ties go to the lowest ground-truth index). Claimed
/// detections are true positives, the rest false positives, and unclaimed
/// ground truth counts as false negatives.
pub fn match_detections(dets: &[Detection], gts: &[BoundingBox], tau: f64) -> MatchOutcome {
    debug_assert!(tau > 0.0 && tau <= 1.0, "tau {tau} outside (0, 1]");
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.partial_cmp(&dets[a].score).unwrap());

    let mut gt_taken = vec![false; gts.len()];
    let mut flags = Vec::with_capacity(dets.len());
    let mut tp = 0usize;
    for &di in &order {
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if gt_taken[gi] {
                continue;
            }
            let v = iou(&dets[di].bbox, gt);
            let better = match best {
                None => v >= tau,
                Some((_, bv)) => v > bv,
            };
            if better && v >= tau {
                best = Some((gi, v));
            }
        }
        let is_tp = if let Some((gi, _)) = best {
            gt_taken[gi] = true;
            tp += 1;
            true
        } else {
            false
        };
        flags.push(DetectionFlag {
            score: dets[di].score,
            is_tp,
        });
    }

    MatchOutcome {
        true_positives: tp,
        false_positives: dets.len() - tp,
        false_negatives: gts.len() - tp,
        flags,
    }
}

/// `(precision, recall, f1)` with every 0/0 defined as 0.
pub fn prf1(m: &MatchOutcome) -> (f64, f64, f64) {
    let tp = m.true_positives as f64;
    let precision = safe_ratio(tp, tp + m.false_positives as f64);
    let recall = safe_ratio(tp, tp + m.false_negatives as f64);
    (precision, recall, f1_from_pr(precision, recall))
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_from_pr(precision: f64, recall: f64) -> f64 {
    safe_ratio(2.0 * precision * recall, precision + recall)
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// One image's detections and ground truth, keyed implicitly by position.
#[derive(Debug, Clone, Default)]
pub struct EvalImage {
    pub dets: Vec<Detection>,
    pub gts: Vec<BoundingBox>,
}

/// Average precision over a set of images at IoU threshold `tau`.
///
/// Detections are pooled across images and sorted by descending score
/// (stable, so ties keep image order); TP/FP flags come from the per-image
/// greedy matching rule. AP is the area under the precision envelope over
/// recall: precision at recall `r` is the maximum precision attained at
/// any recall `>= r` (all-point interpolation).
pub fn average_precision(images: &[EvalImage], tau: f64) -> Result<f64> {
    let total_gt: usize = images.iter().map(|im| im.gts.len()).sum();
    if total_gt == 0 {
        return Err(Error::domain(
            "average precision is undefined without ground truth",
        ));
    }

    let mut pooled: Vec<DetectionFlag> = Vec::new();
    for im in images {
        pooled.extend(match_detections(&im.dets, &im.gts, tau).flags);
    }
    pooled.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());

    let mut points = Vec::with_capacity(pooled.len());
    let mut tp = 0usize;
    for (k, flag) in pooled.iter().enumerate() {
        if flag.is_tp {
            tp += 1;
        }
        points.push(PrPoint {
            recall: tp as f64 / total_gt as f64,
            precision: tp as f64 / (k + 1) as f64,
        });
    }
    Ok(envelope_area(&points))
}

/// A point on the precision/recall curve.
#[derive(Debug, Clone, Copy)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// Area under the precision envelope of a PR curve.
///
/// Points may arrive in any order; the envelope at recall `r` is the
/// maximum precision among points with recall `>= r`, integrated over
/// recall starting from 0. Shared by [`average_precision`] and report
/// tooling; test oracles carry their own copy of this integration.
pub fn envelope_area(points: &[PrPoint]) -> f64 {
    let mut pts: Vec<PrPoint> = points.to_vec();
    pts.sort_by(|a, b| a.recall.partial_cmp(&b.recall).unwrap());

    // Running max from the right gives the envelope value at each point.
    let mut env = vec![0.0f64; pts.len()];
    let mut running = 0.0f64;
    for i in (0..pts.len()).rev() {
        running = running.max(pts[i].precision);
        env[i] = running;
    }

    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for (i, pt) in pts.iter().enumerate() {
        area += (pt.recall - prev_recall) * env[i];
        prev_recall = pt.recall;
    }
    area
}

/// The three detection-quality thresholds reported together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSuite {
    pub map50: f64,
    pub map75: f64,
    pub map95: f64,
}

/// AP at IoU thresholds 0.50, 0.75, and 0.95.
///
/// Matching is class-agnostic (ground truth carries no class labels), so
/// with a single foreground class each value is the AP itself.
pub fn map_suite(images: &[EvalImage]) -> Result<MapSuite> {
    Ok(MapSuite {
        map50: average_precision(images, 0.50)?,
        map75: average_precision(images, 0.75)?,
        map95: average_precision(images, 0.95)?,
    })
}

/// AP averaged over the ten IoU thresholds 0.50, 0.55, ..., 0.95 — the
/// sweep-style reading of "mAP@0.5:0.95", offered alongside the
/// single-threshold columns of [`map_suite`].
pub fn map_sweep_50_95(images: &[EvalImage]) -> Result<f64> {
    let mut sum = 0.0;
    for step in 0..10 {
        sum += average_precision(images, 0.50 + 0.05 * step as f64)?;
    }
    Ok(sum / 10.0)
}

/// Pixel confusion matrix: `count(i, j)` is the number of pixels of true
/// class `i` predicted as class `j` (rows are ground truth).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    k_plus_1: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k_plus_1: usize) -> Result<Self> {
        if k_plus_1 == 0 {
            return Err(Error::validation("confusion matrix needs at least one class"));
        }
        Ok(ConfusionMatrix {
            k_plus_1,
            counts: vec![0; k_plus_1 * k_plus_1],
        })
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        let mut cm = ConfusionMatrix::zeros(k)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::validation(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                cm.counts[i * k + j] = v;
            }
        }
        Ok(cm)
    }

    /// Tally a predicted label raster against a ground-truth raster of the
    /// same shape. Labels must be below `k_plus_1`.
    pub fn from_label_rasters(pred: &[u8], gt: &[u8], k_plus_1: usize) -> Result<Self> {
        if pred.len() != gt.len() {
            return Err(Error::dimension(format!(
                "label rasters differ in size: {} vs {}",
                pred.len(),
                gt.len()
            )));
        }
        let mut cm = ConfusionMatrix::zeros(k_plus_1)?;
        for (&p, &g) in pred.iter().zip(gt.iter()) {
            if (p as usize) >= k_plus_1 || (g as usize) >= k_plus_1 {
                return Err(Error::validation(format!(
                    "label out of range: pred {p}, gt {g}, classes {k_plus_1}"
                )));
            }
            cm.counts[g as usize * k_plus_1 + p as usize] += 1;
        }
        Ok(cm)
    }

    pub fn k_plus_1(&self) -> usize {
        self.k_plus_1
    }

    pub fn count(&self, true_class: usize, pred_class: usize) -> u64 {
        self.counts[true_class * self.k_plus_1 + pred_class]
    }

    fn row_sum(&self, i: usize) -> u64 {
        (0..self.k_plus_1).map(|j| self.count(i, j)).sum()
    }

    fn col_sum(&self, j: usize) -> u64 {
        (0..self.k_plus_1).map(|i| self.count(i, j)).sum()
    }
}

/// Mean per-class score with the classes that had to be left out
/// (empty rows for mPLA, zero denominators for mIoU).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAverage {
    pub value: f64,
    pub excluded_classes: Vec<usize>,
}

/// Mean pixel-level accuracy: mean over classes of `p_ii / sum_j p_ij`.
/// Classes with an empty row are excluded; all rows empty is an error.
pub fn mpla(cm: &ConfusionMatrix) -> Result<ClassAverage> {
    let mut sum = 0.0;
    let mut included = 0usize;
    let mut excluded = Vec::new();
    for i in 0..cm.k_plus_1() {
        let row = cm.row_sum(i);
        if row == 0 {
            excluded.push(i);
            continue;
        }
        sum += cm.count(i, i) as f64 / row as f64;
        included += 1;
    }
    if included == 0 {
        return Err(Error::domain("all confusion-matrix rows are empty"));
    }
    Ok(ClassAverage {
        value: sum / included as f64,
        excluded_classes: excluded,
    })
}

/// Mean IoU: mean over classes of `p_ii / (sum_j (p_ij + p_ji) - p_ii)`.
/// Classes with a zero denominator are excluded; all zero is an error.
pub fn miou(cm: &ConfusionMatrix) -> Result<ClassAverage> {
    let mut sum = 0.0;
    let mut included = 0usize;
    let mut excluded = Vec::new();
    for i in 0..cm.k_plus_1() {
        let denom = cm.row_sum(i) + cm.col_sum(i) - cm.count(i, i);
        if denom == 0 {
            excluded.push(i);
            continue;
        }
        sum += cm.count(i, i) as f64 / denom as f64;
        included += 1;
    }
    if included == 0 {
        return Err(Error::domain("all confusion-matrix denominators are zero"));
    }
    Ok(ClassAverage {
        value: sum / included as f64,
        excluded_classes: excluded,
    })
}

/// Pixel IoU of two same-shape binary rasters; 0 when both are empty.
pub fn mask_iou(a: &BitRaster, b: &BitRaster) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::dimension(format!(
            "mask shapes differ: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.bits.iter().zip(b.bits.iter()) {
        if x && y {
            inter += 1;
        }
        if x || y {
            union += 1;
        }
    }
    Ok(if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(a: f64, b: f64, c: f64, d: f64) -> BoundingBox {
        BoundingBox::new(a, b, c, d).unwrap()
    }

    fn det(b: BoundingBox, score: f64) -> Detection {
        Detection::new(b, score, 0).unwrap()
    }

    #[test]
    fn iou_identity_disjoint_partial() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&bx(0.0, 0.0, 1.0, 1.0), &bx(5.0, 5.0, 6.0, 6.0)), 0.0);
        let v = iou(&a, &bx(5.0, 5.0, 15.0, 15.0));
        assert!((v - 25.0 / 175.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn iou_zero_area_pair_is_zero() {
        let p = bx(3.0, 3.0, 3.0, 3.0);
        assert_eq!(iou(&p, &p), 0.0);
    }

    #[test]
    fn ciou_perfect_overlap_is_zero() {
        let a = bx(2.0, 3.0, 8.0, 9.0);
        assert_eq!(ciou_loss(&a, &a), 0.0);
    }

    #[test]
    fn ciou_concentric_same_aspect_reduces_to_iou() {
        // Concentric squares, IoU = 25/100 = 0.25: rho = 0 and v = 0,
        // so the loss is exactly 1 - IoU.
        let pred = bx(2.5, 2.5, 7.5, 7.5);
        let gt = bx(0.0, 0.0, 10.0, 10.0);
        assert!((iou(&pred, &gt) - 0.25).abs() < 1e-12);
        assert!((ciou_loss(&pred, &gt) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn ciou_matches_term_by_term_oracle() {
        // Independent step-by-step computation for pred [0,0,10,10],
        // gt [10,0,20,10].
        let pred = bx(0.0, 0.0, 10.0, 10.0);
        let gt = bx(10.0, 0.0, 20.0, 10.0);

        let oracle = {
            let iou_v = 0.0; // boxes touch along an edge, zero intersection
            let rho2 = (15.0f64 - 5.0).powi(2) + 0.0; // centers (5,5), (15,5)
            let c2 = 20.0f64.powi(2) + 10.0f64.powi(2); // enclosing 20x10
            let v = (4.0 / (PI * PI))
                * ((10.0f64 / 10.0).atan() - (10.0f64 / 10.0).atan()).powi(2);
            let alpha = v / ((1.0 - iou_v) + v); // 0/1 = 0
            1.0 - (iou_v - rho2 / c2 - alpha * v)
        };
        assert!((oracle - 1.2).abs() < 1e-12);
        assert!((ciou_loss(&pred, &gt) - oracle).abs() < 1e-12);
    }

    #[test]
    fn ciou_handles_zero_height_aspect() {
        let flat = bx(0.0, 5.0, 10.0, 5.0);
        let gt = bx(0.0, 0.0, 10.0, 10.0);
        assert!(ciou_loss(&flat, &gt).is_finite());
    }

    #[test]
    fn bce_values() {
        assert!((bce(1.0, true).unwrap() - -(1.0f64 - BCE_EPSILON).ln()).abs() < 1e-15);
        assert!((bce(0.5, true).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        assert!((bce(0.9, false).unwrap() - -(0.1f64).ln()).abs() < 1e-9);
        assert!(bce(1.2, true).is_err());
        assert!(bce(-0.1, false).is_err());
    }

    #[test]
    fn composite_loss_weighted_sum() {
        let unit = LossWeights::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(composite_loss(&unit, 0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((composite_loss(&unit, 0.2, 0.3, 0.5).unwrap() - 1.0).abs() < 1e-12);
        let w = LossWeights::new(0.5, 0.3, 0.2).unwrap();
        assert!((composite_loss(&w, 1.0, 2.0, 3.0).unwrap() - 1.7).abs() < 1e-12);
        assert!(composite_loss(&unit, -0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn match_exact_hit() {
        let g = bx(0.0, 0.0, 10.0, 10.0);
        let m = match_detections(&[det(g, 0.9)], &[g], 0.5);
        assert_eq!(
            (m.true_positives, m.false_positives, m.false_negatives),
            (1, 0, 0)
        );
    }

    #[test]
    fn match_no_detections() {
        let g = bx(0.0, 0.0, 10.0, 10.0);
        let m = match_detections(&[], &[g, g, g], 0.5);
        assert_eq!(
            (m.true_positives, m.false_positives, m.false_negatives),
            (0, 0, 3)
        );
    }

    #[test]
    fn match_greedy_prefers_higher_score() {
        // Both detections overlap the single gt at IoU 0.6; the 0.9-score
        // one claims it, the other becomes a false positive.
        let gt = bx(0.0, 0.0, 10.0, 10.0);
        let shifted = bx(0.0, 2.5, 10.0, 12.5); // IoU = 75/125 = 0.6
        assert!((iou(&shifted, &gt) - 0.6).abs() < 1e-12);
        let m = match_detections(&[det(shifted, 0.8), det(shifted, 0.9)], &[gt], 0.5);
        assert_eq!(
            (m.true_positives, m.false_positives, m.false_negatives),
            (1, 1, 0)
        );
        assert!(m.flags[0].is_tp && m.flags[0].score == 0.9);
        assert!(!m.flags[1].is_tp);
    }

    #[test]
    fn prf1_cases() {
        let m = MatchOutcome {
            true_positives: 8,
            false_positives: 2,
            false_negatives: 0,
            flags: vec![],
        };
        let (p, r, f1) = prf1(&m);
        assert!((p - 0.8).abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-12);
        assert!((f1 - 2.0 * 0.8 / 1.8).abs() < 1e-12);
        assert_eq!(prf1(&MatchOutcome::default()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn f1_matches_reported_detector_row() {
        // Published precision/recall 0.9042/0.9204 round-trips to the
        // reported F1 of 0.9123 within half a unit in the last place.
        let f1 = f1_from_pr(0.9042, 0.9204);
        assert!((f1 - 0.9123).abs() <= 5e-4, "got {f1}");
    }

    #[test]
    fn ap_single_hit_is_one() {
        let g = bx(0.0, 0.0, 10.0, 10.0);
        let images = vec![EvalImage {
            dets: vec![det(g, 0.9)],
            gts: vec![g],
        }];
        assert!((average_precision(&images, 0.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ap_no_detections_is_zero() {
        let g = bx(0.0, 0.0, 10.0, 10.0);
        let images = vec![EvalImage {
            dets: vec![],
            gts: vec![g],
        }];
        assert_eq!(average_precision(&images, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn ap_without_ground_truth_is_an_error() {
        let images = vec![EvalImage::default()];
        assert!(average_precision(&images, 0.5).is_err());
    }

    #[test]
    fn ap_mixed_hand_case() {
        // Scores .9 (TP), .8 (FP), .7 (TP) over 2 gts:
        // envelope area = 0.5 * 1.0 + 0.5 * (2/3) = 5/6.
        let g1 = bx(0.0, 0.0, 10.0, 10.0);
        let g2 = bx(100.0, 100.0, 110.0, 110.0);
        let far = bx(50.0, 50.0, 60.0, 60.0);
        let images = vec![EvalImage {
            dets: vec![det(g1, 0.9), det(far, 0.8), det(g2, 0.7)],
            gts: vec![g1, g2],
        }];
        let ap = average_precision(&images, 0.5).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-12, "got {ap}");
    }

    #[test]
    fn map_suite_threshold_gating() {
        // Detections at IoU 0.6 to their gts pass at 0.5, fail at 0.75/0.95.
        let gt = bx(0.0, 0.0, 10.0, 10.0);
        let shifted = bx(0.0, 2.5, 10.0, 12.5);
        let images = vec![EvalImage {
            dets: vec![det(shifted, 0.9)],
            gts: vec![gt],
        }];
        let s = map_suite(&images).unwrap();
        assert_eq!((s.map50, s.map75, s.map95), (1.0, 0.0, 0.0));
    }

    #[test]
    fn map_suite_perfect() {
        let g = bx(0.0, 0.0, 10.0, 10.0);
        let images = vec![EvalImage {
            dets: vec![det(g, 1.0)],
            gts: vec![g],
        }];
        let s = map_suite(&images).unwrap();
        assert_eq!((s.map50, s.map75, s.map95), (1.0, 1.0, 1.0));
        assert_eq!(map_sweep_50_95(&images).unwrap(), 1.0);
    }

    #[test]
    fn map_sweep_counts_passing_thresholds() {
        // Detection at IoU 2/3 over its gt passes 4 of the 10 sweep
        // thresholds (0.50..0.65), so the sweep mean is 0.4.
        let gt = bx(0.0, 0.0, 10.0, 10.0);
        let shifted = bx(0.0, 2.0, 10.0, 12.0); // IoU = 80/120
        assert!((iou(&shifted, &gt) - 2.0 / 3.0).abs() < 1e-12);
        let images = vec![EvalImage {
            dets: vec![det(shifted, 0.9)],
            gts: vec![gt],
        }];
        let sweep = map_sweep_50_95(&images).unwrap();
        assert!((sweep - 0.4).abs() < 1e-12, "got {sweep}");
    }

    #[test]
    fn confusion_matrix_diagonal_tally() {
        let gt: Vec<u8> = [vec![0u8; 10], vec![1u8; 6]].concat();
        let cm = ConfusionMatrix::from_label_rasters(&gt, &gt, 2).unwrap();
        assert_eq!(cm.count(0, 0), 10);
        assert_eq!(cm.count(1, 1), 6);
        assert_eq!(cm.count(0, 1) + cm.count(1, 0), 0);
    }

    #[test]
    fn confusion_matrix_all_background_prediction() {
        let gt: Vec<u8> = [vec![0u8; 8], vec![1u8; 8]].concat();
        let pred = vec![0u8; 16];
        let cm = ConfusionMatrix::from_label_rasters(&pred, &gt, 2).unwrap();
        assert_eq!(cm.count(0, 0), 8);
        assert_eq!(cm.count(1, 0), 8);
        assert_eq!(cm.count(0, 1) + cm.count(1, 1), 0);
    }

    #[test]
    fn confusion_matrix_matches_naive_double_loop() {
        // 8x8 pseudo-random label pair tallied by a naive per-pixel loop.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 3) as u8
        };
        let pred: Vec<u8> = (0..64).map(|_| next()).collect();
        let gt: Vec<u8> = (0..64).map(|_| next()).collect();
        let cm = ConfusionMatrix::from_label_rasters(&pred, &gt, 3).unwrap();
        let mut naive = [[0u64; 3]; 3];
        for i in 0..64 {
            naive[gt[i] as usize][pred[i] as usize] += 1;
        }
        for (i, row) in naive.iter().enumerate() {
            for (j, &expected) in row.iter().enumerate() {
                assert_eq!(cm.count(i, j), expected);
            }
        }
    }

    #[test]
    fn confusion_matrix_rejects_bad_inputs() {
        assert!(ConfusionMatrix::from_label_rasters(&[0, 0], &[0], 2).is_err());
        assert!(ConfusionMatrix::from_label_rasters(&[2], &[0], 2).is_err());
    }

    #[test]
    fn mpla_hand_arithmetic() {
        let cm = ConfusionMatrix::from_rows(&[vec![10, 0], vec![0, 6]]).unwrap();
        assert_eq!(mpla(&cm).unwrap().value, 1.0);

        let cm = ConfusionMatrix::from_rows(&[vec![50, 10], vec![5, 35]]).unwrap();
        let got = mpla(&cm).unwrap().value;
        let expect = (50.0 / 60.0 + 35.0 / 40.0) / 2.0;
        assert!((got - expect).abs() < 1e-12);

        let cm = ConfusionMatrix::from_rows(&[vec![0, 10], vec![10, 0]]).unwrap();
        assert_eq!(mpla(&cm).unwrap().value, 0.0);
    }

    #[test]
    fn miou_hand_arithmetic() {
        let cm = ConfusionMatrix::from_rows(&[vec![7, 0], vec![0, 3]]).unwrap();
        assert_eq!(miou(&cm).unwrap().value, 1.0);

        let cm = ConfusionMatrix::from_rows(&[vec![50, 10], vec![5, 35]]).unwrap();
        let got = miou(&cm).unwrap().value;
        let expect = (50.0 / 65.0 + 35.0 / 50.0) / 2.0;
        assert!((got - expect).abs() < 1e-12);

        let cm = ConfusionMatrix::from_rows(&[vec![0, 10], vec![10, 0]]).unwrap();
        assert_eq!(miou(&cm).unwrap().value, 0.0);
    }

    #[test]
    fn class_means_scale_invariant() {
        let base = ConfusionMatrix::from_rows(&[vec![50, 10], vec![5, 35]]).unwrap();
        let scaled = ConfusionMatrix::from_rows(&[vec![350, 70], vec![35, 245]]).unwrap();
        assert!((mpla(&base).unwrap().value - mpla(&scaled).unwrap().value).abs() < 1e-12);
        assert!((miou(&base).unwrap().value - miou(&scaled).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn empty_confusion_matrix_errors() {
        let cm = ConfusionMatrix::zeros(2).unwrap();
        assert!(mpla(&cm).is_err());
        assert!(miou(&cm).is_err());
    }

    #[test]
    fn mask_iou_cases() {
        let mut a = BitRaster::zeros(4, 4);
        let mut b = BitRaster::zeros(4, 4);
        // a: 4 pixels, b: 8 pixels, overlap 2 -> 2 / 10.
        for (x, y) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            a.set(x, y, true);
        }
        for (x, y) in [(1, 1), (2, 1), (3, 1), (0, 2), (1, 2), (2, 2), (3, 2), (0, 1)] {
            b.set(x, y, true);
        }
        assert!((mask_iou(&a, &b).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(mask_iou(&a, &a).unwrap(), 1.0);

        let empty = BitRaster::zeros(4, 4);
        assert_eq!(mask_iou(&empty, &empty).unwrap(), 0.0);

        let mut disjoint = BitRaster::zeros(4, 4);
        disjoint.set(3, 3, true);
        assert_eq!(mask_iou(&a, &disjoint).unwrap(), 0.0);

        let other_shape = BitRaster::zeros(3, 4);
        assert!(mask_iou(&a, &other_shape).is_err());
    }
}
