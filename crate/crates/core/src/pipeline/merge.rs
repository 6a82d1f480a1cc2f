//! Joining detector and segmenter outputs into an annotated frame, and
//! overlay rendering.

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{Detection, PixelRect};
use crate::mask::MaskRaster;

/// How detector and segmenter outputs relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeStyle {
    /// Masks answer box prompts: one mask per detection, same order.
    Prompted,
    /// Masks come from a promptless full-frame pass and are assigned to
    /// detections by maximal pixel overlap.
    Independent,
}

/// Final per-frame output: detections with their masks, and optionally a
/// rendered overlay.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedFrame {
    pub frame_id: u64,
    pub detections: Vec<Detection>,
    /// At most one mask per detection. Prompted merges keep index
    /// alignment with `detections`; independent merges emit masks in
    /// ascending detection order for the detections that received one.
    pub masks: Vec<MaskRaster>,
    pub overlay: Option<Frame>,
}

/// Combine one frame's stage outputs according to the pipeline mode.
///
/// Prompted: masks pair index-for-index with detections (count mismatch
/// is an error) and are clipped into their detection's clamped box.
/// Independent: each mask goes to the detection box it overlaps most
/// (ties to the lowest index), pixels outside every detection box are
/// cleared, masks without any overlap are dropped, and masks landing on
/// the same detection are unioned.
pub fn merge(
    frame: &Frame,
    detections: Vec<Detection>,
    masks: Vec<MaskRaster>,
    style: MergeStyle,
) -> Result<AnnotatedFrame> {
    let merged = match style {
        MergeStyle::Prompted => {
            if masks.len() != detections.len() {
                return Err(Error::validation(format!(
                    "frame {}: {} masks for {} detections in prompted merge",
                    frame.id,
                    masks.len(),
                    detections.len()
                )));
            }
            detections
                .iter()
                .zip(masks)
                .map(|(det, mask)| clip_to_box(det, mask, frame))
                .collect::<Result<Vec<_>>>()?
        }
        MergeStyle::Independent => assign_by_overlap(&detections, masks, frame),
    };
    Ok(AnnotatedFrame {
        frame_id: frame.id,
        detections,
        masks: merged,
        overlay: None,
    })
}

/// Crop a prompted mask into its detection's clamped pixel rectangle.
/// Set bits never survive outside the box; a mask that misses its box
/// entirely degrades to an empty 1x1 mask at the box corner.
fn clip_to_box(det: &Detection, mask: MaskRaster, frame: &Frame) -> Result<MaskRaster> {
    let Some(box_rect) = det.bbox.clamp(frame.width, frame.height).pixel_rect(frame.width, frame.height) else {
        // Degenerate box: nothing can be inside it. Keep an empty mask so
        // the index alignment with detections survives.
        return MaskRaster::new(mask.offset_x, mask.offset_y, 1, 1, vec![false]);
    };
    let mask_rect = PixelRect {
        x: mask.offset_x.max(0) as u32,
        y: mask.offset_y.max(0) as u32,
        width: mask.width,
        height: mask.height,
    };
    // Negative offsets shrink the usable mask area; recompute from the
    // clamped origin.
    let mask_rect = PixelRect {
        width: (mask.offset_x + mask.width as i32 - mask_rect.x as i32).max(0) as u32,
        height: (mask.offset_y + mask.height as i32 - mask_rect.y as i32).max(0) as u32,
        ..mask_rect
    };
    let Some(target) = box_rect.intersect(&mask_rect) else {
        return MaskRaster::new(box_rect.x as i32, box_rect.y as i32, 1, 1, vec![false]);
    };
    let mut bits = Vec::with_capacity((target.width * target.height) as usize);
    for y in target.y..target.y + target.height {
        for x in target.x..target.x + target.width {
            let lx = x as i32 - mask.offset_x;
            let ly = y as i32 - mask.offset_y;
            bits.push(mask.bit(lx as u32, ly as u32));
        }
    }
    MaskRaster::new(target.x as i32, target.y as i32, target.width, target.height, bits)
}

fn assign_by_overlap(
    detections: &[Detection],
    masks: Vec<MaskRaster>,
    frame: &Frame,
) -> Vec<MaskRaster> {
    let det_rects: Vec<Option<PixelRect>> = detections
        .iter()
        .map(|d| d.bbox.clamp(frame.width, frame.height).pixel_rect(frame.width, frame.height))
        .collect();

    // Union of assigned masks per detection, inside the detection box.
    let mut per_det: Vec<Option<MaskRaster>> = vec![None; detections.len()];
    for mask in masks {
        let mut best: Option<(usize, usize)> = None; // (det index, overlap)
        for (di, rect) in det_rects.iter().enumerate() {
            let Some(rect) = rect else { continue };
            let overlap = mask.overlap_with(rect);
            if overlap > 0 && best.is_none_or(|(_, b)| overlap > b) {
                best = Some((di, overlap));
            }
        }
        let Some((di, _)) = best else { continue }; // no overlap: dropped
        let rect = det_rects[di].expect("winning detection has a rect");
        let slot = per_det[di].get_or_insert_with(|| MaskRaster {
            offset_x: rect.x as i32,
            offset_y: rect.y as i32,
            width: rect.width,
            height: rect.height,
            bits: vec![false; (rect.width * rect.height) as usize],
        });
        for y in 0..rect.height {
            for x in 0..rect.width {
                let lx = (rect.x + x) as i32 - mask.offset_x;
                let ly = (rect.y + y) as i32 - mask.offset_y;
                if lx >= 0 && ly >= 0 && (lx as u32) < mask.width && (ly as u32) < mask.height
                    && mask.bit(lx as u32, ly as u32)
                {
                    let idx = (y * rect.width + x) as usize;
                    slot.bits[idx] = true;
                }
            }
        }
    }
    per_det.into_iter().flatten().collect()
}

/// Fixed color table for overlay rendering, cycled by index.
pub const OVERLAY_PALETTE: [(u8, u8, u8); 8] = [
    (230, 60, 60),
    (60, 200, 60),
    (70, 110, 240),
    (240, 200, 40),
    (200, 70, 220),
    (50, 210, 210),
    (240, 140, 40),
    (160, 160, 160),
];

/// Render detections and masks onto a copy of the input frame: box
/// perimeters as 1-px rectangles, mask pixels alpha-blended at 50% with
/// the per-index palette color. Output is always RGB.
pub fn render_overlay(af: &AnnotatedFrame, frame: &Frame) -> Result<Frame> {
    if af.frame_id != frame.id {
        return Err(Error::dimension(format!(
            "annotated frame {} does not belong to frame {}",
            af.frame_id, frame.id
        )));
    }
    let (w, h) = (frame.width, frame.height);
    let mut pixels = Vec::with_capacity(w as usize * h as usize * 3);
    for y in 0..h {
        for x in 0..w {
            let (r, g, b) = frame.rgb(x, y);
            pixels.extend_from_slice(&[r, g, b]);
        }
    }

    for (i, det) in af.detections.iter().enumerate() {
        let Some(rect) = det.bbox.clamp(w, h).pixel_rect(w, h) else { continue };
        let color = OVERLAY_PALETTE[i % OVERLAY_PALETTE.len()];
        for x in rect.x..rect.x + rect.width {
            put(&mut pixels, w, x, rect.y, color);
            put(&mut pixels, w, x, rect.y + rect.height - 1, color);
        }
        for y in rect.y..rect.y + rect.height {
            put(&mut pixels, w, rect.x, y, color);
            put(&mut pixels, w, rect.x + rect.width - 1, y, color);
        }
    }

    for (j, mask) in af.masks.iter().enumerate() {
        let color = OVERLAY_PALETTE[j % OVERLAY_PALETTE.len()];
        for ly in 0..mask.height {
            let fy = mask.offset_y + ly as i32;
            if fy < 0 || fy >= h as i32 {
                return Err(Error::dimension(format!(
                    "mask row {fy} outside {w}x{h} frame"
                )));
            }
            for lx in 0..mask.width {
                let fx = mask.offset_x + lx as i32;
                if fx < 0 || fx >= w as i32 {
                    return Err(Error::dimension(format!(
                        "mask column {fx} outside {w}x{h} frame"
                    )));
                }
                if mask.bit(lx, ly) {
                    blend(&mut pixels, w, fx as u32, fy as u32, color);
                }
            }
        }
    }

    Frame::new(frame.id, frame.timestamp_ms, w, h, 3, pixels, frame.source_tag.clone())
}

fn put(pixels: &mut [u8], w: u32, x: u32, y: u32, color: (u8, u8, u8)) {
    let idx = (y as usize * w as usize + x as usize) * 3;
    pixels[idx] = color.0;
    pixels[idx + 1] = color.1;
    pixels[idx + 2] = color.2;
}

fn blend(pixels: &mut [u8], w: u32, x: u32, y: u32, color: (u8, u8, u8)) {
    let idx = (y as usize * w as usize + x as usize) * 3;
    for (offset, c) in [color.0, color.1, color.2].into_iter().enumerate() {
        let mixed = 0.5 * pixels[idx + offset] as f64 + 0.5 * c as f64;
        pixels[idx + offset] = mixed.round() as u8;
    }
}
