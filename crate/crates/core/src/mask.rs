//! Binary masks: ROI-local rasters and full-frame rasters.

use crate::error::{Error, Result};
use crate::geometry::PixelRect;

/// A binary mask local to a rectangle placed at `(offset_x, offset_y)`
/// in frame coordinates. Offsets may be negative; out-of-frame bits are
/// dropped when the mask is placed into a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskRaster {
    pub offset_x: i32,
    pub offset_y: i32,
    pub width: u32,
    pub height: u32,
    /// Row-major, `width * height` bits.
    pub bits: Vec<bool>,
}

impl MaskRaster {
    pub fn new(offset_x: i32, offset_y: i32, width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation("mask dimensions must be at least 1x1"));
        }
        if bits.len() != width as usize * height as usize {
            return Err(Error::validation(format!(
                "mask bit count {} does not match {width}x{height}",
                bits.len()
            )));
        }
        Ok(MaskRaster {
            offset_x,
            offset_y,
            width,
            height,
            bits,
        })
    }

    /// All-ones mask filling a pixel rectangle.
    pub fn filled(rect: PixelRect) -> Self {
        MaskRaster {
            offset_x: rect.x as i32,
            offset_y: rect.y as i32,
            width: rect.width,
            height: rect.height,
            bits: vec![true; rect.width as usize * rect.height as usize],
        }
    }

    pub fn bit(&self, local_x: u32, local_y: u32) -> bool {
        self.bits[local_y as usize * self.width as usize + local_x as usize]
    }

    pub fn set_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Count of set bits falling inside a frame-coordinate rectangle.
    pub fn overlap_with(&self, rect: &PixelRect) -> usize {
        let mut n = 0;
        for ly in 0..self.height {
            let fy = self.offset_y + ly as i32;
            if fy < 0 {
                continue;
            }
            for lx in 0..self.width {
                let fx = self.offset_x + lx as i32;
                if fx >= 0 && rect.contains(fx as u32, fy as u32) && self.bit(lx, ly) {
                    n += 1;
                }
            }
        }
        n
    }
}

/// A full-frame binary raster.
#[derive(Debug, Clone, PartialEq)]
pub struct BitRaster {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl BitRaster {
    pub fn zeros(width: u32, height: u32) -> Self {
        BitRaster {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn bit(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn set_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Place an ROI-local mask into a `frame_w x frame_h` raster. Bits falling
/// outside the frame are dropped; a mask rectangle fully outside the frame
/// is an error.
pub fn mask_to_global(m: &MaskRaster, frame_w: u32, frame_h: u32) -> Result<BitRaster> {
    let x0 = m.offset_x;
    let y0 = m.offset_y;
    let x1 = m.offset_x + m.width as i32;
    let y1 = m.offset_y + m.height as i32;
    if x1 <= 0 || y1 <= 0 || x0 >= frame_w as i32 || y0 >= frame_h as i32 {
        return Err(Error::dimension(format!(
            "mask rectangle ({x0},{y0})..({x1},{y1}) lies outside {frame_w}x{frame_h} frame"
        )));
    }
    let mut out = BitRaster::zeros(frame_w, frame_h);
    for ly in 0..m.height {
        let fy = m.offset_y + ly as i32;
        if fy < 0 || fy >= frame_h as i32 {
            continue;
        }
        for lx in 0..m.width {
            let fx = m.offset_x + lx as i32;
            if fx < 0 || fx >= frame_w as i32 {
                continue;
            }
            if m.bit(lx, ly) {
                out.set(fx as u32, fy as u32, true);
            }
        }
    }
    Ok(out)
}
