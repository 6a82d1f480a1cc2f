//! Axis-aligned boxes and scored detections.
//!
//! Boxes use continuous corner coordinates `(x_min, y_min, x_max, y_max)`.
//! When a box is rasterized, the right and bottom edges are exclusive.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        if !(x_min <= x_max && y_min <= y_max) {
            return Err(Error::validation(format!(
                "box corners out of order: [{x_min}, {y_min}, {x_max}, {y_max}]"
            )));
        }
        if ![x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::validation("box coordinates must be finite"));
        }
        Ok(BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    /// Clamp into `[0, w] x [0, h]`. Fully-outside boxes collapse to a
    /// zero-area box on the nearest border so batch evaluation stays total.
    pub fn clamp(&self, w: u32, h: u32) -> BoundingBox {
        let (w, h) = (w as f64, h as f64);
        BoundingBox {
            x_min: self.x_min.clamp(0.0, w),
            y_min: self.y_min.clamp(0.0, h),
            x_max: self.x_max.clamp(0.0, w),
            y_max: self.y_max.clamp(0.0, h),
        }
    }

    /// Integer pixel rectangle covered by this box inside a `w x h` frame,
    /// right/bottom exclusive. `None` when no whole pixel is covered.
    pub fn pixel_rect(&self, w: u32, h: u32) -> Option<PixelRect> {
        let c = self.clamp(w, h);
        let x0 = c.x_min.floor() as i64;
        let y0 = c.y_min.floor() as i64;
        let x1 = c.x_max.ceil() as i64;
        let y1 = c.y_max.ceil() as i64;
        let x0 = x0.clamp(0, w as i64) as u32;
        let y0 = y0.clamp(0, h as i64) as u32;
        let x1 = x1.clamp(0, w as i64) as u32;
        let y1 = y1.clamp(0, h as i64) as u32;
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(PixelRect {
            x: x0,
            y: y0,
            width: x1 - x0,
            height: y1 - y0,
        })
    }
}

/// Rasterized box footprint: whole pixels, right/bottom exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl PixelRect {
    pub fn contains(&self, px: u32, py: u32) -> bool {
        px >= self.x && px < self.x + self.width && py >= self.y && py < self.y + self.height
    }

    pub fn intersect(&self, other: &PixelRect) -> Option<PixelRect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.width).min(other.x + other.width);
        let y1 = (self.y + self.height).min(other.y + other.height);
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(PixelRect {
            x: x0,
            y: y0,
            width: x1 - x0,
            height: y1 - y0,
        })
    }
}

/// Clamp a box into `[0, w] x [0, h]`.
pub fn clamp_box(b: &BoundingBox, w: u32, h: u32) -> BoundingBox {
    b.clamp(w, h)
}

/// Signed-area-free box area in pixels squared.
pub fn box_area(b: &BoundingBox) -> f64 {
    b.area()
}

/// A scored, classed detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    /// Confidence in `[0, 1]`.
    pub score: f64,
    pub class_id: u32,
}

impl Detection {
    pub fn new(bbox: BoundingBox, score: f64, class_id: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::validation(format!(
                "detection score {score} outside [0, 1]"
            )));
        }
        Ok(Detection {
            bbox,
            score,
            class_id,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(a: f64, b: f64, c: f64, d: f64) -> BoundingBox {
        BoundingBox::new(a, b, c, d).unwrap()
    }

    #[test]
    fn clamp_negative_corner() {
        let b = bx(-5.0, -5.0, 10.0, 10.0).clamp(100, 100);
        assert_eq!(b, bx(0.0, 0.0, 10.0, 10.0));
    }

    #[test]
    fn clamp_inside_is_identity() {
        let b = bx(10.0, 10.0, 20.0, 20.0);
        assert_eq!(b.clamp(100, 100), b);
    }

    #[test]
    fn clamp_fully_outside_collapses() {
        let b = bx(200.0, 200.0, 300.0, 300.0).clamp(100, 100);
        assert_eq!(b, bx(100.0, 100.0, 100.0, 100.0));
        assert_eq!(b.area(), 0.0);
    }

    #[test]
    fn clamp_is_idempotent() {
        let b = bx(-3.5, 50.0, 250.0, 120.25);
        assert_eq!(b.clamp(100, 100), b.clamp(100, 100).clamp(100, 100));
    }

    #[test]
    fn area_cases() {
        assert_eq!(box_area(&bx(0.0, 0.0, 10.0, 10.0)), 100.0);
        assert_eq!(box_area(&bx(5.0, 5.0, 5.0, 9.0)), 0.0);
        assert!((box_area(&bx(1.5, 2.0, 4.0, 6.0)) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn pixel_rect_integer_box() {
        let r = bx(0.0, 0.0, 10.0, 10.0).pixel_rect(100, 100).unwrap();
        assert_eq!((r.x, r.y, r.width, r.height), (0, 0, 10, 10));
    }

    #[test]
    fn pixel_rect_fractional_box_covers_touched_pixels() {
        let r = bx(1.5, 1.5, 3.2, 2.1).pixel_rect(10, 10).unwrap();
        assert_eq!((r.x, r.y, r.width, r.height), (1, 1, 3, 2));
    }

    #[test]
    fn pixel_rect_degenerate_is_none() {
        assert!(bx(5.0, 5.0, 5.0, 9.0).pixel_rect(10, 10).is_none());
    }

    #[test]
    fn detection_score_bounds() {
        let b = bx(0.0, 0.0, 1.0, 1.0);
        assert!(Detection::new(b, 1.5, 0).is_err());
        assert!(Detection::new(b, 0.5, 0).is_ok());
    }
}
