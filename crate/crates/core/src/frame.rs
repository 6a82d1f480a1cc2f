//! Raster frames flowing through the pipeline.

use crate::error::{Error, Result};

/// A timestamped raster image with a monotone per-source id.
///
/// Pixels are 8-bit samples in row-major order, interleaved per channel
/// (`len == width * height * channels`). Frames are immutable after
/// construction and cheap to hand between workers by value.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub id: u64,
    /// Milliseconds since the start of the run that produced this frame.
    pub timestamp_ms: f64,
    pub width: u32,
    pub height: u32,
    /// 1 (grayscale) or 3 (RGB).
    pub channels: u8,
    pub pixels: Vec<u8>,
    pub source_tag: String,
}

impl Frame {
    pub fn new(
        id: u64,
        timestamp_ms: f64,
        width: u32,
        height: u32,
        channels: u8,
        pixels: Vec<u8>,
        source_tag: impl Into<String>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!(
                "frame {id}: dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::validation(format!(
                "frame {id}: channels must be 1 or 3, got {channels}"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::validation(format!(
                "frame {id}: pixel buffer has {} bytes, expected {expected}",
                pixels.len()
            )));
        }
        Ok(Frame {
            id,
            timestamp_ms,
            width,
            height,
            channels,
            pixels,
            source_tag: source_tag.into(),
        })
    }

    /// Fill a frame with a single intensity (grayscale).
    pub fn constant(id: u64, width: u32, height: u32, value: u8) -> Self {
        Frame::new(
            id,
            0.0,
            width,
            height,
            1,
            vec![value; width as usize * height as usize],
            "constant",
        )
        .expect("constant frame dimensions are valid")
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Sample of a 1-channel frame at (x, y). Panics out of bounds.
    pub fn gray(&self, x: u32, y: u32) -> u8 {
        debug_assert_eq!(self.channels, 1);
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// (r, g, b) of a pixel; grayscale frames replicate the sample.
    pub fn rgb(&self, x: u32, y: u32) -> (u8, u8, u8) {
        let idx = (y as usize * self.width as usize + x as usize) * self.channels as usize;
        match self.channels {
            1 => {
                let v = self.pixels[idx];
                (v, v, v)
            }
            _ => (self.pixels[idx], self.pixels[idx + 1], self.pixels[idx + 2]),
        }
    }
}
