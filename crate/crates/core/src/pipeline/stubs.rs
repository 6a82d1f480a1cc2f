//! Deterministic stand-ins for the real stage backends, plus frame
//! sources. Stub outputs are pure functions of `(seed, frame id)`, so a
//! threaded run can be compared bit-for-bit against a sequential one;
//! the configured latencies only stretch time.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{BoundingBox, Detection};
use crate::mask::MaskRaster;
use crate::pipeline::{Detector, FrameSource, Segmenter};
use crate::pnm;

const SALT_FRAME_PIXELS: u64 = 0x01;
const SALT_DET_DELAY: u64 = 0x02;
const SALT_DET_BOXES: u64 = 0x03;
const SALT_SEG_DELAY: u64 = 0x04;
const SALT_SEG_FULL: u64 = 0x05;

/// Seed an independent stream for one (seed, frame, purpose) triple.
/// SplitMix64 finalizer decorrelates nearby ids.
fn stream_for(seed: u64, frame_id: u64, salt: u64) -> ChaCha8Rng {
    let mut z = seed
        .wrapping_add(frame_id.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(salt.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

/// Hold the calling thread for `ms` with sub-millisecond accuracy:
/// sleep for the bulk, spin out the tail.
pub fn hold_for_ms(ms: f64) {
    if ms <= 0.0 {
        return;
    }
    let deadline = Instant::now() + Duration::from_secs_f64(ms / 1000.0);
    const SPIN_TAIL: Duration = Duration::from_micros(200);
    if let Some(remaining) = deadline.checked_duration_since(Instant::now()) {
        if remaining > SPIN_TAIL {
            std::thread::sleep(remaining - SPIN_TAIL);
        }
    }
    while Instant::now() < deadline {
        std::hint::spin_loop();
    }
}

/// Latency (+- deterministic jitter) for one stub call.
fn stub_delay_ms(seed: u64, frame_id: u64, salt: u64, latency_ms: f64, jitter_ms: f64) -> f64 {
    if jitter_ms <= 0.0 {
        return latency_ms;
    }
    let mut rng = stream_for(seed, frame_id, salt);
    latency_ms + rng.gen_range(-jitter_ms..=jitter_ms)
}

/// Deterministic pseudo-random grayscale frames.
pub struct SyntheticFrameSource {
    seed: u64,
    remaining: u64,
    next_id: u64,
    width: u32,
    height: u32,
}

impl SyntheticFrameSource {
    pub fn new(seed: u64, count: u64, width: u32, height: u32) -> Self {
        SyntheticFrameSource {
            seed,
            remaining: count,
            next_id: 0,
            width,
            height,
        }
    }
}

impl FrameSource for SyntheticFrameSource {
    fn next_frame(&mut self) -> Result<Option<Frame>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        self.remaining -= 1;
        let id = self.next_id;
        self.next_id += 1;
        let mut rng = stream_for(self.seed, id, SALT_FRAME_PIXELS);
        let mut pixels = vec![0u8; self.width as usize * self.height as usize];
        rng.fill(pixels.as_mut_slice());
        Ok(Some(Frame::new(
            id,
            id as f64,
            self.width,
            self.height,
            1,
            pixels,
            "synthetic",
        )?))
    }
}

/// PGM/PPM files from a directory in lexicographic filename order,
/// loaded lazily so earlier frames are delivered before a corrupt file
/// surfaces as an error.
pub struct DirectoryFrameSource {
    files: Vec<PathBuf>,
    next: usize,
    expected_dims: Option<(u32, u32)>,
}

impl DirectoryFrameSource {
    pub fn new(dir: &Path, expected_dims: Option<(u32, u32)>) -> Result<Self> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|entry| entry.path())
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
                    Some("pgm") | Some("ppm")
                )
            })
            .collect();
        files.sort_by_key(|p| p.file_name().map(|n| n.to_os_string()));
        Ok(DirectoryFrameSource {
            files,
            next: 0,
            expected_dims,
        })
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

impl FrameSource for DirectoryFrameSource {
    fn next_frame(&mut self) -> Result<Option<Frame>> {
        let Some(path) = self.files.get(self.next) else {
            return Ok(None);
        };
        let id = self.next as u64;
        self.next += 1;
        let img = pnm::read(path)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        if let Some((w, h)) = self.expected_dims {
            if img.width != w || img.height != h {
                return Err(Error::validation(format!(
                    "{}: {}x{} does not match expected {w}x{h}",
                    path.display(),
                    img.width,
                    img.height
                )));
            }
        }
        let tag = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Some(Frame::new(
            id,
            id as f64,
            img.width,
            img.height,
            img.channels,
            img.pixels,
            tag,
        )?))
    }
}

/// Detector stub: sleeps the configured latency, then emits 1-3 boxes
/// derived purely from `(seed, frame id)` with scores in (0, 1].
pub struct StubDetector {
    pub seed: u64,
    pub latency_ms: f64,
    pub jitter_ms: f64,
}

impl StubDetector {
    pub fn new(seed: u64, latency_ms: f64, jitter_ms: f64) -> Self {
        StubDetector {
            seed,
            latency_ms,
            jitter_ms,
        }
    }
}

impl Detector for StubDetector {
    fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection>> {
        hold_for_ms(stub_delay_ms(
            self.seed,
            frame.id,
            SALT_DET_DELAY,
            self.latency_ms,
            self.jitter_ms,
        ));
        let mut rng = stream_for(self.seed, frame.id, SALT_DET_BOXES);
        let n = rng.gen_range(1..=3usize);
        let (w, h) = (frame.width as f64, frame.height as f64);
        let mut dets = Vec::with_capacity(n);
        for _ in 0..n {
            let bw = rng.gen_range(w / 8.0..w / 2.0).max(2.0);
            let bh = rng.gen_range(h / 8.0..h / 2.0).max(2.0);
            let x = rng.gen_range(0.0..(w - bw));
            let y = rng.gen_range(0.0..(h - bh));
            let bbox = BoundingBox::new(x, y, x + bw, y + bh)?;
            let score = 1.0 - rng.gen::<f64>(); // (0, 1]
            dets.push(Detection::new(bbox, score, 0)?);
        }
        Ok(dets)
    }
}

/// Segmenter stub. The prompted path fills each clamped box rectangle;
/// the promptless path emits 1-3 seeded rectangles for the independent
/// pipeline mode. Both sleep the configured latency exactly once per call.
pub struct StubSegmenter {
    pub seed: u64,
    pub latency_ms: f64,
    pub jitter_ms: f64,
}

impl StubSegmenter {
    pub fn new(seed: u64, latency_ms: f64, jitter_ms: f64) -> Self {
        StubSegmenter {
            seed,
            latency_ms,
            jitter_ms,
        }
    }
}

impl Segmenter for StubSegmenter {
    fn segment(&mut self, frame: &Frame, prompts: &[BoundingBox]) -> Result<Vec<MaskRaster>> {
        hold_for_ms(stub_delay_ms(
            self.seed,
            frame.id,
            SALT_SEG_DELAY,
            self.latency_ms,
            self.jitter_ms,
        ));
        prompts
            .iter()
            .map(|b| {
                match b.clamp(frame.width, frame.height).pixel_rect(frame.width, frame.height) {
                    Some(rect) => Ok(MaskRaster::filled(rect)),
                    // Degenerate prompt: an empty 1x1 mask at the collapsed
                    // corner keeps mask/detection alignment intact.
                    None => {
                        let c = b.clamp(frame.width, frame.height);
                        MaskRaster::new(
                            (c.x_min.floor() as i32).min(frame.width as i32 - 1),
                            (c.y_min.floor() as i32).min(frame.height as i32 - 1),
                            1,
                            1,
                            vec![false],
                        )
                    }
                }
            })
            .collect()
    }

    fn segment_full(&mut self, frame: &Frame) -> Result<Vec<MaskRaster>> {
        hold_for_ms(stub_delay_ms(
            self.seed,
            frame.id,
            SALT_SEG_DELAY,
            self.latency_ms,
            self.jitter_ms,
        ));
        let mut rng = stream_for(self.seed, frame.id, SALT_SEG_FULL);
        let n = rng.gen_range(1..=3usize);
        let (w, h) = (frame.width, frame.height);
        let mut masks = Vec::with_capacity(n);
        for _ in 0..n {
            let mw = rng.gen_range(w / 8..=w / 2).max(1);
            let mh = rng.gen_range(h / 8..=h / 2).max(1);
            let x = rng.gen_range(0..=w - mw);
            let y = rng.gen_range(0..=h - mh);
            masks.push(MaskRaster::new(
                x as i32,
                y as i32,
                mw,
                mh,
                vec![true; (mw * mh) as usize],
            )?);
        }
        Ok(masks)
    }
}
