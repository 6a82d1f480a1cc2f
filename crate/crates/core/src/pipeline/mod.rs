//! The staged pipeline runtime: a sequential baseline and a four-worker
//! threaded arrangement (ingest, detect, segment, post-process) connected
//! by bounded FIFO queues with backpressure.
//!
//! Two threaded topologies are provided. `Pipelined` keeps the detect ->
//! segment data dependency (boxes prompt the segmenter) and gains
//! throughput by overlapping segmentation of frame N with detection of
//! frame N+1. `ParallelIndependent` duplicates every frame to the
//! detector and a promptless segmenter running concurrently, then
//! intersects masks with detection boxes at merge time.
//!
//! With the deterministic stub backends the per-frame output of a
//! pipelined run is bit-identical to the sequential baseline; only the
//! wall-clock profile changes. Post-processing re-emits frames in
//! ascending id order and counts any violation.

pub mod merge;
mod queue;
pub mod report;
pub mod stubs;

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{BoundingBox, Detection};
use crate::mask::MaskRaster;

pub use merge::{merge, render_overlay, AnnotatedFrame, MergeStyle, OVERLAY_PALETTE};
pub use report::{FrameTiming, RunReport, StatSummary};

use queue::{BoundedQueue, QueueStop};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineMode {
    Sequential,
    Pipelined,
    ParallelIndependent,
}

impl PipelineMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PipelineMode::Sequential => "sequential",
            PipelineMode::Pipelined => "pipelined",
            PipelineMode::ParallelIndependent => "parallel_independent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub mode: PipelineMode,
    pub queue_capacity: usize,
    /// Frames excluded from the steady-state fps figure.
    pub warmup_frames: usize,
    pub det_latency_ms: f64,
    pub seg_latency_ms: f64,
    /// Uniform +- jitter applied to the stub delays.
    pub jitter_ms: f64,
    pub seed: u64,
    /// A worker blocked this long without progress fails the run.
    pub watchdog_ms: u64,
    pub render_overlays: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: PipelineMode::Pipelined,
            queue_capacity: 4,
            warmup_frames: 10,
            det_latency_ms: 0.0,
            seg_latency_ms: 0.0,
            jitter_ms: 0.0,
            seed: 0,
            watchdog_ms: 30_000,
            render_overlays: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.queue_capacity < 1 {
            return Err(Error::validation("queue capacity must be at least 1"));
        }
        for (name, v) in [
            ("det latency", self.det_latency_ms),
            ("seg latency", self.seg_latency_ms),
            ("jitter", self.jitter_ms),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.jitter_ms > 0.0 && self.jitter_ms > self.det_latency_ms.min(self.seg_latency_ms) {
            return Err(Error::validation(format!(
                "jitter {} ms exceeds the smaller stage latency; delays would go negative",
                self.jitter_ms
            )));
        }
        if self.watchdog_ms == 0 {
            return Err(Error::validation("watchdog must be at least 1 ms"));
        }
        Ok(())
    }
}

/// Pull-based frame supplier; `None` signals end of stream.
pub trait FrameSource {
    fn next_frame(&mut self) -> Result<Option<Frame>>;
}

/// Stage 1 backend. Invoked from a single dedicated worker.
pub trait Detector: Send {
    fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection>>;
}

/// Stage 2 backend. `segment` answers box prompts (one mask per prompt,
/// same order); `segment_full` is the promptless whole-frame pass used by
/// the parallel-independent topology.
pub trait Segmenter: Send {
    fn segment(&mut self, frame: &Frame, prompts: &[BoundingBox]) -> Result<Vec<MaskRaster>>;
    fn segment_full(&mut self, frame: &Frame) -> Result<Vec<MaskRaster>>;
}

struct RunClock {
    start: Instant,
}

impl RunClock {
    fn start() -> Self {
        RunClock {
            start: Instant::now(),
        }
    }

    fn now_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1000.0
    }
}

/// Worker-internal control flow.
enum Stop {
    /// Another worker failed; exit quietly.
    Cancelled,
    Failed(Error),
}

impl From<QueueStop> for Stop {
    fn from(q: QueueStop) -> Stop {
        match q {
            QueueStop::Cancelled => Stop::Cancelled,
            QueueStop::Watchdog { site, waited_ms } => {
                Stop::Failed(Error::Watchdog { site, waited_ms })
            }
        }
    }
}

fn stage_err(stage: &'static str, frame_id: u64, e: Error) -> Stop {
    Stop::Failed(Error::stage(stage, frame_id, e.to_string()))
}

/// Dispatch on `cfg.mode`.
pub fn run<S, D, G>(
    cfg: &PipelineConfig,
    source: S,
    detector: D,
    segmenter: G,
) -> Result<(Vec<AnnotatedFrame>, RunReport)>
where
    S: FrameSource + Send,
    D: Detector,
    G: Segmenter,
{
    match cfg.mode {
        PipelineMode::Sequential => run_sequential(cfg, source, detector, segmenter),
        _ => run_threaded(cfg, source, detector, segmenter),
    }
}

/// Single-threaded baseline: per frame strictly detect, then segment with
/// the detection boxes as prompts, then merge. Output order is input order.
pub fn run_sequential<S, D, G>(
    cfg: &PipelineConfig,
    mut source: S,
    mut detector: D,
    mut segmenter: G,
) -> Result<(Vec<AnnotatedFrame>, RunReport)>
where
    S: FrameSource,
    D: Detector,
    G: Segmenter,
{
    cfg.validate()?;
    let clock = RunClock::start();
    let mut frames = Vec::new();
    let mut timings = Vec::new();
    let mut ordering_violations = 0usize;
    let mut expected: u64 = 0;

    loop {
        let frame = source
            .next_frame()
            .map_err(|e| Error::stage("ingest", expected, e.to_string()))?;
        let Some(frame) = frame else { break };
        let ingest_ts = clock.now_ms();

        let det_start = clock.now_ms();
        let dets = detector
            .detect(&frame)
            .map_err(|e| Error::stage("detect", frame.id, e.to_string()))?;
        let det_end = clock.now_ms();

        let prompts: Vec<BoundingBox> = dets
            .iter()
            .map(|d| d.bbox.clamp(frame.width, frame.height))
            .collect();
        let seg_start = clock.now_ms();
        let masks = segmenter
            .segment(&frame, &prompts)
            .map_err(|e| Error::stage("segment", frame.id, e.to_string()))?;
        let seg_end = clock.now_ms();

        let mut af = merge(&frame, dets, masks, MergeStyle::Prompted)
            .map_err(|e| Error::stage("post", frame.id, e.to_string()))?;
        if cfg.render_overlays {
            af.overlay = Some(
                render_overlay(&af, &frame)
                    .map_err(|e| Error::stage("post", frame.id, e.to_string()))?,
            );
        }
        let post_end = clock.now_ms();

        if af.frame_id != expected {
            ordering_violations += 1;
        }
        expected += 1;
        timings.push(FrameTiming {
            frame_id: af.frame_id,
            ingest_ts,
            det_start,
            det_end,
            seg_start,
            seg_end,
            post_end,
        });
        frames.push(af);
    }

    let report = RunReport::from_timings(
        &timings,
        clock.now_ms(),
        cfg.warmup_frames,
        ordering_violations,
        vec![],
    );
    Ok((frames, report))
}

/// Four concurrent workers over bounded queues. `cfg.mode` selects the
/// pipelined or parallel-independent topology; any worker failure cancels
/// the whole run and surfaces one error naming the stage and frame.
pub fn run_threaded<S, D, G>(
    cfg: &PipelineConfig,
    source: S,
    detector: D,
    segmenter: G,
) -> Result<(Vec<AnnotatedFrame>, RunReport)>
where
    S: FrameSource + Send,
    D: Detector,
    G: Segmenter,
{
    cfg.validate()?;
    match cfg.mode {
        PipelineMode::Pipelined => run_pipelined(cfg, source, detector, segmenter),
        PipelineMode::ParallelIndependent => run_parallel_independent(cfg, source, detector, segmenter),
        PipelineMode::Sequential => Err(Error::validation(
            "run_threaded requires a threaded mode (pipelined or parallel_independent)",
        )),
    }
}

struct DetJob {
    frame: Frame,
    ingest_ts: f64,
}

struct SegJob {
    frame: Frame,
    ingest_ts: f64,
    dets: Vec<Detection>,
    det_start: f64,
    det_end: f64,
}

struct PostJob {
    frame: Frame,
    ingest_ts: f64,
    dets: Vec<Detection>,
    masks: Vec<MaskRaster>,
    det_start: f64,
    det_end: f64,
    seg_start: f64,
    seg_end: f64,
}

type PostData = (Vec<AnnotatedFrame>, Vec<FrameTiming>, usize);

fn run_pipelined<S, D, G>(
    cfg: &PipelineConfig,
    mut source: S,
    mut detector: D,
    mut segmenter: G,
) -> Result<(Vec<AnnotatedFrame>, RunReport)>
where
    S: FrameSource + Send,
    D: Detector,
    G: Segmenter,
{
    let watchdog = Duration::from_millis(cfg.watchdog_ms);
    let q_det: BoundedQueue<DetJob> = BoundedQueue::new("ingest->detect", cfg.queue_capacity, watchdog);
    let q_seg: BoundedQueue<SegJob> = BoundedQueue::new("detect->segment", cfg.queue_capacity, watchdog);
    let q_post: BoundedQueue<PostJob> = BoundedQueue::new("segment->post", cfg.queue_capacity, watchdog);
    let clock = RunClock::start();
    let failure: Mutex<Option<Error>> = Mutex::new(None);

    let post_data: Option<PostData> = {
        let q_det = &q_det;
        let q_seg = &q_seg;
        let q_post = &q_post;
        let clock = &clock;
        let failure = &failure;
        let fail = move |e: Error| {
            let mut slot = failure.lock().unwrap();
            if slot.is_none() {
                *slot = Some(e);
            }
            drop(slot);
            q_det.cancel();
            q_seg.cancel();
            q_post.cancel();
        };
        let fail = &fail;

        thread::scope(|s| {
            s.spawn(move || {
                let mut body = || -> std::result::Result<(), Stop> {
                    let mut count: u64 = 0;
                    loop {
                        let frame = source
                            .next_frame()
                            .map_err(|e| stage_err("ingest", count, e))?;
                        let Some(frame) = frame else {
                            q_det.close();
                            return Ok(());
                        };
                        count = frame.id + 1;
                        let ingest_ts = clock.now_ms();
                        q_det.push(DetJob { frame, ingest_ts }).map_err(Stop::from)?;
                    }
                };
                if let Err(Stop::Failed(e)) = body() {
                    fail(e);
                }
            });

            s.spawn(move || {
                let mut body = || -> std::result::Result<(), Stop> {
                    loop {
                        let Some(job) = q_det.pop().map_err(Stop::from)? else {
                            q_seg.close();
                            return Ok(());
                        };
                        let det_start = clock.now_ms();
                        let dets = detector
                            .detect(&job.frame)
                            .map_err(|e| stage_err("detect", job.frame.id, e))?;
                        let det_end = clock.now_ms();
                        q_seg
                            .push(SegJob {
                                frame: job.frame,
                                ingest_ts: job.ingest_ts,
                                dets,
                                det_start,
                                det_end,
                            })
                            .map_err(Stop::from)?;
                    }
                };
                if let Err(Stop::Failed(e)) = body() {
                    fail(e);
                }
            });

            s.spawn(move || {
                let mut body = || -> std::result::Result<(), Stop> {
                    loop {
                        let Some(job) = q_seg.pop().map_err(Stop::from)? else {
                            q_post.close();
                            return Ok(());
                        };
                        let prompts: Vec<BoundingBox> = job
                            .dets
                            .iter()
                            .map(|d| d.bbox.clamp(job.frame.width, job.frame.height))
                            .collect();
                        let seg_start = clock.now_ms();
                        let masks = segmenter
                            .segment(&job.frame, &prompts)
                            .map_err(|e| stage_err("segment", job.frame.id, e))?;
                        let seg_end = clock.now_ms();
                        q_post
                            .push(PostJob {
                                frame: job.frame,
                                ingest_ts: job.ingest_ts,
                                dets: job.dets,
                                masks,
                                det_start: job.det_start,
                                det_end: job.det_end,
                                seg_start,
                                seg_end,
                            })
                            .map_err(Stop::from)?;
                    }
                };
                if let Err(Stop::Failed(e)) = body() {
                    fail(e);
                }
            });

            let post = s.spawn(move || {
                let mut out: PostData = (Vec::new(), Vec::new(), 0);
                let body = |out: &mut PostData| -> std::result::Result<(), Stop> {
                    let mut expected: u64 = 0;
                    loop {
                        let Some(job) = q_post.pop().map_err(Stop::from)? else {
                            return Ok(());
                        };
                        let af = finish_frame(cfg, clock, job, &mut expected, out)?;
                        out.0.push(af);
                    }
                };
                match body(&mut out) {
                    Ok(()) => Some(out),
                    Err(Stop::Failed(e)) => {
                        fail(e);
                        None
                    }
                    Err(Stop::Cancelled) => None,
                }
            });

            post.join().expect("post worker panicked")
        })
    };

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let (frames, timings, ordering_violations) =
        post_data.ok_or_else(|| Error::validation("pipeline terminated without output"))?;
    let report = RunReport::from_timings(
        &timings,
        clock.now_ms(),
        cfg.warmup_frames,
        ordering_violations,
        vec![
            (q_det.name().to_string(), q_det.high_water()),
            (q_seg.name().to_string(), q_seg.high_water()),
            (q_post.name().to_string(), q_post.high_water()),
        ],
    );
    Ok((frames, report))
}

/// Shared post-stage tail: merge, optional overlay, ordering check, timing.
fn finish_frame(
    cfg: &PipelineConfig,
    clock: &RunClock,
    job: PostJob,
    expected: &mut u64,
    out: &mut PostData,
) -> std::result::Result<AnnotatedFrame, Stop> {
    let style = match cfg.mode {
        PipelineMode::ParallelIndependent => MergeStyle::Independent,
        _ => MergeStyle::Prompted,
    };
    let mut af = merge(&job.frame, job.dets, job.masks, style)
        .map_err(|e| stage_err("post", job.frame.id, e))?;
    if cfg.render_overlays {
        af.overlay = Some(
            render_overlay(&af, &job.frame).map_err(|e| stage_err("post", job.frame.id, e))?,
        );
    }
    let post_end = clock.now_ms();
    if af.frame_id != *expected {
        out.2 += 1;
    }
    *expected += 1;
    out.1.push(FrameTiming {
        frame_id: af.frame_id,
        ingest_ts: job.ingest_ts,
        det_start: job.det_start,
        det_end: job.det_end,
        seg_start: job.seg_start,
        seg_end: job.seg_end,
        post_end,
    });
    Ok(af)
}

struct DetOut {
    frame_id: u64,
    dets: Vec<Detection>,
    det_start: f64,
    det_end: f64,
}

struct SegOut {
    frame: Frame,
    ingest_ts: f64,
    masks: Vec<MaskRaster>,
    seg_start: f64,
    seg_end: f64,
}

fn run_parallel_independent<S, D, G>(
    cfg: &PipelineConfig,
    mut source: S,
    mut detector: D,
    mut segmenter: G,
) -> Result<(Vec<AnnotatedFrame>, RunReport)>
where
    S: FrameSource + Send,
    D: Detector,
    G: Segmenter,
{
    let watchdog = Duration::from_millis(cfg.watchdog_ms);
    let q_det: BoundedQueue<DetJob> = BoundedQueue::new("ingest->detect", cfg.queue_capacity, watchdog);
    let q_seg: BoundedQueue<DetJob> = BoundedQueue::new("ingest->segment", cfg.queue_capacity, watchdog);
    let q_det_out: BoundedQueue<DetOut> = BoundedQueue::new("detect->post", cfg.queue_capacity, watchdog);
    let q_seg_out: BoundedQueue<SegOut> = BoundedQueue::new("segment->post", cfg.queue_capacity, watchdog);
    let clock = RunClock::start();
    let failure: Mutex<Option<Error>> = Mutex::new(None);

    let post_data: Option<PostData> = {
        let q_det = &q_det;
        let q_seg = &q_seg;
        let q_det_out = &q_det_out;
        let q_seg_out = &q_seg_out;
        let clock = &clock;
        let failure = &failure;
        let fail = move |e: Error| {
            let mut slot = failure.lock().unwrap();
            if slot.is_none() {
                *slot = Some(e);
            }
            drop(slot);
            q_det.cancel();
            q_seg.cancel();
            q_det_out.cancel();
            q_seg_out.cancel();
        };
        let fail = &fail;

        thread::scope(|s| {
            s.spawn(move || {
                let mut body = || -> std::result::Result<(), Stop> {
                    let mut count: u64 = 0;
                    loop {
                        let frame = source
                            .next_frame()
                            .map_err(|e| stage_err("ingest", count, e))?;
                        let Some(frame) = frame else {
                            q_det.close();
                            q_seg.close();
                            return Ok(());
                        };
                        count = frame.id + 1;
                        let ingest_ts = clock.now_ms();
                        q_det
                            .push(DetJob {
                                frame: frame.clone(),
                                ingest_ts,
                            })
                            .map_err(Stop::from)?;
                        q_seg.push(DetJob { frame, ingest_ts }).map_err(Stop::from)?;
                    }
                };
                if let Err(Stop::Failed(e)) = body() {
                    fail(e);
                }
            });

            s.spawn(move || {
                let mut body = || -> std::result::Result<(), Stop> {
                    loop {
                        let Some(job) = q_det.pop().map_err(Stop::from)? else {
                            q_det_out.close();
                            return Ok(());
                        };
                        let det_start = clock.now_ms();
                        let dets = detector
                            .detect(&job.frame)
                            .map_err(|e| stage_err("detect", job.frame.id, e))?;
                        let det_end = clock.now_ms();
                        q_det_out
                            .push(DetOut {
                                frame_id: job.frame.id,
                                dets,
                                det_start,
                                det_end,
                            })
                            .map_err(Stop::from)?;
                    }
                };
                if let Err(Stop::Failed(e)) = body() {
                    fail(e);
                }
            });

            s.spawn(move || {
                let mut body = || -> std::result::Result<(), Stop> {
                    loop {
                        let Some(job) = q_seg.pop().map_err(Stop::from)? else {
                            q_seg_out.close();
                            return Ok(());
                        };
                        let seg_start = clock.now_ms();
                        let masks = segmenter
                            .segment_full(&job.frame)
                            .map_err(|e| stage_err("segment", job.frame.id, e))?;
                        let seg_end = clock.now_ms();
                        q_seg_out
                            .push(SegOut {
                                frame: job.frame,
                                ingest_ts: job.ingest_ts,
                                masks,
                                seg_start,
                                seg_end,
                            })
                            .map_err(Stop::from)?;
                    }
                };
                if let Err(Stop::Failed(e)) = body() {
                    fail(e);
                }
            });

            let post = s.spawn(move || {
                let mut out: PostData = (Vec::new(), Vec::new(), 0);
                let body = |out: &mut PostData| -> std::result::Result<(), Stop> {
                    let mut expected: u64 = 0;
                    loop {
                        let det = q_det_out.pop().map_err(Stop::from)?;
                        let seg = q_seg_out.pop().map_err(Stop::from)?;
                        let (det, seg) = match (det, seg) {
                            (None, None) => return Ok(()),
                            (Some(d), Some(g)) => (d, g),
                            _ => {
                                return Err(Stop::Failed(Error::stage(
                                    "post",
                                    expected,
                                    "detector and segmenter branches ended at different lengths",
                                )))
                            }
                        };
                        if det.frame_id != seg.frame.id {
                            return Err(Stop::Failed(Error::stage(
                                "post",
                                seg.frame.id,
                                format!(
                                    "branch misalignment: detector frame {} vs segmenter frame {}",
                                    det.frame_id, seg.frame.id
                                ),
                            )));
                        }
                        let job = PostJob {
                            frame: seg.frame,
                            ingest_ts: seg.ingest_ts,
                            dets: det.dets,
                            masks: seg.masks,
                            det_start: det.det_start,
                            det_end: det.det_end,
                            seg_start: seg.seg_start,
                            seg_end: seg.seg_end,
                        };
                        let af = finish_frame(cfg, clock, job, &mut expected, out)?;
                        out.0.push(af);
                    }
                };
                match body(&mut out) {
                    Ok(()) => Some(out),
                    Err(Stop::Failed(e)) => {
                        fail(e);
                        None
                    }
                    Err(Stop::Cancelled) => None,
                }
            });

            post.join().expect("post worker panicked")
        })
    };

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let (frames, timings, ordering_violations) =
        post_data.ok_or_else(|| Error::validation("pipeline terminated without output"))?;
    let report = RunReport::from_timings(
        &timings,
        clock.now_ms(),
        cfg.warmup_frames,
        ordering_violations,
        vec![
            (q_det.name().to_string(), q_det.high_water()),
            (q_seg.name().to_string(), q_seg.high_water()),
            (q_det_out.name().to_string(), q_det_out.high_water()),
            (q_seg_out.name().to_string(), q_seg_out.high_water()),
        ],
    );
    Ok((frames, report))
}

/// FNV-1a digest of the per-frame outputs (ids, detections, mask bits).
/// Stable across runs of the same build, used by tooling to check that
/// identical flags and seeds reproduce identical annotations.
pub fn output_digest(frames: &[AnnotatedFrame]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x1000_0000_01b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(PRIME);
        }
    };
    for af in frames {
        eat(&af.frame_id.to_le_bytes());
        for d in &af.detections {
            for v in [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max, d.score] {
                eat(&v.to_le_bytes());
            }
            eat(&d.class_id.to_le_bytes());
        }
        for m in &af.masks {
            eat(&m.offset_x.to_le_bytes());
            eat(&m.offset_y.to_le_bytes());
            eat(&m.width.to_le_bytes());
            eat(&m.height.to_le_bytes());
            let mut acc = 0u8;
            for (i, &bit) in m.bits.iter().enumerate() {
                acc = (acc << 1) | bit as u8;
                if i % 8 == 7 {
                    eat(&[acc]);
                    acc = 0;
                }
            }
            eat(&[acc]);
        }
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::stubs::{StubDetector, StubSegmenter, SyntheticFrameSource};
    use super::*;

    fn stub_setup(seed: u64, det_ms: f64, seg_ms: f64) -> (StubDetector, StubSegmenter) {
        (
            StubDetector::new(seed, det_ms, 0.0),
            StubSegmenter::new(seed, seg_ms, 0.0),
        )
    }

    fn cfg(mode: PipelineMode) -> PipelineConfig {
        PipelineConfig {
            mode,
            warmup_frames: 0,
            ..Default::default()
        }
    }

    #[test]
    fn config_rejects_zero_capacity() {
        let bad = PipelineConfig {
            queue_capacity: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_rejects_jitter_above_latency() {
        let bad = PipelineConfig {
            det_latency_ms: 1.0,
            seg_latency_ms: 5.0,
            jitter_ms: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let ok = PipelineConfig {
            det_latency_ms: 3.0,
            seg_latency_ms: 5.0,
            jitter_ms: 2.0,
            ..Default::default()
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn sequential_empty_source() {
        let (d, g) = stub_setup(1, 0.0, 0.0);
        let src = SyntheticFrameSource::new(1, 0, 32, 32);
        let (frames, report) = run_sequential(&cfg(PipelineMode::Sequential), src, d, g).unwrap();
        assert!(frames.is_empty());
        assert_eq!(report.frames_processed, 0);
        assert_eq!(report.fps, 0.0);
    }

    #[test]
    fn sequential_preserves_order() {
        let (d, g) = stub_setup(1, 0.0, 0.0);
        let src = SyntheticFrameSource::new(1, 10, 32, 32);
        let (frames, report) = run_sequential(&cfg(PipelineMode::Sequential), src, d, g).unwrap();
        assert_eq!(frames.len(), 10);
        for (i, af) in frames.iter().enumerate() {
            assert_eq!(af.frame_id, i as u64);
        }
        assert_eq!(report.ordering_violations, 0);
        assert_eq!(report.max_queue_depth(), 0);
    }

    #[test]
    fn pipelined_matches_sequential_bit_for_bit() {
        for seed in [1u64, 7, 42] {
            let (d1, g1) = stub_setup(seed, 0.0, 0.0);
            let (frames_seq, _) = run_sequential(
                &cfg(PipelineMode::Sequential),
                SyntheticFrameSource::new(seed, 20, 32, 32),
                d1,
                g1,
            )
            .unwrap();
            let (d2, g2) = stub_setup(seed, 0.0, 0.0);
            let (frames_thr, report) = run_threaded(
                &cfg(PipelineMode::Pipelined),
                SyntheticFrameSource::new(seed, 20, 32, 32),
                d2,
                g2,
            )
            .unwrap();
            assert_eq!(frames_seq, frames_thr, "seed {seed}");
            assert_eq!(report.ordering_violations, 0);
            assert!(report.max_queue_depth() <= 4);
        }
    }

    #[test]
    fn parallel_independent_runs_in_order() {
        let (d, g) = stub_setup(3, 0.0, 0.0);
        let src = SyntheticFrameSource::new(3, 15, 32, 32);
        let (frames, report) =
            run_threaded(&cfg(PipelineMode::ParallelIndependent), src, d, g).unwrap();
        assert_eq!(frames.len(), 15);
        for (i, af) in frames.iter().enumerate() {
            assert_eq!(af.frame_id, i as u64);
            assert!(af.masks.len() <= af.detections.len());
        }
        assert_eq!(report.ordering_violations, 0);
        assert!(report.max_queue_depth() <= 4);
    }

    #[test]
    fn parallel_independent_is_deterministic() {
        let runs: Vec<Vec<AnnotatedFrame>> = (0..2)
            .map(|_| {
                let (d, g) = stub_setup(9, 0.0, 0.0);
                let src = SyntheticFrameSource::new(9, 12, 32, 32);
                run_threaded(&cfg(PipelineMode::ParallelIndependent), src, d, g)
                    .unwrap()
                    .0
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
    }

    #[test]
    fn run_threaded_rejects_sequential_mode() {
        let (d, g) = stub_setup(1, 0.0, 0.0);
        let src = SyntheticFrameSource::new(1, 1, 32, 32);
        assert!(run_threaded(&cfg(PipelineMode::Sequential), src, d, g).is_err());
    }

    struct FailingDetector {
        fail_at: u64,
    }

    impl Detector for FailingDetector {
        fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection>> {
            if frame.id == self.fail_at {
                return Err(Error::validation("synthetic fault"));
            }
            Ok(vec![])
        }
    }

    #[test]
    fn stage_failure_cancels_and_names_stage() {
        for mode in [PipelineMode::Pipelined, PipelineMode::ParallelIndependent] {
            let src = SyntheticFrameSource::new(1, 50, 32, 32);
            let seg = StubSegmenter::new(1, 0.0, 0.0);
            let err = run_threaded(&cfg(mode), src, FailingDetector { fail_at: 3 }, seg).unwrap_err();
            match err {
                Error::Stage { stage, frame_id, .. } => {
                    assert_eq!(stage, "detect");
                    assert_eq!(frame_id, 3);
                }
                other => panic!("expected stage error, got {other}"),
            }
        }
    }

    #[test]
    fn sequential_failure_names_stage_and_frame() {
        let src = SyntheticFrameSource::new(1, 10, 32, 32);
        let seg = StubSegmenter::new(1, 0.0, 0.0);
        let err = run_sequential(
            &cfg(PipelineMode::Sequential),
            src,
            FailingDetector { fail_at: 5 },
            seg,
        )
        .unwrap_err();
        assert!(err.to_string().contains("detect"));
        assert!(err.to_string().contains('5'));
    }

    #[test]
    fn single_frame_pipelined_latency_is_stage_sum() {
        let (d, g) = stub_setup(1, 20.0, 30.0);
        let src = SyntheticFrameSource::new(1, 1, 32, 32);
        let (_, report) = run_threaded(&cfg(PipelineMode::Pipelined), src, d, g).unwrap();
        // No overlap is possible with one frame: e2e ~ det + seg.
        assert!(
            report.e2e_ms.mean >= 49.0 && report.e2e_ms.mean < 90.0,
            "e2e mean {}",
            report.e2e_ms.mean
        );
    }

    #[test]
    fn digest_distinguishes_outputs() {
        let (d1, g1) = stub_setup(1, 0.0, 0.0);
        let (frames_a, _) = run_sequential(
            &cfg(PipelineMode::Sequential),
            SyntheticFrameSource::new(1, 5, 32, 32),
            d1,
            g1,
        )
        .unwrap();
        let (d2, g2) = stub_setup(2, 0.0, 0.0);
        let (frames_b, _) = run_sequential(
            &cfg(PipelineMode::Sequential),
            SyntheticFrameSource::new(2, 5, 32, 32),
            d2,
            g2,
        )
        .unwrap();
        assert_eq!(output_digest(&frames_a), output_digest(&frames_a));
        assert_ne!(output_digest(&frames_a), output_digest(&frames_b));
    }
}
