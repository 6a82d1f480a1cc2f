//! `detseg run`: drive the pipeline over a directory or synthetic source.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde_json::json;

use detseg_core::pipeline::stubs::{DirectoryFrameSource, StubDetector, StubSegmenter, SyntheticFrameSource};
use detseg_core::pipeline::{self, AnnotatedFrame, FrameSource, PipelineConfig, RunReport};
use detseg_core::{Frame, Result as CoreResult};

use crate::output::{emit_flat, Format};
use crate::ModeArg;

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Frame source: a directory of PGM/PPM files, or `synthetic`.
    #[arg(long, default_value = "synthetic")]
    pub source: String,

    #[arg(long, value_enum, default_value_t = ModeArg::Pipelined)]
    pub mode: ModeArg,

    #[arg(long, default_value_t = 4)]
    pub queue_capacity: usize,

    /// Stub detector delay per frame.
    #[arg(long, default_value_t = 0.0)]
    pub det_latency_ms: f64,

    /// Stub segmenter delay per frame.
    #[arg(long, default_value_t = 0.0)]
    pub seg_latency_ms: f64,

    /// Uniform +- jitter on the stub delays.
    #[arg(long, default_value_t = 0.0)]
    pub jitter_ms: f64,

    /// Frames excluded from the steady-state fps figure.
    #[arg(long, default_value_t = 10)]
    pub warmup: usize,

    /// Frame count for synthetic sources; caps directory sources when set.
    #[arg(long)]
    pub frames: Option<u64>,

    /// Synthetic frame width.
    #[arg(long, default_value_t = 64)]
    pub width: u32,

    /// Synthetic frame height.
    #[arg(long, default_value_t = 64)]
    pub height: u32,

    /// Write rendered overlays (PPM) into this directory.
    #[arg(long)]
    pub emit_overlays: Option<PathBuf>,

    /// Write the timing report to this `.json` or `.csv` file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Caps an inner source at a fixed number of frames.
struct CappedSource<S> {
    inner: S,
    remaining: u64,
}

impl<S: FrameSource> FrameSource for CappedSource<S> {
    fn next_frame(&mut self) -> CoreResult<Option<Frame>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        self.remaining -= 1;
        self.inner.next_frame()
    }
}

pub fn pipeline_config(args: &RunArgs, seed: u64, mode: ModeArg) -> PipelineConfig {
    PipelineConfig {
        mode: mode.into(),
        queue_capacity: args.queue_capacity,
        warmup_frames: args.warmup,
        det_latency_ms: args.det_latency_ms,
        seg_latency_ms: args.seg_latency_ms,
        jitter_ms: args.jitter_ms,
        seed,
        render_overlays: args.emit_overlays.is_some(),
        ..Default::default()
    }
}

pub fn run_once(
    args: &RunArgs,
    seed: u64,
    mode: ModeArg,
) -> anyhow::Result<(Vec<AnnotatedFrame>, RunReport)> {
    let cfg = pipeline_config(args, seed, mode);
    let detector = StubDetector::new(seed, cfg.det_latency_ms, cfg.jitter_ms);
    let segmenter = StubSegmenter::new(seed, cfg.seg_latency_ms, cfg.jitter_ms);
    let out = if args.source == "synthetic" {
        let count = args.frames.unwrap_or(100);
        let source = SyntheticFrameSource::new(seed, count, args.width, args.height);
        pipeline::run(&cfg, source, detector, segmenter)?
    } else {
        let dir = PathBuf::from(&args.source);
        let source = DirectoryFrameSource::new(&dir, None)
            .map_err(|e| crate::fail_validation(format!("source {}: {e}", dir.display())))?;
        match args.frames {
            Some(n) => {
                let source = CappedSource {
                    inner: source,
                    remaining: n,
                };
                pipeline::run(&cfg, source, detector, segmenter)?
            }
            None => pipeline::run(&cfg, source, detector, segmenter)?,
        }
    };
    Ok(out)
}

pub fn execute(args: &RunArgs, seed: u64, format: Format) -> anyhow::Result<()> {
    let (frames, report) = run_once(args, seed, args.mode)?;

    let mut overlays_written = 0usize;
    if let Some(dir) = &args.emit_overlays {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for af in &frames {
            if let Some(overlay) = &af.overlay {
                let path = dir.join(format!("overlay_{:06}.ppm", af.frame_id));
                detseg_core::pnm::write(&path, overlay.width, overlay.height, 3, &overlay.pixels)?;
                overlays_written += 1;
            }
        }
    }

    if let Some(path) = &args.report {
        let is_csv = path.extension().and_then(|e| e.to_str()) == Some("csv");
        let body = if is_csv {
            report.to_csv()
        } else {
            serde_json::to_string_pretty(&report.to_json()).expect("valid json")
        };
        std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    }

    eprintln!(
        "processed {} frames in {:.1} ms ({} mode): fps {:.2}, e2e p95 {:.2} ms",
        report.frames_processed,
        report.wall_ms,
        detseg_core::pipeline::PipelineMode::from(args.mode).as_str(),
        report.fps,
        report.e2e_ms.p95,
    );

    // The stdout document carries only seed-deterministic fields; the
    // wall-clock figures live in the report file.
    let detections: usize = frames.iter().map(|f| f.detections.len()).sum();
    let masks: usize = frames.iter().map(|f| f.masks.len()).sum();
    let doc = json!({
        "mode": detseg_core::pipeline::PipelineMode::from(args.mode).as_str(),
        "frames_processed": report.frames_processed,
        "detections": detections,
        "masks": masks,
        "ordering_violations": report.ordering_violations,
        "output_digest": format!("{:016x}", pipeline::output_digest(&frames)),
        "overlays_written": overlays_written,
        "report": args.report.as_ref().map(|p| p.display().to_string()),
    });
    emit_flat(format, &doc);
    Ok(())
}
