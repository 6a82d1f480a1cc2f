//! Per-frame stage timings and the aggregated run report.

use serde_json::json;

/// Monotone-clock stamps for one frame, milliseconds since run start.
/// Non-decreasing in declaration order for prompted (pipelined) runs;
/// the detect and segment intervals overlap in parallel-independent runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTiming {
    pub frame_id: u64,
    pub ingest_ts: f64,
    pub det_start: f64,
    pub det_end: f64,
    pub seg_start: f64,
    pub seg_end: f64,
    pub post_end: f64,
}

impl FrameTiming {
    pub fn det_ms(&self) -> f64 {
        self.det_end - self.det_start
    }

    pub fn seg_ms(&self) -> f64 {
        self.seg_end - self.seg_start
    }

    pub fn e2e_ms(&self) -> f64 {
        self.post_end - self.ingest_ts
    }
}

/// Mean / median / p95 of a latency series (nearest-rank percentiles).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StatSummary {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

impl StatSummary {
    fn from_values(mut values: Vec<f64>) -> Self {
        if values.is_empty() {
            return StatSummary::default();
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        StatSummary {
            mean,
            median: nearest_rank(&values, 0.50),
            p95: nearest_rank(&values, 0.95),
        }
    }
}

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Timing statistics for one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub frames_processed: usize,
    pub wall_ms: f64,
    /// Steady-state throughput over the post-warmup frames; 0 when the
    /// run did not outlast the warmup window.
    pub fps: f64,
    pub det_ms: StatSummary,
    pub seg_ms: StatSummary,
    pub e2e_ms: StatSummary,
    pub ordering_violations: usize,
    /// High-water mark per queue; empty for sequential runs.
    pub queue_high_water: Vec<(String, usize)>,
    pub warmup_frames: usize,
}

impl RunReport {
    pub fn from_timings(
        timings: &[FrameTiming],
        wall_ms: f64,
        warmup_frames: usize,
        ordering_violations: usize,
        queue_high_water: Vec<(String, usize)>,
    ) -> Self {
        let n = timings.len();
        let fps = if n > warmup_frames {
            let window_start = if warmup_frames == 0 {
                0.0
            } else {
                timings[warmup_frames - 1].post_end
            };
            let window = timings[n - 1].post_end - window_start;
            if window > 0.0 {
                (n - warmup_frames) as f64 / window * 1000.0
            } else {
                0.0
            }
        } else {
            0.0
        };

        RunReport {
            frames_processed: n,
            wall_ms,
            fps,
            det_ms: StatSummary::from_values(timings.iter().map(FrameTiming::det_ms).collect()),
            seg_ms: StatSummary::from_values(timings.iter().map(FrameTiming::seg_ms).collect()),
            e2e_ms: StatSummary::from_values(timings.iter().map(FrameTiming::e2e_ms).collect()),
            ordering_violations,
            queue_high_water,
            warmup_frames,
        }
    }

    /// Deepest observed queue across the run (0 for sequential).
    pub fn max_queue_depth(&self) -> usize {
        self.queue_high_water
            .iter()
            .map(|(_, depth)| *depth)
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "frames_processed": self.frames_processed,
            "wall_ms": self.wall_ms,
            "fps": self.fps,
            "det_ms_mean": self.det_ms.mean,
            "det_ms_p95": self.det_ms.p95,
            "seg_ms_mean": self.seg_ms.mean,
            "seg_ms_p95": self.seg_ms.p95,
            "e2e_ms_mean": self.e2e_ms.mean,
            "e2e_ms_p95": self.e2e_ms.p95,
            "ordering_violations": self.ordering_violations,
            "max_queue_depth": self.max_queue_depth(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        let rows: [(&str, String); 11] = [
            ("frames_processed", self.frames_processed.to_string()),
            ("wall_ms", self.wall_ms.to_string()),
            ("fps", self.fps.to_string()),
            ("det_ms_mean", self.det_ms.mean.to_string()),
            ("det_ms_p95", self.det_ms.p95.to_string()),
            ("seg_ms_mean", self.seg_ms.mean.to_string()),
            ("seg_ms_p95", self.seg_ms.p95.to_string()),
            ("e2e_ms_mean", self.e2e_ms.mean.to_string()),
            ("e2e_ms_p95", self.e2e_ms.p95.to_string()),
            ("ordering_violations", self.ordering_violations.to_string()),
            ("max_queue_depth", self.max_queue_depth().to_string()),
        ];
        for (key, value) in rows {
            out.push_str(&format!("{key},{value}\n"));
        }
        out
    }
}
