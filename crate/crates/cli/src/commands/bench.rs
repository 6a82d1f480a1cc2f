//! `detseg bench`: sequential vs threaded throughput on one workload.

use clap::Args;
use serde_json::json;

use crate::commands::run::{run_once, RunArgs};
use crate::output::{csv_scalar, Format};
use crate::ModeArg;

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

pub fn execute(args: &BenchArgs, seed: u64, format: Format) -> anyhow::Result<()> {
    let threaded_mode = match args.run.mode {
        // Benching "sequential vs sequential" is meaningless; default to
        // the pipelined topology.
        ModeArg::Sequential => ModeArg::Pipelined,
        other => other,
    };

    eprintln!("bench: sequential pass...");
    let (_, seq) = run_once(&args.run, seed, ModeArg::Sequential)?;
    eprintln!(
        "bench: sequential fps {:.2}; threaded pass ({:?})...",
        seq.fps, threaded_mode
    );
    let (_, thr) = run_once(&args.run, seed, threaded_mode)?;
    eprintln!("bench: threaded fps {:.2}", thr.fps);

    let speedup = if seq.fps > 0.0 { thr.fps / seq.fps } else { 0.0 };
    let sub_ms = args.run.det_latency_ms.min(args.run.seg_latency_ms) < 1.0;
    let note = sub_ms.then_some("unreliable: sub-ms stages");

    let threaded_name = detseg_core::pipeline::PipelineMode::from(threaded_mode).as_str();
    let doc = json!({
        "frames": seq.frames_processed,
        "det_latency_ms": args.run.det_latency_ms,
        "seg_latency_ms": args.run.seg_latency_ms,
        "rows": [
            {"mode": "sequential", "fps": seq.fps, "wall_ms": seq.wall_ms,
             "e2e_ms_mean": seq.e2e_ms.mean, "max_queue_depth": seq.max_queue_depth()},
            {"mode": threaded_name, "fps": thr.fps, "wall_ms": thr.wall_ms,
             "e2e_ms_mean": thr.e2e_ms.mean, "max_queue_depth": thr.max_queue_depth()},
        ],
        "speedup": speedup,
        "note": note,
    });

    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&doc).expect("valid json")),
        Format::Csv => {
            println!("mode,fps,wall_ms,frames_processed,speedup,note");
            println!(
                "sequential,{},{},{},,{}",
                seq.fps,
                seq.wall_ms,
                seq.frames_processed,
                note.unwrap_or("")
            );
            println!(
                "{},{},{},{},{},{}",
                threaded_name,
                thr.fps,
                thr.wall_ms,
                thr.frames_processed,
                csv_scalar(&json!(speedup)),
                note.unwrap_or("")
            );
        }
    }
    Ok(())
}
