//! `detseg dataset`: histograms, heatmap, and the split-leak audit.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde_json::json;

use detseg_core::dataset::{instance_histogram, resolution_histogram, spatial_heatmap, split_check};

use crate::commands::load_manifest;
use crate::output::{emit_flat, Format};

#[derive(Debug, Subcommand)]
pub enum DatasetCmd {
    /// Instance or resolution histogram as `value,count`.
    Stats(StatsArgs),
    /// Ground-truth box-center heatmap as `row,col,count`.
    Heatmap(HeatmapArgs),
    /// Cross-split group leakage and ratio audit (leaks exit with code 1).
    SplitCheck(SplitCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatsKind {
    Instances,
    Resolutions,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: PathBuf,

    #[arg(long, value_enum, default_value_t = StatsKind::Instances)]
    pub kind: StatsKind,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub manifest: PathBuf,

    /// Grid resolution (cells per side).
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct SplitCheckArgs {
    #[arg(long)]
    pub train: PathBuf,

    #[arg(long)]
    pub val: PathBuf,

    #[arg(long)]
    pub test: PathBuf,
}

pub fn execute(cmd: &DatasetCmd, format: Format) -> anyhow::Result<()> {
    match cmd {
        DatasetCmd::Stats(args) => stats(args, format),
        DatasetCmd::Heatmap(args) => heatmap(args, format),
        DatasetCmd::SplitCheck(args) => split(args, format),
    }
}

fn stats(args: &StatsArgs, format: Format) -> anyhow::Result<()> {
    let manifest = load_manifest(&args.manifest)?;
    let rows: Vec<(String, usize)> = match args.kind {
        StatsKind::Instances => instance_histogram(&manifest)
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        StatsKind::Resolutions => resolution_histogram(&manifest)
            .into_iter()
            .map(|((w, h), v)| (format!("{w}x{h}"), v))
            .collect(),
    };
    match format {
        Format::Json => {
            let doc = json!({
                "kind": match args.kind { StatsKind::Instances => "instances", StatsKind::Resolutions => "resolutions" },
                "rows": rows.iter().map(|(value, count)| json!({"value": value, "count": count})).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("valid json"));
        }
        Format::Csv => {
            println!("value,count");
            for (value, count) in rows {
                println!("{value},{count}");
            }
        }
    }
    Ok(())
}

fn heatmap(args: &HeatmapArgs, format: Format) -> anyhow::Result<()> {
    if args.grid < 1 {
        return Err(crate::fail_validation("heatmap grid must be at least 1"));
    }
    let manifest = load_manifest(&args.manifest)?;
    let heat = spatial_heatmap(&manifest, args.grid);
    match format {
        Format::Json => {
            let mut cells = Vec::new();
            for row in 0..args.grid {
                for col in 0..args.grid {
                    cells.push(json!({"row": row, "col": col, "count": heat.count(row, col)}));
                }
            }
            let doc = json!({"grid_size": args.grid, "total": heat.total(), "rows": cells});
            println!("{}", serde_json::to_string_pretty(&doc).expect("valid json"));
        }
        Format::Csv => {
            println!("row,col,count");
            for row in 0..args.grid {
                for col in 0..args.grid {
                    println!("{row},{col},{}", heat.count(row, col));
                }
            }
        }
    }
    Ok(())
}

fn split(args: &SplitCheckArgs, format: Format) -> anyhow::Result<()> {
    let train = load_manifest(&args.train)?;
    let val = load_manifest(&args.val)?;
    let test = load_manifest(&args.test)?;
    let report = split_check(&train, &val, &test);

    let doc = json!({
        "leaks": report.leaks,
        "fractions": {
            "train": report.fractions[0],
            "val": report.fractions[1],
            "test": report.fractions[2],
        },
        "counts": {
            "train": report.counts[0],
            "val": report.counts[1],
            "test": report.counts[2],
        },
        "deviations": {
            "train": report.deviations[0],
            "val": report.deviations[1],
            "test": report.deviations[2],
        },
    });
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&doc).expect("valid json")),
        Format::Csv => emit_flat(Format::Csv, &json!({
            "leaks": report.leaks,
            "train_count": report.counts[0],
            "val_count": report.counts[1],
            "test_count": report.counts[2],
            "train_fraction": report.fractions[0],
            "val_fraction": report.fractions[1],
            "test_fraction": report.fractions[2],
        })),
    }

    if !report.passes() {
        return Err(crate::fail_validation(format!(
            "split leakage detected: groups {:?} appear in multiple splits",
            report.leaks
        )));
    }
    Ok(())
}
