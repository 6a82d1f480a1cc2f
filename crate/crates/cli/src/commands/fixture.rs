//! `detseg fixture`: write a deterministic synthetic corpus.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use detseg_core::fixture::{generate, FixtureConfig};

use crate::output::{emit_flat, Format};

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,

    /// Number of images to generate.
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    #[arg(long, default_value_t = 64)]
    pub width: u32,

    #[arg(long, default_value_t = 64)]
    pub height: u32,

    /// Fraction of constant (blurred) images.
    #[arg(long, default_value_t = 0.1)]
    pub blurred_frac: f64,

    /// Fraction of dark (mean ~30) images.
    #[arg(long, default_value_t = 0.1)]
    pub dark_frac: f64,

    /// Fraction of bright (mean ~230) images.
    #[arg(long, default_value_t = 0.1)]
    pub bright_frac: f64,

    /// Fraction of images with a sub-2% object.
    #[arg(long, default_value_t = 0.1)]
    pub small_object_frac: f64,

    /// Fraction of images with an overlapping box pair.
    #[arg(long, default_value_t = 0.1)]
    pub occluded_frac: f64,
}

pub fn execute(args: &FixtureArgs, seed: u64, format: Format) -> anyhow::Result<()> {
    let cfg = FixtureConfig {
        seed,
        n_images: args.n,
        width: args.width,
        height: args.height,
        blurred_frac: args.blurred_frac,
        dark_frac: args.dark_frac,
        bright_frac: args.bright_frac,
        small_object_frac: args.small_object_frac,
        occluded_frac: args.occluded_frac,
    };
    let out = generate(&cfg, &args.out)?;
    eprintln!(
        "fixture: {} images under {} (train {}, val {}, test {})",
        args.n,
        args.out.display(),
        out.train.len(),
        out.val.len(),
        out.test.len()
    );
    emit_flat(
        format,
        &json!({
            "out_dir": args.out.display().to_string(),
            "images": args.n,
            "train": out.train.len(),
            "val": out.val.len(),
            "test": out.test.len(),
        }),
    );
    Ok(())
}
