//! Dataset audits: split-leakage checks, instance/resolution histograms,
//! and the spatial heatmap of ground-truth box centers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::manifest::{Manifest, Split};

/// Target split fractions checked by [`split_check`].
pub const TARGET_FRACTIONS: [f64; 3] = [0.80, 0.10, 0.10];

/// Outcome of a leakage/ratio audit over the three splits.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    /// Record counts for train/val/test.
    pub counts: [usize; 3],
    /// Record fractions; zero everywhere when all manifests are empty.
    pub fractions: [f64; 3],
    /// Signed deviation of each fraction from 0.80/0.10/0.10.
    pub deviations: [f64; 3],
    /// Group ids appearing in more than one split, sorted.
    pub leaks: Vec<String>,
}

impl SplitReport {
    pub fn passes(&self) -> bool {
        self.leaks.is_empty()
    }
}

/// Index groups across the three splits, list every group seen in two or
/// more splits as a leak, and compare record fractions to 0.80/0.10/0.10.
pub fn split_check(train: &Manifest, val: &Manifest, test: &Manifest) -> SplitReport {
    let mut group_splits: HashMap<&str, BTreeSet<Split>> = HashMap::new();
    for m in [train, val, test] {
        for rec in &m.records {
            group_splits
                .entry(rec.group_id.as_str())
                .or_default()
                .insert(m.split);
        }
    }
    let mut leaks: Vec<String> = group_splits
        .into_iter()
        .filter(|(_, splits)| splits.len() > 1)
        .map(|(g, _)| g.to_string())
        .collect();
    leaks.sort();

    let counts = [train.len(), val.len(), test.len()];
    let total: usize = counts.iter().sum();
    let fractions = if total == 0 {
        [0.0; 3]
    } else {
        [
            counts[0] as f64 / total as f64,
            counts[1] as f64 / total as f64,
            counts[2] as f64 / total as f64,
        ]
    };
    let deviations = [
        fractions[0] - TARGET_FRACTIONS[0],
        fractions[1] - TARGET_FRACTIONS[1],
        fractions[2] - TARGET_FRACTIONS[2],
    ];

    SplitReport {
        counts,
        fractions,
        deviations,
        leaks,
    }
}

/// Tally of images by ground-truth instance count (0-instance images included).
pub fn instance_histogram(m: &Manifest) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for rec in &m.records {
        *hist.entry(rec.gt_boxes.len()).or_insert(0) += 1;
    }
    hist
}

/// Tally of images by `(width, height)`.
pub fn resolution_histogram(m: &Manifest) -> BTreeMap<(u32, u32), usize> {
    let mut hist = BTreeMap::new();
    for rec in &m.records {
        *hist.entry((rec.width, rec.height)).or_insert(0) += 1;
    }
    hist
}

/// Grid of ground-truth box-center counts over normalized image space.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub grid_size: usize,
    counts: Vec<u64>,
}

impl Heatmap {
    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.grid_size + col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bin every ground-truth box center into a `g x g` grid: cell column is
/// `floor(cx / w * g)` and row `floor(cy / h * g)`, with centers exactly
/// on the far edge mapped into the last cell. Out-of-bounds centers are
/// skipped (clamped manifests cannot produce them).
pub fn spatial_heatmap(m: &Manifest, g: usize) -> Heatmap {
    assert!(g >= 1, "heatmap grid must have at least one cell");
    let mut heat = Heatmap {
        grid_size: g,
        counts: vec![0; g * g],
    };
    for rec in &m.records {
        let (w, h) = (rec.width as f64, rec.height as f64);
        for b in &rec.gt_boxes {
            let (cx, cy) = b.center();
            if cx < 0.0 || cy < 0.0 || cx > w || cy > h {
                continue;
            }
            let col = ((cx / w * g as f64).floor() as usize).min(g - 1);
            let row = ((cy / h * g as f64).floor() as usize).min(g - 1);
            heat.counts[row * g + col] += 1;
        }
    }
    heat
}
