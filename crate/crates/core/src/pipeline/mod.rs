//! Dataset ingestion, deterministic batch runs, statistics and contact sheets.
//!
//! # Seeding
//!
//! Output `k` of a run seeded with `global_seed` uses the stream
//! `seeded_rng(split_seed(global_seed, k))`, where [`split_seed`] is the
//! `(k + 1)`-th output of a SplitMix64 generator started at `global_seed`:
//!
//! ```text
//! z = global_seed + (k + 1) * 0x9E3779B97F4A7C15        (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! pair_seed = z ^ (z >> 31)
//! ```
//!
//! Work is partitioned by output index, so the worker count never changes a
//! result.

mod batch;
mod grid;
mod halfres;
mod index;
mod stats;

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub use batch::{mix_pair, replay, run_batch, MixRecord, StrategySummary, MANIFEST_FILE};
pub use grid::{contact_sheet, grid_from_manifest, GRID_SEPARATOR};
pub use halfres::{run_halfres, HalfResRecord, Split};
pub use index::{load_index, load_index_with_classes, parse_index, DatasetIndex, IndexItem};
pub use stats::{
    stats_report, stats_report_with_sets, CoverageGrid, Histogram, Moments, StatsReport,
    COVERAGE_BINS, HISTOGRAM_BINS,
};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output `k + 1` for the state `global_seed`.
pub fn split_seed(global_seed: u64, k: u64) -> u64 {
    let mut z = global_seed.wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A scratch directory inside the output directory. Files are written there
/// first and renamed into place only once the whole run has succeeded; a
/// failed run leaves nothing behind.
pub(crate) struct Staging {
    dir: tempfile::TempDir,
    out_dir: PathBuf,
}

impl Staging {
    pub(crate) fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let dir = tempfile::Builder::new()
            .prefix(".mixkit-staging-")
            .tempdir_in(out_dir)
            .map_err(|e| Error::io(out_dir, e))?;
        Ok(Self {
            dir,
            out_dir: out_dir.to_path_buf(),
        })
    }

    pub(crate) fn write(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.path().join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(self.out_dir.join(rel), e))
    }

    /// Moves the staged files into the output directory, in order.
    pub(crate) fn commit<'a>(self, rels: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for rel in rels {
            let from = self.dir.path().join(rel);
            let to = self.out_dir.join(rel);
            if let Some(parent) = to.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
        }
        Ok(())
    }
}

pub(crate) fn to_json_line<T: serde::Serialize>(value: &T) -> String {
    let mut line = serde_json::to_string(value).expect("records serialize to JSON");
    line.push('\n');
    line
}
