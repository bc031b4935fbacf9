use std::path::Path;

use serde::{Deserialize, Serialize};

use super::index::DatasetIndex;
use super::{split_seed, to_json_line, Staging, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::imgcore::{encode_png, load_image};
use crate::mixers::{halfres_transform_with_region, HalfResMode};
use crate::region::Region;
use crate::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
}

impl Split {
    fn dir(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }
}

/// One half-resolution output; one JSONL line of the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfResRecord {
    pub output_path: String,
    pub source_path: String,
    pub class_id: u32,
    pub split: Split,
    pub mode: HalfResMode,
    pub crop_region: Option<Region>,
    pub width: u32,
    pub height: u32,
    pub item_seed: u64,
}

/// Writes a train and a val half-resolution copy of every item.
///
/// Item `k` uses `split_seed(global_seed, 2k)` for its train copy and
/// `split_seed(global_seed, 2k + 1)` for its val copy. Outputs land in
/// `train/` and `val/` under `out_dir`, with `manifest.jsonl` listing train
/// then val records per item.
pub fn run_halfres(
    index: &DatasetIndex,
    train_mode: HalfResMode,
    val_mode: HalfResMode,
    global_seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<HalfResRecord>> {
    if index.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let staging = Staging::new(out_dir.as_ref())?;
    let mut records = Vec::with_capacity(2 * index.len());
    for (k, item) in index.items.iter().enumerate() {
        let img = load_image(&item.image_path)?;
        for (split, mode, stream) in [
            (Split::Train, train_mode, 2 * k as u64),
            (Split::Val, val_mode, 2 * k as u64 + 1),
        ] {
            let item_seed = split_seed(global_seed, stream);
            let (out, crop_region) =
                halfres_transform_with_region(&img, mode, &mut seeded_rng(item_seed)).map_err(
                    |e| match e {
                        Error::DimensionMismatch(msg) => {
                            Error::DimensionMismatch(format!("{}: {msg}", item.image))
                        }
                        other => other,
                    },
                )?;
            let output_path = format!("{}/{k:06}.png", split.dir());
            staging.write(&output_path, &encode_png(&out))?;
            records.push(HalfResRecord {
                output_path,
                source_path: item.image.clone(),
                class_id: item.class_id,
                split,
                mode,
                crop_region,
                width: out.width(),
                height: out.height(),
                item_seed,
            });
        }
    }
    let manifest: String = records.iter().map(to_json_line).collect();
    staging.write(MANIFEST_FILE, manifest.as_bytes())?;
    staging.commit(
        records
            .iter()
            .map(|r| r.output_path.as_str())
            .chain([MANIFEST_FILE]),
    )?;
    Ok(records)
}
