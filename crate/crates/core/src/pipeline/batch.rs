use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::{DatasetIndex, IndexItem};
use super::{split_seed, to_json_line, Staging};
use crate::error::{Error, Result};
use crate::imgcore::{encode_png, load_heatmap, load_image, probe_image, Heatmap};
use crate::mixers::{mix_matrix, MixConfig, MixResult, MixedLabel};
use crate::region::Region;
use crate::seeded_rng;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// The strategy that produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySummary {
    Matrix(MixConfig),
    Mixup { lambda: f64 },
}

/// Provenance of one mixed output; one JSONL line of the output manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixRecord {
    pub output_path: String,
    pub source_path: String,
    pub target_path: String,
    pub strategy: StrategySummary,
    pub tau: Option<f64>,
    pub lambda: f64,
    pub source_region: Option<Region>,
    pub paste_region: Region,
    pub label: MixedLabel,
    pub pair_seed: u64,
}

impl MixRecord {
    pub fn from_result(
        output_path: impl Into<String>,
        source_path: impl Into<String>,
        target_path: impl Into<String>,
        strategy: StrategySummary,
        result: &MixResult,
        pair_seed: u64,
    ) -> Self {
        Self {
            output_path: output_path.into(),
            source_path: source_path.into(),
            target_path: target_path.into(),
            strategy,
            tau: result.tau,
            lambda: result.lambda,
            source_region: result.source_region,
            paste_region: result.paste_region,
            label: result.label.clone(),
            pair_seed,
        }
    }
}

fn load_item_heatmap(item: &IndexItem, needed: bool) -> Result<Option<Heatmap>> {
    if !needed {
        return Ok(None);
    }
    match &item.heatmap_path {
        Some(p) => load_heatmap(p).map(Some),
        None => Err(Error::MissingHeatmap(format!(
            "{} has no heatmap in the manifest",
            item.image
        ))),
    }
}

/// Mixes the pair selected by `pair_seed`. The stream first draws the source
/// index, then the target index (uniform, with replacement), then feeds the
/// mixer.
pub fn mix_pair(
    index: &DatasetIndex,
    cfg: &MixConfig,
    pair_seed: u64,
) -> Result<(usize, usize, MixResult)> {
    if index.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = seeded_rng(pair_seed);
    let s = rng.gen_range(0..index.len());
    let t = rng.gen_range(0..index.len());
    let (src_item, tgt_item) = (&index.items[s], &index.items[t]);

    let src = load_image(&src_item.image_path)?;
    let tgt = load_image(&tgt_item.image_path)?;
    let src_heat = load_item_heatmap(src_item, cfg.needs_source_heatmap())?;
    let tgt_heat = load_item_heatmap(tgt_item, cfg.needs_target_heatmap())?;
    let result = mix_matrix(
        &src,
        &tgt,
        &MixedLabel::one_hot(src_item.class_id),
        &MixedLabel::one_hot(tgt_item.class_id),
        cfg,
        src_heat.as_ref(),
        tgt_heat.as_ref(),
        &mut rng,
    )
    .map_err(|e| match e {
        Error::DimensionMismatch(msg) => {
            Error::DimensionMismatch(format!("{} + {}: {msg}", src_item.image, tgt_item.image))
        }
        other => other,
    })?;
    Ok((s, t, result))
}

/// Recomputes a record's mix from its `pair_seed`.
pub fn replay(index: &DatasetIndex, record: &MixRecord) -> Result<MixResult> {
    match record.strategy {
        StrategySummary::Matrix(cfg) => mix_pair(index, &cfg, record.pair_seed).map(|(_, _, r)| r),
        StrategySummary::Mixup { .. } => Err(Error::invalid(
            "mixup records are not produced by batch runs and cannot be replayed against an index",
        )),
    }
}

fn check_dataset(index: &DatasetIndex, cfg: &MixConfig) -> Result<()> {
    let first = index.items.first().ok_or(Error::EmptyDataset)?;
    let reference = probe_image(&first.image_path)?;
    for item in &index.items {
        let dims = probe_image(&item.image_path)?;
        if dims != reference {
            return Err(Error::DimensionMismatch(format!(
                "{} is {}x{}x{}, but {} is {}x{}x{}",
                item.image,
                dims.0,
                dims.1,
                dims.2,
                first.image,
                reference.0,
                reference.1,
                reference.2
            )));
        }
        if (cfg.needs_source_heatmap() || cfg.needs_target_heatmap()) && item.heatmap_path.is_none()
        {
            return Err(Error::MissingHeatmap(format!(
                "{} has no heatmap but {cfg} needs saliency",
                item.image
            )));
        }
    }
    Ok(())
}

fn output_name(k: u64) -> String {
    format!("mix_{k:06}.png")
}

/// Produces `n_outputs` mixed images plus `manifest.jsonl` in `out_dir`.
///
/// Images and the manifest are staged in a scratch directory and moved into
/// place only after every output succeeded.
pub fn run_batch(
    index: &DatasetIndex,
    cfg: &MixConfig,
    n_outputs: u64,
    global_seed: u64,
    out_dir: impl AsRef<Path>,
    workers: usize,
) -> Result<Vec<MixRecord>> {
    cfg.validate()?;
    if workers == 0 {
        return Err(Error::invalid("workers must be at least 1"));
    }
    check_dataset(index, cfg)?;

    let out_dir = out_dir.as_ref();
    let staging = Staging::new(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;

    let records: Vec<MixRecord> = pool.install(|| {
        (0..n_outputs)
            .into_par_iter()
            .map(|k| {
                let pair_seed = split_seed(global_seed, k);
                let (s, t, result) = mix_pair(index, cfg, pair_seed)?;
                let name = output_name(k);
                staging.write(&name, &encode_png(&result.image))?;
                Ok(MixRecord::from_result(
                    name,
                    index.items[s].image.clone(),
                    index.items[t].image.clone(),
                    StrategySummary::Matrix(*cfg),
                    &result,
                    pair_seed,
                ))
            })
            .collect::<Result<_>>()
    })?;

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
