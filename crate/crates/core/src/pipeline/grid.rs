use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imgcore::{load_image, Image};

/// Width of the black gutter between tiles, in pixels.
pub const GRID_SEPARATOR: u32 = 2;

/// Tiles the first `rows × cols` images row by row, separated by black gutters.
pub fn contact_sheet(images: &[Image], rows: u32, cols: u32) -> Result<Image> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid needs at least one row and column"));
    }
    let needed = rows as usize * cols as usize;
    if images.len() < needed {
        return Err(Error::NotEnoughEntries {
            needed,
            found: images.len(),
        });
    }
    let tiles = &images[..needed];
    let first = &tiles[0];
    let (w, h, c) = (first.width(), first.height(), first.channels());
    if let Some((i, odd)) = tiles
        .iter()
        .enumerate()
        .find(|(_, t)| (t.width(), t.height(), t.channels()) != (w, h, c))
    {
        return Err(Error::DimensionMismatch(format!(
            "tile {i} is {}x{}x{}, tile 0 is {w}x{h}x{c}",
            odd.width(),
            odd.height(),
            odd.channels()
        )));
    }
    let out_w = cols * w + (cols - 1) * GRID_SEPARATOR;
    let out_h = rows * h + (rows - 1) * GRID_SEPARATOR;
    let mut sheet = Image::filled(out_w, out_h, c, 0)?;
    for (i, tile) in tiles.iter().enumerate() {
        let x0 = (i as u32 % cols) * (w + GRID_SEPARATOR);
        let y0 = (i as u32 / cols) * (h + GRID_SEPARATOR);
        for y in 0..h {
            sheet
                .row_span_mut(y0 + y, x0, x0 + w)
                .copy_from_slice(tile.row(y));
        }
    }
    Ok(sheet)
}

/// Builds a contact sheet from the `output_path` entries of a JSONL manifest.
pub fn grid_from_manifest(manifest_path: impl AsRef<Path>, rows: u32, cols: u32) -> Result<Image> {
    let path = manifest_path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let root = path.parent().unwrap_or_else(|| Path::new("."));
    let needed = rows as usize * cols as usize;
    let mut outputs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let manifest_err = |message: String| Error::Manifest {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| manifest_err(e.to_string()))?;
        let out = value
            .get("output_path")
            .and_then(|v| v.as_str())
            .ok_or_else(|| manifest_err("record has no output_path".into()))?;
        outputs.push(root.join(out));
    }
    if outputs.len() < needed {
        return Err(Error::NotEnoughEntries {
            needed,
            found: outputs.len(),
        });
    }
    let images = outputs[..needed]
        .iter()
        .map(load_image)
        .collect::<Result<Vec<_>>>()?;
    contact_sheet(&images, rows, cols)
}
