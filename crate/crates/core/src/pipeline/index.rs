use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One dataset entry. Paths are stored both as written in the manifest and
/// resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexItem {
    pub image: String,
    pub class_id: u32,
    pub heatmap: Option<String>,
    pub image_path: PathBuf,
    pub heatmap_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetIndex {
    pub items: Vec<IndexItem>,
    pub class_count: u32,
}

impl DatasetIndex {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Loads a `image_path<TAB>class_id[<TAB>heatmap_path]` manifest, inferring
/// the class count as one past the largest class id.
pub fn load_index(manifest_path: impl AsRef<Path>) -> Result<DatasetIndex> {
    load_index_with_classes(manifest_path, None)
}

pub fn load_index_with_classes(
    manifest_path: impl AsRef<Path>,
    class_count: Option<u32>,
) -> Result<DatasetIndex> {
    let path = manifest_path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let root = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let index = parse_index(&text, root, path, class_count)?;
    for item in &index.items {
        for p in std::iter::once(&item.image_path).chain(item.heatmap_path.as_ref()) {
            if !p.is_file() {
                return Err(Error::io(
                    p,
                    std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "listed in manifest but not found",
                    ),
                ));
            }
        }
    }
    Ok(index)
}

/// Parses manifest text without touching the filesystem. `source` is only
/// used in error messages.
pub fn parse_index(
    text: &str,
    root: &Path,
    source: &Path,
    class_count: Option<u32>,
) -> Result<DatasetIndex> {
    let err = |line: usize, message: String| Error::Manifest {
        path: source.to_path_buf(),
        line,
        message,
    };
    let mut items = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(
                line_no,
                format!(
                    "expected 2 or 3 tab-separated fields, found {}",
                    fields.len()
                ),
            ));
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(err(line_no, "empty field".into()));
        }
        let class_id: u32 = fields[1]
            .trim()
            .parse()
            .map_err(|_| err(line_no, format!("invalid class id '{}'", fields[1])))?;
        if let Some(n) = class_count {
            if class_id >= n {
                return Err(err(
                    line_no,
                    format!("class id {class_id} out of range for {n} classes"),
                ));
            }
        }
        let heatmap = fields.get(2).map(|s| s.to_string());
        items.push(IndexItem {
            image: fields[0].to_string(),
            class_id,
            image_path: root.join(fields[0]),
            heatmap_path: heatmap.as_ref().map(|h| root.join(h)),
            heatmap,
        });
    }
    let class_count =
        class_count.unwrap_or_else(|| items.iter().map(|it| it.class_id + 1).max().unwrap_or(0));
    Ok(DatasetIndex { items, class_count })
}
