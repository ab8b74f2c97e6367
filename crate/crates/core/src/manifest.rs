//! Dataset manifests: CSV with header `image,landmarks,label`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub image: PathBuf,
    pub landmarks: PathBuf,
    /// index into [`DatasetManifest::classes`]
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub samples: Vec<Sample>,
    /// in order of first appearance
    pub classes: Vec<String>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }
}

/// Reads a manifest file; relative paths resolve against its directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new("")))
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<DatasetManifest> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::UnreadableRow { row: 0, reason: e.to_string() })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (ci, cl, cy) = (column("image")?, column("landmarks")?, column("label")?);

    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut classes: Vec<String> = Vec::new();
    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for (n, record) in reader.records().enumerate() {
        let row = n + 1;
        let record = record.map_err(|e| Error::UnreadableRow { row, reason: e.to_string() })?;
        let field = |i: usize| -> Result<&str> {
            match record.get(i) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(Error::UnreadableRow {
                    row,
                    reason: format!("empty column {}", headers.get(i).unwrap_or("?")),
                }),
            }
        };
        let (image, landmarks, label) = (field(ci)?, field(cl)?, field(cy)?);
        if !seen.insert((image.to_string(), label.to_string())) {
            return Err(Error::DuplicateSample {
                image: image.to_string(),
                label: label.to_string(),
            });
        }
        let label = match classes.iter().position(|c| c == label) {
            Some(i) => i,
            None => {
                classes.push(label.to_string());
                classes.len() - 1
            }
        };
        samples.push(Sample {
            image: resolve(image),
            landmarks: resolve(landmarks),
            label,
        });
    }
    if samples.is_empty() {
        return Err(Error::EmptyManifest);
    }
    Ok(DatasetManifest { samples, classes })
}
