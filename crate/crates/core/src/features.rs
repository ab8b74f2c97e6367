//! Per-region descriptor blocks, their concatenation into feature vectors,
//! and min-max scaling fitted on training data.
//!
//! Layout is fixed: regions in scheme order (whole face last), and within a
//! region the 59-bin LBP block precedes the 7-entry NCM block.

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, RegionMask, RegionScheme};
use crate::image::Image;
use crate::landmarks::LandmarkSet;
use crate::lbp::{LbpLabelMap, NUM_BINS};
use crate::moments::{normalized_central_moments, NCM_LEN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKinds {
    Lbp,
    Ncm,
    Both,
}

impl FeatureKinds {
    pub fn lbp(self) -> bool {
        matches!(self, FeatureKinds::Lbp | FeatureKinds::Both)
    }

    pub fn ncm(self) -> bool {
        matches!(self, FeatureKinds::Ncm | FeatureKinds::Both)
    }

    /// Length of one region's block.
    pub fn block_len(self) -> usize {
        usize::from(self.lbp()) * NUM_BINS + usize::from(self.ncm()) * NCM_LEN
    }

    pub fn code(self) -> u8 {
        match self {
            FeatureKinds::Lbp => 1,
            FeatureKinds::Ncm => 2,
            FeatureKinds::Both => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(FeatureKinds::Lbp),
            2 => Some(FeatureKinds::Ncm),
            3 => Some(FeatureKinds::Both),
            _ => None,
        }
    }
}

impl FromStr for FeatureKinds {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lbp" => Ok(FeatureKinds::Lbp),
            "ncm" => Ok(FeatureKinds::Ncm),
            "both" => Ok(FeatureKinds::Both),
            other => Err(format!("unknown feature kind {other:?} (lbp|ncm|both)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    #[serde(rename = "LBP")]
    Lbp,
    #[serde(rename = "NCM")]
    Ncm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub region: String,
    pub kind: BlockKind,
    pub offset: usize,
    pub length: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub entries: Vec<LayoutEntry>,
}

impl FeatureLayout {
    pub fn build(region_names: &[&str], kinds: FeatureKinds) -> Self {
        let mut entries = Vec::new();
        let mut offset = 0;
        for name in region_names {
            let mut push = |kind, length| {
                entries.push(LayoutEntry {
                    region: name.to_string(),
                    kind,
                    offset,
                    length,
                });
                offset += length;
            };
            if kinds.lbp() {
                push(BlockKind::Lbp, NUM_BINS);
            }
            if kinds.ncm() {
                push(BlockKind::Ncm, NCM_LEN);
            }
        }
        FeatureLayout { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(|e| e.length).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One column name per dimension, e.g. `mouth:LBP:12`.
    pub fn column_names(&self) -> Vec<String> {
        self.entries
            .iter()
            .flat_map(|e| {
                let kind = match e.kind {
                    BlockKind::Lbp => "LBP",
                    BlockKind::Ncm => "NCM",
                };
                (0..e.length).map(move |k| format!("{}:{}:{}", e.region, kind, k))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: Arc<FeatureLayout>,
}

/// Where region masks come from: a landmark scheme, or a regular grid over
/// the face box of that scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionSource {
    Scheme,
    Grid { rows: usize, cols: usize },
}

impl RegionSource {
    pub fn region_names(&self, scheme: &RegionScheme) -> Vec<String> {
        match *self {
            RegionSource::Scheme => scheme.mask_names(),
            RegionSource::Grid { rows, cols } => geometry::grid_names(rows, cols),
        }
    }

    pub fn masks(
        &self,
        landmarks: &LandmarkSet,
        scheme: &RegionScheme,
        width: usize,
        height: usize,
    ) -> Result<Vec<RegionMask>> {
        let masks = geometry::build_regions(landmarks, scheme, width, height)?;
        match *self {
            RegionSource::Scheme => Ok(masks),
            RegionSource::Grid { rows, cols } => {
                geometry::partition_grid(geometry::face_box(&masks)?, rows, cols)
            }
        }
    }
}

/// Descriptor blocks of every region of one image, in region order.
pub fn region_blocks(
    image: &Image,
    masks: &[RegionMask],
    names: &[String],
    kinds: FeatureKinds,
) -> Result<Vec<Vec<f64>>> {
    let labels = kinds.lbp().then(|| LbpLabelMap::compute(image));
    masks
        .iter()
        .zip(names)
        .map(|(mask, name)| {
            let mut block = Vec::with_capacity(kinds.block_len());
            if let Some(labels) = &labels {
                let hist = labels.histogram(mask, true).map_err(|e| e.in_region(name))?;
                block.extend_from_slice(&hist.bins);
            }
            if kinds.ncm() {
                let nu = normalized_central_moments(mask).map_err(|e| e.in_region(name))?;
                block.extend_from_slice(&nu);
            }
            Ok(block)
        })
        .collect()
}

pub fn extract_features(
    image: &Image,
    landmarks: &LandmarkSet,
    scheme: &RegionScheme,
    region_indices: &[usize],
    kinds: FeatureKinds,
) -> Result<FeatureVector> {
    extract_features_from(image, landmarks, scheme, RegionSource::Scheme, region_indices, kinds)
}

pub fn extract_features_from(
    image: &Image,
    landmarks: &LandmarkSet,
    scheme: &RegionScheme,
    source: RegionSource,
    region_indices: &[usize],
    kinds: FeatureKinds,
) -> Result<FeatureVector> {
    let names = source.region_names(scheme);
    let indices = normalize_indices(region_indices, names.len())?;
    let masks = source.masks(landmarks, scheme, image.width(), image.height())?;
    let chosen_masks: Vec<RegionMask> = indices.iter().map(|&i| masks[i].clone()).collect();
    let chosen_names: Vec<String> = indices.iter().map(|&i| names[i].clone()).collect();
    let blocks = region_blocks(image, &chosen_masks, &chosen_names, kinds)?;
    let name_refs: Vec<&str> = chosen_names.iter().map(String::as_str).collect();
    Ok(FeatureVector {
        values: blocks.concat(),
        layout: Arc::new(FeatureLayout::build(&name_refs, kinds)),
    })
}

/// Sorted, deduplicated indices; errors on empty or out-of-range input.
pub fn normalize_indices(indices: &[usize], count: usize) -> Result<Vec<usize>> {
    if indices.is_empty() {
        return Err(Error::NoRegions);
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&i| i >= count) {
        return Err(Error::UnknownRegion(bad.to_string()));
    }
    Ok(sorted)
}

/// Per-sample, per-region descriptor blocks for a whole dataset, so subsets
/// of regions can be assembled without re-extracting.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub region_names: Vec<String>,
    pub kinds: FeatureKinds,
    /// `blocks[sample][region]`
    pub blocks: Vec<Vec<Vec<f64>>>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn region_count(&self) -> usize {
        self.region_names.len()
    }

    /// Feature matrix over the given regions (emitted in ascending index order).
    pub fn matrix(&self, regions: &[usize]) -> Result<(Vec<Vec<f64>>, FeatureLayout)> {
        let indices = normalize_indices(regions, self.region_count())?;
        let names: Vec<&str> = indices.iter().map(|&i| self.region_names[i].as_str()).collect();
        let layout = FeatureLayout::build(&names, self.kinds);
        let rows = self
            .blocks
            .iter()
            .map(|sample| indices.iter().flat_map(|&i| sample[i].iter().copied()).collect())
            .collect();
        Ok((rows, layout))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingStats {
    pub method: String,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingStats {
    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

pub fn fit_scaling(training: &[Vec<f64>]) -> Result<ScalingStats> {
    let first = training.first().ok_or(Error::LayoutMismatch { expected: 1, got: 0 })?;
    let dim = first.len();
    let mut min = first.clone();
    let mut max = first.clone();
    for row in &training[1..] {
        if row.len() != dim {
            return Err(Error::LayoutMismatch { expected: dim, got: row.len() });
        }
        for (k, &v) in row.iter().enumerate() {
            min[k] = min[k].min(v);
            max[k] = max[k].max(v);
        }
    }
    Ok(ScalingStats {
        method: "minmax".into(),
        min,
        max,
    })
}

/// Maps each dimension through `(v - min) / (max - min)` without clipping;
/// constant training dimensions map to 0.
pub fn apply_scaling(stats: &ScalingStats, vector: &[f64]) -> Result<Vec<f64>> {
    if vector.len() != stats.dim() {
        return Err(Error::LayoutMismatch {
            expected: stats.dim(),
            got: vector.len(),
        });
    }
    Ok(vector
        .iter()
        .zip(stats.min.iter().zip(&stats.max))
        .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect())
}
