//! Landmark-anchored region schemes and their rasterization into pixel masks.
//!
//! A [`RegionScheme`] lists polygons whose vertices are either landmarks or
//! affine combinations of landmarks (used for the forehead, which the 68
//! points do not reach). [`build_regions`] turns a scheme plus a landmark set
//! into disjoint [`RegionMask`]s: a pixel claimed by several polygons goes to
//! the lowest-index region. The optional whole-face mask is the union of all
//! region polygons and comes last.
//!
//! Pixel membership uses the pixel center `(x + 0.5, y + 0.5)` and the
//! half-open crossing rule, so adjacent polygons sharing an edge tile the
//! plane without gaps or double claims.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::landmarks::{LandmarkSet, Point, NUM_LANDMARKS};

pub const WHOLE_FACE: &str = "whole_face";

const SCHEME29_JSON: &str = include_str!("../schemes/scheme29.json");
const SCHEME17_JSON: &str = include_str!("../schemes/scheme17.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedLandmark {
    pub landmark: usize,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Vertex {
    #[serde(rename = "landmark")]
    Landmark(usize),
    #[serde(rename = "derived")]
    Derived(Vec<WeightedLandmark>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub vertices: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionScheme {
    pub name: String,
    pub include_whole_face: bool,
    pub regions: Vec<RegionDef>,
}

impl RegionScheme {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let scheme: RegionScheme = serde_json::from_str(text)?;
        scheme.validate()?;
        Ok(scheme)
    }

    /// Loads a scheme file, or one of the shipped schemes by name
    /// (`scheme29`, `scheme17`).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            if let Some(builtin) = path.to_str().and_then(RegionScheme::builtin) {
                return Ok(builtin);
            }
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        RegionScheme::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let text = match name.trim_end_matches(".json") {
            "scheme29" | "29" => SCHEME29_JSON,
            "scheme17" | "17" => SCHEME17_JSON,
            _ => return None,
        };
        Some(RegionScheme::from_json_str(text).expect("shipped scheme is valid"))
    }

    pub fn builtins() -> Vec<RegionScheme> {
        ["scheme29", "scheme17"]
            .iter()
            .filter_map(|n| RegionScheme::builtin(n))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions.is_empty() {
            return Err(Error::InvalidScheme("no regions".into()));
        }
        let mut names = HashSet::new();
        for region in &self.regions {
            if region.name == WHOLE_FACE {
                return Err(Error::InvalidScheme(format!("{WHOLE_FACE:?} is reserved")));
            }
            if !names.insert(region.name.as_str()) {
                return Err(Error::InvalidScheme(format!(
                    "duplicate region name {:?}",
                    region.name
                )));
            }
            if region.vertices.len() < 3 {
                return Err(Error::InvalidScheme(format!(
                    "region {:?} has fewer than 3 vertices",
                    region.name
                )));
            }
            for vertex in &region.vertices {
                check_vertex(vertex).map_err(|e| e.in_region(&region.name))?;
            }
        }
        Ok(())
    }

    /// Number of masks [`build_regions`] produces.
    pub fn mask_count(&self) -> usize {
        self.regions.len() + usize::from(self.include_whole_face)
    }

    /// Region names in mask order, whole face last.
    pub fn mask_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.regions.iter().map(|r| r.name.clone()).collect();
        if self.include_whole_face {
            names.push(WHOLE_FACE.to_string());
        }
        names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.mask_names().iter().position(|n| n == name)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> [u8; 32] {
        let canonical = serde_json::to_vec(self).expect("scheme serializes");
        Sha256::digest(&canonical).into()
    }
}

fn check_vertex(vertex: &Vertex) -> Result<()> {
    match vertex {
        Vertex::Landmark(i) if *i >= NUM_LANDMARKS => Err(Error::IndexOutOfRange(*i)),
        Vertex::Landmark(_) => Ok(()),
        Vertex::Derived(terms) => {
            if let Some(t) = terms.iter().find(|t| t.landmark >= NUM_LANDMARKS) {
                return Err(Error::IndexOutOfRange(t.landmark));
            }
            let sum: f64 = terms.iter().map(|t| t.w).sum();
            if terms.is_empty() || !sum.is_finite() || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::BadWeights(sum));
            }
            Ok(())
        }
    }
}

/// Concrete polygon of a region for the given landmarks.
pub fn resolve_vertices(landmarks: &LandmarkSet, def: &RegionDef) -> Result<Vec<Point>> {
    def.vertices
        .iter()
        .map(|vertex| {
            check_vertex(vertex)?;
            Ok(match vertex {
                Vertex::Landmark(i) => landmarks.points()[*i],
                Vertex::Derived(terms) => {
                    terms.iter().fold(Point::default(), |acc, t| {
                        let p = landmarks.points()[t.landmark];
                        Point::new(acc.x + t.w * p.x, acc.y + t.w * p.y)
                    })
                }
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BBox {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

/// Binary pixel set stored over its tight bounding box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionMask {
    pub region: usize,
    bbox: BBox,
    bits: Vec<bool>,
    pixel_count: usize,
}

impl RegionMask {
    /// Builds a mask from absolute pixel coordinates. Duplicates are ignored.
    pub fn from_pixels(region: usize, pixels: &[(usize, usize)]) -> RegionMask {
        if pixels.is_empty() {
            return RegionMask {
                region,
                bbox: BBox { x0: 0, y0: 0, w: 0, h: 0 },
                bits: Vec::new(),
                pixel_count: 0,
            };
        }
        let x0 = pixels.iter().map(|p| p.0).min().unwrap();
        let y0 = pixels.iter().map(|p| p.1).min().unwrap();
        let w = pixels.iter().map(|p| p.0).max().unwrap() - x0 + 1;
        let h = pixels.iter().map(|p| p.1).max().unwrap() - y0 + 1;
        let mut bits = vec![false; w * h];
        for &(x, y) in pixels {
            bits[(y - y0) * w + (x - x0)] = true;
        }
        let pixel_count = bits.iter().filter(|&&b| b).count();
        RegionMask {
            region,
            bbox: BBox { x0, y0, w, h },
            bits,
            pixel_count,
        }
    }

    fn from_grid(region: usize, grid: &[bool], width: usize) -> RegionMask {
        let pixels: Vec<(usize, usize)> = grid
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % width, i / width))
            .collect();
        RegionMask::from_pixels(region, &pixels)
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn pixel_count(&self) -> usize {
        self.pixel_count
    }

    pub fn is_empty(&self) -> bool {
        self.pixel_count == 0
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        let b = self.bbox;
        x >= b.x0
            && y >= b.y0
            && x < b.x0 + b.w
            && y < b.y0 + b.h
            && self.bits[(y - b.y0) * b.w + (x - b.x0)]
    }

    /// Member pixels in row-major order, absolute coordinates.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let b = self.bbox;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &set)| set)
            .map(move |(i, _)| (b.x0 + i % b.w, b.y0 + i / b.w))
    }
}

/// Crossing positions of the horizontal line `y = yc` with the polygon edges.
fn row_crossings(polygon: &[Point], yc: f64, out: &mut Vec<f64>) {
    out.clear();
    let n = polygon.len();
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (polygon[i], polygon[j]);
        if (pi.y > yc) != (pj.y > yc) {
            out.push((pj.x - pi.x) * (yc - pi.y) / (pj.y - pi.y) + pi.x);
        }
        j = i;
    }
    out.sort_by(f64::total_cmp);
}

/// Scanline rasterization of a polygon over a `width` x `height` image.
pub fn rasterize_region(
    polygon: &[Point],
    width: usize,
    height: usize,
    region_index: usize,
) -> Result<RegionMask> {
    let grid = rasterize_grid(polygon, width, height)?;
    let mask = RegionMask::from_grid(region_index, &grid, width);
    if mask.is_empty() {
        return Err(Error::DegeneratePolygon);
    }
    Ok(mask)
}

fn rasterize_grid(polygon: &[Point], width: usize, height: usize) -> Result<Vec<bool>> {
    if polygon.len() < 3 || polygon.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::DegeneratePolygon);
    }
    let mut grid = vec![false; width * height];
    let min_y = polygon.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_y = polygon.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let y_start = (min_y - 1.0).floor().max(0.0) as usize;
    let y_end = ((max_y + 1.0).ceil().max(0.0) as usize).min(height);
    let mut xs = Vec::new();
    for y in y_start..y_end {
        let yc = y as f64 + 0.5;
        row_crossings(polygon, yc, &mut xs);
        for span in xs.chunks_exact(2) {
            let (a, b) = (span[0], span[1]);
            let x_start = (a - 1.5).floor().max(0.0) as usize;
            let x_end = ((b + 1.0).ceil().max(0.0) as usize).min(width);
            for x in x_start..x_end {
                let xc = x as f64 + 0.5;
                if xc >= a && xc < b {
                    grid[y * width + x] = true;
                }
            }
        }
    }
    Ok(grid)
}

/// Rasterizes every region of `scheme`, resolves overlaps in favour of the
/// lower index, and appends the whole-face mask when the scheme asks for it.
pub fn build_regions(
    landmarks: &LandmarkSet,
    scheme: &RegionScheme,
    width: usize,
    height: usize,
) -> Result<Vec<RegionMask>> {
    scheme.validate()?;
    landmarks.check_hull()?;
    let mut claimed = vec![false; width * height];
    let mut masks = Vec::with_capacity(scheme.mask_count());
    for (index, def) in scheme.regions.iter().enumerate() {
        let polygon = resolve_vertices(landmarks, def).map_err(|e| e.in_region(&def.name))?;
        let mut grid =
            rasterize_grid(&polygon, width, height).map_err(|e| e.in_region(&def.name))?;
        if !grid.iter().any(|&b| b) {
            return Err(Error::DegeneratePolygon.in_region(&def.name));
        }
        for (own, taken) in grid.iter_mut().zip(claimed.iter_mut()) {
            if *own {
                if *taken {
                    *own = false;
                } else {
                    *taken = true;
                }
            }
        }
        let mask = RegionMask::from_grid(index, &grid, width);
        if mask.is_empty() {
            return Err(Error::EmptyRegion(def.name.clone()));
        }
        masks.push(mask);
    }
    if scheme.include_whole_face {
        masks.push(RegionMask::from_grid(scheme.regions.len(), &claimed, width));
    }
    Ok(masks)
}

/// Tight bounding box of the union of `masks`.
pub fn face_box(masks: &[RegionMask]) -> Result<BBox> {
    let boxes: Vec<BBox> = masks.iter().filter(|m| !m.is_empty()).map(|m| m.bbox()).collect();
    if boxes.is_empty() {
        return Err(Error::EmptyBox);
    }
    let x0 = boxes.iter().map(|b| b.x0).min().unwrap();
    let y0 = boxes.iter().map(|b| b.y0).min().unwrap();
    let x1 = boxes.iter().map(|b| b.x0 + b.w).max().unwrap();
    let y1 = boxes.iter().map(|b| b.y0 + b.h).max().unwrap();
    Ok(BBox { x0, y0, w: x1 - x0, h: y1 - y0 })
}

/// Splits `bbox` into `rows` x `cols` rectangular blocks, row-major. Blocks
/// share the floor size; the remainder goes to the last row and column.
pub fn partition_grid(bbox: BBox, rows: usize, cols: usize) -> Result<Vec<RegionMask>> {
    if bbox.w == 0 || bbox.h == 0 || rows == 0 || cols == 0 || rows > bbox.h || cols > bbox.w {
        return Err(Error::EmptyBox);
    }
    let spans = |len: usize, parts: usize| -> Vec<(usize, usize)> {
        let base = len / parts;
        (0..parts)
            .map(|k| {
                let size = if k + 1 == parts { len - base * k } else { base };
                (base * k, size)
            })
            .collect()
    };
    let row_spans = spans(bbox.h, rows);
    let col_spans = spans(bbox.w, cols);
    let mut blocks = Vec::with_capacity(rows * cols);
    for (r, &(ry, rh)) in row_spans.iter().enumerate() {
        for (c, &(cx, cw)) in col_spans.iter().enumerate() {
            blocks.push(RegionMask {
                region: r * cols + c,
                bbox: BBox {
                    x0: bbox.x0 + cx,
                    y0: bbox.y0 + ry,
                    w: cw,
                    h: rh,
                },
                bits: vec![true; cw * rh],
                pixel_count: cw * rh,
            });
        }
    }
    Ok(blocks)
}

pub fn grid_names(rows: usize, cols: usize) -> Vec<String> {
    (0..rows)
        .flat_map(|r| (0..cols).map(move |c| format!("grid_r{r}_c{c}")))
        .collect()
}
