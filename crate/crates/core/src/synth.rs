//! Synthetic face-like data: a 68-point mean shape, per-sample landmark
//! jitter, and images with class-specific textures painted into regions.
//!
//! Used by the test suites and the Python smoke test; it stands in for a
//! real annotated dataset where none can be shipped.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{build_regions, RegionScheme};
use crate::image::Image;
use crate::landmarks::{LandmarkSet, Point};

pub const TEMPLATE_WIDTH: usize = 200;
pub const TEMPLATE_HEIGHT: usize = 240;

#[rustfmt::skip]
const TEMPLATE: [(f64, f64); 68] = [
    (28.00, 95.00), (29.38, 118.41), (33.48, 140.92), (40.13, 161.67), (49.09, 179.85),
    (60.00, 194.78), (72.45, 205.87), (85.95, 212.69), (100.00, 215.00), (114.05, 212.69),
    (127.55, 205.87), (140.00, 194.78), (150.91, 179.85), (159.87, 161.67), (166.52, 140.92),
    (170.62, 118.41), (172.00, 95.00),
    (42.00, 72.00), (52.00, 64.00), (64.00, 61.00), (76.00, 62.00), (88.00, 66.00),
    (112.00, 66.00), (124.00, 62.00), (136.00, 61.00), (148.00, 64.00), (158.00, 72.00),
    (100.00, 78.00), (100.00, 92.00), (100.00, 106.00), (100.00, 120.00),
    (86.00, 130.00), (93.00, 133.00), (100.00, 135.00), (107.00, 133.00), (114.00, 130.00),
    (52.00, 86.00), (60.00, 81.00), (70.00, 81.00), (78.00, 87.00), (70.00, 90.00), (60.00, 90.00),
    (122.00, 87.00), (130.00, 81.00), (140.00, 81.00), (148.00, 86.00), (140.00, 90.00), (130.00, 90.00),
    (78.00, 160.00), (86.00, 154.00), (94.00, 151.00), (100.00, 152.00), (106.00, 151.00),
    (114.00, 154.00), (122.00, 160.00), (114.00, 168.00), (106.00, 171.00), (100.00, 172.00),
    (94.00, 171.00), (86.00, 168.00),
    (82.00, 160.00), (94.00, 157.00), (100.00, 157.00), (106.00, 157.00), (118.00, 160.00),
    (106.00, 163.00), (100.00, 164.00), (94.00, 163.00),
];

/// Frontal mean shape on a 200x240 canvas.
pub fn template_landmarks() -> LandmarkSet {
    LandmarkSet::new(TEMPLATE.iter().map(|&(x, y)| Point::new(x, y)).collect())
        .expect("template has 68 finite points")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Texture {
    HorizontalStripes { period: usize },
    VerticalStripes { period: usize },
    DiagonalStripes { period: usize },
    Checker { size: usize },
    Dots { spacing: usize },
    Flat,
}

impl Texture {
    fn value(&self, x: usize, y: usize, phase: usize) -> f64 {
        let on = match *self {
            Texture::HorizontalStripes { period } => (y + phase) % period < period / 2,
            Texture::VerticalStripes { period } => (x + phase) % period < period / 2,
            Texture::DiagonalStripes { period } => (x + y + phase) % period < period / 2,
            Texture::Checker { size } => ((x + phase) / size + y / size).is_multiple_of(2),
            Texture::Dots { spacing } => (x + phase) % spacing < 2 && y % spacing < 2,
            Texture::Flat => return 0.0,
        };
        if on {
            1.0
        } else {
            -1.0
        }
    }
}

/// What to paint on top of the noisy skin background.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceStyle {
    pub seed: u64,
    pub background: f64,
    pub noise: f64,
    /// (scheme29 region name, texture, contrast)
    pub textures: Vec<(String, Texture, f64)>,
}

impl FaceStyle {
    pub fn plain(seed: u64) -> Self {
        FaceStyle {
            seed,
            background: 128.0,
            noise: 24.0,
            textures: Vec::new(),
        }
    }
}

const CLASS_TEXTURES: [(&str, Texture); 7] = [
    ("mouth", Texture::HorizontalStripes { period: 4 }),
    ("eye_left", Texture::VerticalStripes { period: 4 }),
    ("brow_right", Texture::DiagonalStripes { period: 6 }),
    ("chin", Texture::Checker { size: 3 }),
    ("cheek_upper_left", Texture::Dots { spacing: 5 }),
    ("forehead_center", Texture::Flat),
    ("nose_right", Texture::HorizontalStripes { period: 8 }),
];

/// Style for a sample of class `class`: a class-specific texture in a
/// class-specific region.
pub fn class_style(class: usize, seed: u64) -> FaceStyle {
    let (region, texture) = CLASS_TEXTURES[class % CLASS_TEXTURES.len()];
    let mut style = FaceStyle::plain(seed);
    style.textures.push((region.to_string(), texture, 60.0));
    style
}

/// Class-dependent landmark displacement (mouth opening, brow raise, ...)
/// so that region shapes carry signal too.
pub fn deform_for_class(landmarks: &LandmarkSet, class: usize, amount: f64) -> LandmarkSet {
    let mut pts = landmarks.points().to_vec();
    let shift = |pts: &mut Vec<Point>, range: std::ops::RangeInclusive<usize>, dx: f64, dy: f64| {
        for i in range {
            pts[i].x += dx;
            pts[i].y += dy;
        }
    };
    match class % 7 {
        0 => {
            shift(&mut pts, 55..=59, 0.0, amount);
            shift(&mut pts, 65..=67, 0.0, amount);
        }
        1 => shift(&mut pts, 17..=26, 0.0, -amount),
        2 => {
            pts[48].y -= amount;
            pts[54].y -= amount;
            pts[48].x -= amount / 2.0;
            pts[54].x += amount / 2.0;
        }
        3 => shift(&mut pts, 21..=22, 0.0, amount / 2.0),
        4 => {
            shift(&mut pts, 37..=38, 0.0, -amount / 2.0);
            shift(&mut pts, 43..=44, 0.0, -amount / 2.0);
        }
        5 => {
            pts[48].x += amount / 2.0;
            pts[54].x -= amount / 2.0;
        }
        _ => {}
    }
    LandmarkSet::new(pts).expect("finite displacement")
}

/// Random similarity transform about the canvas center plus per-point noise.
pub fn jitter_landmarks(landmarks: &LandmarkSet, rng: &mut impl Rng, point_noise: f64) -> LandmarkSet {
    let scale = rng.random_range(0.96..1.04);
    let angle: f64 = rng.random_range(-0.04..0.04);
    let (tx, ty) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    let (cx, cy) = (TEMPLATE_WIDTH as f64 / 2.0, TEMPLATE_HEIGHT as f64 / 2.0);
    let (s, c) = angle.sin_cos();
    let pts = landmarks
        .points()
        .iter()
        .map(|p| {
            let (dx, dy) = (p.x - cx, p.y - cy);
            let x = cx + scale * (c * dx - s * dy) + tx + rng.random_range(-point_noise..=point_noise);
            let y = cy + scale * (s * dx + c * dy) + ty + rng.random_range(-point_noise..=point_noise);
            Point::new(x, y)
        })
        .collect();
    LandmarkSet::new(pts).expect("finite jitter")
}

pub fn render_face(landmarks: &LandmarkSet, style: &FaceStyle, width: usize, height: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(style.seed);
    let tilt_x: f64 = rng.random_range(-0.1..0.1);
    let tilt_y: f64 = rng.random_range(-0.1..0.1);
    let mut values: Vec<f64> = (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            style.background + tilt_x * x + tilt_y * y + rng.random_range(-style.noise..=style.noise)
        })
        .collect();
    if !style.textures.is_empty() {
        let scheme = RegionScheme::builtin("scheme29").expect("shipped scheme");
        let masks = build_regions(landmarks, &scheme, width, height)
            .expect("synthetic landmarks yield valid regions");
        for (region, texture, contrast) in &style.textures {
            let Some(index) = scheme.index_of(region) else { continue };
            let phase = rng.random_range(0..8);
            let level = match texture {
                Texture::Flat => rng.random_range(60.0..80.0),
                _ => 0.0,
            };
            for (x, y) in masks[index].pixels() {
                let v = &mut values[y * width + x];
                match texture {
                    // nearly uniform patch: collapses the noise
                    Texture::Flat => *v = style.background + level + (*v - style.background) * 0.05,
                    t => *v += contrast * t.value(x, y, phase),
                }
            }
        }
    }
    let data = values.into_iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    Image::new(width, height, data).expect("canvas at least 3x3")
}

/// One rendered sample of `class` with fresh jitter.
pub fn sample_face(class: usize, rng: &mut impl Rng) -> (Image, LandmarkSet) {
    let deformed = deform_for_class(&template_landmarks(), class, 5.0);
    let landmarks = jitter_landmarks(&deformed, rng, 0.6);
    let style = class_style(class, rng.random());
    let image = render_face(&landmarks, &style, TEMPLATE_WIDTH, TEMPLATE_HEIGHT);
    (image, landmarks)
}

pub const CLASS_NAMES: [&str; 7] = ["AN", "DI", "FE", "HA", "SA", "SU", "NU"];

/// Writes `per_class` PNG + pts pairs for each of `classes` classes and a
/// `manifest.csv` with relative paths; returns the manifest path.
pub fn write_dataset(dir: &Path, classes: usize, per_class: usize, seed: u64) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = String::from("image,landmarks,label\n");
    for k in 0..per_class {
        for class in 0..classes {
            let (image, landmarks) = sample_face(class, &mut rng);
            let label = CLASS_NAMES[class % CLASS_NAMES.len()];
            let stem = format!("{label}_{k:03}");
            let png = format!("{stem}.png");
            let pts = format!("{stem}.pts");
            image::GrayImage::from_raw(image.width() as u32, image.height() as u32, image.data().to_vec())
                .expect("buffer matches dimensions")
                .save(dir.join(&png))
                .map_err(|e| std::io::Error::other(e.to_string()))?;
            std::fs::write(dir.join(&pts), landmarks.to_pts_string())?;
            manifest.push_str(&format!("{png},{pts},{label}\n"));
        }
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest)?;
    Ok(path)
}
