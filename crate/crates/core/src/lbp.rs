//! Basic (8,1) local binary patterns and 59-bin uniform histograms.
//!
//! Neighbors are visited clockwise from the top-left pixel; the top-left
//! comparison is the most significant bit:
//!
//! <pre>
//! 7  6  5
//! 0  c  4
//! 1  2  3
//! </pre>
//!
//! Bit k is set when that neighbor is greater than or equal to the center.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::RegionMask;
use crate::image::Image;

pub const NUM_BINS: usize = 59;
pub const NON_UNIFORM_BIN: usize = 58;
/// Label stored for border pixels, which have no full 3x3 neighborhood.
pub const UNDEFINED: u16 = 256;

/// (dx, dy) of the neighbor feeding bits 7 down to 0.
const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

#[inline]
fn label_unchecked(image: &Image, x: usize, y: usize) -> u8 {
    let center = image.get(x, y);
    let mut code = 0u8;
    for (dx, dy) in NEIGHBORS {
        let n = image.get((x as isize + dx) as usize, (y as isize + dy) as usize);
        code = (code << 1) | u8::from(n >= center);
    }
    code
}

pub fn lbp_label(image: &Image, x: usize, y: usize) -> Result<u8> {
    if x == 0 || y == 0 || x + 1 >= image.width() || y + 1 >= image.height() {
        return Err(Error::BorderPixel { x, y });
    }
    Ok(label_unchecked(image, x, y))
}

/// Number of 0/1 changes around the circular 8-bit string.
pub fn circular_transitions(code: u8) -> u32 {
    (code ^ code.rotate_left(1)).count_ones()
}

/// Maps each of the 256 codes to a histogram bin: the 58 uniform codes get
/// bins 0-57 in ascending code order, everything else bin 58.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformTable {
    map: [u8; 256],
}

impl UniformTable {
    pub fn bin(&self, code: u8) -> usize {
        self.map[code as usize] as usize
    }

    pub fn is_uniform(&self, code: u8) -> bool {
        self.bin(code) != NON_UNIFORM_BIN
    }
}

pub fn build_uniform_table() -> UniformTable {
    let mut map = [NON_UNIFORM_BIN as u8; 256];
    let mut next = 0u8;
    for code in 0..=255u8 {
        if circular_transitions(code) <= 2 {
            map[code as usize] = next;
            next += 1;
        }
    }
    debug_assert_eq!(next as usize, NON_UNIFORM_BIN);
    UniformTable { map }
}

pub fn uniform_table() -> &'static UniformTable {
    static TABLE: OnceLock<UniformTable> = OnceLock::new();
    TABLE.get_or_init(build_uniform_table)
}

/// Per-pixel LBP codes of a whole image, [`UNDEFINED`] on the border.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LbpLabelMap {
    width: usize,
    height: usize,
    labels: Vec<u16>,
}

impl LbpLabelMap {
    pub fn compute(image: &Image) -> Self {
        let (w, h) = (image.width(), image.height());
        let mut labels = vec![UNDEFINED; w * h];
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                labels[y * w + x] = label_unchecked(image, x, y) as u16;
            }
        }
        LbpLabelMap { width: w, height: h, labels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<u8> {
        match self.labels[y * self.width + x] {
            UNDEFINED => None,
            code => Some(code as u8),
        }
    }

    /// Labels as an image; border pixels are written as 0.
    pub fn to_image(&self) -> Image {
        let data = self
            .labels
            .iter()
            .map(|&l| if l == UNDEFINED { 0 } else { l as u8 })
            .collect();
        Image::new(self.width, self.height, data).expect("same dimensions as source")
    }

    /// Uniform histogram over the interior pixels of `mask`.
    pub fn histogram(&self, mask: &RegionMask, normalize: bool) -> Result<LbpHistogram> {
        let table = uniform_table();
        let mut bins = [0.0; NUM_BINS];
        let mut count = 0usize;
        for (x, y) in mask.pixels() {
            if x >= self.width || y >= self.height {
                continue;
            }
            if let Some(code) = self.get(x, y) {
                bins[table.bin(code)] += 1.0;
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::EmptyEffectiveRegion);
        }
        if normalize {
            let total = count as f64;
            bins.iter_mut().for_each(|b| *b /= total);
        }
        Ok(LbpHistogram { bins, normalized: normalize })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbpHistogram {
    pub bins: [f64; NUM_BINS],
    pub normalized: bool,
}

impl LbpHistogram {
    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }
}

pub fn lbp_histogram(image: &Image, mask: &RegionMask, normalize: bool) -> Result<LbpHistogram> {
    LbpLabelMap::compute(image).histogram(mask, normalize)
}
