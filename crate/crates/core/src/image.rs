//! 8-bit grayscale images and their loaders.

use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale image, at least 3x3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width < 3 || height < 3 || data.len() != width * height {
            return Err(Error::InvalidImage { width, height });
        }
        Ok(Image { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Writes the image as binary PGM (P5).
    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(file, "P5\n{} {}\n255\n", self.width, self.height)?;
        file.write_all(&self.data)?;
        file.flush()?;
        Ok(())
    }
}

/// ITU-R BT.601 luma, rounded to the nearest integer.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let v = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    v.round().clamp(0.0, 255.0) as u8
}

/// Loads a PGM (P5) or PNG file as grayscale. Color inputs are reduced with [`luma`].
pub fn load_grayscale_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::FileNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    decode_grayscale(&bytes)
}

pub fn decode_grayscale(bytes: &[u8]) -> Result<Image> {
    let format = if bytes.starts_with(b"P5") {
        ImageFormat::Pnm
    } else if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        ImageFormat::Png
    } else {
        let head: String = bytes
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect();
        return Err(Error::UnsupportedFormat(format!("magic bytes {head}")));
    };
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::CorruptImage(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let data = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        gray @ (DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_)) => {
            gray.to_luma8().into_raw()
        }
        color => color
            .to_rgb8()
            .pixels()
            .map(|p| luma(p.0[0], p.0[1], p.0[2]))
            .collect(),
    };
    Image::new(width, height, data)
}
