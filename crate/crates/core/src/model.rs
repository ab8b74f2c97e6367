//! Versioned binary model container.
//!
//! Layout (little-endian): magic `RFER`, format version u32, SHA-256 of the
//! region scheme (32 bytes), region source (u8 0 = scheme, 1 = grid followed
//! by rows and cols as u32), selected region indices (u32 count + u32 each),
//! feature kinds (u8), scaling (u32 dim, dim mins, dim maxs as f64), then
//! the classes (u32 count; per class a u32-prefixed UTF-8 name followed by
//! its binary model block).

use std::path::Path;

use crate::codec::*;
use crate::error::{Error, Result};
use crate::features::{FeatureKinds, RegionSource, ScalingStats};
use crate::geometry::RegionScheme;
use crate::svm::{BinaryModel, SvmModel};

pub const MAGIC: &[u8; 4] = b"RFER";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct SavedModel {
    pub scheme_hash: [u8; 32],
    pub source: RegionSource,
    /// ascending indices into the source's region list
    pub regions: Vec<usize>,
    pub kinds: FeatureKinds,
    pub svm: SvmModel,
}

impl SavedModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, FORMAT_VERSION);
        out.extend_from_slice(&self.scheme_hash);
        match self.source {
            RegionSource::Scheme => put_u8(&mut out, 0),
            RegionSource::Grid { rows, cols } => {
                put_u8(&mut out, 1);
                put_len(&mut out, rows);
                put_len(&mut out, cols);
            }
        }
        put_len(&mut out, self.regions.len());
        for &r in &self.regions {
            put_len(&mut out, r);
        }
        put_u8(&mut out, self.kinds.code());
        let scaling = &self.svm.scaling;
        put_len(&mut out, scaling.dim());
        for &v in scaling.min.iter().chain(&scaling.max) {
            put_f64(&mut out, v);
        }
        put_len(&mut out, self.svm.classes.len());
        for (name, model) in self.svm.classes.iter().zip(&self.svm.models) {
            put_str(&mut out, name);
            model.write_block(&mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut input = bytes;
        if take(&mut input, 4).ok() != Some(MAGIC.as_slice()) {
            return Err(Error::ModelFormat("missing RFER magic".into()));
        }
        let version = get_u32(&mut input)?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!("unsupported format version {version}")));
        }
        let scheme_hash: [u8; 32] = take(&mut input, 32)?.try_into().unwrap();
        let source = match get_u8(&mut input)? {
            0 => RegionSource::Scheme,
            1 => RegionSource::Grid {
                rows: get_len(&mut input)?,
                cols: get_len(&mut input)?,
            },
            t => return Err(Error::ModelFormat(format!("unknown region source {t}"))),
        };
        let n_regions = get_len(&mut input)?;
        let regions = (0..n_regions).map(|_| get_len(&mut input)).collect::<Result<Vec<_>>>()?;
        let code = get_u8(&mut input)?;
        let kinds = FeatureKinds::from_code(code).ok_or_else(|| Error::ModelFormat(format!("unknown feature kinds {code}")))?;
        let dim = get_len(&mut input)?;
        let min = get_f64s(&mut input, dim)?;
        let max = get_f64s(&mut input, dim)?;
        let n_classes = get_len(&mut input)?;
        let mut classes = Vec::new();
        let mut models = Vec::new();
        for _ in 0..n_classes {
            classes.push(get_str(&mut input)?);
            models.push(BinaryModel::read_block(&mut input)?);
        }
        if !input.is_empty() {
            return Err(Error::ModelFormat(format!("{} trailing bytes", input.len())));
        }
        if n_classes < 2 {
            return Err(Error::ModelFormat("fewer than two classes".into()));
        }
        Ok(SavedModel {
            scheme_hash,
            source,
            regions,
            kinds,
            svm: SvmModel {
                classes,
                models,
                scaling: ScalingStats {
                    method: "minmax".into(),
                    min,
                    max,
                },
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        SavedModel::from_bytes(&bytes)
    }

    pub fn check_scheme(&self, scheme: &RegionScheme) -> Result<()> {
        if scheme.hash() == self.scheme_hash {
            Ok(())
        } else {
            Err(Error::SchemeMismatch)
        }
    }
}
