use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image: {0}")]
    CorruptImage(String),
    #[error("invalid image dimensions {width}x{height} (need at least 3x3 and width*height bytes)")]
    InvalidImage { width: usize, height: usize },

    #[error("expected 68 landmarks, found {0}")]
    WrongPointCount(usize),
    #[error("malformed landmark line {line}: {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("non-finite landmark coordinate at point {0}")]
    NonFiniteCoordinate(usize),
    #[error("landmarks are collinear (zero-area hull)")]
    DegenerateLandmarks,

    #[error("manifest is missing column {0:?}")]
    MissingColumn(String),
    #[error("manifest has no samples")]
    EmptyManifest,
    #[error("unreadable manifest row {row}: {reason}")]
    UnreadableRow { row: usize, reason: String },
    #[error("duplicate manifest entry ({image}, {label})")]
    DuplicateSample { image: String, label: String },

    #[error("landmark index {0} out of range (0..68)")]
    IndexOutOfRange(usize),
    #[error("derived vertex weights sum to {0}, expected 1")]
    BadWeights(f64),
    #[error("invalid region scheme: {0}")]
    InvalidScheme(String),
    #[error("polygon covers no pixel centers inside the image")]
    DegeneratePolygon,
    #[error("region {0:?} is empty after rasterization")]
    EmptyRegion(String),
    #[error("empty face box")]
    EmptyBox,

    #[error("pixel ({x}, {y}) is on the image border")]
    BorderPixel { x: usize, y: usize },
    #[error("mask has no interior pixels")]
    EmptyEffectiveRegion,
    #[error("mask has no pixels")]
    EmptyMask,

    #[error("no regions selected")]
    NoRegions,
    #[error("region {region:?}: {source}")]
    InRegion {
        region: String,
        #[source]
        source: Box<Error>,
    },
    #[error("sample {}: {source}", image.display())]
    InSample {
        image: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("feature layout mismatch: expected length {expected}, got {got}")]
    LayoutMismatch { expected: usize, got: usize },

    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("training data contains a single class")]
    SingleClassInput,
    #[error("non-finite feature value at sample {sample}, dimension {dim}")]
    NonFiniteFeature { sample: usize, dim: usize },
    #[error("invalid training parameters: {0}")]
    InvalidParams(String),

    #[error("class {0:?} has fewer samples than folds")]
    ClassTooSmall(String),
    #[error("invalid fold assignment: {0}")]
    InvalidFolds(String),

    #[error("seed region {0:?} is not in the scheme")]
    SeedNotInScheme(String),
    #[error("unknown region {0:?}")]
    UnknownRegion(String),

    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("model was trained with a different region scheme")]
    SchemeMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_region(self, region: &str) -> Error {
        Error::InRegion {
            region: region.to_string(),
            source: Box::new(self),
        }
    }

    pub fn in_sample(self, image: &std::path::Path) -> Error {
        Error::InSample {
            image: image.to_path_buf(),
            source: Box::new(self),
        }
    }
}
