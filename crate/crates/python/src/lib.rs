//! Python bindings: images, landmarks, region schemes, descriptor
//! extraction, SVM training and cross-validation, saved models.

use std::path::PathBuf;

use pyo3::exceptions::{PyFileNotFoundError, PyIOError, PyValueError};
use pyo3::prelude::*;

use regionfer::features::{extract_features_from, FeatureKinds, RegionSource};
use regionfer::geometry::WHOLE_FACE;
use regionfer::{eval, svm, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::FileNotFound(p) => PyFileNotFoundError::new_err(p.display().to_string()),
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn kinds(s: &str) -> PyResult<FeatureKinds> {
    s.parse().map_err(PyValueError::new_err)
}

fn source(grid: Option<(usize, usize)>) -> RegionSource {
    match grid {
        Some((rows, cols)) => RegionSource::Grid { rows, cols },
        None => RegionSource::Scheme,
    }
}

/// 8-bit grayscale image.
#[pyclass(frozen)]
struct Image(regionfer::Image);

#[pymethods]
impl Image {
    #[new]
    fn new(width: usize, height: usize, data: Vec<u8>) -> PyResult<Self> {
        regionfer::Image::new(width, height, data).map(Image).map_err(py_err)
    }

    /// Decode PNG, PGM or PPM; color images are converted to luma.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        regionfer::load_grayscale_image(path).map(Image).map_err(py_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    /// Row-major pixel values.
    fn pixels(&self) -> Vec<u8> {
        self.0.data().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.0.width(), self.0.height())
    }
}

/// The 68 facial landmarks of one face.
#[pyclass(frozen)]
struct Landmarks(regionfer::LandmarkSet);

#[pymethods]
impl Landmarks {
    #[new]
    fn new(points: Vec<(f64, f64)>) -> PyResult<Self> {
        let points = points.into_iter().map(|(x, y)| regionfer::Point::new(x, y)).collect();
        regionfer::LandmarkSet::new(points).map(Landmarks).map_err(py_err)
    }

    /// Read a `.pts` file or a plain list of `x y` lines.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        regionfer::parse_landmarks(path).map(Landmarks).map_err(py_err)
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.0.points().iter().map(|p| (p.x, p.y)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.points().len()
    }
}

/// Named polygonal regions defined over the landmarks.
#[pyclass(frozen)]
struct RegionScheme(regionfer::RegionScheme);

#[pymethods]
impl RegionScheme {
    /// `scheme29` or `scheme17`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        regionfer::RegionScheme::builtin(name)
            .map(RegionScheme)
            .ok_or_else(|| PyValueError::new_err(format!("no builtin scheme {name:?}")))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        regionfer::RegionScheme::load(path).map(RegionScheme).map_err(py_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    /// Mask names in feature order, including the whole-face mask if the
    /// scheme has one.
    fn region_names(&self) -> Vec<String> {
        self.0.mask_names()
    }

    fn hash_hex(&self) -> String {
        self.0.hash().iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl RegionScheme {
    fn indices(&self, regions: Option<Vec<String>>, src: RegionSource) -> PyResult<Vec<usize>> {
        let names = src.region_names(&self.0);
        match regions {
            None => Ok((0..names.len()).collect()),
            Some(wanted) => wanted
                .iter()
                .map(|w| {
                    names
                        .iter()
                        .position(|n| n == w)
                        .ok_or_else(|| py_err(Error::UnknownRegion(w.clone())))
                })
                .collect(),
        }
    }
}

type NamedPixels = (String, Vec<(usize, usize)>);

/// Rasterized masks of every region, as lists of `(x, y)` pixels keyed by
/// region name.
#[pyfunction]
#[pyo3(signature = (landmarks, scheme, width, height, grid=None))]
fn region_pixels(
    landmarks: &Landmarks,
    scheme: &RegionScheme,
    width: usize,
    height: usize,
    grid: Option<(usize, usize)>,
) -> PyResult<Vec<NamedPixels>> {
    let src = source(grid);
    let masks = src.masks(&landmarks.0, &scheme.0, width, height).map_err(py_err)?;
    Ok(src
        .region_names(&scheme.0)
        .into_iter()
        .zip(&masks)
        .map(|(name, m)| (name, m.pixels().collect()))
        .collect())
}

/// 59-bin uniform LBP histogram of one region.
#[pyfunction]
#[pyo3(signature = (image, landmarks, scheme, region, normalize=true))]
fn lbp_histogram(
    image: &Image,
    landmarks: &Landmarks,
    scheme: &RegionScheme,
    region: String,
    normalize: bool,
) -> PyResult<Vec<f64>> {
    let index = scheme.indices(Some(vec![region]), RegionSource::Scheme)?[0];
    let masks = regionfer::build_regions(&landmarks.0, &scheme.0, image.0.width(), image.0.height()).map_err(py_err)?;
    let hist = regionfer::lbp_histogram(&image.0, &masks[index], normalize).map_err(py_err)?;
    Ok(hist.bins.to_vec())
}

/// Seven normalized central moments (nu20, nu11, nu02, nu30, nu21, nu12,
/// nu03) of one region's mask.
#[pyfunction]
fn region_moments(
    landmarks: &Landmarks,
    scheme: &RegionScheme,
    region: String,
    width: usize,
    height: usize,
) -> PyResult<Vec<f64>> {
    let index = scheme.indices(Some(vec![region]), RegionSource::Scheme)?[0];
    let masks = regionfer::build_regions(&landmarks.0, &scheme.0, width, height).map_err(py_err)?;
    let nu = regionfer::normalized_central_moments(&masks[index]).map_err(py_err)?;
    Ok(nu.to_vec())
}

/// Concatenated per-region descriptors. `regions` defaults to every
/// region; `kinds` is `lbp`, `ncm` or `both`; `grid=(rows, cols)` swaps the
/// scheme's regions for a grid over the face box.
#[pyfunction]
#[pyo3(signature = (image, landmarks, scheme, regions=None, kinds="both", grid=None))]
fn extract_features(
    image: &Image,
    landmarks: &Landmarks,
    scheme: &RegionScheme,
    regions: Option<Vec<String>>,
    kinds: &str,
    grid: Option<(usize, usize)>,
) -> PyResult<(Vec<f64>, Vec<String>)> {
    let src = source(grid);
    let indices = scheme.indices(regions, src)?;
    let fv = extract_features_from(&image.0, &landmarks.0, &scheme.0, src, &indices, self::kinds(kinds)?)
        .map_err(py_err)?;
    Ok((fv.values, fv.layout.column_names()))
}

/// Sorted distinct labels and the index of each sample's label.
fn encode_labels(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut classes = labels.to_vec();
    classes.sort();
    classes.dedup();
    let encoded = labels.iter().map(|l| classes.binary_search(l).unwrap()).collect();
    (classes, encoded)
}

fn params(c: f64, gamma: f64, tol: f64, seed: u64) -> svm::TrainParams {
    svm::TrainParams {
        tol,
        seed,
        ..svm::TrainParams::new(c, gamma)
    }
}

/// One-vs-all RBF SVM over min-max scaled features.
#[pyclass(frozen)]
struct SvmModel(svm::SvmModel);

#[pymethods]
impl SvmModel {
    #[staticmethod]
    #[pyo3(signature = (x, labels, c, gamma, tol=1e-3, seed=42))]
    fn train(py: Python<'_>, x: Vec<Vec<f64>>, labels: Vec<String>, c: f64, gamma: f64, tol: f64, seed: u64) -> PyResult<Self> {
        if x.len() != labels.len() {
            return Err(py_err(Error::LengthMismatch(x.len(), labels.len())));
        }
        let (classes, y) = encode_labels(&labels);
        py.detach(|| svm::train_multiclass_ova(&x, &y, &classes, &params(c, gamma, tol, seed)))
            .map(SvmModel)
            .map_err(py_err)
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.0.classes.clone()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged()
    }

    fn support_vector_counts(&self) -> Vec<usize> {
        self.0.models.iter().map(|m| m.coef.len()).collect()
    }

    fn decision_values(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.decision_values(&x).map_err(py_err)
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<String> {
        self.0.predict_label(&x).map(str::to_string).map_err(py_err)
    }
}

/// Outcome of stratified k-fold cross-validation.
#[pyclass(frozen, get_all)]
struct CvReport {
    classes: Vec<String>,
    per_fold_accuracy: Vec<f64>,
    mean_accuracy: f64,
    weighted_accuracy: f64,
    /// rows are true classes, columns predictions
    confusion: Vec<Vec<u64>>,
    converged: bool,
}

#[pymethods]
impl CvReport {
    fn __repr__(&self) -> String {
        format!(
            "CvReport(mean_accuracy={:.4}, folds={})",
            self.mean_accuracy,
            self.per_fold_accuracy.len()
        )
    }
}

/// Stratified k-fold accuracy with scaling fitted on each training part.
#[pyfunction]
#[pyo3(signature = (x, labels, c, gamma, folds=5, seed=42, tol=1e-3))]
#[allow(clippy::too_many_arguments)]
fn cross_validate(
    py: Python<'_>,
    x: Vec<Vec<f64>>,
    labels: Vec<String>,
    c: f64,
    gamma: f64,
    folds: usize,
    seed: u64,
    tol: f64,
) -> PyResult<CvReport> {
    if x.len() != labels.len() {
        return Err(py_err(Error::LengthMismatch(x.len(), labels.len())));
    }
    let (classes, y) = encode_labels(&labels);
    let cv = py
        .detach(|| {
            let assignment = eval::stratified_kfold(&y, &classes, folds, seed)?;
            eval::cross_validate(&x, &y, &classes, &assignment, &params(c, gamma, tol, seed))
        })
        .map_err(py_err)?;
    Ok(CvReport {
        classes,
        per_fold_accuracy: cv.per_fold_accuracy,
        mean_accuracy: cv.mean_accuracy,
        weighted_accuracy: cv.weighted_accuracy,
        confusion: cv.confusion.counts,
        converged: cv.converged,
    })
}

/// Classifier file written by `regionfer train`.
#[pyclass(frozen)]
struct SavedModel(regionfer::SavedModel);

#[pymethods]
impl SavedModel {
    /// Package an `SvmModel` trained on features from `scheme`.
    #[new]
    #[pyo3(signature = (model, scheme, regions=None, kinds="both", grid=None))]
    fn new(
        model: &SvmModel,
        scheme: &RegionScheme,
        regions: Option<Vec<String>>,
        kinds: &str,
        grid: Option<(usize, usize)>,
    ) -> PyResult<Self> {
        let src = source(grid);
        let indices = scheme.indices(regions, src)?;
        Ok(SavedModel(regionfer::SavedModel {
            scheme_hash: scheme.0.hash(),
            source: src,
            regions: indices,
            kinds: self::kinds(kinds)?,
            svm: model.0.clone(),
        }))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        regionfer::SavedModel::load(path).map(SavedModel).map_err(py_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(path).map_err(py_err)
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.0.svm.classes.clone()
    }

    /// Predicted label and per-class decision values for one face.
    fn predict(&self, image: &Image, landmarks: &Landmarks, scheme: &RegionScheme) -> PyResult<(String, Vec<f64>)> {
        self.0.check_scheme(&scheme.0).map_err(py_err)?;
        let fv = extract_features_from(&image.0, &landmarks.0, &scheme.0, self.0.source, &self.0.regions, self.0.kinds)
            .map_err(py_err)?;
        let values = self.0.svm.decision_values(&fv.values).map_err(py_err)?;
        let label = self.0.svm.classes[svm::argmax(&values)].clone();
        Ok((label, values))
    }
}

/// Render a synthetic labelled dataset (PNG + pts + manifest.csv) into
/// `directory`; returns the manifest path.
#[pyfunction]
#[pyo3(signature = (directory, classes=3, per_class=10, seed=42))]
fn write_synthetic_dataset(directory: PathBuf, classes: usize, per_class: usize, seed: u64) -> PyResult<PathBuf> {
    regionfer::synth::write_dataset(&directory, classes, per_class, seed).map_err(py_err)
}

#[pymodule]
fn pyregionfer(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Image>()?;
    m.add_class::<Landmarks>()?;
    m.add_class::<RegionScheme>()?;
    m.add_class::<SvmModel>()?;
    m.add_class::<CvReport>()?;
    m.add_class::<SavedModel>()?;
    m.add_function(wrap_pyfunction!(region_pixels, m)?)?;
    m.add_function(wrap_pyfunction!(lbp_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(region_moments, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic_dataset, m)?)?;
    m.add("WHOLE_FACE", WHOLE_FACE)?;
    Ok(())
}
