//! Stratified k-fold cross-validation, grid search, confusion matrices and
//! accuracy reports.
//!
//! Each fold is reduced to what the RBF machine needs: squared distances
//! among min-max scaled training samples and from held-out samples to them,
//! with the scaling fitted on the training folds only. Because min-max
//! scaling acts per dimension, distances over a union of feature blocks are
//! the sum of per-block distances; region selection relies on this.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{apply_scaling, fit_scaling, ScalingStats};
use crate::svm::kernel::{cross_sq_distances, pairwise_sq_distances, KernelMatrix};
use crate::svm::{argmax, check_matrix, one_vs_rest_labels, smo, TrainParams, ALPHA_EPSILON};

pub const PROTOCOL: &str = "stratified k-fold, sample-level (subjects may appear in several folds)";

/// `C in {2^-5, 2^-3, ..., 2^15}`
pub fn default_c_grid() -> Vec<f64> {
    (-5..=15).step_by(2).map(|e| 2f64.powi(e)).collect()
}

/// `gamma in {2^-15, 2^-13, ..., 2^3}`
pub fn default_gamma_grid() -> Vec<f64> {
    (-15..=3).step_by(2).map(|e| 2f64.powi(e)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles each class by `seed` and deals it round-robin into `k` folds;
/// the dealing position carries over from one class to the next.
pub fn stratified_kfold(labels: &[usize], class_names: &[String], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidFolds(format!("k must be at least 2, got {k}")));
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut members = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut offset = 0;
    for (class, idx) in members.iter_mut().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < k {
            let name = class_names.get(class).cloned().unwrap_or_else(|| class.to_string());
            return Err(Error::ClassTooSmall(format!("{name} has {} samples, fewer than {k} folds", idx.len())));
        }
        idx.shuffle(&mut rng);
        for (r, &i) in idx.iter().enumerate() {
            fold_of[i] = (offset + r) % k;
        }
        offset = (offset + idx.len()) % k;
    }
    Ok(FoldAssignment { k, fold_of, seed })
}

/// Min-max statistics of the training part of `fold`.
pub fn fold_scaling(x: &[Vec<f64>], folds: &FoldAssignment, fold: usize) -> Result<ScalingStats> {
    let train: Vec<Vec<f64>> = folds.train_indices(fold).into_iter().map(|i| x[i].clone()).collect();
    fit_scaling(&train)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldData {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// `train x train`, row-major
    pub d_train: Vec<f64>,
    /// `test x train`, row-major
    pub d_test: Vec<f64>,
}

/// A dataset split into folds and reduced to scaled squared distances.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedFolds {
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub folds: Vec<FoldData>,
}

impl PreparedFolds {
    pub fn new(x: &[Vec<f64>], labels: &[usize], n_classes: usize, assignment: &FoldAssignment) -> Result<Self> {
        if x.len() != labels.len() {
            return Err(Error::LengthMismatch(x.len(), labels.len()));
        }
        if assignment.len() != x.len() {
            return Err(Error::InvalidFolds(format!(
                "assignment covers {} samples, dataset has {}",
                assignment.len(),
                x.len()
            )));
        }
        check_matrix(x)?;
        let folds = (0..assignment.k)
            .into_par_iter()
            .map(|f| {
                let train = assignment.train_indices(f);
                let test = assignment.test_indices(f);
                let stats = fold_scaling(x, assignment, f)?;
                let scale = |idx: &[usize]| -> Result<Vec<Vec<f64>>> {
                    idx.iter().map(|&i| apply_scaling(&stats, &x[i])).collect()
                };
                let (xtr, xte) = (scale(&train)?, scale(&test)?);
                Ok(FoldData {
                    d_train: pairwise_sq_distances(&xtr),
                    d_test: cross_sq_distances(&xte, &xtr),
                    train,
                    test,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedFolds {
            labels: labels.to_vec(),
            n_classes,
            folds,
        })
    }

    /// Distances over the concatenation of the parts' feature blocks.
    /// All parts must come from the same labels and fold assignment.
    pub fn sum(parts: &[&PreparedFolds]) -> Result<Self> {
        let (first, rest) = parts.split_first().ok_or(Error::NoRegions)?;
        let mut out = (*first).clone();
        for part in rest {
            if part.labels != out.labels || part.folds.len() != out.folds.len() {
                return Err(Error::InvalidFolds("parts use different splits".into()));
            }
            for (acc, f) in out.folds.iter_mut().zip(&part.folds) {
                if acc.train != f.train {
                    return Err(Error::InvalidFolds("parts use different splits".into()));
                }
                acc.d_train.iter_mut().zip(&f.d_train).for_each(|(a, b)| *a += b);
                acc.d_test.iter_mut().zip(&f.d_test).for_each(|(a, b)| *a += b);
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// rows = true class, columns = predicted class
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Self {
        ConfusionMatrix { classes, counts }
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            row.iter_mut().zip(o).for_each(|(a, b)| *a += b);
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Row-normalized diagonal, as fractions; classes without samples get 0.
    pub fn recalls(&self) -> Vec<f64> {
        self.row_sums()
            .iter()
            .enumerate()
            .map(|(i, &s)| if s == 0 { 0.0 } else { self.counts[i][i] as f64 / s as f64 })
            .collect()
    }

    /// Row-normalized percentages.
    pub fn percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let s: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if s == 0 { 0.0 } else { 100.0 * c as f64 / s as f64 })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub per_fold_accuracy: Vec<f64>,
    /// unweighted mean of the per-fold accuracies
    pub mean_accuracy: f64,
    /// pooled accuracy, i.e. the fold-size weighted mean
    pub weighted_accuracy: f64,
    pub confusion: ConfusionMatrix,
    /// false if any binary SMO run hit its update budget
    pub converged: bool,
}

struct FoldOutcome {
    predictions: Vec<usize>,
    converged: bool,
}

fn run_fold(fold: &FoldData, labels: &[usize], n_classes: usize, params: &TrainParams) -> FoldOutcome {
    let ytr: Vec<usize> = fold.train.iter().map(|&i| labels[i]).collect();
    let n = ytr.len();
    if let Some(&only) = ytr.first().filter(|&&c| ytr.iter().all(|&l| l == c)) {
        // a single training class can only ever predict that class
        return FoldOutcome {
            predictions: vec![only; fold.test.len()],
            converged: true,
        };
    }
    let kernel = KernelMatrix::from_sq_distances(&fold.d_train, n, params.gamma);
    // (sparse coefficients, bias, converged) per class
    type Machine = (Vec<(usize, f64)>, f64, bool);
    let machines: Vec<Machine> = (0..n_classes)
        .into_par_iter()
        .map(|class| {
            let y = one_vs_rest_labels(&ytr, class);
            let mut k = kernel.shallow_clone();
            let sol = smo::solve(&mut k, &y, params, false);
            let coef = (0..n)
                .filter(|&i| sol.alpha[i] > ALPHA_EPSILON)
                .map(|i| (i, sol.alpha[i] * y[i]))
                .collect();
            (coef, sol.b, sol.converged)
        })
        .collect();
    let predictions = (0..fold.test.len())
        .map(|t| {
            let d = &fold.d_test[t * n..(t + 1) * n];
            let values: Vec<f64> = machines
                .iter()
                .map(|(coef, b, _)| coef.iter().map(|&(i, a)| a * (-params.gamma * d[i]).exp()).sum::<f64>() + b)
                .collect();
            argmax(&values)
        })
        .collect();
    FoldOutcome {
        predictions,
        converged: machines.iter().all(|m| m.2),
    }
}

/// Trains one-vs-all on each training part and scores the held-out part.
pub fn evaluate_prepared(prepared: &PreparedFolds, classes: &[String], params: &TrainParams) -> Result<CvResult> {
    params.validate()?;
    if classes.len() < prepared.n_classes {
        return Err(Error::InvalidParams("fewer class names than classes".into()));
    }
    let outcomes: Vec<FoldOutcome> = prepared
        .folds
        .par_iter()
        .map(|f| run_fold(f, &prepared.labels, prepared.n_classes, params))
        .collect();
    let mut confusion = ConfusionMatrix::new(classes.to_vec());
    let mut per_fold_accuracy = Vec::with_capacity(outcomes.len());
    for (fold, outcome) in prepared.folds.iter().zip(&outcomes) {
        let mut correct = 0;
        for (&i, &p) in fold.test.iter().zip(&outcome.predictions) {
            confusion.add(prepared.labels[i], p);
            correct += usize::from(prepared.labels[i] == p);
        }
        if !fold.test.is_empty() {
            per_fold_accuracy.push(correct as f64 / fold.test.len() as f64);
        }
    }
    let mean_accuracy = per_fold_accuracy.iter().sum::<f64>() / per_fold_accuracy.len().max(1) as f64;
    Ok(CvResult {
        mean_accuracy,
        weighted_accuracy: confusion.accuracy(),
        per_fold_accuracy,
        confusion,
        converged: outcomes.iter().all(|o| o.converged),
    })
}

pub fn cross_validate(
    x: &[Vec<f64>],
    labels: &[usize],
    classes: &[String],
    folds: &FoldAssignment,
    params: &TrainParams,
) -> Result<CvResult> {
    let prepared = PreparedFolds::new(x, labels, classes.len(), folds)?;
    evaluate_prepared(&prepared, classes, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub c: f64,
    pub gamma: f64,
    pub mean_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best_c: f64,
    pub best_gamma: f64,
    pub best: CvResult,
    /// row-major over (C, gamma) in grid order
    pub table: Vec<GridCell>,
}

/// Exhaustive search; the best cell has the highest mean CV accuracy, ties
/// going to the smaller C and then the smaller gamma.
pub fn grid_search_prepared(
    prepared: &PreparedFolds,
    classes: &[String],
    c_grid: &[f64],
    gamma_grid: &[f64],
    base: &TrainParams,
) -> Result<GridSearchResult> {
    if c_grid.is_empty() || gamma_grid.is_empty() {
        return Err(Error::InvalidParams("empty parameter grid".into()));
    }
    let cells: Vec<(f64, f64)> = c_grid
        .iter()
        .flat_map(|&c| gamma_grid.iter().map(move |&g| (c, g)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(c, gamma)| {
            let params = TrainParams { c, gamma, ..base.clone() };
            evaluate_prepared(prepared, classes, &params)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        let (c, g) = cells[i];
        let (bc, bg) = cells[best];
        let acc = r.mean_accuracy;
        let best_acc = results[best].mean_accuracy;
        if acc > best_acc || (acc == best_acc && (c < bc || (c == bc && g < bg))) {
            best = i;
        }
    }
    let table = cells
        .iter()
        .zip(&results)
        .map(|(&(c, gamma), r)| GridCell {
            c,
            gamma,
            mean_accuracy: r.mean_accuracy,
        })
        .collect();
    Ok(GridSearchResult {
        best_c: cells[best].0,
        best_gamma: cells[best].1,
        best: results[best].clone(),
        table,
    })
}

pub fn grid_search(
    x: &[Vec<f64>],
    labels: &[usize],
    classes: &[String],
    folds: &FoldAssignment,
    c_grid: &[f64],
    gamma_grid: &[f64],
    seed: u64,
) -> Result<GridSearchResult> {
    let prepared = PreparedFolds::new(x, labels, classes.len(), folds)?;
    let base = TrainParams {
        seed,
        ..TrainParams::new(1.0, 1.0)
    };
    grid_search_prepared(&prepared, classes, c_grid, gamma_grid, &base)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub class_order: Vec<String>,
    pub confusion_matrix: Vec<Vec<u64>>,
    /// percent
    pub per_class_recall: Vec<f64>,
    /// percent
    pub accuracy: f64,
}

impl MatrixReport {
    pub fn new(matrix: &ConfusionMatrix) -> Self {
        MatrixReport {
            class_order: matrix.classes.clone(),
            confusion_matrix: matrix.counts.clone(),
            per_class_recall: matrix.recalls().iter().map(|r| 100.0 * r).collect(),
            accuracy: 100.0 * matrix.accuracy(),
        }
    }
}

/// Row-normalized percentage table with per-class recall and overall accuracy.
pub fn matrix_text(matrix: &ConfusionMatrix) -> String {
    let width = matrix.classes.iter().map(String::len).max().unwrap_or(0).max(6);
    let mut out = format!("{:>width$}", "");
    for c in &matrix.classes {
        out.push_str(&format!(" {c:>width$}"));
    }
    out.push('\n');
    for (name, row) in matrix.classes.iter().zip(matrix.percentages()) {
        out.push_str(&format!("{name:>width$}"));
        for v in row {
            out.push_str(&format!(" {v:>width$.2}"));
        }
        out.push('\n');
    }
    out.push_str("recall:");
    for (name, r) in matrix.classes.iter().zip(matrix.recalls()) {
        out.push_str(&format!(" {name}={:.2}%", 100.0 * r));
    }
    out.push_str(&format!("\naccuracy: {:.2}%\n", 100.0 * matrix.accuracy()));
    out
}

pub fn report(matrix: &ConfusionMatrix, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => matrix_text(matrix),
        ReportFormat::Json => serde_json::to_string_pretty(&MatrixReport::new(matrix)).expect("plain data serializes"),
    }
}

/// What `evaluate --json` writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: String,
    pub seed: u64,
    pub folds: usize,
    pub c: f64,
    pub gamma: f64,
    pub features: String,
    pub regions: Vec<String>,
    pub per_fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    pub weighted_accuracy: f64,
    pub confusion_matrix: Vec<Vec<u64>>,
    pub class_order: Vec<String>,
    pub per_class_recall: Vec<f64>,
    pub converged: bool,
}

impl EvalReport {
    pub fn text(&self) -> String {
        let mut out = format!(
            "protocol: {}\nseed: {}  folds: {}  C: {}  gamma: {}  features: {}  regions: {}\n",
            self.protocol,
            self.seed,
            self.folds,
            self.c,
            self.gamma,
            self.features,
            self.regions.len()
        );
        let folds: Vec<String> = self.per_fold_accuracy.iter().map(|a| format!("{:.4}", a)).collect();
        out.push_str(&format!("per-fold accuracy: {}\n", folds.join(" ")));
        out.push_str(&format!(
            "mean accuracy: {:.4}  pooled accuracy: {:.4}\n",
            self.mean_accuracy, self.weighted_accuracy
        ));
        if !self.converged {
            out.push_str("warning: some SMO runs stopped at the update budget\n");
        }
        out.push_str(&matrix_text(&ConfusionMatrix::from_counts(
            self.class_order.clone(),
            self.confusion_matrix.clone(),
        )));
        out
    }
}
