//! Region ranking and greedy forward selection scored by cross-validated
//! accuracy.
//!
//! Every region's per-fold distance matrices are computed once; a candidate
//! set is scored by summing the matrices of its regions (see [`crate::eval`]).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{evaluate_prepared, FoldAssignment, PreparedFolds};
use crate::features::FeatureTable;
use crate::svm::TrainParams;

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionParams {
    pub train: TrainParams,
    /// a candidate is taken only if it beats the current best by more than this
    pub epsilon: f64,
    pub max_regions: Option<usize>,
}

impl SelectionParams {
    pub fn new(train: TrainParams) -> Self {
        SelectionParams {
            train,
            epsilon: 0.0,
            max_regions: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub region: String,
    pub index: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub candidates: Vec<CandidateScore>,
    /// `None` on the final step when no candidate improved enough
    pub chosen: Option<String>,
    pub best_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub seed_region: String,
    pub seed_accuracy: f64,
    /// scored alongside every candidate set but never candidates themselves
    pub always_included: Vec<String>,
    pub steps: Vec<SelectionStep>,
    pub selected: Vec<String>,
    pub selected_indices: Vec<usize>,
    pub cv_runs: usize,
    pub epsilon: f64,
    pub max_regions: Option<usize>,
}

/// Per-region fold distances, built lazily and shared across evaluations.
pub struct RegionFolds<'a> {
    table: &'a FeatureTable,
    classes: &'a [String],
    parts: Vec<Option<PreparedFolds>>,
}

impl<'a> RegionFolds<'a> {
    pub fn new(
        table: &'a FeatureTable,
        labels: &[usize],
        classes: &'a [String],
        folds: &FoldAssignment,
        regions: &[usize],
    ) -> Result<Self> {
        if table.len() != labels.len() {
            return Err(Error::LengthMismatch(table.len(), labels.len()));
        }
        let mut parts: Vec<Option<PreparedFolds>> = vec![None; table.region_count()];
        let built = regions
            .par_iter()
            .map(|&r| {
                let (x, _) = table.matrix(&[r])?;
                Ok((r, PreparedFolds::new(&x, labels, classes.len(), folds)?))
            })
            .collect::<Result<Vec<_>>>()?;
        for (r, p) in built {
            parts[r] = Some(p);
        }
        Ok(RegionFolds { table, classes, parts })
    }

    pub fn score(&self, regions: &[usize], params: &TrainParams) -> Result<f64> {
        let parts = regions
            .iter()
            .map(|&r| self.parts.get(r).and_then(Option::as_ref).ok_or(Error::UnknownRegion(r.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let prepared = PreparedFolds::sum(&parts)?;
        Ok(evaluate_prepared(&prepared, self.classes, params)?.mean_accuracy)
    }

    fn name(&self, r: usize) -> String {
        self.table.region_names[r].clone()
    }
}

fn check_regions(table: &FeatureTable, regions: &[usize]) -> Result<()> {
    if regions.is_empty() {
        return Err(Error::NoRegions);
    }
    match regions.iter().find(|&&r| r >= table.region_count()) {
        Some(&bad) => Err(Error::UnknownRegion(bad.to_string())),
        None => Ok(()),
    }
}

/// One CV run per region using only that region's blocks, best first; equal
/// scores keep the input order.
pub fn rank_single_regions(
    table: &FeatureTable,
    labels: &[usize],
    classes: &[String],
    regions: &[usize],
    folds: &FoldAssignment,
    params: &TrainParams,
) -> Result<Vec<(usize, f64)>> {
    check_regions(table, regions)?;
    let cache = RegionFolds::new(table, labels, classes, folds, regions)?;
    let mut ranking = regions
        .par_iter()
        .map(|&r| Ok((r, cache.score(&[r], params)?)))
        .collect::<Result<Vec<_>>>()?;
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ranking)
}

/// Starts from `{seed}` and repeatedly adds the candidate whose addition
/// gives the highest CV accuracy (lowest region index on ties), stopping when
/// no candidate improves by more than `epsilon` or `max_regions` is reached.
#[allow(clippy::too_many_arguments)]
pub fn greedy_forward_select(
    table: &FeatureTable,
    labels: &[usize],
    classes: &[String],
    candidates: &[usize],
    seed_region: &str,
    always_include: &[usize],
    folds: &FoldAssignment,
    params: &SelectionParams,
) -> Result<SelectionTrace> {
    check_regions(table, candidates)?;
    let seed = table
        .region_names
        .iter()
        .position(|n| n == seed_region)
        .filter(|i| candidates.contains(i))
        .ok_or_else(|| Error::SeedNotInScheme(seed_region.to_string()))?;
    let mut pool: Vec<usize> = candidates.iter().copied().filter(|r| !always_include.contains(r)).collect();
    pool.sort_unstable();
    pool.dedup();
    let all: Vec<usize> = pool.iter().chain(always_include).copied().collect();
    let cache = RegionFolds::new(table, labels, classes, folds, &all)?;
    let with_fixed = |set: &[usize]| -> Vec<usize> { set.iter().chain(always_include).copied().collect() };

    let mut selected = vec![seed];
    let mut best = cache.score(&with_fixed(&selected), &params.train)?;
    let seed_accuracy = best;
    let mut cv_runs = 1;
    let mut steps = Vec::new();
    loop {
        if params.max_regions.is_some_and(|m| selected.len() >= m) {
            break;
        }
        let remaining: Vec<usize> = pool.iter().copied().filter(|r| !selected.contains(r)).collect();
        if remaining.is_empty() {
            break;
        }
        let scores = remaining
            .par_iter()
            .map(|&r| {
                let mut set = selected.clone();
                set.push(r);
                cache.score(&with_fixed(&set), &params.train)
            })
            .collect::<Result<Vec<f64>>>()?;
        cv_runs += remaining.len();
        // remaining is ascending, so the first maximum is the lowest index
        let top = (0..scores.len()).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
        let improved = scores[top] > best + params.epsilon;
        if improved {
            selected.push(remaining[top]);
            best = scores[top];
        }
        steps.push(SelectionStep {
            candidates: remaining
                .iter()
                .zip(&scores)
                .map(|(&r, &accuracy)| CandidateScore {
                    region: cache.name(r),
                    index: r,
                    accuracy,
                })
                .collect(),
            chosen: improved.then(|| cache.name(remaining[top])),
            best_accuracy: best,
        });
        if !improved {
            break;
        }
    }
    Ok(SelectionTrace {
        seed_region: seed_region.to_string(),
        seed_accuracy,
        always_included: always_include.iter().map(|&r| cache.name(r)).collect(),
        steps,
        selected: selected.iter().map(|&r| cache.name(r)).collect(),
        selected_indices: selected,
        cv_runs,
        epsilon: params.epsilon,
        max_regions: params.max_regions,
    })
}

/// What `select-regions` writes for `--regions selected`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectedRegions {
    pub scheme: String,
    pub regions: Vec<String>,
}
