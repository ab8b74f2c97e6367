//! RBF-kernel support vector machines: binary C-SVM trained with SMO and a
//! one-vs-all multiclass wrapper.

pub mod kernel;
pub mod smo;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::*;
use crate::error::{Error, Result};
use crate::features::{apply_scaling, fit_scaling, ScalingStats};

pub use kernel::{rbf_kernel, KernelMatrix};
pub use smo::SmoSolution;

/// Multipliers at or below this are dropped from the model.
pub const ALPHA_EPSILON: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    /// Update budget in sweeps of n pair updates; `None` means 10 * n.
    pub max_passes: Option<usize>,
    pub seed: u64,
}

impl TrainParams {
    pub fn new(c: f64, gamma: f64) -> Self {
        TrainParams {
            c,
            gamma,
            tol: 1e-3,
            max_passes: None,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParams(format!("C must be positive, got {}", self.c)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParams(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub coef: Vec<f64>,
    pub b: f64,
    pub gamma: f64,
    pub c: f64,
    /// False when SMO ran out of its update budget.
    pub converged: bool,
}

impl BinaryModel {
    pub fn from_solution(x: &[Vec<f64>], y: &[f64], solution: &SmoSolution, params: &TrainParams) -> Self {
        let (support_vectors, coef) = solution
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > ALPHA_EPSILON)
            .map(|(i, &a)| (x[i].clone(), a * y[i]))
            .unzip();
        BinaryModel {
            support_vectors,
            coef,
            b: solution.b,
            gamma: params.gamma,
            c: params.c,
            converged: solution.converged,
        }
    }

    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// Raw decision value `sum_i coef_i k(s_i, x) + b`; the caller takes the sign.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if !self.support_vectors.is_empty() && x.len() != self.dim() {
            return Err(Error::LengthMismatch(x.len(), self.dim()));
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coef)
            .map(|(s, &a)| a * (-self.gamma * kernel::squared_distance(s, x)).exp())
            .sum::<f64>()
            + self.b)
    }

    /// Block layout: n_sv u32, dim u32, gamma, C, b, converged u8, then
    /// n_sv coefficients and n_sv * dim support-vector values as f64.
    pub fn write_block(&self, out: &mut Vec<u8>) {
        put_len(out, self.coef.len());
        put_len(out, self.dim());
        put_f64(out, self.gamma);
        put_f64(out, self.c);
        put_f64(out, self.b);
        put_u8(out, u8::from(self.converged));
        for &a in &self.coef {
            put_f64(out, a);
        }
        for sv in &self.support_vectors {
            for &v in sv {
                put_f64(out, v);
            }
        }
    }

    pub fn read_block(input: &mut &[u8]) -> Result<Self> {
        let n_sv = get_len(input)?;
        let dim = get_len(input)?;
        let gamma = get_f64(input)?;
        let c = get_f64(input)?;
        let b = get_f64(input)?;
        let converged = get_u8(input)? != 0;
        let coef = get_f64s(input, n_sv)?;
        let flat = get_f64s(input, n_sv.checked_mul(dim).ok_or_else(|| Error::ModelFormat("size overflow".into()))?)?;
        let support_vectors = if dim == 0 {
            vec![Vec::new(); n_sv]
        } else {
            flat.chunks_exact(dim).map(<[f64]>::to_vec).collect()
        };
        Ok(BinaryModel {
            support_vectors,
            coef,
            b,
            gamma,
            c,
            converged,
        })
    }
}

pub(crate) fn check_matrix(x: &[Vec<f64>]) -> Result<usize> {
    let dim = x.first().map_or(0, Vec::len);
    for (i, row) in x.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::LengthMismatch(row.len(), dim));
        }
        if let Some(d) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { sample: i, dim: d });
        }
    }
    Ok(dim)
}

pub fn train_binary_smo(x: &[Vec<f64>], y: &[f64], params: &TrainParams) -> Result<BinaryModel> {
    params.validate()?;
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    check_matrix(x)?;
    if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return Err(Error::SingleClassInput);
    }
    let points = Arc::new(x.to_vec());
    let mut kernel = KernelMatrix::from_points(points, params.gamma);
    let solution = smo::solve(&mut kernel, y, params, false);
    Ok(BinaryModel::from_solution(x, y, &solution, params))
}

/// +1 for `class`, -1 for everything else.
pub fn one_vs_rest_labels(labels: &[usize], class: usize) -> Vec<f64> {
    labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect()
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

/// One binary model per class, each trained class-vs-rest, sharing one
/// min-max scaling fitted on the training data.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub classes: Vec<String>,
    pub models: Vec<BinaryModel>,
    pub scaling: ScalingStats,
}

/// Trains K binary SMO problems over already-scaled data sharing one kernel.
pub(crate) fn train_ova_scaled(
    x: &[Vec<f64>],
    labels: &[usize],
    classes: usize,
    kernel: &KernelMatrix,
    params: &TrainParams,
) -> Vec<(BinaryModel, SmoSolution)> {
    (0..classes)
        .into_par_iter()
        .map(|class| {
            let y = one_vs_rest_labels(labels, class);
            let mut k = kernel.shallow_clone();
            let solution = smo::solve(&mut k, &y, params, false);
            (BinaryModel::from_solution(x, &y, &solution, params), solution)
        })
        .collect()
}

pub fn train_multiclass_ova(
    x: &[Vec<f64>],
    labels: &[usize],
    classes: &[String],
    params: &TrainParams,
) -> Result<SvmModel> {
    params.validate()?;
    if classes.len() < 2 {
        return Err(Error::SingleClassInput);
    }
    if x.len() != labels.len() {
        return Err(Error::LengthMismatch(x.len(), labels.len()));
    }
    check_matrix(x)?;
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
        return Err(Error::UnknownRegion(format!("class index {bad}")));
    }
    for class in 0..classes.len() {
        if !labels.contains(&class) || labels.iter().all(|&l| l == class) {
            return Err(Error::SingleClassInput);
        }
    }
    let scaling = fit_scaling(x)?;
    let scaled: Vec<Vec<f64>> = x.iter().map(|r| apply_scaling(&scaling, r)).collect::<Result<_>>()?;
    let kernel = KernelMatrix::from_points(Arc::new(scaled.clone()), params.gamma);
    let models = train_ova_scaled(&scaled, labels, classes.len(), &kernel, params)
        .into_iter()
        .map(|(m, _)| m)
        .collect();
    Ok(SvmModel {
        classes: classes.to_vec(),
        models,
        scaling,
    })
}

impl SvmModel {
    /// Per-class decision values for a raw (unscaled) feature vector.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let scaled = apply_scaling(&self.scaling, x)?;
        self.models.iter().map(|m| m.decision(&scaled)).collect()
    }

    /// Class index with the largest decision value; ties go to the earlier class.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.decision_values(x)?))
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.classes[self.predict(x)?])
    }

    pub fn converged(&self) -> bool {
        self.models.iter().all(|m| m.converged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_midpoint_is_zero() {
        let x = vec![vec![0.0], vec![2.0]];
        let model = train_binary_smo(&x, &[-1.0, 1.0], &TrainParams::new(1e6, 0.25)).unwrap();
        assert!(model.decision(&[1.0]).unwrap().abs() < 1e-6);
        assert!(model.decision(&[0.0]).unwrap() < 0.0);
        assert!(model.decision(&[2.0]).unwrap() > 0.0);
    }

    #[test]
    fn xor_is_separated() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = [-1.0, -1.0, 1.0, 1.0];
        let model = train_binary_smo(&x, &y, &TrainParams::new(10.0, 1.0)).unwrap();
        for (xi, &yi) in x.iter().zip(&y) {
            assert!(model.decision(xi).unwrap() * yi > 0.0);
        }
    }

    #[test]
    fn contradictory_duplicates_hit_bounds() {
        let x = vec![vec![1.0], vec![1.0], vec![3.0], vec![-2.0]];
        let y = [1.0, -1.0, 1.0, -1.0];
        let params = TrainParams::new(0.1, 0.5);
        let mut kernel = KernelMatrix::from_points(Arc::new(x.clone()), params.gamma);
        let sol = smo::solve(&mut kernel, &y, &params, false);
        assert!(sol.converged);
        assert_eq!(sol.alpha[0], params.c);
        assert_eq!(sol.alpha[1], params.c);
        let decisions: Vec<f64> = (0..4).map(|i| sol.training_decision(i, &y)).collect();
        assert!(smo::max_kkt_violation(&sol.alpha, &y, &decisions, params.c) <= params.tol);
    }

    #[test]
    fn input_validation() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            train_binary_smo(&x, &[1.0, 1.0], &TrainParams::new(1.0, 1.0)),
            Err(Error::SingleClassInput)
        ));
        assert!(matches!(
            train_binary_smo(&[vec![0.0], vec![f64::NAN]], &[1.0, -1.0], &TrainParams::new(1.0, 1.0)),
            Err(Error::NonFiniteFeature { sample: 1, dim: 0 })
        ));
        assert!(train_binary_smo(&x, &[1.0, -1.0], &TrainParams::new(-1.0, 1.0)).is_err());
        let model = train_binary_smo(&x, &[1.0, -1.0], &TrainParams::new(1.0, 1.0)).unwrap();
        assert!(matches!(model.decision(&[0.0, 1.0]), Err(Error::LengthMismatch(2, 1))));
        assert!(!model.support_vectors.is_empty());
    }

    #[test]
    fn all_negative_decisions_still_pick_a_class() {
        assert_eq!(argmax(&[-3.0, -0.5, -0.5, -2.0]), 1);
        assert_eq!(argmax(&[-1.0, -1.0]), 0);
    }

    #[test]
    fn block_round_trip_is_bit_exact() {
        let x = vec![vec![0.1, 0.7], vec![0.9, 0.2], vec![0.4, 0.4], vec![0.8, 0.9]];
        let model = train_binary_smo(&x, &[1.0, -1.0, 1.0, -1.0], &TrainParams::new(3.0, 0.7)).unwrap();
        let mut bytes = Vec::new();
        model.write_block(&mut bytes);
        let mut input = bytes.as_slice();
        let back = BinaryModel::read_block(&mut input).unwrap();
        assert!(input.is_empty());
        assert_eq!(back, model);
        for p in [[0.3, 0.3], [0.05, 0.95]] {
            assert_eq!(back.decision(&p).unwrap().to_bits(), model.decision(&p).unwrap().to_bits());
        }
    }

    #[test]
    fn ova_two_classes_matches_binary_sign() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i % 10) as f64 * 0.1 + if i < 10 { 0.0 } else { 0.35 }, (i * 7 % 10) as f64 * 0.1])
            .collect();
        let labels: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let classes = vec!["a".to_string(), "b".to_string()];
        let params = TrainParams::new(10.0, 2.0);
        let model = train_multiclass_ova(&x, &labels, &classes, &params).unwrap();
        for probe in [[0.05, 0.5], [0.9, 0.1], [0.5, 0.5], [1.2, 0.9]] {
            let dv = model.decision_values(&probe).unwrap();
            if dv[0].abs() > 1e-6 {
                assert_eq!(model.predict(&probe).unwrap(), usize::from(dv[0] < 0.0));
            }
        }
    }
}
