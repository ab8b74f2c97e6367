use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Above this many samples the Gram matrix is served from a row cache.
pub const FULL_GRAM_LIMIT: usize = 4096;

pub fn squared_distance(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(-gamma * |x - z|^2)`
pub fn rbf_kernel(x: &[f64], z: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::LengthMismatch(x.len(), z.len()));
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::InvalidParams(format!("gamma must be positive, got {gamma}")));
    }
    Ok((-gamma * squared_distance(x, z)).exp())
}

/// Row-major `n x n` squared distances.
pub fn pairwise_sq_distances(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = squared_distance(&x[i], &x[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Row-major `rows.len() x cols.len()` squared distances.
pub fn cross_sq_distances(rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Vec<f64> {
    rows.iter()
        .flat_map(|r| cols.iter().map(move |c| squared_distance(r, c)))
        .collect()
}

struct RowCache {
    capacity: usize,
    rows: HashMap<usize, Arc<Vec<f64>>>,
    order: VecDeque<usize>,
}

impl RowCache {
    fn get(&mut self, i: usize) -> Option<Arc<Vec<f64>>> {
        let row = self.rows.get(&i)?.clone();
        if let Some(pos) = self.order.iter().position(|&k| k == i) {
            self.order.remove(pos);
        }
        self.order.push_back(i);
        Some(row)
    }

    fn insert(&mut self, i: usize, row: Arc<Vec<f64>>) {
        if self.rows.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows.remove(&old);
            }
        }
        self.rows.insert(i, row);
        self.order.push_back(i);
    }
}

enum Storage {
    Full(Vec<Arc<Vec<f64>>>),
    Cached {
        points: Arc<Vec<Vec<f64>>>,
        gamma: f64,
        cache: RowCache,
    },
}

/// RBF Gram matrix, either fully materialized or computed row by row
/// behind an LRU cache.
pub struct KernelMatrix {
    n: usize,
    diag: Vec<f64>,
    storage: Storage,
}

impl KernelMatrix {
    pub fn from_points(points: Arc<Vec<Vec<f64>>>, gamma: f64) -> Self {
        KernelMatrix::with_limit(points, gamma, FULL_GRAM_LIMIT, 1024)
    }

    /// Materializes the full matrix when `n <= full_limit`, otherwise keeps
    /// at most `cache_rows` rows.
    pub fn with_limit(
        points: Arc<Vec<Vec<f64>>>,
        gamma: f64,
        full_limit: usize,
        cache_rows: usize,
    ) -> Self {
        let n = points.len();
        if n <= full_limit {
            return KernelMatrix::from_sq_distances(&pairwise_sq_distances(&points), n, gamma);
        }
        KernelMatrix {
            n,
            diag: vec![1.0; n],
            storage: Storage::Cached {
                points,
                gamma,
                cache: RowCache {
                    capacity: cache_rows.max(2),
                    rows: HashMap::new(),
                    order: VecDeque::new(),
                },
            },
        }
    }

    pub fn from_sq_distances(d: &[f64], n: usize, gamma: f64) -> Self {
        let rows = d
            .chunks_exact(n)
            .map(|r| Arc::new(r.iter().map(|&v| (-gamma * v).exp()).collect::<Vec<f64>>()))
            .collect();
        KernelMatrix {
            n,
            diag: vec![1.0; n],
            storage: Storage::Full(rows),
        }
    }

    /// Shares materialized rows; a cached matrix gets a fresh, empty cache.
    pub fn shallow_clone(&self) -> Self {
        let storage = match &self.storage {
            Storage::Full(rows) => Storage::Full(rows.clone()),
            Storage::Cached { points, gamma, cache } => Storage::Cached {
                points: points.clone(),
                gamma: *gamma,
                cache: RowCache {
                    capacity: cache.capacity,
                    rows: HashMap::new(),
                    order: VecDeque::new(),
                },
            },
        };
        KernelMatrix {
            n: self.n,
            diag: self.diag.clone(),
            storage,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_full(&self) -> bool {
        matches!(self.storage, Storage::Full(_))
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn row(&mut self, i: usize) -> Arc<Vec<f64>> {
        match &mut self.storage {
            Storage::Full(rows) => rows[i].clone(),
            Storage::Cached { points, gamma, cache } => {
                if let Some(row) = cache.get(i) {
                    return row;
                }
                let p = &points[i];
                let row: Arc<Vec<f64>> = Arc::new(
                    points
                        .iter()
                        .map(|q| (-*gamma * squared_distance(p, q)).exp())
                        .collect(),
                );
                cache.insert(i, row.clone());
                row
            }
        }
    }
}
