use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geometry::{squared_distance, PlanarPoint};

/// Largest training set for which the full kernel matrix is precomputed.
pub const FULL_MATRIX_LIMIT: usize = 4096;

/// RBF width: `K(a, b) = exp(-gamma * |a - b|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KernelParams {
    pub gamma: f64,
}

impl KernelParams {
    pub fn new(gamma: f64) -> Option<Self> {
        (gamma.is_finite() && gamma > 0.0).then_some(Self { gamma })
    }
}

#[inline]
pub fn rbf_kernel(a: PlanarPoint, b: PlanarPoint, gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

/// Kernel rows over a training set, either fully materialised or
/// computed on demand behind an LRU row cache.
pub(crate) enum KernelMatrix<'a> {
    Full {
        n: usize,
        data: Vec<f64>,
    },
    Cached {
        points: &'a [PlanarPoint],
        gamma: f64,
        rows: Vec<Option<Vec<f64>>>,
        order: VecDeque<usize>,
        capacity: usize,
    },
}

impl<'a> KernelMatrix<'a> {
    pub fn new(points: &'a [PlanarPoint], gamma: f64) -> Self {
        Self::with_limit(points, gamma, FULL_MATRIX_LIMIT, 1024)
    }

    pub fn with_limit(
        points: &'a [PlanarPoint],
        gamma: f64,
        full_limit: usize,
        cache_rows: usize,
    ) -> Self {
        let n = points.len();
        if n <= full_limit {
            let mut data = vec![0.0; n * n];
            for i in 0..n {
                data[i * n + i] = 1.0;
                for j in (i + 1)..n {
                    let k = rbf_kernel(points[i], points[j], gamma);
                    data[i * n + j] = k;
                    data[j * n + i] = k;
                }
            }
            KernelMatrix::Full { n, data }
        } else {
            KernelMatrix::Cached {
                points,
                gamma,
                rows: vec![None; n],
                order: VecDeque::new(),
                capacity: cache_rows.max(2),
            }
        }
    }

    pub fn row(&mut self, i: usize) -> &[f64] {
        match self {
            KernelMatrix::Full { n, data } => &data[i * *n..(i + 1) * *n],
            KernelMatrix::Cached {
                points,
                gamma,
                rows,
                order,
                capacity,
            } => {
                if rows[i].is_some() {
                    if let Some(pos) = order.iter().position(|&r| r == i) {
                        order.remove(pos);
                    }
                } else {
                    if order.len() >= *capacity {
                        if let Some(old) = order.pop_front() {
                            rows[old] = None;
                        }
                    }
                    let p = points[i];
                    rows[i] = Some(points.iter().map(|&q| rbf_kernel(p, q, *gamma)).collect());
                }
                order.push_back(i);
                rows[i].as_deref().expect("row just filled")
            }
        }
    }

    pub fn get(&mut self, i: usize, j: usize) -> f64 {
        match self {
            KernelMatrix::Full { n, data } => data[i * *n + j],
            KernelMatrix::Cached { points, gamma, .. } => rbf_kernel(points[i], points[j], *gamma),
        }
    }
}
