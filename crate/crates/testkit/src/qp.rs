//! One-class SVM dual solved by accelerated projected gradient.
//!
//! minimise ½ αᵀKα  s.t.  0 ≤ αᵢ ≤ u,  Σαᵢ = 1,  u = 1/(νn)

pub struct OracleModel {
    pub points: Vec<[f64; 2]>,
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub gamma: f64,
    pub upper: f64,
    pub iterations: usize,
    /// True when the returned point was verified to satisfy the KKT
    /// conditions exactly on its active face.
    pub exact: bool,
}

impl OracleModel {
    pub fn decision(&self, p: [f64; 2]) -> f64 {
        kernel_sum(&self.points, &self.alpha, self.gamma, p) - self.rho
    }
}

pub fn rbf(a: [f64; 2], b: [f64; 2], gamma: f64) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (-gamma * (dx * dx + dy * dy)).exp()
}

fn kernel_sum(points: &[[f64; 2]], alpha: &[f64], gamma: f64, p: [f64; 2]) -> f64 {
    points.iter().zip(alpha).map(|(&x, &a)| a * rbf(x, p, gamma)).sum()
}

/// Euclidean projection onto the box-constrained simplex by bisection on
/// the shift τ in αᵢ = clamp(vᵢ − τ, 0, u).
pub fn project(v: &[f64], upper: f64) -> Vec<f64> {
    let mass = |tau: f64| -> f64 { v.iter().map(|&x| (x - tau).clamp(0.0, upper)).sum() };
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    // mass(lo) = n·u ≥ 1 and mass(hi) = 0
    let mut lo = min - upper;
    let mut hi = max;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    let mut a: Vec<f64> = v.iter().map(|&x| (x - tau).clamp(0.0, upper)).collect();
    // spread the residual of the bisection over free coordinates
    let free: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0 && a[i] < upper).collect();
    if !free.is_empty() {
        let r = (1.0 - a.iter().sum::<f64>()) / free.len() as f64;
        for i in free {
            a[i] = (a[i] + r).clamp(0.0, upper);
        }
    }
    a
}

/// Dense Gaussian elimination with partial pivoting. `None` when singular.
fn linear_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        let pivot = a[c].clone();
        for r in c + 1..n {
            let f = a[r][c] / pivot[c];
            for (x, p) in a[r][c..].iter_mut().zip(&pivot[c..]) {
                *x -= f * p;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[derive(Clone, Copy, PartialEq)]
enum Face {
    Zero,
    Free,
    Upper,
}

fn matvec(k: &[Vec<f64>], a: &[f64]) -> Vec<f64> {
    k.iter()
        .map(|row| row.iter().zip(a).map(|(x, y)| x * y).sum())
        .collect()
}

/// A face with no free coordinate fixes α outright; ρ is the midpoint of
/// the interval allowed by the KKT conditions.
fn vertex_solution(k: &[Vec<f64>], face: &[Face], upper: f64) -> Option<(Vec<f64>, f64)> {
    let alpha: Vec<f64> = face
        .iter()
        .map(|&f| if f == Face::Upper { upper } else { 0.0 })
        .collect();
    if (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return None;
    }
    let g = matvec(k, &alpha);
    let lo = (0..g.len())
        .filter(|&i| face[i] == Face::Upper)
        .map(|i| g[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = (0..g.len())
        .filter(|&i| face[i] == Face::Zero)
        .map(|i| g[i])
        .fold(f64::INFINITY, f64::min);
    if lo > hi + 1e-12 {
        return None;
    }
    let rho = if hi.is_finite() { 0.5 * (lo + hi) } else { lo };
    Some((alpha, rho))
}

/// Solves the KKT equalities on the face guessed from `x` and returns the
/// exact (α, ρ) when the result satisfies every KKT condition.
fn polish(k: &[Vec<f64>], x: &[f64], upper: f64, thresh: f64) -> Option<(Vec<f64>, f64)> {
    let n = x.len();
    let face: Vec<Face> = x
        .iter()
        .map(|&a| {
            if a <= thresh * upper {
                Face::Zero
            } else if a >= upper * (1.0 - thresh) {
                Face::Upper
            } else {
                Face::Free
            }
        })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&i| face[i] == Face::Free).collect();
    let n_up = face.iter().filter(|&&f| f == Face::Upper).count();
    if free.is_empty() {
        return vertex_solution(k, &face, upper);
    }
    // unknowns: α over the free set, then ρ
    let m = free.len();
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    let mut b = vec![0.0; m + 1];
    for (r, &i) in free.iter().enumerate() {
        for (c, &j) in free.iter().enumerate() {
            a[r][c] = k[i][j];
        }
        a[r][m] = -1.0;
        b[r] = -(0..n)
            .filter(|&j| face[j] == Face::Upper)
            .map(|j| k[i][j] * upper)
            .sum::<f64>();
    }
    a[m][..m].fill(1.0);
    b[m] = 1.0 - n_up as f64 * upper;
    let sol = linear_solve(a, b)?;
    let rho = sol[m];
    let mut alpha = vec![0.0; n];
    for i in 0..n {
        if face[i] == Face::Upper {
            alpha[i] = upper;
        }
    }
    for (r, &i) in free.iter().enumerate() {
        alpha[i] = sol[r];
    }
    let g = matvec(k, &alpha);
    let slack = 1e-12;
    let ok = (0..n).all(|i| match face[i] {
        Face::Free => alpha[i] > 0.0 && alpha[i] < upper,
        Face::Zero => g[i] >= rho - slack,
        Face::Upper => g[i] <= rho + slack,
    });
    ok.then_some((alpha, rho))
}

/// Offset read off an approximate solution: mean gradient over free
/// coordinates, or the midpoint of the feasible interval when none is free.
fn offset(x: &[f64], g: &[f64], upper: f64) -> f64 {
    let eps = 1e-9 * upper;
    let margin: Vec<f64> = (0..x.len())
        .filter(|&i| x[i] > eps && x[i] < upper - eps)
        .map(|i| g[i])
        .collect();
    if !margin.is_empty() {
        return margin.iter().sum::<f64>() / margin.len() as f64;
    }
    let lo = (0..x.len())
        .filter(|&i| x[i] >= upper - eps)
        .map(|i| g[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = (0..x.len())
        .filter(|&i| x[i] <= eps)
        .map(|i| g[i])
        .fold(f64::INFINITY, f64::min);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        _ => unreachable!("every alpha is free, at zero or at the bound"),
    }
}

/// Solves the dual by FISTA with adaptive restart and step 1/L. Every 256
/// iterations the face suggested by the iterate is solved exactly and the
/// first verified KKT point is returned. After `max_iter` the plain
/// iterate is returned with `exact == false`.
pub fn solve(points: &[[f64; 2]], nu: f64, gamma: f64, max_iter: usize) -> OracleModel {
    let n = points.len();
    assert!(n > 0 && nu > 0.0 && nu <= 1.0);
    let upper = 1.0 / (nu * n as f64);
    let k: Vec<Vec<f64>> = points
        .iter()
        .map(|&a| points.iter().map(|&b| rbf(a, b, gamma)).collect())
        .collect();
    let objective =
        |a: &[f64]| -> f64 { 0.5 * matvec(&k, a).iter().zip(a).map(|(g, x)| g * x).sum::<f64>() };
    // Gershgorin bound on the largest eigenvalue
    let lipschitz = k.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lipschitz;

    let mut x = project(&vec![1.0 / n as f64; n], upper);
    let mut fx = objective(&x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        if it % 256 == 0 {
            let exact = [1e-6, 1e-9, 1e-3]
                .iter()
                .find_map(|&th| polish(&k, &x, upper, th));
            if let Some((alpha, rho)) = exact {
                return OracleModel {
                    points: points.to_vec(),
                    alpha,
                    rho,
                    gamma,
                    upper,
                    iterations,
                    exact: true,
                };
            }
        }
        let g = matvec(&k, &y);
        let v: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let next = project(&v, upper);
        let f_next = objective(&next);
        // adaptive restart keeps the objective monotone
        if f_next > fx {
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        x = next;
        fx = f_next;
        t = t_next;
    }
    let g = matvec(&k, &x);
    OracleModel {
        points: points.to_vec(),
        rho: offset(&x, &g, upper),
        alpha: x,
        gamma,
        upper,
        iterations,
        exact: false,
    }
}
