//! Two-coordinate SMO for the one-class dual
//!
//! ```text
//! min  1/2 a'Ka   s.t.  0 <= a_i <= 1/(nu n),  sum a_i = 1
//! ```
//!
//! The gradient of the objective is `G = K a`, and `f(x_i) = G_i - rho`.
//! A pair (i, j) is violating when `a_i` can grow, `a_j` can shrink and
//! `G_i < G_j`. The gap is measured on the dual rescaled by `nu n` (box
//! `[0, 1]`), and never looser than the unscaled gap, so on return every
//! KKT violation in decision units is at most `tol`.

use super::kernel::KernelMatrix;
use crate::geometry::PlanarPoint;

/// Relative distance to a box bound below which an update is clipped.
const BOUND_SNAP: f64 = 1e-14;
const MIN_CURVATURE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub alpha: Vec<f64>,
    pub gradient: Vec<f64>,
    pub rho: f64,
    pub upper: f64,
    pub iterations: usize,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Stalled {
    pub iterations: usize,
    pub gap: f64,
    pub objective: f64,
}

/// Most violating pair: `i` minimises G over the up-set, `j` maximises G
/// over the down-set. Ties go to the lowest index.
fn select_pair(alpha: &[f64], grad: &[f64], upper: f64) -> Option<(usize, usize, f64)> {
    let mut i_best: Option<usize> = None;
    let mut j_best: Option<usize> = None;
    for (k, (&a, &g)) in alpha.iter().zip(grad).enumerate() {
        if a < upper && i_best.is_none_or(|i| g < grad[i]) {
            i_best = Some(k);
        }
        if a > 0.0 && j_best.is_none_or(|j| g > grad[j]) {
            j_best = Some(k);
        }
    }
    let (i, j) = (i_best?, j_best?);
    Some((i, j, grad[j] - grad[i]))
}

fn objective(alpha: &[f64], grad: &[f64]) -> f64 {
    0.5 * alpha.iter().zip(grad).map(|(a, g)| a * g).sum::<f64>()
}

pub(crate) fn solve(
    points: &[PlanarPoint],
    nu: f64,
    gamma: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Solution, Stalled> {
    let mut kernel = KernelMatrix::new(points, gamma);
    solve_with(&mut kernel, points.len(), nu, tol, max_iter)
}

pub(crate) fn solve_with(
    kernel: &mut KernelMatrix<'_>,
    n: usize,
    nu: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Solution, Stalled> {
    let upper = 1.0 / (nu * n as f64);
    // uniform start is feasible because 1/n <= 1/(nu n)
    let mut alpha = vec![1.0 / n as f64; n];
    let mut grad = vec![0.0; n];
    for (i, &a) in alpha.iter().enumerate() {
        let row = kernel.row(i);
        for (g, k) in grad.iter_mut().zip(row) {
            *g += k * a;
        }
    }

    let stop = tol * (upper.min(1.0));
    let budget = max_iter.saturating_mul(n);
    let mut iterations = 0;
    let gap = loop {
        let Some((i, j, gap)) = select_pair(&alpha, &grad, upper) else {
            break 0.0;
        };
        if gap <= stop || i == j {
            break gap;
        }
        if iterations >= budget {
            return Err(Stalled {
                iterations,
                gap,
                objective: objective(&alpha, &grad),
            });
        }
        iterations += 1;

        let curvature = (2.0 - 2.0 * kernel.get(i, j)).max(MIN_CURVATURE);
        let room_i = upper - alpha[i];
        let room_j = alpha[j];
        let mut step = gap / curvature;
        // steps landing within rounding distance of a bound go to the bound
        let snap = BOUND_SNAP * upper;
        if step >= room_i - snap {
            step = room_i;
        }
        if step >= room_j - snap {
            step = room_j;
        }
        alpha[i] = if step == room_i || room_i - step <= snap { upper } else { alpha[i] + step };
        alpha[j] = if step == room_j || room_j - step <= snap { 0.0 } else { alpha[j] - step };

        let row_i = kernel.row(i);
        for (g, k) in grad.iter_mut().zip(row_i) {
            *g += step * k;
        }
        let row_j = kernel.row(j);
        for (g, k) in grad.iter_mut().zip(row_j) {
            *g -= step * k;
        }
    };

    // fresh gradient removes accumulated update drift before rho is read off
    grad.iter_mut().for_each(|g| *g = 0.0);
    for (i, &a) in alpha.iter().enumerate() {
        if a > 0.0 {
            let row = kernel.row(i);
            for (g, k) in grad.iter_mut().zip(row) {
                *g += k * a;
            }
        }
    }
    let rho = offset(&alpha, &grad, upper);
    Ok(Solution {
        alpha,
        gradient: grad,
        rho,
        upper,
        iterations,
        gap,
    })
}

/// Mean gradient over margin vectors; otherwise the midpoint of the
/// interval allowed by the bound and zero vectors.
fn offset(alpha: &[f64], grad: &[f64], upper: f64) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut lower_bound = f64::NEG_INFINITY;
    let mut upper_bound = f64::INFINITY;
    for (&a, &g) in alpha.iter().zip(grad) {
        if a > 0.0 && a < upper {
            sum += g;
            count += 1;
        } else if a >= upper {
            lower_bound = lower_bound.max(g);
        } else {
            upper_bound = upper_bound.min(g);
        }
    }
    if count > 0 {
        return sum / count as f64;
    }
    match (lower_bound.is_finite(), upper_bound.is_finite()) {
        (true, true) => 0.5 * (lower_bound + upper_bound),
        (true, false) => lower_bound,
        (false, true) => upper_bound,
        (false, false) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_forced_solution() {
        let pts = [PlanarPoint::new(3.0, 4.0)];
        let s = solve(&pts, 0.5, 1.0, 1e-6, 10).unwrap();
        assert_eq!(s.alpha, vec![1.0]);
        assert_eq!(s.rho, 1.0);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn two_identical_points_share_weight() {
        let p = PlanarPoint::new(0.1, 0.2);
        let s = solve(&[p, p], 0.5, 3.0, 1e-6, 10).unwrap();
        assert_eq!(s.alpha, vec![0.5, 0.5]);
        assert_eq!(s.rho, 1.0);
    }

    #[test]
    fn nu_one_pins_every_alpha() {
        let pts: Vec<_> = (0..5).map(|i| PlanarPoint::new(i as f64, 0.0)).collect();
        let s = solve(&pts, 1.0, 0.5, 1e-8, 100).unwrap();
        for a in &s.alpha {
            assert!((a - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn stalls_when_passes_exhausted() {
        let pts: Vec<_> = (0..30)
            .map(|i| PlanarPoint::new((i as f64).sin(), (i as f64 * 1.7).cos()))
            .collect();
        let err = solve(&pts, 0.1, 2.0, 1e-12, 1).unwrap_err();
        assert_eq!(err.iterations, 30);
        assert!(err.gap > 1e-12);
        assert!(err.objective > 0.0);
    }

    #[test]
    fn offset_without_margin_vectors_is_midpoint() {
        let rho = offset(&[0.5, 0.5, 0.0], &[0.2, 0.4, 0.9], 0.5);
        assert!((rho - 0.65).abs() < 1e-15);
    }
}
