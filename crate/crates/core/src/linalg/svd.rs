//! Singular values by one-sided (Hestenes) Jacobi orthogonalization.

use super::matrix::{dot, norm2, RealMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order; `min(rows, cols)` of them.
pub fn singular_values(a: &RealMatrix) -> Vec<f64> {
    // work on columns of the taller orientation
    let work = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let n = work.cols();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| work.column(j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let xp = *x;
                    let yq = *y;
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numeric_rank(a: &RealMatrix, rel_tol: f64) -> Result<usize> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::input(format!("rel_tol {rel_tol} outside (0, 1)")));
    }
    Ok(rank_from_singular_values(&singular_values(a), rel_tol))
}

pub(crate) fn rank_from_singular_values(sv: &[f64], rel_tol: f64) -> usize {
    let largest = sv.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * largest).count()
}
