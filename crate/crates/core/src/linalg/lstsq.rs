//! Least squares via Householder QR with column pivoting.
//!
//! Full-rank systems are solved by back substitution on `R`. When the
//! pivoted diagonal of `R` drops below `rcond * |R[0,0]|` the trailing
//! block is treated as zero and the leading trapezoid is reduced a second
//! time (a complete orthogonal decomposition), which yields the
//! minimum-norm minimizer.

use num_complex::Complex64;

use super::matrix::{dot, norm2, ComplexMatrix, RealMatrix};
use crate::error::{Error, Result};

/// Default relative threshold on the pivoted `R` diagonal.
pub const DEFAULT_RCOND: f64 = 1e-10;

/// Solution of a least squares problem.
#[derive(Clone, Debug, PartialEq)]
pub struct LstsqSolution {
    pub solution: Vec<f64>,
    pub residual_norm: f64,
}

#[derive(Clone, Debug)]
struct Householder {
    // reflector I - beta v v^T acting on rows start..
    start: usize,
    v: Vec<f64>,
    beta: f64,
}

impl Householder {
    /// Reflector mapping `x` onto a multiple of the first unit vector.
    /// Returns the reflector and the resulting leading entry.
    fn annihilate(start: usize, x: &[f64]) -> (Self, f64) {
        let norm = norm2(x);
        if norm == 0.0 {
            return (
                Self {
                    start,
                    v: vec![0.0; x.len()],
                    beta: 0.0,
                },
                0.0,
            );
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        let beta = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };
        (Self { start, v, beta }, alpha)
    }

    fn apply(&self, y: &mut [f64]) {
        if self.beta == 0.0 {
            return;
        }
        let seg = &mut y[self.start..self.start + self.v.len()];
        let s = self.beta * dot(&self.v, seg);
        for (yi, vi) in seg.iter_mut().zip(&self.v) {
            *yi -= s * vi;
        }
    }
}

/// Reusable factorization of a tall (or square) matrix for repeated solves.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    a: RealMatrix,
    rows: usize,
    cols: usize,
    // R stored in the upper triangle of `r`
    r: RealMatrix,
    reflectors: Vec<Householder>,
    perm: Vec<usize>,
    rank: usize,
    // second reduction of the leading rank x cols trapezoid, when rank < cols
    trapezoid: Option<(Vec<Householder>, RealMatrix)>,
}

impl LeastSquares {
    pub fn new(a: &RealMatrix) -> Result<Self> {
        Self::with_rcond(a, DEFAULT_RCOND)
    }

    pub fn with_rcond(a: &RealMatrix, rcond: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rcond) {
            return Err(Error::input(format!("rcond {rcond} outside [0, 1)")));
        }
        if a.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::input("least squares matrix has non-finite entries"));
        }
        let (m, n) = (a.rows(), a.cols());
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let steps = m.min(n);
        let mut reflectors = Vec::with_capacity(steps);

        for k in 0..steps {
            // pivot: largest remaining column norm (recomputed, sizes are small)
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..n {
                let col: Vec<f64> = (k..m).map(|i| r[(i, j)]).collect();
                let nj = norm2(&col);
                if nj > best_norm {
                    best_norm = nj;
                    best = j;
                }
            }
            r.swap_columns(k, best);
            perm.swap(k, best);

            let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
            let (h, alpha) = Householder::annihilate(k, &x);
            r[(k, k)] = alpha;
            for i in k + 1..m {
                r[(i, k)] = 0.0;
            }
            for j in k + 1..n {
                let mut col: Vec<f64> = (0..m).map(|i| r[(i, j)]).collect();
                h.apply(&mut col);
                for i in k..m {
                    r[(i, j)] = col[i];
                }
            }
            reflectors.push(h);
        }

        let lead = if steps > 0 { r[(0, 0)].abs() } else { 0.0 };
        let rank = if lead == 0.0 {
            0
        } else {
            (0..steps).take_while(|&k| r[(k, k)].abs() > rcond * lead).count()
        };

        let trapezoid = if rank > 0 && rank < n {
            // T^T = Q2 [S; 0] for the rank x n trapezoid T
            let mut tt = RealMatrix::zeros(n, rank);
            for i in 0..rank {
                for j in i..n {
                    tt[(j, i)] = r[(i, j)];
                }
            }
            let mut q2 = Vec::with_capacity(rank);
            for k in 0..rank {
                let x: Vec<f64> = (k..n).map(|i| tt[(i, k)]).collect();
                let (h, alpha) = Householder::annihilate(k, &x);
                tt[(k, k)] = alpha;
                for i in k + 1..n {
                    tt[(i, k)] = 0.0;
                }
                for j in k + 1..rank {
                    let mut col: Vec<f64> = (0..n).map(|i| tt[(i, j)]).collect();
                    h.apply(&mut col);
                    for i in k..n {
                        tt[(i, j)] = col[i];
                    }
                }
                q2.push(h);
            }
            Some((q2, tt))
        } else {
            None
        };

        Ok(Self {
            a: a.clone(),
            rows: m,
            cols: n,
            r,
            reflectors,
            perm,
            rank,
            trapezoid,
        })
    }

    /// Numerical rank detected from the pivoted `R` diagonal.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.cols
    }

    pub fn solve(&self, b: &[f64]) -> Result<LstsqSolution> {
        if b.len() != self.rows {
            return Err(Error::input(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.rows
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("right-hand side has non-finite entries"));
        }
        let mut qtb = b.to_vec();
        for h in &self.reflectors {
            h.apply(&mut qtb);
        }
        let r = self.rank;
        let mut y = vec![0.0; self.cols];
        match &self.trapezoid {
            None => {
                for i in (0..r).rev() {
                    let mut s = qtb[i];
                    for j in i + 1..r {
                        s -= self.r[(i, j)] * y[j];
                    }
                    y[i] = s / self.r[(i, i)];
                }
            }
            Some((q2, s_mat)) => {
                // S^T u = c, forward substitution
                let mut u = vec![0.0; self.cols];
                for i in 0..r {
                    let mut s = qtb[i];
                    for j in 0..i {
                        s -= s_mat[(j, i)] * u[j];
                    }
                    u[i] = s / s_mat[(i, i)];
                }
                for h in q2.iter().rev() {
                    h.apply(&mut u);
                }
                y = u;
            }
        }
        let mut x = vec![0.0; self.cols];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        let ax = self.a.matvec(&x)?;
        let resid: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
        Ok(LstsqSolution {
            solution: x,
            residual_norm: norm2(&resid),
        })
    }
}

/// Minimizes `|a x - b|`; rank-deficient systems return the minimum-norm
/// minimizer.
pub fn least_squares_solve(a: &RealMatrix, b: &[f64]) -> Result<LstsqSolution> {
    if a.rows() < a.cols() {
        return Err(Error::input(format!(
            "least squares needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    LeastSquares::new(a)?.solve(b)
}

/// Complex least squares `A X ≈ B` for several right-hand sides (columns
/// of `rhs`), solved through the real embedding of `A`.
pub fn complex_least_squares(
    a: &ComplexMatrix,
    rhs: &[Vec<Complex64>],
    rcond: f64,
) -> Result<(Vec<Vec<Complex64>>, usize)> {
    let (m, n) = (a.rows(), a.cols());
    let lsq = LeastSquares::with_rcond(&a.real_embedding(), rcond)?;
    let mut out = Vec::with_capacity(rhs.len());
    for b in rhs {
        if b.len() != m {
            return Err(Error::input(format!(
                "right-hand side has length {}, expected {m}",
                b.len()
            )));
        }
        let stacked: Vec<f64> = b.iter().map(|z| z.re).chain(b.iter().map(|z| z.im)).collect();
        let sol = lsq.solve(&stacked)?;
        out.push(
            (0..n)
                .map(|j| Complex64::new(sol.solution[j], sol.solution[j + n]))
                .collect(),
        );
    }
    Ok((out, lsq.rank() / 2))
}
