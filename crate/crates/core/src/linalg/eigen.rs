//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use super::matrix::RealMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: RealMatrix,
}

/// Decomposes a symmetric matrix. Each eigenvector's sign is fixed so that
/// its first component above `1e-10` in magnitude is positive.
pub fn symmetric_eigen(s: &RealMatrix) -> Result<SymmetricEigen> {
    if !s.is_square() {
        return Err(Error::input(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if s.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::input("matrix has non-finite entries"));
    }
    let scale = s.max_abs();
    if !s.is_symmetric(1e-12 * scale) {
        return Err(Error::input("matrix is not symmetric"));
    }
    let n = s.rows();
    let mut a = s.clone();
    // symmetrize exactly before rotating
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    let mut v = RealMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= f64::EPSILON * f64::EPSILON * (diag + off) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = RealMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let flip = (0..n)
            .map(|i| v[(i, src)])
            .find(|x| x.abs() > 1e-10)
            .is_some_and(|x| x < 0.0);
        let sign = if flip { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[(i, k)] = sign * v[(i, src)];
        }
    }
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(seed: u64, n: usize) -> RealMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = RealMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x = rng.random_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    }

    #[test]
    fn diagonal_input() {
        let e = symmetric_eigen(&RealMatrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.eigenvectors.column(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(e.eigenvectors.column(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(e.eigenvectors.column(2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn path_three_laplacian() {
        let l = RealMatrix::from_rows(&[vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]).unwrap();
        let e = symmetric_eigen(&l).unwrap();
        for (got, want) in e.eigenvalues.iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let s = random_symmetric(5, 8);
        let e = symmetric_eigen(&s).unwrap();
        let lam = RealMatrix::from_diagonal(&e.eigenvalues);
        let back = e
            .eigenvectors
            .matmul(&lam)
            .unwrap()
            .matmul(&e.eigenvectors.transpose())
            .unwrap();
        for (x, y) in back.as_slice().iter().zip(s.as_slice()) {
            assert!((x - y).abs() < 1e-9);
        }
        let vtv = e.eigenvectors.transpose().matmul(&e.eigenvectors).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[(i, j)] - want).abs() < 1e-10);
            }
        }
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let lam_max = e.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..8 {
            let vk = e.eigenvectors.column(k);
            let sv = s.matvec(&vk).unwrap();
            for i in 0..8 {
                assert!((sv[i] - e.eigenvalues[k] * vk[i]).abs() <= 1e-10 * lam_max);
            }
        }
    }

    #[test]
    fn trace_and_determinant() {
        let s = random_symmetric(9, 4);
        let e = symmetric_eigen(&s).unwrap();
        let sum: f64 = e.eigenvalues.iter().sum();
        assert!((sum - s.trace()).abs() <= 1e-10 * s.trace().abs().max(1.0));
        // 4x4 determinant by cofactor expansion
        fn det(m: &[Vec<f64>]) -> f64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|c| {
                    let minor: Vec<Vec<f64>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| *v).collect())
                        .collect();
                    let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                    sign * m[0][c] * det(&minor)
                })
                .sum()
        }
        let rows: Vec<Vec<f64>> = (0..4).map(|i| s.row(i).to_vec()).collect();
        let d = det(&rows);
        let prod: f64 = e.eigenvalues.iter().product();
        assert!((prod - d).abs() <= 1e-8 * d.abs());
    }

    #[test]
    fn rejects_asymmetric() {
        let m = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(symmetric_eigen(&m).is_err());
    }

    #[test]
    fn one_by_one() {
        let e = symmetric_eigen(&RealMatrix::new(1, 1, vec![-4.5]).unwrap()).unwrap();
        assert_eq!(e.eigenvalues, vec![-4.5]);
        assert_eq!(e.eigenvectors.as_slice(), &[1.0]);
    }
}
