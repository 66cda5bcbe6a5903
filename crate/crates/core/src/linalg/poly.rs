//! Real polynomials and their roots.
//!
//! Roots are eigenvalues of the companion matrix of the monic-normalized
//! polynomial. The companion matrix is balanced and reduced with the
//! Francis double-shift QR iteration; each eigenvalue is then polished
//! with a few Newton steps on the original coefficients and the result
//! is post-processed so non-real roots come in exact conjugate pairs.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Documented bound on `|p(r)| / max|coefficient|` for returned roots.
pub const ROOT_TOLERANCE: f64 = 1e-8;

/// Two roots closer than this to each other's conjugate are paired.
pub const PAIRING_TOLERANCE: f64 = 1e-6;

const MAX_QR_ITERATIONS: usize = 60;

/// Real polynomial with coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPolynomial {
    coefficients: Vec<f64>,
}

impl RealPolynomial {
    /// Trailing (highest-degree) zeros are trimmed. The zero polynomial and
    /// constants are rejected since they have no roots to find.
    pub fn new(mut coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("polynomial has non-finite coefficients"));
        }
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        match coefficients.len() {
            0 => Err(Error::input("zero polynomial")),
            1 => Err(Error::input("constant polynomial has no roots")),
            _ => Ok(Self { coefficients }),
        }
    }

    /// Monic polynomial with the given roots, expanded in complex arithmetic.
    /// Imaginary parts of the coefficients are dropped, so the roots should
    /// be closed under conjugation.
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in leja_order(roots) {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self::new(c.into_iter().map(|z| z.re).collect())
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coefficients.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// All `degree` roots, counted with multiplicity.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let coeffs = &self.coefficients;
        let zeros_at_origin = coeffs.iter().take_while(|&&c| c == 0.0).count();
        let reduced = &coeffs[zeros_at_origin..];
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
        let deg = reduced.len() - 1;
        if deg > 0 {
            let lead = reduced[deg];
            // companion matrix in upper Hessenberg form, 1-based storage
            let mut h = vec![vec![0.0; deg + 1]; deg + 1];
            for j in 1..=deg {
                h[1][j] = -reduced[deg - j] / lead;
            }
            for i in 2..=deg {
                h[i][i - 1] = 1.0;
            }
            balance(&mut h, deg);
            let eig = hessenberg_eigenvalues(&mut h, deg)?;
            roots.extend(eig.into_iter().map(|z| self.polish(z)));
        }
        Ok(pair_conjugates(roots))
    }

    fn polish(&self, z0: Complex64) -> Complex64 {
        let mut z = z0;
        let mut pz = self.eval(z).norm();
        for _ in 0..4 {
            if pz == 0.0 {
                break;
            }
            let (p, dp) = self.eval_with_derivative(z);
            if dp.norm() == 0.0 {
                break;
            }
            let cand = z - p / dp;
            let pc = self.eval(cand).norm();
            if pc.is_finite() && pc < pz {
                z = cand;
                pz = pc;
            } else {
                break;
            }
        }
        z
    }
}

/// Reorders roots so each next one maximizes the product of distances to
/// those already taken. Expanding in this order keeps intermediate
/// coefficients small; the naive order loses most digits by degree 60.
fn leja_order(roots: &[Complex64]) -> Vec<Complex64> {
    let mut rest = roots.to_vec();
    let mut out = Vec::with_capacity(rest.len());
    let mut score = vec![0.0f64; rest.len()];
    let first = (0..rest.len()).max_by(|&a, &b| rest[a].norm().total_cmp(&rest[b].norm()));
    let mut pick = match first {
        Some(i) => i,
        None => return out,
    };
    loop {
        let z = rest.swap_remove(pick);
        score.swap_remove(pick);
        out.push(z);
        if rest.is_empty() {
            return out;
        }
        for (s, w) in score.iter_mut().zip(&rest) {
            *s += (w - z).norm().max(f64::MIN_POSITIVE).ln();
        }
        pick = (0..rest.len()).max_by(|&a, &b| score[a].total_cmp(&score[b])).unwrap();
    }
}

/// Convenience wrapper over [`RealPolynomial::roots`].
pub fn polynomial_roots(p: &RealPolynomial) -> Result<Vec<Complex64>> {
    p.roots()
}

/// Greedy nearest-conjugate matching. Matched pairs are made exactly
/// conjugate (the root with positive imaginary part comes first);
/// unmatched roots within the tolerance of the real axis are snapped onto it.
pub fn pair_conjugates(roots: Vec<Complex64>) -> Vec<Complex64> {
    let n = roots.len();
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    let mut order: Vec<usize> = (0..n).collect();
    // largest imaginary part first so that pairs are matched deterministically
    order.sort_by(|&a, &b| roots[b].im.total_cmp(&roots[a].im));
    for &i in &order {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = roots[i];
        let tol = PAIRING_TOLERANCE * z.norm().max(1.0);
        if z.im.abs() <= tol {
            out.push(Complex64::new(z.re, 0.0));
            continue;
        }
        let partner = (0..n)
            .filter(|&j| !used[j])
            .map(|j| (j, (roots[j] - z.conj()).norm()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, _)) => {
                used[j] = true;
                let w = 0.5 * (z + roots[j].conj());
                let upper = Complex64::new(w.re, w.im.abs());
                out.push(upper);
                out.push(upper.conj());
            }
            None => out.push(z),
        }
    }
    out
}

const RADIX: f64 = 2.0;

/// Parlett-Reinsch balancing by powers of the radix; preserves Hessenberg form.
fn balance(a: &mut [Vec<f64>], n: usize) {
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for j in 1..=n {
                        a[j][i] *= f;
                    }
                }
            }
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix (1-based, destroyed on exit)
/// by the Francis double-shift QR algorithm.
fn hessenberg_eigenvalues(a: &mut [Vec<f64>], n: usize) -> Result<Vec<Complex64>> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= f64::EPSILON * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                // one root found
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nn - 1][nn - 1];
            let mut w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                // two roots found
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn = nn.saturating_sub(2);
                break;
            }
            if its == MAX_QR_ITERATIONS {
                return Err(Error::domain("QR iteration did not converge"));
            }
            if its == 10 || its == 20 || its == 40 {
                // exceptional shift
                t += x;
                for i in 1..=nn {
                    a[i][i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = 0.0;
                    if k != nn - 1 {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k != nn - 1 {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[i][k] + y * a[i][k + 1];
                        if k != nn - 1 {
                            pp += z * a[i][k + 2];
                            a[i][k + 2] -= pp * r;
                        }
                        a[i][k + 1] -= pp * q;
                        a[i][k] -= pp;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Every expected root has a distinct computed root within `tol`.
    fn assert_root_sets_match(got: &[Complex64], want: &[Complex64], tol: f64) {
        assert_eq!(got.len(), want.len());
        let mut used = vec![false; got.len()];
        for w in want {
            let (j, d) = got
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, g)| (j, (g - w).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(d < tol, "root {w} missed by {d}; got {got:?}");
            used[j] = true;
        }
    }

    #[test]
    fn unit_imaginary_pair() {
        let p = RealPolynomial::new(vec![1.0, 0.0, 1.0]).unwrap();
        let r = p.roots().unwrap();
        assert_root_sets_match(&r, &[c(0.0, 1.0), c(0.0, -1.0)], 1e-14);
        assert_eq!(r[0], r[1].conj());
    }

    #[test]
    fn off_circle_palindromic_counterexample() {
        let p = RealPolynomial::new(vec![1.0, 0.0, 17.0 / 4.0, 0.0, 1.0]).unwrap();
        let r = p.roots().unwrap();
        let want = [c(0.0, 2.0), c(0.0, -2.0), c(0.0, 0.5), c(0.0, -0.5)];
        assert_root_sets_match(&r, &want, 1e-10);
        for z in &r {
            assert!(p.eval(*z).norm() <= ROOT_TOLERANCE * p.max_abs_coefficient());
        }
    }

    #[test]
    fn expand_then_solve_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut want = Vec::new();
        for _ in 0..2 {
            let z = c(rng.random_range(-1.5..1.5), rng.random_range(0.2..1.5));
            want.push(z);
            want.push(z.conj());
        }
        want.push(c(rng.random_range(-2.0..-0.5), 0.0));
        want.push(c(rng.random_range(0.5..2.0), 0.0));
        let p = RealPolynomial::from_roots(&want).unwrap();
        let got = p.roots().unwrap();
        assert_root_sets_match(&got, &want, 1e-8);
    }

    #[test]
    fn degree_one_and_zero_roots() {
        let p = RealPolynomial::new(vec![3.0, -2.0]).unwrap();
        assert_eq!(p.roots().unwrap(), vec![c(1.5, 0.0)]);
        let q = RealPolynomial::new(vec![0.0, 0.0, -1.0, 1.0]).unwrap();
        assert_root_sets_match(&q.roots().unwrap(), &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-14);
    }

    #[test]
    fn rejects_degenerate_polynomials() {
        assert!(RealPolynomial::new(vec![0.0, 0.0]).is_err());
        assert!(RealPolynomial::new(vec![]).is_err());
        assert!(RealPolynomial::new(vec![2.0]).is_err());
        assert!(RealPolynomial::new(vec![1.0, f64::NAN]).is_err());
        // trailing zeros trimmed
        assert_eq!(RealPolynomial::new(vec![1.0, 1.0, 0.0]).unwrap().degree(), 1);
    }

    #[test]
    fn high_degree_unit_circle_roots() {
        // 60 well-separated roots near the unit circle, closed under conjugation
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let mut want = Vec::new();
        for k in 0..30 {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / 30.0 + rng.random_range(-0.01..0.01);
            let r = rng.random_range(0.97..1.03);
            want.push(Complex64::from_polar(r, th));
            want.push(Complex64::from_polar(r, -th));
        }
        let p = RealPolynomial::from_roots(&want).unwrap();
        let got = p.roots().unwrap();
        assert_root_sets_match(&got, &want, 1e-8);
        let back = RealPolynomial::from_roots(&got).unwrap();
        let scale = p.max_abs_coefficient();
        for (a, b) in back.coefficients().iter().zip(p.coefficients()) {
            assert!((a - b).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn conjugate_pairing_snaps_and_orders() {
        let r = pair_conjugates(vec![c(0.3, -0.4 - 1e-9), c(2.0, 1e-9), c(0.3, 0.4)]);
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].conj(), r[1]);
        assert!(r[0].im > 0.0);
        assert_eq!(r[2], c(2.0, 0.0));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;
        use rand::{Rng as _, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        fn separated_roots() -> impl Strategy<Value = Vec<Complex64>> {
            (1usize..=30, any::<u64>()).prop_map(|(pairs, seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut roots = Vec::new();
                for k in 0..pairs {
                    let th = std::f64::consts::PI * (k as f64 + 0.5) / pairs as f64
                        + rng.random_range(-0.1..0.1) / pairs as f64;
                    let r = rng.random_range(0.8..1.25);
                    roots.push(Complex64::from_polar(r, th));
                    roots.push(Complex64::from_polar(r, -th));
                }
                roots
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn roots_then_reexpand_reproduces_coefficients(roots in separated_roots()) {
                let p = RealPolynomial::from_roots(&roots).unwrap();
                let got = p.roots().unwrap();
                prop_assert_eq!(got.len(), p.degree());
                let scale = p.max_abs_coefficient();
                for z in &got {
                    prop_assert!(p.eval(*z).norm() <= ROOT_TOLERANCE * scale);
                }
                let back = RealPolynomial::from_roots(&got).unwrap();
                for (a, b) in back.coefficients().iter().zip(p.coefficients()) {
                    prop_assert!((a - b).abs() <= 1e-8 * scale, "{} vs {}", a, b);
                }
            }

            #[test]
            fn non_real_roots_come_in_exact_pairs(roots in separated_roots()) {
                let got = RealPolynomial::from_roots(&roots).unwrap().roots().unwrap();
                for z in got.iter().filter(|z| z.im != 0.0) {
                    prop_assert!(got.contains(&z.conj()));
                }
            }
        }
    }
}
