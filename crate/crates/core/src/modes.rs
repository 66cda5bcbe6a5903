//! Mode extraction from integer-sampled panels.
//!
//! A panel is modelled as `F(x,t) = Σ_j α_j(x) z_j^t`. The general solver
//! fits a linear recurrence of order `M` shared by all variables (Prony /
//! DMD). The stationary solver restricts the recurrence to the palindromic
//! family produced by a constant mode plus `N` unit-modulus conjugate pairs,
//! which only needs the `N` free coefficients `d_1 … d_N`.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{complex_least_squares, ComplexMatrix, LeastSquares, RealMatrix, RealPolynomial, DEFAULT_RCOND};
use crate::linalg::{numeric_rank, pair_conjugates};
use crate::panel::{parse_error, SignalPanel};

/// Two modes closer than this are treated as coinciding.
pub const DEDUP_TOL: f64 = 1e-9;

/// A mode whose modulus differs from 1 by more than this is reported as
/// off the unit circle.
pub const UNIT_MODULUS_TOL: f64 = 1e-6;

/// Relative residue allowed in the imaginary part of a reconstruction.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-8;

/// Complex modes with conjugate pairing.
///
/// Canonical order: the constant mode `z = 1` (if present), then conjugate
/// pairs sorted by angle with the upper member first, then real modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    modes: Vec<Complex64>,
    moduli: Vec<f64>,
    partner: Vec<Option<usize>>,
    has_constant: bool,
    warnings: Vec<String>,
}

impl ModeSet {
    /// Orders and pairs the given modes. A mode equal to exactly `1` is the
    /// constant mode. Moduli are taken from the modes themselves.
    pub fn new(modes: Vec<Complex64>) -> Result<Self> {
        let moduli = modes.iter().map(|z| z.norm()).collect();
        Self::with_moduli(modes, moduli)
    }

    /// Like [`ModeSet::new`] but records `moduli` as the pre-normalization
    /// magnitudes.
    pub fn with_moduli(modes: Vec<Complex64>, moduli: Vec<f64>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::input("mode set is empty"));
        }
        if modes.len() != moduli.len() {
            return Err(Error::input("modulus count does not match mode count"));
        }
        if modes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::input("non-finite mode"));
        }
        let one = Complex64::new(1.0, 0.0);
        let rank = |z: &Complex64| -> (u8, f64, f64) {
            if *z == one {
                (0, 0.0, 0.0)
            } else if z.im != 0.0 {
                // pairs adjacent: key on |θ|, upper member first
                (1, z.arg().abs(), -z.im)
            } else {
                (2, z.re, 0.0)
            }
        };
        let mut order: Vec<usize> = (0..modes.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (rank(&modes[a]), rank(&modes[b]));
            ra.0.cmp(&rb.0)
                .then(ra.1.total_cmp(&rb.1))
                .then(ra.2.total_cmp(&rb.2))
                .then(modes[a].norm().total_cmp(&modes[b].norm()))
        });
        let modes: Vec<Complex64> = order.iter().map(|&i| modes[i]).collect();
        let moduli: Vec<f64> = order.iter().map(|&i| moduli[i]).collect();
        let has_constant = modes[0] == one;
        let mut partner = vec![None; modes.len()];
        for j in 0..modes.len() {
            if modes[j].im == 0.0 || partner[j].is_some() {
                continue;
            }
            if let Some(k) = (0..modes.len()).find(|&k| k != j && partner[k].is_none() && modes[k] == modes[j].conj()) {
                partner[j] = Some(k);
                partner[k] = Some(j);
            }
        }
        let mut warnings = Vec::new();
        for j in 0..modes.len() {
            for k in j + 1..modes.len() {
                if (modes[j] - modes[k]).norm() <= DEDUP_TOL {
                    warnings.push(format!(
                        "ill-posed: modes {j} and {k} coincide ({} and {})",
                        modes[j], modes[k]
                    ));
                }
            }
        }
        Ok(Self {
            modes,
            moduli,
            partner,
            has_constant,
            warnings,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Complex64] {
        &self.modes
    }

    /// Principal arguments in `(-π, π]`.
    pub fn angles(&self) -> Vec<f64> {
        self.modes.iter().map(|z| z.arg()).collect()
    }

    /// Magnitudes before any normalization.
    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    pub fn has_constant(&self) -> bool {
        self.has_constant
    }

    /// Index of the conjugate partner of mode `j`, if it has one.
    pub fn partner(&self, j: usize) -> Option<usize> {
        self.partner[j]
    }

    /// Every non-real mode has its conjugate in the set.
    pub fn is_conjugate_closed(&self) -> bool {
        self.modes
            .iter()
            .zip(&self.partner)
            .all(|(z, p)| z.im == 0.0 || p.is_some())
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Smallest distance between two distinct modes (infinite for one mode).
    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for j in 0..self.len() {
            for k in j + 1..self.len() {
                m = m.min((self.modes[j] - self.modes[k]).norm());
            }
        }
        m
    }

    /// How far the recorded moduli stray from 1.
    pub fn modulus_report(&self) -> ModulusReport {
        let off_unit_circle: Vec<usize> = (0..self.len())
            .filter(|&j| (self.moduli[j] - 1.0).abs() > UNIT_MODULUS_TOL)
            .collect();
        ModulusReport {
            max_deviation: self.moduli.iter().fold(0.0, |m, r| m.max((r - 1.0).abs())),
            off_unit_circle,
        }
    }

    /// CSV with columns `re,im,theta,modulus,is_constant`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "theta", "modulus", "is_constant"])?;
        for (j, z) in self.modes.iter().enumerate() {
            let is_const = self.has_constant && j == 0;
            w.write_record([
                format!("{:?}", z.re),
                format!("{:?}", z.im),
                format!("{:?}", z.arg()),
                format!("{:?}", self.moduli[j]),
                is_const.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, origin: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = r.headers()?.clone();
        let want = ["re", "im", "theta", "modulus", "is_constant"];
        if header.iter().ne(want) {
            return Err(parse_error(
                origin,
                1,
                "*",
                "expected header re,im,theta,modulus,is_constant",
            ));
        }
        let mut modes = Vec::new();
        let mut moduli = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let num = |c: usize| -> Result<f64> {
                rec.get(c)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_error(origin, row, want[c], "not a finite number"))
            };
            modes.push(Complex64::new(num(0)?, num(1)?));
            moduli.push(num(3)?);
        }
        Self::with_moduli(modes, moduli)
    }
}

/// Deviation of mode magnitudes from the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulusReport {
    pub max_deviation: f64,
    /// Indices of modes with `||z| - 1| > UNIT_MODULUS_TOL`.
    pub off_unit_circle: Vec<usize>,
}

impl ModulusReport {
    pub fn any_off_unit_circle(&self) -> bool {
        !self.off_unit_circle.is_empty()
    }
}

/// The free coefficients `d_1 … d_N` of the palindromic recurrence, with
/// the conditioning of the system they were solved from.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryCoefficients {
    pub d: Vec<f64>,
    /// Numerical rank of the coefficient matrix (equals `N` when well posed).
    pub rank: usize,
    pub residual_norm: f64,
}

impl StationaryCoefficients {
    /// Ascending coefficients of `Z^{2N} - d_1 Z^{2N-1} - … - d_N Z^N - … - d_1 Z + 1`.
    pub fn polynomial(&self) -> Result<RealPolynomial> {
        palindromic_polynomial(&self.d)
    }
}

fn palindromic_polynomial(d: &[f64]) -> Result<RealPolynomial> {
    let n = d.len();
    if n == 0 {
        return Err(Error::input("need at least one coefficient"));
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite coefficient"));
    }
    let mut c = vec![0.0; 2 * n + 1];
    c[0] = 1.0;
    c[2 * n] = 1.0;
    for j in 1..=n {
        c[j] = -d[j - 1];
        c[2 * n - j] = -d[j - 1];
    }
    RealPolynomial::new(c)
}

/// `G(x,t;k) = F(t+N+1+k) - F(t+N+k) + F(t+N+1-k) - F(t+N-k)` for every node.
pub fn build_shifted_difference(panel: &SignalPanel, n_pairs: usize, k: usize, t: i64) -> Result<Vec<f64>> {
    if k > n_pairs {
        return Err(Error::input(format!("shift {k} exceeds pair count {n_pairs}")));
    }
    let base = t + n_pairs as i64;
    let (k, one) = (k as i64, 1i64);
    let lo = base - k;
    let hi = base + one + k;
    if lo < panel.t_start() || hi > panel.t_end() {
        return Err(Error::input(format!(
            "difference at t = {t} needs times {lo}..={hi}, panel covers {}..={}",
            panel.t_start(),
            panel.t_end()
        )));
    }
    (0..panel.n())
        .map(|x| {
            Ok(
                panel.value(x, base + 1 + k)? - panel.value(x, base + k)? + panel.value(x, base + 1 - k)?
                    - panel.value(x, base - k)?,
            )
        })
        .collect()
}

/// Stacked stationary system `A d = b` with columns
/// `[G(·;0)/2, G(·;1), …, G(·;N-1)]` (coefficients `d_N … d_1`) and
/// right-hand side `G(·;N)`, one row per (node, admissible shift).
///
/// Every shift the panel admits is used; `lag` is the minimum shift count.
pub fn stationary_system(panel: &SignalPanel, n_pairs: usize, lag: usize) -> Result<(RealMatrix, Vec<f64>)> {
    if n_pairs == 0 || lag == 0 {
        return Err(Error::input("pair count and lag must be positive"));
    }
    let need = lag + 2 * n_pairs + 1;
    if panel.len() < need {
        return Err(Error::InsufficientSamples(format!(
            "{} samples, need at least {need} for N = {n_pairs}, L = {lag}",
            panel.len()
        )));
    }
    if panel.n() * lag < n_pairs {
        return Err(Error::input(format!("N = {n_pairs} exceeds n·L = {}", panel.n() * lag)));
    }
    let shifts = panel.len() - 2 * n_pairs - 1;
    let rows = panel.n() * shifts;
    let mut a = RealMatrix::zeros(rows, n_pairs);
    let mut b = vec![0.0; rows];
    for s in 0..shifts {
        let t = panel.t_start() + s as i64;
        for k in 0..=n_pairs {
            let g = build_shifted_difference(panel, n_pairs, k, t)?;
            for (x, v) in g.into_iter().enumerate() {
                let row = x * shifts + s;
                if k == n_pairs {
                    b[row] = v;
                } else if k == 0 {
                    a[(row, 0)] = 0.5 * v;
                } else {
                    a[(row, k)] = v;
                }
            }
        }
    }
    Ok((a, b))
}

/// Numeric rank of the stationary coefficient matrix at `n_max` pairs, read
/// as the number of frequency pairs present.
pub fn estimate_model_order(panel: &SignalPanel, n_max: usize, lag: usize, rel_tol: f64) -> Result<usize> {
    let (a, _) = stationary_system(panel, n_max, lag)?;
    numeric_rank(&a, rel_tol)
}

/// Stationary extraction: least-squares `d`, palindromic polynomial, its `2N`
/// roots and the constant mode. With `normalize`, roots are projected onto
/// the unit circle; the recorded moduli keep the raw magnitudes.
pub fn extract_modes_stationary(
    panel: &SignalPanel,
    n_pairs: usize,
    lag: usize,
    normalize: bool,
) -> Result<(ModeSet, StationaryCoefficients)> {
    let (a, b) = stationary_system(panel, n_pairs, lag)?;
    let lsq = LeastSquares::new(&a)?;
    let sol = lsq.solve(&b)?;
    // solution is ordered d_N … d_1
    let d: Vec<f64> = sol.solution.iter().rev().copied().collect();
    let coeffs = StationaryCoefficients {
        d,
        rank: lsq.rank(),
        residual_norm: sol.residual_norm,
    };
    let mut modes = stationary_modes_from_coefficients(&coeffs.d, normalize)?;
    if coeffs.rank < n_pairs {
        modes.warnings.push(format!(
            "ill-posed: stationary system has rank {} < N = {n_pairs}",
            coeffs.rank
        ));
    }
    Ok((modes, coeffs))
}

/// Mode set of the palindromic polynomial built from `d`, plus the constant mode.
pub fn stationary_modes_from_coefficients(d: &[f64], normalize: bool) -> Result<ModeSet> {
    let roots = palindromic_polynomial(d)?.roots()?;
    let mut modes = vec![Complex64::new(1.0, 0.0)];
    let mut moduli = vec![1.0];
    for z in roots {
        moduli.push(z.norm());
        modes.push(if normalize { z / z.norm() } else { z });
    }
    let mut set = ModeSet::with_moduli(modes, moduli)?;
    if set.modes[1..].iter().any(|z| (z - 1.0).norm() <= DEDUP_TOL) {
        set.warnings
            .push("ill-posed: a root coincides with the constant mode".to_string());
    }
    Ok(set)
}

/// General extraction: least-squares recurrence of order `M` over all
/// admissible shifts, then the roots of `Z^M - c_1 Z^{M-1} - … - c_M`.
pub fn extract_modes_general(panel: &SignalPanel, order: usize, lag: usize) -> Result<ModeSet> {
    if order == 0 || lag == 0 {
        return Err(Error::input("order and lag must be positive"));
    }
    if panel.len() < lag + order {
        return Err(Error::InsufficientSamples(format!(
            "{} samples, need at least {} for M = {order}, L = {lag}",
            panel.len(),
            lag + order
        )));
    }
    if panel.n() * lag < order {
        return Err(Error::input(format!("M = {order} exceeds n·L = {}", panel.n() * lag)));
    }
    let shifts = panel.len() - order;
    let rows = panel.n() * shifts;
    let mut a = RealMatrix::zeros(rows, order);
    let mut b = vec![0.0; rows];
    for x in 0..panel.n() {
        let s = panel.series(x);
        for i in 0..shifts {
            let row = x * shifts + i;
            for j in 0..order {
                a[(row, j)] = s[i + j];
            }
            b[row] = s[i + order];
        }
    }
    let lsq = LeastSquares::new(&a)?;
    // solution holds c_M … c_1
    let c = lsq.solve(&b)?.solution;
    let mut poly: Vec<f64> = c.iter().map(|v| -v).collect();
    poly.push(1.0);
    let roots = RealPolynomial::new(poly)?.roots()?;
    let mut set = ModeSet::new(pair_conjugates(roots))?;
    if lsq.rank() < order {
        set.warnings.push(format!(
            "ill-posed: recurrence system has rank {} < M = {order}",
            lsq.rank()
        ));
    }
    Ok(set)
}

/// Per-variable complex amplitudes. Reconstruction uses
/// `F(x,t) = Σ_j α_j(x) z_j^{t - origin}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTable {
    origin: i64,
    /// `values[x][j]`.
    values: Vec<Vec<Complex64>>,
}

impl AmplitudeTable {
    pub fn new(origin: i64, values: Vec<Vec<Complex64>>) -> Result<Self> {
        let m = values.first().map(|r| r.len()).unwrap_or(0);
        if values.is_empty() || m == 0 || values.iter().any(|r| r.len() != m) {
            return Err(Error::input("amplitude table must be a nonempty rectangle"));
        }
        Ok(Self { origin, values })
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn mode_count(&self) -> usize {
        self.values[0].len()
    }

    pub fn get(&self, x: usize, j: usize) -> Complex64 {
        self.values[x][j]
    }

    /// Column `j` over all variables.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// Euclidean norm of each column.
    pub fn norms(&self) -> Vec<f64> {
        (0..self.mode_count())
            .map(|j| self.values.iter().map(|r| r[j].norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    /// CSV with columns `node,mode_index,re,im,norm`; nodes are 1-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let norms = self.norms();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "mode_index", "re", "im", "norm"])?;
        for (x, row) in self.values.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                w.write_record([
                    (x + 1).to_string(),
                    j.to_string(),
                    format!("{:?}", a.re),
                    format!("{:?}", a.im),
                    format!("{:?}", norms[j]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`AmplitudeTable::write_csv`]; the time origin is not part
    /// of the file and must be supplied.
    pub fn read_csv<R: Read>(input: R, origin_time: i64, source: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = r.headers()?.clone();
        let want = ["node", "mode_index", "re", "im", "norm"];
        if header.iter().ne(want) {
            return Err(parse_error(
                source,
                1,
                "*",
                "expected header node,mode_index,re,im,norm",
            ));
        }
        let mut cells: Vec<(usize, usize, Complex64)> = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let idx = |c: usize| -> Result<usize> {
                rec.get(c)
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| parse_error(source, row, want[c], "not an index"))
            };
            let num = |c: usize| -> Result<f64> {
                rec.get(c)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_error(source, row, want[c], "not a finite number"))
            };
            let node = idx(0)?;
            if node == 0 {
                return Err(parse_error(source, row, "node", "nodes are 1-based"));
            }
            cells.push((node - 1, idx(1)?, Complex64::new(num(2)?, num(3)?)));
        }
        let n = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
        let m = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
        if n * m != cells.len() {
            return Err(parse_error(source, 1, "*", "amplitude rows do not form a full table"));
        }
        let mut values = vec![vec![Complex64::new(f64::NAN, 0.0); m]; n];
        for (x, j, a) in cells {
            values[x][j] = a;
        }
        if values.iter().flatten().any(|a| a.re.is_nan()) {
            return Err(parse_error(source, 1, "*", "duplicate amplitude entries"));
        }
        Self::new(origin_time, values)
    }
}

/// Least-squares amplitudes over the first `samples` times of the panel,
/// with Vandermonde entries `z_j^{t - t_start + 1}`.
pub fn fit_amplitudes(panel: &SignalPanel, modes: &ModeSet, samples: usize) -> Result<AmplitudeTable> {
    if samples < 1 {
        return Err(Error::input("need at least one sample for the amplitude fit"));
    }
    if samples > panel.len() {
        return Err(Error::InsufficientSamples(format!(
            "fit over {samples} samples, panel has {}",
            panel.len()
        )));
    }
    if modes.min_separation() <= DEDUP_TOL {
        return Err(Error::input("mode set has coinciding modes"));
    }
    let m = modes.len();
    let mut v = ComplexMatrix::zeros(samples, m);
    for (j, z) in modes.modes().iter().enumerate() {
        let mut p = *z;
        for i in 0..samples {
            v[(i, j)] = p;
            p *= z;
        }
    }
    let v = if samples < m {
        // underdetermined: pad with zero rows so the solver sees a tall system
        let mut padded = ComplexMatrix::zeros(m, m);
        for i in 0..samples {
            for j in 0..m {
                padded[(i, j)] = v[(i, j)];
            }
        }
        padded
    } else {
        v
    };
    let rows = v.rows();
    let rhs: Vec<Vec<Complex64>> = (0..panel.n())
        .map(|x| {
            let mut b: Vec<Complex64> = panel.series(x)[..samples]
                .iter()
                .map(|&f| Complex64::new(f, 0.0))
                .collect();
            b.resize(rows, Complex64::new(0.0, 0.0));
            b
        })
        .collect();
    let (values, _) = complex_least_squares(&v, &rhs, DEFAULT_RCOND)?;
    AmplitudeTable::new(panel.t_start() - 1, values)
}

fn check_consistent(modes: &ModeSet, amps: &AmplitudeTable) -> Result<()> {
    if modes.len() != amps.mode_count() {
        return Err(Error::input(format!(
            "{} modes but {} amplitude columns",
            modes.len(),
            amps.mode_count()
        )));
    }
    Ok(())
}

/// `F̂(x,t) = Σ_j α_j(x) z_j^{t - origin}`. For conjugate-closed mode sets the
/// imaginary part must be negligible; it is then dropped.
pub fn reconstruct(modes: &ModeSet, amps: &AmplitudeTable, t: i64) -> Result<Vec<f64>> {
    check_consistent(modes, amps)?;
    let e = t - amps.origin();
    let powers: Vec<Complex64> = modes.modes().iter().map(|z| power(*z, e)).collect();
    let closed = modes.is_conjugate_closed();
    (0..amps.n())
        .map(|x| {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            for (j, p) in powers.iter().enumerate() {
                let term = amps.get(x, j) * p;
                sum += term;
                mag += term.norm();
            }
            if closed && sum.im.abs() > IMAGINARY_RESIDUE_TOL * mag {
                return Err(Error::domain(format!(
                    "reconstruction at t = {t} has imaginary residue {:e}",
                    sum.im
                )));
            }
            Ok(sum.re)
        })
        .collect()
}

fn power(z: Complex64, e: i64) -> Complex64 {
    if e >= 0 {
        z.powu(e as u32)
    } else {
        z.inv().powu((-e) as u32)
    }
}

/// Reconstruction over `t_from ..= t_to`.
pub fn forecast(modes: &ModeSet, amps: &AmplitudeTable, t_from: i64, t_to: i64) -> Result<SignalPanel> {
    if t_from > t_to {
        return Err(Error::input(format!("empty forecast range {t_from}..={t_to}")));
    }
    check_consistent(modes, amps)?;
    let mut series = vec![Vec::with_capacity((t_to - t_from + 1) as usize); amps.n()];
    for t in t_from..=t_to {
        for (x, v) in reconstruct(modes, amps, t)?.into_iter().enumerate() {
            series[x].push(v);
        }
    }
    SignalPanel::new(series, t_from)
}
