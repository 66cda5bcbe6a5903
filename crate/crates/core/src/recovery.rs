//! Graph recovery from a signal panel: stationary modes, amplitudes,
//! held-out validation and the weight estimate
//! `ŵ_xy = -1/2 Σ_j Re(v̂_j(x) θ̂_j² conj(v̂_j(y)))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphJson, WeightTable};
use crate::linalg::RealMatrix;
use crate::modes::{extract_modes_stationary, fit_amplitudes, reconstruct, AmplitudeTable, ModeSet};
use crate::panel::SignalPanel;

/// Relative amplitude-norm cutoff used when no absolute one is configured.
pub const DEFAULT_RELATIVE_AMP_TOL: f64 = 1e-6;

/// Relative validation cutoff (times panel variance) used when none is configured.
pub const DEFAULT_RELATIVE_MSE_TOL: f64 = 1e-6;

/// Amplitude norms below this fraction of the largest norm (constant mode
/// included) are treated as rounding noise.
const NOISE_FLOOR_AMP_TOL: f64 = 1e-10;

/// Unit-norm tolerance for eigenvector estimates.
const UNIT_NORM_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryConfig {
    /// Number of conjugate frequency pairs `N`.
    pub n_pairs: usize,
    /// Minimum number of time shifts `L`.
    pub lag: usize,
    pub normalize_modes: bool,
    /// Absolute cutoff on `‖α̂_j‖`; `None` means `1e-6` times the largest
    /// non-constant amplitude norm.
    pub amp_norm_tol: Option<f64>,
    pub positivize: bool,
    /// Known `sqrt(c)`; angles are divided by it before squaring.
    pub sqrt_c: Option<f64>,
    /// Trailing samples held out from fitting.
    pub validation_horizon: usize,
    /// Cutoff on the mean held-out MSE; `None` means `1e-6` times the panel variance.
    pub validation_mse_tol: Option<f64>,
    /// Allow one retry at `(N + ceil(N/2), L + 1)` when validation fails.
    pub retry: bool,
}

impl RecoveryConfig {
    pub fn new(n_pairs: usize, lag: usize) -> Self {
        Self {
            n_pairs,
            lag,
            normalize_modes: true,
            amp_norm_tol: None,
            positivize: false,
            sqrt_c: None,
            validation_horizon: 0,
            validation_mse_tol: None,
            retry: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 || self.lag == 0 {
            return Err(Error::input("N and L must be positive"));
        }
        if let Some(t) = self.amp_norm_tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::input("amplitude-norm tolerance must be nonnegative"));
            }
        }
        if let Some(s) = self.sqrt_c {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::input("sqrt_c must be positive"));
            }
        }
        if let Some(t) = self.validation_mse_tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::input("validation MSE tolerance must be positive"));
            }
        }
        Ok(())
    }

    /// Samples needed for extraction alone.
    pub fn window_len(&self) -> usize {
        self.lag + 2 * self.n_pairs + 1
    }
}

/// Units of the recovered weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "kebab-case")]
pub enum WeightScale {
    /// Angles were divided by the given `sqrt(c)`.
    KnownC { sqrt_c: f64 },
    /// Weights are in squared-angle units, proportional to the true ones.
    UnknownC,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub re: f64,
    pub im: f64,
    pub theta: f64,
    pub modulus: f64,
    pub amplitude_norm: f64,
    pub is_constant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n_pairs: usize,
    pub lag: usize,
    /// Closed time range used for fitting.
    pub train: (i64, i64),
    /// `(t, MSE_t)` for every panel time.
    pub mse: Vec<(i64, f64)>,
    /// Mean MSE over the held-out samples, when there are any.
    pub holdout_mse: Option<f64>,
    pub mse_tol: f64,
    pub modes: Vec<ModeRow>,
    /// Rank of the stationary system (at most `N`).
    pub system_rank: usize,
    pub max_modulus_deviation: f64,
    pub weight_scale: WeightScale,
    pub advisory: Option<String>,
    pub retried: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RecoveredGraph {
    pub weights: WeightTable,
    pub modes: ModeSet,
    pub amplitudes: AmplitudeTable,
    /// Angles after optional rescaling by `sqrt(c)`.
    pub eigen_angles: Vec<f64>,
    /// Unit-norm (or zero) amplitude directions, one per mode.
    pub eigenvector_estimates: Vec<Vec<Complex64>>,
    pub amplitude_norms: Vec<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize, Deserialize)]
pub struct RecoveredGraphJson {
    #[serde(flatten)]
    pub graph: GraphJson,
    pub diagnostics: Diagnostics,
}

impl RecoveredGraph {
    pub fn to_json(&self) -> RecoveredGraphJson {
        RecoveredGraphJson {
            graph: self.weights.to_json(),
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn has_advisory(&self) -> bool {
        self.diagnostics.advisory.is_some()
    }
}

/// `ŵ_xy = -1/2 Σ_j Re(v̂_j(x) θ̂_j² conj(v̂_j(y)))` off the diagonal. Each
/// listed mode contributes once, so a conjugate pair contributes twice the
/// real part of one member and a self-paired real mode contributes once.
pub fn weights_from_modes(v_hat: &[Vec<Complex64>], theta_hat: &[f64]) -> Result<WeightTable> {
    if v_hat.len() != theta_hat.len() {
        return Err(Error::input(format!(
            "{} eigenvector estimates but {} angles",
            v_hat.len(),
            theta_hat.len()
        )));
    }
    let n = match v_hat.first() {
        Some(v) => v.len(),
        None => return Err(Error::input("no modes supplied")),
    };
    if n == 0 || v_hat.iter().any(|v| v.len() != n) {
        return Err(Error::input("eigenvector estimates must share one nonzero length"));
    }
    for (j, v) in v_hat.iter().enumerate() {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm != 0.0 && (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::input(format!(
                "eigenvector estimate {j} has norm {norm}, expected 1 or 0"
            )));
        }
    }
    let mut m = RealMatrix::zeros(n, n);
    for x in 0..n {
        for y in x + 1..n {
            let s: f64 = v_hat
                .iter()
                .zip(theta_hat)
                .map(|(v, th)| (v[x] * v[y].conj()).re * th * th)
                .sum();
            m[(x, y)] = -0.5 * s;
            m[(y, x)] = -0.5 * s;
        }
    }
    WeightTable::new(m)
}

/// `max(w, 0)` entrywise.
pub fn positivize(weights: &WeightTable) -> WeightTable {
    weights.positivize()
}

/// Per-time mean squared error between reconstruction and panel over
/// `t_from ..= t_to`.
pub fn validate_fit(
    panel: &SignalPanel,
    modes: &ModeSet,
    amps: &AmplitudeTable,
    t_from: i64,
    t_to: i64,
) -> Result<Vec<(i64, f64)>> {
    if amps.n() != panel.n() {
        return Err(Error::input("amplitude table and panel disagree on variable count"));
    }
    (t_from..=t_to)
        .map(|t| {
            let truth = panel.snapshot(t)?;
            let fit = reconstruct(modes, amps, t)?;
            let mse = truth.iter().zip(&fit).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / panel.n() as f64;
            Ok((t, mse))
        })
        .collect()
}

/// Normalized amplitude directions, scaled angles and the weight table for a
/// fitted mode set. `columns[j]` is the amplitude of mode `j` over nodes.
pub(crate) struct WeightEstimate {
    pub weights: WeightTable,
    pub v_hat: Vec<Vec<Complex64>>,
    pub angles: Vec<f64>,
    pub norms: Vec<f64>,
}

pub(crate) fn estimate_weights(
    modes: &ModeSet,
    columns: &[Vec<Complex64>],
    cfg: &RecoveryConfig,
) -> Result<WeightEstimate> {
    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let tol = match cfg.amp_norm_tol {
        Some(t) => t,
        None => {
            let largest = norms
                .iter()
                .enumerate()
                .filter(|(j, _)| !(modes.has_constant() && *j == 0))
                .fold(0.0f64, |m, (_, v)| m.max(*v));
            // a flat signal leaves only rounding noise in the oscillating modes
            let overall = norms.iter().fold(0.0f64, |m, v| m.max(*v));
            (DEFAULT_RELATIVE_AMP_TOL * largest).max(NOISE_FLOOR_AMP_TOL * overall)
        }
    };
    let v_hat: Vec<Vec<Complex64>> = columns
        .iter()
        .zip(&norms)
        .map(|(c, &nrm)| {
            if nrm <= tol || nrm == 0.0 {
                vec![Complex64::new(0.0, 0.0); c.len()]
            } else {
                c.iter().map(|z| z / nrm).collect()
            }
        })
        .collect();
    let scale = cfg.sqrt_c.unwrap_or(1.0);
    let angles: Vec<f64> = modes.angles().iter().map(|th| th / scale).collect();
    let raw = weights_from_modes(&v_hat, &angles)?;
    let weights = if cfg.positivize { raw.positivize() } else { raw };
    Ok(WeightEstimate {
        weights,
        v_hat,
        angles,
        norms,
    })
}

pub(crate) fn mode_rows(modes: &ModeSet, norms: &[f64]) -> Vec<ModeRow> {
    modes
        .modes()
        .iter()
        .enumerate()
        .map(|(j, z)| ModeRow {
            re: z.re,
            im: z.im,
            theta: z.arg(),
            modulus: modes.moduli()[j],
            amplitude_norm: norms[j],
            is_constant: modes.has_constant() && j == 0,
        })
        .collect()
}

/// Full pipeline: extract on the training prefix, fit amplitudes, validate
/// on the held-out suffix, then estimate weights.
pub fn recover_graph(panel: &SignalPanel, cfg: &RecoveryConfig) -> Result<RecoveredGraph> {
    cfg.validate()?;
    let first = recover_once(panel, cfg)?;
    if first.diagnostics.advisory.is_none() || !cfg.retry {
        return Ok(first);
    }
    let mut bigger = cfg.clone();
    bigger.n_pairs = cfg.n_pairs + cfg.n_pairs.div_ceil(2);
    bigger.lag = cfg.lag + 1;
    bigger.retry = false;
    if panel.len() < bigger.window_len() + bigger.validation_horizon {
        let mut out = first;
        out.diagnostics
            .warnings
            .push("retry skipped: panel too short for the larger model".to_string());
        return Ok(out);
    }
    let mut second = recover_once(panel, &bigger)?;
    second.diagnostics.retried = true;
    Ok(second)
}

fn recover_once(panel: &SignalPanel, cfg: &RecoveryConfig) -> Result<RecoveredGraph> {
    let need = cfg.window_len() + cfg.validation_horizon;
    if panel.len() < need {
        return Err(Error::InsufficientSamples(format!(
            "{} samples, need at least {need} (L + 2N + 1 = {} plus horizon {})",
            panel.len(),
            cfg.window_len(),
            cfg.validation_horizon
        )));
    }
    let train_len = panel.len() - cfg.validation_horizon;
    let train_end = panel.t_start() + train_len as i64 - 1;
    let train = panel.window(panel.t_start(), train_end)?;

    let (modes, coeffs) = extract_modes_stationary(&train, cfg.n_pairs, cfg.lag, cfg.normalize_modes)?;
    let amps = fit_amplitudes(&train, &modes, train_len)?;
    let mse = validate_fit(panel, &modes, &amps, panel.t_start(), panel.t_end())?;

    let mse_tol = cfg
        .validation_mse_tol
        .unwrap_or(DEFAULT_RELATIVE_MSE_TOL * panel.variance());
    let holdout: Vec<f64> = mse.iter().filter(|(t, _)| *t > train_end).map(|m| m.1).collect();
    let holdout_mse = (!holdout.is_empty()).then(|| holdout.iter().sum::<f64>() / holdout.len() as f64);
    let advisory = match holdout_mse {
        Some(m) if m > mse_tol => Some(format!("held-out MSE {m:e} exceeds {mse_tol:e}; retake larger N and L")),
        _ => None,
    };

    let columns: Vec<Vec<Complex64>> = (0..amps.mode_count()).map(|j| amps.column(j)).collect();
    let est = estimate_weights(&modes, &columns, cfg)?;
    let diagnostics = Diagnostics {
        n_pairs: cfg.n_pairs,
        lag: cfg.lag,
        train: (panel.t_start(), train_end),
        mse,
        holdout_mse,
        mse_tol,
        modes: mode_rows(&modes, &est.norms),
        system_rank: coeffs.rank,
        max_modulus_deviation: modes.modulus_report().max_deviation,
        weight_scale: match cfg.sqrt_c {
            Some(s) => WeightScale::KnownC { sqrt_c: s },
            None => WeightScale::UnknownC,
        },
        advisory,
        retried: false,
        warnings: modes.warnings().to_vec(),
    };
    Ok(RecoveredGraph {
        weights: est.weights,
        modes,
        amplitudes: amps,
        eigen_angles: est.angles,
        eigenvector_estimates: est.v_hat,
        amplitude_norms: est.norms,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        make_path_graph, path_closed_form_spectrum, spectral_decompose, weights_from_spectrum, WeightedGraph,
    };
    use crate::wave::{simulate_graph_wave, WaveInitialCondition};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cx(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&r| Complex64::new(r, 0.0)).collect()
    }

    #[test]
    fn flat_panel_has_no_edges() {
        let p = SignalPanel::new(vec![vec![1.5; 12], vec![-2.0; 12], vec![0.25; 12]], 1).unwrap();
        let r = recover_graph(&p, &RecoveryConfig::new(2, 2)).unwrap();
        assert!(r.weights.edges().is_empty(), "{:?}", r.weights.edges());
        let zero = SignalPanel::new(vec![vec![0.0; 12]; 2], 1).unwrap();
        assert!(recover_graph(&zero, &RecoveryConfig::new(2, 2))
            .unwrap()
            .weights
            .edges()
            .is_empty());
    }

    #[test]
    fn true_spectrum_reproduces_path_weights() {
        let s = path_closed_form_spectrum(3).unwrap();
        let mut v = Vec::new();
        let mut th = Vec::new();
        for k in 1..3 {
            let angle = s.eigenvalues()[k].sqrt();
            for sign in [1.0, -1.0] {
                v.push(cx(&s.eigenvector(k)));
                th.push(sign * angle);
            }
        }
        let w = weights_from_modes(&v, &th).unwrap();
        let g = make_path_graph(3).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert!((w.get(x, y) - g.weight(x, y)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn disjoint_supports_give_zero_weight() {
        let v = vec![cx(&[1.0, 0.0, 0.0]), cx(&[0.0, 0.6, 0.8])];
        let w = weights_from_modes(&v, &[0.5, 1.2]).unwrap();
        assert_eq!(w.get(0, 1), 0.0);
        assert_eq!(w.get(0, 2), 0.0);
        assert!(w.get(1, 2) < 0.0);
    }

    #[test]
    fn zero_angles_give_zero_weights() {
        let v = vec![cx(&[0.6, 0.8]), cx(&[0.8, -0.6])];
        let w = weights_from_modes(&v, &[0.0, 0.0]).unwrap();
        assert!(w.edges().is_empty());
    }

    #[test]
    fn rejects_non_unit_estimates() {
        let v = vec![cx(&[1.0, 1.0])];
        assert!(weights_from_modes(&v, &[1.0]).is_err());
        assert!(weights_from_modes(&[cx(&[1.0, 0.0])], &[1.0, 2.0]).is_err());
        assert!(weights_from_modes(&[cx(&[0.0, 0.0])], &[1.0]).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(RecoveryConfig::new(0, 1).validate().is_err());
        let mut c = RecoveryConfig::new(1, 1);
        c.sqrt_c = Some(-1.0);
        assert!(c.validate().is_err());
        c.sqrt_c = None;
        c.validation_mse_tol = Some(0.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn short_panel_is_insufficient() {
        let p = SignalPanel::new(vec![vec![0.0; 6]; 2], 1).unwrap();
        let err = recover_graph(&p, &RecoveryConfig::new(3, 1)).unwrap_err();
        assert!(err.to_string().contains("insufficient samples"));
    }

    fn two_node_panel(sign: f64) -> SignalPanel {
        let s1: Vec<f64> = (1..=12).map(|t| (0.9 * t as f64).cos()).collect();
        let s2 = s1.iter().map(|v| sign * v).collect();
        SignalPanel::new(vec![s1, s2], 1).unwrap()
    }

    #[test]
    fn antiphase_positive_inphase_nonpositive() {
        let cfg = RecoveryConfig::new(1, 2);
        let anti = recover_graph(&two_node_panel(-1.0), &cfg).unwrap();
        assert!(anti.weights.get(0, 1) > 0.0);
        assert!((anti.weights.get(0, 1) - 0.81 / 2.0).abs() < 1e-8);
        let sync = recover_graph(&two_node_panel(1.0), &cfg).unwrap();
        assert!(sync.weights.get(0, 1) <= 0.0);
    }

    #[test]
    fn path_graph_small_recovery_exact() {
        let g = make_path_graph(5).unwrap();
        let f = vec![0.3, -1.0, 0.7, 0.2, -0.4];
        let p = simulate_graph_wave(&g, &WaveInitialCondition::at_rest(f, 1.0).unwrap(), 1, 14).unwrap();
        let mut cfg = RecoveryConfig::new(4, 2);
        cfg.sqrt_c = Some(1.0);
        let r = recover_graph(&p, &cfg).unwrap();
        // exact model order: weights agree up to the normalization of each
        // eigenvector, which is exact here because every mode has one node pattern
        for x in 0..5 {
            for y in 0..5 {
                if x != y {
                    assert!(
                        (r.weights.get(x, y) - g.weight(x, y)).abs() < 1e-6,
                        "{x},{y}: {}",
                        r.weights.get(x, y)
                    );
                }
            }
        }
        assert!(r.diagnostics.mse.iter().all(|m| m.1 < 1e-12));
    }

    #[test]
    fn holdout_advisory_and_retry() {
        // two frequencies but only one pair requested
        let s: Vec<f64> = (1..=30)
            .map(|t| (0.5 * t as f64).cos() + 0.7 * (1.9 * t as f64).sin())
            .collect();
        let p = SignalPanel::new(vec![s], 1).unwrap();
        let mut cfg = RecoveryConfig::new(1, 2);
        cfg.validation_horizon = 10;
        let r = recover_graph(&p, &cfg).unwrap();
        assert!(r.has_advisory());
        assert!(r.diagnostics.holdout_mse.unwrap() > r.diagnostics.mse_tol);
        cfg.retry = true;
        let r = recover_graph(&p, &cfg).unwrap();
        assert!(r.diagnostics.retried);
        assert_eq!(r.diagnostics.n_pairs, 2);
        assert!(!r.has_advisory());
    }

    #[test]
    fn unknown_scale_is_flagged() {
        let r = recover_graph(&two_node_panel(-1.0), &RecoveryConfig::new(1, 2)).unwrap();
        assert_eq!(r.diagnostics.weight_scale, WeightScale::UnknownC);
        let json = serde_json::to_value(r.to_json()).unwrap();
        assert_eq!(json["diagnostics"]["weight_scale"]["scale"], "unknown-c");
        assert_eq!(json["n"], 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn paired_true_spectrum_equals_weight_identity(seed in any::<u64>(), n in 2usize..8, c in 0.2f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|x| (x, x + 1, rng.random_range(0.1..2.0))).collect();
            for x in 0..n {
                for y in x + 2..n {
                    if rng.random_bool(0.3) {
                        edges.push((x, y, rng.random_range(0.0..2.0)));
                    }
                }
            }
            let g = WeightedGraph::from_edges(n, &edges).unwrap();
            let s = spectral_decompose(&g).unwrap();
            let mut v = Vec::new();
            let mut th = Vec::new();
            for k in 1..n {
                let angle = (c * s.eigenvalues()[k]).sqrt();
                v.push(cx(&s.eigenvector(k)));
                v.push(cx(&s.eigenvector(k)));
                th.push(angle / c.sqrt());
                th.push(-angle / c.sqrt());
            }
            let w = weights_from_modes(&v, &th).unwrap();
            let oracle = weights_from_spectrum(&s);
            for x in 0..n {
                for y in 0..n {
                    prop_assert!((w.get(x, y) - oracle.get(x, y)).abs() < 1e-9);
                    prop_assert!((w.get(x, y) - g.weight(x, y)).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn positivize_is_idempotent(vals in proptest::collection::vec(-2.0f64..2.0, 6)) {
            let t = WeightTable::from_edges(4, &[(0, 1, vals[0]), (0, 2, vals[1]), (0, 3, vals[2]), (1, 2, vals[3]), (1, 3, vals[4]), (2, 3, vals[5])]).unwrap();
            let p = positivize(&t);
            prop_assert!(positivize(&p) == p);
            prop_assert!(p.as_matrix().as_slice().iter().all(|&w| w >= 0.0));
        }

        #[test]
        fn mse_grows_quadratically(delta in 1e-4f64..1e-2) {
            let p = two_node_panel(-1.0);
            let r = recover_graph(&p, &RecoveryConfig::new(1, 2)).unwrap();
            let mut vals: Vec<Vec<Complex64>> = (0..2).map(|x| (0..3).map(|j| r.amplitudes.get(x, j)).collect()).collect();
            vals[0][0] += delta;
            let bumped = AmplitudeTable::new(r.amplitudes.origin(), vals).unwrap();
            let mse = validate_fit(&p, &r.modes, &bumped, 1, 12).unwrap();
            // constant-mode bump on one of two nodes: MSE = δ²/2 at every time
            for (_, m) in mse {
                prop_assert!((m - delta * delta / 2.0).abs() < 1e-6 * delta * delta + 1e-20);
            }
        }
    }
}
