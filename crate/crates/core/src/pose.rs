//! Sliding-window graph recovery for planar joint tracks.
//!
//! The x and y tracks of all joints are stacked into one real panel of
//! `2n` series to extract a shared mode set. Per-joint complex amplitudes
//! are then `α_x + i α_y`, and the weight estimate uses those.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modes::{extract_modes_stationary, fit_amplitudes, AmplitudeTable};
use crate::panel::{parse_error, SignalPanel};
use crate::recovery::{
    estimate_weights, mode_rows, validate_fit, Diagnostics, RecoveredGraph, RecoveryConfig, WeightScale,
};

/// Default edge-reporting threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.2;

/// Planar joint coordinates over consecutive integer frames.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSeries {
    frame_start: i64,
    /// `x[j][i]` is joint `j` at frame `frame_start + i`.
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

impl JointSeries {
    pub fn new(frame_start: i64, x: Vec<Vec<f64>>, y: Vec<Vec<f64>>) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::input("need matching nonempty x and y tracks"));
        }
        let len = x[0].len();
        if len == 0 {
            return Err(Error::input("need at least one frame"));
        }
        for (j, (a, b)) in x.iter().zip(&y).enumerate() {
            if a.len() != len || b.len() != len {
                return Err(Error::input(format!("joint {} has a track of different length", j + 1)));
            }
            if a.iter().chain(b).any(|v| !v.is_finite()) {
                return Err(Error::input(format!("joint {} has non-finite coordinates", j + 1)));
            }
        }
        Ok(Self { frame_start, x, y })
    }

    pub fn joint_count(&self) -> usize {
        self.x.len()
    }

    pub fn frame_count(&self) -> usize {
        self.x[0].len()
    }

    pub fn frame_start(&self) -> i64 {
        self.frame_start
    }

    pub fn frame_end(&self) -> i64 {
        self.frame_start + self.frame_count() as i64 - 1
    }

    pub fn x(&self, joint: usize) -> &[f64] {
        &self.x[joint]
    }

    pub fn y(&self, joint: usize) -> &[f64] {
        &self.y[joint]
    }

    /// Real panel with the x tracks of all joints followed by the y tracks.
    pub fn stacked_panel(&self) -> Result<SignalPanel> {
        let labels = (1..=self.joint_count())
            .map(|j| format!("j{j}_x"))
            .chain((1..=self.joint_count()).map(|j| format!("j{j}_y")))
            .collect();
        let series = self.x.iter().chain(&self.y).cloned().collect();
        SignalPanel::with_labels(series, self.frame_start, labels)
    }
}

/// Column layout of a joint CSV file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JointLayout {
    /// `frame, j1_x, j1_y, j2_x, …` (any column order; names select joint and axis).
    Wide,
    /// `frame, joint, x, y` with one row per (frame, joint).
    Long,
}

impl std::str::FromStr for JointLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wide" => Ok(Self::Wide),
            "long" => Ok(Self::Long),
            other => Err(Error::input(format!("unknown layout {other:?}; expected wide or long"))),
        }
    }
}

pub fn load_joint_series(path: &Path, layout: JointLayout) -> Result<JointSeries> {
    read_joint_series(std::fs::File::open(path)?, layout, path)
}

pub fn read_joint_series<R: Read>(input: R, layout: JointLayout, origin: &Path) -> Result<JointSeries> {
    match layout {
        JointLayout::Wide => read_wide(input, origin),
        JointLayout::Long => read_long(input, origin),
    }
}

fn cell_f64(rec: &csv::StringRecord, c: usize, row: usize, name: &str, origin: &Path) -> Result<f64> {
    let s = rec
        .get(c)
        .ok_or_else(|| parse_error(origin, row, name, "missing field"))?;
    let v: f64 = s
        .parse()
        .map_err(|_| parse_error(origin, row, name, &format!("{s:?} is not a number")))?;
    if !v.is_finite() {
        return Err(parse_error(origin, row, name, "value is not finite"));
    }
    Ok(v)
}

fn cell_i64(rec: &csv::StringRecord, c: usize, row: usize, name: &str, origin: &Path) -> Result<i64> {
    let s = rec
        .get(c)
        .ok_or_else(|| parse_error(origin, row, name, "missing field"))?;
    s.parse()
        .map_err(|_| parse_error(origin, row, name, &format!("{s:?} is not an integer")))
}

fn parse_joint_column(name: &str) -> Option<(usize, bool)> {
    let rest = name.strip_prefix('j')?;
    let (idx, axis) = rest.rsplit_once('_')?;
    let j: usize = idx.parse().ok().filter(|&j| j >= 1)?;
    match axis {
        "x" => Some((j, false)),
        "y" => Some((j, true)),
        _ => None,
    }
}

fn read_wide<R: Read>(input: R, origin: &Path) -> Result<JointSeries> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("frame") {
        return Err(parse_error(origin, 1, "frame", "first column must be frame"));
    }
    // joint -> (x column, y column)
    let mut cols: BTreeMap<usize, (Option<usize>, Option<usize>)> = BTreeMap::new();
    for (c, name) in header.iter().enumerate().skip(1) {
        let (j, is_y) = parse_joint_column(name)
            .ok_or_else(|| parse_error(origin, 1, name, "expected a column named j<k>_x or j<k>_y"))?;
        let e = cols.entry(j).or_default();
        let slot = if is_y { &mut e.1 } else { &mut e.0 };
        if slot.replace(c).is_some() {
            return Err(parse_error(origin, 1, name, "duplicate column"));
        }
    }
    if cols.is_empty() {
        return Err(parse_error(origin, 1, "*", "no joint columns"));
    }
    let expected: Vec<usize> = (1..=cols.len()).collect();
    if cols.keys().copied().ne(expected) {
        return Err(parse_error(origin, 1, "*", "joint numbers must be 1..n without gaps"));
    }
    let mut map = Vec::new();
    for (j, (cx, cy)) in &cols {
        let cx = cx.ok_or_else(|| parse_error(origin, 1, &format!("j{j}_x"), "missing column"))?;
        let cy = cy.ok_or_else(|| parse_error(origin, 1, &format!("j{j}_y"), "missing column"))?;
        map.push((cx, cy));
    }
    let n = map.len();
    let mut xs = vec![Vec::new(); n];
    let mut ys = vec![Vec::new(); n];
    let mut start = 0i64;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        if rec.len() != header.len() {
            return Err(parse_error(
                origin,
                row,
                "*",
                &format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let frame = cell_i64(&rec, 0, row, "frame", origin)?;
        if i == 0 {
            start = frame;
        } else if frame != start + i as i64 {
            return Err(parse_error(origin, row, "frame", "frames must be consecutive integers"));
        }
        for (j, &(cx, cy)) in map.iter().enumerate() {
            xs[j].push(cell_f64(&rec, cx, row, &header[cx], origin)?);
            ys[j].push(cell_f64(&rec, cy, row, &header[cy], origin)?);
        }
    }
    if xs[0].is_empty() {
        return Err(parse_error(origin, 1, "*", "no data rows"));
    }
    JointSeries::new(start, xs, ys)
}

fn read_long<R: Read>(input: R, origin: &Path) -> Result<JointSeries> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let header = r.headers()?.clone();
    let want = ["frame", "joint", "x", "y"];
    let mut idx = [0usize; 4];
    for (k, name) in want.iter().enumerate() {
        idx[k] = header
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| parse_error(origin, 1, name, "missing column"))?;
    }
    let mut cells: BTreeMap<(i64, usize), (f64, f64)> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        if rec.len() != header.len() {
            return Err(parse_error(
                origin,
                row,
                "*",
                &format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let frame = cell_i64(&rec, idx[0], row, "frame", origin)?;
        let joint = cell_i64(&rec, idx[1], row, "joint", origin)?;
        if joint < 1 {
            return Err(parse_error(origin, row, "joint", "joints are numbered from 1"));
        }
        let x = cell_f64(&rec, idx[2], row, "x", origin)?;
        let y = cell_f64(&rec, idx[3], row, "y", origin)?;
        if cells.insert((frame, joint as usize), (x, y)).is_some() {
            return Err(parse_error(origin, row, "joint", "duplicate (frame, joint) entry"));
        }
    }
    let frames: Vec<i64> = {
        let mut f: Vec<i64> = cells.keys().map(|k| k.0).collect();
        f.dedup();
        f
    };
    let n = cells.keys().map(|k| k.1).max().unwrap_or(0);
    if frames.is_empty() {
        return Err(parse_error(origin, 1, "*", "no data rows"));
    }
    if frames.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(parse_error(origin, 1, "frame", "frames must be consecutive integers"));
    }
    if cells.len() != frames.len() * n {
        return Err(parse_error(origin, 1, "joint", "every frame needs every joint 1..n"));
    }
    let mut xs = vec![Vec::with_capacity(frames.len()); n];
    let mut ys = vec![Vec::with_capacity(frames.len()); n];
    for ((_, j), (x, y)) in cells {
        xs[j - 1].push(x);
        ys[j - 1].push(y);
    }
    JointSeries::new(frames[0], xs, ys)
}

/// `x + i y` per joint and frame; `out[j][i]`.
pub fn complexify_xy(js: &JointSeries) -> Vec<Vec<Complex64>> {
    (0..js.joint_count())
        .map(|j| {
            js.x[j]
                .iter()
                .zip(&js.y[j])
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct WindowedGraphResult {
    pub window_start: i64,
    pub recovered: RecoveredGraph,
    /// 0-based `(u, v, w)` with `u < v` and `w > threshold`.
    pub thresholded_edges: Vec<(usize, usize, f64)>,
}

/// Window starts `first, first + stride, …` whose windows of `len` frames fit.
pub fn strided_windows(js: &JointSeries, len: usize, stride: usize) -> Vec<i64> {
    let stride = stride.max(1) as i64;
    let last = js.frame_end() - len as i64 + 1;
    let mut out = Vec::new();
    let mut t = js.frame_start();
    while t <= last {
        out.push(t);
        t += stride;
    }
    out
}

/// Recovers one positivized graph per window of `L + 2N + 1` frames starting
/// at each given frame. Results come back in the order of `window_starts`.
/// The held-out horizon of `cfg` is not used here.
pub fn windowed_recover(
    js: &JointSeries,
    cfg: &RecoveryConfig,
    window_starts: &[i64],
    threshold: f64,
) -> Result<Vec<WindowedGraphResult>> {
    cfg.validate()?;
    if !threshold.is_finite() {
        return Err(Error::input("threshold must be finite"));
    }
    let len = cfg.window_len() as i64;
    for &t in window_starts {
        if t < js.frame_start() || t + len - 1 > js.frame_end() {
            return Err(Error::input(format!(
                "window {t}..={} outside frames {}..={}",
                t + len - 1,
                js.frame_start(),
                js.frame_end()
            )));
        }
    }
    let stacked = js.stacked_panel()?;
    let mut cfg = cfg.clone();
    cfg.positivize = true;
    window_starts
        .par_iter()
        .map(|&t| recover_window(&stacked, js.joint_count(), &cfg, t, len, threshold))
        .collect()
}

fn recover_window(
    stacked: &SignalPanel,
    joints: usize,
    cfg: &RecoveryConfig,
    t: i64,
    len: i64,
    threshold: f64,
) -> Result<WindowedGraphResult> {
    let panel = stacked.window(t, t + len - 1)?;
    let (modes, coeffs) = extract_modes_stationary(&panel, cfg.n_pairs, cfg.lag, cfg.normalize_modes)?;
    let amps = fit_amplitudes(&panel, &modes, panel.len())?;
    let mse = validate_fit(&panel, &modes, &amps, panel.t_start(), panel.t_end())?;
    let combined: Vec<Vec<Complex64>> = (0..joints)
        .map(|j| {
            (0..modes.len())
                .map(|m| amps.get(j, m) + Complex64::i() * amps.get(j + joints, m))
                .collect()
        })
        .collect();
    let columns: Vec<Vec<Complex64>> = (0..modes.len())
        .map(|m| combined.iter().map(|r| r[m]).collect())
        .collect();
    let est = estimate_weights(&modes, &columns, cfg)?;
    let thresholded_edges = est.weights.edges().into_iter().filter(|e| e.2 > threshold).collect();
    let diagnostics = Diagnostics {
        n_pairs: cfg.n_pairs,
        lag: cfg.lag,
        train: (panel.t_start(), panel.t_end()),
        mse,
        holdout_mse: None,
        mse_tol: cfg
            .validation_mse_tol
            .unwrap_or(crate::recovery::DEFAULT_RELATIVE_MSE_TOL * panel.variance()),
        modes: mode_rows(&modes, &est.norms),
        system_rank: coeffs.rank,
        max_modulus_deviation: modes.modulus_report().max_deviation,
        weight_scale: match cfg.sqrt_c {
            Some(s) => WeightScale::KnownC { sqrt_c: s },
            None => WeightScale::UnknownC,
        },
        advisory: None,
        retried: false,
        warnings: modes.warnings().to_vec(),
    };
    Ok(WindowedGraphResult {
        window_start: t,
        recovered: RecoveredGraph {
            weights: est.weights,
            amplitudes: AmplitudeTable::new(amps.origin(), combined)?,
            modes,
            eigen_angles: est.angles,
            eigenvector_estimates: est.v_hat,
            amplitude_norms: est.norms,
            diagnostics,
        },
        thresholded_edges,
    })
}
