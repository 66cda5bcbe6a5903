//! Closed-form graph wave solutions and the cosine-series interval wave.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{build_laplacian, graph_fourier, spectral_decompose, SpectralData, WeightedGraph};
use crate::linalg::symmetric_eigen;
use crate::panel::SignalPanel;

/// Default perturbation half-width for [`demo_initial_condition`].
pub const DEFAULT_NOISE_SCALE: f64 = 0.05;
/// Default seed for [`demo_initial_condition`].
pub const DEFAULT_SEED: u64 = 7;

/// Initial displacement, initial velocity and the squared wave-speed factor.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveInitialCondition {
    pub displacement: Vec<f64>,
    pub velocity: Vec<f64>,
    pub c: f64,
}

impl WaveInitialCondition {
    pub fn new(displacement: Vec<f64>, velocity: Vec<f64>, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::input(format!("wave speed factor must be positive, got {c}")));
        }
        if displacement.len() != velocity.len() {
            return Err(Error::input("displacement and velocity lengths differ"));
        }
        if displacement.iter().chain(&velocity).any(|v| !v.is_finite()) {
            return Err(Error::input("initial condition has non-finite values"));
        }
        Ok(Self {
            displacement,
            velocity,
            c,
        })
    }

    /// Released from rest.
    pub fn at_rest(displacement: Vec<f64>, c: f64) -> Result<Self> {
        let n = displacement.len();
        Self::new(displacement, vec![0.0; n], c)
    }
}

/// Wave values over arbitrary real times; `values[x][i]` is node `x` at `times[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveSamples {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl WaveSamples {
    /// Requires the times to be consecutive integers.
    pub fn into_panel(self) -> Result<SignalPanel> {
        let t0 = match self.times.first() {
            Some(&t) => t,
            None => return Err(Error::input("no sample times")),
        };
        let consecutive = self
            .times
            .iter()
            .enumerate()
            .all(|(i, &t)| t.fract() == 0.0 && t == t0 + i as f64);
        if !consecutive {
            return Err(Error::input("panel times must be consecutive integers"));
        }
        SignalPanel::new(self.values, t0 as i64)
    }
}

fn integer_times(t_start: i64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| (t_start + i as i64) as f64).collect()
}

/// Exact solution of `U'' = -c L U` with `U(0) = f`, `U'(0) = g`, expanded in
/// the Laplacian eigenbasis.
pub fn solve_graph_wave(g: &WeightedGraph, ic: &WaveInitialCondition, times: &[f64]) -> Result<WaveSamples> {
    let n = g.n();
    if ic.displacement.len() != n {
        return Err(Error::input(format!(
            "initial condition has {} values, graph has {n} nodes",
            ic.displacement.len()
        )));
    }
    let vel_sum: f64 = ic.velocity.iter().sum();
    let vel_norm = ic.velocity.iter().map(|v| v * v).sum::<f64>().sqrt();
    if vel_sum.abs() / (n as f64).sqrt() > 1e-10 * vel_norm.max(1.0) {
        return Err(Error::domain("initial velocity must be orthogonal to constants"));
    }
    let s = spectral_decompose(g)?;
    wave_from_spectrum(&s, ic, times)
}

fn wave_from_spectrum(s: &SpectralData, ic: &WaveInitialCondition, times: &[f64]) -> Result<WaveSamples> {
    let n = s.n();
    let fc = graph_fourier(&ic.displacement, s)?;
    let gc = graph_fourier(&ic.velocity, s)?;
    let mut freq = vec![0.0; n];
    for k in 1..n {
        let rho = s.eigenvalues()[k];
        if rho <= 1e-12 {
            return Err(Error::domain(format!("eigenvalue {k} is not positive")));
        }
        freq[k] = (ic.c * rho).sqrt();
    }
    let v = s.eigenvectors();
    let columns: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let mut coeff = vec![fc[0]; n];
            for k in 1..n {
                let w = freq[k];
                coeff[k] = fc[k] * (w * t).cos() + gc[k] / w * (w * t).sin();
            }
            // at t = 0 this reproduces f to rounding
            (0..n).map(|x| (0..n).map(|k| coeff[k] * v[(x, k)]).sum()).collect()
        })
        .collect();
    let values = (0..n).map(|x| columns.iter().map(|c| c[x]).collect()).collect();
    Ok(WaveSamples {
        times: times.to_vec(),
        values,
    })
}

/// Graph wave sampled at `t_start, …, t_start + steps - 1`.
pub fn simulate_graph_wave(
    g: &WeightedGraph,
    ic: &WaveInitialCondition,
    t_start: i64,
    steps: usize,
) -> Result<SignalPanel> {
    if steps == 0 {
        return Err(Error::input("steps must be positive"));
    }
    solve_graph_wave(g, ic, &integer_times(t_start, steps))?.into_panel()
}

/// Outcome of the integer-sampling frequency check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NyquistReport {
    /// `max_k sqrt(c ρ_k)`.
    pub max_frequency: f64,
    pub passes: bool,
}

/// Passes iff every angular frequency `sqrt(c ρ_k)` is below π.
pub fn check_nyquist(g: &WeightedGraph, c: f64) -> Result<NyquistReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::input(format!("wave speed factor must be positive, got {c}")));
    }
    let eig = symmetric_eigen(&build_laplacian(g))?;
    let rho_max = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let max_frequency = (c * rho_max).sqrt();
    Ok(NyquistReport {
        max_frequency,
        passes: max_frequency < PI,
    })
}

/// Linear ramp from -2 to 2 across the nodes plus seeded uniform noise in
/// `[-noise_scale, noise_scale]`. For 21 nodes the ramp is `(x - 11) / 5`.
pub fn demo_initial_condition(n: usize, seed: u64, noise_scale: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::input(format!("need at least 2 nodes, got {n}")));
    }
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(Error::input("noise scale must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mid = (n as f64 + 1.0) / 2.0;
    let slope = 4.0 / (n as f64 - 1.0);
    Ok((1..=n)
        .map(|x| {
            let ramp = (x as f64 - mid) * slope;
            if noise_scale > 0.0 {
                ramp + rng.random_range(-noise_scale..=noise_scale)
            } else {
                ramp
            }
        })
        .collect())
}

/// Discrete cosine coefficients of a node function: the mean, then
/// `(2/n) Σ f(x) cos(πk(2x-1)/(2n))`.
pub fn cosine_coefficients_from_graph_samples(f: &[f64]) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 2 {
        return Err(Error::input(format!("need at least 2 samples, got {n}")));
    }
    let nf = n as f64;
    let mut a = vec![f.iter().sum::<f64>() / nf];
    for k in 1..n {
        let s: f64 = f
            .iter()
            .enumerate()
            .map(|(i, v)| v * (PI * k as f64 * (2.0 * (i + 1) as f64 - 1.0) / (2.0 * nf)).cos())
            .sum();
        a.push(2.0 / nf * s);
    }
    Ok(a)
}

/// `W(x,t) = a_0 + Σ_{k≥1} a_k cos(sqrt(c) π k t / n) cos(π k x / n)` on the
/// interval `[0, n]`. Returns one row per grid point.
pub fn sample_continuous_interval_wave(
    coefficients: &[f64],
    c: f64,
    n: usize,
    x_grid: &[f64],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if coefficients.is_empty() {
        return Err(Error::input("need at least the constant coefficient"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::input(format!("wave speed factor must be positive, got {c}")));
    }
    if n == 0 {
        return Err(Error::input("interval length must be positive"));
    }
    let nf = n as f64;
    if let Some(x) = x_grid.iter().find(|&&x| !(0.0..=nf).contains(&x)) {
        return Err(Error::input(format!("grid point {x} outside [0, {n}]")));
    }
    let sc = c.sqrt();
    Ok(x_grid
        .iter()
        .map(|&x| {
            times
                .iter()
                .map(|&t| {
                    coefficients[0]
                        + coefficients
                            .iter()
                            .enumerate()
                            .skip(1)
                            .map(|(k, a)| {
                                let kf = k as f64;
                                a * (sc * PI * kf * t / nf).cos() * (PI * kf * x / nf).cos()
                            })
                            .sum::<f64>()
                })
                .collect()
        })
        .collect())
}

/// Interval wave sampled at integer times as a panel, labelled by grid point.
pub fn interval_wave_panel(
    coefficients: &[f64],
    c: f64,
    n: usize,
    x_grid: &[f64],
    t_start: i64,
    steps: usize,
) -> Result<SignalPanel> {
    if steps == 0 {
        return Err(Error::input("steps must be positive"));
    }
    let rows = sample_continuous_interval_wave(coefficients, c, n, x_grid, &integer_times(t_start, steps))?;
    let labels = x_grid.iter().map(|x| format!("x={x}")).collect();
    SignalPanel::with_labels(rows, t_start, labels)
}

/// Grid `start, start + step, …` up to and including `end`.
pub fn uniform_grid(start: f64, step: f64, end: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + step * i as f64).collect()
}
