//! Built-in demonstration signals with fixed constants.

use std::f64::consts::PI;

use crate::error::Result;
use crate::graph::make_path_graph;
use crate::panel::SignalPanel;
use crate::wave::{
    cosine_coefficients_from_graph_samples, demo_initial_condition, interval_wave_panel, simulate_graph_wave,
    uniform_grid, WaveInitialCondition,
};

/// `2 sin(0.016πt) + 3 cos(0.04πt) + sin(0.6πt)/2 + 3`.
pub fn three_tone(t: f64) -> f64 {
    2.0 * (0.016 * PI * t).sin() + 3.0 * (0.04 * PI * t).cos() + 0.5 * (0.6 * PI * t).sin() + 3.0
}

/// Angles of the three tones, ascending.
pub const THREE_TONE_ANGLES: [f64; 3] = [0.016 * PI, 0.04 * PI, 0.6 * PI];

/// Single-variable panel of [`three_tone`] over `t_from ..= t_to`.
pub fn three_tone_panel(t_from: i64, t_to: i64) -> Result<SignalPanel> {
    let s = (t_from..=t_to).map(|t| three_tone(t as f64)).collect();
    SignalPanel::with_labels(vec![s], t_from, vec!["F".to_string()])
}

/// Travelling cosine over seven nodes on a linear trend:
/// `F(x,t) = -5x/2 + cos(πx/3 + πt/5)` for `x = 1..=7`.
pub fn travelling_cosine_panel(t_from: i64, t_to: i64) -> Result<SignalPanel> {
    let series = (1..=7)
        .map(|x| {
            let x = x as f64;
            (t_from..=t_to)
                .map(|t| -2.5 * x + (PI * x / 3.0 + PI * t as f64 / 5.0).cos())
                .collect()
        })
        .collect();
    SignalPanel::new(series, t_from)
}

/// Path-graph wave released from rest with the noisy ramp initial condition,
/// sampled at `1..=steps`.
pub fn path_wave_panel(n: usize, sqrt_c: f64, steps: usize, seed: u64, noise_scale: f64) -> Result<SignalPanel> {
    let g = make_path_graph(n)?;
    let f = demo_initial_condition(n, seed, noise_scale)?;
    let ic = WaveInitialCondition::at_rest(f, sqrt_c * sqrt_c)?;
    simulate_graph_wave(&g, &ic, 1, steps)
}

/// Cosine-series wave on `[0, n]` whose coefficients come from the ramp
/// initial condition, truncated to `terms` coefficients, sampled on the
/// given grid at `1..=steps`.
pub fn interval_wave_demo_panel(
    n: usize,
    terms: usize,
    sqrt_c: f64,
    grid: &[f64],
    steps: usize,
    seed: u64,
    noise_scale: f64,
) -> Result<SignalPanel> {
    let f = demo_initial_condition(n, seed, noise_scale)?;
    let mut a = cosine_coefficients_from_graph_samples(&f)?;
    a.truncate(terms.max(1));
    interval_wave_panel(&a, sqrt_c * sqrt_c, n, grid, 1, steps)
}

/// Cell centres `0.5, 1.5, …, n - 0.5`, optionally every `stride`-th one.
pub fn half_integer_grid(n: usize, stride: usize) -> Vec<f64> {
    uniform_grid(0.5, stride.max(1) as f64, n as f64 - 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_tone_at_zero() {
        assert!((three_tone(0.0) - 6.0).abs() < 1e-15);
        let p = three_tone_panel(1, 10).unwrap();
        assert_eq!(p.len(), 10);
        assert_eq!(p.value(0, 4).unwrap(), three_tone(4.0));
    }

    #[test]
    fn travelling_cosine_shape() {
        let p = travelling_cosine_panel(0, 9).unwrap();
        assert_eq!(p.n(), 7);
        assert!((p.value(0, 0).unwrap() - (-2.5 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn grids() {
        assert_eq!(half_integer_grid(21, 1).len(), 21);
        let coarse = half_integer_grid(21, 2);
        assert_eq!(coarse.len(), 11);
        assert_eq!(coarse[10], 20.5);
    }
}
