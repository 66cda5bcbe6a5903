//! One function per subcommand. Each writes its files under `--out`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use graphwave::graph::{graph_fourier, make_path_graph, spectral_decompose, write_edges_csv};
use graphwave::linalg::singular_values;
use graphwave::modes::{
    extract_modes_general, extract_modes_stationary, fit_amplitudes, forecast as forecast_modes, stationary_system,
    ModeSet,
};
use graphwave::panel::SignalPanel;
use graphwave::pose::{load_joint_series, strided_windows, windowed_recover};
use graphwave::recovery::{recover_graph, RecoveryConfig};
use graphwave::wave::{check_nyquist, demo_initial_condition};
use graphwave::{Error, Result};

use super::source::load_graph;
use super::{ExtractArgs, ForecastArgs, Method, ModelArgs, PoseArgs, RecoverArgs, SimulateArgs, SpectrumArgs, Status};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn write_table(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn panel_header(panel: &SignalPanel) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain(panel.labels().iter().cloned())
        .collect()
}

fn save_modes(out: &Path, modes: &ModeSet) -> Result<()> {
    modes.write_csv(File::create(out.join("modes.csv"))?)
}

fn n_pairs(model: &ModelArgs) -> Result<usize> {
    model
        .n_pairs
        .ok_or_else(|| Error::InvalidInput("--n-pairs is required".into()))
}

/// Polynomial degree for the general method.
fn general_order(model: &ModelArgs, order: Option<usize>) -> Result<usize> {
    match (order, model.n_pairs) {
        (Some(m), _) => Ok(m),
        (None, Some(n)) => Ok(2 * n + 1),
        (None, None) => Err(Error::InvalidInput("--order or --n-pairs is required".into())),
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn extract_with(panel: &SignalPanel, model: &ModelArgs, method: Method, order: Option<usize>) -> Result<ModeSet> {
    match method {
        Method::Stationary => {
            let (modes, coeffs) = extract_modes_stationary(panel, n_pairs(model)?, model.lag, model.normalize_modes)?;
            println!("stationary system rank {} of {}", coeffs.rank, coeffs.d.len());
            Ok(modes)
        }
        Method::General => extract_modes_general(panel, general_order(model, order)?, model.lag),
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<Status> {
    let generated = a.generator.generate(None)?;
    let panel = &generated.panel;
    fs::create_dir_all(&a.out)?;
    panel.save_csv(&a.out.join("panel.csv"))?;
    if let Some(g) = &generated.graph {
        write_json(&a.out.join("graph.json"), &g.to_json())?;
        let sqrt_c = a.generator.sqrt_c_or_default();
        let report = check_nyquist(g, sqrt_c * sqrt_c)?;
        if !report.passes {
            eprintln!(
                "warning: highest frequency {:.4} is not below pi; integer sampling aliases",
                report.max_frequency
            );
        }
    }
    if a.emit_plots {
        let rows = (0..panel.n()).flat_map(|x| {
            panel.series(x).iter().enumerate().map(move |(i, v)| {
                vec![
                    (x + 1).to_string(),
                    (panel.t_start() + i as i64).to_string(),
                    format!("{v:?}"),
                ]
            })
        });
        write_table(&a.out.join("heatmap.csv"), &strings(&["node", "t", "value"]), rows)?;
        if let Some(g) = &generated.graph {
            let f = demo_initial_condition(g.n(), a.generator.seed, a.generator.noise)?;
            let spectrum = spectral_decompose(g)?;
            let coeffs = graph_fourier(&f, &spectrum)?;
            write_table(
                &a.out.join("initial_condition.csv"),
                &strings(&["node", "displacement"]),
                f.iter()
                    .enumerate()
                    .map(|(x, v)| vec![(x + 1).to_string(), format!("{v:?}")]),
            )?;
            write_table(
                &a.out.join("graph_fourier.csv"),
                &strings(&["k", "eigenvalue", "coefficient"]),
                coeffs
                    .iter()
                    .zip(spectrum.eigenvalues())
                    .enumerate()
                    .map(|(k, (c, r))| vec![k.to_string(), format!("{r:?}"), format!("{c:?}")]),
            )?;
        }
    }
    println!(
        "wrote {} variables x {} samples (t = {}..{}) to {}",
        panel.n(),
        panel.len(),
        panel.t_start(),
        panel.t_end(),
        a.out.join("panel.csv").display()
    );
    Ok(Status::Done)
}

fn train_prefix(panel: SignalPanel, train: Option<usize>) -> Result<SignalPanel> {
    match train {
        None => Ok(panel),
        Some(0) => Err(Error::InvalidInput("--train must be positive".into())),
        Some(k) if k > panel.len() => Err(Error::InsufficientSamples(format!(
            "--train {k} exceeds the {} samples available",
            panel.len()
        ))),
        Some(k) => panel.window(panel.t_start(), panel.t_start() + k as i64 - 1),
    }
}

pub fn extract(a: &ExtractArgs) -> Result<Status> {
    let panel = train_prefix(a.source.panel(None)?, a.train)?;
    let modes = extract_with(&panel, &a.model, a.method, a.order)?;
    let amps = fit_amplitudes(&panel, &modes, panel.len())?;
    fs::create_dir_all(&a.out)?;
    save_modes(&a.out, &modes)?;
    amps.write_csv(File::create(a.out.join("amplitudes.csv"))?)?;
    if a.emit_plots && a.method == Method::Stationary {
        let (m, _) = stationary_system(&panel, n_pairs(&a.model)?, a.model.lag)?;
        write_table(
            &a.out.join("singular_values.csv"),
            &strings(&["k", "sigma"]),
            singular_values(&m)
                .iter()
                .enumerate()
                .map(|(k, s)| vec![(k + 1).to_string(), format!("{s:?}")]),
        )?;
    }
    let report = modes.modulus_report();
    if report.any_off_unit_circle() {
        eprintln!(
            "warning: {} modes off the unit circle (max deviation {:.3e})",
            report.off_unit_circle.len(),
            report.max_deviation
        );
    }
    warn_all(modes.warnings());
    println!("{} modes; amplitudes referenced to t = {}", modes.len(), amps.origin());
    Ok(Status::Done)
}

pub fn recover(a: &RecoverArgs) -> Result<Status> {
    let panel = a.source.panel(None)?;
    let mut cfg = RecoveryConfig::new(n_pairs(&a.model)?, a.model.lag);
    cfg.normalize_modes = a.model.normalize_modes;
    cfg.positivize = a.positivize;
    cfg.sqrt_c = a.source.generator.sqrt_c;
    cfg.validation_horizon = a.horizon;
    cfg.amp_norm_tol = a.amp_tol;
    cfg.validation_mse_tol = a.mse_tol;
    cfg.retry = a.retry;
    let r = recover_graph(&panel, &cfg)?;

    fs::create_dir_all(&a.out)?;
    write_json(&a.out.join("graph.json"), &r.to_json())?;
    r.weights.write_csv(File::create(a.out.join("weights.csv"))?)?;
    save_modes(&a.out, &r.modes)?;
    r.amplitudes.write_csv(File::create(a.out.join("amplitudes.csv"))?)?;
    let mse = &r.diagnostics.mse;
    let mse_panel = SignalPanel::with_labels(vec![mse.iter().map(|m| m.1).collect()], mse[0].0, vec!["mse".into()])?;
    mse_panel.save_csv(&a.out.join("mse.csv"))?;
    let edges: Vec<_> = r
        .weights
        .edges()
        .into_iter()
        .filter(|e| a.threshold.is_none_or(|t| e.2 > t))
        .collect();
    write_edges_csv(&edges, File::create(a.out.join("edges.csv"))?)?;

    warn_all(&r.diagnostics.warnings);
    println!(
        "{} nodes, {} edges, {} modes, max weight {:.6}",
        r.weights.n(),
        edges.len(),
        r.modes.len(),
        r.weights.max_weight()
    );
    match &r.diagnostics.advisory {
        Some(msg) => {
            eprintln!("advisory: {msg}");
            Ok(Status::Advisory)
        }
        None => Ok(Status::Done),
    }
}

fn write_header_only(path: &Path, panel: &SignalPanel) -> Result<()> {
    write_table(path, &panel_header(panel), Vec::new())
}

pub fn forecast(a: &ForecastArgs) -> Result<Status> {
    let minimal = match a.method {
        Method::Stationary => a.model.lag + 2 * n_pairs(&a.model)? + 1,
        Method::General => a.model.lag + general_order(&a.model, a.order)?,
    };
    let panel = match &a.source.input {
        Some(_) => a.source.panel(None)?,
        None => a.source.panel(Some(a.train.unwrap_or(minimal) + a.horizon))?,
    };
    let train_len = match (&a.source.input, a.train) {
        (_, Some(k)) => k,
        (Some(_), None) => panel.len(),
        (None, None) => minimal,
    };
    let train = train_prefix(panel.clone(), Some(train_len))?;
    let modes = extract_with(&train, &a.model, a.method, a.order)?;
    let amps = fit_amplitudes(&train, &modes, train.len())?;

    let t_from = train.t_end() + 1;
    let t_to = train.t_end() + a.horizon as i64;
    fs::create_dir_all(&a.out)?;
    save_modes(&a.out, &modes)?;
    let predicted = if a.horizon > 0 {
        let f = forecast_modes(&modes, &amps, t_from, t_to)?;
        let f = SignalPanel::with_labels(
            (0..f.n()).map(|x| f.series(x).to_vec()).collect(),
            t_from,
            panel.labels().to_vec(),
        )?;
        f.save_csv(&a.out.join("forecast.csv"))?;
        Some(f)
    } else {
        write_header_only(&a.out.join("forecast.csv"), &panel)?;
        None
    };

    let known_to = t_to.min(panel.t_end());
    let mut max_err = None;
    match &predicted {
        Some(f) if known_to >= t_from => {
            let series: Vec<Vec<f64>> = (0..panel.n())
                .map(|x| {
                    (t_from..=known_to)
                        .map(|t| (f.value(x, t).unwrap() - panel.value(x, t).unwrap()).abs())
                        .collect()
                })
                .collect();
            max_err = series.iter().flatten().copied().reduce(f64::max);
            SignalPanel::with_labels(series, t_from, panel.labels().to_vec())?.save_csv(&a.out.join("error.csv"))?;
        }
        _ => write_header_only(&a.out.join("error.csv"), &panel)?,
    }
    if a.emit_plots {
        panel
            .window(panel.t_start(), known_to.max(train.t_end()))?
            .save_csv(&a.out.join("truth.csv"))?;
        let fit = forecast_modes(&modes, &amps, train.t_start(), t_to.max(train.t_end()))?;
        SignalPanel::with_labels(
            (0..fit.n()).map(|x| fit.series(x).to_vec()).collect(),
            fit.t_start(),
            panel.labels().to_vec(),
        )?
        .save_csv(&a.out.join("fit.csv"))?;
    }
    warn_all(modes.warnings());
    match max_err {
        Some(e) => println!(
            "trained on t = {}..{}, forecast t = {t_from}..{t_to}, max abs error {e:.3e}",
            train.t_start(),
            train.t_end()
        ),
        None => println!(
            "trained on t = {}..{}, forecast {} steps",
            train.t_start(),
            train.t_end(),
            a.horizon
        ),
    }
    Ok(Status::Done)
}

pub fn pose(a: &PoseArgs) -> Result<Status> {
    let js = load_joint_series(&a.input, a.layout)?;
    let mut cfg = RecoveryConfig::new(a.n_pairs, a.lag);
    cfg.normalize_modes = a.normalize_modes;
    let starts = match (a.windows.is_empty(), a.stride) {
        (false, _) => a.windows.clone(),
        (true, Some(s)) => strided_windows(&js, cfg.window_len(), s),
        (true, None) => return Err(Error::InvalidInput("give --windows or --stride".into())),
    };
    if starts.is_empty() {
        return Err(Error::InsufficientSamples(format!(
            "{} frames cannot hold a window of {}",
            js.frame_count(),
            cfg.window_len()
        )));
    }
    let results = windowed_recover(&js, &cfg, &starts, a.threshold)?;
    fs::create_dir_all(&a.out)?;
    let mut index = Vec::with_capacity(results.len());
    for r in &results {
        let graph_file = format!("window_{}.json", r.window_start);
        let edges_file = format!("window_{}_edges.csv", r.window_start);
        write_json(&a.out.join(&graph_file), &r.recovered.to_json())?;
        write_edges_csv(&r.thresholded_edges, File::create(a.out.join(&edges_file))?)?;
        println!(
            "window {}: {} edges above {}",
            r.window_start,
            r.thresholded_edges.len(),
            a.threshold
        );
        index.push(vec![r.window_start.to_string(), graph_file, edges_file]);
    }
    write_table(
        &a.out.join("index.csv"),
        &strings(&["window_start", "graph", "edges"]),
        index,
    )?;
    Ok(Status::Done)
}

pub fn spectrum(a: &SpectrumArgs) -> Result<Status> {
    let g = match (&a.graph, a.path) {
        (Some(p), _) => load_graph(p)?,
        (None, Some(n)) => make_path_graph(n)?,
        (None, None) => return Err(Error::InvalidInput("give --path N or --graph FILE".into())),
    };
    let s = spectral_decompose(&g)?;
    fs::create_dir_all(&a.out)?;
    write_table(
        &a.out.join("spectrum.csv"),
        &strings(&["k", "eigenvalue"]),
        s.eigenvalues()
            .iter()
            .enumerate()
            .map(|(k, r)| vec![k.to_string(), format!("{r:?}")]),
    )?;
    let n = g.n();
    let mut header = vec!["node".to_string()];
    header.extend((0..n).map(|k| format!("v{k}")));
    let vectors: Vec<Vec<f64>> = (0..n).map(|k| s.eigenvector(k)).collect();
    write_table(
        &a.out.join("eigenvectors.csv"),
        &header,
        (0..n).map(|x| {
            std::iter::once((x + 1).to_string())
                .chain(vectors.iter().map(|v| format!("{:?}", v[x])))
                .collect()
        }),
    )?;
    println!("{n} nodes, largest eigenvalue {:.6}", s.eigenvalues()[n - 1]);
    if let Some(sqrt_c) = a.sqrt_c {
        let report = check_nyquist(&g, sqrt_c * sqrt_c)?;
        println!(
            "highest frequency {:.6} {} pi",
            report.max_frequency,
            if report.passes { "<" } else { ">=" }
        );
    }
    Ok(Status::Done)
}
