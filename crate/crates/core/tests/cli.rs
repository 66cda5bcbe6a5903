use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use graphwave::graph::{read_edges_csv, GraphJson, WeightTable};
use graphwave::modes::{AmplitudeTable, ModeSet};
use graphwave::panel::SignalPanel;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_dir(tmp: &TempDir, name: &str) -> PathBuf {
    tmp.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate_p21(tmp: &TempDir) -> PathBuf {
    let out = out_dir(tmp, "sim");
    let o = run(&[
        "simulate",
        "--path",
        "21",
        "--sqrt-c",
        "1.5",
        "--steps",
        "56",
        "--seed",
        "7",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("panel.csv")
}

#[test]
fn simulate_path_panel_shape() {
    let tmp = TempDir::new().unwrap();
    let panel = SignalPanel::load_csv(&simulate_p21(&tmp)).unwrap();
    assert_eq!((panel.n(), panel.len(), panel.t_start()), (21, 56, 1));

    let tiny = out_dir(&tmp, "tiny");
    let o = run(&[
        "simulate",
        "--path",
        "2",
        "--sqrt-c",
        "0.1",
        "--steps",
        "8",
        "--out",
        s(&tiny),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let p = SignalPanel::load_csv(&tiny.join("panel.csv")).unwrap();
    assert_eq!((p.n(), p.len()), (2, 8));
}

#[test]
fn simulate_interval_wave_panel() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "iw");
    let o = run(&[
        "simulate",
        "--interval-wave",
        "--terms",
        "11",
        "--grid",
        "half-integer",
        "--steps",
        "26",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let p = SignalPanel::load_csv(&out.join("panel.csv")).unwrap();
    assert_eq!((p.n(), p.len()), (21, 26));
}

#[test]
fn identical_flags_give_identical_files() {
    let tmp = TempDir::new().unwrap();
    for name in ["a", "b"] {
        let sim = out_dir(&tmp, &format!("sim_{name}"));
        let o = run(&[
            "simulate",
            "--path",
            "9",
            "--steps",
            "30",
            "--seed",
            "11",
            "--emit-plots",
            "--out",
            s(&sim),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let rec = out_dir(&tmp, &format!("rec_{name}"));
        let input = sim.join("panel.csv");
        let o = run(&[
            "recover",
            "--input",
            s(&input),
            "--n-pairs",
            "9",
            "--lag",
            "2",
            "--horizon",
            "3",
            "--out",
            s(&rec),
        ]);
        assert!(matches!(o.status.code(), Some(0) | Some(2)));
    }
    for (a, b) in [("sim_a", "sim_b"), ("rec_a", "rec_b")] {
        let mut names: Vec<_> = fs::read_dir(out_dir(&tmp, a))
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for f in names {
            let x = fs::read(out_dir(&tmp, a).join(&f)).unwrap();
            let y = fs::read(out_dir(&tmp, b).join(&f)).unwrap();
            assert_eq!(x, y, "{f:?} differs");
        }
    }
}

#[test]
fn recover_path_graph_and_outputs_round_trip() {
    let tmp = TempDir::new().unwrap();
    let input = simulate_p21(&tmp);
    let out = out_dir(&tmp, "rec");
    let o = run(&[
        "recover",
        "--input",
        s(&input),
        "--n-pairs",
        "26",
        "--lag",
        "3",
        "--sqrt-c",
        "1.5",
        "--positivize",
        "--threshold",
        "0.5",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let edges = read_edges_csv(fs::File::open(out.join("edges.csv")).unwrap(), Path::new("edges.csv")).unwrap();
    let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.0, e.1)).collect();
    assert_eq!(pairs, (0..20).map(|x| (x, x + 1)).collect::<Vec<_>>());

    let weights = WeightTable::read_csv(
        fs::File::open(out.join("weights.csv")).unwrap(),
        Path::new("weights.csv"),
    )
    .unwrap();
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("graph.json")).unwrap()).unwrap();
    let graph: GraphJson = serde_json::from_value(json.clone()).unwrap();
    assert_eq!(WeightTable::from_json(&graph).unwrap(), weights);
    assert_eq!(json["diagnostics"]["weight_scale"]["scale"], "known-c");

    let modes = ModeSet::read_csv(fs::File::open(out.join("modes.csv")).unwrap(), Path::new("modes.csv")).unwrap();
    assert_eq!(modes.len(), json["diagnostics"]["modes"].as_array().unwrap().len());
    let amps = AmplitudeTable::read_csv(
        fs::File::open(out.join("amplitudes.csv")).unwrap(),
        0,
        Path::new("a.csv"),
    )
    .unwrap();
    assert_eq!((amps.n(), amps.mode_count()), (21, modes.len()));
    let mse = SignalPanel::load_csv(&out.join("mse.csv")).unwrap();
    assert_eq!(mse.len(), 56);
    assert!(mse.series(0).iter().all(|m| *m < 1e-12));
}

#[test]
fn constant_panel_gives_no_edges() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("flat.csv");
    let rows: String = (1..=12).map(|t| format!("{t},1.5,-2.0,0.25\n")).collect();
    fs::write(&input, format!("t,a,b,c\n{rows}")).unwrap();
    let out = out_dir(&tmp, "rec");
    let o = run(&[
        "recover",
        "--input",
        s(&input),
        "--n-pairs",
        "2",
        "--lag",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let edges = read_edges_csv(fs::File::open(out.join("edges.csv")).unwrap(), Path::new("edges.csv")).unwrap();
    assert!(edges.is_empty());
}

#[test]
fn short_panel_exits_one_with_message() {
    let tmp = TempDir::new().unwrap();
    let o = run(&[
        "recover",
        "--demo",
        "three-tone",
        "--steps",
        "5",
        "--n-pairs",
        "3",
        "--lag",
        "3",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient samples"));
}

#[test]
fn failed_validation_exits_two() {
    let tmp = TempDir::new().unwrap();
    let o = run(&[
        "recover",
        "--demo",
        "three-tone",
        "--steps",
        "40",
        "--n-pairs",
        "1",
        "--lag",
        "3",
        "--horizon",
        "10",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("advisory"));
    assert!(tmp.path().join("graph.json").exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["recover", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["recover", "--n-pairs", "2", "--lag", "2"]).status.code(), Some(1));
    assert_eq!(
        run(&["simulate", "--path", "3", "--demo", "three-tone"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

fn max_error(dir: &Path) -> f64 {
    let e = SignalPanel::load_csv(&dir.join("error.csv")).unwrap();
    e.series(0).iter().copied().fold(0.0, f64::max)
}

#[test]
fn forecast_methods_on_three_tone() {
    let tmp = TempDir::new().unwrap();
    let st = out_dir(&tmp, "st");
    let o = run(&[
        "forecast",
        "--demo",
        "three-tone",
        "--n-pairs",
        "3",
        "--lag",
        "3",
        "--horizon",
        "90",
        "--out",
        s(&st),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let f = SignalPanel::load_csv(&st.join("forecast.csv")).unwrap();
    assert_eq!((f.t_start(), f.t_end()), (11, 100));
    let stationary = max_error(&st);
    assert!(stationary < 1e-6, "{stationary}");

    let gen = out_dir(&tmp, "gen");
    let o = run(&[
        "forecast",
        "--demo",
        "three-tone",
        "--method",
        "general",
        "--order",
        "7",
        "--lag",
        "7",
        "--horizon",
        "86",
        "--emit-plots",
        "--out",
        s(&gen),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(max_error(&gen) > 10.0 * stationary);
    let fit = SignalPanel::load_csv(&gen.join("fit.csv")).unwrap();
    assert_eq!((fit.t_start(), fit.t_end()), (1, 100));
}

#[test]
fn zero_horizon_writes_empty_forecast() {
    let tmp = TempDir::new().unwrap();
    let o = run(&[
        "forecast",
        "--demo",
        "three-tone",
        "--n-pairs",
        "3",
        "--lag",
        "3",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(tmp.path().join("forecast.csv")).unwrap(), "t,F\n");
}

#[test]
fn extract_reports_singular_values() {
    let tmp = TempDir::new().unwrap();
    let o = run(&[
        "extract",
        "--demo",
        "interval-wave",
        "--n-pairs",
        "12",
        "--lag",
        "1",
        "--emit-plots",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("singular_values.csv")).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(String::from_utf8_lossy(&o.stdout).contains("rank 10 of 12"));
}

fn write_skeleton(path: &Path, moving: Option<(usize, usize)>) {
    let mut text = String::from("frame");
    for j in 1..=25 {
        text.push_str(&format!(",j{j}_x,j{j}_y"));
    }
    text.push('\n');
    for t in 1..=30 {
        text.push_str(&t.to_string());
        for j in 0..25 {
            let sign = match moving {
                Some((a, _)) if a == j => 1.0,
                Some((_, b)) if b == j => -1.0,
                _ => 0.0,
            };
            let x = 300.0 + 10.0 * j as f64 + sign * 6.0 * (0.8 * t as f64).cos();
            let y = 200.0 + 4.0 * j as f64 + sign * 2.0 * (0.8 * t as f64).cos();
            text.push_str(&format!(",{x:?},{y:?}"));
        }
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

#[test]
fn pose_windows_write_graphs_and_index() {
    let tmp = TempDir::new().unwrap();
    let moving = tmp.path().join("moving.csv");
    write_skeleton(&moving, Some((2, 9)));
    let out = out_dir(&tmp, "pose");
    let o = run(&[
        "pose",
        "--input",
        s(&moving),
        "--lag",
        "4",
        "--n-pairs",
        "5",
        "--windows",
        "1,11",
        "--threshold",
        "0.2",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let index = fs::read_to_string(out.join("index.csv")).unwrap();
    assert_eq!(
        index,
        "window_start,graph,edges\n1,window_1.json,window_1_edges.csv\n11,window_11.json,window_11_edges.csv\n"
    );
    for t in [1, 11] {
        let edges = read_edges_csv(
            fs::File::open(out.join(format!("window_{t}_edges.csv"))).unwrap(),
            Path::new("e.csv"),
        )
        .unwrap();
        assert_eq!(edges.iter().map(|e| (e.0, e.1)).collect::<Vec<_>>(), vec![(2, 9)]);
    }

    let still = tmp.path().join("still.csv");
    write_skeleton(&still, None);
    let out = out_dir(&tmp, "still");
    let o = run(&["pose", "--input", s(&still), "--stride", "5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let index = fs::read_to_string(out.join("index.csv")).unwrap();
    assert_eq!(index.lines().count(), 5);
    for line in index.lines().skip(1) {
        let edges_file = line.split(',').nth(2).unwrap();
        assert_eq!(fs::read_to_string(out.join(edges_file)).unwrap(), "u,v,w\n");
    }
}

#[test]
fn pose_rejects_bad_cells_with_location() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "frame,j1_x,j1_y\n1,0.0,1.0\n2,NaN,1.0\n").unwrap();
    let o = run(&["pose", "--input", s(&bad), "--windows", "1", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 3") && err.contains("j1_x"), "{err}");
}

#[test]
fn spectrum_of_path_graph() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["spectrum", "--path", "5", "--sqrt-c", "1.5", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for (k, v) in values.iter().enumerate() {
        let want = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / 5.0).cos();
        assert!((v - want).abs() < 1e-12);
    }
}
