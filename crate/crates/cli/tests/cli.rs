use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mcbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcbp"))
        .args(args)
        .env_remove("MCBP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn iris_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/iris.csv").to_string()
}

#[test]
fn synth_writes_csv_and_sidecar_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = mcbp(&["synth", "--generator", "moons:n=1000", "--seeds", "7", "--out", s(out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read(out.join("moons_n1000_seed7.csv")).unwrap();
    let json = fs::read(out.join("moons_n1000_seed7.json")).unwrap();
    assert_eq!(String::from_utf8_lossy(&csv).lines().count(), 1001);
    let sidecar: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(sidecar["seed"], 7);
    assert_eq!(sidecar["generator"]["generator"], "moons");
    assert_eq!(sidecar["n"], 1000);

    let o = mcbp(&["synth", "--generator", "moons:n=1000", "--seeds", "7", "--out", s(out)]);
    assert!(o.status.success());
    assert_eq!(fs::read(out.join("moons_n1000_seed7.csv")).unwrap(), csv);
    assert_eq!(fs::read(out.join("moons_n1000_seed7.json")).unwrap(), json);
}

#[test]
fn synth_rejects_unknown_generator() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbp(&["synth", "--generator", "spiral", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown generator"));
}

#[test]
fn curvature_on_blob_writes_triptych() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = mcbp(&[
        "curvature",
        "--generator",
        "blob:n=400",
        "--p",
        "0.8",
        "--seeds",
        "3",
        "--out",
        s(out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("blob_curvature.csv")).unwrap();
    let flagged = csv.lines().skip(1).filter(|l| l.ends_with(",1")).count();
    assert!((75..=85).contains(&flagged), "{flagged} flagged");
    for plot in ["raw", "heatmap", "boundary"] {
        let svg = fs::read_to_string(out.join(format!("blob_{plot}.svg"))).unwrap();
        assert_eq!(svg.matches("<circle").count(), 400);
    }
    let boundary = fs::read_to_string(out.join("blob_boundary.svg")).unwrap();
    assert_eq!(boundary.matches("fill=\"black\"").count(), flagged);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("blob_curvature.json")).unwrap()).unwrap();
    assert_eq!(report["raw_scores"].as_array().unwrap().len(), 400);
}

#[test]
fn curvature_outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = mcbp(&[
            "curvature",
            "--generator",
            "moons:n=300",
            "--seeds",
            "1",
            "--out",
            s(d.path()),
        ]);
        assert!(o.status.success());
    }
    for f in ["moons_curvature.csv", "moons_curvature.json", "moons_heatmap.svg"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn missing_input_is_a_data_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbp(&[
        "curvature",
        "--input",
        "/definitely/not/here.csv",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/definitely/not/here.csv"));
}

#[test]
fn malformed_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "a,b\n1,2\n3,oops\n").unwrap();
    let o = mcbp(&["curvature", "--input", s(&path), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn four_dimensional_input_skips_plots() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbp(&[
        "curvature",
        "--input",
        &iris_path(),
        "--label-column",
        "species",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("iris_curvature.csv").exists());
    assert!(dir.path().join("iris_curvature.json").exists());
    assert!(!dir.path().join("iris_raw.svg").exists());
    assert!(stderr(&o).contains("SVG plots need 2-D data"));
}

#[test]
fn pipeline_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    fs::write(&path, "x,y\n0,0\n1,0\n0,1\n1,1\n2,2\n").unwrap();
    let o = mcbp(&["curvature", "--input", s(&path), "--k", "10", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    for args in [
        vec!["experiment", "--generator", "blob", "--strategy", "bogus", "--out", out],
        vec!["curvature", "--generator", "blob", "--p", "1.5", "--out", out],
        vec!["curvature", "--out", out],
        vec!["frobnicate"],
        vec!["curvature", "--generator", "blob", "--seeds", "x..y", "--out", out],
    ] {
        let o = mcbp(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(mcbp(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let from_file = dir.path().join("from-file");
    fs::write(
        &cfg,
        format!(
            "# blob run\ngenerator = blob:n=200\np = 0.9\nformats = csv\nout = {}\n",
            s(&from_file)
        ),
    )
    .unwrap();
    let o = mcbp(&["curvature", "--config", s(&cfg), "--p", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(from_file.join("blob_curvature.csv")).unwrap();
    assert_eq!(csv.lines().skip(1).filter(|l| l.ends_with(",1")).count(), 100);
    assert!(!from_file.join("blob_curvature.json").exists());

    let env_dir = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_mcbp"))
        .args(["synth", "--generator", "aniso:n=60", "--seeds", "0,1"])
        .env("MCBP_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(env_dir.join("aniso_n60_seed0.csv").exists());
    assert!(env_dir.join("aniso_n60_seed1.json").exists());
}

#[test]
fn experiment_on_iris_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbp(&[
        "experiment",
        "--input",
        &iris_path(),
        "--label-column",
        "species",
        "--strategy",
        "filtered-kmeans,hdbscan-filter",
        "--seeds",
        "0..20",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    let kmeans = &rows[0];
    assert_eq!(kmeans[1], "filtered-kmeans");
    let (sc_base, sc_treat): (f64, f64) = (kmeans[2].parse().unwrap(), kmeans[5].parse().unwrap());
    assert!(sc_treat > sc_base, "{sc_base} -> {sc_treat}");
    assert_eq!(kmeans[11], "20");
    assert_eq!(rows[1][11], "1");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("table.json")).unwrap()).unwrap();
    assert_eq!(json["outcomes"].as_array().unwrap().len(), 2);
    assert_eq!(json["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn experiment_continues_past_a_broken_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbp(&[
        "experiment",
        "--input",
        "/missing.csv",
        "--input",
        &iris_path(),
        "--label-column",
        "species",
        "--strategy",
        "filtered-kmeans",
        "--seeds",
        "0..3",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("table.json")).unwrap()).unwrap();
    assert_eq!(json["outcomes"].as_array().unwrap().len(), 1);
    assert_eq!(json["failures"][0]["dataset"], "/missing.csv");
}

#[test]
fn experiment_hybrid_on_two_blobs_is_no_worse_than_raw_hdbscan() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbp(&[
        "experiment",
        "--generator",
        "two-blobs",
        "--strategy",
        "hybrid-1nn",
        "--seeds",
        "0",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let row: Vec<&str> = table.lines().nth(1).unwrap().split(',').collect();
    let (base, treat): (f64, f64) = (row[2].parse().unwrap(), row[5].parse().unwrap());
    assert!(treat >= base, "SC(HDBSCAN on raw) {base} vs SC(hybrid) {treat}");
}

#[test]
fn bench_reports_one_row_per_grid_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcbp(&[
        "bench",
        "--grid",
        "200,400,800",
        "--m",
        "3",
        "--k",
        "5",
        "--repetitions",
        "1",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("scaling_n.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(String::from_utf8_lossy(&o.stdout).contains("slopes"));
    let o = mcbp(&["bench", "--axis", "q", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}
