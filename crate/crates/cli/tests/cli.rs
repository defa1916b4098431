use std::process::{Command, Output};

use ars2d::graph::builtin_graph;

fn ars2d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ars2d"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn bundled_graphs_compare_as_expected() {
    let o = ars2d(&["compare", "fig1", "fig5"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("EQUIVALENT flipped=true"));

    let o = ars2d(&["compare", "fig3a", "fig3b"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("EQUIVALENT"));

    for other in ["fig3a", "fig3b"] {
        let o = ars2d(&["compare", other, "fig3c"]);
        assert_eq!(code(&o), 1);
        assert_eq!(stdout(&o).trim(), "NOT-EQUIVALENT");
    }
}

#[test]
fn every_graph_is_equivalent_to_itself() {
    for name in ["fig1", "fig3a", "fig3b", "fig3c", "fig5"] {
        let o = ars2d(&["compare", name, name]);
        assert_eq!(code(&o), 0, "{name}");
    }
}

#[test]
fn compare_prints_a_witness() {
    let o = ars2d(&["compare", "fig1", "fig5"]);
    let text = stdout(&o);
    let json = text.split_once('\n').unwrap().1;
    let w: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(w["flipped"], true);
    assert_eq!(w["vertex_bijection"].as_object().unwrap().len(), 7);
    assert_eq!(w["edge_bijection"].as_object().unwrap().len(), 8);
}

#[test]
fn graph_json_is_canonical() {
    let o = ars2d(&["graph", "fig1"]);
    assert_eq!(code(&o), 0);
    let expected = builtin_graph("fig1").unwrap().unwrap().to_json();
    assert_eq!(stdout(&o).trim_end(), expected);
}

#[test]
fn graph_dot_lists_every_vertex_and_edge() {
    let o = ars2d(&["graph", "--fixture", "fig1", "--format", "dot"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("digraph ars {"));
    assert_eq!(text.matches(" -> ").count(), 8);
    assert!(text.contains("\"D\" [label=\"+1,1\"];"));
}

#[test]
fn graph_of_a_plane_chart_is_rejected() {
    let o = ars2d(&["graph", "grushin-plane"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn analyze_tangency_torus() {
    let o = ars2d(&["analyze", "tangency-torus", "--resolution", "256"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["h0"]["passed"], true);
    assert_eq!(report["curves"].as_array().unwrap().len(), 2);
    assert_eq!(report["tau_total"], 0);
    assert_eq!(report["euler_number"], 0);
}

#[test]
fn analyze_is_deterministic() {
    let a = ars2d(&["analyze", "grushin-torus", "--resolution", "128"]);
    let b = ars2d(&["analyze", "grushin-torus", "--resolution", "128"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn analyze_writes_to_a_file() {
    let dir = std::env::temp_dir().join(format!("ars2d-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("report.json");
    let o = ars2d(&[
        "analyze",
        "riemannian-torus",
        "--resolution",
        "128",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["curves"].as_array().unwrap().len(), 0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn analyze_reads_a_structure_file() {
    let dir = std::env::temp_dir().join(format!("ars2d-spec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec = ars2d::model::builtin("grushin-torus", &Default::default())
        .unwrap()
        .unwrap();
    let path = dir.join("spec.json");
    std::fs::write(&path, spec.to_json()).unwrap();
    let from_file = ars2d(&["analyze", path.to_str().unwrap(), "--resolution", "128"]);
    let builtin = ars2d(&["analyze", "grushin-torus", "--resolution", "128"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, builtin.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn analyze_flags_a_degenerate_locus() {
    let o = ars2d(&["analyze", "nonregular-plane", "--resolution", "128"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn malformed_input_exits_two() {
    let dir = std::env::temp_dir().join(format!("ars2d-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, "{ \"surface\": ").unwrap();
    assert_eq!(code(&ars2d(&["analyze", path.to_str().unwrap()])), 2);
    std::fs::write(&path, "{ \"something\": 1 }").unwrap();
    assert_eq!(code(&ars2d(&["analyze", path.to_str().unwrap()])), 2);
    std::fs::remove_dir_all(&dir).unwrap();

    assert_eq!(code(&ars2d(&["analyze", "no-such-fixture"])), 2);
    assert_eq!(code(&ars2d(&["analyze", "F1", "--phi", "x +"])), 2);
    assert_eq!(code(&ars2d(&["classify", "F1", "--point", "1"])), 2);
}

#[test]
fn distance_along_the_grushin_axis() {
    let o = ars2d(&[
        "distance",
        "grushin-plane",
        "--from",
        "0,0",
        "--to",
        "0.5,0",
        "--resolution",
        "128",
    ]);
    assert_eq!(code(&o), 0);
    let d: f64 = stdout(&o).trim().parse().unwrap();
    assert!((d - 0.5).abs() < 1e-9, "{d}");
}

#[test]
fn distance_accepts_negative_coordinates() {
    let o = ars2d(&[
        "distance",
        "grushin-plane",
        "--from",
        "-0.2,0",
        "--to",
        "0.3,0",
        "--resolution",
        "128",
    ]);
    assert_eq!(code(&o), 0);
    let d: f64 = stdout(&o).trim().parse().unwrap();
    assert!((d - 0.5).abs() < 1e-9, "{d}");
}

#[test]
fn distance_outside_the_chart_is_invalid() {
    let o = ars2d(&["distance", "grushin-plane", "--from", "0,0", "--to", "3,0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn shooting_reports_the_endpoint_and_length() {
    let o = ars2d(&[
        "distance",
        "grushin-plane",
        "--from",
        "0,0",
        "--method",
        "shoot",
        "--covector",
        "1,1",
        "--time",
        "0.5",
        "--steps",
        "2000",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let field = |key: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .unwrap()
            .trim()
            .to_string()
    };
    let end: Vec<f64> = field("endpoint")
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((end[0] - 0.5f64.sin()).abs() < 1e-9);
    let length: f64 = field("length").parse().unwrap();
    assert!((length - 0.5).abs() < 1e-9);
}

#[test]
fn shooting_with_an_annihilating_covector_fails() {
    let o = ars2d(&[
        "distance",
        "grushin-plane",
        "--from",
        "0,0",
        "--method",
        "shoot",
        "--covector",
        "0,1",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn classify_points() {
    let cases = [
        ("grushin-plane", "0.3,0", "Ordinary"),
        ("grushin-plane", "0,0.3", "Grushin"),
        ("F3", "0,0", "Tangency"),
    ];
    for (fixture, point, class) in cases {
        let o = ars2d(&["classify", fixture, "--point", point]);
        assert_eq!(code(&o), 0);
        assert_eq!(stdout(&o).trim(), class, "{fixture} at {point}");
    }
}

#[test]
fn ballbox_along_the_axis_is_linear() {
    let o = ars2d(&[
        "ballbox",
        "grushin-plane",
        "--direction",
        "1,0",
        "--h-min",
        "0.01",
        "--h-max",
        "0.16",
        "--resolution",
        "128",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let exponent: f64 = text
        .lines()
        .next()
        .unwrap()
        .strip_prefix("exponent ")
        .unwrap()
        .parse()
        .unwrap();
    assert!((exponent - 1.0).abs() < 0.02, "{exponent}");
    assert_eq!(text.lines().count(), 9);
}
