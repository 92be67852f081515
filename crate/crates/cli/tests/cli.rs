use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn repstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repstab"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn irreps_of_presets_and_inline_tables() {
    let s3 = json(&repstab(&["irreps", "--preset", "S3"]));
    assert_eq!(s3["dims"], serde_json::json!([1, 1, 2]));
    assert_eq!(s3["sum_of_squares_matches_order"], true);
    let z2 = json(&repstab(&["irreps", "--preset", "Z2"]));
    assert_eq!(z2["dims"], serde_json::json!([1, 1]));

    let dir = tempfile::tempdir().unwrap();
    let trivial = path(dir.path(), "trivial.json");
    std::fs::write(&trivial, r#"{"order": 1, "mult": [[0]]}"#).unwrap();
    let t = json(&repstab(&["irreps", "--config", &trivial]));
    assert_eq!(t["dims"], serde_json::json!([1]));

    let broken = path(dir.path(), "broken.json");
    std::fs::write(&broken, r#"{"order": 2, "mult": [[0, 1], [1, 1]]}"#).unwrap();
    assert_eq!(
        repstab(&["irreps", "--config", &broken]).status.code(),
        Some(2)
    );
}

#[test]
fn presets_are_listed() {
    let out = repstab(&["presets"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["Z2_free_Z3", "infinite_dihedral", "hnn_Z4_over_Z2"] {
        assert!(text.contains(name));
    }
}

#[test]
fn stabilize_realized_and_perturbed() {
    let lambda = r#"{"side": "vertex", "blocks": [{"name": "a", "values": [2, 2]}, {"name": "b", "values": [2, 2]}]}"#;
    let report = json(&repstab(&[
        "stabilize",
        "--preset",
        "infinite_dihedral",
        "--lambda",
        lambda,
        "--eps",
        "1e-3",
        "--p",
        "2",
        "--seed",
        "3",
    ]));
    assert!(report["delta"].as_f64().unwrap() > 0.0);
    assert!(report["epsilon"].as_f64().unwrap().is_finite());
    assert!(report["output_defect"].as_f64().unwrap() <= 1e-9);
    assert!(report.get("output").is_none());
}

#[test]
fn zero_perturbation_is_a_fixed_point() {
    let report = json(&repstab(&[
        "stabilize",
        "--preset",
        "hnn_Z4_over_Z2",
        "--dim",
        "8",
        "--eps",
        "0",
        "--dump-matrices",
    ]));
    assert!(report["delta"].as_f64().unwrap() <= 1e-10);
    assert!(report["epsilon"].as_f64().unwrap() <= 1e-7);
    assert_eq!(report["output"]["dim"], 8);
}

#[test]
fn realize_perturb_stabilize_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let exact = path(dir.path(), "exact.json");
    let noisy = path(dir.path(), "noisy.json");
    let report = path(dir.path(), "report.json");
    let g = ["--preset", "S3_amalg_Z4_over_Z2"];
    assert!(
        repstab(&[&["realize"], &g[..], &["--dim", "10", "--out", &exact]].concat())
            .status
            .success()
    );
    assert!(repstab(
        &[
            &["perturb"],
            &g[..],
            &["--rep", &exact, "--eps", "1e-3", "--out", &noisy]
        ]
        .concat()
    )
    .status
    .success());
    let out = repstab(&[&["stabilize"], &g[..], &["--rep", &noisy, "--out", &report]].concat());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(report["output_defect"].as_f64().unwrap() <= 1e-9);
    assert_eq!(report["dim"], 10);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = repstab(&["stabilize", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let unknown = repstab(&["stabilize", "--preset", "no_such_graph"]);
    assert_eq!(unknown.status.code(), Some(2));

    let refused = repstab(&[
        "stabilize",
        "--preset",
        "hnn_Z4_over_Z2",
        "--dim",
        "6",
        "--eps",
        "0.1",
        "--guard",
        "1e-3",
    ]);
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("guard"));
}

fn strip_runtime(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|line| {
            let mut fields: Vec<&str> = line.split(',').collect();
            fields.remove(8);
            fields.join(",")
        })
        .collect()
}

#[test]
fn sweep_rows_are_deterministic() {
    let args = [
        "sweep",
        "--preset",
        "hnn_Z4_over_Z2",
        "--preset",
        "Z2_free_Z3",
        "--dim",
        "6",
        "--eps",
        "1e-2",
        "--eps",
        "1e-3",
        "--p",
        "1",
        "--p",
        "2",
        "--seeds",
        "3",
        "--seed",
        "11",
    ];
    let first = repstab(&args);
    assert!(first.status.success());
    let second = Command::new(env!("CARGO_BIN_EXE_repstab"))
        .args(args)
        .env("REPSTAB_THREADS", "1")
        .output()
        .unwrap();
    let a = String::from_utf8(first.stdout).unwrap();
    let b = String::from_utf8(second.stdout).unwrap();
    assert_eq!(a.lines().count(), 1 + 2 * 2 * 2 * 3);
    assert_eq!(strip_runtime(&a), strip_runtime(&b));
}

#[test]
fn single_cell_sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "out.csv");
    let summary = path(dir.path(), "summary.json");
    let out = repstab(&[
        "sweep",
        "--preset",
        "infinite_dihedral",
        "--dim",
        "6",
        "--eps",
        "1e-3",
        "--p",
        "2",
        "--seeds",
        "1",
        "--out",
        &csv,
        "--summary",
        &summary,
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "preset,seed,p,dim,epsilon_in,delta,epsilon_out,cone_gap,runtime_ms,error"
    );
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(summary[0]["runs"], 1);
    assert_eq!(summary[0]["failures"], 0);
}

#[test]
fn invalid_sweep_grid_is_an_input_error() {
    let out = repstab(&[
        "sweep",
        "--preset",
        "hnn_Z4_over_Z2",
        "--p",
        "0.5",
        "--seeds",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
