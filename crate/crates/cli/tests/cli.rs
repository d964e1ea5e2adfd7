use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use perfcal::algomodel::{predict, ModelOptions};
use perfcal::profile::{DistanceTable, EfficiencyCurve, ProcessDistanceTable};
use perfcal::{gen_synthetic_profile, Algorithm, MachineProfile, Scenario, SyntheticParams, Variant};
use tempfile::TempDir;

fn perfcal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perfcal")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_profile(dir: &TempDir, name: &str, profile: &MachineProfile) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, profile.to_json_string()).unwrap();
    path
}

fn synthetic(dir: &TempDir) -> PathBuf {
    write_profile(dir, "synthetic.json", &gen_synthetic_profile(&SyntheticParams::default()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn predict_prints_total_percent_and_phases() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let out = perfcal(&["predict", "--profile", s(&prof), "--algo", "cannon", "--variant", "2d", "--n", "4096", "--p", "64", "--t", "6"]);
    let text = stdout(&out);
    assert!(text.starts_with("cannon 2d  n=4096 p=64 c=1 r=1 t=6"), "{text}");
    assert!(text.contains("total_s"));
    assert!(text.contains("percent_peak"));
    for phase in ["row-shifts", "col-shifts", "dgemm"] {
        assert!(text.contains(phase), "{text}");
    }
}

#[test]
fn predict_csv_is_one_row() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let out = perfcal(&[
        "predict", "--profile", s(&prof), "--algo", "cannon", "--variant", "2d", "--n", "4096", "--p", "64", "--format", "csv",
    ]);
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "algo,variant,n,p,c,r,t,total_s,percent_peak");
    assert!(lines[1].starts_with("cannon,2d,4096,64,1,1,6,"));
}

#[test]
fn non_square_process_count_exits_1() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let out = perfcal(&["predict", "--profile", s(&prof), "--algo", "cannon", "--variant", "2d", "--n", "4096", "--p", "60"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: invalid-scenario:"), "{err}");
    assert!(err.contains("p = 60 is not a perfect square"), "{err}");
}

#[test]
fn missing_profile_exits_2() {
    let out = perfcal(&["validate-profile", "--profile", "/nonexistent/profile.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: io:"));
}

#[test]
fn invalid_profile_exits_1_with_every_violation() {
    let dir = TempDir::new().unwrap();
    let mut bad = gen_synthetic_profile(&SyntheticParams::default());
    bad.calib_avg = DistanceTable::new(vec![(1, 0.5), (2, 1.2)]);
    bad.latency_s = -1.0;
    let path = write_profile(&dir, "bad.json", &bad);
    let out = perfcal(&["validate-profile", "--profile", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("factor < 1") && err.contains("latency_s"), "{err}");

    std::fs::write(&path, "{ \"name\": ").unwrap();
    let out = perfcal(&["validate-profile", "--profile", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: parse:"));
}

#[test]
fn validate_accepts_generated_profile() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let text = stdout(&perfcal(&["validate-profile", "--profile", s(&prof)]));
    assert!(text.starts_with("ok: synthetic-xe6"));
}

#[test]
fn gen_profile_to_stdout_loads() {
    let text = stdout(&perfcal(&["gen-profile", "--name", "mine"]));
    let p = MachineProfile::from_json_str(&text).unwrap();
    assert_eq!(p.name, "mine");
    assert_eq!(p.peak_flops_per_core, 8.4e9);
}

fn trace_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn trace_cannon_2d_has_six_rows_and_footer() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let text = stdout(&perfcal(&["trace", "--profile", s(&prof), "--algo", "cannon", "--variant", "2d", "--n", "1024", "--p", "4", "--out", ""]));
    assert!(text.starts_with("iteration,label,kind,seconds\n"));
    let rows = trace_rows(&text);
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[6][1], "total");
}

#[test]
fn trace_footer_matches_predict_total() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let cases: [&[&str]; 4] = [
        &["--algo", "cannon", "--variant", "2d_ovlp", "--n", "8192", "--p", "256"],
        &["--algo", "cannon", "--variant", "25d", "--n", "8192", "--p", "256", "--c", "4"],
        &["--algo", "trsm", "--variant", "2d", "--n", "8192", "--p", "64", "--r", "2"],
        &["--algo", "trsm", "--variant", "25d_ovlp", "--n", "8192", "--p", "128", "--r", "2"],
    ];
    for case in cases {
        let mut base = vec!["--profile", s(&prof)];
        base.extend_from_slice(case);
        let mut t = vec!["trace"];
        t.extend_from_slice(&base);
        let rows = trace_rows(&stdout(&perfcal(&t)));
        let footer = rows.last().unwrap()[3].clone();
        let mut p = vec!["predict"];
        p.extend_from_slice(&base);
        p.extend_from_slice(&["--format", "csv"]);
        let pred = trace_rows(&stdout(&perfcal(&p)));
        assert_eq!(footer, pred[0][7], "{case:?}");
    }
}

#[test]
fn trace_writes_to_file() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let out = dir.path().join("trace.csv");
    let text = stdout(&perfcal(&[
        "trace", "--profile", s(&prof), "--algo", "cannon", "--variant", "2d", "--n", "1024", "--p", "4", "--out", s(&out),
    ]));
    assert!(text.is_empty());
    assert_eq!(trace_rows(&std::fs::read_to_string(out).unwrap()).len(), 7);
}

#[test]
fn rank_single_cell_one_winner() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let text = stdout(&perfcal(&["rank", "--profile", s(&prof), "--algo", "cannon", "--n", "8192", "--p", "256", "--format", "csv"]));
    let rows = trace_rows(&text);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().filter(|r| r[6] == "1").count(), 1);
    let table = stdout(&perfcal(&["rank", "--profile", s(&prof), "--algo", "cannon", "--n", "8192", "--p", "256"]));
    assert_eq!(table.lines().count(), 2);
    assert_eq!(table.matches('*').count(), 1);
}

#[test]
fn rank_cells_equal_predict_values() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let text = stdout(&perfcal(&[
        "rank", "--profile", s(&prof), "--algo", "trsm", "--n", "4096,8192", "--p", "64,256", "--r", "2", "--format", "csv",
    ]));
    for row in trace_rows(&text) {
        let mut args = vec![
            "predict", "--profile", s(&prof), "--algo", "trsm", "--variant", &row[2], "--n", &row[0], "--p", &row[1], "--r", "2",
            "--format", "csv",
        ];
        if !row[3].is_empty() {
            args.extend_from_slice(&["--c", &row[3]]);
        }
        let pred = trace_rows(&stdout(&perfcal(&args)));
        assert_eq!(pred[0][7], row[4], "{row:?}");
        assert_eq!(pred[0][8], row[5], "{row:?}");
    }
}

#[test]
fn rank_reports_invalid_cells() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let text = stdout(&perfcal(&["rank", "--profile", s(&prof), "--algo", "cannon", "--n", "4096", "--p", "60,64"]));
    assert!(text.contains("skipped: n=4096 p=60 2d:"), "{text}");
    let csv = stdout(&perfcal(&["rank", "--profile", s(&prof), "--algo", "cannon", "--n", "4096", "--p", "60,64", "--format", "csv"]));
    let rows = trace_rows(&csv);
    assert_eq!(rows.len(), 8);
    assert!(rows[..4].iter().all(|r| !r[7].is_empty()));
}

/// Unit calibration, a negligible network and kernels running at a fixed
/// fraction of peak at every size.
fn all_unit_profile() -> MachineProfile {
    let rate = 1e9;
    let curve = |kernel: &str, flops_per_cube: f64| EfficiencyCurve {
        kernel: kernel.into(),
        threads: 6,
        samples: [64u64, 1 << 16].iter().map(|&d| (d, flops_per_cube * (d as f64).powi(3) / rate)).collect(),
    };
    MachineProfile {
        name: "unit".into(),
        latency_s: 1e-300,
        inv_bandwidth_s_per_word: 1e-300,
        peak_flops_per_core: 1e9,
        cores_per_process: 6,
        kernels: vec![curve("dgemm", 2.0), curve("dtrsm", 1.0)],
        calib_avg: DistanceTable::new(vec![(1, 1.0)]),
        calib_max: ProcessDistanceTable::new(vec![(2, 1, 1.0)]),
    }
}

#[test]
fn zero_cost_network_favours_full_compute_threads() {
    let dir = TempDir::new().unwrap();
    let prof = all_unit_profile();
    let path = write_profile(&dir, "unit.json", &prof);
    for algo in ["cannon", "trsm"] {
        let csv = stdout(&perfcal(&["rank", "--profile", s(&path), "--algo", algo, "--n", "8192", "--p", "64,256", "--format", "csv"]));
        let rows = trace_rows(&csv);
        assert_eq!(rows.iter().filter(|r| r[6] == "1").count(), 2);
        for row in rows.iter().filter(|r| r[6] == "1") {
            assert!(!row[2].ends_with("_ovlp"), "{algo}: {row:?}");
        }
    }
    // the overlapped solve gives one thread to communication
    let sc = Scenario::new(Algorithm::Trsm, Variant::TwoD, 8192, 64, 1, 1, 6);
    let so = Scenario { variant: Variant::TwoDOverlap, ..sc };
    let a = predict(&prof, &sc, ModelOptions::default()).unwrap().total_s;
    let b = predict(&prof, &so, ModelOptions::default()).unwrap().total_s;
    assert!(a < b);
}

#[test]
fn extrapolate_writes_new_profile() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let before = std::fs::read(&prof).unwrap();
    let out = dir.path().join("ext.json");
    stdout(&perfcal(&["extrapolate", "--profile", s(&prof), "--target", "16384", "--out", s(&out)]));
    assert_eq!(std::fs::read(&prof).unwrap(), before);
    let ext = MachineProfile::from_json_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(ext.calib_max.process_counts().any(|p| p == 16384));
    let stdout_ok = stdout(&perfcal(&["validate-profile", "--profile", s(&out)]));
    assert!(stdout_ok.starts_with("ok:"));
}

#[test]
fn extrapolate_rejects_target_inside_range() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let out = perfcal(&["extrapolate", "--profile", s(&prof), "--target", "1024"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("target not beyond sampled range"));
}

#[test]
fn extrapolate_rejects_insufficient_samples() {
    let dir = TempDir::new().unwrap();
    let mut p = gen_synthetic_profile(&SyntheticParams::default());
    p.calib_max = ProcessDistanceTable::new(vec![(64, 1, 2.0), (128, 1, 2.5)]);
    p.calib_avg = DistanceTable::new(vec![(1, 1.5)]);
    let path = write_profile(&dir, "few.json", &p);
    let out = perfcal(&["extrapolate", "--profile", s(&path), "--target", "4096", "--degree", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("insufficient samples"));
}

#[test]
fn bad_layer_list_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let prof = synthetic(&dir);
    let out = perfcal(&["rank", "--profile", s(&prof), "--algo", "cannon", "--n", "4096", "--p", "64", "--c", "two"]);
    assert_eq!(out.status.code(), Some(1));
}
