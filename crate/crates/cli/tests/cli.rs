use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hrsfer(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrsfer"))
        .args(args)
        .current_dir(dir)
        .env_remove("HRSFER_THREADS")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "exit {:?}\nstderr: {}", o.status.code(), stderr(&o));
    o
}

/// The dB value printed for diversity order `d`.
fn threshold_db(out: &str, d: u32) -> f64 {
    let prefix = format!("d={d}: ");
    let line = out.lines().find(|l| l.starts_with(&prefix)).expect("threshold line");
    line[prefix.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).expect("column");
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn uncoded_threshold_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(hrsfer(&["threshold", "--uncoded", "-L", "100", "-d", "2"], dir.path()));
    assert!((threshold_db(&stdout(&out), 2) - 5.36).abs() <= 0.05);
    let out = ok(hrsfer(
        &["threshold", "--uncoded", "-L", "1", "-d", "1", "--out", "t.csv"],
        dir.path(),
    ));
    assert!((threshold_db(&stdout(&out), 1) + 6.02).abs() <= 0.005);
    let lin = column(&dir.path().join("t.csv"), "gamma_t_linear");
    assert!((lin[0] - 0.25).abs() < 1e-9);
}

#[test]
fn coded_threshold_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(hrsfer(
        &["threshold", "--code", "5,7", "-L", "100", "-d", "3"],
        dir.path(),
    ));
    let db = threshold_db(&stdout(&out), 3);
    assert!((db + 1.26).abs() <= 0.2, "{db}");
}

#[test]
fn calibration_budget_exhaustion_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = hrsfer(
        &["threshold", "--code", "5,7", "-L", "100", "--calib-frames", "50"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn bad_arguments_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hrsfer(&["threshold", "-L", "100"], dir.path()).status.code(), Some(1));
    assert_eq!(
        hrsfer(&["threshold", "--code", "5,9", "-L", "100"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(hrsfer(&["reproduce", "8"], dir.path()).status.code(), Some(1));
    assert_eq!(hrsfer(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn schema_errors_name_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "s.toml",
        "case = 1\nn = 2\n\nstop_rul = { min_errors = 1, max_frames = 2 }\n",
    );
    let out = hrsfer(&["analyze", "s.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("stop_rul") && err.contains("line 4"), "{err}");
}

#[test]
fn analyze_case1_single_relay() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.toml", "case = 1\nn = 1\n");
    ok(hrsfer(&["analyze", "s.toml", "--out", "a.csv"], dir.path()));
    let snr = column(&dir.path().join("a.csv"), "snr_db");
    let fer = column(&dir.path().join("a.csv"), "fer_analytical");
    assert_eq!(snr.len(), 17);
    assert_eq!((snr[0], snr[16]), (0.0, 40.0));
    assert!(fer.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn analyze_approaches_asymptote() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.toml", "case = 1\nn = 2\n");
    ok(hrsfer(&["analyze", "s.toml", "--out", "a.csv"], dir.path()));
    let exact = column(&dir.path().join("a.csv"), "fer_analytical");
    let asym = column(&dir.path().join("a.csv"), "fer_asymptotic");
    let (e, a) = (exact[16], asym[16]);
    assert!((a / e - 1.0).abs() < 0.05, "{e} vs {a}");
}

#[test]
fn weaker_first_hop_raises_fer() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c2.toml", "case = 2\nn = 2\n");
    write(dir.path(), "c3.toml", "case = 3\nn = 2\n");
    ok(hrsfer(&["analyze", "c2.toml", "--out", "c2.csv"], dir.path()));
    ok(hrsfer(&["analyze", "c3.toml", "--out", "c3.csv"], dir.path()));
    let f2 = column(&dir.path().join("c2.csv"), "fer_analytical");
    let f3 = column(&dir.path().join("c3.csv"), "fer_analytical");
    assert!(f3.iter().zip(&f2).all(|(a, b)| a >= b));
}

const SIM: &str = "case = 1\nn = 2\nsnr_grid_db = { start = 0.0, stop = 15.0, step = 2.5 }\n\
                   stop_rule = { min_errors = 200, max_frames = 400000 }\nseed = 7\n";

#[test]
fn simulate_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.toml", SIM);
    ok(hrsfer(
        &["simulate", "s.toml", "--out", "a.csv", "--threads", "1"],
        dir.path(),
    ));
    ok(hrsfer(
        &["simulate", "s.toml", "--out", "b.csv", "--threads", "3"],
        dir.path(),
    ));
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("snr_db,scheme,frames,errors,fer,ci_low,ci_high\n"));
}

#[test]
fn simulation_matches_analysis_through_compare_gate() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.toml", SIM);
    ok(hrsfer(&["simulate", "s.toml", "--out", "sim.csv"], dir.path()));
    ok(hrsfer(&["analyze", "s.toml", "--out", "ana.csv"], dir.path()));
    ok(hrsfer(
        &[
            "compare",
            "sim.csv",
            "ana.csv",
            "--tolerance",
            "0.25",
            "--out",
            "cmp.csv",
        ],
        dir.path(),
    ));
    // the high-SNR form is far off at low SNR and must trip the gate
    let out = hrsfer(
        &["compare", "sim.csv", "ana.csv:fer_asymptotic", "--tolerance", "0.25"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_identical_and_mismatched() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.csv", "snr_db,fer\n0,0.5\n5,0.1\n10,0.01\n");
    write(dir.path(), "b.csv", "snr_db,fer\n0,0.5\n7,0.1\n");
    ok(hrsfer(
        &["compare", "a.csv", "a.csv", "--tolerance", "0", "--out", "j.csv"],
        dir.path(),
    ));
    let errs = column(&dir.path().join("j.csv"), "relerr_a:fer#2");
    assert!(errs.iter().all(|&e| e == 0.0));
    let out = hrsfer(&["compare", "a.csv", "b.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("grid mismatch"));
}

#[test]
fn reproduce_mimo_proposed_beats_legacy() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(hrsfer(
        &[
            "reproduce",
            "0",
            "--grid",
            "15:40:5",
            "--min-errors",
            "500",
            "--max-frames",
            "100000",
            "--out-dir",
            "r",
        ],
        dir.path(),
    ));
    let text = stdout(&out);
    for n in [2, 4] {
        let line = text
            .lines()
            .find(|l| l.contains(&format!("n{n}: proposed model closer")))
            .expect("summary line");
        assert!(line.contains("at 6/6 points"), "{line}");
    }
    let svg = std::fs::read_to_string(dir.path().join("r/case0.fer.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn reproduce_report_loads_back_through_compare() {
    let dir = tempfile::tempdir().unwrap();
    ok(hrsfer(
        &[
            "reproduce",
            "1",
            "--min-errors",
            "50",
            "--max-frames",
            "20000",
            "--out-dir",
            "r",
        ],
        dir.path(),
    ));
    let report = dir.path().join("r/case1.report.csv");
    for n in [1, 2, 4] {
        for col in [
            "analytical",
            "asymptotic",
            "sim",
            "sim_ci_low",
            "sim_ci_high",
            "relerr_analytical",
        ] {
            column_exists(&report, &format!("n{n}_{col}"));
        }
    }
    ok(hrsfer(
        &[
            "compare",
            "r/case1.report.csv:n2_analytical",
            "r/case1.report.csv:n2_analytical",
            "--tolerance",
            "0",
            "--min-fer",
            "0",
        ],
        dir.path(),
    ));
}

fn column_exists(path: &Path, name: &str) {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert!(r.headers().unwrap().iter().any(|h| h == name), "missing {name}");
}

#[test]
fn reproduce_case4_overlays_af_and_pdf() {
    let dir = tempfile::tempdir().unwrap();
    ok(hrsfer(
        &[
            "reproduce",
            "4",
            "--no-sim",
            "--calib-errors",
            "20",
            "--calib-frames",
            "20000",
            "--out-dir",
            "r",
        ],
        dir.path(),
    ));
    let report = dir.path().join("r/case4.report.csv");
    let hrs = column(&report, "n4_analytical");
    let af = column(&report, "n4_afrs_analytical");
    let pdf = column(&report, "n4_pdfrs_analytical");
    for i in 0..hrs.len() {
        assert!(
            pdf[i] <= hrs[i] * (1.0 + 1e-12) && hrs[i] <= af[i] * (1.0 + 1e-12),
            "row {i}"
        );
    }
    assert!(dir.path().join("r/case4.calibration.csv").is_file());
}
