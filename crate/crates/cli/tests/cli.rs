use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn nls5(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nls5")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

/// Rows of a CSV file without its header.
fn rows(path: PathBuf) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    v.sort();
    v
}

/// Every output except the echoed config (which records its own directory)
/// must match byte for byte.
fn assert_same_outputs(a: &Path, b: &Path) {
    assert_eq!(files(a), files(b));
    for f in files(a).iter().filter(|f| *f != "config.json") {
        assert!(std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn soliton_figure1_frames_and_summary() {
    let tmp = TempDir::new().unwrap();
    let o = nls5(&["soliton", "--preset", "figure1", "--t", "0,5,10", "--out", "d"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tmp.path().join("d");
    for f in ["frame_000.csv", "frame_001.csv", "frame_002.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let s = read_json(dir.join("summary.json"));
    let sol = &s["solitons"][0];
    assert!((num(&sol["amplitude"]) - 0.6).abs() < 1e-12);
    assert!((num(&sol["velocity"]) + 0.2816).abs() < 1e-12);
    assert_eq!(s["label"], "figure1 (published)");
    assert_eq!(s["frames"][1]["t"], 5.0);
    // frame at t = 5 peaks at 0.6 near x = 5 V
    let r = rows(dir.join("frame_001.csv"));
    let peak = r.iter().max_by(|a, b| a[4].total_cmp(&b[4])).unwrap();
    assert!((peak[0] - 5.0 * -0.2816).abs() < 0.05 && (peak[4] - 0.6).abs() < 1e-3, "{peak:?}");
}

#[test]
fn duplicate_eigenvalue_is_bad_input() {
    let tmp = TempDir::new().unwrap();
    let o = nls5(&["soliton", "--zeta", "0.2+0.3i", "--zeta", "0.2+0.3i", "--out", "d"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate"));
}

#[test]
fn nls_reduction_moves_at_minus_two_a() {
    let tmp = TempDir::new().unwrap();
    let o = nls5(&["soliton", "--preset", "figure1", "--reduce", "nls", "--out", "d"], tmp.path());
    assert_eq!(code(&o), 0);
    let s = read_json(tmp.path().join("d/summary.json"));
    assert!((num(&s["solitons"][0]["velocity"]) + 0.4).abs() < 1e-15);
    assert_eq!(s["coeffs"]["c5"], 0.0);
}

#[test]
fn inline_two_soliton_with_norming_constants() {
    let tmp = TempDir::new().unwrap();
    let args = ["soliton", "--zeta", "-0.15+0.25i", "--zeta", "0.2+0.3i", "--alpha-k", "2", "--coeffs", "0.5,-0.2,0.1", "--t", "-1:1:1", "--out", "d"];
    let o = nls5(&args, tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(tmp.path().join("d/summary.json"));
    assert_eq!(s["frames"].as_array().unwrap().len(), 3);
    assert!((num(&s["solitons"][0]["amplitude"]) - 0.5).abs() < 1e-12);
    assert_eq!(s["label"], "user");
}

#[test]
fn bad_flags_exit_two() {
    let tmp = TempDir::new().unwrap();
    for args in [
        &["soliton", "--preset", "figure7"][..],
        &["soliton", "--zeta", "0.2+0.3q"],
        &["soliton", "--zeta", "0.2-0.3i"],
        &["soliton", "--preset", "figure1", "--nx", "1000"],
        &["soliton", "--preset", "figure1", "--xmin", "-5"],
        &["simulate", "--preset", "figure1", "--dt", "-1"],
        &["simulate", "--init", "missing.csv"],
        &["validate", "--suite", "everything"],
        &["bogus"],
    ] {
        assert_eq!(code(&nls5(args, tmp.path())), 2, "{args:?}");
    }
}

#[test]
fn validate_single_zero_curvature_verdict() {
    let tmp = TempDir::new().unwrap();
    let o = nls5(&["validate", "--suite", "zero-curvature", "--zeta", "0.7+0.1i", "--out", "v"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(tmp.path().join("v/report.json"));
    let verdicts = r["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 1);
    assert_eq!(verdicts[0]["name"], "zero_curvature");
    assert!(num(&verdicts[0]["value"]) < 1e-5);
    let entries = r["cases"][0]["report"]["zero_curvature"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["zeta"][0], 0.7);
}

#[test]
fn validate_full_suite_passes() {
    let tmp = TempDir::new().unwrap();
    let o = nls5(&["validate", "--suite", "all", "--out", "v"], tmp.path());
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    let r = read_json(tmp.path().join("v/report.json"));
    assert_eq!(r["pass"], true);
    let cases = r["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 2);
    for c in cases {
        assert!(num(&c["report"]["residual_inf"]) < 1e-5);
        assert_eq!(c["report"]["zero_curvature"].as_array().unwrap().len(), 5);
    }
    assert!(cases[0]["convergence"].is_object());
}

#[test]
fn validate_rejects_non_finite_coefficients() {
    let tmp = TempDir::new().unwrap();
    let cfg = r#"{"coeffs": {"c3": 1, "c4": 1, "c5": NaN}, "solitons": [{"zeta": [0.2, 0.3], "alpha": [1, 0], "beta": [1, 0]}]}"#;
    std::fs::write(tmp.path().join("nan.json"), cfg).unwrap();
    assert_eq!(code(&nls5(&["validate", "--config", "nan.json"], tmp.path())), 2);
    let o = nls5(&["validate", "--preset", "figure1", "--coeffs", "1,1,NaN", "--suite", "residual"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("finite"));
}

#[test]
fn validate_fails_on_a_box_too_coarse() {
    // on [-40, 40] with 64 points the fifth derivative is badly resolved
    let tmp = TempDir::new().unwrap();
    let args = ["validate", "--preset", "figure1", "--suite", "residual", "--xmin", "-40", "--xmax", "40", "--nx", "64", "--out", "v"];
    let o = nls5(&args, tmp.path());
    assert_eq!(code(&o), 1);
    assert_eq!(read_json(tmp.path().join("v/report.json"))["pass"], false);
}

#[test]
fn simulate_tracks_exact_solution() {
    let tmp = TempDir::new().unwrap();
    let o = nls5(&["simulate", "--preset", "figure1", "--t-end", "5", "--compare-exact", "--out", "s"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = read_json(tmp.path().join("s/diagnostics.json"));
    assert!(num(&d["max_error"]) < 1e-5);
    assert_eq!(d["t_end"], 5.0);
    let index = read_json(tmp.path().join("s/index.json"));
    let frames = index.as_array().unwrap();
    assert_eq!(frames.last().unwrap()["t"], 5.0);
    assert!(tmp.path().join("s").join(frames[0]["file"].as_str().unwrap()).exists());
}

#[test]
fn simulate_zero_data_stays_zero() {
    let tmp = TempDir::new().unwrap();
    let mut csv = String::from("x,t,re,im,abs\n");
    for i in 0..64 {
        csv.push_str(&format!("{},0,0,0,0\n", -10.0 + 20.0 * i as f64 / 64.0));
    }
    std::fs::write(tmp.path().join("zero.csv"), csv).unwrap();
    let o = nls5(&["simulate", "--init", "zero.csv", "--t-end", "1", "--out", "s"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let index = read_json(tmp.path().join("s/index.json"));
    for f in index.as_array().unwrap() {
        let r = rows(tmp.path().join("s").join(f["file"].as_str().unwrap()));
        assert_eq!(r.len(), 64);
        assert!(r.iter().all(|row| row[2] == 0.0 && row[3] == 0.0));
    }
    assert_eq!(index.as_array().unwrap().last().unwrap()["t"], 1.0);
}

#[test]
fn simulate_collision_keeps_peak_amplitudes() {
    let tmp = TempDir::new().unwrap();
    let o = nls5(&["simulate", "--preset", "figure4", "--t-end", "60", "--from", "-30", "--out", "s"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = read_json(tmp.path().join("s/diagnostics.json"));
    assert_eq!((num(&d["t_start"]), num(&d["t_end"])), (-30.0, 30.0));
    let last: Vec<f64> = d["peaks"]["last"].as_array().unwrap().iter().map(|p| num(&p["value"])).collect();
    assert_eq!(last.len(), 2);
    assert!((last[0] - 0.6).abs() < 1e-3 && (last[1] - 0.5).abs() < 1e-3, "{last:?}");
    assert!(d["verdicts"].as_array().unwrap().iter().all(|v| v["pass"] == true));
}

#[test]
fn simulate_blow_up_reports_last_frame() {
    let tmp = TempDir::new().unwrap();
    let o = nls5(&["simulate", "--preset", "figure1", "--scheme", "lawson", "--t-end", "1", "--out", "s"], tmp.path());
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("last_good.csv"), "{err}");
    let d = read_json(tmp.path().join("s/diagnostics.json"));
    assert_eq!(d["blow_up"]["last_frame"], "last_good.csv");
    assert!(!rows(tmp.path().join("s/last_good.csv")).is_empty());
}

#[test]
fn figure1_ridge_follows_velocity() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&nls5(&["figures", "--figure", "1", "--out", "f"], tmp.path())), 0);
    let meta = read_json(tmp.path().join("f/figure1.json"));
    assert_eq!(meta["provenance"], "published");
    let v = num(&meta["ridge"]["velocity"]);
    assert!((v + 0.2816).abs() < 1e-12);
    let r = rows(tmp.path().join("f/figure1_abs_surface.csv"));
    assert_eq!(r.len(), 201 * 201);
    let dx = 0.2;
    for row in r.chunks(201) {
        let t = row[0][1];
        let crest = row.iter().max_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
        assert!((crest[0] - v * t).abs() <= dx / 2.0 + 1e-9, "t={t}: crest at {}", crest[0]);
        assert!((crest[2] - 0.6).abs() < 5e-3);
    }
    let max = r.iter().map(|row| row[2]).fold(0.0, f64::max);
    assert!((max - 0.6).abs() < 1e-12, "{max}");
    assert_eq!(meta["slices"].as_array().unwrap().len(), 3);
}

#[test]
fn figure3_imaginary_part_within_envelope() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&nls5(&["figures", "--figure", "3", "--out", "f"], tmp.path())), 0);
    let r = rows(tmp.path().join("f/figure3_im_surface.csv"));
    assert!(r.iter().all(|row| row[2].abs() <= 0.6 + 1e-12));
    assert!(r.iter().any(|row| row[2] < -0.3) && r.iter().any(|row| row[2] > 0.3));
}

#[test]
fn figure4_is_labelled_reconstruction() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&nls5(&["figures", "--figure", "4", "--out", "f"], tmp.path())), 0);
    let meta = read_json(tmp.path().join("f/figure4.json"));
    assert_eq!(meta["provenance"], "reconstruction");
    let parts: Vec<&str> = meta["surfaces"].as_array().unwrap().iter().map(|s| s["part"].as_str().unwrap()).collect();
    assert_eq!(parts, ["abs", "re", "im"]);
    assert!(meta["ridge"].is_null());
}

#[test]
fn unknown_figure_exits_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&nls5(&["figures", "--figure", "9"], tmp.path())), 2);
    assert_eq!(code(&nls5(&["figures"], tmp.path())), 2);
}

#[test]
fn echoed_config_reproduces_outputs() {
    let tmp = TempDir::new().unwrap();
    let runs: [&[&str]; 4] = [
        &["soliton", "--preset", "figure4", "--reduce", "hirota", "--t", "-2:1:2", "--nx", "512"],
        &["simulate", "--zeta", "0.1+0.4i", "--coeffs", "0.3,0.2,-0.1", "--t-end", "0.5", "--nx", "512", "--compare-exact"],
        &["validate", "--preset", "figure2", "--suite", "residual", "--t", "0,1"],
        &["figures", "--figure", "5", "--nx", "41", "--t", "-20:10:20"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let first = format!("a{i}");
        let mut a: Vec<&str> = args.to_vec();
        a.extend(["--out", &first]);
        let o = nls5(&a, tmp.path());
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let echoed = format!("{first}/config.json");
        let second = format!("b{i}");
        let o = nls5(&[args[0], "--config", &echoed, "--out", &second], tmp.path());
        assert_eq!(code(&o), 0, "{args:?} rerun: {}", String::from_utf8_lossy(&o.stderr));
        assert_same_outputs(&tmp.path().join(&first), &tmp.path().join(&second));
        let mut c1 = read_json(tmp.path().join(&echoed));
        let mut c2 = read_json(tmp.path().join(&second).join("config.json"));
        c1["output"]["dir"] = Value::Null;
        c2["output"]["dir"] = Value::Null;
        assert_eq!(c1, c2, "{args:?}");
    }
}

#[test]
fn flags_override_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = r#"{"preset": "figure1", "grid": {"x_min": -10, "x_max": 10, "n": 256}, "output": {"times": [0, 1]}}"#;
    std::fs::write(tmp.path().join("c.json"), cfg).unwrap();
    let o = nls5(&["soliton", "--config", "c.json", "--nx", "128", "--t", "2", "--out", "d"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let echoed = read_json(tmp.path().join("d/config.json"));
    assert_eq!(echoed["grid"]["n"], 128);
    assert_eq!(echoed["grid"]["x_min"], -10.0);
    assert_eq!(echoed["output"]["times"], serde_json::json!([2.0]));
    assert_eq!(rows(tmp.path().join("d/frame_000.csv")).len(), 128);
    std::fs::write(tmp.path().join("typo.json"), r#"{"grid": {"nx": 64}}"#).unwrap();
    assert_eq!(code(&nls5(&["soliton", "--config", "typo.json", "--preset", "figure1"], tmp.path())), 2);
}

#[test]
fn thread_cap_does_not_change_output() {
    let tmp = TempDir::new().unwrap();
    let run = |threads: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_nls5"))
            .args(["figures", "--figure", "2", "--nx", "101", "--out", out])
            .env("NLS5_THREADS", threads)
            .current_dir(tmp.path())
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1", "one")), 0);
    assert_eq!(code(&run("0", "auto")), 0);
    assert_same_outputs(&tmp.path().join("one"), &tmp.path().join("auto"));
    assert_eq!(code(&run("many", "bad")), 2);
}
