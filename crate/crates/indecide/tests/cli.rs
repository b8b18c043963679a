use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

const BIN: &str = env!("CARGO_BIN_EXE_indecide");

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("indecide-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("INDECIDE_WORKERS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn kv(path: &Path, key: &str) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.split_once(" = ").filter(|(k, _)| *k == key).map(|(_, v)| v.to_string()))
        .unwrap_or_else(|| panic!("{key} missing in {}", path.display()))
}

#[test]
fn accuracy_golden_selects_point_eight() {
    let dir = scratch("acc");
    let o = run(&[
        "calibrate", "--mode", "accuracy", "--input", golden("accuracy_5.csv").to_str().unwrap(),
        "--alpha", "0.1", "--out-dir", dir.to_str().unwrap(), "--trace",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = dir.join("report.txt");
    assert_eq!(kv(&report, "tau").parse::<f64>().unwrap(), 0.8);
    assert_eq!(kv(&report, "gamma_hat").parse::<f64>().unwrap(), 0.4);
    assert_eq!(kv(&report, "feasible"), "true");
    assert_eq!(kv(&dir.join("rule.txt"), "rule"), "selective");
    assert!(dir.join("trace.csv").exists() && dir.join("manifest.txt").exists());
}

#[test]
fn np_golden_trace_is_byte_identical() {
    let dir = scratch("np");
    let third = "0.3333333333333333";
    let o = run(&[
        "calibrate", "--mode", "np", "--input", golden("np_6.csv").to_str().unwrap(), "--alpha1", third,
        "--alpha2", third, "--out-dir", dir.to_str().unwrap(), "--trace",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let got = fs::read(dir.join("trace.csv")).unwrap();
    let want = fs::read(golden("np_6_trace.csv")).unwrap();
    assert_eq!(String::from_utf8(got).unwrap(), String::from_utf8(want).unwrap());
    let report = dir.join("report.txt");
    assert_eq!(kv(&report, "tau1").parse::<f64>().unwrap(), 0.55);
    assert_eq!(kv(&report, "tau2").parse::<f64>().unwrap(), 0.7);
}

#[test]
fn infeasible_calibration_exits_two() {
    let dir = scratch("infeasible");
    let input = dir.join("flipped.csv");
    fs::write(&input, "score,label\n0.9,2\n0.8,2\n0.2,1\n").unwrap();
    let o = run(&["calibrate", "--mode", "accuracy", "--input", input.to_str().unwrap(), "--alpha", "0.01"]);
    assert_eq!(code(&o), 2);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("feasible = false") && text.contains("tau = inf"), "{text}");
}

#[test]
fn schema_and_usage_errors_exit_one() {
    let dir = scratch("schema");
    let input = dir.join("bad.csv");
    fs::write(&input, "score,lable\n0.9,1\n").unwrap();
    let o = run(&["calibrate", "--mode", "accuracy", "--input", input.to_str().unwrap(), "--alpha", "0.1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    fs::write(&input, "score,label\n0.9,1\n0.4,3\n").unwrap();
    let o = run(&["calibrate", "--mode", "accuracy", "--input", input.to_str().unwrap(), "--alpha", "0.1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = run(&["calibrate", "--mode", "accuracy", "--input", golden("accuracy_5.csv").to_str().unwrap(), "--alpha", "1.5"]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&run(&["calibrate", "--mode", "sideways"])), 1);
    assert_eq!(code(&run(&["experiment", "no-such-thing"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

fn apply(rule: &str, scores: &str, name: &str) -> (i32, String) {
    let dir = scratch(name);
    fs::write(dir.join("rule.txt"), rule).unwrap();
    fs::write(dir.join("scores.csv"), scores).unwrap();
    let o = run(&[
        "apply", "--rule", dir.join("rule.txt").to_str().unwrap(), "--input", dir.join("scores.csv").to_str().unwrap(),
    ]);
    (code(&o), String::from_utf8(o.stdout).unwrap())
}

fn decisions(text: &str) -> Vec<String> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect()
}

#[test]
fn apply_examples() {
    let (c, out) = apply(
        "format = indecide-rule\nversion = 1\nrule = selective\ntau = 0.8\n",
        "score\n0.9\n0.7\n0.15\n",
        "apply-sel",
    );
    assert_eq!(c, 0);
    assert_eq!(decisions(&out), ["1", "abstain", "2"]);
    assert!(out.ends_with("# n=3 abstained=1 abstention_fraction=3.3333333333333331e-1\n"), "{out}");

    let (c, out) = apply(
        "format = indecide-rule\nversion = 1\nrule = np\ntau1 = 0.2\ntau2 = 0.6\n",
        "score,label\n0.1,2\n0.4,1\n0.9,1\n",
        "apply-np",
    );
    assert_eq!(c, 0);
    assert_eq!(decisions(&out), ["2", "abstain", "1"]);

    let (c, out) = apply("format = indecide-rule\nversion = 1\nrule = np\ntau1 = 0.2\ntau2 = 0.6\n", "score\n", "apply-empty");
    assert_eq!(c, 0);
    assert_eq!(out, "index,decision\n# n=0 abstained=0 abstention_fraction=0.0000000000000000e0\n");

    let (c, _) = apply("format = indecide-rule\nversion = 1\nrule = mlr\ntau1 = 1\ntau2 = 0\n", "score\n0.3\n", "apply-mismatch");
    assert_eq!(c, 1);
}

#[test]
fn calibrate_then_apply_reuses_the_rule() {
    let dir = scratch("reuse");
    let o = run(&[
        "calibrate", "--mode", "accuracy", "--input", golden("accuracy_5.csv").to_str().unwrap(), "--alpha", "0.1",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = run(&[
        "apply", "--rule", dir.join("report.txt").to_str().unwrap(), "--input",
        golden("accuracy_5.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(decisions(&String::from_utf8(o.stdout).unwrap()), ["1", "1", "abstain", "abstain", "2"]);
}

#[test]
fn fit_predict_calibrate_pipeline() {
    let dir = scratch("pipeline");
    let mut csv = String::from("f_1,f_2,label\n");
    for i in 0..60 {
        let label = if i % 2 == 0 { 1 } else { 2 };
        let shift = if label == 1 { 1.0 } else { -1.0 };
        let x1 = shift + ((i * 37 % 11) as f64 - 5.0) / 4.0;
        let x2 = ((i * 13 % 7) as f64 - 3.0) / 3.0;
        csv.push_str(&format!("{x1},{x2},{label}\n"));
    }
    let features = dir.join("features.csv");
    fs::write(&features, csv).unwrap();
    for model in ["lda", "logistic"] {
        let mdir = dir.join(model);
        let o = run(&["fit", "--model", model, "--input", features.to_str().unwrap(), "--out-dir", mdir.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let o = run(&[
            "predict", "--model", mdir.join("model.txt").to_str().unwrap(), "--input", features.to_str().unwrap(),
            "--out-dir", mdir.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let o = run(&[
            "calibrate", "--mode", "np", "--input", mdir.join("scores.csv").to_str().unwrap(), "--alpha1", "0.2",
            "--alpha2", "0.2",
        ]);
        assert!(matches!(code(&o), 0 | 2), "{}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn oracle_queries() {
    let o = run(&["oracle", "--delta", "1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let risk: f64 = text.lines().find_map(|l| l.strip_prefix("risk = ")).unwrap().parse().unwrap();
    assert!((risk - 0.15866).abs() < 5e-4);
    let o = run(&["oracle", "--c", "0.75", "--delta-target", "1e-15"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let m_star: f64 = text.lines().find_map(|l| l.strip_prefix("m_star = ")).unwrap().parse().unwrap();
    assert_eq!(m_star, 0.25);
    assert_eq!(code(&run(&["oracle", "--delta", "1", "--c", "0.7"])), 1);
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn experiments_are_deterministic_across_worker_counts() {
    let base = scratch("determinism");
    let config = base.join("small.toml");
    fs::write(&config, "reps = 6\nn_train = 200\nn_cal = 200\nn_test = 200\ndelta_grid = [0.5, 1.0, 2.0]\n").unwrap();
    for name in ["accuracy-sweep", "np-sweep"] {
        let mut seen = Vec::new();
        for workers in ["1", "3"] {
            let dir = base.join(format!("{name}-{workers}"));
            let o = run(&[
                "experiment", name, "--config", config.to_str().unwrap(), "--seed", "7", "--workers", workers,
                "--out-dir", dir.to_str().unwrap(),
            ]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            seen.push(read_outputs(&dir));
        }
        assert_eq!(seen[0], seen[1], "{name}");
        assert!(seen[0].iter().any(|(f, _)| f == "manifest.txt"));
    }
}

#[test]
fn workers_env_var_is_validated() {
    let o = Command::new(BIN)
        .args(["experiment", "plugin-consistency", "--out-dir"])
        .arg(scratch("env"))
        .env("INDECIDE_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn config_schema_errors_exit_one() {
    let dir = scratch("badcfg");
    let config = dir.join("bad.toml");
    fs::write(&config, "reps = 2\nresolution = 10\n").unwrap();
    let o = run(&["experiment", "np-sweep", "--config", config.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    fs::write(&config, "reps = \"many\"\n").unwrap();
    let o = run(&["experiment", "np-sweep", "--config", config.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn phase_desk_defaults_within_budget() {
    let dir = scratch("phase");
    let start = Instant::now();
    let o = run(&["experiment", "phase", "--out-dir", dir.to_str().unwrap()]);
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(elapsed < 60.0, "{elapsed} s");
    for f in ["phase_low.svg", "phase_high.svg", "phase_envelope.csv", "phase_low.csv", "phase_high.csv", "manifest.txt"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let high = fs::read_to_string(dir.join("phase_high.csv")).unwrap();
    assert_eq!(high.lines().next().unwrap(), "c,m,gamma,t,risk_ratio_raw,risk_ratio_capped,status");
    assert_eq!(high.lines().count(), 1 + 200 * 200);
    for line in high.lines().skip(1).filter(|l| l.ends_with(",resolved")) {
        let capped: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!((0.5..=2.0).contains(&capped));
    }
    assert!(!high.contains('\r'));
}
