use std::fs;
use std::path::Path;
use std::process::{Command, Output};

/// Small GA budgets so every command finishes in seconds.
const FAST: &str = "[budget]\ntune_population = 12\ntune_generations = 8\nei_population = 12\nei_generations = 8\n";

fn ukego(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ukego")).args(args).output().unwrap()
}

fn fast_config(dir: &Path) -> String {
    let path = dir.join("fast.toml");
    fs::write(&path, FAST).unwrap();
    path.display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fit_reports_trend_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fast_config(dir.path());
    let out = dir.path().join("fit");
    let o = ukego(&["--config", &cfg, "fit", "--problem", "branin", "--algo", "bk", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("loocv_rmse") && text.contains("theta"), "{text}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fit_report.json")).unwrap()).unwrap();
    assert_eq!(report["n"], 20);
    assert_eq!(report["algorithm"], "bk");
    assert!(report["trend_terms"].as_array().unwrap().len() >= 1);
}

#[test]
fn optimize_writes_one_row_per_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fast_config(dir.path());
    let out = dir.path().join("run");
    let o = ukego(&["--config", &cfg, "optimize", "--problem", "branin", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("runs/branin_pck-tensor_rep000.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "problem,algorithm,rep,iteration,phase,x_1,x_2,y_raw,best_so_far,improvement"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 30);
    assert_eq!(rows.iter().filter(|r| r.contains(",init,")).count(), 20);
    for name in ["summary.csv", "final_boxplot.csv", "manifest.json"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fast_config(dir.path());
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = ukego(&[
            "--config", &cfg, "benchmark", "--problem", "hosaki", "--algo", "ok", "--algo", "pck", "--reps", "2",
            "--n-upd", "3", "--nv", "100", "--seed", "11", "--jobs", jobs, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out.join("hosaki")
    };
    let (a, b) = (run("a", "1"), run("b", "2"));
    let mut names: Vec<_> = fs::read_dir(a.join("runs")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    // 2 reps × 2 variants of evaluation tables, plus selection traces for PCK.
    assert_eq!(names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")).count(), 4);
    for n in &names {
        assert_eq!(fs::read(a.join("runs").join(n)).unwrap(), fs::read(b.join("runs").join(n)).unwrap(), "{n:?}");
    }
    for n in ["summary.csv", "final_boxplot.csv", "rmse_boxplot.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n}");
    }
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let out = out.to_str().unwrap();
    let cases: [&[&str]; 5] = [
        &["benchmark", "--problem", "branin", "--out", out],
        &["optimize", "--problem", "rosenbrock", "--out", out],
        &["optimize", "--problem", "borehole", "--algo", "uk2", "--out", out],
        &["optimize", "--problem", "branin", "--algo", "ok", "--algo", "ok", "--out", out],
        &["fit", "--problem", "branin", "--scheme", "sparse"],
    ];
    for args in cases {
        let o = ukego(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = ukego(&["optimize", "--problem", "borehole", "--algo", "uk2", "--out", out]);
    assert!(stderr(&o).contains("exceeds the sample size"), "{}", stderr(&o));
    assert!(!Path::new(out).exists(), "nothing is written on a configuration error");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let out = dir.path().join("o");
    fs::write(
        &cfg,
        format!("problem = \"sasena\"\nalgo = \"ok\"\nn_init = 8\nn_upd = 1\nseed = 5\nnv = 0\nout = \"{}\"\n{FAST}", out.display()),
    )
    .unwrap();
    let o = ukego(&["--config", cfg.to_str().unwrap(), "optimize", "--n-upd", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("runs/sasena_ok_rep000.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 8 + 2);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 5);

    fs::write(&cfg, "colour = \"red\"\n").unwrap();
    let o = ukego(&["--config", cfg.to_str().unwrap(), "optimize", "--problem", "branin"]);
    assert_eq!(o.status.code(), Some(2));
}
