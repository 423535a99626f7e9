use std::path::Path;
use std::process::{Command, Output};

fn hsearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsearch")).args(args).env_remove("HSEARCH_SEED").output().expect("run hsearch")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV written by the tool, split into cells.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn footer(text: &str, key: &str) -> String {
    let prefix = format!("# {key}=");
    let line = text.lines().rev().find(|l| l.starts_with(&prefix)).expect("footer line");
    line[prefix.len()..].to_string()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn farhi_simulation_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = hsearch(&[
        "simulate",
        "--a",
        "1",
        "--d",
        "1",
        "--r",
        "0",
        "--phi",
        "0",
        "--energy",
        "1",
        "--overlap",
        "0.25",
        "--t-max",
        "12.6",
        "--steps",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(&out);
    assert!(text.lines().any(|l| l == "t,P,re_w,im_w,re_r,im_r"));
    let data = rows(&text);
    assert_eq!(data.len(), 100);
    assert_eq!(data[0][0], "0");
    assert_eq!(data[0][1], "0.0625");
    assert_eq!(data[99][0], "12.6");
    // Farhi: P = x^2 cos^2(xt) + sin^2(xt).
    for row in &data {
        let t: f64 = row[0].parse().unwrap();
        let p: f64 = row[1].parse().unwrap();
        let want = 0.0625 * (0.25 * t).cos().powi(2) + (0.25 * t).sin().powi(2);
        assert!((p - want).abs() < 1e-13, "t={t}");
        let amp2: f64 = row[2..].iter().map(|c| c.parse::<f64>().unwrap().powi(2)).sum();
        assert!((amp2 - 1.0).abs() < 1e-13);
    }
}

#[test]
fn floats_have_at_most_15_significant_digits() {
    let o = hsearch(&["simulate", "--preset", "fenner", "--overlap", "0.1", "--steps", "17"]);
    assert!(o.status.success());
    for row in rows(&stdout(&o)) {
        for cell in row {
            let mantissa = cell.split('e').next().unwrap();
            let digits = mantissa.chars().filter(char::is_ascii_digit).collect::<String>();
            assert!(digits.trim_start_matches('0').len() <= 15, "{cell}");
        }
    }
}

#[test]
fn out_of_range_overlap_is_a_usage_error() {
    let o = hsearch(&[
        "simulate",
        "--a",
        "1",
        "--d",
        "1",
        "--r",
        "0",
        "--phi",
        "0",
        "--energy",
        "1",
        "--overlap",
        "1.5",
        "--t-max",
        "12.6",
        "--steps",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("overlap must be in (0,1)"));
    assert!(o.stdout.is_empty());
}

#[test]
fn fenner_preset_fills_coupling() {
    let o = hsearch(&["simulate", "--preset", "fenner", "--overlap", "0.1", "--steps", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "# r=0.2"));
    assert!(text.lines().any(|l| l == "# phi=1.5707963267949"));
}

#[test]
fn readout_line() {
    let o = hsearch(&["readout", "--preset", "farhi", "--energy", "1", "--overlap", "0.1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "T=15.707963267949 P=1.000000000000\n");

    let o = hsearch(&["readout", "--preset", "perfect", "--overlap", "0.3"]);
    assert!(o.status.success());
    let line = stdout(&o);
    let p: f64 = line.trim().split("P=").nth(1).unwrap().parse().unwrap();
    assert!((p - 1.0).abs() < 1e-9);
}

#[test]
fn readout_without_dynamics_is_numerical_failure() {
    let o = hsearch(&["readout", "--a", "0", "--d", "0", "--r", "0", "--overlap", "0.3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn readout_through_oracle() {
    let o = hsearch(&["readout", "--preset", "perfect", "--n", "32", "--targets", "3", "--oracle"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p: f64 = stdout(&o).trim().split("P=").nth(1).unwrap().parse().unwrap();
    assert!((p - 1.0).abs() < 1e-8);

    let o = hsearch(&["readout", "--preset", "perfect", "--overlap", "0.3", "--oracle"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scaling_footer_slope() {
    let o = hsearch(&["scaling", "--family", "farhi", "--n-list", "4,16,64,256,1024"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "N,x,T"));
    assert_eq!(rows(&text).len(), 5);
    let slope: f64 = footer(&text, "slope").parse().unwrap();
    assert!((slope - 0.5).abs() < 0.01);
}

#[test]
fn perfect_trials_reach_the_target() {
    let o =
        hsearch(&["trials", "--n", "64", "--targets", "4", "--trials", "50", "--seed", "42", "--preset", "perfect"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let data = rows(&text);
    assert_eq!(data.len(), 50);
    let min = data.iter().map(|r| r[2].parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
    assert!(min >= 1.0 - 1e-8);
    assert!(footer(&text, "min").parse::<f64>().unwrap() >= 1.0 - 1e-8);
}

#[test]
fn sweep_endpoints_for_equal_diagonals() {
    let o = hsearch(&[
        "sweep-phase",
        "--points",
        "9",
        "--phi-min",
        "0",
        "--phi-max",
        "3.14159265",
        "--preset",
        "perfect",
        "--overlap",
        "0.2",
    ]);
    assert!(o.status.success());
    let data = rows(&stdout(&o));
    assert_eq!(data.len(), 9);
    for row in [&data[0], &data[8]] {
        let p: f64 = row[1].parse().unwrap();
        assert!((p - 1.0).abs() < 1e-9);
    }
    let mid: f64 = data[4][1].parse().unwrap();
    assert!(mid < 1.0 - 1e-3);
}

#[test]
fn identical_flags_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = hsearch(&[
            "trials",
            "--n",
            "16",
            "--targets",
            "2",
            "--trials",
            "6",
            "--preset",
            "perfect",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn seed_comes_from_environment_unless_given() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_hsearch"));
        cmd.args(["trials", "--n", "16", "--targets", "2", "--trials", "3", "--preset", "perfect"]).args(extra);
        match env {
            Some(v) => cmd.env("HSEARCH_SEED", v),
            None => cmd.env_remove("HSEARCH_SEED"),
        };
        stdout(&cmd.output().unwrap())
    };
    assert!(run(Some("7"), &[]).lines().any(|l| l == "# seed=7"));
    assert!(run(Some("7"), &["--seed", "9"]).lines().any(|l| l == "# seed=9"));
    assert!(run(None, &[]).lines().any(|l| l == "# seed=42"));
    assert_ne!(rows(&run(Some("7"), &[])), rows(&run(Some("8"), &[])));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# fixture\npreset = farhi\nenergy = 2\noverlap = 0.1\nsteps = 5\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = hsearch(&["simulate", "--config", cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "# energy=2"));
    assert_eq!(rows(&text).len(), 5);

    let o = hsearch(&["simulate", "--config", cfg, "--energy", "1", "--steps", "7"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "# energy=1"));
    assert!(text.lines().any(|l| l == "# steps=7"));
    assert_eq!(rows(&text).len(), 7);

    // --n on the command line masks the config overlap.
    let o = hsearch(&["simulate", "--config", cfg, "--n", "16"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "# overlap=0.25"));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let o = hsearch(&["readout", "--overlap", "0.2", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown key"));

    let o = hsearch(&["readout", "--overlap", "0.2", "--config", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn conflicting_problem_flags() {
    let o = hsearch(&["readout", "--overlap", "0.2", "--n", "16"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hsearch(&["readout", "--preset", "farhi"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hsearch(&["readout", "--overlap", "0.2", "--energy", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_output_parses() {
    let o = hsearch(&["scaling", "--family", "new", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["family"], "new");
    assert!(v["result"]["slope"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn verify_default_run_passes() {
    let o = hsearch(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 9);
    assert!(text.ends_with("9/9 criteria passed\n"));
}

#[test]
fn verify_filters_and_validates() {
    let o = hsearch(&["verify", "--only", "perfect"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let summaries: Vec<&str> = text.lines().filter(|l| l.starts_with('[')).collect();
    assert_eq!(summaries.len(), 1);
    assert!(summaries[0].contains("(perfect)"));

    let o = hsearch(&["verify", "--only", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hsearch(&["verify", "--tolerance", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_over_tight_tolerance_fails_with_residuals() {
    let o = hsearch(&["verify", "--only", "near-perfect", "--tolerance", "1e-15"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("[FAIL]")));
    assert!(text.lines().any(|l| l.trim_start().starts_with("[FAIL]") && l.contains("< 1.0e-15")));
}
