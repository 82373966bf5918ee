use std::fs;
use std::path::Path;
use std::process::Command;
use surfcat::cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("surfcat").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn csv_body(dir: &Path) -> String {
    let text = fs::read_to_string(dir.join("results.csv")).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn threshold_writes_results_with_contract_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = run(&[
        "threshold", "--variant", "concatenated", "--ratio", "10", "--deph", "1.0", "--sizes", "3,4", "--pg", "0.02,0.04",
        "--trials", "30", "-o", out,
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("threshold"));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    let hash_line = lines.next().unwrap();
    assert!(hash_line.starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "variant,n,p_g,p_d,f_depo,F,success,ci_lo,ci_hi");
    assert_eq!(lines.count(), 4);

    let hash = hash_line.trim_start_matches("# config_hash=");
    for file in ["metadata.json", "layout.json"] {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join(file)).unwrap()).unwrap();
        assert_eq!(v["config_hash"], hash, "{file}");
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["ratio"], 10.0);
    assert_eq!(meta["config"]["weights"], "auto");
}

#[test]
fn validation_failures_exit_with_two() {
    let (code, _, err) = run(&["threshold", "--config", "/definitely/missing.toml"]);
    assert_eq!(code, 2);
    assert!(err.contains("missing.toml"));

    let (code, _, err) = run(&["threshold", "--f-depo", "0.5", "--frequency", "x-only"]);
    assert_eq!(code, 2);
    assert!(err.contains("X-only"));

    let (code, _, _) = run(&["threshold", "--trials", "0"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["threshold", "--variant", "hexagonal"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["threshold", "--pd", "0.01", "--ratio", "2"]);
    assert_eq!(code, 2);
}

#[test]
fn local_rate_above_global_warns() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "curve", "--pd", "0.02", "--pg", "0.01", "--sizes", "3", "--trials", "10", "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(err.contains("warning") && err.contains("p_d exceeds p_g"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.toml");
    fs::write(
        &cfg,
        "schema_version = 1\nvariant = \"standard\"\nsizes = [3]\np_g = [0.01]\ntrials = 20\nseed = 4\nfrequency = \"x-only\"\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let (code, _, _) = run(&[
        "curve", "--config", cfg.to_str().unwrap(), "--trials", "25", "-o", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["trials"], 25);
    assert_eq!(meta["config"]["seed"], 4);
    assert_eq!(meta["config"]["variant"], "standard");

    fs::write(&cfg, "schema_version = 9\n").unwrap();
    let (code, _, err) = run(&["curve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("schema_version"));
    fs::write(&cfg, "schema_version = 1\nbogus_key = 3\n").unwrap();
    assert_eq!(run(&["curve", "--config", cfg.to_str().unwrap()]).0, 2);
}

#[test]
fn same_seed_gives_identical_csv_bodies_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for (i, threads) in ["1", "2", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let (code, _, _) = run(&[
            "curve", "--variant", "concatenated", "--sizes", "3,4", "--pg", "0.01,0.03", "--trials", "60", "--seed",
            "17", "--threads", threads, "-o", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        bodies.push(csv_body(&out));
    }
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[0], bodies[2]);
}

#[test]
fn replay_reproduces_and_fixture_loads() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["--sizes", "4", "--pg", "0.03", "--seed", "5", "--trial", "2", "-o", out];
    let (code, first, _) = run(&[&["single-trial-replay"][..], &args].concat());
    assert_eq!(code, 0);
    let (_, second, _) = run(&[&["single-trial-replay"][..], &args].concat());
    assert_eq!(first, second);

    let (code, _, _) = run(&[&["fixture-dump"][..], &args].concat());
    assert_eq!(code, 0);
    let path = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_str().unwrap().starts_with("fixture_"))
        .unwrap();
    let fixture = surfcat::cycle::SyndromeFixture::from_json(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(fixture.n, 4);
    assert!(fixture.config_hash.is_some());

    let (code, _, err) = run(&["single-trial-replay", "--sizes", "4,5", "-o", out]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn sweep_writes_one_row_per_setting() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "sweep", "--variant", "concatenated", "--ratios", "1,3", "--sizes", "3,4", "--pg", "0.01,0.03", "--trials", "20",
        "--bootstrap", "5", "-o", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("# config_hash="));
    assert_eq!(sweep.lines().count(), 4);
    assert!(dir.path().join("ratio3_fdepo0/results.csv").exists());
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_surfcat");
    let status = Command::new(bin).args(["threshold", "--config", "/nope.toml"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let out = Command::new(bin)
        .args(["curve", "--sizes", "3", "--pg", "0.01", "--trials", "5", "-o", "/proc/surfcat-denied"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let status = Command::new(bin).arg("--help").status().unwrap();
    assert_eq!(status.code(), Some(0));
}
