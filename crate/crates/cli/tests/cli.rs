use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn shotline(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shotline"));
    cmd.args(args).env_remove("SHOTLINE_SEED");
    if let Some(s) = env_seed {
        cmd.env("SHOTLINE_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn config(dir: &Path) -> String {
    let path = dir.join("exp.json");
    fs::write(
        &path,
        r#"{
  "objective": {"inline": {"dimension": 1, "amplitudes": [1.0], "phases": [0.4], "offset": 0.5, "noise_scale": 1.0}},
  "arms": [
    {"name": "random", "method": "vanilla", "kernel": "periodic", "gamma": 1.0},
    {"name": "lsr", "method": "lsr", "kernel": "periodic", "gamma": 0.5, "r": 0.1}
  ],
  "shots_high": 100,
  "budget": 800,
  "replications": 5,
  "seed": 3,
  "out_dir": "out"
}
"#,
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_compare_and_regret() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let out = dir.path().join("res");
    let text = stdout(&shotline(&["run", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"], None));
    assert!(text.contains("random,") && text.contains("lsr,"), "{text}");
    assert!(out.join("runs/lsr/rep_004.jsonl").is_file());

    let cmp = stdout(&shotline(&["compare", out.to_str().unwrap(), "random", "lsr", "--at-shots", "800"], None));
    let mut lines = cmp.lines();
    assert_eq!(lines.next(), Some("shots,median_random,median_lsr,u,p_value"));
    let fields: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[0], 800.0);
    assert!((0.0..=1.0).contains(&fields[4]));

    let run = out.join("runs/random/rep_000.jsonl");
    let reg = stdout(&shotline(&["regret", run.to_str().unwrap(), "--jstar", "-0.5"], None));
    let rows: Vec<&str> = reg.lines().collect();
    assert_eq!(rows[0], "shots,regret");
    assert_eq!(rows.len(), 1 + 8);
    let regrets: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(regrets.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let seed_of = |out: &Path| -> u64 {
        let m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        m["master_seed"].as_u64().unwrap()
    };
    let a = dir.path().join("a");
    stdout(&shotline(&["run", &cfg, "--out", a.to_str().unwrap()], None));
    assert_eq!(seed_of(&a), 3);
    let b = dir.path().join("b");
    stdout(&shotline(&["run", &cfg, "--out", b.to_str().unwrap()], Some("41")));
    assert_eq!(seed_of(&b), 41);
    let c = dir.path().join("c");
    stdout(&shotline(&["run", &cfg, "--out", c.to_str().unwrap(), "--seed", "7"], Some("41")));
    assert_eq!(seed_of(&c), 7);
    assert!(!shotline(&["run", &cfg, "--out", c.to_str().unwrap()], Some("nope")).status.success());
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"arms\": [ }").unwrap();
    let o = shotline(&["run", bad.to_str().unwrap()], None);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json"), "{err}");
    assert!(!shotline(&["compare", dir.path().to_str().unwrap(), "a", "b", "--at-shots", "1"], None).status.success());
    assert!(!shotline(&["frobnicate"], None).status.success());
}
