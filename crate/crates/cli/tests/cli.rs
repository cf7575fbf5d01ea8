use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_limitop"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn fixture(name: &str) -> (String, PathBuf) {
    let path = root().join("fixtures").join(format!("{name}.json"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    (v["command"].as_str().unwrap().to_string(), path)
}

fn run_fixture(name: &str, extra: &[&str]) -> Output {
    let (command, path) = fixture(name);
    bin().arg(&command).arg("--config").arg(path).args(extra).output().unwrap()
}

fn fixture_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(root().join("fixtures"))
        .unwrap()
        .map(|e| e.unwrap().path().file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

/// Set `UPDATE_GOLDEN=1` to rewrite the expected outputs.
#[test]
fn fixtures_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in fixture_names() {
        let out = run_fixture(&name, &[]);
        assert!(out.status.code().is_some_and(|c| c == 0 || c == 2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let golden = root().join("tests/golden").join(format!("{name}.out"));
        if update {
            std::fs::write(&golden, &out.stdout).unwrap();
            continue;
        }
        let expected = std::fs::read(&golden).unwrap_or_else(|_| panic!("missing golden file for {name}"));
        assert!(out.stdout == expected, "{name} differs from its golden file");
    }
}

#[test]
fn exit_codes() {
    let probe = run_fixture("shift-minus-one-probe", &[]);
    assert_eq!(probe.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&probe.stderr).starts_with("verdict: not-fredholm"));
    assert_eq!(run_fixture("laplacian-probe", &[]).status.code(), Some(0));

    let usage = bin().arg("no-such-command").output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
    assert!(!usage.stderr.is_empty());
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));

    let missing = bin().args(["nu", "--space", "nat:10"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--op"));

    let wrong = bin().arg("nu").arg("--config").arg(fixture("tridiag-op").1).output().unwrap();
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn flags_override_config() {
    let out = run_fixture("tridiag-nu", &["--op", "tridiag:5:-1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["op"], "tridiag:5:-1");
    assert_eq!(v["config"]["space"], "lattice:0..60");
    assert_eq!(v["config"]["p"].as_f64(), Some(2.0));
    let nu = v["result"]["value"].as_f64().unwrap();
    assert!(nu > 3.0 - 1e-6 && nu < 3.0 + 1e-2, "{nu}");
}

#[test]
fn decompose_identity_has_one_summand() {
    let out = bin().args(["decompose", "--space", "nat:50", "--op", "identity"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["summands"], 1);
    assert_eq!(v["result"]["reconstruction_exact"], true);
}

#[test]
fn thread_count_does_not_change_reports() {
    for name in ["laplacian-spectrum", "random-decompose", "parity-shift-limit"] {
        let a = run_fixture(name, &["--threads", "1"]);
        let b = run_fixture(name, &["--threads", "4"]);
        assert!(a.stdout == b.stdout, "{name}");
    }
}

#[test]
fn artifacts_round_trip() {
    let dir = std::env::temp_dir().join(format!("limitop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let space = dir.join("space.json");
    let op = dir.join("op.txt");
    assert!(bin().args(["space-gen", "--space", "lattice:0..30"]).arg("--out").arg(&space).status().unwrap().success());
    let s = space.to_str().unwrap();
    assert!(bin().args(["op-gen", "--space", s, "--op", "tridiag:3:-1"]).arg("--out").arg(&op).status().unwrap().success());
    let from_file = bin().args(["nu", "--space", s, "--op", op.to_str().unwrap()]).output().unwrap();
    let inline = bin().args(["nu", "--space", s, "--op", "tridiag:3:-1"]).output().unwrap();
    let value = |o: &Output| serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()["result"]["value"].clone();
    assert_eq!(value(&from_file), value(&inline));

    let csv = dir.join("curve.csv");
    let out = run_fixture("unilateral-shift-limit", &["--csv", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("direction,n,basepoint,deviation\n"));
    assert_eq!(text.lines().count(), 20);

    let listing = bin().arg("examples").arg("--out").arg(dir.join("examples")).output().unwrap();
    assert!(listing.status.success());
    assert_eq!(std::fs::read_dir(dir.join("examples")).unwrap().count(), fixture_names().len());
    std::fs::remove_dir_all(dir).ok();
}
