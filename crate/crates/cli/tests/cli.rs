use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const ONLINE: &str = r#"
[run]
master_seed = 1
repetitions = 2
horizon = 5
eval_contexts = 10
output_dir = "out"

[instance]
model = "bt"

[[learner]]
algorithm = "greedy-bt"
"#;

fn prefbandit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prefbandit"))
        .args(args)
        .current_dir(dir)
        .env_remove("PREFBANDIT_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn with_config(text: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), text).unwrap();
    dir
}

#[test]
fn run_online_writes_its_files() {
    let dir = with_config(ONLINE);
    let out = prefbandit(dir.path(), &["run-online", "c.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["online_raw.csv", "online_summary.csv", "config.toml"] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
    let raw = fs::read_to_string(dir.path().join("out/online_raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 1 + 2 * 5);
}

#[test]
fn environment_overrides_the_output_directory() {
    let dir = with_config(ONLINE);
    let out = Command::new(env!("CARGO_BIN_EXE_prefbandit"))
        .args(["run-online", "c.toml"])
        .current_dir(dir.path())
        .env("PREFBANDIT_OUTPUT_DIR", "elsewhere")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("elsewhere/online_raw.csv").is_file());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn validate_prints_the_canonical_config() {
    let dir = with_config(ONLINE);
    let out = prefbandit(dir.path(), &["validate", "c.toml"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("master_seed = 1"));
    assert!(text.contains("[[learner]]"));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = with_config(ONLINE);
    let out = prefbandit(dir.path(), &["run-offline", "c.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.m_grid"));

    let out = prefbandit(dir.path(), &["run-online", "missing.toml"]);
    assert_eq!(out.status.code(), Some(1));

    let bad = with_config(&ONLINE.replace("greedy-bt", "greedy-gp"));
    assert_eq!(prefbandit(bad.path(), &["run-online", "c.toml"]).status.code(), Some(1));

    let typo = with_config(&ONLINE.replace("horizon", "horizn"));
    assert_eq!(prefbandit(typo.path(), &["validate", "c.toml"]).status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_with_two() {
    let text = ONLINE
        .replace("\"bt\"", "\"gp\"")
        .replace("greedy-bt", "greedy-gp")
        .replace("[[learner]]", "[fixed_point]\ntol = 1e-14\nmax_iter = 1\n\n[[learner]]");
    let dir = with_config(&text);
    let out = prefbandit(dir.path(), &["run-online", "c.toml"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
}
