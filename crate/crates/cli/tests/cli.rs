use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multibump")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const COARSE: &str = "[discretization]\nh = 0.1\n\n[sweep]\nr = [20, 30, 40]\n";

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["limit-solve", "project", "assemble", "reduce", "minimize", "sweep", "verify"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    for flag in ["--config", "--out", "--seed", "--threads"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "seed = 1\n\n[physics]\nlambda = -2.5\n");
    let out = run(&["--config", &bad, "verify"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4") && err.contains("physics.lambda"), "{err}");

    let odd = write(dir.path(), "odd.toml", "[chain]\nn = 5\n");
    assert_eq!(run(&["minimize", "--config", &odd]).status.code(), Some(2));

    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&["--config", missing.to_str().unwrap(), "reduce"]).status.code(), Some(2));

    let short = write(dir.path(), "short.toml", "[sweep]\nr = [20, 40]\n");
    let out_dir = dir.path().join("o");
    assert_eq!(run(&["--config", &short, "--out", out_dir.to_str().unwrap(), "sweep"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_3() {
    // a ring shorter than one bump window
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[discretization]\nh = 0.1\n\n[chain]\nr = 1.5\n");
    let out_dir = dir.path().join("o");
    let out = run(&["--config", &cfg, "--out", out_dir.to_str().unwrap(), "assemble"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("window"));
}

#[test]
fn limit_solve_writes_profile_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", COARSE);
    let out_dir = dir.path().join("out");
    let out = run(&["limit-solve", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--threads", "1", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["profile/profile_plus.csv", "profile/profile_plus.meta", "profile/profile_minus.csv", "limit_report.csv"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("U+") && text.contains("U-"));
}

#[test]
fn reduce_and_sweep_succeed_on_a_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", COARSE);
    let out_dir = dir.path().join("out");
    let o = out_dir.to_str().unwrap();
    let out = run(&["--config", &cfg, "--out", o, "reduce"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("v_u.csv").exists());

    let out = run(&["--config", &cfg, "--out", o, "sweep"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| l.ends_with(",ok")).count(), 3);
    assert!(table.contains("# slope grad_norm"));
}
