use std::path::Path;
use std::process::{Command, Output};

fn alcs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alcs"))
        .current_dir(dir)
        .args(args)
        .env_remove("ALCS_OUT_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("ok.cfg"), "N = 16\nt_end = 0\nout_dir = ok\n").unwrap();
    let o = alcs(d, &["run", "ok.cfg"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert_eq!(
        std::fs::read_to_string(d.join("ok/energy.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );

    std::fs::write(
        d.join("boom.cfg"),
        "N = 32\ndt = 5\nt_end = 500\namplitude = 1\nq_amplitude = 1\nkappa = 2\nout_dir = boom\n",
    )
    .unwrap();
    assert_eq!(code(&alcs(d, &["run", "boom.cfg"])), 2);

    std::fs::write(d.join("bad.cfg"), "N = 16\nmu = 0\n").unwrap();
    let o = alcs(d, &["run", "bad.cfg"]);
    assert_eq!(code(&o), 3);
    let err = text(&o.stderr);
    assert!(
        err.contains("line 2") && err.contains("mu must be > 0"),
        "{err}"
    );

    assert_eq!(code(&alcs(d, &["run", "missing.cfg"])), 3);
}

#[test]
fn out_dir_environment_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("a.cfg"), "N = 16\nt_end = 0\nout_dir = here\n").unwrap();
    let target = d.join("there");
    let o = Command::new(env!("CARGO_BIN_EXE_alcs"))
        .current_dir(d)
        .args(["run", "a.cfg"])
        .env("ALCS_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(target.join("energy.csv").exists());
    assert!(!d.join("here").exists());
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = alcs(dir.path(), &["check", "--n", "8"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stdout));
    assert_eq!(
        text(&o.stdout)
            .lines()
            .filter(|l| l.starts_with("PASS"))
            .count(),
        7
    );
    let o = alcs(dir.path(), &["check", "--n", "16", "--inject-sign-flip"]);
    assert_eq!(code(&o), 1);
    assert!(
        text(&o.stderr).contains("corotation-stress-cancellation"),
        "{}",
        text(&o.stderr)
    );
}

#[test]
fn twin_mismatch_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("a.cfg"), "N = 16\nt_end = 0.01\n").unwrap();
    std::fs::write(d.join("b.cfg"), "N = 32\nt_end = 0.01\n").unwrap();
    assert_eq!(code(&alcs(d, &["twin", "a.cfg", "b.cfg"])), 4);
}

#[test]
fn sweep_and_snapshot_tools() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("s.cfg"),
        "N = 16\ndt = 0.01\nt_end = 0.02\nchecks = none\nout_dir = sw\n",
    )
    .unwrap();
    let o = alcs(
        d,
        &["sweep", "s.cfg", "--axis", "kappa", "--values", "0,0.5"],
    );
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert_eq!(
        std::fs::read_to_string(d.join("sw/sweep_summary.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );
    assert_ne!(
        code(&alcs(
            d,
            &["sweep", "s.cfg", "--axis", "mu", "--values", "1"]
        )),
        0
    );

    let snap = d.join("sw/kappa_0.5/checkpoint.bin");
    let snap = snap.to_str().unwrap();
    let o = alcs(d, &["info", snap]);
    assert_eq!(code(&o), 0);
    assert!(text(&o.stdout).contains("N 16"));
    let o = alcs(d, &["lp-norm", snap, "--s", "0.5"]);
    assert_eq!(code(&o), 0);
    let out = text(&o.stdout);
    assert_eq!(out.lines().count(), 5, "{out}");
    assert!(out.contains("phi"));

    std::fs::write(d.join("junk.bin"), b"nope").unwrap();
    let o = alcs(d, &["info", "junk.bin"]);
    assert_eq!(code(&o), 3);
    assert!(text(&o.stderr).contains("junk.bin"));
}
