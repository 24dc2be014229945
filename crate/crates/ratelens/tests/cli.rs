//! Black-box tests of the ratelens binary: exit codes, determinism,
//! config precedence, and parser robustness.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ratelens")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn tmp(name: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(name);
    (dir, path)
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["ibaa"])), 2); // missing required flags
    assert_eq!(code(&run(&["rd-curve"])), 2);
    assert_eq!(
        code(&run(&["sim-legi", "--trials", "banana", "--out", "x.csv"])),
        2
    );
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["rd-curve", "--help"])), 0);
}

#[test]
fn bad_input_files_exit_2_with_diagnostic() {
    let (dir, counts) = tmp("counts.csv");
    let out_path = dir.path().join("d.csv");
    let out_str = out_path.to_str().unwrap();

    std::fs::write(&counts, "").unwrap();
    let out = run(&[
        "ibaa",
        "--counts",
        counts.to_str().unwrap(),
        "--out",
        out_str,
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    std::fs::write(&counts, ",a,b\nx,3,-1\n").unwrap();
    let out = run(&[
        "ibaa",
        "--counts",
        counts.to_str().unwrap(),
        "--out",
        out_str,
    ]);
    assert_eq!(code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(msg.contains("-1"), "diagnostic names the bad cell: {msg}");

    let out = run(&["ibaa", "--counts", "/no/such/file.csv", "--out", out_str]);
    assert_eq!(code(&out), 2);
}

#[test]
fn validation_errors_exit_2() {
    let (_dir, out_path) = tmp("c.csv");
    let o = out_path.to_str().unwrap();
    // gradient amplitude must satisfy a > 2b
    assert_eq!(
        code(&run(&[
            "sim-legi", "--a", "10", "--b", "9", "--trials", "10", "--seed", "1", "--out", o
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "sim-legi", "--trials", "0", "--seed", "1", "--out", o
        ])),
        2
    );
    assert_eq!(
        code(&run(&["rd-strategy", "--lambda", "-1", "--out", o])),
        2
    );
    assert_eq!(code(&run(&["rd-curve", "--model", "file", "--out", o])), 2);
    assert_eq!(code(&run(&["--threads", "0", "rd-curve", "--out", o])), 2);
}

#[test]
fn strict_mode_flags_non_convergence_with_3() {
    let (_dir, out_path) = tmp("s.csv");
    let o = out_path.to_str().unwrap();
    let args = [
        "rd-strategy",
        "--lambda",
        "3.44",
        "--max-iter",
        "1",
        "--out",
        o,
    ];
    assert_eq!(code(&run(&args)), 0); // warning only without --strict
    let strict: Vec<&str> = std::iter::once("--strict").chain(args).collect();
    assert_eq!(code(&run(&strict)), 3);
}

#[test]
fn sim_legi_is_reproducible_and_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    for p in [&p1, &p2] {
        let out = run(&[
            "sim-legi",
            "--sectors",
            "10",
            "--trials",
            "5000",
            "--hill",
            "2",
            "--seed",
            "99",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(
        std::fs::read(&p1).unwrap(),
        std::fs::read(&p2).unwrap(),
        "same seed must give identical output"
    );
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p1.with_extension("csv.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["seed"], 99);
    assert_eq!(sidecar["trials"], 5000);
    assert_eq!(sidecar["params"]["hill"], 2);
}

#[test]
fn missing_seed_is_drawn_and_printed() {
    let (_dir, out_path) = tmp("c.csv");
    let out = run(&[
        "sim-legi",
        "--sectors",
        "4",
        "--trials",
        "100",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("seed:"),
        "stderr announces the drawn seed: {err}"
    );
}

#[test]
fn config_file_fills_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "sectors = 6\ntrials = 400\nseed = 5\nhill = 2\n").unwrap();
    let from_cfg = dir.path().join("cfg.csv");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "sim-legi",
        "--out",
        from_cfg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&from_cfg).unwrap();
    assert_eq!(text.lines().count(), 7, "6 sectors + header from config");

    let overridden = dir.path().join("flag.csv");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "sim-legi",
        "--sectors",
        "4",
        "--out",
        overridden.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&overridden).unwrap();
    assert_eq!(text.lines().count(), 5, "flag overrides config");
}

#[test]
fn threads_env_var_is_accepted() {
    let (_dir, out_path) = tmp("c.csv");
    let out = Command::new(bin())
        .env("RATELENS_THREADS", "2")
        .args([
            "sim-legi",
            "--sectors",
            "4",
            "--trials",
            "100",
            "--seed",
            "3",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);

    let out = Command::new(bin())
        .env("RATELENS_THREADS", "many")
        .args(["rd-curve", "--out", out_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn pipeline_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let d = dir.path().join("d.csv");
    let prof = dir.path().join("prof.csv");
    assert_eq!(
        code(&run(&[
            "sim-legi",
            "--sectors",
            "8",
            "--trials",
            "20000",
            "--hill",
            "3",
            "--seed",
            "11",
            "--out",
            counts.to_str().unwrap(),
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "ibaa",
            "--counts",
            counts.to_str().unwrap(),
            "--out",
            d.to_str().unwrap(),
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "align",
            "--distortion",
            d.to_str().unwrap(),
            "--include-rows",
            "--out",
            prof.to_str().unwrap(),
        ])),
        0
    );
    let text = std::fs::read_to_string(&prof).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("shift_radians,mean_distortion,row_"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn parser_never_crashes_on_arbitrary_args() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
    let vocabulary = [
        "rd-curve",
        "ibaa",
        "--out",
        "--seed",
        "--lambda",
        "-5",
        "1e309",
        "NaN",
        "--counts",
        "",
        "--",
        "--config",
        "/dev/null",
        "🦀",
        "--trials",
        "--strict",
        "align",
        "--hills",
        "1,,2",
        "--threads",
    ];
    for _ in 0..200 {
        let n = rng.random_range(0..6);
        let args: Vec<&str> = (0..n)
            .map(|_| vocabulary[rng.random_range(0..vocabulary.len())])
            .collect();
        let out = run(&args);
        let c = code(&out); // panics if killed by a signal
        assert!([0, 2, 3].contains(&c), "unexpected exit {c} for {args:?}");
    }
}
