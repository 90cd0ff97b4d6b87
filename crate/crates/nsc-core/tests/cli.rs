//! End-to-end tests of the `nsc` binary: exit codes, file outputs, and the
//! simulate -> kcurve -> estimate pipeline against the written truth.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn nsc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn pipeline_simulate_kcurve_estimate() {
    let dir = tempdir().unwrap();
    let out = nsc(
        &[
            "simulate",
            "--preset",
            "fig3_affs",
            "--scale",
            "0.05",
            "--seed",
            "7",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("seed = 7"));
    let data = dir.path().join("run/data.csv");
    let truth = dir.path().join("run/truth.cfg");
    assert!(data.exists() && truth.exists());
    let text = fs::read_to_string(&data).unwrap();
    assert!(text.contains("# version ="));
    assert!(text.contains("# command ="));
    assert!(text.contains("# seed = 7"));
    assert!(text.contains("# tau0 = 1"));
    assert!(text.lines().any(|l| l == "y,x"));

    let out = nsc(
        &[
            "kcurve", "--in", "run/data.csv", "--y", "y", "--x", "x", "--noise", "wfn", "--out",
            "curve.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = nsc(&["estimate", "--curve", "curve.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let line = text.lines().nth(1).expect("value row");
    let fields: Vec<&str> = line.split(',').collect();
    let k_bar: f64 = fields[1].parse().unwrap();
    // Truth for this preset carries k = 0.11.
    assert!((k_bar - 0.11).abs() < 0.05, "k_bar = {k_bar}");

    let truth_text = fs::read_to_string(&truth).unwrap();
    assert!(truth_text.contains("k = 0.11"));
}

#[test]
fn simulate_is_deterministic_given_seed() {
    let dir = tempdir().unwrap();
    for name in ["a", "b"] {
        let out = nsc(
            &[
                "simulate", "--preset", "fig4_wfn", "--scale", "0.001", "--seed", "42", "--out",
                name,
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let a = fs::read_to_string(dir.path().join("a/data.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b/data.csv")).unwrap();
    // Metadata differs by output path only through the command line; strip
    // comments and compare the numeric body byte for byte.
    let body = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&a), body(&b));
}

#[test]
fn stats_on_constant_column_is_zero() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let mut text = String::from("# tau0 = 2.0\nc\n");
    for _ in 0..64 {
        text.push_str("5.5\n");
    }
    fs::write(&csv, text).unwrap();
    let out = nsc(&["stats", "--in", "d.csv", "--col", "c"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.0, "{line}");
        rows += 1;
    }
    assert!(rows >= 3);
    // Normal style path as well.
    let out = nsc(
        &["stats", "--in", "d.csv", "--col", "c", "--style", "normal"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn compensate_recovers_injected_delay() {
    let dir = tempdir().unwrap();
    let out = nsc(
        &[
            "simulate", "--preset", "fig5_delay", "--scale", "0.1", "--seed", "5", "--out", "run",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = nsc(
        &[
            "compensate",
            "--in",
            "run/data.csv",
            "--y",
            "y",
            "--x",
            "x",
            "--dmax",
            "12",
            "--imax",
            "4",
            "--out",
            "comp.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("D = 10"), "{text}");
    assert!(dir.path().join("comp.csv").exists());
}

#[test]
fn budget_command_prints_root_sum_square() {
    let dir = tempdir().unwrap();
    fs::write(
        dir.path().join("b.cfg"),
        "[entry]\nname = a\nk = 3\nsigma_x = 1\n\n[entry]\nname = b\nk = 1\nsigma_x = 4\n",
    )
    .unwrap();
    let out = nsc(&["budget", "--spec", "b.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("u_B = 5"), "{}", stdout(&out));
}

#[test]
fn estimate_without_decade_span_exits_one_with_category() {
    let dir = tempdir().unwrap();
    fs::write(
        dir.path().join("short.csv"),
        "m,tau,k,sigma_k,edf,style,variant\n\
         1,1,1.0,0.1,100,overlap,nsc\n\
         2,2,1.0,0.1,50,overlap,nsc\n",
    )
    .unwrap();
    let out = nsc(&["estimate", "--curve", "short.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).starts_with("error: extraction-failed:"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempdir().unwrap();
    let out = nsc(&["stats", "--nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = nsc(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = nsc(
        &["simulate", "--preset", "fig9", "--out", "x"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown-preset"), "{}", stderr(&out));
    assert!(stderr(&out).contains("fig4_wfn"), "{}", stderr(&out));
}

#[test]
fn io_errors_exit_three() {
    let dir = tempdir().unwrap();
    let out = nsc(
        &["stats", "--in", "missing.csv", "--col", "y"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error: io:"), "{}", stderr(&out));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "# tau0 = 1\ny,x\n1,2\n3\n").unwrap();
    let out = nsc(&["stats", "--in", "bad.csv", "--col", "y"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error: parse:"), "{err}");
    assert!(err.contains(":4"), "{err}");
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempdir().unwrap();
    assert_eq!(nsc(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(nsc(&["--version"], dir.path()).status.code(), Some(0));
    let out = nsc(&[], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kcurve_variant_and_style_flags() {
    let dir = tempdir().unwrap();
    let out = nsc(
        &[
            "simulate", "--preset", "fig4_rwn", "--scale", "0.002", "--seed", "3", "--out", "run",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for (variant, style) in [("nscd", "overlap"), ("nsc", "normal")] {
        let out = nsc(
            &[
                "kcurve", "--in", "run/data.csv", "--y", "y", "--x", "x", "--variant", variant,
                "--style", style, "--out", "c.csv",
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
        assert!(text.contains(variant));
        assert!(text.contains(style));
    }
    let out = nsc(
        &[
            "kcurve", "--in", "run/data.csv", "--y", "y", "--x", "x", "--noise", "purple",
            "--out", "c.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}
