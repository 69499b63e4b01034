//! End-to-end runs of the `hankel-order` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hankel-order"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn y5_generate_then_rank_gives_five() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(
        dir.path(),
        &["generate", "y5", "--count", "40", "--out", "y5.csv"],
    );
    assert!(gen.status.success(), "{}", stderr(&gen));
    let csv = fs::read_to_string(dir.path().join("y5.csv")).unwrap();
    assert!(csv.starts_with("n,value\n0,"));
    assert_eq!(csv.lines().count(), 41);
    assert!(dir.path().join("y5.csv.provenance").exists());

    let rank = run(dir.path(), &["rank", "y5.csv", "--n-max", "8"]);
    assert!(rank.status.success(), "{}", stderr(&rank));
    let text = stdout(&rank);
    assert!(text.contains("n,rank,gap,condition\n"));
    assert!(text.contains("# policy: "));
    assert_eq!(text.lines().last(), Some("order=5"));
}

#[test]
fn constant_signal_has_order_one() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(
        dir.path(),
        &[
            "generate",
            "mode_sum",
            "--mode",
            "2.5,0",
            "--count",
            "15",
            "--precision",
            "f64",
            "--out",
            "c.csv",
        ],
    );
    assert!(gen.status.success(), "{}", stderr(&gen));
    let rank = run(dir.path(), &["rank", "c.csv", "--out", "sweep.csv"]);
    assert!(rank.status.success(), "{}", stderr(&rank));
    assert_eq!(stdout(&rank), "order=1\n");
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(sweep.contains("# precision: f64"));
}

#[test]
fn too_short_input_names_required_length() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("short.csv"),
        "n,value\n0,1\n1,0.5\n2,0.25\n",
    )
    .unwrap();
    let rank = run(dir.path(), &["rank", "short.csv", "--n-max", "5"]);
    assert_eq!(rank.status.code(), Some(1));
    assert!(stderr(&rank).contains('9'), "{}", stderr(&rank));
}

#[test]
fn unknown_family_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(dir.path(), &["generate", "bogus"]);
    assert_eq!(gen.status.code(), Some(2));
    assert!(stderr(&gen).contains("mode_sum"));
}

#[test]
fn nonhomogeneous_writes_output_and_input() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(dir.path(), &["generate", "nonhomogeneous", "--count", "25"]);
    assert!(gen.status.success());
    let text = stdout(&gen);
    assert!(text.starts_with("n,y,u\n0,"));
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn estimate_methods_report_orders() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(
        dir.path(),
        &["generate", "y5", "--count", "60", "--out", "y5.csv"]
    )
    .status
    .success());

    let aic = run(
        dir.path(),
        &["estimate", "y5.csv", "--method", "aic", "--p-max", "10"],
    );
    assert!(aic.status.success(), "{}", stderr(&aic));
    let text = stdout(&aic);
    assert!(text.contains("p,rss,aic\n"));
    assert!(text.lines().last().unwrap().starts_with("order="));

    let covdet = run(
        dir.path(),
        &[
            "estimate",
            "y5.csv",
            "--method",
            "covdet",
            "--m-range",
            "2:8",
        ],
    );
    assert!(covdet.status.success(), "{}", stderr(&covdet));
    let text = stdout(&covdet);
    assert!(text.contains("m,det\n2,"));
    assert_eq!(text.lines().last(), Some("order=3"));

    let hokalman = run(
        dir.path(),
        &["estimate", "y5.csv", "--method", "hokalman", "--n-max", "8"],
    );
    assert_eq!(stdout(&hokalman).lines().last(), Some("order=5"));
}

#[test]
fn experiment_writes_artifact_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["experiment", "fig1_table1_y5", "--p-max", "12"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "fig1_table1_y5,5,ok\n");
    let artifact = fs::read_to_string(dir.path().join("fig1_table1_y5.csv")).unwrap();
    assert!(artifact.starts_with("# experiment: fig1_table1_y5\n"));
    assert!(artifact.contains("# param: p_max=12\n"));
}

#[test]
fn experiment_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.csv", "b.csv"] {
        let run = run(
            dir.path(),
            &[
                "--seed",
                "7",
                "--out",
                out,
                "experiment",
                "offset_effect",
                "--trials",
                "10",
            ],
        );
        assert!(run.status.success(), "{}", stderr(&run));
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().contains("# seed: 7\n"));
}

#[test]
fn global_policy_reaches_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "experiment",
            "fig2_first_order",
            "--policy",
            "gap",
            "--out",
            "f2.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let artifact = fs::read_to_string(dir.path().join("f2.csv")).unwrap();
    assert!(artifact.contains("# param: policy=gap:1e3\n"));
}

#[test]
fn unknown_experiment_lists_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["experiment", "nope"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("fig2_first_order") && err.contains("echelon_effect"),
        "{err}"
    );
    assert!(!dir.path().join("nope.csv").exists());
}

#[test]
fn unknown_override_fails_without_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["experiment", "fig2_first_order", "--no-such-key", "1"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("fig2_first_order.csv").exists());
}

#[test]
fn help_and_list_enumerate_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let help = stdout(&run(dir.path(), &["--help"]));
    for command in ["generate", "rank", "estimate", "experiment", "list"] {
        assert!(help.contains(command), "{command} missing from help");
    }
    let list = stdout(&run(dir.path(), &["list"]));
    assert_eq!(list.lines().count(), 8);
    for line in list.lines() {
        let name = line.split('\t').next().unwrap();
        assert!(help.contains(name), "{name} missing from help");
    }
}
