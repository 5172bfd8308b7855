//! End-to-end runs of the `fedids` binary: generate, train, calibrate,
//! detect, evaluate, plus exit-code behavior on bad input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fedids(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedids"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(output: &Output) {
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn line_count(path: &PathBuf) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn full_pipeline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    fs::write(
        root.join("config.toml"),
        "Nb_clients = 4\nNb_rounds = 3\nEpochs = 2\nBatch_size = 32\nlr = 0.012\nseed = 7\n",
    )
    .unwrap();

    // Small reference mix.
    let out = fedids(
        &["gen", "--profile", "reference", "--n", "600", "--seed", "7", "--out", "data.csv"],
        root,
    );
    assert_ok(&out);
    assert!(line_count(&root.join("data.csv")) > 500);

    // Federated training.
    let out = fedids(
        &[
            "train-fed",
            "--data",
            "data.csv",
            "--config",
            "config.toml",
            "--model-out",
            "model.txt",
            "--threshold-out",
            "threshold.txt",
            "--telemetry",
            "telemetry.csv",
        ],
        root,
    );
    assert_ok(&out);
    let telemetry = fs::read_to_string(root.join("telemetry.csv")).unwrap();
    assert!(telemetry.starts_with("round,loss,seconds"));
    assert_eq!(telemetry.lines().count(), 4, "header plus three rounds");

    // Detection produces one verdict per row.
    let out = fedids(
        &[
            "detect",
            "--model",
            "model.txt",
            "--threshold",
            "threshold.txt",
            "--data",
            "data.csv",
            "--out",
            "verdicts.csv",
        ],
        root,
    );
    assert_ok(&out);
    assert_eq!(line_count(&root.join("verdicts.csv")), line_count(&root.join("data.csv")));
    let verdicts = fs::read_to_string(root.join("verdicts.csv")).unwrap();
    assert!(verdicts.starts_with("flow_id,re,label"));
    assert!(verdicts.contains(",malicious"));

    // Plain evaluation.
    let out = fedids(
        &[
            "eval",
            "--model",
            "model.txt",
            "--threshold",
            "threshold.txt",
            "--test",
            "data.csv",
            "--report",
            "report.csv",
        ],
        root,
    );
    assert_ok(&out);
    let report = fs::read_to_string(root.join("report.csv")).unwrap();
    assert!(report.starts_with("accuracy,f1,fpr,tp,tn,fp,fn,seconds"));

    // Per-attack breakdown.
    let out = fedids(
        &[
            "eval",
            "per-attack",
            "--model",
            "model.txt",
            "--threshold",
            "threshold.txt",
            "--test",
            "data.csv",
            "--report",
            "per_attack.csv",
        ],
        root,
    );
    assert_ok(&out);
    assert_eq!(line_count(&root.join("per_attack.csv")), 3, "header plus two attacks");

    // Standalone local training plus recalibration at another multiplier.
    let out = fedids(
        &[
            "train-local",
            "--data",
            "data.csv",
            "--config",
            "config.toml",
            "--model-out",
            "local_model.txt",
        ],
        root,
    );
    assert_ok(&out);
    let out = fedids(
        &[
            "calibrate",
            "--model",
            "local_model.txt",
            "--val",
            "data.csv",
            "--out",
            "local_threshold.txt",
            "--multiplier",
            "4.0",
        ],
        root,
    );
    assert_ok(&out);
    assert!(fs::read_to_string(root.join("local_threshold.txt"))
        .unwrap()
        .contains("multiplier 4"));
}

#[test]
fn generation_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    for name in ["a.csv", "b.csv"] {
        let out = fedids(
            &["gen", "--profile", "synflood", "--n", "40", "--seed", "11", "--out", name],
            root,
        );
        assert_ok(&out);
    }
    let a = fs::read_to_string(root.join("a.csv")).unwrap();
    let b = fs::read_to_string(root.join("b.csv")).unwrap();
    assert_eq!(a, b);

    let out = fedids(
        &["gen", "--profile", "synflood", "--n", "40", "--seed", "12", "--out", "c.csv"],
        root,
    );
    assert_ok(&out);
    assert_ne!(a, fs::read_to_string(root.join("c.csv")).unwrap());
}

#[test]
fn featurize_converts_packet_records() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let packets = "\
timestamp,src_ip,dst_ip,src_port,dst_port,protocol,length,tcp_flags,ttl,tcp_window
0.00,10.0.0.1,10.0.0.2,4000,80,TCP,60,2,64,65535
0.10,10.0.0.1,10.0.0.2,4000,80,TCP,120,24,64,65535
0.20,10.0.0.3,10.0.0.2,5000,53,UDP,80,0,64,0
1.50,10.0.0.1,10.0.0.2,4000,80,TCP,60,17,64,65535
";
    fs::write(root.join("packets.csv"), packets).unwrap();
    let out = fedids(
        &["featurize", "--packets", "packets.csv", "--tw", "1.0", "--out", "flows.csv"],
        root,
    );
    assert_ok(&out);
    // Three flows: two windows of the TCP 5-tuple plus the UDP flow.
    assert_eq!(line_count(&root.join("flows.csv")), 4);
    let flows = fs::read_to_string(root.join("flows.csv")).unwrap();
    assert!(flows.lines().skip(1).all(|l| l.ends_with(",unknown")));
}

#[test]
fn validation_problems_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // eval without arguments or subcommand.
    let out = fedids(&["eval"], root);
    assert_eq!(out.status.code(), Some(2));

    // Unknown profile.
    let out = fedids(&["gen", "--profile", "slowloris", "--n", "5", "--out", "x.csv"], root);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown profile"));

    // Malformed CSV cell.
    fs::write(
        root.join("bad.csv"),
        "timestamp,src_ip,dst_ip,src_port,dst_port,protocol,length,tcp_flags,ttl,tcp_window\nabc,a,b,1,2,TCP,60,0,64,0\n",
    )
    .unwrap();
    let out = fedids(&["featurize", "--packets", "bad.csv", "--out", "y.csv"], root);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-numeric cell"));

    // Bad config key.
    fs::write(root.join("bad.toml"), "nb_rounds = 3\n").unwrap();
    fs::write(
        root.join("tiny.csv"),
        "timestamp,src_ip,dst_ip,src_port,dst_port,protocol,length,tcp_flags,ttl,tcp_window\n",
    )
    .unwrap();
    let out = fedids(
        &[
            "train-fed",
            "--data",
            "tiny.csv",
            "--config",
            "bad.toml",
            "--model-out",
            "m",
            "--threshold-out",
            "t",
            "--telemetry",
            "tel",
        ],
        root,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_problems_exit_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = fedids(
        &[
            "detect",
            "--model",
            "missing_model.txt",
            "--threshold",
            "t.txt",
            "--data",
            "d.csv",
            "--out",
            "v.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}
