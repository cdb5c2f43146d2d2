use std::path::Path;
use std::process::Command;

use ribotide::config::SubcommandKind;
use ribotide::{parse_config, run, RunError};
use ribotide_core::EngineTag;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ribotide"))
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn sweep_flags_select_the_figure_three_parameters() {
    let cfg = parse_config([
        "ribotide", "sweep", "--n1", "100", "--n2", "200", "--n3", "100", "--c", "0.025",
    ])
    .unwrap();
    assert_eq!(cfg.subcommand, SubcommandKind::Sweep);
    assert_eq!((cfg.n1, cfg.n2.clone(), cfg.n3), (100, vec![200], 100));
    assert_eq!(cfg.c, vec![0.025]);
    assert_eq!(cfg.rho0.len(), 99);
    assert_eq!(cfg.engines, vec![EngineTag::Deterministic, EngineTag::Limit]);
}

#[test]
fn limit_flags_are_accepted() {
    let cfg = parse_config(["ribotide", "limit", "--c0", "20", "--rho0", "0.045"]).unwrap();
    assert_eq!(cfg.subcommand, SubcommandKind::Limit);
    assert_eq!(cfg.c0, 20.0);
    assert_eq!(cfg.rho0, vec![0.045]);
}

#[test]
fn out_of_range_density_is_a_usage_error() {
    let err = parse_config(["ribotide", "sweep", "--rho0", "1.5"]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(msg.contains("--rho0") && msg.contains("(0, 1)"), "{msg}");
}

#[test]
fn config_file_is_overridden_by_flags_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cfg.json");
    std::fs::write(&file, r#"{"n1": 40, "c": [0.1, 0.2], "rho0": 0.3}"#).unwrap();
    let f = file.to_str().unwrap();
    let cfg = parse_config(["ribotide", "sweep", "--config", f, "--n1", "50"]).unwrap();
    assert_eq!(cfg.n1, 50);
    assert_eq!(cfg.c, vec![0.1, 0.2]);
    assert_eq!(cfg.rho0, vec![0.3]);

    std::fs::write(&file, r#"{"n1": 40, "colour": 3}"#).unwrap();
    let err = parse_config(["ribotide", "sweep", "--config", f]).unwrap_err();
    assert!(matches!(err, RunError::Usage(_)));
    assert!(err.to_string().contains("colour"), "{err}");
}

#[test]
fn outputs_carry_the_documented_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let small = ["--n1", "20", "--n3", "20", "--output", out];
    let sweep = [
        &["ribotide", "sweep", "--n2", "40", "--c", "0.1", "--rho0", "0.2,0.6"][..],
        &small,
    ]
    .concat();
    run(&parse_config(sweep).unwrap()).unwrap();
    assert_eq!(
        first_line(&dir.path().join("exit_flow.csv")),
        "rho0,c,j3_tasep,se_tasep,j3_det,j3_limit"
    );

    let profile = [&["ribotide", "profile", "--n2", "40", "--rho0", "0.3"][..], &small].concat();
    run(&parse_config(profile).unwrap()).unwrap();
    assert_eq!(
        first_line(&dir.path().join("profile_rho0=0.3.csv")),
        "n,rho_s,rho_e,flow_s"
    );

    let conv = [
        &["ribotide", "convergence", "--n2", "50,100", "--rho0", "0.1,0.2"][..],
        &small,
    ]
    .concat();
    let summary = run(&parse_config(conv).unwrap()).unwrap();
    assert_eq!(summary.rows, 2);
    assert_eq!(first_line(&dir.path().join("convergence.csv")), "n2,sup_error");
}

#[test]
fn sweep_above_half_leaves_the_limit_blank() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let argv = [
        "ribotide", "sweep", "--n1", "20", "--n2", "40", "--n3", "20", "--c", "0.1", "--rho0", "0.6", "--output", out,
    ];
    run(&parse_config(argv).unwrap()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("exit_flow.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "NA");
    assert!(row[4].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn json_output_mirrors_the_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let argv = [
        "ribotide", "limit", "--rho0", "0.1,0.2", "--format", "json", "--output", out,
    ];
    run(&parse_config(argv).unwrap()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("limit.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for key in ["rho0", "c0", "rho_star", "j3_limit"] {
        assert!(rows[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn binary_reports_exit_codes_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = bin()
        .args(["limit", "--rho0", "0.1", "--output", out])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap().lines().count(), 1);

    let usage = bin().args(["sweep", "--rho0", "1.5"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    assert!(String::from_utf8(usage.stderr).unwrap().contains("--rho0"));

    let bogus = bin().args(["sweep", "--no-such-flag"]).output().unwrap();
    assert_eq!(bogus.status.code(), Some(2));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    let io = bin()
        .args(["limit", "--rho0", "0.1", "--output", target.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(io.status.code(), Some(4));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let argv = [
            "ribotide",
            "tasep",
            "--n1",
            "10",
            "--n2",
            "20",
            "--n3",
            "10",
            "--rho0",
            "0.2,0.7",
            "--c",
            "0.1",
            "--sweeps",
            "2000",
            "--seed",
            "3",
            "--output",
            dir.path().to_str().unwrap(),
        ];
        run(&parse_config(argv).unwrap()).unwrap();
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("tasep.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}
