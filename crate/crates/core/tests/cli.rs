use std::path::Path;
use std::process::Command;

use percospec::io::{load_metadata, load_table, sidecar_path};

fn percospec(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_percospec")).args(args).output().unwrap().status.code().unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    load_table(path).unwrap().rows
}

#[test]
fn every_subcommand_has_help() {
    for c in [
        "sample",
        "crossing-prob",
        "arm-prob",
        "spectral-intensity",
        "noise-curve",
        "quasimult",
        "collapse",
        "hoeffding-check",
        "calibrate-lambda",
        "ou-vs-frozen",
    ] {
        assert_eq!(percospec(&[c, "--help"]), 0, "{c}");
    }
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    assert_eq!(percospec(&["crossing-prob", "--l", "0", "--output", out]), 2);
    assert_eq!(percospec(&["noise-curve", "--ts", "", "--output", out]), 2);
    assert_eq!(percospec(&["calibrate-lambda", "--ls", "8,16", "--output", out]), 2);
    assert_eq!(percospec(&["noise-curve", "--model", "boolean", "--dynamics", "frozen", "--output", out]), 2);
    assert_eq!(percospec(&["sample", "--config", "/nonexistent/config.json", "--output", out]), 2);
    assert!(!Path::new(out).exists());
}

#[test]
fn config_is_echoed_and_rows_carry_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model":"voronoi","l":3,"replicas":200,"seed":9}"#).unwrap();
    let out = dir.path().join("cross.csv");
    let code = percospec(&["crossing-prob", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--check"]);
    assert_eq!(code, 0);
    let t = load_table(&out).unwrap();
    assert_eq!(t.column("model").unwrap(), vec!["voronoi"]);
    assert_eq!(t.column("duality_mismatches").unwrap(), vec!["0"]);
    assert_eq!(t.column("seed").unwrap(), vec!["9"]);
    let m = load_metadata(&sidecar_path(&out)).unwrap();
    assert_eq!(m.config.replicas, Some(200));
    assert_eq!(m.check, Some(true));
    assert!(!m.version.is_empty());
}

#[test]
fn reruns_are_byte_identical_at_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str, extra: &[&str]| {
        let out = dir.path().join(format!("{name}-{threads}.csv"));
        let mut args = extra.to_vec();
        args.extend(["--threads", threads, "--output", out.to_str().unwrap()]);
        assert_eq!(percospec(&args), 0, "{args:?}");
        std::fs::read(out).unwrap()
    };
    let cases: [(&str, &[&str]); 4] = [
        ("hoeffding", &["hoeffding-check", "--n-points", "8", "--replicas", "20"]),
        ("ouf", &["ou-vs-frozen", "--l", "2", "--ts", "0,0.3", "--replicas", "100"]),
        ("quasimult", &["quasimult", "--R", "8", "--r2s", "2,4", "--replicas", "300"]),
        ("spectral", &["spectral-intensity", "--l", "2", "--replicas", "200"]),
    ];
    for (name, args) in cases {
        let a = run(name, "1", args);
        let b = run(name, "3", args);
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn arm_radii_give_nested_rows_and_an_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("arms.csv");
    let code = percospec(&[
        "arm-prob", "--arms", "three_half", "--r", "2", "--radii", "4,8,16", "--replicas", "500", "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 3);
    let p: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(p[0] >= p[1] && p[1] >= p[2]);
    let m = load_metadata(&sidecar_path(&out)).unwrap();
    assert!(m.notes.iter().any(|n| n.starts_with("exponent")));
}
