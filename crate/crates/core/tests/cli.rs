use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_stratrep");
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(cwd)
        .env_remove("STRATREP_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn estimate_prints_json_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = format!("{DATA}/two_strata.csv");
    let o = run(&["estimate", "--input", &input], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["variance"]["value"], 5.0);

    let fay = run(
        &[
            "estimate",
            "--input",
            &input,
            "--scheme",
            "fay-brr",
            "--epsilon",
            "0.5",
        ],
        dir.path(),
    );
    let w: serde_json::Value = serde_json::from_str(&stdout(&fay)).unwrap();
    assert_eq!(w["variance"]["value"], v["variance"]["value"]);
    assert_eq!(w["dof"], v["dof"]);
}

#[test]
fn estimate_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let input = format!("{DATA}/counties.csv");
    let out = dir.path().join("nested/report.json");
    let o = run(
        &[
            "estimate",
            "--input",
            &input,
            "--output",
            out.to_str().unwrap(),
            "--dof-rule",
            "fixed-h",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("variance 486327.265625"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["dof"]["used"], 9.0);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = format!("{DATA}/two_strata.csv");
    let o = Command::new(BIN)
        .args(["replicates", "--input", &input])
        .env("STRATREP_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("replicates.csv")).unwrap();
    assert!(csv.starts_with("stratum,psu,weight,rw1,rw2,rw3,rw4\n"));
}

#[test]
fn hadamard_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["hadamard", "--order", "4"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1,1,1,1\n1,-1,1,-1\n1,1,-1,-1\n1,-1,-1,1\n");

    let o = run(&["hadamard", "--order", "12"], dir.path());
    let rows: Vec<Vec<i64>> = stdout(&o)
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let dot: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            assert_eq!(dot, if i == j { 12 } else { 0 });
        }
    }

    let o = run(&["hadamard", "--order", "6"], dir.path());
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "stratum,psu,weight,y\nA,1,0,1\nA,2,1,1\n").unwrap();
    let code = |args: &[&str]| run(args, dir.path()).status.code();
    assert_eq!(
        code(&["estimate", "--input", bad.to_str().unwrap()]),
        Some(3)
    );
    assert_eq!(code(&["estimate", "--input", "missing.csv"]), Some(7));
    let good = format!("{DATA}/two_strata.csv");
    assert_eq!(
        code(&[
            "estimate",
            "--input",
            &good,
            "--scheme",
            "brr",
            "--epsilon",
            "0.5"
        ]),
        Some(6)
    );
    assert_eq!(
        code(&["estimate", "--input", &good, "--level", "1.5"]),
        Some(6)
    );
    assert_eq!(
        code(&["estimate", "--input", &good, "--order", "6"]),
        Some(5)
    );
    assert_eq!(
        code(&["estimate", "--input", &good, "--dof-rule", "fancy"]),
        Some(4)
    );
    assert_eq!(code(&["estimate"]), Some(2));
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "strata = 0\nn_reps = 100\nseed = 1\n[sigma_profile]\ntype = \"equal\"\nsigma = 1.0\n",
    )
    .unwrap();
    assert_eq!(
        code(&["simulate", "--config", cfg.to_str().unwrap()]),
        Some(4)
    );
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{DATA}/smoke.toml");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(
            &[
                "simulate",
                "--config",
                &config,
                "--output",
                out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("200 reps, H=5"));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let o = run(&["simulate", "--config", &config], dir.path());
    assert!(o.status.success());
    assert!(dir.path().join("simulation.json").exists());
}
