//! End-to-end command tests against the bundled configs.

use std::fs;
use std::path::{Path, PathBuf};

use hjscc_cli::{run, Cli, CliError, Command, RegionArg};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli(command: Command) -> Cli {
    Cli {
        threads: 0,
        command,
    }
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

#[test]
fn capacity_of_the_bundled_bsc() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cap.json");
    run(cli(Command::Capacity {
        channel: configs().join("bsc011.json"),
        tol: 1e-6,
        out: Some(out.clone()),
    }))
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let cap = v["capacity"].as_f64().unwrap();
    assert!((cap - 0.5000).abs() < 1e-4, "capacity {cap}");
    assert!(v["gap"].as_f64().unwrap() <= 1e-6);
    // manifest written alongside, listing the output
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cap.json.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["outputs"][0].as_str().unwrap(), out.display().to_string());
}

#[test]
fn capacity_of_a_noiseless_channel_is_one_bit() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("identity.json");
    fs::write(
        &ch,
        r#"{"schema_version":1,"transition":[[1.0,0.0],[0.0,1.0]]}"#,
    )
    .unwrap();
    let out = dir.path().join("cap.json");
    run(cli(Command::Capacity {
        channel: ch,
        tol: 1e-7,
        out: Some(out.clone()),
    }))
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["capacity"].as_f64().unwrap() - 1.0).abs() < 1e-7);
}

#[test]
fn malformed_json_exits_with_parse_code_and_location() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("broken.json");
    fs::write(&ch, "{\"transition\": [[0.5, 0.5\n]").unwrap();
    let err = run(cli(Command::Capacity {
        channel: ch,
        tol: 1e-6,
        out: None,
    }))
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(
        msg.contains("line") && msg.contains("column"),
        "message should carry the location: {msg}"
    );
}

#[test]
fn frontier_single_lax_cell_hits_the_necessary_leakage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("frontier.csv");
    run(cli(Command::Frontier {
        scenario: configs().join("dsbs.json"),
        region: RegionArg::R1,
        grid: "0.5;0.5".into(),
        budget: 4,
        seed: 9,
        out: out.clone(),
    }))
    .unwrap();
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d1_max,d2_max,leakage_lb,d1,d2,feasible,restarts_used"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let leakage: f64 = row[2].parse().unwrap();
    let i_se = 1.0 - h2(0.18);
    assert!((leakage - i_se).abs() < 1e-6, "leakage {leakage}");
    assert_eq!(row[5], "true");
    assert!(lines.next().is_none());
}

#[test]
fn frontier_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        run(cli(Command::Frontier {
            scenario: configs().join("dsbs.json"),
            region: RegionArg::R1,
            grid: "0.05,0.18;0.02".into(),
            budget: 4,
            seed: 42,
            out: out.clone(),
        }))
        .unwrap();
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    // leakage nonincreasing along the d1 axis
    let text = fs::read_to_string(&a).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect();
    let l_tight: f64 = rows[0][2].parse().unwrap();
    let l_loose: f64 = rows[1][2].parse().unwrap();
    assert!(l_tight >= l_loose - 1e-9);
}

#[test]
fn frontier_five_by_five_grid_is_monotone_along_both_axes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    run(cli(Command::Frontier {
        scenario: configs().join("dsbs.json"),
        region: RegionArg::R1,
        grid: "0.02,0.06,0.10,0.14,0.18;0.0,0.02,0.04,0.06,0.08".into(),
        budget: 2,
        seed: 21,
        out: out.clone(),
    }))
    .unwrap();
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    let leak = |i: usize, j: usize| -> f64 { rows[i * 5 + j][2].parse().unwrap() };
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(rows[i * 5 + j][5], "true");
            if i > 0 {
                assert!(leak(i, j) <= leak(i - 1, j) + 1e-9);
            }
            if j > 0 {
                assert!(leak(i, j) <= leak(i, j - 1) + 1e-9);
            }
        }
    }
}

#[test]
fn simulate_constants_aux_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.json");
    let trial_csv = dir.path().join("trials.csv");
    run(cli(Command::Simulate {
        experiment: None,
        scenario: Some(configs().join("dsbs.json")),
        aux: Some(configs().join("aux_constant.json")),
        trials: 100,
        n: Some(8),
        delta: Some(0.25),
        seed: Some(5),
        out: out.clone(),
        trial_csv: Some(trial_csv.clone()),
    }))
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["enc_err_rate"].as_f64().unwrap(), 0.0);
    assert_eq!(v["dec1_err_rate"].as_f64().unwrap(), 0.0);
    assert_eq!(v["dec2_err_rate"].as_f64().unwrap(), 0.0);
    let csv = fs::read_to_string(&trial_csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "trial,enc_err,dec1_err,dec2_err,d1,d2");
    assert_eq!(csv.lines().count(), 101);
    // manifest lists both outputs
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("summary.json.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_bundled_leakage_experiment_reports_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.json");
    run(cli(Command::Simulate {
        experiment: Some(configs().join("experiment_leakage_n4.json")),
        scenario: None,
        aux: None,
        trials: 200,
        n: None,
        delta: None,
        seed: None,
        out: out.clone(),
        trial_csv: None,
    }))
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let exact = v["leakage"]["leakage_exact"].as_f64().unwrap();
    let bound = v["leakage"]["leakage_bound"].as_f64().unwrap();
    assert!(exact <= bound + 0.15, "exact {exact} vs bound {bound}");
}

#[test]
fn oversized_blocklength_exits_with_resource_code() {
    let err = run(cli(Command::Simulate {
        experiment: Some(configs().join("experiment_refinement_n12.json")),
        scenario: None,
        aux: None,
        trials: 10,
        n: Some(40),
        delta: None,
        seed: None,
        out: PathBuf::from("/tmp/never-written.json"),
        trial_csv: None,
    }))
    .unwrap_err();
    assert_eq!(err.exit_code(), 5);
    let msg = err.to_string();
    assert!(msg.contains("SIZE_EXPLOSION") && msg.contains("n <="), "{msg}");
}

#[test]
fn verify_passes_on_the_bundled_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    run(cli(Command::Verify {
        scenario: configs().join("dsbs.json"),
        samples: 60,
        seed: 3,
        budget: 2,
        out: Some(out.clone()),
    }))
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["inclusion_violations"].as_u64().unwrap(), 0);
    assert!(v["equivalence_max_dev"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn missing_simulate_inputs_are_a_usage_error() {
    let err = run(cli(Command::Simulate {
        experiment: None,
        scenario: None,
        aux: None,
        trials: 10,
        n: None,
        delta: None,
        seed: None,
        out: PathBuf::from("/tmp/unused.json"),
        trial_csv: None,
    }))
    .unwrap_err();
    assert!(matches!(err, CliError::Parse(_)));
}
