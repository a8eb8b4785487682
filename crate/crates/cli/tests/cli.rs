//! End-to-end runs of the installed binary, one per subcommand.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ppwass(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppwass"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json_lines(output: &Output) -> Vec<serde_json::Value> {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8_lossy(&output.stdout)
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("stdout line is JSON"))
        .collect()
}

#[test]
fn d1_subcommand_reproduces_the_worked_example() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("a.jsonl"), "[0.5, 1.0, 3.8, 7.2]\n").unwrap();
    fs::write(tmp.path().join("b.jsonl"), "[0.7, 2.0, 2.0, 5.0, 6.0]\n").unwrap();
    let out = ppwass(
        &[
            "d1", "--space", "interval", "--length", "8", "--alpha", "1", "--method", "all",
            "a.jsonl", "b.jsonl",
        ],
        tmp.path(),
    );
    let records = stdout_json_lines(&out);
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert!((r["d1"].as_f64().unwrap() - 8.2).abs() < 1e-12);
    assert!((r["d1_sorted"].as_f64().unwrap() - 8.2).abs() < 1e-12);
    assert!((r["d1_cdf_area"].as_f64().unwrap() - 8.2).abs() < 1e-12);
    assert!((r["cdf_area"].as_f64().unwrap() - 1.64).abs() < 1e-12);
    assert_eq!(r["upper_bound"].as_f64().unwrap(), 45.0);
}

#[test]
fn d1_subcommand_handles_box_and_finite_metric_spaces() {
    let tmp = tempfile::tempdir().unwrap();
    // Box: two one-point measures at opposite corners of the unit square.
    fs::write(tmp.path().join("a.jsonl"), "[[0.0, 0.0]]\n").unwrap();
    fs::write(tmp.path().join("b.jsonl"), "[[1.0, 1.0]]\n").unwrap();
    let out = ppwass(
        &[
            "d1", "--space", "box", "--dim", "2", "--side", "1", "--alpha", "1", "a.jsonl",
            "b.jsonl",
        ],
        tmp.path(),
    );
    let records = stdout_json_lines(&out);
    assert!((records[0]["d1"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);

    // Finite metric space from a CSV table; {0} vs {1} costs 1, and the
    // zero measure line pairs {2} with the augmentation point.
    fs::write(tmp.path().join("costs.csv"), "0,1,2\n1,0,2.5\n2,2.5,0\n").unwrap();
    fs::write(tmp.path().join("fa.jsonl"), "[0]\n[]\n").unwrap();
    fs::write(tmp.path().join("fb.jsonl"), "[1]\n[2]\n").unwrap();
    let out = ppwass(
        &[
            "d1",
            "--space",
            "finite-metric",
            "--metric-csv",
            "costs.csv",
            "--anchor-index",
            "0",
            "--alpha",
            "0.5",
            "fa.jsonl",
            "fb.jsonl",
        ],
        tmp.path(),
    );
    let records = stdout_json_lines(&out);
    assert_eq!(records[0]["d1"].as_f64().unwrap(), 1.0);
    // rho(s_alpha, 2) = alpha + rho(2, anchor 0) = 0.5 + 2.
    assert_eq!(records[1]["d1"].as_f64().unwrap(), 2.5);
}

#[test]
fn wp_subcommand_emits_the_record_schema() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("a.jsonl"), "[1.0]\n[3.0]\n").unwrap();
    fs::write(tmp.path().join("b.jsonl"), "[0.0]\n[5.0]\n").unwrap();
    let out = ppwass(
        &[
            "wp", "--space", "interval", "--length", "5", "--alpha", "1", "--p", "1", "a.jsonl",
            "b.jsonl",
        ],
        tmp.path(),
    );
    let records = stdout_json_lines(&out);
    let r = &records[0];
    assert_eq!(r["mode"], "equal");
    assert_eq!(r["n"], 2);
    assert_eq!(r["N"], 2);
    assert!(r["seed"].is_null());
    assert!((r["value"].as_f64().unwrap() - 1.5).abs() < 1e-12);

    // Weighted law goes through the general route.
    fs::write(
        tmp.path().join("c.jsonl"),
        "{\"points\": [0.0], \"weight\": 0.5}\n{\"points\": [4.0], \"weight\": 0.5}\n",
    )
    .unwrap();
    fs::write(tmp.path().join("d.jsonl"), "[1.0]\n").unwrap();
    let out = ppwass(
        &[
            "wp", "--space", "interval", "--length", "5", "--alpha", "1", "--p", "1", "c.jsonl",
            "d.jsonl",
        ],
        tmp.path(),
    );
    let records = stdout_json_lines(&out);
    assert_eq!(records[0]["mode"], "general");
    assert!((records[0]["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn sample_subcommand_writes_dataset_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ppwass(
        &[
            "sample", "--space", "interval", "--length", "1", "--alpha", "1", "--sampler",
            "poisson", "--rate", "2.0", "--count", "50", "--seed", "9", "--out-file",
            "data.jsonl",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = fs::read_to_string(tmp.path().join("data.jsonl")).unwrap();
    assert_eq!(data.lines().count(), 50);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("data.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["master_seed"], 9);
    assert_eq!(meta["count"], 50);

    // Identical seeds reproduce the dataset byte for byte.
    let rerun = ppwass(
        &[
            "sample", "--space", "interval", "--length", "1", "--alpha", "1", "--sampler",
            "poisson", "--rate", "2.0", "--count", "50", "--seed", "9", "--out-file",
            "data2.jsonl",
        ],
        tmp.path(),
    );
    assert!(rerun.status.success());
    let data2 = fs::read_to_string(tmp.path().join("data2.jsonl")).unwrap();
    assert_eq!(data, data2);

    // Inhomogeneous and Hawkes variants parse and run.
    for extra in [
        vec![
            "--sampler",
            "inhomogeneous",
            "--lambda-max",
            "2.0",
            "--intensity",
            "linear:0,2",
        ],
        vec![
            "--sampler", "hawkes", "--baseline", "1.0", "--branching", "0.5", "--decay", "2.0",
        ],
    ] {
        let mut args = vec![
            "sample", "--space", "interval", "--length", "1", "--alpha", "1", "--count", "10",
            "--seed", "1", "--out-file", "x.jsonl",
        ];
        args.extend(extra);
        let out = ppwass(&args, tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bounds_eval_prints_formula_records() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ppwass(
        &[
            "bounds",
            "eval",
            "--n",
            "100",
            "--p",
            "1",
            "--kappa",
            "0.5",
            "--sigma",
            "1.5",
            "--eps",
            "1.0",
            "--m",
            "1",
            "--m-s",
            "10",
            "--target-eps",
            "0.1353352832366127",
            "--poisson-rate",
            "1.0",
        ],
        tmp.path(),
    );
    let records = stdout_json_lines(&out);
    let by_name = |name: &str| {
        records
            .iter()
            .find(|r| r["formula"] == name)
            .unwrap_or_else(|| panic!("missing formula {name}"))
            .clone()
    };
    assert!(by_name("upper_rate")["value"].as_f64().unwrap() > 0.0);
    assert!(by_name("upper_rate_interval")["value"].as_f64().unwrap() > 0.0);
    assert!(by_name("upper_rate_poisson")["value"].as_f64().unwrap() > 0.0);
    assert!(
        (by_name("lower_rate")["value"].as_f64().unwrap() - 0.0022992465073215145).abs() < 1e-9
    );
    assert!(
        (by_name("covering_bound_nm")["value"].as_f64().unwrap() - 29.901100113049498).abs()
            < 1e-9
    );
    assert!(by_name("concentration_bound")["value"].as_f64().unwrap() > 0.0);
    assert!(by_name("min_sample_size")["value"].as_f64().unwrap() >= 1.0);
    assert!(by_name("upper_rate")["note"].as_str().unwrap().contains("C = 1"));
}

#[test]
fn run_and_fit_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "schema_version": 1,
        "experiment": "convergence",
        "sampler": "poisson",
        "rate": 1.0,
        "space": "interval",
        "length": 1.0,
        "alpha": 1.0,
        "p": 1.0,
        "n_grid": [8, 16, 32, 64],
        "replications": 6,
        "master_seed": 33,
    });
    fs::write(tmp.path().join("config.json"), serde_json::to_string_pretty(&config).unwrap())
        .unwrap();
    let out = ppwass(
        &["run", "config.json", "--out", "results", "--threads", "2"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["raw.csv", "timings.csv", "aggregate.csv", "plot.txt", "meta.json"] {
        assert!(tmp.path().join("results").join(file).exists(), "{file} missing");
    }

    let fit_out = ppwass(
        &["fit", "results/aggregate.csv", "--abscissa", "sqrt-logn-loglogn"],
        tmp.path(),
    );
    let records = stdout_json_lines(&fit_out);
    let fit = &records[0];
    assert_eq!(fit["rows_used"], 4);
    assert!(fit["slope"].as_f64().unwrap() < 0.0);

    // Seed override changes the raw results.
    let out = ppwass(
        &["run", "config.json", "--out", "results2", "--seed", "34"],
        tmp.path(),
    );
    assert!(out.status.success());
    let a = fs::read(tmp.path().join("results/raw.csv")).unwrap();
    let b = fs::read(tmp.path().join("results2/raw.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn run_handles_concentration_campbell_and_bounds_table() {
    let tmp = tempfile::tempdir().unwrap();
    let base = serde_json::json!({
        "schema_version": 1,
        "sampler": "poisson",
        "rate": 1.0,
        "space": "interval",
        "length": 1.0,
        "alpha": 1.0,
        "p": 1.0,
        "master_seed": 5,
    });
    let mut conc = base.clone();
    conc["experiment"] = "concentration".into();
    conc["n_grid"] = serde_json::json!([16]);
    conc["replications"] = 60.into();
    fs::write(tmp.path().join("conc.json"), conc.to_string()).unwrap();
    let out = ppwass(&["run", "conc.json", "--out", "conc_out"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("conc_out/concentration.csv").exists());
    let meta = fs::read_to_string(tmp.path().join("conc_out/meta.json")).unwrap();
    assert!(meta.contains("empirical A2 constants"));

    let mut campbell = base.clone();
    campbell["experiment"] = "campbell".into();
    campbell["n_grid"] = serde_json::json!([500]);
    campbell["replications"] = 1.into();
    campbell["campbell_f"] = "linear".into();
    fs::write(tmp.path().join("campbell.json"), campbell.to_string()).unwrap();
    let out = ppwass(&["run", "campbell.json", "--out", "campbell_out"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("campbell_out/campbell.csv").exists());

    let mut table = base;
    table["experiment"] = "bounds_table".into();
    table["n_grid"] = serde_json::json!([16, 64, 256]);
    table["replications"] = 1.into();
    fs::write(tmp.path().join("table.json"), table.to_string()).unwrap();
    let out = ppwass(&["run", "table.json", "--out", "table_out"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("table_out/bounds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
