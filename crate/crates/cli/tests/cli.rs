use std::process::{Command, Output};

fn ofjackson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofjackson"))
        .args(args)
        .env_remove("OFJACKSON_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value column of an `analyze` table.
fn quantity(csv: &str, name: &str) -> String {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")))
        .unwrap_or_else(|| panic!("no {name} row in\n{csv}"))
        .to_string()
}

#[test]
fn analyze_stable_node() {
    let out = ofjackson(&["analyze", "--lambda", "15000", "--q-nf", "0.2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    assert!(csv.starts_with("quantity,value\n"));
    assert_eq!(quantity(&csv, "verdict"), "stable");
    let mean: f64 = quantity(&csv, "mean_sojourn_openflow").parse().unwrap();
    assert!((mean - 0.00018570734753347673).abs() < 1e-15);
}

#[test]
fn analyze_unstable_controller_exits_2() {
    let out = ofjackson(&["analyze", "--lambda", "30000", "--q-nf", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
    let csv = stdout(&out);
    assert!(quantity(&csv, "verdict").contains("controller"), "{csv}");
    assert_eq!(quantity(&csv, "mean_sojourn_openflow"), "");
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(ofjackson(&["analyze", "--lambda", "abc"]).status.code(), Some(1));
    assert_eq!(ofjackson(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(ofjackson(&["analyze", "--q-nf", "0.2"]).status.code(), Some(1));
    assert_eq!(ofjackson(&["analyze", "--lambda", "100", "--q-nf", "1.5"]).status.code(), Some(1));
    let help = ofjackson(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("figure"));
}

#[test]
fn json_output_format() {
    let out = ofjackson(&["--format", "json", "analyze", "--lambda", "2000", "--q-nf", "1.0"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["quantity", "value"]));
    let mean = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r[0] == "mean_sojourn_openflow")
        .unwrap()[1]
        .as_f64()
        .unwrap();
    assert!((mean - 0.0004819381284826747).abs() < 1e-15);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"node": {"lambda": 15000, "q_nf": 0.2, "mu_switch_us": 9.8}, "controller": {"mu_controller_us": 240}}"#,
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let from_file = stdout(&ofjackson(&["--config", path, "analyze"]));
    assert_eq!(quantity(&from_file, "lambda"), "15000");
    let overridden = stdout(&ofjackson(&["--config", path, "analyze", "--lambda", "5000", "--q-nf", "0.5"]));
    assert_eq!(quantity(&overridden, "lambda"), "5000");
    let mean: f64 = quantity(&overridden, "mean_sojourn_openflow").parse().unwrap();
    assert!((mean - 0.0003158661629789531).abs() < 1e-15);

    std::fs::write(&cfg, r#"{"node": {"lambda": 1, "q_nf": 0.2, "bogus": 3}}"#).unwrap();
    let bad = ofjackson(&["--config", path, "analyze"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("bogus"));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("dist.csv");
    let args = ["distribution", "--lambda", "15000", "--q-nf", "0.2", "--points", "5"];
    let direct = stdout(&ofjackson(&args));
    let mut with_output = vec!["-o", file.to_str().unwrap()];
    with_output.extend(args);
    let out = ofjackson(&with_output);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&file).unwrap(), direct);
    assert_eq!(direct.lines().count(), 6);
    assert!(direct.starts_with("t,pdf,ccdf\n0,"));
}

#[test]
fn figure_csv_is_byte_identical() {
    let args = ["figure", "fig3", "--packets", "10000", "--seed", "11"];
    let first = ofjackson(&args);
    let second = ofjackson(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let csv = stdout(&first);
    assert!(csv.starts_with("q_nf,rho_c,modified_jackson_mean,sim_mean,sim_ci\n"));
    assert_eq!(csv.lines().count(), 1 + 18);
}

#[test]
fn seed_from_environment_unless_flag() {
    let args = ["simulate", "--lambda", "15000", "--q-nf", "0.2", "--packets", "10000", "--replications", "2"];
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ofjackson"));
        cmd.args(args).args(extra).env_remove("OFJACKSON_SEED");
        if let Some(v) = env {
            cmd.env("OFJACKSON_SEED", v);
        }
        stdout(&cmd.output().unwrap())
    };
    let default = run(None, &[]);
    let from_env = run(Some("42"), &[]);
    assert_eq!(from_env, run(None, &["--seed", "42"]));
    assert_ne!(default, from_env);
    assert_eq!(run(Some("42"), &["--seed", "1"]), default);
    assert!(default.lines().nth(1).unwrap().ends_with(",1"));
}

#[test]
fn chain_of_two_nodes() {
    let out = ofjackson(&["chain", "--node", "1000,0.5", "--node", "1000,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    let second: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(second[0], "2");
    let q_jack: f64 = second[4].parse().unwrap();
    assert!((q_jack - 0.5 * 1000.0 / 2500.0).abs() < 1e-12);
    assert!(csv.lines().last().unwrap().starts_with("aggregate,2000,"));

    let unstable = ofjackson(&["chain", "--node", "9000,0.5", "--node", "9000,0.5"]);
    assert_eq!(unstable.status.code(), Some(2));
}

#[test]
fn sweep_range_keeps_unstable_rows() {
    let out = ofjackson(&["sweep", "--variable", "lambda", "--range", "1000:9000:4000", "--q-nf", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("lambda,"));
    assert!(lines[3].starts_with("9000,") && lines[3].contains("unstable"));
}

#[test]
fn dimension_single_bound() {
    let out = ofjackson(&["dimension", "--q-nf", "0.5", "--delay-bound-us", "500"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert!(csv.starts_with("delay_bound,q_nf,zero_load_sojourn,lambda_sup,max_throughput,feasible\n"));
    assert!(csv.lines().nth(1).unwrap().ends_with(",true"));
}

#[test]
fn validate_quick_selected_criteria() {
    let out = ofjackson(&["validate", "--quick", "--only", "1,2,7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    assert!(text.contains("3 of 3 criteria passed (quick mode)"));
    assert_eq!(ofjackson(&["validate", "--only", "11"]).status.code(), Some(1));
}
