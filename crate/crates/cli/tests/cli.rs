use std::process::{Command, Output};

use gametree::branching::MonteCarloStats;
use gametree::exact_dist::WorstCaseReport;
use gametree::pmf::parse_rational;
use gametree::CostPmf;

fn gametree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gametree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn worst_input_prints_the_bit_string() {
    let out = gametree(&["worst-input", "--m", "2", "--k", "1", "--root", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0101\n");
    let out = gametree(&["worst-input", "--m", "2", "--k", "2", "--root", "0"]);
    assert_eq!(stdout(&out), "0001000100010101\n");
}

#[test]
fn exact_pmf_json_round_trips() {
    let out = gametree(&[
        "exact-pmf",
        "--m",
        "2",
        "--k",
        "1",
        "--input",
        "0101",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let law: CostPmf = serde_json::from_slice(&out.stdout).unwrap();
    let want = CostPmf::from_pairs([
        (2, parse_rational("1/4").unwrap()),
        (3, parse_rational("1/2").unwrap()),
        (4, parse_rational("1/4").unwrap()),
    ]);
    assert_eq!(law, want);
    let raw: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(raw["3"], "1/2");
}

#[test]
fn exact_pmf_of_the_worst_input_by_recursion() {
    let by_input = gametree(&[
        "exact-pmf",
        "--m",
        "3",
        "--input",
        "001001001",
        "--format",
        "csv",
    ]);
    let by_root = gametree(&[
        "exact-pmf",
        "--m",
        "3",
        "--k",
        "1",
        "--root",
        "1",
        "--format",
        "csv",
    ]);
    assert!(by_input.status.success() && by_root.status.success());
    assert_eq!(stdout(&by_input), stdout(&by_root));
    assert!(stdout(&by_root).starts_with("cost,probability\n"));
}

#[test]
fn table_row_for_binary_trees() {
    let out = gametree(&["table1", "--m", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(row, ["2", "0.754", "0.0938", "4.060"]);

    let out = gametree(&["table1", "--m", "2,10,100", "--format", "csv"]);
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(&rows[1], vec!["10", "0.788", "0.0564", "4.707"].as_slice());
    assert_eq!(&rows[2], vec!["100", "0.856", "0.0117", "6.928"].as_slice());
}

#[test]
fn stochastic_commands_are_reproducible_and_echo_the_seed() {
    let args = [
        "monte-carlo",
        "--m",
        "2",
        "--k",
        "4",
        "--runs",
        "500",
        "--seed",
        "17",
        "--format",
        "json",
    ];
    let a = gametree(&args);
    let b = gametree(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let stats: MonteCarloStats = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(stats.seed, 17);
    assert_eq!(stats.runs, 500);

    let eval = [
        "evaluate",
        "--m",
        "2",
        "--input",
        "0110100110010110",
        "--seed",
        "5",
        "--runs",
        "4",
    ];
    assert_eq!(gametree(&eval).stdout, gametree(&eval).stdout);
    assert!(stdout(&gametree(&eval)).contains("seed"));

    let sim = gametree(&[
        "simulate", "--m", "2", "--k", "3", "--seed", "8", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&sim.stdout).unwrap();
    assert_eq!(v["seed"], 8);
}

#[test]
fn dominance_passes_on_small_trees() {
    let out = gametree(&["dominance", "--m", "2", "--k", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: WorstCaseReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.passed());
    assert_eq!(report.inputs_scanned, 16);
}

#[test]
fn caps_can_be_lowered_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gametree"))
        .args(["exact-pmf", "--m", "2", "--k", "2"])
        .env("GAMETREE_MAX_PMF_SUPPORT", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max-pmf-support"));

    let out = gametree(&["dominance", "--m", "2", "--k", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max-exhaustive-n"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(gametree(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        gametree(&["worst-input", "--m", "2", "--k", "1", "--root", "7"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gametree(&["evaluate", "--m", "2", "--input", "01x1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gametree(&["tail-bound", "--kappa", "1.5", "--t", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gametree(&["monte-carlo", "--m", "2", "--k", "2", "--runs", "0"])
            .status
            .code(),
        Some(2)
    );
    let out = gametree(&[
        "exact-pmf",
        "--m",
        "2",
        "--max-pmf-support",
        "0",
        "--k",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tail_bound_is_decreasing_in_t() {
    let out = gametree(&[
        "tail-bound",
        "--kappa",
        "3",
        "--t",
        "0.5,1,2",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let bounds: Vec<f64> = v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["bound"].as_f64().unwrap())
        .collect();
    assert!(bounds.windows(2).all(|w| w[0] > w[1]));
    assert_eq!(v["constants"]["c"], 1.53);
}

#[test]
fn constants_carry_provenance() {
    let out = gametree(&["constants", "--m", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("quantity,value,provenance\n"));
    assert!(text.contains("d,0.0938094498867,fixed-point"));
    assert!(text.contains("toll_sup_ratio,"));
}

#[test]
fn converge_reports_every_level() {
    let out = gametree(&["converge", "--m", "2", "--k-max", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}
