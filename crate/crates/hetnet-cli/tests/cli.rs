//! End-to-end tests of the `hetnet` binary: every subcommand, the exit-code
//! contract and output determinism, all on deliberately tiny instances.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hetnet"));
    c.env_remove("HETNET_TIME_BUDGET");
    c
}

/// Flags for a tiny instance every algorithm solves in well under a second.
const TINY: &[&str] = &[
    "--sc-count", "1", "--mues", "1", "--sues-per-sc", "1", "--channels", "2",
    "--tasks-per-user", "2", "--clock-levels", "3", "--total-cycles", "5e7",
];

fn generate_tiny(dir: &Path, seed: u64) -> std::path::PathBuf {
    let path = dir.join(format!("tiny-{seed}.json"));
    let out = bin()
        .args(["generate", "--seed", &seed.to_string(), "--out"])
        .arg(&path)
        .args(TINY)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_is_deterministic_and_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate_tiny(dir.path(), 7);
    let b = dir.path().join("again.json");
    let out = bin()
        .args(["generate", "--seed", "7", "--out"])
        .arg(&b)
        .args(TINY)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(v["users"].as_array().unwrap().len(), 2);
    assert_eq!(v["seed"], 7);
    assert!(v["T"].as_f64().unwrap() > 0.0);
}

#[test]
fn generate_dumps_rates_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rates = dir.path().join("rates.csv");
    let out = bin()
        .args(["generate", "--seed", "1", "--out", "-", "--dump-rates"])
        .arg(&rates)
        .args(TINY)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(&rates).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "channel,tier,user,cell,combo,rate_bps"
    );
    // 2 channels x (1 macro link + 1 single-SUE combo) = 4 data rows.
    assert_eq!(lines.count(), 4);
}

#[test]
fn solve_writes_solution_json_and_blp_dump() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = generate_tiny(dir.path(), 7);
    let lp = dir.path().join("prog.lp");
    let out = bin()
        .args(["solve", "--alg", "optimal", "--trace", "--scenario"])
        .arg(&scenario)
        .arg("--dump-blp")
        .arg(&lp)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["algorithm"], "optimal");
    let objective = v["objective"].as_f64().unwrap();
    assert!(objective > 0.0);
    assert!(v["zeta"].as_f64().unwrap() >= objective - 1e-12);
    assert!(!v["trace"]["iterations"].as_array().unwrap().is_empty());
    assert_eq!(v["timed_out"], false);
    assert!(v["runtime_s"].as_f64().unwrap() >= 0.0);

    let lp_text = fs::read_to_string(&lp).unwrap();
    assert!(lp_text.contains("Subject To"));
    assert!(lp_text.contains("Binary"));
}

#[test]
fn solve_accepts_lc_alias_and_matches_low_complexity() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = generate_tiny(dir.path(), 7);
    let run = |alg: &str| {
        let out = bin()
            .args(["solve", "--alg", alg, "--scenario"])
            .arg(&scenario)
            .output()
            .unwrap();
        assert!(out.status.success());
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        v["objective"].as_f64().unwrap()
    };
    assert_eq!(run("lc"), run("low-complexity"));
}

#[test]
fn zero_time_budget_exits_with_timeout_code() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = generate_tiny(dir.path(), 7);
    let out = bin()
        .args(["solve", "--alg", "optimal", "--time-budget", "0", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // A best-effort solution is still emitted.
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["timed_out"], true);
}

#[test]
fn time_budget_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = generate_tiny(dir.path(), 7);
    let out = bin()
        .env("HETNET_TIME_BUDGET", "0")
        .args(["solve", "--alg", "optimal", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // An explicit flag overrides the environment.
    let out = bin()
        .env("HETNET_TIME_BUDGET", "0")
        .args(["solve", "--alg", "optimal", "--time-budget", "60", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn invalid_inputs_exit_with_code_2() {
    // Missing scenario file.
    let out = bin()
        .args(["solve", "--alg", "optimal", "--scenario", "/nonexistent.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Unknown flag (clap usage error).
    let out = bin().args(["solve", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Malformed scenario JSON.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"users\": 3}").unwrap();
    let out = bin()
        .args(["solve", "--alg", "no-offload", "--scenario"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Non-integer subchannel axis value.
    let out = bin()
        .args(["sweep", "--axis", "subchannels", "--values", "2.5", "--seeds", "1"])
        .args(TINY)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_agrees_with_optimal_solver() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = generate_tiny(dir.path(), 7);
    let out = bin().args(["oracle", "--scenario"]).arg(&scenario).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let oracle: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(oracle["leaves"].as_u64().unwrap() > 0);

    let out = bin()
        .args(["solve", "--alg", "optimal", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    let opt: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let gap = opt["objective"].as_f64().unwrap() - oracle["objective"].as_f64().unwrap();
    assert!((-1e-9..=2e-3).contains(&gap), "gap {gap}");
}

#[test]
fn oracle_cap_exits_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = generate_tiny(dir.path(), 7);
    let out = bin()
        .args(["oracle", "--cap", "1", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_emits_stable_csv_schema_and_chart() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let svg_path = dir.path().join("sweep.svg");
    let out = bin()
        .args(["sweep", "--axis", "subchannels", "--values", "2,3", "--seeds", "2"])
        .args(["--algs", "no-offload,low-complexity", "--threads", "2"])
        .args(TINY)
        .arg("--out")
        .arg(&csv_path)
        .arg("--chart")
        .arg(&svg_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "axis,value,seed,algorithm,status,objective,objective_min,objective_max,\
         offloaded_gcycles,iterations,runtime_s,per_user_energy,error"
    );
    // 2 values x 2 seeds x 2 algorithms cells, plus 2 x 2 mean rows.
    assert_eq!(lines.len(), 1 + 8 + 4);
    // Deterministic cell order: values outermost, then seed, then algorithm.
    assert!(lines[1].starts_with("subchannels,2.0,0,no-offload,ok,"));
    assert!(lines[2].starts_with("subchannels,2.0,0,low-complexity,ok,"));
    assert!(lines[3].starts_with("subchannels,2.0,1,no-offload,ok,"));
    assert!(lines[9].starts_with("subchannels,2.0,mean,no-offload,mean,"));

    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("low-complexity"));
    assert!(svg.contains("polyline"));
}

#[test]
fn sweep_rows_are_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, path: &Path| {
        let out = bin()
            .args(["sweep", "--axis", "tasks-per-user", "--values", "1,2", "--seeds", "2"])
            .args(["--algs", "no-offload", "--threads", threads])
            .args(TINY)
            .arg("--out")
            .arg(path)
            .output()
            .unwrap();
        assert!(out.status.success());
        // Runtimes vary run to run; compare everything else.
        let text = fs::read_to_string(path).unwrap();
        let stripped: Vec<String> = text
            .lines()
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                [&cols[..10], &cols[11..]].concat().join(",")
            })
            .collect();
        stripped
    };
    let a = run("1", &dir.path().join("a.csv"));
    let b = run("4", &dir.path().join("b.csv"));
    assert_eq!(a, b);
}

#[test]
fn sweep_json_lines_format_parses_per_line() {
    let out = bin()
        .args(["sweep", "--axis", "bpc", "--values", "1e-4", "--seeds", "1"])
        .args(["--algs", "no-offload", "--format", "json-lines"])
        .args(TINY)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2); // one cell plus its mean row
    assert_eq!(rows[0]["axis"], "bpc");
    assert_eq!(rows[0]["status"], "ok");
    assert_eq!(rows[1]["seed"], "mean");
}

#[test]
fn sweep_records_cell_failures_without_failing() {
    // A combo cap of 0 makes every low-complexity cell fail while no-offload
    // (which needs no rate table) still succeeds.
    let out = bin()
        .args(["sweep", "--axis", "bpc", "--values", "1e-4", "--seeds", "1"])
        .args(["--algs", "no-offload,low-complexity", "--combo-cap", "0"])
        .args(TINY)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains(",no-offload,ok,"));
    assert!(text.contains(",low-complexity,error,"));
}

#[test]
fn compare_reports_table_ratios_and_gap() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = generate_tiny(dir.path(), 7);
    let json_path = dir.path().join("cmp.json");
    let out = bin()
        .args(["compare", "--algs", "optimal,low-complexity,no-offload", "--per-user"])
        .args(["--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&json_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("pairwise objective ratios"));
    assert!(text.contains("low-complexity vs optimal gap"));
    assert!(text.contains("per-user weighted energy"));

    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    let obj = |i: usize| results[i]["objective"].as_f64().unwrap();
    // Diagonal ratios are exactly 1; ratio[i][j] = obj_i / obj_j.
    let ratios = v["ratios"].as_array().unwrap();
    for (i, row) in ratios.iter().enumerate() {
        assert_eq!(row[i], 1.0);
        for (j, r) in row.as_array().unwrap().iter().enumerate() {
            assert!((r.as_f64().unwrap() - obj(i) / obj(j)).abs() < 1e-12);
        }
    }
    // no-offload is an upper bound for both solvers here.
    assert!(obj(0) <= obj(2) + 1e-12);
    assert!(obj(1) <= obj(2) + 1e-12);
    assert!(v["lc_vs_optimal_gap_pct"].as_f64().is_some());
}
