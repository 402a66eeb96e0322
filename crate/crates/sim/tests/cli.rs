use std::process::{Command, Output};

use rcrt_sim::sweep::CSV_HEADER;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcrt-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn demo_succeeds() {
    let out = run(&["demo"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("all values match\n"));
}

#[test]
fn sweep_reads_config_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.cfg");
    std::fs::write(
        &config,
        "# small sweep\nn_values = 2\ntrials = 10\nsnr_grid = -5,0\nalgos = algo1\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let hist = dir.path().join("hist.csv");
    let config = config.to_str().unwrap();
    let out = run(&[
        "sweep",
        "--config",
        config,
        "--trials",
        "7",
        "--out",
        csv.to_str().unwrap(),
        "--hist",
        hist.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("-5,2,algo1,false,7,"));
    assert!(std::fs::read_to_string(&hist)
        .unwrap()
        .starts_with("snr,n,algo,error_correction,iterations,count\n"));

    let again = run(&["sweep", "--config", config, "--trials", "7"]);
    assert_eq!(stdout(&again), text);
    let other_seed = run(&[
        "sweep",
        "--config",
        config,
        "--trials",
        "7",
        "--seed",
        "9",
        "--snr_grid",
        "-35",
    ]);
    assert_eq!(other_seed.status.code(), Some(0));
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    std::fs::write(&config, "trials = 5\nl0 = zero\n").unwrap();
    let out = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("l0"), "{err}");

    assert_eq!(run(&["sweep", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--colour", "red"]).status.code(), Some(1));
    assert_eq!(run(&["prob", "--sigma-grid", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["oracle-check", "--trials", "none"]).status.code(), Some(1));
}

#[test]
fn prob_writes_the_table() {
    let out = run(&["prob", "--sigma-grid", "5,10", "--n-values", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("sigma,n,l,probability,bound,monte_carlo"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn oracle_check_reports_every_suite() {
    let out = run(&["oracle-check", "--trials", "30", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.matches("PASS").count(), 4);
    assert!(text.ends_with("4 passed, 0 failed\n"));
}
