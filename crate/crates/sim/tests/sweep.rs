use rcrt_sim::config::{Algo, SweepConfig};
use rcrt_sim::sweep::{cells, run_sweep, run_trial, summarize};

fn small() -> SweepConfig {
    let cfg = SweepConfig::parse("n_values = 2,3\ntrials = 16\nsnr_grid = -30:-20:5\nalgos = algo2,oracle-clustered\nerror_correction = false,true\nseed = 3").unwrap();
    cfg.validate().unwrap();
    cfg
}

#[test]
fn rows_follow_config_order() {
    let cfg = small();
    let order = cells(&cfg);
    assert_eq!(order.len(), 2 * 2 * 2 * 3);
    assert_eq!(
        (order[0].n, order[0].algo, order[0].error_correction, order[0].snr),
        (2, Algo::Algo2, false, -30.0)
    );
    assert!(order[3].error_correction);
    assert_eq!(order[6].algo, Algo::OracleClustered);
    assert_eq!(order[12].n, 3);
}

#[test]
fn parallel_sweep_equals_sequential_trials() {
    let cfg = small();
    let rows = run_sweep(&cfg).unwrap();
    for (row, cell) in rows.iter().zip(cells(&cfg)) {
        let records: Vec<_> = (0..cfg.trials).map(|t| run_trial(&cfg, &cell, t).unwrap()).collect();
        assert_eq!(row.csv_row(), summarize(cell, &records).csv_row());
    }
}

#[test]
fn algorithms_see_the_same_instances() {
    let cfg = small();
    let rows = run_sweep(&cfg).unwrap();
    let a1 = rows.iter().filter(|r| r.cell.algo == Algo::Algo2);
    let oracle = rows.iter().filter(|r| r.cell.algo == Algo::OracleClustered);
    for (a, o) in a1.zip(oracle) {
        assert_eq!(a.assumption1_rate, o.assumption1_rate);
    }
}
