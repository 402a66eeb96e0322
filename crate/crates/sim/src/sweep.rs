//! Monte Carlo cells: one `(snr, n, algo, error_correction)` combination each.
//!
//! Trial `t` of size `N` always uses substream `(N << 32) | t` of the master
//! seed, so every SNR level and every algorithm sees the same numbers, noise
//! shapes and column orders. Comparisons between cells are paired.

use std::io::Write;

use rayon::prelude::*;

use rcrt::algo1::{map_clustering, reconstruct_clustered};
use rcrt::modular::ModulusSet;
use rcrt::noise::{assumption1_holds, sample_instance, GroundTruth, InstanceSpec};
use rcrt::voting::{decode_clustered, vote_reconstruct, SubsetMethod, VotingConfig};
use rcrt::{run_algo2, Algo2Options, Clustering, Estimate, ObservationMatrix, RcrtError};

use crate::config::{Algo, SweepConfig};
use crate::format::g6;
use crate::SimError;

pub const CSV_HEADER: &str =
    "snr,n,algo,error_correction,trials,success_rate_avg,perfect_rate,mean_iters,p90_iters,assumption1_rate,stderr";

pub const HIST_HEADER: &str = "snr,n,algo,error_correction,iterations,count";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub snr: f64,
    pub n: usize,
    pub algo: Algo,
    pub error_correction: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// One flag per true number: some estimate lies within `Γ` of it.
    pub successes: Vec<bool>,
    /// Alternating-MAP iterations (mean over subsets when voting).
    pub iterations: f64,
    pub assumption1: bool,
}

impl TrialRecord {
    pub fn perfect(&self) -> bool {
        self.successes.iter().all(|&s| s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub trials: usize,
    pub success_rate_avg: f64,
    pub perfect_rate: f64,
    pub mean_iters: f64,
    pub p90_iters: f64,
    pub assumption1_rate: f64,
    /// Binomial standard error `sqrt(p(1−p)/trials)` of `success_rate_avg`.
    pub stderr: f64,
    /// `(iterations, count)`, ascending; fractional subset means are rounded.
    pub histogram: Vec<(usize, usize)>,
}

impl CellSummary {
    pub fn csv_row(&self) -> String {
        let c = &self.cell;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            g6(c.snr),
            c.n,
            c.algo,
            c.error_correction,
            self.trials,
            g6(self.success_rate_avg),
            g6(self.perfect_rate),
            g6(self.mean_iters),
            g6(self.p90_iters),
            g6(self.assumption1_rate),
            g6(self.stderr),
        )
    }
}

/// Per-number success: sorted estimates are paired with sorted truths.
///
/// On a line the sorted pairing is a minimum-cost assignment for the cost
/// `Σ|ŷ − Y|`; each pair is then thresholded at `Γ`. Missing estimates count
/// as failures for the largest truths.
pub fn match_successes(estimates: &[f64], ys: &[f64], gamma: f64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..ys.len()).collect();
    order.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));
    let mut est = estimates.to_vec();
    est.sort_by(f64::total_cmp);
    let mut flags = vec![false; ys.len()];
    for (k, &i) in order.iter().enumerate() {
        flags[i] = est.get(k).is_some_and(|e| (e - ys[i]).abs() <= gamma);
    }
    flags
}

struct Decoded {
    estimates: Vec<Estimate>,
    iterations: f64,
}

fn cluster_full(
    algo: Algo,
    obs: &ObservationMatrix,
    ms: &ModulusSet,
    truth: &GroundTruth,
    opts: &Algo2Options,
) -> Result<(Clustering, Vec<Estimate>, f64), RcrtError> {
    match algo {
        Algo::Algo1 => {
            let map = map_clustering(&obs.commons(ms.gamma()), ms)?;
            let est = reconstruct_clustered(obs, &map.clustering, ms);
            Ok((map.clustering, est, 0.0))
        }
        Algo::Algo2 => {
            let out = run_algo2(obs, ms, opts)?;
            let rounds = out.state.rounds() as f64;
            Ok((out.state.clustering, out.estimates, rounds))
        }
        Algo::OracleClustered => {
            let est = reconstruct_clustered(obs, &truth.true_perms, ms);
            Ok((truth.true_perms.clone(), est, 0.0))
        }
    }
}

fn decode(
    cfg: &SweepConfig,
    cell: &Cell,
    obs: &ObservationMatrix,
    ms: &ModulusSet,
    truth: &GroundTruth,
    range: f64,
) -> Result<Decoded, SimError> {
    let opts = Algo2Options {
        max_iters: cfg.max_iters,
        restarts: cfg.algo2_restarts,
        seed: cfg.seed,
    };
    if cell.error_correction {
        let (clustering, _, iterations) = cluster_full(cell.algo, obs, ms, truth, &opts)?;
        let l0 = VotingConfig::new(ms, range, cfg.l0.min(ms.len()))?.l0;
        let estimates = decode_clustered(obs, &clustering, ms, l0)?
            .into_iter()
            .map(|d| d.estimate)
            .collect();
        return Ok(Decoded { estimates, iterations });
    }
    if cfg.group_size == 0 {
        let (_, estimates, iterations) = cluster_full(cell.algo, obs, ms, truth, &opts)?;
        return Ok(Decoded { estimates, iterations });
    }
    let voting = VotingConfig::new(ms, range, cfg.group_size)?;
    let method = match cell.algo {
        Algo::Algo1 => SubsetMethod::Algo1,
        Algo::Algo2 => SubsetMethod::Algo2(opts),
        Algo::OracleClustered => SubsetMethod::Clustered(truth.true_perms.clone()),
    };
    match vote_reconstruct(obs, ms, &voting, &method) {
        Ok(out) => Ok(Decoded {
            estimates: out.estimates,
            iterations: out.mean_iterations,
        }),
        Err(RcrtError::DegenerateVote { partial, .. }) => Ok(Decoded {
            estimates: partial,
            iterations: 0.0,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Runs trial `trial` of `cell`.
pub fn run_trial(cfg: &SweepConfig, cell: &Cell, trial: usize) -> Result<TrialRecord, SimError> {
    let ms = ModulusSet::from_snr(cfg.gamma, cfg.coprimes_for(cell.n), cell.snr)?;
    let range = cfg.range_for(cell.n);
    let spec = InstanceSpec::new(cell.n, ms.clone(), cfg.seed)
        .with_range(range)
        .with_stream(((cell.n as u64) << 32) | trial as u64);
    let (truth, obs) = sample_instance(&spec)?;
    let decoded = decode(cfg, cell, &obs, &ms, &truth, range)?;
    let y_hat: Vec<f64> = decoded.estimates.iter().map(|e| e.y_hat).collect();
    Ok(TrialRecord {
        successes: match_successes(&y_hat, &truth.ys, cfg.gamma),
        iterations: decoded.iterations,
        assumption1: assumption1_holds(&truth, cfg.gamma),
    })
}

pub fn summarize(cell: Cell, records: &[TrialRecord]) -> CellSummary {
    let trials = records.len();
    let numbers: usize = records.iter().map(|r| r.successes.len()).sum();
    let hits: usize = records.iter().map(|r| r.successes.iter().filter(|&&s| s).count()).sum();
    let p = hits as f64 / numbers as f64;
    let frac = |count: usize| count as f64 / trials as f64;

    let mut iters: Vec<f64> = records.iter().map(|r| r.iterations).collect();
    iters.sort_by(f64::total_cmp);
    // nearest-rank percentile
    let p90 = iters[((0.9 * trials as f64).ceil() as usize).clamp(1, trials) - 1];
    let mut histogram: Vec<(usize, usize)> = Vec::new();
    for &it in &iters {
        let bin = it.round() as usize;
        match histogram.last_mut() {
            Some((b, count)) if *b == bin => *count += 1,
            _ => histogram.push((bin, 1)),
        }
    }

    CellSummary {
        cell,
        trials,
        success_rate_avg: p,
        perfect_rate: frac(records.iter().filter(|r| r.perfect()).count()),
        mean_iters: iters.iter().sum::<f64>() / trials as f64,
        p90_iters: p90,
        assumption1_rate: frac(records.iter().filter(|r| r.assumption1).count()),
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        histogram,
    }
}

/// Cells in output order: `n`, then algorithm, then error correction, then SNR.
pub fn cells(cfg: &SweepConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &n in &cfg.n_values {
        for &algo in &cfg.algos {
            for &error_correction in &cfg.error_correction {
                for &snr in &cfg.snr_grid {
                    out.push(Cell {
                        snr,
                        n,
                        algo,
                        error_correction,
                    });
                }
            }
        }
    }
    out
}

/// Runs every cell; trials run in parallel, rows come back in [`cells`] order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<CellSummary>, SimError> {
    cfg.validate()?;
    cells(cfg)
        .into_iter()
        .map(|cell| {
            let records = (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, &cell, t))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(summarize(cell, &records))
        })
        .collect()
}

pub fn write_csv(rows: &[CellSummary], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_row())?;
    }
    Ok(())
}

pub fn write_histogram(rows: &[CellSummary], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{HIST_HEADER}")?;
    for row in rows {
        let c = &row.cell;
        for &(iterations, count) in &row.histogram {
            writeln!(
                out,
                "{},{},{},{},{iterations},{count}",
                g6(c.snr),
                c.n,
                c.algo,
                c.error_correction
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_pairing() {
        assert_eq!(match_successes(&[205.0, 10.0], &[0.0, 200.0], 100.0), vec![true, true]);
        assert_eq!(match_successes(&[10.0], &[200.0, 0.0], 100.0), vec![false, true]);
        assert_eq!(match_successes(&[], &[1.0], 100.0), vec![false]);
    }

    #[test]
    fn sorted_pairing_is_optimal() {
        use itertools::Itertools;
        let est: [f64; 4] = [5.0, 130.0, 260.0, 410.0];
        let ys: [f64; 4] = [100.0, 0.0, 350.0, 300.0];
        let cost = |p: &[usize]| p.iter().enumerate().map(|(i, &k)| (est[k] - ys[i]).abs()).sum::<f64>();
        let best = (0..4).permutations(4).map(|p| cost(&p)).fold(f64::INFINITY, f64::min);
        // sorted truths 0, 100, 300, 350 take sorted estimates in order
        assert_eq!(cost(&[1, 0, 3, 2]), best);
        assert_eq!(match_successes(&est, &ys, 100.0), vec![true, true, true, true]);
    }

    #[test]
    fn summary_statistics() {
        let cell = Cell {
            snr: 0.0,
            n: 2,
            algo: Algo::Algo2,
            error_correction: false,
        };
        let rec = |a, b, it| TrialRecord {
            successes: vec![a, b],
            iterations: it,
            assumption1: a,
        };
        let records: Vec<TrialRecord> = (0..10)
            .map(|k| rec(true, k < 6, if k < 9 { 2.0 } else { 7.0 }))
            .collect();
        let s = summarize(cell, &records);
        assert_eq!(s.success_rate_avg, 0.8);
        assert_eq!(s.perfect_rate, 0.6);
        assert_eq!(s.mean_iters, 2.5);
        assert_eq!(s.p90_iters, 2.0);
        assert_eq!(s.assumption1_rate, 1.0);
        assert!((s.stderr - (0.8f64 * 0.2 / 10.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.histogram, vec![(2, 9), (7, 1)]);
        assert_eq!(s.csv_row(), "0,2,algo2,false,10,0.8,0.6,2.5,2,1,0.126491");
    }
}
