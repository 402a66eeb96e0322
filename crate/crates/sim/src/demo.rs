//! The two worked examples, traced step by step with expected values.

use std::fmt::Write;

use rcrt::algo1::{map_clustering, reconstruct_algo1, shift_residues};
use rcrt::algo2::{iterate, match_step, matching_cost};
use rcrt::single::{circular_loss, estimate_common_residue};
use rcrt::{ModulusSet, ObservationMatrix};

use crate::format::g6;

const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemoReport {
    pub text: String,
    pub mismatches: Vec<String>,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

struct Trace {
    text: String,
    mismatches: Vec<String>,
}

impl Trace {
    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn values(&mut self, label: &str, got: &[f64], expected: &[f64]) {
        let ok = got.len() == expected.len() && got.iter().zip(expected).all(|(a, b)| (a - b).abs() <= TOLERANCE);
        let fmt = |v: &[f64]| v.iter().map(|&x| g6(x)).collect::<Vec<_>>().join(", ");
        let verdict = if ok { "ok" } else { "MISMATCH" };
        self.line(format!(
            "  {label} = {{{}}}  expected {{{}}}  {verdict}",
            fmt(got),
            fmt(expected)
        ));
        if !ok {
            self.mismatches.push(label.to_string());
        }
    }

    fn value(&mut self, label: &str, got: f64, expected: f64) {
        self.values(label, &[got], &[expected]);
    }

    fn check(&mut self, label: &str, ok: bool) {
        self.line(format!("  {label}  {}", if ok { "ok" } else { "MISMATCH" }));
        if !ok {
            self.mismatches.push(label.to_string());
        }
    }
}

fn first_example(t: &mut Trace) {
    t.line("Example 1: m = {10, 15}, Γ = 5, Y = {11, 18}, w = 1");
    let ms = ModulusSet::with_weights(5.0, vec![2, 3], vec![1.0, 1.0]).expect("valid moduli");
    let obs = ObservationMatrix::from_columns(vec![vec![1.0, 9.0], vec![10.0, 3.0]]).expect("valid columns");
    let commons = obs.commons(5.0);
    t.values("r1", &commons[0], &[1.0, 4.0]);
    t.values("r2", &commons[1], &[0.0, 3.0]);

    let shifted = shift_residues(&commons, 1.0, 5.0);
    t.values("tau=1 shifted r1", &shifted.values[0], &[1.0, -1.0]);
    t.values("tau=1 shifted r2", &shifted.values[1], &[0.0, -2.0]);
    let shifted = shift_residues(&commons, 3.0, 5.0);
    t.values("tau=3 shifted r1", &shifted.values[0], &[1.0, -1.0]);
    t.values("tau=3 shifted r2", &shifted.values[1], &[0.0, 3.0]);

    let map = map_clustering(&commons, &ms).expect("valid residues");
    t.line("  cutting point scores:");
    for &(tau, score) in &map.candidates {
        t.line(format!("    tau = {}  score = {}", g6(tau), g6(score)));
    }
    let expected = [(0.0, -1.0), (1.0, -1.0), (3.0, -2.5), (4.0, -1.0)];
    for (tau, score) in expected {
        let got = map.candidates.iter().find(|c| c.0 == tau).map_or(f64::NAN, |c| c.1);
        t.value(&format!("score at tau={}", g6(tau)), got, score);
    }
    t.value("best score", map.score, -1.0);

    let mut groups: Vec<Vec<f64>> = (0..2).map(|i| map.clustering.gather(obs.columns(), i)).collect();
    groups.sort_by(|a, b| a[0].total_cmp(&b[0]));
    t.values("group of Y1", &groups[0], &[1.0, 10.0]);
    t.values("group of Y2", &groups[1], &[9.0, 3.0]);

    let mut ys: Vec<f64> = reconstruct_algo1(&obs, &ms)
        .expect("valid observations")
        .iter()
        .map(|e| e.y_hat)
        .collect();
    ys.sort_by(f64::total_cmp);
    t.values("reconstruction", &ys, &[10.5, 18.5]);
}

fn second_example(t: &mut Trace) {
    t.line("Example 2: m = {10, 15, 35}, Γ = 5, Y = {11, 18, 64}, w = 1");
    let ms = ModulusSet::with_weights(5.0, vec![2, 3, 7], vec![1.0; 3]).expect("valid moduli");
    let obs = ObservationMatrix::from_columns(vec![vec![2.0, 9.0, 4.3], vec![10.0, 3.0, 3.6], vec![10.5, 19.1, 29.4]])
        .expect("valid columns");
    let commons = obs.commons(5.0);
    t.values("r1", &commons[0], &[2.0, 4.0, 4.3]);
    t.values("r2", &commons[1], &[0.0, 3.0, 3.6]);
    t.values("r3", &commons[2], &[0.5, 4.1, 4.4]);
    let mu0 = commons[0].clone();
    t.values("mu0", &mu0, &[2.0, 4.0, 4.3]);

    // perm[i] is the row of r2 matched to centre i
    let rotations = [("a", [0, 1, 2]), ("b", [1, 2, 0]), ("c", [2, 0, 1])];
    t.line("  rotations for K2 (cost):");
    let mut best = ("", f64::INFINITY);
    for (name, perm) in rotations {
        let cost = matching_cost(&commons[1], &mu0, &perm, 5.0);
        t.line(format!("    ({name}) cost = {}", g6(cost)));
        if cost < best.1 {
            best = (name, cost);
        }
    }
    t.check("(b) has the smallest cost", best.0 == "b");
    let k2 = match_step(&commons[1], &mu0, 5.0);
    let k2_values: Vec<f64> = k2.iter().map(|&row| commons[1][row]).collect();
    t.values("K2 residues for mu0 = {2, 4, 4.3}", &k2_values, &[3.0, 3.6, 0.0]);
    let k3 = match_step(&commons[2], &mu0, 5.0);
    let k3_values: Vec<f64> = k3.iter().map(|&row| commons[2][row]).collect();
    t.values("K3 residues for mu0 = {2, 4, 4.3}", &k3_values, &[0.5, 4.1, 4.4]);

    let cluster = [2.0, 3.0, 0.5];
    t.line("  candidates for mu1:");
    for j in 0..3 {
        let c = (5.5 + 5.0 * j as f64) / 3.0 % 5.0;
        t.line(format!(
            "    {} loss = {}",
            g6(c),
            g6(circular_loss(c, &cluster, &[1.0; 3], 5.0))
        ));
    }
    let fit = estimate_common_residue(&cluster, &[1.0; 3], 5.0).expect("non-empty cluster");
    t.value("mu1 after one iteration", fit.mu_hat, 5.5 / 3.0);
    let state = iterate(&obs, &ms, &mu0, 1).expect("valid observations");
    t.value("mu1 from the first iteration", state.mu[0], 5.5 / 3.0);
}

/// Runs both examples; any value off by more than `1e−9` is a mismatch.
pub fn run_demo() -> DemoReport {
    let mut t = Trace {
        text: String::new(),
        mismatches: Vec::new(),
    };
    first_example(&mut t);
    t.line("");
    second_example(&mut t);
    let summary = if t.mismatches.is_empty() {
        "all values match".to_string()
    } else {
        format!("{} mismatches: {}", t.mismatches.len(), t.mismatches.join("; "))
    };
    let _ = writeln!(t.text, "\n{summary}");
    DemoReport {
        text: t.text,
        mismatches: t.mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_passes_and_is_stable() {
        let a = run_demo();
        assert!(a.passed(), "{}", a.text);
        assert_eq!(a, run_demo());
        assert!(a.text.contains("tau = 1  score = -1"));
        assert!(a.text.contains("tau = 3  score = -2.5"));
    }
}
