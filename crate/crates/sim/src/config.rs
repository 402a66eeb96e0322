//! Flat `key = value` sweep configuration.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Lists are
//! comma separated; `snr_grid` also takes an inclusive `start:stop:step` range
//! and `inf` for the noiseless case. The same keys are accepted as command
//! line overrides.

use std::fmt;
use std::str::FromStr;

use rcrt::modular::primes_from;

use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algo {
    Algo1,
    Algo2,
    /// The planted clustering fed straight to single-number reconstruction.
    OracleClustered,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Algo1 => "algo1",
            Algo::Algo2 => "algo2",
            Algo::OracleClustered => "oracle-clustered",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "algo1" => Ok(Algo::Algo1),
            "algo2" => Ok(Algo::Algo2),
            "oracle-clustered" => Ok(Algo::OracleClustered),
            other => Err(format!(
                "unknown algorithm `{other}` (expected algo1, algo2 or oracle-clustered)"
            )),
        }
    }
}

/// Number of moduli used for `N` numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LRule {
    /// `L = L₀·N`.
    TimesN,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub gamma: f64,
    pub prime_start: u64,
    /// Explicit co-prime factors; overrides `prime_start` when non-empty.
    pub moduli: Vec<u64>,
    pub n_values: Vec<usize>,
    pub l_rule: LRule,
    /// Numbers are drawn from `[0, Γ·∏_{l≤l0} M_l)`.
    pub l0: usize,
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub algos: Vec<Algo>,
    pub error_correction: Vec<bool>,
    /// Moduli per voting subset; 0 runs each algorithm once on all moduli.
    pub group_size: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub algo2_restarts: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            gamma: 100.0,
            prime_start: 23,
            moduli: Vec::new(),
            n_values: vec![2],
            l_rule: LRule::TimesN,
            l0: 2,
            snr_grid: snr_range(-40.0, 0.0, 2.5),
            trials: 1000,
            algos: vec![Algo::Algo1, Algo::Algo2],
            error_correction: vec![false],
            group_size: 2,
            seed: 0,
            max_iters: rcrt::algo2::DEFAULT_MAX_ITERS,
            algo2_restarts: 0,
        }
    }
}

pub const KEYS: [&str; 14] = [
    "gamma",
    "prime_start",
    "moduli",
    "n_values",
    "l_rule",
    "l0",
    "snr_grid",
    "trials",
    "algos",
    "error_correction",
    "group_size",
    "seed",
    "max_iters",
    "algo2_restarts",
];

fn snr_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|k| start + k as f64 * step).collect()
}

fn parse_one<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e: T::Err| format!("`{}`: {e}", value.trim()))
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_one)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn parse_snr(value: &str) -> Result<f64, String> {
    match value.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        other => parse_one(other),
    }
}

fn parse_snr_grid(value: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse_snr(start)?, parse_snr(stop)?, parse_snr(step)?);
            if !(step > 0.0 && step.is_finite() && start.is_finite() && stop >= start) {
                return Err("range needs finite start ≤ stop and a positive step".into());
            }
            Ok(snr_range(start, stop, step))
        }
        [_] => value.split(',').map(parse_snr).collect(),
        _ => Err("expected a list or start:stop:step".into()),
    }
}

impl SweepConfig {
    /// Parses a configuration file; unset keys keep their defaults.
    pub fn parse(text: &str) -> Result<SweepConfig, SimError> {
        let mut cfg = SweepConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(SimError::Config {
                    line: Some(idx + 1),
                    field: line.to_string(),
                    message: "expected key = value".into(),
                });
            };
            cfg.set(key.trim(), value).map_err(|e| match e {
                SimError::Config { field, message, .. } => SimError::Config {
                    line: Some(idx + 1),
                    field,
                    message,
                },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SimError> {
        let fail = |message: String| SimError::Config {
            line: None,
            field: key.to_string(),
            message,
        };
        match key {
            "gamma" => self.gamma = parse_one(value).map_err(fail)?,
            "prime_start" => self.prime_start = parse_one(value).map_err(fail)?,
            "moduli" => self.moduli = parse_list(value).map_err(fail)?,
            "n_values" => self.n_values = parse_list(value).map_err(fail)?,
            "l_rule" => {
                self.l_rule = match value.trim() {
                    "2N" | "L0N" => LRule::TimesN,
                    other => LRule::Fixed(parse_one(other).map_err(fail)?),
                }
            }
            "l0" => self.l0 = parse_one(value).map_err(fail)?,
            "snr_grid" => self.snr_grid = parse_snr_grid(value).map_err(fail)?,
            "trials" => self.trials = parse_one(value).map_err(fail)?,
            "algos" => self.algos = parse_list(value).map_err(fail)?,
            "error_correction" => self.error_correction = parse_list(value).map_err(fail)?,
            "group_size" => self.group_size = parse_one(value).map_err(fail)?,
            "seed" => self.seed = parse_one(value).map_err(fail)?,
            "max_iters" => self.max_iters = parse_one(value).map_err(fail)?,
            "algo2_restarts" => self.algo2_restarts = parse_one(value).map_err(fail)?,
            _ => return Err(fail(format!("unknown key (expected one of {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |field: &str, message: &str| {
            Err(SimError::Config {
                line: None,
                field: field.into(),
                message: message.into(),
            })
        };
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return fail("gamma", "must be finite and positive");
        }
        if self.n_values.contains(&0) {
            return fail("n_values", "every N must be positive");
        }
        if self.trials == 0 {
            return fail("trials", "must be positive");
        }
        if self.max_iters == 0 {
            return fail("max_iters", "must be positive");
        }
        if self.l0 == 0 {
            return fail("l0", "must be positive");
        }
        if self.snr_grid.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return fail("snr_grid", "values must be numbers or inf");
        }
        for &n in &self.n_values {
            let l = self.l_for(n);
            if l < self.l0 {
                return fail("l_rule", "fewer moduli than l0");
            }
            if !self.moduli.is_empty() && self.moduli.len() < l {
                return fail("moduli", "fewer moduli listed than the L rule requires");
            }
            if self.group_size > l {
                return fail("group_size", "larger than the number of moduli");
            }
            if self.group_size != 0 && self.group_size < self.l0 {
                return fail("group_size", "subsets smaller than l0 cannot cover the range");
            }
        }
        Ok(())
    }

    pub fn l_for(&self, n: usize) -> usize {
        match self.l_rule {
            LRule::TimesN => self.l0 * n,
            LRule::Fixed(l) => l,
        }
    }

    /// Co-prime factors for `N` numbers.
    pub fn coprimes_for(&self, n: usize) -> Vec<u64> {
        let l = self.l_for(n);
        if self.moduli.is_empty() {
            primes_from(self.prime_start, l)
        } else {
            self.moduli[..l].to_vec()
        }
    }

    /// `D = Γ·∏_{l≤l0} M_l` for `N` numbers.
    pub fn range_for(&self, n: usize) -> f64 {
        let coprimes = self.coprimes_for(n);
        self.gamma * coprimes[..self.l0].iter().map(|&m| m as f64).product::<f64>()
    }
}
