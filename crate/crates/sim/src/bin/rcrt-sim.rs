use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};

use rcrt_sim::config::{SweepConfig, KEYS};
use rcrt_sim::demo::run_demo;
use rcrt_sim::oracle_check::run_oracle_check;
use rcrt_sim::prob::{probability_table, write_table};
use rcrt_sim::sweep::{run_sweep, write_csv, write_histogram};
use rcrt_sim::SimError;

fn cli() -> Command {
    let mut sweep = Command::new("sweep")
        .about("Monte Carlo success rates over an SNR grid")
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .help("key=value configuration file"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .value_name("CSV")
                .help("output path, stdout if absent"),
        )
        .arg(
            Arg::new("hist")
                .long("hist")
                .value_name("CSV")
                .help("iteration histogram output path"),
        );
    for key in KEYS {
        sweep = sweep.arg(
            Arg::new(key)
                .long(key)
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .help(format!("override `{key}` from the configuration file")),
        );
    }
    Command::new("rcrt-sim")
        .about("Simulation harness for robust remaindering of several numbers")
        .subcommand_required(true)
        .subcommand(sweep)
        .subcommand(Command::new("demo").about("Trace the two worked examples"))
        .subcommand(
            Command::new("prob")
                .about("Separation probability and its lower bound")
                .arg(
                    Arg::new("sigma-grid")
                        .long("sigma-grid")
                        .required(true)
                        .value_name("LIST")
                        .help("comma-separated noise standard deviations"),
                )
                .arg(
                    Arg::new("n-values")
                        .long("n-values")
                        .default_value("1,2,3")
                        .value_name("LIST"),
                )
                .arg(
                    Arg::new("l-values")
                        .long("l-values")
                        .value_name("LIST")
                        .help("moduli counts, 2N per N if absent"),
                )
                .arg(Arg::new("gamma").long("gamma").default_value("100"))
                .arg(
                    Arg::new("mc-trials")
                        .long("mc-trials")
                        .default_value("0")
                        .help("Monte Carlo draws per row, 0 to skip"),
                )
                .arg(Arg::new("seed").long("seed").default_value("0"))
                .arg(Arg::new("out").long("out").value_name("CSV")),
        )
        .subcommand(
            Command::new("oracle-check")
                .about("Compare the fast algorithms with brute-force references")
                .arg(Arg::new("trials").long("trials").default_value("500"))
                .arg(Arg::new("seed").long("seed").default_value("0"))
        )
}

fn invalid(field: &str, message: impl Into<String>) -> SimError {
    SimError::Config {
        line: None,
        field: field.to_string(),
        message: message.into(),
    }
}

fn parsed<T: std::str::FromStr>(m: &ArgMatches, name: &str) -> Result<T, SimError>
where
    T::Err: std::fmt::Display,
{
    let raw = m.get_one::<String>(name).expect("defaulted argument");
    raw.trim()
        .parse()
        .map_err(|e: T::Err| invalid(name, format!("`{raw}`: {e}")))
}

fn list<T: std::str::FromStr>(name: &str, raw: &str) -> Result<Vec<T>, SimError>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e: T::Err| invalid(name, format!("`{s}`: {e}")))
        })
        .collect()
}

fn output(path: Option<&String>) -> Result<Box<dyn Write>, SimError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(Path::new(p))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn sweep(m: &ArgMatches) -> Result<(), SimError> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(path) => SweepConfig::parse(&std::fs::read_to_string(path)?)?,
        None => SweepConfig::default(),
    };
    for key in KEYS {
        if let Some(value) = m.get_one::<String>(key) {
            cfg.set(key, value)?;
        }
    }
    cfg.validate()?;
    let rows = run_sweep(&cfg)?;
    let mut out = output(m.get_one("out"))?;
    write_csv(&rows, &mut out)?;
    out.flush()?;
    if let Some(path) = m.get_one::<String>("hist") {
        let mut hist = output(Some(path))?;
        write_histogram(&rows, &mut hist)?;
        hist.flush()?;
    }
    Ok(())
}

fn demo() -> Result<(), SimError> {
    let report = run_demo();
    print!("{}", report.text);
    if report.passed() {
        Ok(())
    } else {
        Err(SimError::Mismatch(report.mismatches.join("; ")))
    }
}

fn prob(m: &ArgMatches) -> Result<(), SimError> {
    let sigmas: Vec<f64> = list("sigma-grid", m.get_one::<String>("sigma-grid").expect("required"))?;
    let n_values: Vec<usize> = list("n-values", m.get_one::<String>("n-values").expect("defaulted"))?;
    let l_values: Vec<usize> = match m.get_one::<String>("l-values") {
        Some(raw) => list("l-values", raw)?,
        None => Vec::new(),
    };
    let gamma: f64 = parsed(m, "gamma")?;
    if sigmas.is_empty() || sigmas.iter().any(|s| s.is_nan() || *s < 0.0) {
        return Err(invalid("sigma-grid", "needs non-negative values"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", "must be positive"));
    }
    if n_values.is_empty() || n_values.contains(&0) || l_values.contains(&0) {
        return Err(invalid("n-values", "counts must be positive"));
    }
    let rows = probability_table(
        gamma,
        &sigmas,
        &n_values,
        &l_values,
        parsed(m, "mc-trials")?,
        parsed(m, "seed")?,
    );
    let mut out = output(m.get_one("out"))?;
    write_table(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn oracle_check(m: &ArgMatches) -> Result<(), SimError> {
    let trials: usize = parsed(m, "trials")?;
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let results = run_oracle_check(trials, parsed(m, "seed")?)?;
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    println!("{} passed, {} failed", results.len() - failed.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(SimError::Mismatch(failed.join("; ")))
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match matches.subcommand() {
        Some(("sweep", m)) => sweep(m),
        Some(("demo", _)) => demo(),
        Some(("prob", m)) => prob(m),
        Some(("oracle-check", m)) => oracle_check(m),
        _ => unreachable!("subcommand is required"),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
