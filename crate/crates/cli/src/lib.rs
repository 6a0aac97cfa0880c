//! Command-line front end for e-value combination tests and simulations.
//!
//! ```text
//! evalcomb combine --input FILE --alpha A --stat LIST [--lambda L | --lambda-file FILE] [--format json|tsv]
//! evalcomb simulate --scenario SPEC --alpha A --reps N --seed S
//! evalcomb enumerate --scenario SPEC --threshold T --stat NAME
//! ```

pub mod error;
pub mod input;
pub mod report;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use evalcomb_core::simlab::exact::{enumerate_exact, format_probability, parse_decimal, rational_from_f64, ExactStatistic};
use evalcomb_core::simlab::{mc_power, mc_type1, McConfig, MonteCarloSummary, Scenario};
use evalcomb_core::testkit::{test_max_average, test_optimized_betting, test_ville, LambdaStrategy, StatisticKind};
use evalcomb_core::{validate_evalues, Error as CoreError, Regime};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub use error::CliError;
use report::{ReportRecord, TSV_HEADER};

#[derive(Debug, Parser)]
#[command(name = "evalcomb", version, about = "Optimized combination of e-values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Combine the e-values in a file and test at level alpha.
    Combine {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Comma-separated subset of max_average, optimized_betting, ville.
        #[arg(long, default_value = "max_average,optimized_betting")]
        stat: String,
        /// Constant betting fraction for the ville statistic.
        #[arg(long, conflicts_with = "lambda_file")]
        lambda: Option<f64>,
        /// One predictable betting fraction per line; the caller attests predictability.
        #[arg(long)]
        lambda_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// independent, simultaneous, sequential or unknown.
        #[arg(long, default_value = "unknown")]
        regime: String,
    },
    /// Monte Carlo rejection rates for a scenario.
    Simulate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constant betting fraction for the ville statistic.
        #[arg(long, default_value_t = evalcomb_core::simlab::montecarlo::DEFAULT_VILLE_LAMBDA)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Exact rejection probability for a finite-support scenario.
    Enumerate {
        #[arg(long)]
        scenario: String,
        /// Rejection threshold t, as a decimal or p/q.
        #[arg(long)]
        threshold: String,
        #[arg(long)]
        stat: String,
        /// Constant betting fraction for the ville statistic.
        #[arg(long)]
        lambda: Option<f64>,
    },
}

/// Runs a parsed command, returning the text for standard output.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Combine {
            input,
            alpha,
            stat,
            lambda,
            lambda_file,
            format,
            regime,
        } => combine(&input, alpha, &stat, lambda, lambda_file.as_deref(), format, &regime),
        Command::Simulate {
            scenario,
            alpha,
            reps,
            seed,
            lambda,
            format,
        } => {
            let (text, out) = simulate(&scenario, alpha, reps, seed, lambda, format)?;
            // Timing stays off stdout so reports are reproducible byte for byte.
            eprintln!(
                "simulated {} replications in {:.3} s",
                out.summary.replications,
                out.summary.elapsed.as_secs_f64()
            );
            Ok(text)
        }
        Command::Enumerate {
            scenario,
            threshold,
            stat,
            lambda,
        } => enumerate(&scenario, &threshold, &stat, lambda),
    }
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

fn check_lambda(lambda: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(CliError::Config(format!("lambda = {lambda} must lie in [0, 1]")))
    }
}

fn parse_stats(list: &str) -> Result<Vec<StatisticKind>, CliError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind: StatisticKind = name.parse().map_err(CliError::Config)?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("no statistics selected".into()));
    }
    Ok(out)
}

fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn core_input(e: CoreError) -> CliError {
    CliError::Input(e.to_string())
}

fn core_config(e: CoreError) -> CliError {
    CliError::Config(e.to_string())
}

pub fn combine(
    input: &std::path::Path,
    alpha: f64,
    stat: &str,
    lambda: Option<f64>,
    lambda_file: Option<&std::path::Path>,
    format: Format,
    regime: &str,
) -> Result<String, CliError> {
    check_alpha(alpha)?;
    let stats = parse_stats(stat)?;
    let regime: Regime = regime.parse().map_err(CliError::Config)?;
    if let Some(l) = lambda {
        check_lambda(l)?;
    }
    let raw = input::parse_values(&read_file(input)?, "e-value")?;
    let e = validate_evalues(&raw, regime).map_err(core_input)?;

    let strategy = match (lambda, lambda_file) {
        (Some(l), _) => Some(LambdaStrategy::Constant(l)),
        (None, Some(path)) => {
            let ls = input::parse_values(&read_file(path)?, "lambda")?;
            if let Some((i, l)) = ls.iter().enumerate().find(|(_, l)| **l > 1.0) {
                return Err(CliError::Input(format!("lambda {l} at entry {} exceeds 1", i + 1)));
            }
            if ls.len() != e.len() {
                return Err(CliError::Input(format!(
                    "lambda file has {} entries but the input has {}",
                    ls.len(),
                    e.len()
                )));
            }
            Some(LambdaStrategy::attested_predictable(ls))
        }
        (None, None) => None,
    };

    let mut out = String::new();
    if format == Format::Tsv {
        out.push_str(TSV_HEADER);
        out.push('\n');
    }
    for kind in stats {
        let report = match kind {
            StatisticKind::MaxAverage => test_max_average(&e, alpha),
            StatisticKind::OptimizedBetting => test_optimized_betting(&e, alpha),
            StatisticKind::VilleSequential => {
                let s = strategy.as_ref().ok_or_else(|| {
                    CliError::Config("the ville statistic needs --lambda or --lambda-file".into())
                })?;
                test_ville(&e, s, alpha)
            }
        }
        .map_err(core_config)?;
        let record = ReportRecord::from_report(&report, e.len());
        match format {
            Format::Json => out.push_str(&record.to_json()),
            Format::Tsv => out.push_str(&record.tsv_row()),
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMode {
    Type1,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub mode: SimulationMode,
    #[serde(flatten)]
    pub summary: MonteCarloSummary,
}

/// Runs `mc_type1` for null scenarios and `mc_power` otherwise.
pub fn simulate(
    scenario: &str,
    alpha: f64,
    reps: u64,
    seed: u64,
    lambda: f64,
    format: Format,
) -> Result<(String, SimulationOutput), CliError> {
    check_alpha(alpha)?;
    check_lambda(lambda)?;
    if reps == 0 {
        return Err(CliError::Config("--reps must be at least 1".into()));
    }
    let scenario: Scenario = scenario.parse().map_err(core_config)?;
    let mode = if scenario.is_null() {
        SimulationMode::Type1
    } else {
        SimulationMode::Power
    };
    let mut config = McConfig::new(scenario, alpha, reps, seed);
    config.ville_lambda = lambda;
    let summary = match mode {
        SimulationMode::Type1 => mc_type1(&config),
        SimulationMode::Power => mc_power(&config),
    }
    .map_err(core_config)?;
    let output = SimulationOutput { mode, summary };
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string(&output).expect("summaries serialize");
            s.push('\n');
            s
        }
        Format::Tsv => {
            let mut s = String::from("statistic_kind\trejections\trate\tstandard_error\treplications\tseed\talpha\n");
            for (kind, r) in &output.summary.rates {
                let _ = writeln!(
                    s,
                    "{kind}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.rejections, r.rate, r.standard_error, output.summary.replications, output.summary.seed, alpha
                );
            }
            s
        }
    };
    Ok((text, output))
}

fn parse_threshold(s: &str) -> Result<BigRational, CliError> {
    let bad = || CliError::Config(format!("threshold `{s}` is not a positive decimal or p/q"));
    let t = match s.split_once('/') {
        Some((p, q)) => {
            let p = parse_decimal(p).ok_or_else(bad)?;
            let q = parse_decimal(q).ok_or_else(bad)?;
            if q == BigRational::from_integer(0.into()) {
                return Err(bad());
            }
            p / q
        }
        None => parse_decimal(s).ok_or_else(bad)?,
    };
    if t <= BigRational::from_integer(0.into()) {
        return Err(bad());
    }
    Ok(t)
}

pub fn enumerate(scenario: &str, threshold: &str, stat: &str, lambda: Option<f64>) -> Result<String, CliError> {
    let scenario: Scenario = scenario.parse().map_err(core_config)?;
    let t = parse_threshold(threshold)?;
    let kind: StatisticKind = stat.trim().parse().map_err(CliError::Config)?;
    let statistic = match kind {
        StatisticKind::MaxAverage => ExactStatistic::MaxAverage,
        StatisticKind::OptimizedBetting => ExactStatistic::OptimizedBetting,
        StatisticKind::VilleSequential => {
            let l = lambda.ok_or_else(|| CliError::Config("the ville statistic needs --lambda".into()))?;
            check_lambda(l)?;
            ExactStatistic::Ville {
                lambda: rational_from_f64(l).ok_or_else(|| CliError::Config(format!("lambda = {l}")))?,
            }
        }
    };
    let p = enumerate_exact(&scenario, &t, &statistic).map_err(core_config)?;
    Ok(format!("{}\n", format_probability(&p)))
}
