use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "laf",
    version,
    about = "Abstract interpretation of WHILE programs and LAF terms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analyze a `.while` program or a `.laf` term and report on its assertions.
    Analyze(AnalyzeArgs),
    /// Run the constraint domain under several propagation limits and tabulate the results.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Interval,
    Constants,
    Rewrite,
    Constraint,
    Relational,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Backward,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Structured,
}

/// A propagation limit: a count or `inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limit(pub Option<usize>);

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("inf"),
        }
    }
}

pub fn parse_limit(s: &str) -> Result<Limit, String> {
    match s {
        "inf" => Ok(Limit(None)),
        _ => s
            .parse()
            .map(|n| Limit(Some(n)))
            .map_err(|_| format!("expected a count or `inf`, got `{s}`")),
    }
}

/// Comma-separated limits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits(pub Vec<Limit>);

pub fn parse_limits(s: &str) -> Result<Limits, String> {
    s.split(',')
        .map(|p| parse_limit(p.trim()))
        .collect::<Result<_, _>>()
        .map(Limits)
}

/// `LO..HI`, inclusive.
pub fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got `{s}`"))?;
    let lo: i64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: i64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty window {lo}..{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Args, Clone, Debug)]
pub struct AnalyzeArgs {
    /// Input file; `.laf` is read as a term, anything else as a WHILE program.
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = DomainArg::All)]
    pub domain: DomainArg,
    /// Variables one propagation may refine in the constraint domain.
    #[arg(long, value_parser = parse_limit, default_value = "inf")]
    pub prop_limit: Limit,
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    pub prop_direction: DirectionArg,
    /// Loop rounds that join before widening starts.
    #[arg(long, default_value_t = 0)]
    pub widen_delay: usize,
    /// Loop iterations peeled before each WHILE loop.
    #[arg(long, default_value_t = 0)]
    pub unroll: usize,
    /// Write the analyzed term.
    #[arg(long, value_name = "PATH")]
    pub emit_laf: Option<PathBuf>,
    /// Write one first-order query per assertion asking whether it can be false.
    #[arg(long, value_name = "PATH")]
    pub emit_smt: Option<PathBuf>,
    /// Write one Horn system per assertion; `sat` means the assertion holds.
    #[arg(long, value_name = "PATH")]
    pub emit_horn: Option<PathBuf>,
    /// Extra rewrite rules, checked for validity before use.
    #[arg(long, value_name = "FILE")]
    pub rules: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Check every domain against the concrete semantics, enumerating
    /// unknown integers over this window.
    #[arg(long, value_parser = parse_window, value_name = "LO..HI", allow_hyphen_values = true)]
    pub int_window: Option<(i64, i64)>,
    /// Solver run on emitted scripts; `{file}` stands for the script path.
    #[arg(long, value_name = "CMD")]
    pub solver: Option<String>,
    #[arg(long, value_name = "SECS", default_value_t = 30)]
    pub solver_timeout: u64,
}

#[derive(Args, Clone, Debug)]
pub struct CompareArgs {
    pub file: PathBuf,
    /// Comma-separated propagation limits, in increasing order.
    #[arg(long, value_parser = parse_limits, default_value = "0,1,2,inf")]
    pub limits: Limits,
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    pub prop_direction: DirectionArg,
    #[arg(long, default_value_t = 0)]
    pub widen_delay: usize,
    #[arg(long, default_value_t = 0)]
    pub unroll: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}
