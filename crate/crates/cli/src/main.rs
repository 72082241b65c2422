//! `iwalab` command-line front end.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use iwalab::{Family, PrecisionContext};

#[derive(Parser, Debug)]
#[command(name = "iwalab", version, about = "Iwasawa invariants of modules and perfect complexes")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    #[arg(long, global = true, default_value_t = 3)]
    pub prime: u64,
    /// Coefficients live in `Z/p^N`.
    #[arg(long, global = true, default_value_t = 8)]
    pub coeff_precision: u32,
    /// Power series are truncated mod `T^M`.
    #[arg(long, global = true, default_value_t = 32)]
    pub t_precision: usize,
    /// Layers `lo..hi` used by the growth route.
    #[arg(long, global = true, default_value = "0..4", value_parser = parse_range::<u32>)]
    pub n_range: (u32, u32),
    /// Largest presentation matrix (rows) built by the growth route.
    #[arg(long, global = true, default_value_t = 4096)]
    pub matrix_budget: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for batch runs; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

impl Global {
    pub fn context(&self) -> iwalab::Result<PrecisionContext> {
        PrecisionContext::new(self.prime, self.coeff_precision, self.t_precision)
    }

    /// Flags that affect results, in a fixed textual form.
    pub fn fingerprint(&self) -> String {
        format!(
            "p={} N={} M={} n={}..{} budget={}",
            self.prime, self.coeff_precision, self.t_precision, self.n_range.0, self.n_range.1, self.matrix_budget
        )
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weierstrass preparation of an element file.
    Prepare { file: PathBuf },
    /// `λ`, `μ` of a presented module.
    Module {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodFlag::Determinant)]
        method: MethodFlag,
    },
    /// Classification, `λ` and the group identity for a complex file.
    Complex { file: PathBuf },
    /// Batch identity check over seeded random complexes.
    VerifyKida(KidaArgs),
    /// Evaluate a formula record.
    Formula { file: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodFlag {
    Determinant,
    Growth,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyFlag {
    MuZero,
    MuPositive,
    Unconstrained,
}

impl FamilyFlag {
    pub fn family(self) -> Family {
        match self {
            FamilyFlag::MuZero => Family::MuZero,
            FamilyFlag::MuPositive => Family::MuPositive,
            FamilyFlag::Unconstrained => Family::Unconstrained,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyFlag::MuZero => "mu-zero",
            FamilyFlag::MuPositive => "mu-positive",
            FamilyFlag::Unconstrained => "unconstrained",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct KidaArgs {
    /// Group names such as `Z/3`, `Z/9`, `Z/3xZ/3`.
    #[arg(long, value_delimiter = ',', default_value = "Z/3")]
    pub groups: Vec<String>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mu-zero")]
    pub families: Vec<FamilyFlag>,
    /// Seeds `s0..s1`; defaults to `seed..seed + trials`.
    #[arg(long, value_parser = parse_range::<u64>)]
    pub seeds: Option<(u64, u64)>,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    /// Number of boundaries; cycles through 1..=4 by seed when absent.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub max_rank: usize,
}

fn parse_range<T: std::str::FromStr + PartialOrd>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let lo = a.trim().parse().map_err(|_| format!("bad bound {a:?}"))?;
    let hi = b.trim().parse().map_err(|_| format!("bad bound {b:?}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let report = match &cli.command {
        Command::Prepare { file } => commands::prepare(g, file),
        Command::Module { file, method } => commands::module(g, file, *method),
        Command::Complex { file } => commands::complex(g, file),
        Command::VerifyKida(args) => commands::verify_kida(g, args),
        Command::Formula { file } => commands::formula(g, file),
    };
    let text = report.to_json();
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if let Some(path) = &g.output {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("iwalab: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    for e in &report.errors {
        eprintln!("iwalab: {e}");
    }
    ExitCode::from(report.exit_code as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range::<u32>("0..4"), Ok((0, 4)));
        assert!(parse_range::<u32>("4..1").is_err());
        assert!(parse_range::<u64>("7").is_err());
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
