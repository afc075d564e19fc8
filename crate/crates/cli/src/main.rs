use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rankstab_core::{CountStrategy, WeierstrassCurve};
use serde::Serialize;

mod commands;
mod manifest;

use manifest::Run;

/// Rank stability of elliptic curves in metabelian extensions.
///
/// Every subcommand prints one JSON document on stdout. Exit status is 0 on
/// success, 2 for bad input and 1 if a computed value broke an invariant.
#[derive(Debug, Parser)]
#[command(name = "rankstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Sieve the primes of 𝔗_E up to a bound.
    Sieve(SieveArgs),
    /// Compare the empirical density of 𝔗_E with the closed form.
    Density(DensityArgs),
    /// Try to certify that the mod-p representation is surjective.
    Image(ImageArgs),
    /// Lower-bound census of extensions by discriminant.
    Count(CountArgs),
    /// Check the local hypotheses for a ramification set V.
    Check(CheckArgs),
    /// Run the built-in example: 11a2, p = 3, K = Q(μ_3).
    VerifyExample(RunArgs),
    /// Exhaustive oracles.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
struct RunArgs {
    /// Worker threads; 0 uses all available cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Seed for the random points of baby-step/giant-step counting.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a run manifest (inputs, version, timing) to this file.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct CurveArgs {
    /// Weierstrass coefficients a1,a2,a3,a4,a6.
    #[arg(long, allow_hyphen_values = true)]
    curve: WeierstrassCurve,
    #[arg(short = 'p')]
    p: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct FieldArgs {
    #[arg(short = 'n', default_value_t = 1)]
    n: u32,
    /// Conductor m of K; defaults to p^n.
    #[arg(long)]
    modulus: Option<u64>,
    /// Generators of H ≤ (Z/mZ)^× cutting out K; empty means K = Q(μ_m).
    #[arg(long, value_delimiter = ',')]
    subgroup: Vec<u64>,
    /// Images in (Z/p^nZ)^× of the generators of (Z/mZ)^×; defaults to
    /// reduction mod p^n.
    #[arg(long, value_delimiter = ',')]
    chi0: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct HypothesisArgs {
    /// Record that Sel_p(E/K) = 0 has been established elsewhere.
    #[arg(long)]
    assert_selmer_trivial: bool,
    /// Record that K ∩ Q(E[p]) = Q(μ_p) has been established elsewhere.
    #[arg(long)]
    assert_intersection: bool,
    /// Witness bound for the surjectivity check in the hypothesis block.
    #[arg(long, default_value_t = 1000)]
    image_bound: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Strategy {
    Auto,
    Exhaustive,
    Bsgs,
}

impl From<Strategy> for CountStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Auto => CountStrategy::default(),
            Strategy::Exhaustive => CountStrategy::Exhaustive,
            Strategy::Bsgs => CountStrategy::BabyGiant,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct SieveArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    bound: u64,
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    strategy: Strategy,
    /// Write one JSON record per prime to this file.
    #[arg(long)]
    emit: Option<PathBuf>,
    #[command(flatten)]
    hyp: HypothesisArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct DensityArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    bound: u64,
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    strategy: Strategy,
    #[command(flatten)]
    hyp: HypothesisArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct ImageArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[command(flatten)]
    field: FieldArgs,
    /// Scan good primes up to this bound.
    #[arg(long, default_value_t = 1000)]
    bound: u64,
    #[arg(long)]
    assert_selmer_trivial: bool,
    #[arg(long)]
    assert_intersection: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct CountArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[command(flatten)]
    field: FieldArgs,
    /// Discriminant bound.
    #[arg(short = 'x', value_parser = parse_bigint)]
    #[serde(serialize_with = "as_string")]
    x: BigInt,
    /// The constant of the #𝔅_V lower bound, as NUM or NUM/DEN.
    #[arg(long, default_value = "1", value_parser = parse_ratio)]
    #[serde(serialize_with = "as_string")]
    cb: BigRational,
    /// The constant of the #𝒲_Y lower bound, as NUM or NUM/DEN.
    #[arg(long, default_value = "1", value_parser = parse_ratio)]
    #[serde(serialize_with = "as_string")]
    cw: BigRational,
    /// Discriminant bounds for the exponent fit.
    #[arg(long, value_delimiter = ',', value_parser = parse_bigint)]
    #[serde(serialize_with = "as_strings")]
    grid: Vec<BigInt>,
    #[command(flatten)]
    hyp: HypothesisArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct CheckArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[command(flatten)]
    field: FieldArgs,
    /// Ramification set V.
    #[arg(short = 'V', value_delimiter = ',', required = true)]
    v: Vec<u64>,
    #[command(flatten)]
    hyp: HypothesisArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct OracleArgs {
    /// Count trace ≠ 2 elements of SL_2(F_p) by enumeration.
    #[arg(long)]
    sl2: u64,
}

fn parse_bigint(s: &str) -> Result<BigInt, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_ratio(s: &str) -> Result<BigRational, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn as_string<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn as_strings<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let run_args = match &cli.command {
        Command::Sieve(a) => Some(&a.run),
        Command::Density(a) => Some(&a.run),
        Command::Image(a) => Some(&a.run),
        Command::Count(a) => Some(&a.run),
        Command::Check(a) => Some(&a.run),
        Command::VerifyExample(a) => Some(a),
        Command::Oracle(_) => None,
    };
    let mut run = Run::new(run_args.cloned());
    let result = match &cli.command {
        Command::Sieve(a) => commands::sieve(a, &mut run),
        Command::Density(a) => commands::density(a, &mut run),
        Command::Image(a) => commands::image(a, &mut run),
        Command::Count(a) => commands::count(a, &mut run),
        Command::Check(a) => commands::check(a, &mut run),
        Command::VerifyExample(a) => commands::verify_example(a, &mut run),
        Command::Oracle(a) => commands::oracle(a),
    };
    match result.and_then(|out| run.finish(&argv, &cli.command).map(|_| out)) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rankstab: {e}");
            if e.is_invariant_violation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
