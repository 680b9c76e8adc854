//! `potts-gks`: exact enumeration, random-cluster checks, function-class
//! membership, inequality verification, Monte Carlo and fuzzing for the
//! Potts model with external field.
//!
//! Every command writes JSON lines to stdout, one record per line, and ends
//! with a summary object. Exit codes: 0 when every check passes, 1 when a
//! check fails, 2 on bad input.

mod commands;
mod inputs;
mod report;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{Reporter, EXIT_INPUT};

#[derive(Parser, Debug)]
#[command(name = "potts-gks", version, about = "Correlation inequalities for the Potts model with external field")]
struct Cli {
    /// Enumeration cap; overrides POTTS_GKS_CAP
    #[arg(long, global = true)]
    cap: Option<u64>,

    /// Worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print only the summary, as CSV
    #[arg(long, global = true)]
    csv: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partition function and exact means of f^R, f^S and f^R f^S
    Exact(ExactArgs),
    /// Random-cluster probabilities, coupling marginal and tower check
    Rc(RcArgs),
    /// Membership of a spin function in the moment classes
    Fclass(FclassArgs),
    /// Exact checks of the correlation inequalities
    Verify(VerifyArgs),
    /// Swendsen-Wang estimate of <f^R f^S>
    Mc(McArgs),
    /// Randomized checks on generated instances
    Fuzz(FuzzArgs),
}

#[derive(Args, Debug)]
struct Observable {
    /// Spin function: A, B, C:v0,..., delta:i, table:v0,..., inline JSON or a path
    #[arg(long = "f")]
    f: Option<String>,

    /// Comma-separated vertices; all vertices when omitted
    #[arg(long = "R")]
    r: Option<String>,

    /// Comma-separated vertices
    #[arg(long = "S")]
    s: Option<String>,
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[arg(long)]
    model: PathBuf,

    #[command(flatten)]
    obs: Observable,

    /// Echo the parsed model as a JSON line
    #[arg(long)]
    dump_model: bool,
}

#[derive(Args, Debug)]
struct RcArgs {
    #[arg(long)]
    model: PathBuf,

    #[command(flatten)]
    obs: Observable,

    /// List the probability of every bond configuration
    #[arg(long)]
    list: bool,

    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct FclassArgs {
    /// Built-in family (C needs values; use --f C:...)
    #[arg(long, conflicts_with = "f")]
    kind: Option<String>,

    #[arg(long = "f")]
    f: Option<String>,

    #[arg(long)]
    q: Option<usize>,

    /// Largest exponent checked
    #[arg(long = "M", default_value_t = 48)]
    m: usize,

    /// Also require the maximum modulus at this state
    #[arg(long)]
    index: Option<usize>,

    #[arg(long, default_value_t = potts_gks::function_classes::DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Check {
    Real,
    Monotone,
    Gks,
    Disjoint,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    check: Check,

    #[arg(long)]
    model: PathBuf,

    #[command(flatten)]
    obs: Observable,

    /// Second function for the disjoint-support check
    #[arg(long)]
    f1: Option<String>,

    /// Coordinates for the monotonicity check (J:<edge index> or h:<vertex>); all when omitted
    #[arg(long = "coord")]
    coords: Vec<String>,

    #[arg(long, default_value_t = potts_gks::verifier::DEFAULT_VERIFY_TOLERANCE)]
    tol: f64,

    /// Largest exponent used to certify the functions
    #[arg(long = "M")]
    m: Option<usize>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long)]
    model: PathBuf,

    #[command(flatten)]
    obs: Observable,

    #[arg(long)]
    sweeps: u64,

    /// Defaults to a tenth of the sweeps
    #[arg(long)]
    burn_in: Option<u64>,

    #[arg(long)]
    seed: u64,

    /// Independent chains, merged
    #[arg(long, default_value_t = 1)]
    chains: u64,

    /// Rao-Blackwellized estimator
    #[arg(long)]
    rb: bool,

    /// Compare with exact enumeration; fails beyond --z standard errors
    #[arg(long)]
    exact: bool,

    #[arg(long, default_value_t = 4.0)]
    z: f64,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long)]
    seed: u64,

    #[arg(long, default_value_t = 1000)]
    trials: u64,

    #[arg(long, default_value_t = 2)]
    q_min: usize,

    #[arg(long, default_value_t = 5)]
    q_max: usize,

    #[arg(long, default_value_t = 1)]
    min_vertices: usize,

    #[arg(long, default_value_t = 5)]
    max_vertices: usize,

    #[arg(long, default_value_t = 0.5)]
    density: f64,

    #[arg(long, default_value_t = 3.0)]
    j_max: f64,

    #[arg(long, default_value_t = 3.0)]
    h_max: f64,

    /// Probability of exact-zero parameters
    #[arg(long, default_value_t = 0.1)]
    boundary: f64,

    /// Fraction of trials drawing functions outside the classes
    #[arg(long, default_value_t = 0.0)]
    adversarial: f64,

    #[arg(long, default_value_t = potts_gks::verifier::DEFAULT_VERIFY_TOLERANCE)]
    tol: f64,
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Exact(_) => "exact",
        Command::Rc(_) => "rc",
        Command::Fclass(_) => "fclass",
        Command::Verify(_) => "verify",
        Command::Mc(_) => "mc",
        Command::Fuzz(_) => "fuzz",
    }
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn run<I, T>(argv: I, out: impl Write, mut err: impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };

    let mut reporter = Reporter::new(out, command_name(&cli.command), cli.csv);
    let outcome = commands::dispatch(&cli, &mut reporter);
    let written = match outcome {
        Ok(()) => reporter.finish(),
        Err(e) => {
            let _ = writeln!(err, "potts-gks: {e}");
            reporter.fail(&e.to_string())
        }
    };
    // a closed stdout still leaves the exit code meaningful
    written.unwrap_or_else(|e| {
        let _ = writeln!(err, "potts-gks: {e}");
        EXIT_INPUT
    })
}

fn main() {
    let code = run(std::env::args_os(), io::stdout().lock(), io::stderr());
    std::process::exit(code);
}
