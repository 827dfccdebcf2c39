use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pencilscope::output::to_json_string;
use pencilscope::{load_problem, run, Command, Options};
use pencilscope_core::{Tolerances, C64};
use serde_json::json;

#[derive(Parser)]
#[command(name = "pencilscope", version, about = "Krein signatures and index counts for selfadjoint matrix pencils")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalue branches and their zero crossings
    Branches(Args),
    /// Krein indices at each real characteristic value, with the Gram cross-check
    Signatures(Args),
    /// Canonical chains of root vectors
    Chains(Args),
    /// Signatures and slopes from Evans-Krein derivatives, winding counts
    Evans(Args),
    /// Conservation law, unstable count and lower bounds
    Index(Args),
    /// Real characteristic values along a parameter sweep
    Sweep(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Default,
    Strict,
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    lambda_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Write the matched branches as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Closed polygon "x0,y0;x1,y1;..."; may be repeated
    #[arg(long, allow_hyphen_values = true)]
    contour: Vec<String>,
    /// Seed for randomized cross-checks
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "default")]
    tol_profile: Profile,
}

fn parse_contour(s: &str) -> Result<Vec<C64>, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (x, y) = p.split_once(',').ok_or_else(|| format!("contour vertex \"{p}\" is not x,y"))?;
            let x: f64 = x.trim().parse().map_err(|_| format!("bad number \"{x}\" in contour"))?;
            let y: f64 = y.trim().parse().map_err(|_| format!("bad number \"{y}\" in contour"))?;
            Ok(C64::new(x, y))
        })
        .collect()
}

fn fail(code: &str, message: &str) -> ExitCode {
    eprintln!("{}", to_json_string(&json!({"error": {"code": code, "message": message}})));
    ExitCode::from(1)
}

fn threads() -> Option<usize> {
    std::env::var("PENCILSCOPE_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Cmd::Branches(a) => (Command::Branches, a),
        Cmd::Signatures(a) => (Command::Signatures, a),
        Cmd::Chains(a) => (Command::Chains, a),
        Cmd::Evans(a) => (Command::Evans, a),
        Cmd::Index(a) => (Command::Index, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    let problem = match load_problem(&args.input) {
        Ok(p) => p,
        Err(e) => return fail(e.code(), &e.to_string()),
    };
    let mut contours = Vec::new();
    for c in &args.contour {
        match parse_contour(c) {
            Ok(v) => contours.push(v),
            Err(m) => return fail("usage", &m),
        }
    }
    let opts = Options {
        lambda_min: args.lambda_min,
        lambda_max: args.lambda_max,
        steps: args.steps,
        csv: args.csv,
        contours,
        seed: args.seed,
        tol: match args.tol_profile {
            Profile::Default => Tolerances::default(),
            Profile::Strict => Tolerances::strict(),
        },
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads() {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return fail("usage", &e.to_string()),
    };
    match pool.install(|| run(cmd, &problem, &opts)) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe downstream is not our failure
            let _ = writeln!(stdout, "{}", to_json_string(&out.report));
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => fail(e.code(), &e.to_string()),
    }
}
