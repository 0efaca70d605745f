use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grassdet::commands::{cmd_detline, cmd_index, DetlineOp, Source};
use grassdet::suites::run_suite;
use grassdet::{Failure, Report, RunConfig};
use grassdet_core::{Field, Tolerance};

#[derive(Parser, Debug)]
#[command(name = "grassdet", version, about = "Grassmannian, Fredholm-pair and determinant-line computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Seed of the instance generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Trials per check.
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    /// Cap on ambient dimensions, in [2, 64].
    #[arg(long, global = true, default_value_t = 8)]
    dims: usize,
    /// Relative rank tolerance.
    #[arg(long, global = true, env = "GRASSDET_TOL")]
    tol: Option<f64>,
    /// Field of random instances; mixed when omitted.
    #[arg(long, global = true, value_enum)]
    field: Option<FieldArg>,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FieldArg {
    Real,
    Complex,
}

#[derive(Args, Debug)]
struct Inputs {
    /// JSON input files.
    files: Vec<PathBuf>,
    /// Generate a seeded instance instead of reading files.
    #[arg(long, conflicts_with = "files")]
    random: bool,
    /// Ambient dimension of the random instance (defaults to --dims).
    #[arg(long, requires = "random")]
    dim: Option<usize>,
}

impl Inputs {
    fn source(&self) -> Source {
        if self.random {
            Source::Random { dim: self.dim }
        } else {
            Source::Files(self.files.clone())
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Index, relative dimension, intersection and sum codimension of a pair (V, W).
    Index(Inputs),
    /// Determinant-line isomorphisms and their dual-path residuals.
    Detline {
        #[arg(value_enum)]
        op: OpArg,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Run a seeded verification suite.
    Verify {
        /// grassmann, fredholm, detcalc, bundles, orient, staralg, appendix-b or all.
        suite: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OpArg {
    Compose,
    Sum,
    Chart,
    Transpose,
}

impl From<OpArg> for DetlineOp {
    fn from(op: OpArg) -> Self {
        match op {
            OpArg::Compose => DetlineOp::Compose,
            OpArg::Sum => DetlineOp::Sum,
            OpArg::Chart => DetlineOp::Chart,
            OpArg::Transpose => DetlineOp::Transpose,
        }
    }
}

fn config(c: &Common) -> Result<RunConfig, Failure> {
    let mut tol = Tolerance::default();
    if let Some(t) = c.tol {
        tol = tol.with_rank_rel_tol(t)?;
    }
    let field = c.field.map(|f| match f {
        FieldArg::Real => Field::Real,
        FieldArg::Complex => Field::Complex,
    });
    RunConfig::new(c.seed, c.trials, c.dims, tol, field)
}

fn execute(cli: &Cli) -> Result<Report, Failure> {
    let cfg = config(&cli.common)?;
    match &cli.command {
        Command::Index(inputs) => cmd_index(&inputs.source(), &cfg),
        Command::Detline { op, inputs } => cmd_detline((*op).into(), &inputs.source(), &cfg),
        Command::Verify { suite } => run_suite(suite, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("grassdet: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = report.render();
    print!("{text}");
    if let Some(path) = &cli.common.out {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("grassdet: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
