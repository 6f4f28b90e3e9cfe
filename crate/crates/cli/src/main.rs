//! `randlab`: exact computations with randomizations of finite structures.
//!
//! Exit codes: 0 ok, 1 a check failed, 2 a name or argument does not
//! resolve, 3 parse error, 4 evaluation budget exceeded.

mod commands;
mod error;
mod output;
mod workspace;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{ApproxArgs, EvalArgs, PhiArgs, Report, RhoArgs};
use error::CliError;
use workspace::Workspace;

#[derive(Parser)]
#[command(name = "randlab", version, about = "Exact computations with randomizations of finite first-order structures")]
struct Cli {
    /// Workspace file with named structures, spaces, randomizations, elements and measures.
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,
    /// Largest quantifier domain `eval` enumerates.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    budget: u64,
    /// Render rationals as decimals with this many digits.
    #[arg(long, global = true)]
    decimal: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Value of a continuous formula.
    Eval {
        #[arg(long)]
        rand: String,
        #[arg(long)]
        cformula: String,
        /// Random element bindings, `x=f,y=g` (`#k` is the constant k).
        #[arg(long, default_value = "")]
        bind: String,
        /// Event bindings, `U=E,V=F`.
        #[arg(long, default_value = "")]
        events: String,
    },
    /// Run a check suite; exits 1 when a check fails.
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
    /// rho(p, b), or rho-hat(p, q) and the nonforking extension.
    Rho {
        #[command(flatten)]
        phi: PhiOpts,
        /// A type `qN` or a realizing tuple; a measure name with --rho-hat or --certify.
        #[arg(long)]
        p: String,
        /// The y-tuple.
        #[arg(long)]
        b: Option<String>,
        /// Measure on S_{y,W} for --rho-hat and --certify.
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        rho_hat: bool,
        /// Build the nonforking extension and certify it by linear programming.
        #[arg(long)]
        certify: bool,
    },
    /// A random tuple whose type is the given measure.
    Realize {
        #[arg(long)]
        rand: String,
        #[arg(long)]
        measure: String,
        /// Store the refined randomization and the tuple in the workspace under this name.
        #[arg(long)]
        save: Option<String>,
    },
    /// Distance between two types.
    Dmetric { a: String, b: String },
    /// Fibre product of two measures over their last `w` coordinates.
    Fiber {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 0)]
        w: usize,
    },
    /// Decide a measure extension problem from a constraint file.
    Extend {
        #[arg(long)]
        problem: PathBuf,
        /// Minimum of the pairing with these values over all solutions.
        #[arg(long)]
        lambda_tilde: Option<String>,
    },
    /// Convex combination of randomizations, `1/2:r1,1/2:r2`.
    Convex {
        #[arg(long)]
        parts: String,
        #[arg(long)]
        save: Option<String>,
    },
    /// Approximate a random element by one measurable for a finite algebra.
    ApproxSimple {
        #[arg(long)]
        rand: String,
        #[arg(long)]
        f: String,
        #[arg(long)]
        eps: String,
        /// `discrete`, `trivial`, `dyadic:L`, `atoms:0,1;2,3` or `generated:E,F`.
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        save: Option<String>,
    },
    /// List the n-types of a structure over parameters.
    Types {
        #[arg(long)]
        structure: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value = "")]
        params: String,
        /// Print an isolating formula for each type.
        #[arg(long)]
        formulas: bool,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// The randomization axioms.
    Axioms {
        #[arg(long)]
        rand: String,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Types of a random tuple as measures on the classical type space.
    Types {
        #[arg(long)]
        rand: String,
        /// Comma-separated random elements.
        #[arg(long)]
        tuple: String,
    },
    /// Finite type spaces and realization of every battery measure.
    Categoricity {
        #[arg(long)]
        structure: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Ladders, phi-types, CB rank and the two computations of rho.
    Stability {
        #[command(flatten)]
        phi: PhiOpts,
    },
    /// Independence of c from b over A.
    Independence {
        #[arg(long)]
        rand: String,
        #[arg(long)]
        c: String,
        #[arg(long)]
        b: String,
        #[arg(long = "A", default_value = "")]
        a: String,
        /// Use classes of this quantifier depth instead of automorphism orbits.
        #[arg(long)]
        depth: Option<usize>,
    },
}

#[derive(Args)]
struct PhiOpts {
    #[arg(long)]
    structure: String,
    #[arg(long)]
    phi: String,
    /// Object variables, comma-separated.
    #[arg(long, default_value = "x")]
    x: String,
    /// Partner variables, comma-separated.
    #[arg(long, default_value = "y")]
    y: String,
    /// Parameter variables, comma-separated.
    #[arg(long, default_value = "")]
    w: String,
    /// Values of the parameter variables.
    #[arg(long, default_value = "")]
    params: String,
}

impl PhiOpts {
    fn view(&self) -> PhiArgs<'_> {
        PhiArgs { structure: &self.structure, phi: &self.phi, x: &self.x, y: &self.y, w: &self.w, params: &self.params }
    }
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let path = cli.workspace.as_deref();
    let mut ws = match path {
        Some(p) => Workspace::load(p)?,
        None => Workspace::new(),
    };
    run_command(&cli.command, &mut ws, path, cli.budget as u128)
}

fn run_command(cmd: &Command, ws: &mut Workspace, path: Option<&Path>, budget: u128) -> Result<Report, CliError> {
    match cmd {
        Command::Eval { rand, cformula, bind, events } => commands::eval(ws, &EvalArgs { rand, cformula, bind, events, budget }),
        Command::Check { what } => match what {
            CheckCommand::Axioms { rand, samples, seed } => commands::check_axioms_cmd(ws, rand, *samples, *seed),
            CheckCommand::Types { rand, tuple } => commands::check_types(ws, rand, tuple),
            CheckCommand::Categoricity { structure, n } => commands::check_categoricity(ws, structure, *n),
            CheckCommand::Stability { phi } => commands::check_stability(ws, &phi.view()),
            CheckCommand::Independence { rand, c, b, a, depth } => commands::check_independence_cmd(ws, rand, c, b, a, *depth),
        },
        Command::Rho { phi, p, b, q, rho_hat, certify } => commands::rho_cmd(
            ws,
            &RhoArgs { phi: phi.view(), p, b: b.as_deref(), q: q.as_deref(), rho_hat: *rho_hat, certify: *certify },
        ),
        Command::Realize { rand, measure, save } => commands::realize_cmd(ws, path, rand, measure, save.as_deref()),
        Command::Dmetric { a, b } => commands::dmetric_cmd(ws, a, b),
        Command::Fiber { p, q, w } => commands::fiber_cmd(ws, p, q, *w),
        Command::Extend { problem, lambda_tilde } => commands::extend_cmd(problem, lambda_tilde.as_deref()),
        Command::Convex { parts, save } => commands::convex_cmd(ws, path, parts, save.as_deref()),
        Command::ApproxSimple { rand, f, eps, algebra, save } => {
            commands::approx_cmd(ws, path, &ApproxArgs { rand, f, eps, algebra, save: save.as_deref() })
        }
        Command::Types { structure, n, params, formulas } => commands::types_cmd(ws, structure, *n, params, *formulas),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(3);
        }
    };
    match run(&cli) {
        Ok(report) => {
            for line in &report.lines {
                println!("{}", output::render(line, cli.decimal));
            }
            ExitCode::from(u8::from(report.failed))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
