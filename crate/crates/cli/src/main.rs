use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gmrf_core::Error;

mod commands;
mod source;

use source::GraphSource;

#[derive(Parser)]
#[command(name = "gmrf", version, about = "Maximum-determinant completions of uniform correlation patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel work (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Clone)]
struct GraphArg {
    /// `family:params[,seed=N]` (e.g. `cycle:4`, `regular:20,3,seed=7`) or `file:path`
    #[arg(long)]
    graph: GraphSource,
}

#[derive(Copy, Clone, ValueEnum)]
enum SolveMethod {
    Dual,
    Recoupling,
    Chordal,
}

#[derive(Args)]
struct Grid {
    /// First x of the grid
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    from: f64,
    /// Last x of the grid
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.9)]
    to: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 10)]
    steps: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the maximizer and print it as JSON
    Solve {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, value_enum, default_value = "dual")]
        method: SolveMethod,
        #[arg(long, default_value_t = gmrf_core::gmrf::DEFAULT_TOL)]
        tol: f64,
    },
    /// Run every applicable audit; exits 1 if any check fails
    Verify {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = gmrf_core::audit::AUDIT_TOL)]
        tol: f64,
        /// Also run the checks that hold for vertex-transitive graphs
        #[arg(long)]
        vertex_transitive: bool,
        /// Emit one JSON object per claim instead of a table
        #[arg(long)]
        json: bool,
    },
    /// CSV of ln τ, Σy and bound margins over an x grid
    Sweep {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        grid: Grid,
    },
    /// CSV of the Ihara zeta function against τ over an x grid
    Zeta {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        grid: Grid,
        /// Print exact traces of powers of the edge matrix up to this power instead
        #[arg(long)]
        traces: Option<usize>,
    },
    /// Spanning-tree count and, for regular graphs, the certified upper bound
    Trees {
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Monte-Carlo probabilities of edge-interval regions of Gram matrices
    Ldp {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        hi: f64,
        /// Comma-separated dimensions
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact integer power series of τ(G, x) at 0
    Series {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value_t = 10)]
        order: usize,
    },
    /// Search random graphs for small covariances and large y − x/(1−x²)
    Scan {
        /// Random family, e.g. `er:10,0.4` or `regular:12,3`
        #[arg(long)]
        family: gmrf_core::graph::GraphFamily,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Parameter(_) | Error::Refused(_) | Error::NotApplicable(_) => 2,
        _ => 3,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parameter(_) => "parameter",
        Error::Refused(_) => "refused",
        Error::NotPositiveDefinite { .. } => "not_positive_definite",
        Error::NoConvergence { .. } => "no_convergence",
        Error::InfeasibleSpec(_) => "infeasible",
        Error::OverlapMismatch(_) => "overlap_mismatch",
        Error::NotChordal => "not_chordal",
        Error::NotClique(_) => "not_clique",
        Error::NotApplicable(_) => "not_applicable",
        Error::Pole(_) => "pole",
        Error::NoStabilization(_) => "no_stabilization",
        Error::Integrity(_) => "integrity",
        Error::ZeroConstantTerm => "zero_constant_term",
        Error::Parse { .. } => "parse",
    }
}

fn run(cli: &Cli) -> Result<(String, bool), Error> {
    let jobs = cli.jobs;
    match &cli.command {
        Command::Solve { graph, x, method, tol } => commands::solve_cmd(&graph.graph.load()?, *x, *method, *tol),
        Command::Verify {
            graph,
            x,
            tol,
            vertex_transitive,
            json,
        } => commands::verify(&graph.graph.load()?, *x, *tol, *vertex_transitive, *json),
        Command::Sweep { graph, grid } => commands::sweep(&graph.graph.load()?, grid, jobs),
        Command::Zeta { graph, grid, traces } => commands::zeta(&graph.graph.load()?, grid, *traces, jobs),
        Command::Trees { graph } => commands::trees(&graph.graph.load()?),
        Command::Ldp {
            graph,
            lo,
            hi,
            n,
            samples,
            seed,
        } => commands::ldp(&graph.graph.load()?, *lo, *hi, n, *samples, *seed, jobs),
        Command::Series { graph, order } => commands::series(&graph.graph.load()?, *order),
        Command::Scan { family, x, count, seed } => commands::scan(family, *x, *count, *seed, jobs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((text, pass)) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("gmrf: cannot write output: {e}");
                return ExitCode::from(3);
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let body = serde_json::json!({ "error": error_kind(&e), "message": e.to_string() });
            println!("{body}");
            ExitCode::from(exit_code(&e))
        }
    }
}
