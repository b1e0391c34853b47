use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use graph_pme::experiment::{run_experiment, Command, ExperimentConfig, GraphSource, PairQuery, SweepKind};
use graph_pme::kernel::DEFAULT_EPS;
use graph_pme::lemma::WeightAnchor;
use graph_pme::paths::DEFAULT_PATH_CAP;
use graph_pme::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "graph-pme", version, about = "Porous medium estimates on weighted graphs")]
struct Cli {
    /// Seed for every random draw in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory for CSV files and the summary.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Integrator local error tolerance per unit time.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Graph document, or a generator such as `cycle_6` or `random_gnp_10_0.4`.
    #[arg(long)]
    graph: String,

    /// Generated graphs draw weights uniformly from [0.5, 2].
    #[arg(long)]
    random_weights: bool,

    /// Generated graphs use the degree as vertex measure.
    #[arg(long)]
    degree_measure: bool,
}

impl GraphArgs {
    fn source(&self) -> Result<GraphSource> {
        GraphSource::from_arg(&self.graph, self.random_weights, self.degree_measure)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Anchor {
    End,
    Start,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Residual of the discrete power identity on given or random fields.
    VerifyIdentity {
        #[command(flatten)]
        graph: GraphArgs,
        /// Field document with `f <label> <value>` lines.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        random_fields: usize,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        m: f64,
        /// Also search for a counterexample to the continuum chain rule at this exponent.
        #[arg(long, allow_hyphen_values = true)]
        chain_rule: Option<f64>,
    },
    /// Integrate a problem and write the trajectory.
    Simulate {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 50)]
        outputs: usize,
        /// Fixed-step RK4 with this many steps per output interval.
        #[arg(long)]
        fixed_substeps: Option<usize>,
    },
    /// Pointwise gradient estimates along an integrated trajectory.
    VerifyGradientEstimate {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 50)]
        outputs: usize,
    },
    /// Harnack inequality between space-time points of a trajectory.
    VerifyHarnack {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 50)]
        outputs: usize,
        #[arg(long, requires_all = ["y", "t1", "t2"], conflicts_with = "pairs")]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t2: Option<f64>,
        /// `random:<n>` sampled pairs.
        #[arg(long)]
        pairs: Option<String>,
        #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
        path_cap: usize,
        /// Also check the bounded-source form with this bound on |psi|.
        #[arg(long)]
        c0: Option<f64>,
    },
    /// Random instances of the integral inequality.
    VerifyLemma {
        #[arg(long, default_value_t = 100)]
        random: usize,
        #[arg(long, default_value_t = 63)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = Anchor::End)]
        anchor: Anchor,
    },
    /// Heat kernel by its series, optionally against the two-sided bounds.
    Kernel {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[arg(long, requires = "m")]
        check_bounds: bool,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        c0: f64,
    },
    /// Randomised property sweeps.
    Sweep {
        /// identity, gradient, harnack, phi, lemma or kernel
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

fn command(cmd: Cmd) -> Result<Command> {
    Ok(match cmd {
        Cmd::VerifyIdentity { graph, field, random_fields, m, chain_rule } => {
            if field.is_none() && random_fields == 0 {
                return Err(Error::InvalidParameter("give --field or --random-fields".into()));
            }
            Command::VerifyIdentity { graph: graph.source()?, field, random_fields, m, chain_rule }
        }
        Cmd::Simulate { problem, outputs, fixed_substeps } => Command::Simulate { problem, outputs, fixed_substeps },
        Cmd::VerifyGradientEstimate { problem, outputs } => Command::VerifyGradientEstimate { problem, outputs },
        Cmd::VerifyHarnack { problem, outputs, x, y, t1, t2, pairs, path_cap, c0 } => {
            let query = match (x, y, t1, t2, pairs) {
                (Some(x), Some(y), Some(t1), Some(t2), None) => PairQuery::Single { x, y, t1, t2 },
                (None, None, None, None, Some(p)) => PairQuery::parse_random(&p)?,
                _ => return Err(Error::InvalidParameter("give either --x --y --t1 --t2 or --pairs random:<n>".into())),
            };
            Command::VerifyHarnack { problem, outputs, query, path_cap, c0 }
        }
        Cmd::VerifyLemma { random, grid, anchor } => Command::VerifyLemma {
            random,
            grid,
            anchor: match anchor {
                Anchor::End => WeightAnchor::End,
                Anchor::Start => WeightAnchor::Start,
            },
        },
        Cmd::Kernel { graph, t, eps, check_bounds, m, c0 } => Command::Kernel {
            graph: graph.source()?,
            t,
            eps,
            bounds: if check_bounds { m.map(|m| (m, c0)) } else { None },
        },
        Cmd::Sweep { kind, count } => Command::Sweep { kind: kind.parse::<SweepKind>()?, count },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match command(cli.command) {
        Ok(command) => ExperimentConfig { command, seed: cli.seed, out: cli.out, tol: cli.tol },
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&cfg) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
