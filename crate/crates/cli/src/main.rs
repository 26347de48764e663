//! `kitecd`: command-line front end of the kite co-design suite.

mod commands;
mod output;
mod overrides;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kite_core::codesign::{Strategy, Surrogate};
use kite_core::config::SuiteConfig;
use kite_core::Error;

#[derive(Parser, Debug)]
#[command(name = "kitecd", version, about = "Control-aware geometric and structural co-design of underwater kites")]
struct Cli {
    /// Suite configuration (TOML); built-in defaults when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override one config value, e.g. `--set flow.v=1.2`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, short, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads for sweeps; defaults to the hardware parallelism.
    #[arg(long, short, global = true)]
    jobs: Option<usize>,
    /// More log output (repeatable).
    #[arg(long, short, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the effective configuration as TOML.
    Config,
    /// Size the wing structure of one planform.
    Swdt(PlanformArgs),
    /// Size the fuselage shell for one hull under the planform's rated loads.
    Sfdt {
        #[command(flatten)]
        planform: PlanformArgs,
        #[arg(long, short = 'D')]
        diameter: f64,
        #[arg(long, short = 'L')]
        length: f64,
    },
    /// Steady-flight geometries meeting a power requirement.
    Sfot {
        #[arg(long)]
        p_req: f64,
        #[arg(long, value_enum, default_value_t = SurrogateArg::Span)]
        surrogate: SurrogateArg,
    },
    /// Build the flight-efficiency map from simulation, or fit it from samples.
    Effmap {
        /// Fit an existing samples file instead of simulating.
        #[arg(long)]
        from_samples: Option<PathBuf>,
    },
    /// Pareto sweep: minimum wing mass at each required power.
    Pareto {
        /// Required powers (W); the configured sweep when omitted.
        #[arg(long, value_delimiter = ',')]
        p_req: Vec<f64>,
        #[arg(long, value_enum, default_value_t = StrategyArg::All)]
        strategy: StrategyArg,
    },
    /// Dual-objective sweep with the genetic algorithm.
    Dual {
        /// Weights w; the configured list when omitted.
        #[arg(long, value_delimiter = ',')]
        w: Vec<f64>,
        #[arg(long)]
        p_min: Option<f64>,
        /// Also report each point's height above the Pareto hull.
        #[arg(long)]
        hull: bool,
    },
    /// Fly a design in closed loop and write its lap series.
    Simulate {
        #[command(flatten)]
        design: DesignSource,
        #[arg(long, default_value_t = 3)]
        laps: usize,
        /// Learn the path first and fly the best learned path.
        #[arg(long)]
        learn: bool,
    },
    /// Audit a design record against every constraint.
    Check {
        /// Design record (JSON): a decision vector or a full design.
        design: PathBuf,
        /// Require P_gen = P_req within the configured tolerance.
        #[arg(long, conflicts_with = "p_min")]
        p_req: Option<f64>,
        /// Require P_gen >= P_min.
        #[arg(long)]
        p_min: Option<f64>,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct PlanformArgs {
    #[arg(long, short)]
    span: f64,
    #[arg(long)]
    ar: f64,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct DesignSource {
    /// Design record (JSON).
    #[arg(long)]
    design: Option<PathBuf>,
    /// The configured baseline kite.
    #[arg(long)]
    baseline: bool,
    /// The fully nested Pareto design at this power (W).
    #[arg(long)]
    p_req: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SurrogateArg {
    Span,
    WingVolume,
}

impl From<SurrogateArg> for Surrogate {
    fn from(s: SurrogateArg) -> Self {
        match s {
            SurrogateArg::Span => Surrogate::Span,
            SurrogateArg::WingVolume => Surrogate::WingVolume,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum StrategyArg {
    FullyNested,
    SequentialSpan,
    SequentialWingVolume,
    All,
}

impl StrategyArg {
    fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyArg::FullyNested => vec![Strategy::FullyNested],
            StrategyArg::SequentialSpan => vec![Strategy::SequentialSpan],
            StrategyArg::SequentialWingVolume => vec![Strategy::SequentialWingVolume],
            StrategyArg::All => vec![Strategy::FullyNested, Strategy::SequentialSpan, Strategy::SequentialWingVolume],
        }
    }
}

/// Exit status: ok, infeasible, error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Infeasible,
}

fn load_config(cli: &Cli) -> kite_core::Result<SuiteConfig> {
    let (text, base) = match &cli.config {
        Some(path) => (std::fs::read_to_string(path)?, Some(path.clone())),
        None => (SuiteConfig::default().to_toml()?, None),
    };
    let text = overrides::apply(&text, &cli.overrides)?;
    let mut cfg = SuiteConfig::from_toml(&text)?;
    if let (Some(surface), Some(dir)) = (&cfg.eta_surface, base.as_ref().and_then(|p| p.parent())) {
        if surface.is_relative() {
            cfg.eta_surface = Some(dir.join(surface));
        }
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> kite_core::Result<Status> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::InvalidInput("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = load_config(cli)?;
    let out = output::OutputDir::new(&cfg.output_dir);
    match &cli.command {
        Command::Config => {
            print!("{}", cfg.to_toml()?);
            Ok(Status::Ok)
        }
        Command::Swdt(p) => commands::swdt(&cfg, &out, p.span, p.ar),
        Command::Sfdt { planform, diameter, length } => {
            commands::sfdt(&cfg, &out, planform.span, planform.ar, *diameter, *length)
        }
        Command::Sfot { p_req, surrogate } => commands::sfot(&cfg, &out, *p_req, (*surrogate).into()),
        Command::Effmap { from_samples } => commands::effmap(&cfg, &out, from_samples.as_deref()),
        Command::Pareto { p_req, strategy } => {
            let p = if p_req.is_empty() { cfg.codesign.pareto_sweep.clone() } else { p_req.clone() };
            commands::pareto(&cfg, &out, &p, &strategy.strategies())
        }
        Command::Dual { w, p_min, hull } => {
            let w = if w.is_empty() { cfg.codesign.dual_weights.clone() } else { w.clone() };
            commands::dual(&cfg, &out, &w, p_min.unwrap_or(cfg.codesign.p_min), *hull)
        }
        Command::Simulate { design, laps, learn } => {
            let source = match (&design.design, design.baseline, design.p_req) {
                (Some(path), _, _) => commands::Source::Record(path.clone()),
                (None, true, _) => commands::Source::Baseline,
                (None, false, Some(p)) => commands::Source::Pareto(p),
                _ => return Err(Error::InvalidInput("no design source given".into())),
            };
            commands::simulate(&cfg, &out, &source, *laps, *learn)
        }
        Command::Check { design, p_req, p_min } => commands::check(&cfg, &out, design, *p_req, *p_min),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Infeasible) => ExitCode::from(1),
        Err(e) => {
            println!("{}", output::error_record(&e));
            log::error!("{e}");
            ExitCode::from(if e.is_infeasible() { 1 } else { 2 })
        }
    }
}
