use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use telenet::io::{load_config, BoundaryMode, InitialCondition, RunConfig};
use telenet::runs::{run_converge, run_power, run_simulate};
use telenet::{Error, Limiter};

#[derive(Parser)]
#[command(
    name = "telenet",
    version,
    about = "Telegrapher's equations on power networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the split finite-volume scheme and write field snapshots and a diagnostics trace.
    Simulate(RunArgs),
    /// Grid-refinement study against the periodic reference.
    Converge(RunArgs),
    /// Nodal voltages, currents and powers of the periodic solution.
    Power(RunArgs),
    /// Check a network or run file and report every problem found.
    Validate(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LimiterArg {
    Minmod,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Zero,
    Analytic,
    Sine,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Periodic,
    Homogeneous,
}

#[derive(Args)]
struct RunArgs {
    /// Run file, or a network file used with default settings.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    limiter: Option<LimiterArg>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Refinement exponents `i..j` (inclusive) with dx = 2^-i, or a single `i`.
    #[arg(long, value_parser = parse_levels)]
    levels: Option<(i32, i32)>,
}

fn parse_levels(s: &str) -> Result<(i32, i32), String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<i32>()
            .map_err(|e| format!("bad level `{t}`: {e}"))
    };
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (lo, hi) = (parse(a)?, parse(b)?);
            if lo > hi {
                return Err(format!("empty level range {lo}..{hi}"));
            }
            Ok((lo, hi))
        }
        None => parse(s).map(|l| (l, l)),
    }
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = load_config(&self.config)?;
        if let Some(l) = self.limiter {
            let l = match l {
                LimiterArg::Minmod => Limiter::Minmod,
                LimiterArg::None => Limiter::None,
            };
            cfg.scheme.limiter = l;
            cfg.limiters = vec![l];
        }
        if let Some(c) = self.cfl {
            cfg.scheme.cfl = c;
        }
        if let Some(dx) = self.dx {
            cfg.scheme.dx_target = dx;
        }
        if let Some(t) = self.t_end {
            cfg.scheme.t_end = t;
        }
        if let Some(i) = self.init {
            cfg.init = match i {
                InitArg::Zero => InitialCondition::Zero,
                InitArg::Analytic => InitialCondition::Analytic,
                InitArg::Sine => InitialCondition::Sine,
            };
        }
        if let Some(b) = self.boundary {
            cfg.boundary = match b {
                BoundaryArg::Periodic => BoundaryMode::Periodic,
                BoundaryArg::Homogeneous => BoundaryMode::Homogeneous,
            };
        }
        if let Some(levels) = self.levels {
            cfg.levels = levels;
        }
        cfg.check()?;
        Ok(cfg)
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate(args) => {
            let cfg = args.resolve()?;
            let out = run_simulate(&cfg, &args.out)?;
            println!(
                "simulated to t = {} in {} steps (dt = {:e}); {} snapshot(s) in {}",
                cfg.scheme.t_end,
                out.steps,
                out.dt,
                out.snapshots.len(),
                args.out.display()
            );
        }
        Command::Converge(args) => {
            let cfg = args.resolve()?;
            for (limiter, study) in run_converge(&cfg, &args.out)? {
                println!("{}", limiter.name());
                for l in &study.levels {
                    let order = l.order.map(|o| format!("{o:.3}")).unwrap_or_default();
                    println!(
                        "  level {:2}  dx {:.3e}  error {:.6e}  order {}",
                        l.level, l.dx, l.max_error, order
                    );
                }
            }
        }
        Command::Power(args) => {
            let cfg = args.resolve()?;
            for r in run_power(&cfg, &args.out)? {
                println!(
                    "{:>8} {:>9}  V = {:+.6} {:+.6}j  P = {:+.6}  Q = {:+.6}",
                    r.node, r.kind, r.voltage.re, r.voltage.im, r.p, r.q
                );
            }
        }
        Command::Validate(args) => {
            let cfg = args.resolve()?;
            println!(
                "valid: {} nodes, {} edges, omega = {}",
                cfg.network.nodes().len(),
                cfg.network.edges().len(),
                cfg.network.omega()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Usage errors are configuration errors (1); clap's own default would be 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
