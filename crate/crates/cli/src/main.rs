use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ampshare_core::experiments::{run_kcell, run_mode_map, run_rate, run_sweep, RateInput};
use ampshare_core::{
    ChannelGains, Error, ExperimentConfig, ExperimentKind, LinkBudget, NetworkLayout, PowerBudget,
};
use clap::{Args, Parser, Subcommand};

/// Amplitude space sharing experiments: single-instance rates, interference
/// mode maps, SAP distance sweeps and multi-cell throughput, as CSV.
#[derive(Debug, Parser)]
#[command(name = "ampshare", version)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// `key = value` configuration file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output file (default: standard output)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// downlink | uplink
    #[arg(long, global = true)]
    direction: Option<String>,
    /// worker threads (default: all cores); never changes the output
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sum-rate of one two-user channel under a scheme.
    Rate(RateArgs),
    /// Interference mode at every MUE position of a grid over the cell.
    ModeMap(ModeMapArgs),
    /// Move the SAP/SUE pair from the cell center to the edge.
    Sweep(SweepArgs),
    /// Mean throughput of K = 1..kmax randomly placed small cells.
    Kcell(KcellArgs),
}

#[derive(Debug, Args)]
struct RateArgs {
    /// channel gains g11,g12,g21,g22
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["link", "layout"])]
    gains: Option<Vec<f64>>,
    /// power budgets p1,p2 (with --gains)
    #[arg(long, value_delimiter = ',', default_value = "1,1", requires = "gains")]
    powers: Vec<f64>,
    /// noise power (with --gains)
    #[arg(long, default_value_t = 1.0, requires = "gains")]
    n0: f64,
    /// link budget snr1,snr2,inr1,inr2 (unit powers and noise)
    #[arg(long, value_delimiter = ',', conflicts_with = "layout")]
    link: Option<Vec<f64>>,
    /// single-small-cell layout file
    #[arg(long)]
    layout: Option<PathBuf>,
    /// hk | etw | tin | orthogonal | oracle
    #[arg(long)]
    scheme: Option<String>,
}

#[derive(Debug, Args)]
struct ModeMapArgs {
    /// layout file supplying the SAP and SUE (its MUE is ignored)
    #[arg(long)]
    layout: Option<PathBuf>,
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Args)]
struct KcellArgs {
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Core(Error::Config(format!("{}: {e}", path.display()))))
}

fn set_opt<T: ToString>(cfg: &mut ExperimentConfig, key: &str, v: Option<T>) -> Result<(), Error> {
    match v {
        Some(v) => cfg.set(key, &v.to_string()),
        None => Ok(()),
    }
}

fn exactly<const N: usize>(flag: &str, v: &[f64]) -> Result<[f64; N], Error> {
    v.try_into().map_err(|_| {
        Error::Config(format!(
            "--{flag} takes {N} comma-separated values, got {}",
            v.len()
        ))
    })
}

fn load_layout(
    path: &Path,
    cfg: &ExperimentConfig,
    kind: ExperimentKind,
) -> Result<NetworkLayout, Failure> {
    let text = read(path)?;
    let layout = NetworkLayout::parse(&text, cfg.direction_for(kind))?;
    Ok(layout)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.common.config {
        Some(path) => ExperimentConfig::from_text(&read(path)?)?,
        None => ExperimentConfig::default(),
    };
    set_opt(&mut cfg, "seed", cli.common.seed)?;
    set_opt(&mut cfg, "direction", cli.common.direction.as_deref())?;

    if let Some(n) = cli.common.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be >= 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }

    let csv = match cli.command {
        Command::Rate(args) => {
            set_opt(&mut cfg, "scheme", args.scheme.as_deref())?;
            cfg.validate()?;
            let input = if let Some(g) = args.gains {
                let [g11, g12, g21, g22] = exactly("gains", &g)?;
                let [p1, p2] = exactly("powers", &args.powers)?;
                RateInput::Channel {
                    gains: ChannelGains::new(g11, g12, g21, g22)?,
                    budget: PowerBudget::new(p1, p2, args.n0)?,
                }
            } else if let Some(l) = args.link {
                let [snr1, snr2, inr1, inr2] = exactly("link", &l)?;
                let (gains, budget) = LinkBudget::new(snr1, snr2, inr1, inr2)?.to_channel()?;
                RateInput::Channel { gains, budget }
            } else if let Some(path) = args.layout {
                let layout = load_layout(&path, &cfg, ExperimentKind::Rate)?;
                layout.validate(&cfg.network)?;
                RateInput::Layout(layout)
            } else {
                return Err(
                    Error::Config("rate needs one of --gains, --link or --layout".into()).into(),
                );
            };
            log::info!("rate: scheme {}", cfg.scheme);
            run_rate(&input, cfg.scheme, &cfg)?.to_csv(&cfg)
        }
        Command::ModeMap(args) => {
            set_opt(&mut cfg, "resolution", args.resolution)?;
            cfg.validate()?;
            let direction = cfg.direction_for(ExperimentKind::ModeMap);
            let template = match &args.layout {
                Some(path) => Some(load_layout(path, &cfg, ExperimentKind::ModeMap)?),
                None => None,
            };
            log::info!("mode map: {direction}, {0}x{0}", cfg.resolution);
            run_mode_map(template.as_ref(), direction, cfg.resolution, &cfg)?.to_csv(&cfg)
        }
        Command::Sweep(args) => {
            set_opt(&mut cfg, "steps", args.steps)?;
            cfg.validate()?;
            log::info!("sweep: {} steps", cfg.steps);
            run_sweep(&cfg)?.to_csv(&cfg)
        }
        Command::Kcell(args) => {
            set_opt(&mut cfg, "kmax", args.kmax)?;
            set_opt(&mut cfg, "trials", args.trials)?;
            cfg.validate()?;
            log::info!("kcell: K = 1..{}, {} trials", cfg.kmax, cfg.trials);
            run_kcell(&cfg)?.to_csv(&cfg)
        }
    };

    match &cli.common.out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_infeasible_geometry() { 3 } else { 2 })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
