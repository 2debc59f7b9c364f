use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use batchreg::environments::{load_mdp_spec, save_mdp_spec, Builtin, GridNoiseConfig};
use batchreg::harness::{self, builtin_presets, emit_csv, emit_summary, write_csv, ExperimentConfig};
use batchreg::properties;

#[derive(Parser)]
#[command(name = "batchreg", version, about = "Regularized planning experiments for tabular batch RL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config file (or a named preset) and write CSV.
    Run(RunArgs),
    /// Run a named preset, or list presets with --list.
    Preset {
        /// Preset name, e.g. cliff-random.
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the randomized equivalence checks.
    Check {
        #[arg(long, default_value_t = 2023)]
        seed: u64,
    },
    /// Inspect or export MDP spec files.
    Mdp {
        #[command(subcommand)]
        command: MdpCommand,
    },
}

#[derive(Subcommand)]
enum MdpCommand {
    /// Parse and validate an MDP spec file.
    Validate { path: PathBuf },
    /// Write a builtin environment as a spec file.
    Export {
        /// cliff-walk, two-goals or interconnected-grid.
        name: String,
        path: PathBuf,
        #[arg(long)]
        slip_prob: Option<f64>,
        #[arg(long)]
        reward_std: Option<f64>,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// CSV destination; stdout when neither this nor the config sets one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    workers: Option<usize>,
    /// Also write every generated dataset, one CSV row per step.
    #[arg(long)]
    dump_dataset: Option<PathBuf>,
    /// Do not print the summary table.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    match run_cli(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("batchreg: error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_cli(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Preset { name, list, run: mut args } => {
            if list {
                for (name, cfg) in builtin_presets() {
                    let mdp = match &cfg.mdp {
                        harness::MdpSource::Builtin(b) => b.name().to_string(),
                        harness::MdpSource::Path(p) => p.display().to_string(),
                    };
                    println!(
                        "{name:<18} {mdp:<20} n={:<3} l={:<3} p_optimal={}",
                        cfg.collection.n_trajectories, cfg.collection.trajectory_length, cfg.collection.p_optimal
                    );
                }
                return Ok(());
            }
            args.preset = name.or(args.preset);
            if args.preset.is_none() {
                bail!("preset name required (see `batchreg preset --list`)");
            }
            run(args)
        }
        Command::Check { seed } => check(seed),
        Command::Mdp { command } => mdp(command),
    }
}

fn load_config(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => ExperimentConfig::from_json_file(path)?,
        (None, Some(name)) => harness::preset(name).with_context(|| format!("unknown preset `{name}`"))?,
        (Some(_), Some(_)) => bail!("give either --config or --preset, not both"),
        (None, None) => bail!("one of --config or --preset is required"),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = args.replications {
        cfg.replications = n;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rows = harness::run_experiment(&cfg, workers)?;
    match &cfg.output {
        Some(path) => {
            emit_csv(&rows, path).with_context(|| format!("writing {}", path.display()))?;
            if !args.quiet {
                print!("{}", emit_summary(&rows));
            }
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    if let Some(path) = &args.dump_dataset {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        harness::dump_datasets(&cfg, io::BufWriter::new(file))?;
    }
    Ok(())
}

fn check(seed: u64) -> anyhow::Result<()> {
    let mut failed = 0;
    let mut stdout = io::stdout().lock();
    for report in properties::run_all(seed)? {
        writeln!(stdout, "{report}")?;
        if !report.ok() {
            failed += 1;
        }
    }
    if failed > 0 {
        bail!("{failed} check(s) failed");
    }
    Ok(())
}

fn mdp(command: MdpCommand) -> anyhow::Result<()> {
    match command {
        MdpCommand::Validate { path } => {
            let (name, mdp) = load_mdp_spec(&path)?;
            println!(
                "{}: `{name}` is valid ({} states, {} actions, gamma {}, absorbing {:?})",
                path.display(),
                mdp.n_states,
                mdp.n_actions,
                mdp.gamma,
                mdp.absorbing
            );
        }
        MdpCommand::Export {
            name,
            path,
            slip_prob,
            reward_std,
        } => {
            let builtin: Builtin = name.parse()?;
            let mut noise = GridNoiseConfig::default();
            if let Some(p) = slip_prob {
                noise.slip_prob = p;
            }
            if let Some(s) = reward_std {
                noise.reward_std = s;
            }
            save_mdp_spec(builtin.name(), &builtin.build(noise)?, &path)?;
        }
    }
    Ok(())
}
