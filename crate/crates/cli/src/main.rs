use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use triggered_hb::objectives::{Benchmark, DEFAULT_DATASET_SEED};
use triggered_hb::triggers::{Design, Hold, Mode};
use triggered_hb::verify::SuiteConfig;
use triggered_hb_cli::{
    cmd_gen_dataset, cmd_plotdata, cmd_run, cmd_verify, exit_status, parse_name, Algorithm, ExperimentConfig, Overrides,
    VerifyOptions,
};

#[derive(Parser)]
#[command(name = "thb", version, about = "Triggered heavy-ball experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run algorithms on a benchmark and write traces and summaries.
    Run(RunArgs),
    /// Write a seeded logistic-regression dataset as JSON.
    GenDataset {
        #[arg(long, default_value_t = DEFAULT_DATASET_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant checks and print a pass/fail table.
    Verify(VerifyArgs),
    /// Convert run CSVs into one long-format CSV for plotting.
    Plotdata {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_name::<Benchmark>)]
    problem: Option<Benchmark>,
    /// Repeatable; replaces the configured runs.
    #[arg(long = "algo", value_parser = parse_name::<Algorithm>)]
    algorithms: Vec<Algorithm>,
    #[arg(long, value_parser = parse_name::<Design>)]
    trigger: Option<Design>,
    #[arg(long, value_parser = parse_name::<Mode>)]
    mode: Option<Mode>,
    #[arg(long, value_parser = parse_name::<Hold>)]
    hold: Option<Hold>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seed of the generated logistic dataset.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot_data: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Defaults to every benchmark.
    #[arg(long = "problem", value_parser = parse_name::<Benchmark>)]
    problems: Vec<Benchmark>,
    #[arg(long, default_value_t = DEFAULT_DATASET_SEED)]
    dataset_seed: u64,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Hand the checks `factor * mu` instead of the true modulus.
    #[arg(long, value_name = "FACTOR")]
    corrupt_mu: Option<f64>,
    /// Seed of the random test states.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip sampled states this close to the optimum.
    #[arg(long)]
    exclusion_radius: Option<f64>,
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run(args) => {
            let mut config = match &args.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            config.apply(&Overrides {
                problem: args.problem,
                algorithms: args.algorithms,
                trigger: args.trigger,
                mode: args.mode,
                hold: args.hold,
                a: args.a,
                epsilon: args.eps,
                max_iters: args.max_iters,
                seed: args.seed,
                out: args.out,
                plot_data: args.plot_data,
            });
            let reports = cmd_run(&config)?;
            for r in reports {
                let s = &r.summary;
                println!(
                    "{:<14} iterations {:>8}  converged {:<5}  t_K {:>12.6e}  min step {:>12}",
                    r.label,
                    s.iterations,
                    s.converged,
                    s.t_final,
                    s.min_delta.map_or_else(|| "-".to_string(), |d| format!("{d:.6e}"))
                );
            }
            println!("output in {}", config.out.display());
        }
        Command::GenDataset { seed, out } => {
            cmd_gen_dataset(seed, &out)?;
            println!("{}", out.display());
        }
        Command::Verify(args) => {
            let mut suite = SuiteConfig::default();
            if let Some(seed) = args.seed {
                suite.seed = seed;
            }
            if let Some(r) = args.exclusion_radius {
                suite.exclusion_radius = r;
            }
            let options = VerifyOptions {
                problems: if args.problems.is_empty() {
                    Benchmark::ALL.to_vec()
                } else {
                    args.problems
                },
                dataset_seed: args.dataset_seed,
                dataset: args.dataset,
                corrupt_mu: args.corrupt_mu,
                suite,
            };
            cmd_verify(&options, std::io::stdout().lock())?;
            println!("all checks passed");
        }
        Command::Plotdata { inputs, out } => {
            let rows = cmd_plotdata(&inputs, out.as_deref())?;
            log::info!("{rows} rows from {} series", inputs.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
