use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use prox_langevin::harness::verify::{self, Mutation, Suite, VerifyOptions, DEFAULT_VERIFY_SEED};
use prox_langevin::harness::{
    cmd_experiment, cmd_sample, load_config, resolve_output_dir, HarnessError, HarnessResult, OUTPUT_ENV,
};

#[derive(Debug, Parser)]
#[command(name = "prox-langevin", version, about = "Proximal Langevin samplers and their diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one chain and write trace.csv and manifest.json.
    Sample(RunArgs),
    /// Run an experiment and write report.json, histogram/convergence CSVs and manifest.json.
    Experiment(RunArgs),
    /// Run the randomized property suites and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the environment and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides num_chains.
    #[arg(long)]
    chains: Option<usize>,
    /// Overrides seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite to run, or "all".
    #[arg(long, default_value = "all")]
    suite: String,
    /// Trials per suite instead of the default.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_VERIFY_SEED)]
    seed: u64,
    /// Inject a known defect; the run is expected to fail.
    #[arg(long, hide = true)]
    mutate: Option<String>,
}

fn run(args: RunArgs, experiment: bool) -> HarnessResult<()> {
    let mut cfg = load_config(&args.config)?;
    if let Some(c) = args.chains {
        cfg.num_chains = c;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let env = std::env::var(OUTPUT_ENV).ok();
    let out = resolve_output_dir(args.out.as_deref(), env.as_deref(), &cfg);
    let summary = if experiment {
        cmd_experiment(&cfg, &out)?
    } else {
        cmd_sample(&cfg, &out)?
    };
    for f in &summary.manifest.files {
        println!("{}  {}", f.sha256, summary.out_dir.join(&f.name).display());
    }
    Ok(())
}

fn run_verify(args: VerifyArgs) -> HarnessResult<()> {
    let suites = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse().map_err(HarnessError::Config)?]
    };
    let mutation = args
        .mutate
        .as_deref()
        .map(str::parse::<Mutation>)
        .transpose()
        .map_err(HarnessError::Config)?;
    if args.trials == Some(0) {
        return Err(HarnessError::Config("--trials must be at least 1".into()));
    }
    let outcomes = verify::cmd_verify(&VerifyOptions {
        suites,
        trials: args.trials,
        seed: args.seed,
        mutation,
    });
    print!("{}", verify::render_table(&outcomes));
    verify::check_outcomes(&outcomes)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => run(a, false),
        Command::Experiment(a) => run(a, true),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
