use std::path::PathBuf;
use std::process::ExitCode;

use choicefit::config::RunConfig;
use choicefit::error::Result;
use choicefit::runner::{self, CommandOutput};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "choicefit",
    version,
    about = "Discrete-choice modeling: logit fits, AIC stepwise selection, \
             structural likelihood-ratio tests and elasticities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Percentage distributions of categorical variables, overall and per bin
    Describe(CommonArgs),
    /// Fit one configured model by maximum likelihood
    Fit(CommonArgs),
    /// Stepwise AIC selection (procedures A/B) with an auditable trace
    Select(CommonArgs),
    /// Test-add focal variables into the AIC-optimal model
    Probe(CommonArgs),
    /// Averaged direct/cross elasticities of focal variables
    Elasticity(CommonArgs),
    /// Likelihood-ratio test from log-likelihood inputs or a fixtures file
    Lrtest(LrtestArgs),
    /// Run selection, probes and elasticities over every partition
    Grid(CommonArgs),
    /// Pooling and bin-structure tests (or fixtures replay)
    Tests(CommonArgs),
    /// Generate a dataset from a known model (CSV + schema + metadata)
    Simulate(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON run configuration; flags below override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV
    #[arg(long)]
    data: Option<PathBuf>,
    /// Schema JSON (defaults to the embedded crash-record schema)
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Directory for JSON/trace outputs
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stepwise procedure: A, B or auto (A falling back to B)
    #[arg(long)]
    procedure: Option<String>,
    /// Two-tailed significance level (default 0.05)
    #[arg(long)]
    level: Option<f64>,
    /// Generator seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for grid runs (default: available parallelism)
    #[arg(long)]
    jobs: Option<usize>,
    /// Log-likelihood fixtures file for replay mode
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

#[derive(Args)]
struct LrtestArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    ll_pooled: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ll_bins_sum: Option<f64>,
    /// Number of subsets M
    #[arg(long)]
    m: Option<usize>,
    /// Coefficients per model K
    #[arg(long)]
    k: Option<usize>,
    /// Conclusion vocabulary: pooling (together/separately) or bins
    #[arg(long, default_value = "pooling")]
    kind: String,
}

impl CommonArgs {
    /// File config overlaid with command-line flags (flags win).
    fn merged(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.data.is_some() {
            cfg.data = self.data.clone();
        }
        if self.schema.is_some() {
            cfg.schema = self.schema.clone();
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.procedure.is_some() {
            cfg.procedure = self.procedure.clone();
        }
        if self.level.is_some() {
            cfg.level = self.level;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
        if self.fixtures.is_some() {
            cfg.fixtures = self.fixtures.clone();
        }
        Ok(cfg)
    }
}

fn run(command: &Command) -> Result<(RunConfig, CommandOutput)> {
    let (args, handler): (&CommonArgs, fn(&RunConfig) -> Result<CommandOutput>) = match command {
        Command::Describe(args) => (args, runner::cmd_describe),
        Command::Fit(args) => (args, runner::cmd_fit),
        Command::Select(args) => (args, runner::cmd_select),
        Command::Probe(args) => (args, runner::cmd_probe),
        Command::Elasticity(args) => (args, runner::cmd_elasticity),
        Command::Grid(args) => (args, runner::cmd_grid),
        Command::Tests(args) => (args, runner::cmd_tests),
        Command::Simulate(args) => (args, runner::cmd_simulate),
        Command::Lrtest(args) => {
            let cfg = args.common.merged()?;
            let out = runner::cmd_lrtest(
                &cfg,
                args.ll_pooled,
                args.ll_bins_sum,
                args.m,
                args.k,
                &args.kind,
            )?;
            return Ok((cfg, out));
        }
    };
    let cfg = args.merged()?;
    let out = handler(&cfg)?;
    Ok((cfg, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((cfg, output)) => {
            print!("{}", output.text);
            if let Some(dir) = &cfg.out {
                if let Err(e) = output.write_files(dir) {
                    eprintln!("choicefit: error: {e}");
                    return ExitCode::from(e.exit_code());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("choicefit: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
