//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration or data error,
//! 3 audit mismatch.

use std::ffi::OsString;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::harness::{
    aggregate, create, execute, read_runs_csv, Bootstrap, ConfigError, EnvConfig, EnvKind,
    ExperimentConfig, HarnessError, SWEEP_KEYS,
};

#[derive(Debug, Parser)]
#[command(
    name = "smm",
    version,
    about = "Self-managed memory agents: experiments, sweeps and audits"
)]
pub struct Cli {
    /// Base seed; run i uses seed + i.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    #[arg(long, global = true)]
    pub episodes: Option<usize>,
    /// Output path prefix (or output file for `aggregate`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write per-episode and aggregate CSVs.
    Run { config: PathBuf },
    /// Run one experiment per value of a parameter.
    Sweep {
        config: PathBuf,
        #[arg(long, value_parser = SWEEP_KEYS)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Count reachable states and observations of an environment.
    Audit { env: String },
    /// Recompute the aggregate CSV from a per-episode CSV.
    Aggregate { csv: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(HarnessError),
    Audit(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(HarnessError::Config(ConfigError::AuditMismatch { .. }))
            | CliError::Audit(_) => 3,
            CliError::Data(_) => 2,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Data(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Data(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Audit(m) => f.write_str(m),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(runs) = cli.runs {
        cfg.n_runs = runs;
    }
    if let Some(episodes) = cli.episodes {
        cfg.n_episodes = episodes;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn cmd_run(cli: &Cli, config: &Path) -> Result<(), CliError> {
    let cfg = load(cli, config)?;
    let out = execute(&cfg, cli.jobs)?;
    println!("{}", out.runs.display());
    println!("{}", out.aggregate.display());
    Ok(())
}

fn cmd_sweep(cli: &Cli, config: &Path, param: &str, values: &str) -> Result<(), CliError> {
    let values: Vec<&str> = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(CliError::Usage("--values needs at least one value".into()));
    }
    let base = load(cli, config)?;
    let mut configs = Vec::with_capacity(values.len());
    for value in &values {
        let mut cfg = base.clone();
        cfg.set(param, value)?;
        let mut prefix = base.output.clone().into_os_string();
        prefix.push(format!("_{param}_{value}"));
        cfg.output = prefix.into();
        cfg.validate()?;
        configs.push(cfg);
    }
    for cfg in &configs {
        let out = execute(cfg, cli.jobs)?;
        println!("{}", out.runs.display());
        println!("{}", out.aggregate.display());
    }
    Ok(())
}

fn cmd_audit(env: &str) -> Result<(), CliError> {
    let kind: EnvKind = env.parse().map_err(CliError::Usage)?;
    let built = EnvConfig::new(kind).build()?;
    let (audit, spec) = (built.audit(), built.spec());
    println!(
        "{kind}: states={} observations={} actions={} (declared states={} observations={})",
        audit.states, audit.observations, spec.n_actions, spec.n_states, spec.n_observations
    );
    if audit.matches(&spec) {
        Ok(())
    } else {
        Err(CliError::Audit(format!(
            "{kind}: audit does not match the declared spec"
        )))
    }
}

fn cmd_aggregate(cli: &Cli, csv: &Path) -> Result<(), CliError> {
    let file = File::open(csv).map_err(|source| HarnessError::Io {
        path: csv.to_path_buf(),
        source,
    })?;
    let records = read_runs_csv(file)?;
    let out = cli.out.clone().unwrap_or_else(|| {
        let name = csv
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let stem = name
            .strip_suffix(".runs.csv")
            .or_else(|| name.strip_suffix(".csv"))
            .unwrap_or(&name);
        csv.with_file_name(format!("{stem}.aggregate.csv"))
    });
    let opts = Bootstrap {
        seed: cli.seed.unwrap_or(0),
        ..Bootstrap::default()
    };
    aggregate(&records, &opts)?.write_csv(create(&out)?)?;
    println!("{}", out.display());
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if cli.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    match &cli.command {
        Command::Run { config } => cmd_run(cli, config),
        Command::Sweep {
            config,
            param,
            values,
        } => cmd_sweep(cli, config, param, values),
        Command::Audit { env } => cmd_audit(env),
        Command::Aggregate { csv } => cmd_aggregate(cli, csv),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
