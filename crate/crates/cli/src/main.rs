//! `boolflow`: analyze Boolean networks, convert them to ODE flows, simulate
//! and check the resulting traces.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boolflow::formula::NetworkError;
use boolflow::{BooleanError, ConsistencyLevel, ConversionError, FlowError, FlowKind, HarnessError, IntegrationError, Scheme};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use commands::{LyapunovArgs, Outcome, SimulateArgs};
use config::{parse_gamma, parse_list, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse `{0}` as a list of numbers")]
    BadList(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Boolean(#[from] BooleanError),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

#[derive(Debug, Parser)]
#[command(name = "boolflow", version, about = "Boolean networks as Lipschitz ODE flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Network file (`n=<dim>`, `f<i> = <formula>` or `f<i> = table:<bits>`).
    #[arg(long)]
    network: PathBuf,
    /// Directory for the JSON report and CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FlowArgs {
    #[arg(long, default_value = "W", value_parser = parse_scheme)]
    scheme: Scheme,
    #[arg(long, default_value = "D1", value_parser = parse_kind)]
    kind: FlowKind,
    /// Rates as a list (`1,1.5`) or a file holding one.
    #[arg(long)]
    gamma: Option<String>,
    /// Initial state as a list.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Require {
    Strong,
    Consistent,
    None,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fixed points, orbits, stepping classification and Derrida slope.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Continuous conversion of every coordinate plus a corner check.
    Convert {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "W", value_parser = parse_scheme)]
        scheme: Scheme,
    },
    /// Integrate one trajectory and judge its Boolean trace.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flow: FlowArgs,
        /// Draw the start from the region U^s of this Boolean state (D2 only).
        #[arg(long)]
        sample_us: Option<String>,
        #[arg(long, default_value_t = 50.0)]
        t_end: f64,
        /// Verdict needed for a zero exit code.
        #[arg(long, value_enum, default_value = "consistent")]
        require: Require,
    },
    /// Time-scale separation sweep over sampled starts of every U^s.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "W", value_parser = parse_scheme)]
        scheme: Scheme,
        /// Signature rates gamma^- (defaults to all ones).
        #[arg(long)]
        gamma: Option<String>,
        /// Signaling rates to try; defaults to a tenth of the bound.
        #[arg(long)]
        mu_grid: Option<String>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Largest Lyapunov exponent by twin-trajectory renormalization.
    Lyapunov {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flow: FlowArgs,
        /// Averaging horizon; a tenth of it is discarded first as transient.
        #[arg(long, default_value_t = 2000.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1.0)]
        renorm: f64,
    },
    /// Run the worked examples and compare with the known results.
    Examples {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: ConversionError| e.to_string())
}

fn parse_kind(s: &str) -> Result<FlowKind, String> {
    s.parse().map_err(|e: FlowError| e.to_string())
}

fn optional_list(arg: &Option<String>, gamma: bool) -> Result<Option<Vec<f64>>, CliError> {
    arg.as_deref().map(|a| if gamma { parse_gamma(a) } else { parse_list(a) }).transpose()
}

fn with_network(cfg: &mut RunConfig, common: &Common) -> Result<boolflow::NetworkSpec, CliError> {
    cfg.network = Some(common.network.clone());
    commands::load_network(&common.network)
}

fn run(command: Command, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Analyze { common } => commands::analyze(&with_network(cfg, &common)?),
        Command::Convert { common, scheme } => {
            cfg.scheme = Some(scheme);
            commands::convert(&with_network(cfg, &common)?, scheme)
        }
        Command::Simulate { common, flow, sample_us, t_end, require } => {
            let spec = with_network(cfg, &common)?;
            cfg.require = Some(format!("{require:?}").to_lowercase());
            let require = match require {
                Require::Strong => Some(ConsistencyLevel::StronglyConsistent),
                Require::Consistent => Some(ConsistencyLevel::Consistent),
                Require::None => None,
            };
            cfg.scheme = Some(flow.scheme);
            cfg.kind = Some(flow.kind);
            cfg.sample_us = sample_us.clone();
            cfg.t_end = Some(t_end);
            let args = SimulateArgs {
                scheme: flow.scheme,
                kind: flow.kind,
                gamma: optional_list(&flow.gamma, true)?,
                x0: optional_list(&flow.x0, false)?,
                sample_us,
                t_end,
                require,
                seed: common.seed,
            };
            commands::simulate(&spec, &args, cfg)
        }
        Command::Sweep { common, scheme, gamma, mu_grid, samples } => {
            let spec = with_network(cfg, &common)?;
            let mus = optional_list(&mu_grid, false)?.unwrap_or_default();
            cfg.scheme = Some(scheme);
            cfg.kind = Some(FlowKind::D2);
            cfg.mu_grid = Some(mus.clone());
            cfg.samples = Some(samples);
            commands::sweep(&spec, scheme, optional_list(&gamma, true)?, &mus, samples, common.seed, cfg)
        }
        Command::Lyapunov { common, flow, t_end, renorm } => {
            let spec = with_network(cfg, &common)?;
            cfg.scheme = Some(flow.scheme);
            cfg.kind = Some(flow.kind);
            cfg.t_end = Some(t_end);
            cfg.renorm = Some(renorm);
            let args = LyapunovArgs {
                scheme: flow.scheme,
                kind: flow.kind,
                gamma: optional_list(&flow.gamma, true)?,
                x0: optional_list(&flow.x0, false)?,
                horizon: t_end,
                renorm,
                seed: common.seed,
            };
            commands::lyapunov(&spec, &args, cfg)
        }
        Command::Examples { seed, .. } => commands::examples(seed),
    }
}

fn write_artifacts(dir: &Path, name: &str, document: &serde_json::Value, csv: &[(&str, String)]) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let json_path = dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(document).expect("plain data") + "\n";
    std::fs::write(&json_path, text).map_err(io(&json_path))?;
    for (file, body) in csv {
        let path = dir.join(file);
        std::fs::write(&path, body).map_err(io(&path))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, seed, out) = match &cli.command {
        Command::Analyze { common } => ("analyze", common.seed, common.out.clone()),
        Command::Convert { common, .. } => ("convert", common.seed, common.out.clone()),
        Command::Simulate { common, .. } => ("simulate", common.seed, common.out.clone()),
        Command::Sweep { common, .. } => ("sweep", common.seed, common.out.clone()),
        Command::Lyapunov { common, .. } => ("lyapunov", common.seed, common.out.clone()),
        Command::Examples { seed, out } => ("examples", *seed, out.clone()),
    };
    let mut cfg = RunConfig::new(name, seed, out.clone());
    let result = run(cli.command, &mut cfg);
    let (document, code) = match result {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            let status = if outcome.passed { "pass" } else { "fail" };
            let doc = json!({
                "status": status,
                "reason": outcome.reason,
                "run_config": cfg.to_json(),
                "result": outcome.report,
            });
            if let Some(dir) = &out {
                if let Err(e) = write_artifacts(dir, name, &doc, &outcome.csv) {
                    let failure = json!({ "status": "error", "error": e.to_string(), "run_config": cfg.to_json() });
                    let _ = writeln!(std::io::stdout().lock(), "{failure}");
                    return ExitCode::from(2);
                }
            }
            (doc, if outcome.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Err(e) => {
            eprintln!("error: {e}");
            (json!({ "status": "error", "error": e.to_string(), "run_config": cfg.to_json() }), ExitCode::from(2))
        }
    };
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&document).expect("plain data"));
    code
}
