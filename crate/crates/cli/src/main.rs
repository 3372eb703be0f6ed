use std::path::PathBuf;
use std::process::ExitCode;

use bienergy_cli::{execute, parse_point, render, Command, Format, RunConfig, Suite};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bienergy", version, about = "Finsler-to-Riemann tension, bienergy and their checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Evaluation point `x1,..,xn,y1,..,yn`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    point: Option<String>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sample evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Metric, connection and curvature data at a point.
    Geom,
    /// Tension field over the sample points.
    Tension,
    /// Tension and bitension over the sample points.
    Bitension,
    /// Energy integral over the ball bundle.
    Energy,
    /// Bienergy integral over the ball bundle.
    Bienergy,
    /// Run a verification suite.
    Check {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Small-perturbation scaling of the identity map.
    IdentityAnalysis,
}

fn run(cli: Cli) -> Result<bool, bienergy_cli::CliError> {
    let path = cli
        .config
        .ok_or_else(|| bienergy_cli::CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(s) = cli.seed {
        cfg = cfg.with_seed(s);
    }
    let point = cli.point.as_deref().map(|p| parse_point(p, cfg.dimension)).transpose()?;
    let cmd = match cli.command {
        Cmd::Geom => Command::Geom,
        Cmd::Tension => Command::Tension,
        Cmd::Bitension => Command::Bitension,
        Cmd::Energy => Command::Energy,
        Cmd::Bienergy => Command::Bienergy,
        Cmd::Check { suite } => Command::Check(suite),
        Cmd::IdentityAnalysis => Command::IdentityAnalysis,
    };
    let report = match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| bienergy_cli::CliError::Config(e.to_string()))?
            .install(|| execute(cmd, &cfg, point.as_ref()))?,
        None => execute(cmd, &cfg, point.as_ref())?,
    };
    let format = cli.format.unwrap_or(cfg.output.format);
    let text = render(&report, format)?;
    match cli.out.or_else(|| cfg.output.path.as_ref().map(PathBuf::from)) {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
