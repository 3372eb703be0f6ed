//! Configuration-driven front end of the bienergy engine.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod suites;

use std::time::Instant;

use bienergy_core::PointState;

pub use config::{Format, RunConfig};
pub use error::CliError;
pub use report::{Bound, CheckRecord, Report, Status};
pub use suites::Suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Geom,
    Tension,
    Bitension,
    Energy,
    Bienergy,
    Check(Suite),
    IdentityAnalysis,
}

impl Command {
    pub fn echo(self) -> String {
        match self {
            Command::Geom => "geom".into(),
            Command::Tension => "tension".into(),
            Command::Bitension => "bitension".into(),
            Command::Energy => "energy".into(),
            Command::Bienergy => "bienergy".into(),
            Command::Check(s) => format!("check {}", s.name()),
            Command::IdentityAnalysis => "identity-analysis".into(),
        }
    }
}

/// Run one command. The report's `wall_time_s` is the only field that
/// depends on anything but the configuration and point.
pub fn execute(cmd: Command, cfg: &RunConfig, point: Option<&PointState>) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut report = Report::new(cmd.echo(), cfg.hash());
    match cmd {
        Command::Geom => commands::geom(cfg, point, &mut report)?,
        Command::Tension => commands::tension(cfg, point, false, &mut report)?,
        Command::Bitension => commands::tension(cfg, point, true, &mut report)?,
        Command::Energy => commands::integral(cfg, false, &mut report)?,
        Command::Bienergy => commands::integral(cfg, true, &mut report)?,
        Command::Check(s) => suites::run(s, cfg, point, &mut report)?,
        Command::IdentityAnalysis => suites::identity_analysis(cfg, point, &mut report)?,
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Parse `x1,..,xn,y1,..,yn`.
pub fn parse_point(text: &str, n: usize) -> Result<PointState, CliError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad --point `{text}`: {e}")))?;
    if v.len() != 2 * n {
        return Err(CliError::Config(format!(
            "--point needs {} numbers (x then y), got {}",
            2 * n,
            v.len()
        )));
    }
    Ok(PointState::new(v[..n].to_vec(), v[n..].to_vec()))
}

pub fn render(report: &Report, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
        Format::Csv => report.to_csv()?,
    })
}
