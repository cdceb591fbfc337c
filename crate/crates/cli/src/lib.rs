//! Command-line front-end: subcommands, configuration hashing and reports.

pub mod args;
mod commands;
pub mod report;

use std::path::Path;

use anyhow::Result;
use hypermet::{TAU_ABS, TAU_REL};

pub use args::{Cli, Command};
pub use commands::read_pairs;
pub use report::{export_scatter, import_scatter, Report, Scatter};

use commands::{Inputs, Outcome};
use report::{ExperimentConfig, Tolerances};

/// Runs one command and writes its report. Returns the report, or `None`
/// for `export`.
pub fn run(cli: &Cli) -> Result<Option<Report>> {
    let mut inputs = Inputs::default();
    let (outcome, out_path): (Outcome, Option<&Path>) = match &cli.command {
        Command::Sphericalize(a) => (commands::sphericalize_cmd(a, &mut inputs)?, a.output.as_deref()),
        Command::Delta(a) => (commands::delta_cmd(a, &mut inputs)?, a.report.as_deref()),
        Command::Boundary(a) => (commands::boundary_cmd(a, &mut inputs, cli.seed)?, a.report.as_deref()),
        Command::Domain(a) => (
            commands::domain_cmd(a, &mut inputs, cli.seed, cli.tolerance)?,
            a.report.as_deref(),
        ),
        Command::Regularity(a) => (commands::regularity_cmd(a, &mut inputs, cli.seed)?, a.report.as_deref()),
        Command::Export(a) => {
            let report = Report::from_path(&a.report)?;
            export_scatter(&report, commands::open_output(a.output.as_deref())?)?;
            return Ok(None);
        }
    };
    let config = ExperimentConfig {
        command: cli.command.name(),
        seed: cli.seed,
        tolerance: cli.tolerance,
        args: &cli.command,
        inputs: inputs.0,
    };
    let tolerances = Tolerances {
        relative: TAU_REL,
        absolute: TAU_ABS,
        grid: cli.tolerance,
    };
    let report = Report::new(&config, tolerances, outcome.passed, outcome.result, outcome.scatter)?;
    commands::write_output(out_path, &report.to_json()?)?;
    Ok(Some(report))
}

/// Exit status for a finished run: 0 on pass, 2 on a failed certificate.
pub fn exit_code(report: Option<&Report>) -> u8 {
    match report {
        Some(r) if !r.passed => 2,
        _ => 0,
    }
}

/// Exit status for an error: 2 when a guaranteed bound was violated, 1 for
/// everything else.
pub fn error_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<hypermet::Error>() {
        Some(hypermet::Error::BoundViolation(_)) => 2,
        _ => 1,
    }
}
