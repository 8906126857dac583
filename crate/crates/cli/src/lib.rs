//! Command-line front end: argument parsing, subcommands, run manifests
//! and replay.
//!
//! Every artifact embeds a [`RunManifest`]. `tsr replay <artifact>` checks
//! the recorded input digests, runs the same subcommand again and demands a
//! byte-identical result.
//!
//! Seeds: each component draws from `derive_seed(--seed, label)` with the
//! labels `css10-public`, `lr-game` (only when the game config has no
//! `seed`), `benchmark` and `sparsify`.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command, GlobalArgs, OutputFormat};
pub use error::CliError;
pub use manifest::RunManifest;

use manifest::{sha256_hex, Body, Inputs};

pub const TOOL: &str = "tsr";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Outcome of one invocation, as a process would report it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn params_of(command: &Command) -> serde_json::Value {
    let v = match command {
        Command::Security(a) => serde_json::to_value(a),
        Command::Table(a) => serde_json::to_value(a),
        Command::Keystream(a) => serde_json::to_value(a),
        Command::LrGame(a) => serde_json::to_value(a),
        Command::Simulate(a) => serde_json::to_value(a),
        Command::Replay(a) => serde_json::to_value(a),
    };
    v.expect("arguments serialize")
}

fn command_from(subcommand: &str, params: serde_json::Value) -> Result<Command, CliError> {
    let bad = |e: serde_json::Error| CliError::Parse {
        path: "manifest".into(),
        message: format!("{subcommand} parameters: {e}"),
    };
    Ok(match subcommand {
        "security" => Command::Security(serde_json::from_value(params).map_err(bad)?),
        "table" => Command::Table(serde_json::from_value(params).map_err(bad)?),
        "keystream" => Command::Keystream(serde_json::from_value(params).map_err(bad)?),
        "lr-game" => Command::LrGame(serde_json::from_value(params).map_err(bad)?),
        "simulate" => Command::Simulate(serde_json::from_value(params).map_err(bad)?),
        other => {
            return Err(CliError::Parse {
                path: "manifest".into(),
                message: format!("cannot replay subcommand `{other}`"),
            })
        }
    })
}

/// Run one experiment subcommand and return its artifact, manifest
/// included.
fn produce(command: &Command, seed: u64, format: Option<OutputFormat>) -> Result<String, CliError> {
    let sweep = matches!(command, Command::Simulate(a) if a.sweep);
    let format = format.unwrap_or_else(|| commands::default_format(command.name(), sweep));
    let mut inputs = Inputs::default();
    let body: Body = match command {
        Command::Security(a) => commands::security(a, format, &mut inputs)?,
        Command::Table(a) => commands::table(a, format)?,
        Command::Keystream(a) => commands::keystream(a, format, seed, &mut inputs)?,
        Command::LrGame(a) => commands::lr_game(a, format, seed, &mut inputs)?,
        Command::Simulate(a) => commands::simulate(a, format, seed, &mut inputs)?,
        Command::Replay(_) => unreachable!("handled by run"),
    };
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        subcommand: command.name().into(),
        params: params_of(command),
        seed,
        format,
        inputs: inputs.digests,
    };
    Ok(manifest.wrap(body))
}

fn replay(path: &std::path::Path) -> Result<String, CliError> {
    let shown = path.display().to_string();
    let artifact =
        std::fs::read_to_string(path).map_err(|e| CliError::Io { path: shown.clone(), message: e.to_string() })?;
    let manifest = RunManifest::extract(&artifact).ok_or_else(|| CliError::NoManifest(shown.clone()))?;
    if manifest.tool != TOOL {
        return Err(CliError::NoManifest(format!("{shown} (written by `{}`)", manifest.tool)));
    }
    if manifest.version != VERSION {
        log::warn!("{shown} was written by version {}, this is {VERSION}", manifest.version);
    }
    for (input, expected) in &manifest.inputs {
        let bytes = std::fs::read(input).map_err(|e| CliError::Io { path: input.clone(), message: e.to_string() })?;
        let actual = sha256_hex(&bytes);
        if &actual != expected {
            return Err(CliError::InputChanged { path: input.clone(), expected: expected.clone(), actual });
        }
    }
    let command = command_from(&manifest.subcommand, manifest.params.clone())?;
    let rerun = produce(&command, manifest.seed, Some(manifest.format))?;
    if rerun != artifact {
        return Err(CliError::ReplayMismatch(shown));
    }
    Ok(format!("replay ok: {shown} reproduced byte-for-byte ({} bytes)\n", artifact.len()))
}

/// Run a parsed command line and return what it would print.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    log::info!("{} with seed {}", cli.command.name(), cli.global.seed);
    match &cli.command {
        Command::Replay(a) => replay(&a.artifact),
        command => produce(command, cli.global.seed, cli.global.format),
    }
}

/// Run and either return the artifact as stdout or write it to `--output`.
pub fn execute_cli(cli: &Cli) -> Execution {
    let outcome = run(cli).and_then(|text| match &cli.global.output {
        Some(path) => std::fs::write(path, &text)
            .map(|()| String::new())
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() }),
        None => Ok(text),
    });
    match outcome {
        Ok(stdout) => Execution { code: 0, stdout, stderr: String::new() },
        Err(e) => Execution { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

/// Parse `args` (program name first) and run.
pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute_cli(&cli),
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                Execution { code, stdout: text, stderr: String::new() }
            } else {
                Execution { code, stdout: String::new(), stderr: text }
            }
        }
    }
}
