mod commands;
mod config;
mod fixtures;
mod inputs;
mod report;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use commands::{Ctx, Outcome};
use config::{load_config, Params, Runtime};
use limitop::{Error, Result};

/// Limit operators, lower norms and parametrices for band operators on
/// discrete metric spaces.
#[derive(Parser, Debug)]
#[command(name = "limitop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
    #[command(flatten)]
    runtime: Runtime,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Write a space file.
    SpaceGen,
    /// Write an operator file.
    OpGen,
    /// Split an operator into multipliers times partial translations.
    Decompose,
    /// Lower norm of the operator restricted to a column set.
    Nu,
    /// Localised lower norm against the full one.
    NuLocal,
    /// Metric sparsification of a measure.
    Sparsify,
    /// Partition of unity and its variation table.
    Partition,
    /// Distance between an operator and its partition average.
    Average,
    /// Limit operators by window matching.
    Limit,
    /// Limit operators by conjugating with translations.
    ShiftLimit,
    /// Sampled limit operators with their lower norms.
    Spectrum,
    /// Off-centre entry decay and vanishing of limit windows.
    Ghost,
    /// Build a parametrix from local inverses.
    Parametrix,
    /// Fredholm probe: limit lower norms, essential profile and parametrix.
    Probe,
    /// List bundled example configs, or write them into the `--out` directory.
    Examples,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SpaceGen => "space-gen",
            Command::OpGen => "op-gen",
            Command::Decompose => "decompose",
            Command::Nu => "nu",
            Command::NuLocal => "nu-local",
            Command::Sparsify => "sparsify",
            Command::Partition => "partition",
            Command::Average => "average",
            Command::Limit => "limit",
            Command::ShiftLimit => "shift-limit",
            Command::Spectrum => "spectrum",
            Command::Ghost => "ghost",
            Command::Parametrix => "parametrix",
            Command::Probe => "probe",
            Command::Examples => "examples",
        }
    }
}

fn examples(out: Option<&Path>) -> Result<Outcome> {
    let list: Vec<Value> = fixtures::list()
        .into_iter()
        .map(|(name, command, description)| json!({"name": name, "command": command, "description": description}))
        .collect();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        for (name, text) in fixtures::FIXTURES {
            std::fs::write(dir.join(format!("{name}.json")), text)?;
        }
    }
    Ok(Outcome { result: Some(json!({ "fixtures": list })), artifact: None, csv: None, negative: false, summary: None })
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.runtime.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
    }
    let command = cli.command;
    if command == Command::Examples {
        // With --out the fixtures go into that directory, so the listing
        // always goes to standard output.
        let outcome = examples(cli.runtime.out.as_deref())?;
        emit(&report::to_json(&json!({"command": "examples", "result": outcome.result})), None)?;
        return Ok(false);
    }
    let file = match &cli.runtime.config {
        Some(path) => load_config(path, command.name())?,
        None => Params::default(),
    };
    let mut ctx = Ctx { params: cli.params.over(&file) };
    let outcome = match command {
        Command::SpaceGen => commands::space_gen(&mut ctx),
        Command::OpGen => commands::op_gen(&mut ctx),
        Command::Decompose => commands::decompose_cmd(&mut ctx),
        Command::Nu => commands::nu_cmd(&mut ctx),
        Command::NuLocal => commands::nu_local(&mut ctx),
        Command::Sparsify => commands::sparsify_cmd(&mut ctx),
        Command::Partition => commands::partition_cmd(&mut ctx),
        Command::Average => commands::average_cmd(&mut ctx),
        Command::Limit => commands::limit_cmd(&mut ctx),
        Command::ShiftLimit => commands::shift_limit_cmd(&mut ctx),
        Command::Spectrum => commands::spectrum_cmd(&mut ctx),
        Command::Ghost => commands::ghost_cmd(&mut ctx),
        Command::Parametrix => commands::parametrix_cmd(&mut ctx),
        Command::Probe => commands::probe_cmd(&mut ctx),
        Command::Examples => unreachable!(),
    }?;
    let out = cli.runtime.out.as_deref();
    if let Some(artifact) = &outcome.artifact {
        emit(artifact, out)?;
    }
    if let Some(result) = outcome.result {
        let body = json!({
            "command": command.name(),
            "config": serde_json::to_value(&ctx.params)?,
            "result": result,
        });
        emit(&report::to_json(&body), out)?;
    }
    if let (Some(csv), Some(path)) = (&outcome.csv, &cli.runtime.csv) {
        std::fs::write(path, csv)?;
    }
    if let Some(line) = &outcome.summary {
        let mut line = line.clone();
        if let Some(p) = out {
            line += &format!("; report {}", p.display());
        }
        if let (Some(p), Some(_)) = (&cli.runtime.csv, &outcome.csv) {
            line += &format!("; series {}", p.display());
        }
        eprintln!("{line}");
    }
    Ok(outcome.negative)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
