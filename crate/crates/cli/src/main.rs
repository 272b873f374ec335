use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use kinfront_cli::commands::{Command, Plan};
use kinfront_cli::config::{ConfigError, FileConfig, GlobalArgs, Globals};
use kinfront_cli::output::{self, RunManifest};
use serde_json::json;

/// Hamiltonians, front speeds and positivity experiments for reactive
/// kinetic and telegraph models.
#[derive(Debug, Parser)]
#[command(name = "kinfront", version)]
struct Cli {
    /// TOML file with one key per flag; flags on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    globals: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

const EXIT_CONFIG: u8 = 2;

fn resolve(cli: &Cli) -> Result<(Globals, Box<dyn Plan>), ConfigError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    file.check_sections(&Command::NAMES)?;
    let globals = file.resolve_globals(&cli.globals)?;
    let name = cli.command.name();
    let plan = match &cli.command {
        Command::Integrals(a) => file.resolve(name, a)?.validate()?,
        Command::Hamiltonian(a) => file.resolve(name, a)?.validate()?,
        Command::Speed(a) => file.resolve(name, a)?.validate()?,
        Command::Simulate1d(a) => file.resolve(name, a)?.validate()?,
        Command::Simulate2dDiscrete(a) => file.resolve(name, a)?.validate()?,
        Command::SimulateTelegraph(a) => file.resolve(name, a)?.validate()?,
        Command::HydroLimit(a) => file.resolve(name, a)?.validate()?,
        Command::ReproduceAll(a) => file.resolve(name, a)?.validate()?,
    };
    Ok((globals, plan))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let (globals, plan) = match resolve(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("kinfront: configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let start = Instant::now();
    let name = cli.command.name();
    let config = json!({ "subcommand": name, "globals": globals, "parameters": plan.echo() });
    let mut manifest = RunManifest::new(name, config);

    if let Err(e) = std::fs::create_dir_all(&globals.out) {
        eprintln!("kinfront: cannot create {}: {e}", globals.out.display());
        return ExitCode::from(1);
    }
    let mut progress = |line: &str| eprintln!("{line}");
    let error = match plan.run(&globals, &mut progress) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("kinfront: warning: {w}");
            }
            manifest.checks = outcome.checks;
            manifest.warnings = outcome.warnings;
            manifest.results = outcome.results;
            let mut failed = None;
            for t in &outcome.tables {
                match output::write_table(&globals.out, t, globals.format) {
                    Ok(f) => manifest.outputs.push(f),
                    Err(e) => {
                        failed = Some(format!("writing {}: {e}", t.name));
                        break;
                    }
                }
            }
            failed
        }
        Err(e) => Some(e),
    };
    manifest.finish(start.elapsed(), error);
    if let Some(e) = &manifest.error {
        eprintln!("kinfront: {name} failed: {e}");
    }
    for c in manifest.checks.iter().filter(|c| !c.passed) {
        eprintln!("kinfront: check failed: {}: {}", c.name, c.detail);
    }
    match manifest.write(&globals.out) {
        Ok(p) => println!("{}", p.display()),
        Err(e) => {
            eprintln!("kinfront: cannot write manifest: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(manifest.exit_code as u8)
}
