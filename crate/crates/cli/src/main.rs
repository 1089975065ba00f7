use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};
use photon_collapse_cli::config::{parse_config, ConfigErrors, ExperimentConfig, ExperimentKind};
use photon_collapse_cli::runner::{run, RunOptions, Source};
use photon_collapse_cli::{exit, presets};

#[derive(Debug, Parser)]
#[command(name = "photon-collapse", version, about = "Collapse models acting on photon fields")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration name (see `presets`).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Master seed, 0 to 2^63 - 1 (TOML integers are signed 64-bit).
    #[arg(long, global = true, env = "PHOTON_COLLAPSE_SEED",
          value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "PHOTON_COLLAPSE_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "PHOTON_COLLAPSE_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment named in the configuration.
    Run,
    /// Unravelled stochastic trajectories.
    Trajectory,
    /// Averaged master-equation evolution.
    Master,
    /// Trajectory ensemble against the master equation.
    CrossValidate,
    /// Grain superposition and photon shadow collapse time.
    Shadow,
    /// Order-of-magnitude estimates.
    Estimate,
    /// List built-in presets.
    Presets,
    /// Print a preset's TOML.
    ShowPreset { name: String },
    /// Parse and validate a configuration without running it.
    Validate,
}

impl Command {
    fn kind(&self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Trajectory => ExperimentKind::Trajectory,
            Command::Master => ExperimentKind::Master,
            Command::CrossValidate => ExperimentKind::CrossValidate,
            Command::Shadow => ExperimentKind::Shadow,
            Command::Estimate => ExperimentKind::Estimate,
            _ => return None,
        })
    }
}

fn source_of(matches: &ArgMatches, id: &str) -> Source {
    let sub = matches.subcommand().map(|(_, m)| m);
    let src = sub
        .and_then(|m| m.value_source(id).filter(|s| *s != ValueSource::DefaultValue))
        .or_else(|| matches.value_source(id));
    match src {
        Some(ValueSource::EnvVariable) => Source::Env,
        Some(ValueSource::CommandLine) => Source::Flag,
        _ => Source::Default,
    }
}

fn report_config_errors(origin: &str, errors: &ConfigErrors) -> ExitCode {
    eprintln!("error: invalid configuration in {origin}");
    for issue in &errors.0 {
        eprintln!("  {issue}");
    }
    ExitCode::from(exit::CONFIG_ERROR as u8)
}

struct Loaded {
    config: ExperimentConfig,
    text: Option<String>,
    origin: String,
    base_dir: PathBuf,
}

fn load(cli: &Cli, kind: Option<ExperimentKind>) -> Result<Loaded, ExitCode> {
    let (text, origin, base_dir) = if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            eprintln!("error: cannot read {}: {e}", path.display());
            ExitCode::from(exit::CONFIG_ERROR as u8)
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (Some(text), path.display().to_string(), base)
    } else if let Some(name) = &cli.preset {
        let Some(p) = presets::find(name) else {
            eprintln!("error: unknown preset `{name}`; run `photon-collapse presets`");
            return Err(ExitCode::from(exit::CONFIG_ERROR as u8));
        };
        (Some(p.text.to_string()), format!("preset {name}"), PathBuf::from("."))
    } else {
        (None, "defaults".into(), PathBuf::from("."))
    };

    let config = match &text {
        Some(t) => parse_config(t).map_err(|e| report_config_errors(&origin, &e))?,
        None => match kind {
            Some(k) => ExperimentConfig::new(k),
            None => {
                eprintln!("error: `run` and `validate` need --config or --preset");
                return Err(ExitCode::from(exit::CONFIG_ERROR as u8));
            }
        },
    };
    if let Some(k) = kind {
        if config.experiment != k {
            eprintln!(
                "error: {origin} describes a `{}` experiment, not `{}`",
                config.experiment.name(),
                k.name()
            );
            return Err(ExitCode::from(exit::CONFIG_ERROR as u8));
        }
    }
    Ok(Loaded {
        config,
        text,
        origin,
        base_dir,
    })
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };

    match &cli.command {
        Command::Presets => {
            for p in presets::PRESETS {
                println!("{:<24} {}", p.name, p.summary);
            }
            return ExitCode::SUCCESS;
        }
        Command::ShowPreset { name } => {
            return match presets::find(name) {
                Some(p) => {
                    print!("{}", p.text);
                    ExitCode::SUCCESS
                }
                None => {
                    eprintln!("error: unknown preset `{name}`");
                    ExitCode::from(exit::CONFIG_ERROR as u8)
                }
            };
        }
        _ => {}
    }

    let loaded = match load(&cli, cli.command.kind()) {
        Ok(l) => l,
        Err(code) => return code,
    };

    if let Command::Validate = cli.command {
        let issues = loaded.config.validate();
        if !issues.is_empty() {
            return report_config_errors(&loaded.origin, &ConfigErrors(issues));
        }
        println!("{}: ok ({} experiment)", loaded.origin, loaded.config.experiment.name());
        return ExitCode::SUCCESS;
    }

    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(exit::CONFIG_ERROR as u8);
    }
    let options = RunOptions {
        seed: cli.seed.map(|s| (s, source_of(&matches, "seed"))),
        threads: cli.threads.map(|n| (n, source_of(&matches, "threads"))),
        out_dir: cli.out.clone().map(|o| (o, source_of(&matches, "out"))),
        base_dir: loaded.base_dir,
        source_text: loaded.text,
        preset: cli.preset.clone(),
    };
    let issues = loaded.config.validate();
    if !issues.is_empty() {
        return report_config_errors(&loaded.origin, &ConfigErrors(issues));
    }
    match run(&loaded.config, &options) {
        Ok(outcome) => {
            let m = &outcome.manifest;
            for c in &m.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("wrote {}", outcome.out_dir.join("manifest.json").display());
            if m.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(exit::CHECKS_FAILED as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::RUNTIME_ERROR as u8)
        }
    }
}
