//! `upcon` — deterministic simulator of a quantum-dot single-photon source
//! read out through frequency upconversion.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use upcon_cli::config::{ScenarioConfig, ScenarioKind};
use upcon_cli::run::{run_scenario, RunOptions};

#[derive(Parser)]
#[command(
    name = "upcon",
    about = "Simulate quantum-dot single-photon upconversion experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Efficiency and photon-energy arithmetic of the detection chain.
    Budget(Common),
    /// Scanned-pump photoluminescence spectrum.
    Spectrum(Common),
    /// Time-resolved lifetime measurement.
    Lifetime(LifetimeArgs),
    /// Hanbury Brown–Twiss second-order correlation.
    G2(Common),
    /// g²(0) versus pump power.
    Sweep(Common),
    /// Instrument-response scan with a narrow-line probe.
    Response(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario configuration file (JSON). Omitted blocks use the
    /// scenario's built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also dump detected event streams in PHES format.
    #[arg(long)]
    emit_events: bool,
}

#[derive(Args)]
struct LifetimeArgs {
    #[command(flatten)]
    common: Common,
    /// Detector family for the lifetime chain.
    #[arg(long, value_parser = ["si", "ingaas"], default_value = "si")]
    detector: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, kinds): (&Common, Vec<ScenarioKind>) = match &cli.command {
        Command::Budget(c) => (c, vec![ScenarioKind::Budget]),
        Command::Spectrum(c) => (c, vec![ScenarioKind::Spectrum]),
        Command::Lifetime(l) => (
            &l.common,
            vec![ScenarioKind::LifetimeSi, ScenarioKind::LifetimeIngaas],
        ),
        Command::G2(c) => (c, vec![ScenarioKind::G2]),
        Command::Sweep(c) => (c, vec![ScenarioKind::G2PowerSweep]),
        Command::Response(c) => (c, vec![ScenarioKind::InstrumentResponse]),
    };

    let config = match load_config(&cli.command, common, &kinds) {
        Ok(c) => c,
        Err(message) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": "config", "message": message })
            );
            return ExitCode::from(2);
        }
    };

    let opts = RunOptions { out_dir: common.out.clone(), emit_events: common.emit_events };
    match run_scenario(&config, &opts) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": "runtime", "message": format!("{err:#}") })
            );
            ExitCode::from(3)
        }
    }
}

fn load_config(
    command: &Command,
    common: &Common,
    allowed: &[ScenarioKind],
) -> Result<ScenarioConfig, String> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            let config = ScenarioConfig::from_json(&text)?;
            if !allowed.contains(&config.scenario) {
                return Err(format!(
                    "config scenario `{}` does not match this subcommand",
                    config.scenario.as_str()
                ));
            }
            config
        }
        None => {
            let kind = match command {
                Command::Lifetime(l) if l.detector == "ingaas" => ScenarioKind::LifetimeIngaas,
                _ => allowed[0],
            };
            ScenarioConfig::new(kind, common.seed.unwrap_or(1))
        }
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}
