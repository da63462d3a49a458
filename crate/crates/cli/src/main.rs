use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use casimir_core::harness::{self, parse_override, Command, RunConfig};
use casimir_core::CasimirError;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "casimir", version, about = "Thermal Casimir free energy, pressure and entropy between metal plates")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Free energy per unit area over a separation grid (PFA force with --radius).
    FreeEnergy(Common),
    /// Pressure over a separation grid.
    PressureSweep(Common),
    /// Entropy on a (z, T) grid.
    EntropyScan(Common),
    /// Pressure (and PFA force) of model vs model_b, each on both plates.
    CompareModels(Common),
    /// Extrapolate the entropy to T = 0 and classify the limit.
    NernstCheck(Common),
    /// Exact vs Leontovich dispersion functions as the frequency goes to 0.
    ModesCheck(Common),
    /// Kramers-Kronig transform of a tabulated loss function to the imaginary axis.
    KkTransform(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override any configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    model_b: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// Separations in m, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// K; 0 selects the zero-temperature integral.
    #[arg(short = 'T', long)]
    temperature: Option<String>,
    /// Descending temperature ladder in K, comma separated.
    #[arg(long)]
    temperatures: Option<String>,
    /// Sphere radius in m for proximity-force output.
    #[arg(long)]
    radius: Option<String>,
    /// Optical table CSV for the tabulated model.
    #[arg(long)]
    table: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::FreeEnergy(c) => (Command::FreeEnergy, c),
            Sub::PressureSweep(c) => (Command::PressureSweep, c),
            Sub::EntropyScan(c) => (Command::EntropyScan, c),
            Sub::CompareModels(c) => (Command::CompareModels, c),
            Sub::NernstCheck(c) => (Command::NernstCheck, c),
            Sub::ModesCheck(c) => (Command::ModesCheck, c),
            Sub::KkTransform(c) => (Command::KkTransform, c),
        }
    }
}

fn execute(command: Command, args: Common) -> Result<(), CasimirError> {
    let file = match &args.config {
        Some(p) => Some(fs::read_to_string(p).map_err(|e| CasimirError::Io(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let mut overrides = args.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    let flags = [
        ("model", args.model),
        ("model_b", args.model_b),
        ("scheme", args.scheme),
        ("z", args.z),
        ("temperature", args.temperature),
        ("temperatures", args.temperatures),
        ("radius", args.radius),
        ("table", args.table),
        ("output", args.output.map(|p| p.display().to_string())),
    ];
    overrides.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));

    let config = RunConfig::from_sources(command, file.as_deref(), &overrides)?;
    let out = harness::run(&config)?;
    match &config.output {
        Some(path) => {
            out.write_to(path)?;
            for line in &out.summary {
                println!("{line}");
            }
        }
        None => print!("{}", out.csv()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
