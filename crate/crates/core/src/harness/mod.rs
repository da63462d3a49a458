//! Front end shared by the CLI: configuration, sweeps over (z, T),
//! comparison reports and CSV emission.

mod config;
mod report;

use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

pub use config::{merge, parse_config, parse_override, ConfigMap, ModelKind, ModelSpec, RunConfig, Temperature};
pub use report::{
    pfa_sphere_plate, value_row, ComparisonReport, ComparisonRow, CsvDocument, ForceColumns, PfaForce,
    COMPARISON_HEADER, TIMESTAMP_KEY, VALUE_HEADER,
};

use crate::constants::{BOLTZMANN, HBAR, LIGHT_SPEED};
use crate::engine::{LifshitzEngine, PlatePair};
use crate::error::{CasimirError, Result};
use crate::material::ResponseModel;
use crate::modes::{equivalence_scan, ScanPath};
use crate::nernst::nernst_scan;
use crate::optical::OpticalTable;
use crate::ENGINE_VERSION;

/// Harness subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    FreeEnergy,
    PressureSweep,
    EntropyScan,
    CompareModels,
    NernstCheck,
    ModesCheck,
    KkTransform,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::FreeEnergy,
        Command::PressureSweep,
        Command::EntropyScan,
        Command::CompareModels,
        Command::NernstCheck,
        Command::ModesCheck,
        Command::KkTransform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::FreeEnergy => "free-energy",
            Command::PressureSweep => "pressure-sweep",
            Command::EntropyScan => "entropy-scan",
            Command::CompareModels => "compare-models",
            Command::NernstCheck => "nernst-check",
            Command::ModesCheck => "modes-check",
            Command::KkTransform => "kk-transform",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CasimirError::InvalidInput(format!("unknown command '{s}'")))
    }
}

/// What a run produced: the CSV text and short summary lines
/// (also present in the CSV as trailing comments).
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub document: CsvDocument,
    pub summary: Vec<String>,
}

impl RunOutput {
    pub fn csv(&self) -> String {
        self.document.render()
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.csv())?;
        Ok(())
    }
}

fn load_table(spec: &ModelSpec) -> Result<Arc<OpticalTable>> {
    let path = spec.table.as_ref().ok_or_else(|| CasimirError::InvalidInput("no optical table given".into()))?;
    let file = fs::File::open(path).map_err(|e| CasimirError::Io(format!("{}: {e}", path.display())))?;
    let table = OpticalTable::load_csv(BufReader::new(file), spec.params, path.display().to_string())?;
    Ok(Arc::new(table))
}

/// Instantiates the model at `temperature` (0 allowed).
pub fn build_model(spec: &ModelSpec, temperature: f64) -> Result<ResponseModel> {
    let p = spec.params;
    match spec.kind {
        ModelKind::Ideal => Ok(ResponseModel::IdealMetal),
        ModelKind::Plasma => ResponseModel::plasma(p.plasma_frequency),
        ModelKind::Drude => ResponseModel::drude(p, temperature),
        ModelKind::NormalSkin => ResponseModel::normal_skin(p, temperature),
        ModelKind::InfraredOptics => ResponseModel::infrared_optics(p.plasma_frequency),
        ModelKind::Tabulated => ResponseModel::tabulated(load_table(spec)?, temperature),
        ModelKind::Vacuum => Ok(ResponseModel::Vacuum),
    }
}

fn symmetric_pair(model: ResponseModel, config: &RunConfig) -> Result<PlatePair> {
    match config.scheme {
        Some(s) => PlatePair::new(model.clone(), model, s),
        None => PlatePair::symmetric(model),
    }
}

fn plate_pair(config: &RunConfig, temperature: f64) -> Result<PlatePair> {
    let a = build_model(&config.model_a, temperature)?;
    if config.model_b == config.model_a {
        return symmetric_pair(a, config);
    }
    let b = build_model(&config.model_b, temperature)?;
    let scheme = config.scheme.unwrap_or_else(|| {
        let natural = |m: &ResponseModel| PlatePair::symmetric(m.clone()).map(|p| p.scheme);
        match (natural(&a), natural(&b)) {
            (Ok(sa), Ok(sb)) if sa == sb => sa,
            _ => crate::reflection::ReflectionScheme::LeontovichImpedance,
        }
    });
    PlatePair::new(a, b, scheme)
}

fn base_document(config: &RunConfig, header: &str) -> CsvDocument {
    let mut doc = CsvDocument::new(header);
    let s = &config.settings;
    doc.meta("engine", format!("casimir-core {ENGINE_VERSION}"));
    doc.meta("command", config.command.name());
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    doc.meta(TIMESTAMP_KEY, stamp);
    doc.meta("model_a", config.model_a.describe());
    doc.meta("model_b", config.model_b.describe());
    doc.meta("scheme", config.scheme.map_or("natural", |s| s.name()));
    doc.meta("tail_tolerance", format!("{:e}", s.truncation.tail_tolerance));
    doc.meta("max_terms", s.truncation.max_terms);
    doc.meta("quadrature_tolerance", format!("{:e}", s.quadrature.rel));
    doc.meta("entropy_step", format!("{:e}", s.entropy_step));
    doc.meta("constants", format!("CODATA 2018 kB={BOLTZMANN:e} hbar={HBAR:e} c={LIGHT_SPEED:e}"));
    doc
}

/// Executes one harness command.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let engine = LifshitzEngine::new(config.settings);
    let (document, summary) = match config.command {
        Command::FreeEnergy => thermal_sweep(config, &engine, true)?,
        Command::PressureSweep => thermal_sweep(config, &engine, false)?,
        Command::EntropyScan => entropy_scan(config, &engine)?,
        Command::CompareModels => compare_models(config, &engine)?,
        Command::NernstCheck => nernst_check(config, &engine)?,
        Command::ModesCheck => modes_check(config)?,
        Command::KkTransform => kk_transform(config)?,
    };
    let mut document = document;
    document.notes.extend(summary.iter().cloned());
    Ok(RunOutput { document, summary })
}

type Produced = (CsvDocument, Vec<String>);

fn thermal_sweep(config: &RunConfig, engine: &LifshitzEngine, energy: bool) -> Result<Produced> {
    let pair = plate_pair(config, config.temperature.kelvin())?;
    let mut doc = base_document(config, VALUE_HEADER);
    doc.meta("temperature", config.temperature.kelvin());
    let results = config
        .separations
        .par_iter()
        .map(|&z| {
            Ok(match (config.temperature, energy) {
                (Temperature::Kelvin(t), true) => engine.free_energy(&pair, z, t)?,
                (Temperature::Kelvin(t), false) => engine.pressure(&pair, z, t)?,
                (Temperature::Zero, true) => engine.free_energy_zero_t(&pair, z)?,
                (Temperature::Zero, false) => engine.pressure_zero_t(&pair, z)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let t = config.temperature.kelvin();
    let mut summary = Vec::new();
    for (&z, r) in config.separations.iter().zip(&results) {
        doc.rows.push(value_row(z, t, r, if energy { "J/m^2" } else { "Pa" }));
        if let (true, Some(radius)) = (energy, config.sphere_radius) {
            let f = pfa_sphere_plate(r.value, z, radius)?;
            let force = crate::engine::ThermalResult {
                value: f.force,
                quadrature_error: 2.0 * std::f64::consts::PI * radius * r.quadrature_error,
                tail_estimate: 2.0 * std::f64::consts::PI * radius * r.tail_estimate,
                terms_used: r.terms_used,
            };
            doc.rows.push(value_row(z, t, &force, "N"));
            summary.extend(f.warning);
        }
    }
    if energy {
        if let Some(radius) = config.sphere_radius {
            doc.meta("sphere_radius", format!("{radius:e}"));
        }
    }
    Ok((doc, summary))
}

fn ladder_or_temperature(config: &RunConfig) -> Result<Vec<f64>> {
    if !config.temperatures.is_empty() {
        return Ok(config.temperatures.clone());
    }
    match config.temperature {
        Temperature::Kelvin(t) => Ok(vec![t]),
        Temperature::Zero => Err(CasimirError::InvalidInput("entropy needs a temperature > 0".into())),
    }
}

fn entropy_scan(config: &RunConfig, engine: &LifshitzEngine) -> Result<Produced> {
    let temps = ladder_or_temperature(config)?;
    let pair = plate_pair(config, temps[0])?;
    let mut doc = base_document(config, VALUE_HEADER);
    let grid: Vec<(f64, f64)> = config.separations.iter().flat_map(|&z| temps.iter().map(move |&t| (z, t))).collect();
    let results = grid
        .par_iter()
        .map(|&(z, t)| engine.entropy(&pair, z, t))
        .collect::<Result<Vec<_>>>()?;
    for (&(z, t), r) in grid.iter().zip(&results) {
        doc.rows.push(value_row(z, t, r, "J/(m^2 K)"));
    }
    Ok((doc, Vec::new()))
}

fn compare_models(config: &RunConfig, engine: &LifshitzEngine) -> Result<Produced> {
    let t = config.temperature.kelvin();
    let pair_a = symmetric_pair(build_model(&config.model_a, t)?, config)?;
    let pair_b = symmetric_pair(build_model(&config.model_b, t)?, config)?;
    let report = ComparisonReport::compute(
        engine,
        &pair_a,
        &pair_b,
        &config.separations,
        config.temperature,
        config.sphere_radius,
    )?;
    let mut doc = base_document(config, &report.header());
    doc.meta("temperature", t);
    if let Some(r) = config.sphere_radius {
        doc.meta("sphere_radius", format!("{r:e}"));
        doc.meta(
            "thermal_part",
            "force_rel_dev minus force_rel_dev_T0, where force_rel_dev = (F_a - F_b)/F_a and F = 2 pi R * free energy per area",
        );
    }
    doc.rows = report.csv_rows();
    Ok((doc, report.warnings))
}

/// Default ladder: fractions of the temperature where 2πkBTz/(ħc) = 0.05.
fn default_ladder(z: f64) -> Vec<f64> {
    let t_edge = 0.05 * HBAR * LIGHT_SPEED / (2.0 * std::f64::consts::PI * BOLTZMANN * z);
    [0.4, 0.3, 0.2, 0.15].iter().map(|f| f * t_edge).collect()
}

fn nernst_check(config: &RunConfig, engine: &LifshitzEngine) -> Result<Produced> {
    let mut doc = base_document(config, VALUE_HEADER);
    let mut summary = Vec::new();
    for &z in &config.separations {
        let ladder = if config.temperatures.is_empty() { default_ladder(z) } else { config.temperatures.clone() };
        let pair = plate_pair(config, ladder[0])?;
        let verdict = nernst_scan(engine, &pair, z, &ladder)?;
        for (t, r) in &verdict.ladder {
            doc.rows.push(value_row(z, *t, r, "J/(m^2 K)"));
        }
        summary.push(format!(
            "verdict {} model={} z_m={z:e} S0={:e} uncertainty={:e} exponent={:.4}",
            verdict.classification, verdict.model, verdict.extrapolated, verdict.uncertainty, verdict.exponent
        ));
    }
    Ok((doc, summary))
}

fn modes_check(config: &RunConfig) -> Result<Produced> {
    let gap = config.separations[0];
    let model = build_model(&config.model_a, config.temperature.kelvin())?;
    let path = match config.fixed_k_perp {
        Some(k_perp) => ScanPath::FixedMomentum { k_perp },
        None => ScanPath::ProportionalMomentum { slope: config.path_slope },
    };
    let ladder = if config.frequencies.is_empty() {
        (1..=6).map(|k| config.model_a.params.plasma_frequency * 10f64.powi(-k)).collect()
    } else {
        config.frequencies.clone()
    };
    let table = equivalence_scan(&model, gap, path, &ladder)?;
    let mut doc = base_document(config, "xi_rad_s,k_perp_m,z_par_dev,z_perp_dev,delta_par_dev,delta_perp_dev");
    doc.meta("gap", format!("{gap:e}"));
    doc.meta(
        "path",
        match path {
            ScanPath::ProportionalMomentum { slope } => format!("c k_perp = {slope} xi"),
            ScanPath::FixedMomentum { k_perp } => format!("k_perp = {k_perp:e}"),
        },
    );
    for r in &table.rows {
        doc.rows.push(format!(
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            r.xi, r.k_perp, r.z_parallel, r.z_perpendicular, r.delta_parallel, r.delta_perpendicular
        ));
    }
    let exponent = table.decay_exponent().map_or("none".to_string(), |p| format!("{p:.4}"));
    Ok((doc, vec![format!("monotone={} decay_exponent={exponent}", table.is_monotone())]))
}

fn kk_transform(config: &RunConfig) -> Result<Produced> {
    let table = load_table(&config.model_a)?;
    let frequencies = if config.frequencies.is_empty() {
        (0..=10).rev().map(|k| 1e12 * 10f64.powf(0.5 * k as f64)).collect()
    } else {
        config.frequencies.clone()
    };
    let mut doc = base_document(config, "xi_rad_s,eps_imag_axis");
    doc.meta("provenance", &table.provenance);
    doc.meta("splice_frequency", format!("{:e}", table.tail.splice_frequency));
    doc.meta("high_tail", format!("im_eps = {:e} * omega^-3", table.high_tail_amplitude));
    let values = frequencies
        .par_iter()
        .map(|&xi| table.kk_to_imaginary_axis(xi))
        .collect::<Result<Vec<_>>>()?;
    for (xi, eps) in frequencies.iter().zip(values) {
        doc.rows.push(format!("{xi:e},{eps:e}"));
    }
    Ok((doc, table.warnings.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn config(command: Command, text: &str) -> RunConfig {
        RunConfig::from_sources(command, Some(text), &[]).unwrap()
    }

    fn without_timestamp(csv: &str) -> String {
        csv.lines().filter(|l| !l.starts_with(&format!("# {TIMESTAMP_KEY}"))).collect::<Vec<_>>().join("\n")
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(Command::parse(c.name()).unwrap(), c);
        }
        assert!(Command::parse("bogus").is_err());
    }

    #[test]
    fn ideal_pressure_at_zero_temperature() {
        let out = run(&config(Command::PressureSweep, "model = ideal\nz = 1e-6\ntemperature = 0\n")).unwrap();
        let row = out.document.rows[0].split(',').collect::<Vec<_>>();
        assert_eq!(row[0], "1e-6");
        assert_eq!(row[3], "Pa");
        assert_relative_eq!(row[2].parse::<f64>().unwrap(), -1.300_125_772_448e-3, max_relative = 1e-4);
    }

    #[test]
    fn output_is_deterministic() {
        let cfg = config(Command::FreeEnergy, "model = drude\nz = 3e-7, 1e-6\nradius = 1e-4\n");
        let a = run(&cfg).unwrap().csv();
        let b = run(&cfg).unwrap().csv();
        assert_eq!(without_timestamp(&a), without_timestamp(&b));
        assert!(a.lines().any(|l| l == VALUE_HEADER));
        assert!(a.contains(",N,"));
    }

    #[test]
    fn dissimilar_plates_use_shared_scheme() {
        let cfg = config(Command::PressureSweep, "model = drude\nmodel_b = plasma\nz = 5e-7\n");
        let pair = plate_pair(&cfg, 300.0).unwrap();
        assert_eq!(pair.scheme, crate::reflection::ReflectionScheme::LifshitzPermittivity);
        let cfg = config(Command::PressureSweep, "model = drude\nmodel_b = normal-skin\nz = 5e-7\n");
        assert_eq!(plate_pair(&cfg, 300.0).unwrap().scheme, crate::reflection::ReflectionScheme::LeontovichImpedance);
    }

    #[test]
    fn modes_check_summary() {
        let out = run(&config(Command::ModesCheck, "model = infrared-optics\nz = 1e-6\n")).unwrap();
        assert_eq!(out.document.rows.len(), 6);
        assert!(out.summary[0].starts_with("monotone=true"));
    }

    #[test]
    fn entropy_needs_positive_temperature() {
        let err = run(&config(Command::EntropyScan, "temperature = 0\n")).unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn default_ladder_respects_low_temperature_bound() {
        let ladder = default_ladder(1e-6);
        assert!(ladder.windows(2).all(|w| w[1] < w[0]));
        assert!(crate::nernst::thermal_parameter(1e-6, ladder[3]) < 0.05);
    }
}
