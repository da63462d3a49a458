//! CSV assembly, proximity-force conversion and model comparison reports.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::engine::{LifshitzEngine, PlatePair, ThermalResult};
use crate::error::{ensure, Result};

use super::config::Temperature;

/// Header of value rows.
pub const VALUE_HEADER: &str = "z_m,T_K,value,unit,err_estimate,terms_used";

/// Metadata line carrying the wall-clock time; the only nondeterministic line.
pub const TIMESTAMP_KEY: &str = "timestamp_unix";

/// A CSV document: `#` metadata, one header, rows, then `#` trailer notes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvDocument {
    pub metadata: Vec<(String, String)>,
    pub header: String,
    pub rows: Vec<String>,
    pub notes: Vec<String>,
}

impl CsvDocument {
    pub fn new(header: &str) -> Self {
        CsvDocument { header: header.to_string(), ..Default::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.header);
        for r in &self.rows {
            let _ = writeln!(out, "{r}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        out
    }
}

/// One row in the value format.
pub fn value_row(z: f64, temperature: f64, result: &ThermalResult, unit: &str) -> String {
    format!(
        "{z:e},{temperature},{:e},{unit},{:e},{}",
        result.value,
        result.error_estimate(),
        result.terms_used
    )
}

/// Sphere-plate force from the plate-plate free energy per area.
#[derive(Debug, Clone, PartialEq)]
pub struct PfaForce {
    /// N; negative means attraction.
    pub force: f64,
    pub warning: Option<String>,
}

/// F(z) = 2πR 𝓕(z). Warns when R < 100 z, where the approximation degrades.
pub fn pfa_sphere_plate(free_energy_per_area: f64, z: f64, radius: f64) -> Result<PfaForce> {
    ensure(radius.is_finite() && radius > 0.0, || format!("sphere radius must be > 0, got {radius}"))?;
    ensure(z.is_finite() && z > 0.0, || format!("separation must be > 0, got {z}"))?;
    let warning = (radius < 100.0 * z)
        .then(|| format!("R = {radius:e} m is below 100 z = {:e} m; proximity-force result is unreliable", 100.0 * z));
    Ok(PfaForce { force: 2.0 * PI * radius * free_energy_per_area, warning })
}

/// PFA force columns for one separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceColumns {
    pub force_a: f64,
    pub force_b: f64,
    /// (F_a − F_b)/F_a at the run temperature.
    pub relative_deviation: f64,
    /// Same ratio at T = 0.
    pub relative_deviation_zero_t: f64,
    /// `relative_deviation − relative_deviation_zero_t`.
    pub thermal_part: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub z: f64,
    pub temperature: f64,
    pub pressure_a: f64,
    pub pressure_b: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub forces: Option<ForceColumns>,
}

impl ComparisonRow {
    /// Difference columns are derived here and nowhere else.
    pub fn new(z: f64, temperature: f64, pressure_a: f64, pressure_b: f64) -> Self {
        let abs_diff = (pressure_a - pressure_b).abs();
        ComparisonRow {
            z,
            temperature,
            pressure_a,
            pressure_b,
            abs_diff,
            rel_diff: abs_diff / pressure_a.abs(),
            forces: None,
        }
    }
}

/// Pressure comparison of two models, each applied to both plates.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

pub const COMPARISON_HEADER: &str = "z_m,T_K,P_a_Pa,P_b_Pa,abs_diff_Pa,rel_diff";
pub const FORCE_COLUMNS: &str = ",F_a_N,F_b_N,force_rel_dev,force_rel_dev_T0,thermal_part";

impl ComparisonReport {
    pub fn compute(
        engine: &LifshitzEngine,
        pair_a: &PlatePair,
        pair_b: &PlatePair,
        separations: &[f64],
        temperature: Temperature,
        radius: Option<f64>,
    ) -> Result<Self> {
        let pressure = |pair: &PlatePair, z: f64| -> Result<f64> {
            Ok(match temperature {
                Temperature::Kelvin(t) => engine.pressure(pair, z, t)?.value,
                Temperature::Zero => engine.pressure_zero_t(pair, z)?.value,
            })
        };
        let energy = |pair: &PlatePair, z: f64| -> Result<(f64, f64)> {
            let zero = engine.free_energy_zero_t(pair, z)?.value;
            let thermal = match temperature {
                Temperature::Kelvin(t) => engine.free_energy(pair, z, t)?.value,
                Temperature::Zero => zero,
            };
            Ok((thermal, zero))
        };
        let computed: Vec<(ComparisonRow, Option<String>)> = separations
            .par_iter()
            .map(|&z| {
                let mut row = ComparisonRow::new(z, temperature.kelvin(), pressure(pair_a, z)?, pressure(pair_b, z)?);
                let mut warning = None;
                if let Some(r) = radius {
                    let (fa, fa0) = energy(pair_a, z)?;
                    let (fb, fb0) = energy(pair_b, z)?;
                    let force_a = pfa_sphere_plate(fa, z, r)?;
                    let force_b = pfa_sphere_plate(fb, z, r)?.force;
                    let dev = (force_a.force - force_b) / force_a.force;
                    let f0a = pfa_sphere_plate(fa0, z, r)?.force;
                    let f0b = pfa_sphere_plate(fb0, z, r)?.force;
                    let dev0 = (f0a - f0b) / f0a;
                    warning = force_a.warning;
                    row.forces = Some(ForceColumns {
                        force_a: force_a.force,
                        force_b,
                        relative_deviation: dev,
                        relative_deviation_zero_t: dev0,
                        thermal_part: dev - dev0,
                    });
                }
                Ok((row, warning))
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::with_capacity(computed.len());
        let mut warnings = Vec::new();
        for (row, w) in computed {
            rows.push(row);
            warnings.extend(w);
        }
        Ok(ComparisonReport { rows, warnings })
    }

    pub fn header(&self) -> String {
        let with_forces = self.rows.first().is_some_and(|r| r.forces.is_some());
        format!("{COMPARISON_HEADER}{}", if with_forces { FORCE_COLUMNS } else { "" })
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                let mut s = format!(
                    "{:e},{},{:e},{:e},{:e},{:e}",
                    r.z, r.temperature, r.pressure_a, r.pressure_b, r.abs_diff, r.rel_diff
                );
                if let Some(f) = r.forces {
                    let _ = write!(
                        s,
                        ",{:e},{:e},{:e},{:e},{:e}",
                        f.force_a, f.force_b, f.relative_deviation, f.relative_deviation_zero_t, f.thermal_part
                    );
                }
                s
            })
            .collect()
    }
}
