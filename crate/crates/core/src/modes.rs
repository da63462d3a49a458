//! Dispersion functions of the gap between two identical impedance walls,
//! evaluated on the imaginary frequency axis ω = iξ.
//!
//! With e = ξZ∥/(cq) and κ̃ = cqZ⊥/ξ the functions are
//!
//! ```text
//! Δ∥ = e^{−qz} [(1 + e²) sinh qz + 2e cosh qz]
//! Δ⊥ = e^{−qz} [(1 + κ̃²) sinh qz + 2κ̃ cosh qz]
//! ```
//!
//! which equal (1 + e)²(1 − r∥² e^{−2qz})/2 and its TE analog. The
//! perfect conductor (Z = 0) leaves e^{−qz} sinh qz in both.

use crate::constants::LIGHT_SPEED;
use crate::error::{ensure, CasimirError, Result};
use crate::material::{Permittivity, ResponseModel};

/// A point (ξ, k⊥) on the imaginary axis for a gap of width `gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePoint {
    pub xi: f64,
    pub k_perp: f64,
    /// √(k⊥² + ξ²/c²), real and positive on the imaginary axis.
    pub q: f64,
    pub gap: f64,
}

impl ModePoint {
    pub fn new(xi: f64, k_perp: f64, gap: f64) -> Result<Self> {
        ensure(xi.is_finite() && xi > 0.0, || format!("xi must be > 0, got {xi}"))?;
        ensure(k_perp.is_finite() && k_perp >= 0.0, || format!("k_perp must be >= 0, got {k_perp}"))?;
        ensure(gap.is_finite() && gap > 0.0, || format!("gap must be > 0, got {gap}"))?;
        let q = k_perp.hypot(xi / LIGHT_SPEED);
        Ok(ModePoint { xi, k_perp, q, gap })
    }

    /// Point on the path ck⊥ = αξ.
    pub fn on_path(xi: f64, slope: f64, gap: f64) -> Result<Self> {
        Self::new(xi, slope * xi / LIGHT_SPEED, gap)
    }

    /// (e^{−qz} sinh qz, e^{−qz} cosh qz).
    fn hyperbolic(&self) -> (f64, f64) {
        let decay = (-2.0 * self.q * self.gap).exp();
        (0.5 * (1.0 - decay), 0.5 * (1.0 + decay))
    }

    fn eta(&self, z_par: f64) -> f64 {
        self.xi * z_par / (LIGHT_SPEED * self.q)
    }

    fn kappa(&self, z_perp: f64) -> f64 {
        LIGHT_SPEED * self.q * z_perp / self.xi
    }
}

fn dispersion(e: f64, s: f64, c: f64) -> f64 {
    (1.0 + e * e) * s + 2.0 * e * c
}

/// D(e + δ) − D(e) without cancellation.
fn dispersion_increment(e: f64, delta: f64, s: f64, c: f64) -> f64 {
    delta * ((2.0 * e + delta) * s + 2.0 * c)
}

fn check_impedance(z: f64) -> Result<()> {
    ensure(z.is_finite() && z >= 0.0, || format!("impedance must be finite and >= 0, got {z}"))
}

/// (Δ∥, Δ⊥) with polarization-dependent impedances.
pub fn dispersion_exact(point: &ModePoint, z_par: f64, z_perp: f64) -> Result<(f64, f64)> {
    check_impedance(z_par)?;
    check_impedance(z_perp)?;
    let (e, k) = (point.eta(z_par), point.kappa(z_perp));
    // 1 − η² becomes 1 + e² on the imaginary axis, so the pole cannot be reached from here.
    if !(1.0 + e * e).is_normal() || !(1.0 + k * k).is_normal() {
        return Err(CasimirError::DispersionPole("impedance factor is not finite"));
    }
    let (s, c) = point.hyperbolic();
    Ok((dispersion(e, s, c), dispersion(k, s, c)))
}

/// (Δ∥, Δ⊥) with a single Leontovich impedance.
pub fn dispersion_leontovich(point: &ModePoint, z: f64) -> Result<(f64, f64)> {
    dispersion_exact(point, z, z)
}

/// How k⊥ follows ξ along a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanPath {
    /// ck⊥ = αξ, compatible with the mass shell.
    ProportionalMomentum { slope: f64 },
    /// k⊥ held fixed while ξ → 0.
    FixedMomentum { k_perp: f64 },
}

impl ScanPath {
    fn point(&self, xi: f64, gap: f64) -> Result<ModePoint> {
        match *self {
            ScanPath::ProportionalMomentum { slope } => ModePoint::on_path(xi, slope, gap),
            ScanPath::FixedMomentum { k_perp } => ModePoint::new(xi, k_perp, gap),
        }
    }
}

/// Deviations of the exact quantities from their Leontovich counterparts at one ξ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub xi: f64,
    pub k_perp: f64,
    /// |Z∥/Z − 1|
    pub z_parallel: f64,
    /// |Z⊥/Z − 1|
    pub z_perpendicular: f64,
    /// |Δ∥,exact/Δ∥,Leontovich − 1|
    pub delta_parallel: f64,
    /// |Δ⊥,exact/Δ⊥,Leontovich − 1|
    pub delta_perpendicular: f64,
}

impl ScanRow {
    pub fn columns(&self) -> [f64; 4] {
        [self.z_parallel, self.z_perpendicular, self.delta_parallel, self.delta_perpendicular]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceTable {
    pub path: ScanPath,
    pub gap: f64,
    /// One row per ladder frequency, in ladder (descending) order.
    pub rows: Vec<ScanRow>,
}

impl EquivalenceTable {
    /// Every deviation column is non-increasing as ξ decreases.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[0].columns().iter().zip(w[1].columns()).all(|(a, b)| b <= *a)
        })
    }

    /// Least-squares slope of ln(deviation) against ln ξ, minimized over
    /// the four columns. Identically zero columns are skipped; `None` when
    /// nothing is left to fit.
    pub fn decay_exponent(&self) -> Option<f64> {
        (0..4)
            .filter_map(|col| {
                let pts: Vec<(f64, f64)> = self
                    .rows
                    .iter()
                    .filter(|r| r.columns()[col] > 0.0)
                    .map(|r| (r.xi.ln(), r.columns()[col].ln()))
                    .collect();
                (pts.len() >= 2 && pts.len() == self.rows.len()).then(|| least_squares_slope(&pts))
            })
            .reduce(f64::min)
    }

    pub fn last(&self) -> Option<&ScanRow> {
        self.rows.last()
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Compare exact and Leontovich dispersion functions along `path` for two
/// identical plates of `model`, which must expose a finite permittivity.
pub fn equivalence_scan(model: &ResponseModel, gap: f64, path: ScanPath, ladder: &[f64]) -> Result<EquivalenceTable> {
    ensure(!ladder.is_empty(), || "frequency ladder is empty".into())?;
    ensure(ladder.windows(2).all(|w| w[1] < w[0]), || "frequency ladder must be strictly decreasing".into())?;
    if let ScanPath::ProportionalMomentum { slope } = path {
        ensure(slope.is_finite() && slope >= 0.0, || format!("path slope must be >= 0, got {slope}"))?;
    }
    let rows = ladder
        .iter()
        .map(|&xi| {
            let point = path.point(xi, gap)?;
            let eps = match model.permittivity_at(xi)? {
                Permittivity::Finite(eps) => eps,
                Permittivity::Infinite => {
                    return Err(CasimirError::InvalidInput(format!("{} has no finite permittivity", model.name())))
                }
            };
            scan_row(&point, eps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceTable { path, gap, rows })
}

fn scan_row(point: &ModePoint, eps: f64) -> Result<ScanRow> {
    let z = 1.0 / eps.sqrt();
    let ratio = LIGHT_SPEED * point.k_perp / point.xi;
    let excess = ratio * ratio / eps;
    let root = (1.0 + excess).sqrt();
    // √f − 1 and 1/√f − 1 in cancellation-free form.
    let par_dev = excess / (root + 1.0);
    let perp_dev = -par_dev / root;

    let (s, c) = point.hyperbolic();
    let (e_leo, k_leo) = (point.eta(z), point.kappa(z));
    let (d_par, d_perp) = dispersion_leontovich(point, z)?;
    let diff_par = dispersion_increment(e_leo, e_leo * par_dev, s, c);
    let diff_perp = dispersion_increment(k_leo, k_leo * perp_dev, s, c);
    Ok(ScanRow {
        xi: point.xi,
        k_perp: point.k_perp,
        z_parallel: par_dev.abs(),
        z_perpendicular: perp_dev.abs(),
        delta_parallel: (diff_par / d_par).abs(),
        delta_perpendicular: (diff_perp / d_perp).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const WP: f64 = 1.37e16;

    fn ir() -> ResponseModel {
        ResponseModel::infrared_optics(WP).unwrap()
    }

    fn ladder(decades: i32) -> Vec<f64> {
        (1..=decades).map(|k| WP * 10f64.powi(-k)).collect()
    }

    #[test]
    fn ideal_walls_leave_sinh() {
        let p = ModePoint::new(1e14, 2e6, 1e-6).unwrap();
        let (a, b) = dispersion_exact(&p, 0.0, 0.0).unwrap();
        let expected = (-p.q * p.gap).exp() * (p.q * p.gap).sinh();
        assert_relative_eq!(a, expected, max_relative = 1e-14);
        assert_relative_eq!(b, expected, max_relative = 1e-14);
    }

    #[test]
    fn equal_impedances_match_leontovich() {
        let p = ModePoint::new(3e14, 5e6, 2e-7).unwrap();
        assert_eq!(dispersion_exact(&p, 0.02, 0.02).unwrap(), dispersion_leontovich(&p, 0.02).unwrap());
    }

    #[test]
    fn dispersion_matches_reflection_form() {
        use crate::reflection::{impedance_reflection, WavenumberPoint};
        let (xi, k, gap, z) = (2e14, 4e6, 5e-7, 0.03);
        let p = ModePoint::new(xi, k, gap).unwrap();
        let r = impedance_reflection(z, &WavenumberPoint::new(1, xi, k).unwrap()).unwrap();
        let (d_par, d_perp) = dispersion_leontovich(&p, z).unwrap();
        let decay = (-2.0 * p.q * gap).exp();
        let e = p.eta(z);
        let kt = p.kappa(z);
        assert_relative_eq!(d_par, 0.5 * (1.0 + e).powi(2) * (1.0 - r.r_parallel.powi(2) * decay), max_relative = 1e-12);
        assert_relative_eq!(d_perp, 0.5 * (1.0 + kt).powi(2) * (1.0 - r.r_perpendicular.powi(2) * decay), max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(ModePoint::new(0.0, 1.0, 1e-6).is_err());
        assert!(ModePoint::new(1e14, -1.0, 1e-6).is_err());
        let p = ModePoint::new(1e14, 1e6, 1e-6).unwrap();
        assert!(dispersion_exact(&p, f64::NAN, 0.1).is_err());
    }

    #[test]
    fn proportional_path_converges_quadratically() {
        let table = equivalence_scan(&ir(), 1e-6, ScanPath::ProportionalMomentum { slope: 1.0 }, &ladder(6)).unwrap();
        assert!(table.is_monotone());
        let last = table.last().unwrap();
        assert!(last.columns().iter().all(|d| *d < 1e-10), "{last:?}");
        assert!(table.decay_exponent().unwrap() >= 1.9);
    }

    #[test]
    fn normal_incidence_is_exact() {
        let table = equivalence_scan(&ir(), 1e-6, ScanPath::ProportionalMomentum { slope: 0.0 }, &ladder(4)).unwrap();
        assert!(table.rows.iter().all(|r| r.columns() == [0.0; 4]));
        assert_eq!(table.decay_exponent(), None);
    }

    #[test]
    fn fixed_momentum_keeps_perpendicular_deviation() {
        let k = 1e7;
        let table = equivalence_scan(&ir(), 1e-6, ScanPath::FixedMomentum { k_perp: k }, &ladder(8)).unwrap();
        let ck = LIGHT_SPEED * k;
        let limit = 1.0 - 1.0 / (1.0 + (ck / WP).powi(2)).sqrt();
        assert_relative_eq!(table.last().unwrap().z_perpendicular, limit, max_relative = 1e-6);
        assert!(limit > 1e-4);
    }

    #[test]
    fn impedance_only_model_is_rejected() {
        let skin = ResponseModel::normal_skin(crate::material::DrudeParameters::gold(), 300.0).unwrap();
        assert!(equivalence_scan(&skin, 1e-6, ScanPath::ProportionalMomentum { slope: 1.0 }, &ladder(2)).is_err());
    }
}
