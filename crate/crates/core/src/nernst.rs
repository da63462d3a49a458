//! Closed-form limits of the plate free energy and the low-temperature
//! entropy test.

use std::f64::consts::PI;
use std::fmt;

use crate::constants::{BOLTZMANN, HBAR, LIGHT_SPEED, ZETA_3};
use crate::engine::{LifshitzEngine, PlatePair, ThermalResult};
use crate::error::{ensure, CasimirError, Result};
use crate::quadrature::{integrate, Tolerance};

/// ωc = c / (2z).
pub fn characteristic_frequency(z: f64) -> f64 {
    LIGHT_SPEED / (2.0 * z)
}

/// Dimensionless ωp / ωc.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FrequencyRatio(f64);

impl FrequencyRatio {
    pub fn new(value: f64) -> Result<Self> {
        ensure(value.is_finite() && value > 0.0, || format!("frequency ratio must be > 0, got {value}"))?;
        Ok(FrequencyRatio(value))
    }

    /// ωp / ωc for plates a distance `z` apart.
    pub fn from_plasma(plasma_frequency: f64, z: f64) -> Result<Self> {
        ensure(z.is_finite() && z > 0.0, || format!("separation must be > 0, got {z}"))?;
        let wc = characteristic_frequency(z);
        ensure((wc * 2.0 * z / LIGHT_SPEED - 1.0).abs() < 1e-12, || "inconsistent characteristic frequency".into())?;
        Self::new(plasma_frequency / wc)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Integration cutoff in y; e^{−64} is far below double precision relative to the integral.
const Y_CUTOFF: f64 = 64.0;

/// S(z, T = 0) for Drude plates without residual relaxation:
/// (kB/16πz²) ∫ y ln[1 − r⊥²(y) e^{−y}] dy with the plasma-model TE coefficient
/// r⊥ = (y − √(R² + y²))/(y + √(R² + y²)), R = ωp/ωc.
pub fn nernst_entropy_drude(ratio: FrequencyRatio, z: f64) -> Result<f64> {
    ensure(z.is_finite() && z > 0.0, || format!("separation must be > 0, got {z}"))?;
    let r2 = ratio.value() * ratio.value();
    let f = |y: f64| {
        let root = (r2 + y * y).sqrt();
        let r = r2 / ((root + y) * (root + y));
        y * (-(r * r) * (-y).exp()).ln_1p()
    };
    let est = integrate(f, 0.0, Y_CUTOFF, Tolerance::relative(1e-13))?;
    Ok(BOLTZMANN / (16.0 * PI * z * z) * est.value)
}

/// Which high-temperature asymptote to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalClass {
    IdealMetal,
    /// Only the TM zero-frequency mode survives.
    DrudeClass,
}

/// Free energy in the limit 2πkBTz/(ħc) ≫ 1, where only the l = 0 term is left.
pub fn classical_free_energy(class: ClassicalClass, z: f64, temperature: f64) -> f64 {
    let ideal = -ZETA_3 * BOLTZMANN * temperature / (8.0 * PI * z * z);
    match class {
        ClassicalClass::IdealMetal => ideal,
        ClassicalClass::DrudeClass => 0.5 * ideal,
    }
}

/// Casimir's T = 0 energy and pressure between ideal metal plates.
pub fn ideal_metal_zero_t(z: f64) -> (f64, f64) {
    let hbar_c = HBAR * LIGHT_SPEED;
    let energy = -PI * PI * hbar_c / (720.0 * z.powi(3));
    let pressure = -PI * PI * hbar_c / (240.0 * z.powi(4));
    (energy, pressure)
}

/// 2πkB T z / (ħc): the classical-limit parameter.
pub fn thermal_parameter(z: f64, temperature: f64) -> f64 {
    2.0 * PI * BOLTZMANN * temperature * z / (HBAR * LIGHT_SPEED)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NernstClass {
    ConsistentZero,
    NegativeViolation,
    Inconclusive,
}

impl fmt::Display for NernstClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NernstClass::ConsistentZero => "ConsistentZero",
            NernstClass::NegativeViolation => "NegativeViolation",
            NernstClass::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Outcome of a T → 0 extrapolation of the entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct NernstVerdict {
    pub model: String,
    /// Extrapolated S(z, 0) in J/(m²·K).
    pub extrapolated: f64,
    pub uncertainty: f64,
    /// Fitted exponent p in S = S₀ + a·T^p.
    pub exponent: f64,
    pub classification: NernstClass,
    /// (T, S) on the ladder, in ladder order.
    pub ladder: Vec<(f64, ThermalResult)>,
}

/// S = S₀ + a T^p through three points with T1 > T2 > T3.
fn power_fit(t: [f64; 3], s: [f64; 3]) -> Option<(f64, f64)> {
    let ratio = (s[0] - s[1]) / (s[1] - s[2]);
    if !ratio.is_finite() || ratio <= 0.0 {
        return None;
    }
    let g = |p: f64| (t[0].powf(p) - t[1].powf(p)) / (t[1].powf(p) - t[2].powf(p));
    let (mut lo, mut hi) = (1e-3, 20.0);
    if ratio < g(lo) || ratio > g(hi) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let a = (s[0] - s[1]) / (t[0].powf(p) - t[1].powf(p));
    Some((s[2] - a * t[2].powf(p), p))
}

/// Extrapolate S(z, T) to T = 0 from a descending ladder and classify the limit.
///
/// The fit uses the three lowest temperatures. The uncertainty is the largest
/// of the propagated entropy errors, the shift of S₀ when the fit moves one
/// rung up the ladder, and 1% of |S| at the lowest temperature.
pub fn nernst_scan(engine: &LifshitzEngine, pair: &PlatePair, z: f64, ladder: &[f64]) -> Result<NernstVerdict> {
    ensure(z.is_finite() && z > 0.0, || format!("separation must be > 0, got {z}"))?;
    ensure(ladder.iter().all(|t| t.is_finite() && *t > 0.0), || "ladder temperatures must be > 0".into())?;
    ensure(ladder.windows(2).all(|w| w[1] < w[0]), || "temperature ladder must be strictly decreasing".into())?;
    if let Some(&t_min) = ladder.last() {
        let x = thermal_parameter(z, t_min);
        ensure(x < 0.05, || format!("lowest temperature too high: 2πkBTz/(ħc) = {x:.3} (needs < 0.05)"))?;
    }

    let mut points = Vec::with_capacity(ladder.len());
    for &t in ladder {
        points.push((t, engine.entropy(pair, z, t)?));
    }
    let model = format!("{}/{}", pair.model_a.name(), pair.model_b.name());
    let inconclusive = |points: Vec<(f64, ThermalResult)>, s0: f64, unc: f64, p: f64| NernstVerdict {
        model: model.clone(),
        extrapolated: s0,
        uncertainty: unc,
        exponent: p,
        classification: NernstClass::Inconclusive,
        ladder: points,
    };
    let n = points.len();
    if n < 4 {
        return Ok(inconclusive(points, f64::NAN, f64::INFINITY, f64::NAN));
    }

    let triple = |k: usize| -> ([f64; 3], [f64; 3], [f64; 3]) {
        let sel = [&points[k], &points[k + 1], &points[k + 2]];
        (sel.map(|p| p.0), sel.map(|p| p.1.value), sel.map(|p| p.1.error_estimate()))
    };
    let (t, s, err) = triple(n - 3);
    let Some((s0, p)) = power_fit(t, s) else {
        return Ok(inconclusive(points, f64::NAN, f64::INFINITY, f64::NAN));
    };
    let (t_up, s_up, _) = triple(n - 4);
    let Some((s0_up, _)) = power_fit(t_up, s_up) else {
        return Ok(inconclusive(points, s0, f64::INFINITY, p));
    };

    let mut propagated = 0.0;
    for i in 0..3 {
        let mut shifted = s;
        shifted[i] += err[i];
        propagated += power_fit(t, shifted).map_or(f64::INFINITY, |(v, _)| (v - s0).abs());
    }
    let s_min = s[2].abs();
    let uncertainty = propagated.max((s0 - s0_up).abs()).max(1e-2 * s_min);

    let scale = points.iter().map(|p| p.1.value.abs()).fold(0.0, f64::max);
    if (s0 - s0_up).abs() > 0.1 * scale {
        return Ok(inconclusive(points, s0, uncertainty, p));
    }
    let decreasing = points.windows(2).all(|w| w[1].1.value.abs() < w[0].1.value.abs());
    let classification = if s0 + uncertainty < 0.0 && s0.abs() > uncertainty {
        NernstClass::NegativeViolation
    } else if s0.abs() < uncertainty && decreasing {
        NernstClass::ConsistentZero
    } else {
        NernstClass::Inconclusive
    };
    Ok(NernstVerdict { model, extrapolated: s0, uncertainty, exponent: p, classification, ladder: points })
}

impl NernstVerdict {
    /// Fails unless the verdict matches `expected`.
    pub fn expect(&self, expected: NernstClass) -> Result<()> {
        if self.classification == expected {
            Ok(())
        } else {
            Err(CasimirError::InvalidInput(format!(
                "expected {expected}, got {} (S0 = {:e} ± {:e})",
                self.classification, self.extrapolated, self.uncertainty
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frequency_ratio_validation() {
        assert!(FrequencyRatio::new(0.0).is_err());
        assert!(FrequencyRatio::new(f64::NAN).is_err());
        let r = FrequencyRatio::from_plasma(1.37e16, 1e-6).unwrap();
        assert_relative_eq!(r.value(), 1.37e16 * 2e-6 / LIGHT_SPEED, max_relative = 1e-15);
    }

    #[test]
    fn drude_zero_temperature_entropy_frozen() {
        // Independent quadrature to y = 200 (mpmath, 30 digits).
        let s = nernst_entropy_drude(FrequencyRatio::new(20.0).unwrap(), 1e-6).unwrap();
        assert_relative_eq!(s, -2.295_101_717_601e-13, max_relative = 1e-9);
    }

    #[test]
    fn drude_entropy_vanishes_for_small_ratio() {
        let s = nernst_entropy_drude(FrequencyRatio::new(1e-6).unwrap(), 1e-6).unwrap();
        assert!(s < 0.0 && s.abs() < 1e-22);
    }

    #[test]
    fn classical_limits() {
        let ideal = classical_free_energy(ClassicalClass::IdealMetal, 10e-6, 300.0);
        assert_relative_eq!(ideal, -1.981_023_852e-12, max_relative = 1e-6);
        let drude = classical_free_energy(ClassicalClass::DrudeClass, 10e-6, 300.0);
        assert_eq!(drude / ideal, 0.5);
        let far = classical_free_energy(ClassicalClass::IdealMetal, 20e-6, 300.0);
        assert_relative_eq!(far / ideal, 0.25, max_relative = 1e-15);
    }

    #[test]
    fn casimir_ideal_plates() {
        let (e1, p1) = ideal_metal_zero_t(1e-6);
        assert_relative_eq!(p1, -1.300_125_772_448e-3, max_relative = 1e-12);
        let (_, p_half) = ideal_metal_zero_t(0.5e-6);
        assert_relative_eq!(p_half / p1, 16.0, max_relative = 1e-14);
        assert_relative_eq!(p1, 3.0 * e1 / 1e-6, max_relative = 1e-14);
    }

    #[test]
    fn power_fit_recovers_parameters() {
        let t = [4.0, 3.0, 2.0];
        let s = t.map(|x: f64| -1.5 + 0.25 * x.powf(2.3));
        let (s0, p) = power_fit(t, s).unwrap();
        assert_relative_eq!(s0, -1.5, max_relative = 1e-10);
        assert_relative_eq!(p, 2.3, max_relative = 1e-10);
        assert!(power_fit(t, [1.0, 2.0, 1.0]).is_none());
    }

    #[test]
    fn scan_rejects_bad_ladders() {
        let pair = PlatePair::symmetric(crate::material::ResponseModel::IdealMetal).unwrap();
        let e = LifshitzEngine::default();
        assert!(nernst_scan(&e, &pair, 1e-6, &[3.0, 4.0, 2.0, 1.0]).is_err());
        assert!(nernst_scan(&e, &pair, 1e-6, &[300.0, 200.0, 100.0, 50.0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn drude_entropy_negative_and_monotone(r in 0.1f64..500.0, bump in 1.01f64..3.0) {
                let lo = nernst_entropy_drude(FrequencyRatio::new(r).unwrap(), 1e-6).unwrap();
                let hi = nernst_entropy_drude(FrequencyRatio::new(r * bump).unwrap(), 1e-6).unwrap();
                prop_assert!(lo < 0.0);
                prop_assert!(hi < lo);
            }
        }
    }
}
