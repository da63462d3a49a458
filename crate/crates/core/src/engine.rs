//! Matsubara-sum evaluation of the Lifshitz free energy, its separation
//! derivative (pressure) and temperature derivative (entropy), plus the
//! T = 0 frequency-integral limit.
//!
//! The k⊥ integral of every term is taken in the variable y = 2 z q_l, so
//! that k⊥ dk⊥ = y dy / (4z²) and the exponential factor becomes e^{−y}:
//!
//! ```text
//! F = kB T/(8π z²) Σ' ∫_{y_l}^∞ y Σ_pol ln(1 − r_a r_b e^{−y}) dy,       y_l = 2 z ξ_l / c
//! P = −kB T/(8π z³) Σ' ∫_{y_l}^∞ y² Σ_pol r_a r_b / (e^{y} − r_a r_b) dy
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::constants::{BOLTZMANN, HBAR, LIGHT_SPEED};
use crate::error::{ensure, CasimirError, Result};
use crate::material::{Response, ResponseModel};
use crate::quadrature::{integrate_to_infinity, Estimate, Tolerance};
use crate::reflection::{zero_frequency_pair, ReflectionPair, ReflectionScheme, WavenumberPoint};

/// ξ_l = 2π kB T l / ħ.
pub fn matsubara_frequency(l: u64, temperature: f64) -> f64 {
    if l == 0 {
        return 0.0;
    }
    2.0 * PI * BOLTZMANN * temperature * l as f64 / HBAR
}

/// When to stop the Matsubara sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Stop after three consecutive terms below `tail_tolerance × |running sum|`.
    pub tail_tolerance: f64,
    /// Hard cap on the Matsubara index.
    pub max_terms: u64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { tail_tolerance: 1e-10, max_terms: 1_000_000 }
    }
}

/// Temperature-indexed Matsubara ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraGrid {
    pub temperature: f64,
    pub policy: TruncationPolicy,
}

impl MatsubaraGrid {
    pub fn new(temperature: f64, policy: TruncationPolicy) -> Result<Self> {
        ensure(temperature.is_finite() && temperature > 0.0, || {
            format!("temperature must be > 0, got {temperature}")
        })?;
        Ok(MatsubaraGrid { temperature, policy })
    }

    pub fn frequency(&self, l: u64) -> f64 {
        matsubara_frequency(l, self.temperature)
    }

    /// Spacing ξ_1 of the ladder.
    pub fn spacing(&self) -> f64 {
        self.frequency(1)
    }
}

/// Two plates and the reflection route used for l ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatePair {
    pub model_a: ResponseModel,
    pub model_b: ResponseModel,
    pub scheme: ReflectionScheme,
}

impl PlatePair {
    pub fn new(model_a: ResponseModel, model_b: ResponseModel, scheme: ReflectionScheme) -> Result<Self> {
        for m in [&model_a, &model_b] {
            if !scheme.supports(m) {
                return Err(CasimirError::UnsupportedScheme { model: m.name(), scheme: scheme.name() });
            }
        }
        Ok(PlatePair { model_a, model_b, scheme })
    }

    /// Identical plates with the model's natural route: impedance models
    /// reflect through the Leontovich condition, the rest through ε.
    pub fn symmetric(model: ResponseModel) -> Result<Self> {
        let scheme = match model {
            ResponseModel::ImpedanceNormalSkin(_) | ResponseModel::ImpedanceInfraredOptics { .. } => {
                ReflectionScheme::LeontovichImpedance
            }
            _ => ReflectionScheme::LifshitzPermittivity,
        };
        Self::new(model.clone(), model, scheme)
    }

    pub fn with_scheme(&self, scheme: ReflectionScheme) -> Result<Self> {
        Self::new(self.model_a.clone(), self.model_b.clone(), scheme)
    }

    fn bind(&self, temperature: f64) -> Result<BoundPair> {
        let a = self.model_a.at_temperature(temperature)?;
        let b = if self.model_a == self.model_b { None } else { Some(self.model_b.at_temperature(temperature)?) };
        Ok(BoundPair { a, b, scheme: self.scheme })
    }
}

/// Models re-evaluated at the working temperature.
struct BoundPair {
    a: ResponseModel,
    b: Option<ResponseModel>,
    scheme: ReflectionScheme,
}

impl BoundPair {
    fn b(&self) -> &ResponseModel {
        self.b.as_ref().unwrap_or(&self.a)
    }
}

/// Converged thermodynamic quantity with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalResult {
    /// J/m² (free energy), Pa (pressure) or J/(m²·K) (entropy).
    pub value: f64,
    /// Accumulated quadrature error estimate, same units, ≥ 0.
    pub quadrature_error: f64,
    /// Number of Matsubara terms summed (largest over sub-evaluations).
    pub terms_used: u64,
    /// Estimated remainder of the truncated Matsubara sum, same units.
    pub tail_estimate: f64,
}

impl ThermalResult {
    /// Total error bound: quadrature error plus the size of the tail correction.
    pub fn error_estimate(&self) -> f64 {
        self.quadrature_error + self.tail_estimate.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    FreeEnergy,
    Pressure,
}

/// Numerical settings shared by all evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineSettings {
    pub truncation: TruncationPolicy,
    /// Accuracy of each k⊥ integral.
    pub quadrature: Tolerance,
    /// Relative step in T for the entropy derivative.
    pub entropy_step: f64,
    /// Allowed relative disagreement between the h and h/2 derivative estimates.
    pub richardson_tolerance: f64,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            truncation: TruncationPolicy::default(),
            quadrature: Tolerance::relative(1e-12),
            entropy_step: 1e-3,
            richardson_tolerance: 1e-2,
        }
    }
}

impl EngineSettings {
    /// Settings suited to differentiating F in T at low temperature.
    pub fn high_precision() -> Self {
        EngineSettings {
            truncation: TruncationPolicy { tail_tolerance: 1e-15, ..TruncationPolicy::default() },
            quadrature: Tolerance::relative(1e-13),
            ..EngineSettings::default()
        }
    }
}

/// ln(1 − A e^{−y}) for |A| ≤ 1, accurate for small y and for small A e^{−y}.
fn ln_one_minus(a: f64, y: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let x = a * (-y).exp();
    if x.abs() < 0.5 {
        (-x).ln_1p()
    } else {
        ((1.0 - a) - a * (-y).exp_m1()).ln()
    }
}

/// A / (e^{y} − A).
fn occupation(a: f64, y: f64) -> f64 {
    if a == 0.0 || y > 700.0 {
        return 0.0;
    }
    a / (y.exp_m1() + (1.0 - a))
}

fn tail_bound(quantity: Quantity, b: f64) -> f64 {
    let denom = -(-b).exp_m1();
    match quantity {
        Quantity::FreeEnergy => 2.0 * (b + 1.0) * (-b).exp() / denom,
        Quantity::Pressure => 2.0 * (b * b + 2.0 * b + 2.0) * (-b).exp() / denom,
    }
}

fn integrand(quantity: Quantity, y: f64, product: ReflectionPair) -> f64 {
    match quantity {
        Quantity::FreeEnergy => y * (ln_one_minus(product.r_parallel, y) + ln_one_minus(product.r_perpendicular, y)),
        Quantity::Pressure => y * y * (occupation(product.r_parallel, y) + occupation(product.r_perpendicular, y)),
    }
}

/// The Lifshitz free-energy engine.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LifshitzEngine {
    pub settings: EngineSettings,
}

impl LifshitzEngine {
    pub fn new(settings: EngineSettings) -> Self {
        LifshitzEngine { settings }
    }

    /// 𝓕(z, T) in J/m².
    pub fn free_energy(&self, pair: &PlatePair, z: f64, temperature: f64) -> Result<ThermalResult> {
        self.thermal(Quantity::FreeEnergy, pair, z, temperature)
    }

    /// P(z, T) = −∂𝓕/∂z in Pa.
    pub fn pressure(&self, pair: &PlatePair, z: f64, temperature: f64) -> Result<ThermalResult> {
        self.thermal(Quantity::Pressure, pair, z, temperature)
    }

    /// The l = 0 contribution alone to 𝓕(z, T).
    pub fn zero_frequency_free_energy(&self, pair: &PlatePair, z: f64, temperature: f64) -> Result<f64> {
        check_inputs(z, temperature)?;
        let bound = pair.bind(temperature)?;
        let term = self.term(Quantity::FreeEnergy, &bound, z, 0, 0.0)?;
        Ok(0.5 * term.value * BOLTZMANN * temperature / (8.0 * PI * z * z))
    }

    /// S(z, T) = −∂𝓕/∂T by central differences with one Richardson step.
    /// γ(T) is re-evaluated at every shifted temperature.
    pub fn entropy(&self, pair: &PlatePair, z: f64, temperature: f64) -> Result<ThermalResult> {
        check_inputs(z, temperature)?;
        let h = self.settings.entropy_step * temperature;
        ensure(h > 0.0 && temperature - h > 0.0, || "entropy step must keep T - h > 0".to_string())?;
        let central = |step: f64| -> Result<(f64, ThermalResult, ThermalResult)> {
            let up = self.free_energy(pair, z, temperature + step)?;
            let down = self.free_energy(pair, z, temperature - step)?;
            Ok((-(up.value - down.value) / (2.0 * step), up, down))
        };
        let (coarse, c_up, c_down) = central(h)?;
        let (fine, f_up, f_down) = central(0.5 * h)?;
        let value = fine + (fine - coarse) / 3.0;
        let richardson = (fine - coarse).abs() / 3.0;

        let parts = [c_up, c_down, f_up, f_down];
        let quad: f64 = parts.iter().map(|r| r.quadrature_error).sum::<f64>() / h;
        let tail: f64 = parts.iter().map(|r| r.tail_estimate.abs()).sum::<f64>() / h;
        if (fine - coarse).abs() > self.settings.richardson_tolerance * value.abs() + quad {
            return Err(CasimirError::StepCollapse { coarse, fine });
        }
        Ok(ThermalResult {
            value,
            quadrature_error: richardson + quad,
            terms_used: parts.iter().map(|r| r.terms_used).max().unwrap_or(0),
            tail_estimate: tail,
        })
    }

    /// 𝓕(z) at T = 0: (ħ/4π²) ∫₀^∞ dξ replaces (kB T/2π) Σ'.
    pub fn free_energy_zero_t(&self, pair: &PlatePair, z: f64) -> Result<ThermalResult> {
        self.zero_temperature(Quantity::FreeEnergy, pair, z)
    }

    /// P(z) at T = 0.
    pub fn pressure_zero_t(&self, pair: &PlatePair, z: f64) -> Result<ThermalResult> {
        self.zero_temperature(Quantity::Pressure, pair, z)
    }

    fn prefactor(quantity: Quantity, z: f64) -> f64 {
        match quantity {
            Quantity::FreeEnergy => 1.0 / (8.0 * PI * z * z),
            Quantity::Pressure => -1.0 / (8.0 * PI * z * z * z),
        }
    }

    /// ∫_{y_l}^∞ of the integrand for one Matsubara frequency.
    fn term(&self, quantity: Quantity, pair: &BoundPair, z: f64, l: u64, xi: f64) -> Result<Estimate> {
        let two_z = 2.0 * z;
        let y_min = two_z * xi / LIGHT_SPEED;
        let tol = self.settings.quadrature;
        let bound = |b: f64| tail_bound(quantity, b);

        if l == 0 {
            let (ta, tb) = (pair.a.zero_frequency(), pair.b().zero_frequency());
            let f = |y: f64| {
                let k = y / two_z;
                integrand(quantity, y, zero_frequency_pair(ta, k).product(zero_frequency_pair(tb, k)))
            };
            return integrate_to_infinity(f, 0.0, 1.0, bound, tol);
        }

        let ra: Response = pair.a.response(xi)?;
        let rb: Response = match &pair.b {
            Some(b) => b.response(xi)?,
            None => ra,
        };
        let scheme = pair.scheme;
        // Any failure is independent of k⊥, so one probe validates the whole integrand.
        let probe = WavenumberPoint::from_q(l, xi, (y_min + 1.0) / two_z);
        scheme.reflect(ra, &probe)?;
        scheme.reflect(rb, &probe)?;
        let symmetric = pair.b.is_none();
        let f = |y: f64| {
            let point = WavenumberPoint::from_q(l, xi, y / two_z);
            let a = scheme.reflect(ra, &point).expect("validated by probe");
            let product = if symmetric { a.product(a) } else { a.product(scheme.reflect(rb, &point).expect("validated by probe")) };
            integrand(quantity, y, product)
        };
        integrate_to_infinity(f, y_min, 1.0, bound, tol)
    }

    fn thermal(&self, quantity: Quantity, pair: &PlatePair, z: f64, temperature: f64) -> Result<ThermalResult> {
        check_inputs(z, temperature)?;
        let grid = MatsubaraGrid::new(temperature, self.settings.truncation)?;
        let bound = pair.bind(temperature)?;
        let scale = BOLTZMANN * temperature * Self::prefactor(quantity, z);
        let block = (rayon::current_num_threads() * 4).max(8) as u64;
        let policy = grid.policy;

        let mut sum = 0.0;
        let mut error = 0.0;
        let mut small_run = 0;
        let mut prev_term = 0.0;
        let mut start = 0u64;
        loop {
            let end = (start + block).min(policy.max_terms + 1);
            let terms: Vec<Result<Estimate>> = (start..end)
                .into_par_iter()
                .map(|l| self.term(quantity, &bound, z, l, grid.frequency(l)))
                .collect();
            for (offset, est) in terms.into_iter().enumerate() {
                let l = start + offset as u64;
                let est = est?;
                let weight = if l == 0 { 0.5 } else { 1.0 };
                let term = weight * est.value;
                sum += term;
                error += weight * est.abs_error;
                if term.abs() <= policy.tail_tolerance * sum.abs() {
                    small_run += 1;
                } else {
                    small_run = 0;
                }
                if small_run >= 3 {
                    let ratio = if prev_term != 0.0 { term / prev_term } else { 0.0 };
                    let tail = if ratio > 0.0 && ratio < 1.0 { term * ratio / (1.0 - ratio) } else { 0.0 };
                    return Ok(ThermalResult {
                        value: scale * (sum + tail),
                        quadrature_error: scale.abs() * error,
                        terms_used: l + 1,
                        tail_estimate: scale * tail,
                    });
                }
                prev_term = term;
            }
            if end > policy.max_terms {
                return Err(CasimirError::MatsubaraNonConvergence {
                    terms: end as usize,
                    last_term: scale * prev_term,
                    sum: scale * sum,
                });
            }
            start = end;
        }
    }

    fn zero_temperature(&self, quantity: Quantity, pair: &PlatePair, z: f64) -> Result<ThermalResult> {
        ensure(z.is_finite() && z > 0.0, || format!("separation must be > 0, got {z}"))?;
        let bound = pair.bind(0.0)?;
        let c_over_2z = LIGHT_SPEED / (2.0 * z);
        // Inner errors are treated as noise on the outer integrand.
        let inner_error = std::cell::Cell::new(0.0_f64);
        let failure = std::cell::RefCell::new(None);
        let g = |nu: f64| -> f64 {
            match self.term(quantity, &bound, z, 1, nu * c_over_2z) {
                Ok(est) => {
                    inner_error.set(inner_error.get().max(est.abs_error));
                    est.value
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let outer_tail = |b: f64| {
            let denom = -(-b).exp_m1();
            match quantity {
                Quantity::FreeEnergy => 2.0 * (b + 2.0) * (-b).exp() / denom,
                Quantity::Pressure => 2.0 * (b * b + 4.0 * b + 6.0) * (-b).exp() / denom,
            }
        };
        let outer_tol = Tolerance { rel: (self.settings.quadrature.rel * 100.0).max(1e-10), ..self.settings.quadrature };
        let outer = integrate_to_infinity(g, 0.0, 1.0, outer_tail, outer_tol)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        // (ħ/4π²) ∫dξ = (ħ c / 2z)/(4π²)... folded with the y-variable prefactor.
        let scale = HBAR * c_over_2z / (2.0 * PI) * Self::prefactor(quantity, z);
        Ok(ThermalResult {
            value: scale * outer.value,
            quadrature_error: scale.abs() * (outer.abs_error + inner_error.get()),
            terms_used: 0,
            tail_estimate: 0.0,
        })
    }
}

fn check_inputs(z: f64, temperature: f64) -> Result<()> {
    ensure(z.is_finite() && z > 0.0, || format!("separation must be > 0, got {z}"))?;
    ensure(temperature.is_finite() && temperature > 0.0, || format!("temperature must be > 0, got {temperature}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ZETA_3;
    use crate::material::DrudeParameters;
    use approx::assert_relative_eq;

    fn ideal() -> PlatePair {
        PlatePair::symmetric(ResponseModel::IdealMetal).unwrap()
    }

    #[test]
    fn matsubara_frequencies() {
        assert_eq!(matsubara_frequency(0, 300.0), 0.0);
        let xi1 = matsubara_frequency(1, 300.0);
        assert_relative_eq!(xi1, 2.0 * PI * 1.380_649e-23 * 300.0 / 1.054_571_817e-34, max_relative = 1e-15);
        assert_relative_eq!(xi1, 2.467_790_255_153e14, max_relative = 1e-12);
        assert_eq!(matsubara_frequency(2, 300.0), 2.0 * xi1);
    }

    #[test]
    fn ln_one_minus_is_accurate() {
        assert_relative_eq!(ln_one_minus(1.0, 1e-8), (1e-8f64).ln(), max_relative = 1e-7);
        assert_relative_eq!(ln_one_minus(0.3, 40.0), -0.3 * (-40f64).exp(), max_relative = 1e-12);
        assert_eq!(ln_one_minus(0.0, 1.0), 0.0);
    }

    #[test]
    fn vacuum_plates_do_not_interact() {
        let pair = PlatePair::symmetric(ResponseModel::Vacuum).unwrap();
        let e = LifshitzEngine::default();
        assert_eq!(e.free_energy(&pair, 1e-6, 300.0).unwrap().value, 0.0);
        assert_eq!(e.pressure(&pair, 1e-6, 300.0).unwrap().value, 0.0);
    }

    #[test]
    fn ideal_metal_classical_limit() {
        // Lifshitz sum with r = 1 at l = 0: −ζ(3) kB T / (8π z²).
        let (z, t) = (20e-6, 300.0);
        let f = LifshitzEngine::default().free_energy(&ideal(), z, t).unwrap();
        let classical = -ZETA_3 * BOLTZMANN * t / (8.0 * PI * z * z);
        assert_relative_eq!(f.value, classical, max_relative = 1e-2);
        assert!(f.value < 0.0);
    }

    #[test]
    fn ideal_metal_zero_temperature() {
        let z = 1e-6;
        let e = LifshitzEngine::default();
        let f = e.free_energy_zero_t(&ideal(), z).unwrap();
        let p = e.pressure_zero_t(&ideal(), z).unwrap();
        let hbar_c = HBAR * LIGHT_SPEED;
        assert_relative_eq!(f.value, -PI.powi(2) * hbar_c / (720.0 * z.powi(3)), max_relative = 1e-8);
        assert_relative_eq!(p.value, -PI.powi(2) * hbar_c / (240.0 * z.powi(4)), max_relative = 1e-8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let e = LifshitzEngine::default();
        assert!(e.free_energy(&ideal(), 0.0, 300.0).is_err());
        assert!(e.free_energy(&ideal(), 1e-6, 0.0).is_err());
        assert!(e.free_energy_zero_t(&ideal(), -1.0).is_err());
    }

    #[test]
    fn impedance_only_model_requires_leontovich() {
        let skin = ResponseModel::normal_skin(DrudeParameters::gold(), 300.0).unwrap();
        let err = PlatePair::new(skin.clone(), skin.clone(), ReflectionScheme::LifshitzPermittivity).unwrap_err();
        assert!(matches!(err, CasimirError::UnsupportedScheme { .. }));
        assert!(PlatePair::new(skin.clone(), skin, ReflectionScheme::LeontovichImpedance).is_ok());
    }

    #[test]
    fn hard_cap_is_reported() {
        let settings = EngineSettings {
            truncation: TruncationPolicy { tail_tolerance: 1e-10, max_terms: 5 },
            ..EngineSettings::default()
        };
        let err = LifshitzEngine::new(settings).free_energy(&ideal(), 1e-6, 1.0).unwrap_err();
        assert!(matches!(err, CasimirError::MatsubaraNonConvergence { .. }));
    }

    #[test]
    fn pressure_matches_finite_difference() {
        let e = LifshitzEngine::default();
        let plasma = PlatePair::symmetric(ResponseModel::plasma(1.37e16).unwrap()).unwrap();
        for z in [3e-7, 1e-6] {
            let h = z * 1e-4;
            let p = e.pressure(&plasma, z, 300.0).unwrap().value;
            let fd = (e.free_energy(&plasma, z - h, 300.0).unwrap().value
                - e.free_energy(&plasma, z + h, 300.0).unwrap().value)
                / (2.0 * h);
            assert_relative_eq!(p, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn dissimilar_pair_lies_between_identical_pairs() {
        let e = LifshitzEngine::default();
        let gold = ResponseModel::drude(DrudeParameters::gold(), 300.0).unwrap();
        let weak = ResponseModel::plasma(3e15).unwrap();
        let aa = e.pressure(&PlatePair::symmetric(gold.clone()).unwrap(), 5e-7, 300.0).unwrap().value;
        let bb = e.pressure(&PlatePair::symmetric(weak.clone()).unwrap(), 5e-7, 300.0).unwrap().value;
        let ab = e
            .pressure(&PlatePair::new(gold, weak, ReflectionScheme::LifshitzPermittivity).unwrap(), 5e-7, 300.0)
            .unwrap()
            .value;
        assert!(ab < 0.0);
        assert!(ab.abs() < aa.abs().max(bb.abs()) && ab.abs() > aa.abs().min(bb.abs()));
    }
}
