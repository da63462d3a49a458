//! Imaginary-axis response of metals: permittivity and surface impedance
//! models, the temperature-dependent Drude relaxation, and the zero-frequency
//! prescription each model carries.

use std::sync::Arc;

use crate::constants::EV_TO_RAD_PER_S;
use crate::error::{ensure, CasimirError, Result};
use crate::optical::OpticalTable;
use crate::quadrature::{integrate, Tolerance};

/// Free-electron parameters with a Bloch-Grüneisen relaxation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeParameters {
    /// ωp, rad/s.
    pub plasma_frequency: f64,
    /// γ at `reference_temperature`, rad/s.
    pub reference_relaxation: f64,
    /// K.
    pub reference_temperature: f64,
    /// Θ_D, K.
    pub debye_temperature: f64,
    /// γ(0), rad/s. Zero describes a perfect lattice.
    pub residual_relaxation: f64,
}

impl DrudeParameters {
    pub fn new(
        plasma_frequency: f64,
        reference_relaxation: f64,
        reference_temperature: f64,
        debye_temperature: f64,
        residual_relaxation: f64,
    ) -> Result<Self> {
        let p = DrudeParameters {
            plasma_frequency,
            reference_relaxation,
            reference_temperature,
            debye_temperature,
            residual_relaxation,
        };
        p.validate()?;
        Ok(p)
    }

    /// Gold-like defaults: ωp = 9.0 eV, γ = 35 meV at 300 K, Θ_D = 170 K,
    /// perfect lattice.
    pub fn gold() -> Self {
        DrudeParameters {
            plasma_frequency: 1.37e16,
            reference_relaxation: 5.32e13,
            reference_temperature: 300.0,
            debye_temperature: 170.0,
            residual_relaxation: 0.0,
        }
    }

    pub fn with_residual_relaxation(mut self, gamma0: f64) -> Result<Self> {
        self.residual_relaxation = gamma0;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        ensure(finite_pos(self.plasma_frequency), || {
            format!("plasma frequency must be > 0, got {}", self.plasma_frequency)
        })?;
        ensure(finite_pos(self.reference_relaxation), || {
            format!("reference relaxation must be > 0, got {}", self.reference_relaxation)
        })?;
        ensure(finite_pos(self.reference_temperature), || {
            format!("reference temperature must be > 0, got {}", self.reference_temperature)
        })?;
        ensure(finite_pos(self.debye_temperature), || {
            format!("Debye temperature must be > 0, got {}", self.debye_temperature)
        })?;
        ensure(
            self.residual_relaxation.is_finite()
                && self.residual_relaxation >= 0.0
                && self.residual_relaxation <= self.reference_relaxation,
            || {
                format!(
                    "residual relaxation must lie in [0, reference relaxation], got {}",
                    self.residual_relaxation
                )
            },
        )
    }

    pub fn plasma_frequency_ev(&self) -> f64 {
        self.plasma_frequency / EV_TO_RAD_PER_S
    }

    /// γ(T) = γ0 + (γ_ref − γ0)·G(T)/G(T_ref) with the n = 5 Bloch-Grüneisen
    /// shape G(T) = (T/Θ)^5 ∫_0^{Θ/T} x^5 eˣ/(eˣ − 1)² dx.
    pub fn relaxation_at(&self, temperature: f64) -> f64 {
        let temperature = temperature.max(0.0);
        if temperature == 0.0 {
            return self.residual_relaxation;
        }
        let phonon = self.reference_relaxation - self.residual_relaxation;
        let g = bloch_gruneisen_shape(temperature, self.debye_temperature);
        let g_ref = bloch_gruneisen_shape(self.reference_temperature, self.debye_temperature);
        self.residual_relaxation + phonon * g / g_ref
    }
}

/// x^5 eˣ/(eˣ − 1)² written without overflow or cancellation near 0.
fn bg_integrand(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    x.powi(5) / (x.exp_m1() * -(-x).exp_m1())
}

/// (T/Θ)^5 ∫_0^{Θ/T} x^5 eˣ/(eˣ − 1)² dx.
pub(crate) fn bloch_gruneisen_shape(temperature: f64, debye: f64) -> f64 {
    // Beyond x = 150 the integrand is below 1e-50 of its peak.
    let upper = (debye / temperature).min(150.0);
    let integral = integrate(bg_integrand, 0.0, upper, Tolerance::relative(1e-13))
        .map(|e| e.value)
        .unwrap_or_else(|_| panic!("Bloch-Grüneisen integral failed for T = {temperature}"));
    (temperature / debye).powi(5) * integral
}

/// Zero-frequency (l = 0) reflection prescription attached to a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroFrequency {
    /// ε → ∞ before l → 0: (1, 1).
    Schwinger,
    /// Drude extrapolation: (1, 0).
    Drude,
    /// Plasma extrapolation with the given ωp.
    Plasma { plasma_frequency: f64 },
    /// Leontovich impedance limit.
    Impedance(ImpedanceLimit),
    /// Non-reflecting stand-in: (0, 0).
    Transparent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImpedanceLimit {
    /// Infrared-optics impedance, r⊥ = (ωp − ck⊥)/(ωp + ck⊥).
    InfraredOptics { plasma_frequency: f64 },
    /// Normal or anomalous skin effect: (1, 1).
    SkinEffect,
}

/// Drude response bound to a temperature, with γ(T) precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeResponse {
    pub params: DrudeParameters,
    pub temperature: f64,
    pub relaxation: f64,
}

impl DrudeResponse {
    pub fn new(params: DrudeParameters, temperature: f64) -> Result<Self> {
        params.validate()?;
        ensure(temperature.is_finite() && temperature >= 0.0, || {
            format!("temperature must be >= 0, got {temperature}")
        })?;
        Ok(DrudeResponse { params, temperature, relaxation: params.relaxation_at(temperature) })
    }

    pub fn permittivity(&self, xi: f64) -> f64 {
        let wp = self.params.plasma_frequency;
        1.0 + wp * wp / (xi * (xi + self.relaxation))
    }
}

/// Tabulated optical data bound to a temperature for its Drude tail.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedResponse {
    pub table: Arc<OpticalTable>,
    pub temperature: f64,
    pub relaxation: f64,
}

/// A metal's response on the imaginary frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseModel {
    IdealMetal,
    Plasma { plasma_frequency: f64 },
    Drude(DrudeResponse),
    Tabulated(TabulatedResponse),
    /// Local normal-skin-effect impedance; permittivity is not exposed.
    ImpedanceNormalSkin(DrudeResponse),
    /// Infrared-optics impedance Z(iξ) = ξ/√(ξ² + ωp²).
    ImpedanceInfraredOptics { plasma_frequency: f64 },
    /// ε ≡ 1; reflects nothing. Used as a null model.
    Vacuum,
}

/// Permittivity outcome: ideal metals report an infinite marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Permittivity {
    Finite(f64),
    Infinite,
}

impl Permittivity {
    pub fn finite(self) -> Option<f64> {
        match self {
            Permittivity::Finite(v) => Some(v),
            Permittivity::Infinite => None,
        }
    }
}

/// What a model exposes at one imaginary frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Response {
    PerfectConductor,
    Permittivity(f64),
    Impedance(f64),
}

impl Response {
    /// Leontovich impedance, 1/√ε where ε is known.
    pub fn impedance(self) -> f64 {
        match self {
            Response::PerfectConductor => 0.0,
            Response::Permittivity(eps) => 1.0 / eps.sqrt(),
            Response::Impedance(z) => z,
        }
    }
}

fn check_frequency(xi: f64) -> Result<()> {
    ensure(xi.is_finite() && xi > 0.0, || {
        format!("imaginary frequency must be > 0 (l = 0 uses the zero-frequency prescription), got {xi}")
    })
}

impl ResponseModel {
    pub fn plasma(plasma_frequency: f64) -> Result<Self> {
        ensure(plasma_frequency.is_finite() && plasma_frequency > 0.0, || {
            format!("plasma frequency must be > 0, got {plasma_frequency}")
        })?;
        Ok(ResponseModel::Plasma { plasma_frequency })
    }

    pub fn drude(params: DrudeParameters, temperature: f64) -> Result<Self> {
        Ok(ResponseModel::Drude(DrudeResponse::new(params, temperature)?))
    }

    pub fn normal_skin(params: DrudeParameters, temperature: f64) -> Result<Self> {
        Ok(ResponseModel::ImpedanceNormalSkin(DrudeResponse::new(params, temperature)?))
    }

    pub fn infrared_optics(plasma_frequency: f64) -> Result<Self> {
        ensure(plasma_frequency.is_finite() && plasma_frequency > 0.0, || {
            format!("plasma frequency must be > 0, got {plasma_frequency}")
        })?;
        Ok(ResponseModel::ImpedanceInfraredOptics { plasma_frequency })
    }

    pub fn tabulated(table: Arc<OpticalTable>, temperature: f64) -> Result<Self> {
        ensure(temperature.is_finite() && temperature >= 0.0, || {
            format!("temperature must be >= 0, got {temperature}")
        })?;
        let relaxation = table.tail.params.relaxation_at(temperature);
        Ok(ResponseModel::Tabulated(TabulatedResponse { table, temperature, relaxation }))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ResponseModel::IdealMetal => "ideal",
            ResponseModel::Plasma { .. } => "plasma",
            ResponseModel::Drude(_) => "drude",
            ResponseModel::Tabulated(_) => "tabulated",
            ResponseModel::ImpedanceNormalSkin(_) => "impedance-normal-skin",
            ResponseModel::ImpedanceInfraredOptics { .. } => "impedance-infrared",
            ResponseModel::Vacuum => "vacuum",
        }
    }

    pub fn zero_frequency(&self) -> ZeroFrequency {
        match self {
            ResponseModel::IdealMetal => ZeroFrequency::Schwinger,
            ResponseModel::Plasma { plasma_frequency } => {
                ZeroFrequency::Plasma { plasma_frequency: *plasma_frequency }
            }
            ResponseModel::Drude(_) | ResponseModel::Tabulated(_) => ZeroFrequency::Drude,
            ResponseModel::ImpedanceNormalSkin(_) => {
                ZeroFrequency::Impedance(ImpedanceLimit::SkinEffect)
            }
            ResponseModel::ImpedanceInfraredOptics { plasma_frequency } => {
                ZeroFrequency::Impedance(ImpedanceLimit::InfraredOptics {
                    plasma_frequency: *plasma_frequency,
                })
            }
            ResponseModel::Vacuum => ZeroFrequency::Transparent,
        }
    }

    /// Same model with temperature-dependent parameters re-evaluated at `temperature`.
    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        Ok(match self {
            ResponseModel::Drude(d) => ResponseModel::drude(d.params, temperature)?,
            ResponseModel::ImpedanceNormalSkin(d) => {
                ResponseModel::normal_skin(d.params, temperature)?
            }
            ResponseModel::Tabulated(t) => {
                ResponseModel::tabulated(Arc::clone(&t.table), temperature)?
            }
            other => other.clone(),
        })
    }

    pub fn exposes_permittivity(&self) -> bool {
        !matches!(self, ResponseModel::ImpedanceNormalSkin(_))
    }

    /// Everything the model knows at imaginary frequency `xi > 0`.
    pub fn response(&self, xi: f64) -> Result<Response> {
        check_frequency(xi)?;
        Ok(match self {
            ResponseModel::IdealMetal => Response::PerfectConductor,
            ResponseModel::Plasma { plasma_frequency } => {
                Response::Permittivity(1.0 + (plasma_frequency / xi).powi(2))
            }
            ResponseModel::Drude(d) => Response::Permittivity(d.permittivity(xi)),
            ResponseModel::Tabulated(t) => {
                Response::Permittivity(t.table.permittivity_with_relaxation(xi, t.relaxation)?)
            }
            ResponseModel::ImpedanceNormalSkin(d) => {
                let wp = d.params.plasma_frequency;
                Response::Impedance(1.0 / (1.0 + wp * wp / (xi * d.relaxation)).sqrt())
            }
            ResponseModel::ImpedanceInfraredOptics { plasma_frequency } => {
                Response::Permittivity(1.0 + (plasma_frequency / xi).powi(2))
            }
            ResponseModel::Vacuum => Response::Permittivity(1.0),
        })
    }

    /// ε(iξ) for `xi > 0`.
    pub fn permittivity_at(&self, xi: f64) -> Result<Permittivity> {
        match self.response(xi)? {
            Response::PerfectConductor => Ok(Permittivity::Infinite),
            Response::Permittivity(eps) => Ok(Permittivity::Finite(eps)),
            Response::Impedance(_) => Err(CasimirError::PermittivityUndefined(self.name())),
        }
    }

    /// Z(iξ) ∈ [0, 1] for `xi > 0`; exactly 0 for the ideal metal.
    pub fn impedance_at(&self, xi: f64) -> Result<f64> {
        if let ResponseModel::ImpedanceInfraredOptics { plasma_frequency } = self {
            check_frequency(xi)?;
            return Ok(xi / xi.hypot(*plasma_frequency));
        }
        Ok(self.response(xi)?.impedance())
    }
}
