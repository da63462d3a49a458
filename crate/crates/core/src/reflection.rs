//! Reflection coefficients on the imaginary frequency axis.
//!
//! Three routes are provided for l ≥ 1: the permittivity (Lifshitz) form, the
//! Leontovich impedance form, and the polarization-dependent "exact"
//! impedances. The l = 0 term never goes through these; it is taken from the
//! analytic limit selected by the model's [`ZeroFrequency`] tag.

use crate::constants::LIGHT_SPEED;
use crate::error::{ensure, CasimirError, Result};
use crate::material::{ImpedanceLimit, Permittivity, Response, ResponseModel, ZeroFrequency};

/// (r∥, r⊥) at one Matsubara frequency and transverse momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub r_parallel: f64,
    pub r_perpendicular: f64,
}

impl ReflectionPair {
    pub const PERFECT: ReflectionPair = ReflectionPair { r_parallel: 1.0, r_perpendicular: 1.0 };
    pub const NONE: ReflectionPair = ReflectionPair { r_parallel: 0.0, r_perpendicular: 0.0 };

    pub fn new(r_parallel: f64, r_perpendicular: f64) -> Self {
        ReflectionPair { r_parallel, r_perpendicular }
    }

    /// Componentwise product with the opposite plate.
    pub fn product(self, other: ReflectionPair) -> ReflectionPair {
        ReflectionPair::new(self.r_parallel * other.r_parallel, self.r_perpendicular * other.r_perpendicular)
    }
}

/// A (ξ_l, k⊥) point with q_l = √(k⊥² + ξ_l²/c²) precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavenumberPoint {
    pub matsubara_index: u64,
    pub xi: f64,
    pub k_perp: f64,
    pub q: f64,
}

impl WavenumberPoint {
    pub fn new(matsubara_index: u64, xi: f64, k_perp: f64) -> Result<Self> {
        ensure(xi.is_finite() && xi >= 0.0, || format!("frequency must be >= 0, got {xi}"))?;
        ensure(k_perp.is_finite() && k_perp >= 0.0, || format!("k_perp must be >= 0, got {k_perp}"))?;
        let q = k_perp.hypot(xi / LIGHT_SPEED);
        Ok(WavenumberPoint { matsubara_index, xi, k_perp, q })
    }

    /// Builds the point from q directly; k⊥ is recovered as √(q² − ξ²/c²).
    pub(crate) fn from_q(matsubara_index: u64, xi: f64, q: f64) -> Self {
        let kx = xi / LIGHT_SPEED;
        let k_perp = ((q - kx) * (q + kx)).max(0.0).sqrt();
        WavenumberPoint { matsubara_index, xi, k_perp, q }
    }

    /// k_l = √(k⊥² + ε ξ²/c²) = √(q² + (ε − 1) ξ²/c²).
    pub fn k_medium(&self, eps: f64) -> f64 {
        let kx = self.xi / LIGHT_SPEED;
        (self.q * self.q + (eps - 1.0) * kx * kx).sqrt()
    }

    fn require_nonzero_frequency(&self) -> Result<()> {
        if self.matsubara_index == 0 || self.xi == 0.0 {
            Err(CasimirError::ZeroFrequency)
        } else {
            Ok(())
        }
    }
}

/// Route used for l ≥ 1 reflection coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReflectionScheme {
    LifshitzPermittivity,
    LeontovichImpedance,
    ExactImpedance,
}

impl ReflectionScheme {
    pub fn name(self) -> &'static str {
        match self {
            ReflectionScheme::LifshitzPermittivity => "lifshitz",
            ReflectionScheme::LeontovichImpedance => "leontovich",
            ReflectionScheme::ExactImpedance => "exact-impedance",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lifshitz" => Ok(ReflectionScheme::LifshitzPermittivity),
            "leontovich" => Ok(ReflectionScheme::LeontovichImpedance),
            "exact-impedance" | "exact" => Ok(ReflectionScheme::ExactImpedance),
            other => Err(CasimirError::InvalidInput(format!("unknown reflection scheme '{other}'"))),
        }
    }

    pub fn supports(self, model: &ResponseModel) -> bool {
        match self {
            ReflectionScheme::LeontovichImpedance => true,
            _ => model.exposes_permittivity(),
        }
    }

    /// Reflection for a model response already evaluated at `point.xi`.
    pub fn reflect(self, response: Response, point: &WavenumberPoint) -> Result<ReflectionPair> {
        match (self, response) {
            (_, Response::PerfectConductor) => {
                point.require_nonzero_frequency()?;
                Ok(ReflectionPair::PERFECT)
            }
            (ReflectionScheme::LifshitzPermittivity, Response::Permittivity(eps)) => {
                lifshitz_reflection(Permittivity::Finite(eps), point)
            }
            (ReflectionScheme::ExactImpedance, Response::Permittivity(eps)) => {
                exact_impedance_reflection(1.0 / eps.sqrt(), eps, point)
            }
            (ReflectionScheme::LeontovichImpedance, r) => impedance_reflection(r.impedance(), point),
            (scheme, Response::Impedance(_)) => Err(CasimirError::UnsupportedScheme {
                model: "impedance-only",
                scheme: scheme.name(),
            }),
        }
    }
}

/// Lifshitz coefficients r∥ = (εq − k)/(εq + k), r⊥ = (k − q)/(k + q).
pub fn lifshitz_reflection(eps: Permittivity, point: &WavenumberPoint) -> Result<ReflectionPair> {
    point.require_nonzero_frequency()?;
    let eps = match eps {
        Permittivity::Infinite => return Ok(ReflectionPair::PERFECT),
        Permittivity::Finite(e) => e,
    };
    ensure(eps.is_finite() && eps >= 1.0, || format!("permittivity must be finite and >= 1, got {eps}"))?;
    let q = point.q;
    let k = point.k_medium(eps);
    let excess = eps - 1.0;
    let (r_par, r_perp) = if excess < 1e-3 {
        // Cancellation-free forms for nearly transparent media:
        //   ε²q² − k² = (ε − 1)(εq² + k⊥²),  k² − q² = (ε − 1)ξ²/c².
        let kx = point.xi / LIGHT_SPEED;
        let kp2 = point.k_perp * point.k_perp;
        (
            excess * (eps * q * q + kp2) / (eps * q + k).powi(2),
            excess * kx * kx / (k + q).powi(2),
        )
    } else {
        ((eps * q - k) / (eps * q + k), (k - q) / (k + q))
    };
    Ok(ReflectionPair::new(r_par, r_perp))
}

/// Leontovich coefficients r∥ = (cq − Zξ)/(cq + Zξ), r⊥ = (ξ − cqZ)/(ξ + cqZ).
pub fn impedance_reflection(z: f64, point: &WavenumberPoint) -> Result<ReflectionPair> {
    point.require_nonzero_frequency()?;
    ensure(z.is_finite() && z >= 0.0, || format!("impedance must be finite and >= 0, got {z}"))?;
    Ok(polarized_impedance_reflection(z, z, point))
}

fn polarized_impedance_reflection(z_par: f64, z_perp: f64, point: &WavenumberPoint) -> ReflectionPair {
    let cq = LIGHT_SPEED * point.q;
    let xi = point.xi;
    ReflectionPair::new(
        (cq - z_par * xi) / (cq + z_par * xi),
        (xi - cq * z_perp) / (xi + cq * z_perp),
    )
}

/// Imaginary-axis form of 1 − c²k⊥²/(ω²ε) at ω = iξ: 1 + c²k⊥²/(ξ²ε) ≥ 1.
pub fn exact_impedance_factor(eps: f64, point: &WavenumberPoint) -> f64 {
    let ratio = LIGHT_SPEED * point.k_perp / point.xi;
    1.0 + ratio * ratio / eps
}

/// Polarization-dependent impedances Z∥ = Z·f^{1/2}, Z⊥ = Z·f^{−1/2} inserted
/// into the Leontovich-form coefficients.
pub fn exact_impedance_reflection(z: f64, eps: f64, point: &WavenumberPoint) -> Result<ReflectionPair> {
    point.require_nonzero_frequency()?;
    ensure(z.is_finite() && z >= 0.0, || format!("impedance must be finite and >= 0, got {z}"))?;
    if eps.is_infinite() {
        return Ok(polarized_impedance_reflection(z, z, point));
    }
    ensure(eps.is_finite() && eps > 0.0, || format!("permittivity must be > 0, got {eps}"))?;
    let root = exact_impedance_factor(eps, point).sqrt();
    Ok(polarized_impedance_reflection(z * root, z / root, point))
}

/// Analytic l = 0 limit dictated by the model's zero-frequency prescription.
pub fn zero_frequency_reflection(model: &ResponseModel, k_perp: f64) -> Result<ReflectionPair> {
    ensure(k_perp.is_finite() && k_perp >= 0.0, || format!("k_perp must be >= 0, got {k_perp}"))?;
    Ok(zero_frequency_pair(model.zero_frequency(), k_perp))
}

pub(crate) fn zero_frequency_pair(tag: ZeroFrequency, k_perp: f64) -> ReflectionPair {
    match tag {
        ZeroFrequency::Schwinger => ReflectionPair::PERFECT,
        ZeroFrequency::Drude => ReflectionPair::new(1.0, 0.0),
        ZeroFrequency::Plasma { plasma_frequency } => {
            let ck = LIGHT_SPEED * k_perp;
            let root = ck.hypot(plasma_frequency);
            // (root − ck)/(root + ck) = ωp²/(root + ck)²
            ReflectionPair::new(1.0, (plasma_frequency / (root + ck)).powi(2))
        }
        ZeroFrequency::Impedance(ImpedanceLimit::InfraredOptics { plasma_frequency }) => {
            let ck = LIGHT_SPEED * k_perp;
            ReflectionPair::new(1.0, (plasma_frequency - ck) / (plasma_frequency + ck))
        }
        ZeroFrequency::Impedance(ImpedanceLimit::SkinEffect) => ReflectionPair::PERFECT,
        ZeroFrequency::Transparent => ReflectionPair::NONE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::DrudeParameters;
    use approx::assert_relative_eq;

    const WP: f64 = 1.37e16;

    fn point(xi: f64, k: f64) -> WavenumberPoint {
        WavenumberPoint::new(1, xi, k).unwrap()
    }

    #[test]
    fn vacuum_does_not_reflect() {
        let r = lifshitz_reflection(Permittivity::Finite(1.0), &point(1e14, 3e5)).unwrap();
        assert_eq!(r, ReflectionPair::NONE);
    }

    #[test]
    fn infinite_permittivity_reflects_perfectly() {
        let p = point(1e14, 3e5);
        assert_eq!(lifshitz_reflection(Permittivity::Infinite, &p).unwrap(), ReflectionPair::PERFECT);
        let r = lifshitz_reflection(Permittivity::Finite(1e30), &p).unwrap();
        assert_relative_eq!(r.r_parallel, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.r_perpendicular, 1.0, max_relative = 1e-12);
        let e = exact_impedance_reflection(0.0, f64::INFINITY, &p).unwrap();
        assert_eq!(e, ReflectionPair::PERFECT);
    }

    #[test]
    fn lifshitz_at_eps_two_on_light_line() {
        // k⊥ = ξ/c: q = √2 ξ/c, k = √3 ξ/c, evaluated independently.
        let xi = 2.0e14;
        let p = point(xi, xi / LIGHT_SPEED);
        let r = lifshitz_reflection(Permittivity::Finite(2.0), &p).unwrap();
        let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
        assert_relative_eq!(r.r_parallel, (2.0 * s2 - s3) / (2.0 * s2 + s3), max_relative = 1e-14);
        assert_relative_eq!(r.r_perpendicular, (s3 - s2) / (s3 + s2), max_relative = 1e-14);
        assert_relative_eq!(r.r_parallel, 0.240_408_205_773_457_6, max_relative = 1e-12);
        assert_relative_eq!(r.r_perpendicular, 0.101_020_514_433_644, max_relative = 1e-12);
    }

    #[test]
    fn zero_index_is_rejected() {
        let p = WavenumberPoint::new(0, 0.0, 1e6).unwrap();
        assert_eq!(lifshitz_reflection(Permittivity::Finite(2.0), &p), Err(CasimirError::ZeroFrequency));
        assert_eq!(impedance_reflection(0.1, &p), Err(CasimirError::ZeroFrequency));
        assert_eq!(exact_impedance_reflection(0.1, 100.0, &p), Err(CasimirError::ZeroFrequency));
    }

    #[test]
    fn impedance_limits() {
        let p = point(1e14, 3e5);
        assert_eq!(impedance_reflection(0.0, &p).unwrap(), ReflectionPair::PERFECT);
        let normal = point(1e14, 0.0);
        let r = impedance_reflection(1.0, &normal).unwrap();
        assert!(r.r_parallel.abs() < 1e-15 && r.r_perpendicular.abs() < 1e-15);
    }

    #[test]
    fn exact_impedance_at_normal_incidence_is_leontovich() {
        let p = point(5e14, 0.0);
        let z = 0.03;
        assert_eq!(exact_impedance_reflection(z, 1.0 / (z * z), &p).unwrap(), impedance_reflection(z, &p).unwrap());
    }

    #[test]
    fn leontovich_close_to_lifshitz_for_large_eps() {
        // ε ≥ 100 and ck⊥ ≤ ξ√ε/10: agreement within 1%.
        for &eps in &[100.0, 1e3, 1e5] {
            for frac in [0.0, 0.05, 0.1] {
                let xi = 1e14;
                let k = frac * xi * f64::sqrt(eps) / LIGHT_SPEED;
                let p = point(xi, k);
                let a = lifshitz_reflection(Permittivity::Finite(eps), &p).unwrap();
                let b = impedance_reflection(1.0 / f64::sqrt(eps), &p).unwrap();
                assert!((a.r_parallel - b.r_parallel).abs() <= 0.01 * a.r_parallel.abs().max(1e-300));
                assert!((a.r_perpendicular - b.r_perpendicular).abs() <= 0.01 * a.r_perpendicular.abs());
            }
        }
    }

    #[test]
    fn zero_frequency_table() {
        let drude = ResponseModel::drude(DrudeParameters::gold(), 300.0).unwrap();
        assert_eq!(zero_frequency_reflection(&drude, 1e7).unwrap(), ReflectionPair::new(1.0, 0.0));
        let plasma = ResponseModel::plasma(WP).unwrap();
        assert_eq!(zero_frequency_reflection(&plasma, 0.0).unwrap(), ReflectionPair::PERFECT);
        let k = 1e7;
        let ck = LIGHT_SPEED * k;
        let root = (ck * ck + WP * WP).sqrt();
        let r = zero_frequency_reflection(&plasma, k).unwrap();
        assert_relative_eq!(r.r_perpendicular, (root - ck) / (root + ck), max_relative = 1e-14);
        let ir = ResponseModel::infrared_optics(WP).unwrap();
        assert_eq!(zero_frequency_reflection(&ir, WP / LIGHT_SPEED).unwrap(), ReflectionPair::new(1.0, 0.0));
        let skin = ResponseModel::normal_skin(DrudeParameters::gold(), 300.0).unwrap();
        assert_eq!(zero_frequency_reflection(&skin, 1e7).unwrap(), ReflectionPair::PERFECT);
        assert_eq!(zero_frequency_reflection(&ResponseModel::IdealMetal, 1e7).unwrap(), ReflectionPair::PERFECT);
    }

    #[test]
    fn plasma_zero_frequency_tends_to_ideal() {
        let k = 1e7;
        let mut prev = 0.0;
        for wp in [1e15, 1e17, 1e19, 1e21] {
            let r = zero_frequency_reflection(&ResponseModel::plasma(wp).unwrap(), k).unwrap().r_perpendicular;
            assert!(r > prev);
            prev = r;
        }
        assert!(1.0 - prev < 1e-5);
    }

    #[test]
    fn continuity_at_zero_frequency() {
        // Plasma r⊥(ξ → 0⁺) approaches the plasma limit; Drude r⊥ approaches 0.
        let k = 5e6;
        let plasma = ResponseModel::plasma(WP).unwrap();
        let limit = zero_frequency_reflection(&plasma, k).unwrap().r_perpendicular;
        let params = DrudeParameters::new(WP, 5.32e13, 300.0, 170.0, 0.0).unwrap();
        let drude = ResponseModel::drude(params, 300.0).unwrap();
        let mut prev_plasma_gap = f64::INFINITY;
        let mut prev_drude = f64::INFINITY;
        for e in 2..=8 {
            let xi = WP * 10f64.powi(-e);
            let p = point(xi, k);
            let eps_p = plasma.permittivity_at(xi).unwrap();
            let gap = (lifshitz_reflection(eps_p, &p).unwrap().r_perpendicular - limit).abs();
            assert!(gap <= prev_plasma_gap);
            prev_plasma_gap = gap;
            let eps_d = drude.permittivity_at(xi).unwrap();
            let rd = lifshitz_reflection(eps_d, &p).unwrap().r_perpendicular;
            assert!(rd <= prev_drude);
            prev_drude = rd;
        }
        assert!(prev_plasma_gap < 1e-10 * limit);
        assert!(prev_drude < 1e-3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn exact_impedance_recovers_lifshitz(
                eps in 1.0f64..1e8, xi in 1e11f64..1e17, kc in 0.0f64..1e3
            ) {
                let p = point(xi, kc * xi / LIGHT_SPEED);
                let a = lifshitz_reflection(Permittivity::Finite(eps), &p).unwrap();
                let b = exact_impedance_reflection(1.0 / eps.sqrt(), eps, &p).unwrap();
                prop_assert!((a.r_parallel - b.r_parallel).abs() <= 1e-12 * a.r_parallel.abs().max(1e-3));
                prop_assert!((a.r_perpendicular - b.r_perpendicular).abs() <= 1e-12 * a.r_perpendicular.abs().max(1e-3));
            }

            #[test]
            fn passivity(eps in 1.0f64..1e10, xi in 1e11f64..1e17, kc in 0.0f64..1e4, z in 0.0f64..1.0) {
                let p = point(xi, kc * xi / LIGHT_SPEED);
                for r in [
                    lifshitz_reflection(Permittivity::Finite(eps), &p).unwrap(),
                    impedance_reflection(z, &p).unwrap(),
                    exact_impedance_reflection(1.0 / eps.sqrt(), eps, &p).unwrap(),
                ] {
                    prop_assert!(r.r_parallel.abs() <= 1.0 && r.r_perpendicular.abs() <= 1.0);
                }
                let l = lifshitz_reflection(Permittivity::Finite(eps), &p).unwrap();
                prop_assert!(l.r_parallel >= 0.0 && l.r_perpendicular >= 0.0);
            }

            #[test]
            fn wavenumber_invariants(xi in 0.0f64..1e17, k in 0.0f64..1e9, eps in 1.0f64..1e6) {
                let p = WavenumberPoint::new(1, xi, k).unwrap();
                prop_assert!(p.q >= k && p.q >= xi / LIGHT_SPEED);
                prop_assert!(p.k_medium(eps) >= p.q);
            }
        }
    }
}
