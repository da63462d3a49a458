//! Physical constants (CODATA 2018 exact/recommended values, SI units).

/// Fundamental constants entering the Lifshitz free energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Boltzmann constant, J/K.
    pub boltzmann: f64,
    /// Reduced Planck constant, J·s.
    pub reduced_planck: f64,
    /// Speed of light in vacuum, m/s.
    pub light_speed: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        boltzmann: 1.380_649e-23,
        reduced_planck: 1.054_571_817e-34,
        light_speed: 299_792_458.0,
    };
}

pub const BOLTZMANN: f64 = PhysicalConstants::CODATA_2018.boltzmann;
pub const HBAR: f64 = PhysicalConstants::CODATA_2018.reduced_planck;
pub const LIGHT_SPEED: f64 = PhysicalConstants::CODATA_2018.light_speed;

/// Riemann zeta(3).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

/// One electron-volt expressed as an angular frequency, rad/s.
pub const EV_TO_RAD_PER_S: f64 = 1.519_267_448_809_510_5e15;
