//! CODATA constants and the atomic transition used throughout.

use std::f64::consts::PI;

/// Fixed SI constants (CODATA 2018 exact values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant, J·s.
    pub h: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Speed of light, m/s.
    pub c: f64,
}

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const CODATA: PhysicalConstants = PhysicalConstants {
    h: PLANCK,
    hbar: HBAR,
    k_b: BOLTZMANN,
    c: SPEED_OF_LIGHT,
};

/// 138Ba 1S0 <-> 3P1 intercombination line, m.
pub const TRANSITION_WAVELENGTH: f64 = 791.3e-9;

/// Angular frequency (rad/s) of light with the given vacuum wavelength.
pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength
}

/// Converts a frequency in Hz to rad/s.
pub fn two_pi(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// Atomic resonance of the working transition, rad/s.
pub fn atomic_resonance() -> f64 {
    angular_frequency(TRANSITION_WAVELENGTH)
}
