//! Physical constants (CODATA 2018 exact / recommended values, SI).

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

/// Default drive wavelength when a config does not set one (Nd:YAG line).
pub const DEFAULT_WAVELENGTH: f64 = 1064e-9;
