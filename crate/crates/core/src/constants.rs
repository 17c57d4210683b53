//! CODATA 2018 physical constants in SI units.

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
