use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// CODATA 2018 reduced Planck constant, J s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// CODATA 2018 Newtonian constant of gravitation, m^3 kg^-1 s^-2.
pub const G_SI: f64 = 6.674_30e-11;
/// Speed of light in vacuum, m/s (exact).
pub const C_SI: f64 = 299_792_458.0;
/// CODATA 2018 electron mass, kg.
pub const ELECTRON_MASS_SI: f64 = 9.109_383_701_5e-31;
/// CODATA 2018 neutron mass, kg.
pub const NEUTRON_MASS_SI: f64 = 1.674_927_498_04e-27;

/// Physical constants for one species.
///
/// Dynamics tests run in natural units (`hbar = mass = 1`); the gravity
/// calculator requires SI values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct PhysicalConstants<T> {
    pub hbar: T,
    pub mass: T,
    #[serde(default = "default_g")]
    pub g: T,
    #[serde(default = "default_c")]
    pub c: T,
}

fn default_g<T: Real>() -> T {
    T::lit(G_SI)
}

fn default_c<T: Real>() -> T {
    T::lit(C_SI)
}

impl<T: Real> PhysicalConstants<T> {
    /// `hbar = mass = 1`, with SI values for `G` and `c`.
    pub fn natural() -> Self {
        Self {
            hbar: T::one(),
            mass: T::one(),
            g: default_g(),
            c: default_c(),
        }
    }

    /// SI units with the given particle mass in kg.
    pub fn si(mass: T) -> Self {
        Self {
            hbar: T::lit(HBAR_SI),
            mass,
            g: default_g(),
            c: default_c(),
        }
    }

    pub fn with_mass(mut self, mass: T) -> Self {
        self.mass = mass;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [("hbar", self.hbar), ("mass", self.mass), ("g", self.g), ("c", self.c)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(crate::Error::InvalidParameter(format!(
                    "constant `{name}` must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `hbar / mass`.
    #[inline]
    pub fn hbar_over_m(&self) -> T {
        self.hbar / self.mass
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::natural()
    }
}
