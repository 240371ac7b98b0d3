//! Physical constants (CODATA 2018) in the cm / s / V / eV / K unit system
//! used throughout the crate.

/// Fundamental constants bundled for explicit passing where a function is
/// meant to be auditable against hand calculations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Elementary charge [C]
    pub elementary_charge: f64,
    /// Boltzmann constant [eV/K]
    pub boltzmann: f64,
    /// Vacuum permittivity [F/cm]
    pub vacuum_permittivity: f64,
    /// Electron rest mass [kg]
    pub electron_rest_mass: f64,
    /// Planck constant [J·s]
    pub planck: f64,
}

/// Elementary charge [C]
pub const Q: f64 = 1.602_176_634e-19;
/// Boltzmann constant [eV/K]
pub const K_B: f64 = 8.617_333_262e-5;
/// Boltzmann constant [J/K]
pub const K_B_J: f64 = 1.380_649e-23;
/// Vacuum permittivity [F/cm]
pub const EPS0: f64 = 8.854_187_812_8e-14;
/// Electron rest mass [kg]
pub const M0: f64 = 9.109_383_701_5e-31;
/// Planck constant [J·s]
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant [J·s]
pub const HBAR: f64 = 1.054_571_817e-34;

impl PhysicalConstants {
    pub const fn codata() -> Self {
        Self {
            elementary_charge: Q,
            boltzmann: K_B,
            vacuum_permittivity: EPS0,
            electron_rest_mass: M0,
            planck: H,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

/// Thermal voltage kT/q [V] (numerically equal to kT in eV).
#[inline]
pub fn thermal_voltage(temperature: f64) -> f64 {
    K_B * temperature
}

/// `exp` clamped to arguments representable in f64. The clamp only engages
/// on wildly diverged Newton iterates; converged states never reach it.
#[inline]
pub fn safe_exp(x: f64) -> f64 {
    x.clamp(-680.0, 680.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_voltage_at_300k() {
        let vt = thermal_voltage(300.0);
        assert!((vt - 0.025852).abs() < 1e-6, "vt = {vt}");
    }

    #[test]
    fn constants_positive() {
        let c = PhysicalConstants::codata();
        assert!(c.elementary_charge > 0.0);
        assert!(c.boltzmann > 0.0);
        assert!(c.vacuum_permittivity > 0.0);
        assert!(c.electron_rest_mass > 0.0);
        assert!(c.planck > 0.0);
    }

    #[test]
    fn safe_exp_saturates() {
        assert!(safe_exp(1e6).is_finite());
        assert!(safe_exp(-1e6) > 0.0);
        assert_eq!(safe_exp(1.0), 1.0f64.exp());
    }
}
