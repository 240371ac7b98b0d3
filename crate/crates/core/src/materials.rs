//! Material parameter database and temperature-dependent derived quantities.
//!
//! The built-in records carry the simulation parameter set for β-Ga₂O₃ and
//! NiO (bandgap, affinity, permittivity, mobilities, effective masses,
//! saturation velocity, plus thermal properties that are stored for
//! completeness but not used by the electrical solver).
//!
//! Derived quantities:
//!   N_c,v = 2 (2π m* k T / h²)^{3/2}
//!   n_i   = sqrt(N_c N_v) exp(-E_g / 2kT)
//!   A*    = 4π q m* k² / h³
//!   E_g(T) = E_g(300 K) - α (T - 300 K)

use crate::constants::{safe_exp, thermal_voltage, H, K_B_J, M0, Q};
use crate::error::{Error, Result};

/// Supported lattice temperature range [K] for all temperature-dependent
/// material evaluations.
pub const TEMPERATURE_RANGE: (f64, f64) = (250.0, 800.0);

/// Effective density of states prefactor 2(2π m₀ k·300K / h²)^{3/2} [cm⁻³],
/// evaluated from CODATA constants. `effective_dos` reproduces it exactly.
pub const DOS_COEFF_300K: f64 = 2.509_3e19;

/// Richardson constant for m* = m₀ [A/(cm²·K²)].
pub const RICHARDSON_M0: f64 = 120.17;

/// Static and temperature-dependent properties of one semiconductor.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialRecord {
    pub name: String,
    /// Bandgap at 300 K [eV]
    pub bandgap_300k: f64,
    /// Electron affinity [eV]
    pub electron_affinity: f64,
    /// Relative dielectric constant
    pub relative_permittivity: f64,
    /// Electron mobility [cm²/(V·s)]
    pub electron_mobility: f64,
    /// Hole mobility [cm²/(V·s)]
    pub hole_mobility: f64,
    /// Electron effective mass [m₀]
    pub electron_effective_mass: f64,
    /// Hole effective mass [m₀]
    pub hole_effective_mass: f64,
    /// Electron saturation velocity [cm/s], stored but unused (constant
    /// mobility model)
    pub electron_saturation_velocity: Option<f64>,
    /// SRH electron lifetime [s]
    pub srh_lifetime_n: f64,
    /// SRH hole lifetime [s]
    pub srh_lifetime_p: f64,
    /// Linear bandgap shrinkage coefficient [eV/K]
    pub bandgap_temp_coefficient: f64,
    /// Lattice heat capacity [J/(K·cm³)], stored and unused
    pub lattice_heat_capacity: f64,
    /// Thermal conductivity [W/(cm·K)], stored and unused
    pub thermal_conductivity: f64,
}

impl MaterialRecord {
    /// β-Ga₂O₃ parameter set.
    ///
    /// Hole effective mass and SRH lifetimes are not part of the published
    /// parameter table; the defaults below (m_h* = 1.0 m₀, τ = 1 ns) are
    /// config-overridable and logged in every output header.
    pub fn ga2o3() -> Self {
        Self {
            name: "Ga2O3".to_string(),
            bandgap_300k: 5.02,
            electron_affinity: 3.618,
            relative_permittivity: 10.0,
            electron_mobility: 100.0,
            // holes in Ga2O3 are polaronic / essentially immobile; a small
            // placeholder keeps the hole continuity equation well posed
            hole_mobility: 0.1,
            electron_effective_mass: 0.28,
            hole_effective_mass: 1.0,
            electron_saturation_velocity: Some(2.0e7),
            srh_lifetime_n: 1.0e-9,
            srh_lifetime_p: 1.0e-9,
            bandgap_temp_coefficient: 3.0e-4,
            lattice_heat_capacity: 3.332,
            thermal_conductivity: 0.27,
        }
    }

    /// NiO parameter set.
    ///
    /// The published table gives only the electron mobility (50 cm²/Vs,
    /// retained for minority electrons). The acceptor density / hole
    /// mobility pair is constrained by the measured film resistivity
    /// (60 Ω·cm); the default hole mobility here pairs with the default
    /// acceptor density of the heterojunction preset to reproduce it.
    pub fn nio() -> Self {
        Self {
            name: "NiO".to_string(),
            bandgap_300k: 3.6,
            electron_affinity: 1.45,
            relative_permittivity: 11.75,
            electron_mobility: 50.0,
            hole_mobility: 0.030_6,
            electron_effective_mass: 0.121,
            hole_effective_mass: 0.8,
            electron_saturation_velocity: None,
            srh_lifetime_n: 1.0e-9,
            srh_lifetime_p: 1.0e-9,
            bandgap_temp_coefficient: 3.0e-4,
            lattice_heat_capacity: 1.67,
            thermal_conductivity: 0.33,
        }
    }

    /// Validate the record invariants.
    pub fn validate(&self) -> Result<()> {
        if self.bandgap_300k <= 0.0 {
            return Err(Error::domain(format!("{}: bandgap must be > 0", self.name)));
        }
        if self.electron_affinity <= 0.0 {
            return Err(Error::domain(format!(
                "{}: electron affinity must be > 0",
                self.name
            )));
        }
        if self.relative_permittivity < 1.0 {
            return Err(Error::domain(format!(
                "{}: relative permittivity must be >= 1",
                self.name
            )));
        }
        if self.electron_effective_mass <= 0.0 || self.hole_effective_mass <= 0.0 {
            return Err(Error::domain(format!(
                "{}: effective masses must be > 0",
                self.name
            )));
        }
        if self.electron_mobility <= 0.0 || self.hole_mobility <= 0.0 {
            return Err(Error::domain(format!(
                "{}: mobilities must be > 0",
                self.name
            )));
        }
        if self.srh_lifetime_n <= 0.0 || self.srh_lifetime_p <= 0.0 {
            return Err(Error::domain(format!(
                "{}: SRH lifetimes must be > 0",
                self.name
            )));
        }
        Ok(())
    }

    /// Absolute permittivity [F/cm].
    pub fn permittivity(&self) -> f64 {
        self.relative_permittivity * crate::constants::EPS0
    }

    /// Bandgap at temperature [eV].
    pub fn bandgap_at(&self, temperature: f64) -> Result<f64> {
        check_temperature(temperature)?;
        let eg = self.bandgap_300k - self.bandgap_temp_coefficient * (temperature - 300.0);
        if eg <= 0.0 {
            return Err(Error::domain(format!(
                "{}: bandgap collapsed to {eg} eV at {temperature} K",
                self.name
            )));
        }
        Ok(eg)
    }

    /// Conduction-band effective density of states [cm⁻³].
    pub fn nc(&self, temperature: f64) -> Result<f64> {
        effective_dos(self.electron_effective_mass, temperature)
    }

    /// Valence-band effective density of states [cm⁻³].
    pub fn nv(&self, temperature: f64) -> Result<f64> {
        effective_dos(self.hole_effective_mass, temperature)
    }

    /// Intrinsic carrier density [cm⁻³].
    pub fn intrinsic_density(&self, temperature: f64) -> Result<f64> {
        let eg = self.bandgap_at(temperature)?;
        let nc = self.nc(temperature)?;
        let nv = self.nv(temperature)?;
        let vt = thermal_voltage(temperature);
        Ok((nc * nv).sqrt() * safe_exp(-eg / (2.0 * vt)))
    }

    /// Electron Richardson constant [A/(cm²·K²)].
    pub fn richardson_n(&self) -> Result<f64> {
        richardson_constant(self.electron_effective_mass)
    }

    /// Hole Richardson constant [A/(cm²·K²)].
    pub fn richardson_p(&self) -> Result<f64> {
        richardson_constant(self.hole_effective_mass)
    }
}

fn check_temperature(temperature: f64) -> Result<()> {
    let (lo, hi) = TEMPERATURE_RANGE;
    if !(lo..=hi).contains(&temperature) {
        return Err(Error::domain(format!(
            "temperature {temperature} K outside supported range [{lo}, {hi}] K"
        )));
    }
    Ok(())
}

/// Effective density of states N = 2(2π m* k T / h²)^{3/2} [cm⁻³].
pub fn effective_dos(mass_ratio: f64, temperature: f64) -> Result<f64> {
    if mass_ratio <= 0.0 {
        return Err(Error::domain(format!(
            "effective mass ratio must be > 0, got {mass_ratio}"
        )));
    }
    if temperature <= 0.0 {
        return Err(Error::domain(format!(
            "temperature must be > 0, got {temperature} K"
        )));
    }
    let m = mass_ratio * M0;
    // m⁻³ → cm⁻³
    let per_m3 = 2.0 * (2.0 * std::f64::consts::PI * m * K_B_J * temperature / (H * H)).powf(1.5);
    Ok(per_m3 * 1.0e-6)
}

/// Richardson constant A* = 4π q m* k² / h³ [A/(cm²·K²)].
pub fn richardson_constant(mass_ratio: f64) -> Result<f64> {
    if mass_ratio < 0.0 {
        return Err(Error::domain(format!(
            "effective mass ratio must be >= 0, got {mass_ratio}"
        )));
    }
    // A/(m²K²) → A/(cm²K²)
    let per_m2 = 4.0 * std::f64::consts::PI * Q * (mass_ratio * M0) * K_B_J * K_B_J / (H * H * H);
    Ok(per_m2 * 1.0e-4)
}

/// Built-in material database.
#[derive(Debug, Clone)]
pub struct MaterialDb {
    records: Vec<MaterialRecord>,
}

impl MaterialDb {
    pub fn builtin() -> Self {
        Self {
            records: vec![MaterialRecord::ga2o3(), MaterialRecord::nio()],
        }
    }

    /// Case-insensitive lookup by name.
    pub fn get(&self, name: &str) -> Result<&MaterialRecord> {
        self.records
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown material '{name}' (known: {})",
                    self.records
                        .iter()
                        .map(|m| m.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }

    /// Insert or replace a record (field-by-field overrides are applied by
    /// the config layer before insertion).
    pub fn upsert(&mut self, record: MaterialRecord) -> Result<()> {
        record.validate()?;
        if let Some(existing) = self
            .records
            .iter_mut()
            .find(|m| m.name.eq_ignore_ascii_case(&record.name))
        {
            *existing = record;
        } else {
            self.records.push(record);
        }
        Ok(())
    }

    pub fn records(&self) -> &[MaterialRecord] {
        &self.records
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::K_B;

    /// Independent closed-form oracle for the DOS prefactor, written out
    /// from the defining expression rather than via `effective_dos`.
    fn dos_oracle(mass_ratio: f64, t: f64) -> f64 {
        let m = mass_ratio * M0;
        2.0 * (2.0 * std::f64::consts::PI * m * K_B_J * t).powf(1.5) / (H * H * H) * 1.0e-6
    }

    #[test]
    fn table_values_round_trip() {
        let db = MaterialDb::builtin();
        let g = db.get("Ga2O3").unwrap();
        assert_eq!(g.bandgap_300k, 5.02);
        assert_eq!(g.electron_affinity, 3.618);
        assert_eq!(g.relative_permittivity, 10.0);
        assert_eq!(g.electron_mobility, 100.0);
        assert_eq!(g.electron_effective_mass, 0.28);
        assert_eq!(g.electron_saturation_velocity, Some(2.0e7));
        assert_eq!(g.lattice_heat_capacity, 3.332);
        assert_eq!(g.thermal_conductivity, 0.27);
        let n = db.get("nio").unwrap();
        assert_eq!(n.bandgap_300k, 3.6);
        assert_eq!(n.electron_affinity, 1.45);
        assert_eq!(n.relative_permittivity, 11.75);
        assert_eq!(n.electron_mobility, 50.0);
        assert_eq!(n.electron_effective_mass, 0.121);
        assert_eq!(n.lattice_heat_capacity, 1.67);
        assert_eq!(n.thermal_conductivity, 0.33);
    }

    #[test]
    fn unknown_material_is_config_error() {
        let db = MaterialDb::builtin();
        let err = db.get("unobtainium").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("unobtainium"));
    }

    #[test]
    fn bandgap_at_300k_is_table_value() {
        let g = MaterialRecord::ga2o3();
        assert_eq!(g.bandgap_at(300.0).unwrap(), 5.02);
    }

    #[test]
    fn bandgap_with_zero_coefficient_is_flat() {
        let mut g = MaterialRecord::ga2o3();
        g.bandgap_temp_coefficient = 0.0;
        for t in [250.0, 300.0, 500.0, 800.0] {
            assert_eq!(g.bandgap_at(t).unwrap(), 5.02);
        }
    }

    #[test]
    fn bandgap_at_683k_with_default_coefficient() {
        let g = MaterialRecord::ga2o3();
        let eg = g.bandgap_at(683.15).unwrap();
        // 5.02 - 3.0e-4 * 383.15
        assert!((eg - 4.905).abs() < 1e-3, "eg = {eg}");
    }

    #[test]
    fn bandgap_rejects_out_of_range_temperature() {
        let g = MaterialRecord::ga2o3();
        for t in [100.0, 249.9, 800.1, 2000.0] {
            let err = g.bandgap_at(t).unwrap_err();
            assert!(err.to_string().contains("250"), "{err}");
            assert!(err.to_string().contains("800"), "{err}");
        }
    }

    #[test]
    fn effective_dos_reference_values() {
        let n = effective_dos(1.0, 300.0).unwrap();
        assert!((n - 2.5093e19).abs() / 2.5093e19 < 1e-3, "n = {n:e}");
        assert!((n - dos_oracle(1.0, 300.0)).abs() / n < 1e-12);

        let n_ga = effective_dos(0.28, 300.0).unwrap();
        assert!((n_ga - 3.72e18).abs() / 3.72e18 < 1e-3, "n_ga = {n_ga:e}");
    }

    #[test]
    fn effective_dos_power_laws_exact() {
        // T^{3/2}: doubling T multiplies by 2√2. m^{3/2} likewise.
        let base = effective_dos(0.28, 300.0).unwrap();
        let hot = effective_dos(0.28, 600.0).unwrap();
        assert!((hot / base - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
        let heavy = effective_dos(1.12, 300.0).unwrap();
        assert!((heavy / base - 8.0).abs() < 1e-12); // (4x mass)^{3/2}
    }

    #[test]
    fn effective_dos_rejects_nonpositive() {
        assert!(effective_dos(0.0, 300.0).is_err());
        assert!(effective_dos(-1.0, 300.0).is_err());
        assert!(effective_dos(0.28, 0.0).is_err());
    }

    #[test]
    fn richardson_reference_values() {
        let a0 = richardson_constant(1.0).unwrap();
        assert!((a0 - 120.17).abs() / 120.17 < 2e-3, "a0 = {a0}");
        let a_ga = richardson_constant(0.28).unwrap();
        assert!((a_ga - 33.6).abs() / 33.6 < 2e-3, "a_ga = {a_ga}");
        assert_eq!(richardson_constant(0.0).unwrap(), 0.0);
        assert!(richardson_constant(-0.1).is_err());
    }

    #[test]
    fn intrinsic_density_ga2o3_order_of_magnitude() {
        let g = MaterialRecord::ga2o3();
        let ni = g.intrinsic_density(300.0).unwrap();
        assert!(
            (1e-24..1e-23).contains(&ni),
            "n_i(300 K) = {ni:e} outside expected decade"
        );
        // Independent evaluation
        let nc = dos_oracle(0.28, 300.0);
        let nv = dos_oracle(1.0, 300.0);
        let expected = (nc * nv).sqrt() * (-5.02 / (2.0 * K_B * 300.0)).exp();
        assert!((ni - expected).abs() / expected < 1e-9);
    }

    #[test]
    fn intrinsic_density_with_zero_gap_is_sqrt_ncnv() {
        let mut g = MaterialRecord::ga2o3();
        g.bandgap_300k = 1e-30; // validate() requires > 0
        let ni = g.intrinsic_density(300.0).unwrap();
        let expected = (g.nc(300.0).unwrap() * g.nv(300.0).unwrap()).sqrt();
        assert!((ni - expected).abs() / expected < 1e-9);
    }

    #[test]
    fn intrinsic_density_monotone_in_temperature_and_gap() {
        let g = MaterialRecord::ga2o3();
        assert!(g.intrinsic_density(683.0).unwrap() > g.intrinsic_density(300.0).unwrap());
        let mut prev = 0.0;
        for t in [300.0, 400.0, 500.0, 600.0, 700.0] {
            let ni = g.intrinsic_density(t).unwrap();
            assert!(ni > prev);
            prev = ni;
        }
        let mut narrow = g.clone();
        narrow.bandgap_300k = 4.5;
        assert!(narrow.intrinsic_density(300.0).unwrap() > g.intrinsic_density(300.0).unwrap());
    }

    #[test]
    fn nio_film_resistivity_matches_measurement() {
        // Sheet resistivity oracle: the default (N_a, μ_p) pair used by the
        // heterojunction preset must reproduce ρ = 60 Ω·cm ± 1%, i.e.
        // 3e6 Ω/sq for the 200 nm film.
        let nio = MaterialRecord::nio();
        let na = crate::device::DEFAULT_NIO_ACCEPTOR_DENSITY;
        let rho = 1.0 / (Q * nio.hole_mobility * na);
        assert!((rho - 60.0).abs() / 60.0 < 0.01, "rho = {rho}");
        let sheet = rho / 200.0e-7;
        assert!((sheet - 3.0e6).abs() / 3.0e6 < 0.01, "sheet = {sheet:e}");
    }
}
