//! Run configuration: a single TOML file describing devices, temperature
//! points, sweeps, physics flags, solver controls and output options.
//! Command-line flags override individual fields; `show-config` prints the
//! fully resolved form with every default filled in.

use oxidiode::device::{ContactSpec, DeviceStructure};
use oxidiode::error::Error;
use oxidiode::materials::{MaterialDb, MaterialRecord};
use oxidiode::mesh::MeshConfig;
use oxidiode::solver::{Compliance, PhysicsFlags, SolverConfig};
use oxidiode::ExtractionConfig;
use serde::{Deserialize, Serialize};

pub const MIN_TEMPERATURE_K: f64 = 250.0;
pub const MAX_TEMPERATURE_K: f64 = 800.0;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub device: Vec<DeviceConfig>,
    pub sweep: SweepConfig,
    pub physics: PhysicsConfig,
    pub solver: SolverSection,
    pub extraction: ExtractionSection,
    pub output: OutputConfig,
    /// Field-by-field material overrides merged over the built-in database,
    /// keyed by material name.
    pub materials: std::collections::BTreeMap<String, MaterialOverride>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            device: vec![
                DeviceConfig::preset("schottky-fig1"),
                DeviceConfig::preset("heterojunction-fig2"),
            ],
            sweep: SweepConfig::default(),
            physics: PhysicsConfig::default(),
            solver: SolverSection::default(),
            extraction: ExtractionSection::default(),
            output: OutputConfig::default(),
            materials: Default::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceConfig {
    /// Built-in preset name (`schottky-fig1`, `heterojunction-fig2`)
    pub preset: Option<String>,
    /// Name of an inline device
    pub name: Option<String>,
    /// Inline stack, top to bottom
    pub layers: Vec<LayerConfig>,
    pub top_contact: Option<ContactConfig>,
    pub bottom_contact: Option<ContactConfig>,
    /// Pad area [cm²]; alternative to `diameter_um`
    pub area_cm2: Option<f64>,
    /// Circular pad diameter [μm]
    pub diameter_um: Option<f64>,
}

impl DeviceConfig {
    pub fn preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub material: String,
    pub thickness_nm: f64,
    #[serde(default)]
    pub donor_cm3: f64,
    #[serde(default)]
    pub acceptor_cm3: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ContactConfig {
    pub kind: String,
    #[serde(default)]
    pub work_function_ev: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Temperature points in the configured unit
    pub temperatures: Vec<f64>,
    /// "C" or "K"
    pub temperature_unit: String,
    /// I-V sweep range [V]
    pub iv_range: (f64, f64),
    /// C-V sweep range [V]
    pub cv_range: (f64, f64),
    pub cv_step: f64,
    /// Small-signal bias step of the quasi-static capacitance [V]
    pub cv_delta: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            temperatures: vec![25.0, 100.0, 200.0, 300.0, 410.0],
            temperature_unit: "C".to_string(),
            iv_range: (-3.2, 2.0),
            cv_range: (-4.0, 0.0),
            cv_step: 0.25,
            cv_delta: 0.010,
        }
    }
}

impl SweepConfig {
    /// Temperatures in kelvin, validated against the supported range.
    pub fn kelvin(&self) -> Result<Vec<f64>, Error> {
        let mut out = Vec::with_capacity(self.temperatures.len());
        for t in &self.temperatures {
            let k = match self.temperature_unit.as_str() {
                "K" | "k" => *t,
                "C" | "c" => t + 273.15,
                other => {
                    return Err(Error::config(format!(
                        "temperature_unit must be \"C\" or \"K\", got \"{other}\""
                    )))
                }
            };
            if !(MIN_TEMPERATURE_K..=MAX_TEMPERATURE_K).contains(&k) {
                return Err(Error::config(format!(
                    "temperature {k} K outside supported range [{MIN_TEMPERATURE_K}, {MAX_TEMPERATURE_K}] K"
                )));
            }
            out.push(k);
        }
        if out.is_empty() {
            return Err(Error::config("at least one temperature required".to_string()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub barrier_lowering: bool,
    pub schottky_tunneling: bool,
    pub srh: bool,
    pub tat: bool,
    pub interface_trap_density_cm2: f64,
    pub interface_trap_level_ev: f64,
    pub interface_capture_coefficient_cm3s: f64,
    pub interface_fixed_charge_cm2: f64,
    pub tunneling_mass_ratio: f64,
    pub tunneling_prefactor: f64,
    pub tat_mass_ratio: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        let f = PhysicsFlags::default();
        Self {
            barrier_lowering: f.barrier_lowering,
            schottky_tunneling: f.schottky_tunneling,
            srh: f.srh,
            tat: f.tat,
            interface_trap_density_cm2: f.interface_trap_density,
            interface_trap_level_ev: f.interface_trap_level,
            interface_capture_coefficient_cm3s: f.interface_capture_coefficient,
            interface_fixed_charge_cm2: f.interface_fixed_charge,
            tunneling_mass_ratio: f.tunneling_mass_ratio,
            tunneling_prefactor: f.tunneling_prefactor,
            tat_mass_ratio: f.tat_mass_ratio,
        }
    }
}

impl PhysicsConfig {
    pub fn to_flags(&self) -> PhysicsFlags {
        PhysicsFlags {
            barrier_lowering: self.barrier_lowering,
            schottky_tunneling: self.schottky_tunneling,
            srh: self.srh,
            tat: self.tat,
            interface_trap_density: self.interface_trap_density_cm2,
            interface_trap_level: self.interface_trap_level_ev,
            interface_capture_coefficient: self.interface_capture_coefficient_cm3s,
            interface_fixed_charge: self.interface_fixed_charge_cm2,
            tunneling_mass_ratio: self.tunneling_mass_ratio,
            tunneling_prefactor: self.tunneling_prefactor,
            tat_mass_ratio: self.tat_mass_ratio,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub potential_tolerance_v: f64,
    pub residual_tolerance: f64,
    pub max_gummel_iterations: usize,
    pub max_newton_iterations: usize,
    pub damping_limit_vt: f64,
    pub bias_step_initial_v: f64,
    pub bias_step_min_v: f64,
    /// Lumped series resistance [Ω]; negative means derive from the device
    pub series_resistance_ohm: f64,
    /// "absolute-current" (mA) or "current-density" (mA/cm²)
    pub compliance_mode: String,
    pub compliance_ma: f64,
    pub mesh_min_spacing_nm: f64,
    pub mesh_max_spacing_nm: f64,
    pub mesh_growth_ratio: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::default();
        let m = MeshConfig::default();
        Self {
            potential_tolerance_v: c.potential_tolerance,
            residual_tolerance: c.residual_tolerance,
            max_gummel_iterations: c.max_gummel_iterations,
            max_newton_iterations: c.max_newton_iterations,
            damping_limit_vt: c.damping_limit,
            bias_step_initial_v: c.bias_step_initial,
            bias_step_min_v: c.bias_step_min,
            series_resistance_ohm: -1.0,
            compliance_mode: "absolute-current".to_string(),
            compliance_ma: 1.0,
            mesh_min_spacing_nm: m.min_spacing * 1e7,
            mesh_max_spacing_nm: m.max_spacing * 1e7,
            mesh_growth_ratio: m.growth_ratio,
        }
    }
}

impl SolverSection {
    pub fn to_solver_config(&self) -> Result<SolverConfig, Error> {
        let compliance = match self.compliance_mode.as_str() {
            "absolute-current" => Compliance::AbsoluteCurrent(self.compliance_ma * 1e-3),
            "current-density" => Compliance::CurrentDensity(self.compliance_ma * 1e-3),
            "off" => Compliance::Off,
            other => {
                return Err(Error::config(format!(
                    "compliance_mode must be absolute-current, current-density or off, got \"{other}\""
                )))
            }
        };
        Ok(SolverConfig {
            potential_tolerance: self.potential_tolerance_v,
            residual_tolerance: self.residual_tolerance,
            max_gummel_iterations: self.max_gummel_iterations,
            max_newton_iterations: self.max_newton_iterations,
            damping_limit: self.damping_limit_vt,
            bias_step_initial: self.bias_step_initial_v,
            bias_step_min: self.bias_step_min_v,
            series_resistance: (self.series_resistance_ohm >= 0.0)
                .then_some(self.series_resistance_ohm),
            compliance,
            mesh: MeshConfig {
                min_spacing: self.mesh_min_spacing_nm * 1e-7,
                max_spacing: self.mesh_max_spacing_nm * 1e-7,
                growth_ratio: self.mesh_growth_ratio,
            },
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractionSection {
    pub ideality_window_a_cm2: (f64, f64),
    pub smoothing_window: usize,
    pub turn_on_threshold_a_cm2: f64,
    pub rectification_bias_v: f64,
    pub noise_floor_a_cm2: f64,
    pub mott_schottky_fraction: f64,
    /// Permittivity used when reducing measured or simulated C-V data;
    /// the simulation itself uses the material-table value
    pub cv_permittivity: f64,
}

impl Default for ExtractionSection {
    fn default() -> Self {
        let x = ExtractionConfig::default();
        Self {
            ideality_window_a_cm2: x.ideality_window,
            smoothing_window: x.smoothing_window,
            turn_on_threshold_a_cm2: x.turn_on_threshold,
            rectification_bias_v: x.rectification_bias,
            noise_floor_a_cm2: x.noise_floor,
            mott_schottky_fraction: x.mott_schottky_fraction,
            cv_permittivity: 12.4,
        }
    }
}

impl ExtractionSection {
    pub fn to_extraction_config(&self) -> ExtractionConfig {
        ExtractionConfig {
            ideality_window: self.ideality_window_a_cm2,
            smoothing_window: self.smoothing_window,
            turn_on_threshold: self.turn_on_threshold_a_cm2,
            rectification_bias: self.rectification_bias_v,
            noise_floor: self.noise_floor_a_cm2,
            mott_schottky_fraction: self.mott_schottky_fraction,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Output directory; overridden by --out and the OXIDIODE_OUTDIR
    /// environment variable
    pub directory: String,
    /// "csv" and/or "dat" (gnuplot, space-separated) curve formats
    pub formats: Vec<String>,
    /// Write solver residual histories alongside the curves
    pub diagnostics: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".to_string(),
            formats: vec!["csv".to_string()],
            diagnostics: false,
        }
    }
}

/// Optional field-by-field material override.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialOverride {
    pub bandgap_300k: Option<f64>,
    pub electron_affinity: Option<f64>,
    pub relative_permittivity: Option<f64>,
    pub electron_mobility: Option<f64>,
    pub hole_mobility: Option<f64>,
    pub electron_effective_mass: Option<f64>,
    pub hole_effective_mass: Option<f64>,
    pub electron_saturation_velocity: Option<f64>,
    pub srh_lifetime_n: Option<f64>,
    pub srh_lifetime_p: Option<f64>,
    pub bandgap_temp_coefficient: Option<f64>,
}

impl MaterialOverride {
    fn apply(&self, record: &mut MaterialRecord) {
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    record.$field = v;
                }
            };
        }
        set!(bandgap_300k);
        set!(electron_affinity);
        set!(relative_permittivity);
        set!(electron_mobility);
        set!(hole_mobility);
        set!(electron_effective_mass);
        set!(hole_effective_mass);
        set!(srh_lifetime_n);
        set!(srh_lifetime_p);
        set!(bandgap_temp_coefficient);
        if let Some(v) = self.electron_saturation_velocity {
            record.electron_saturation_velocity = Some(v);
        }
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Built-in database with the configured overrides merged in.
    pub fn material_db(&self) -> Result<MaterialDb, Error> {
        let mut db = MaterialDb::builtin();
        for (name, over) in &self.materials {
            let mut record = db.get(name)?.clone();
            over.apply(&mut record);
            db.upsert(record)?;
        }
        Ok(db)
    }

    /// Resolve every configured device to a structure.
    pub fn devices(&self) -> Result<Vec<DeviceStructure>, Error> {
        let db = self.material_db()?;
        if self.device.is_empty() {
            return Err(Error::config("at least one [[device]] required".to_string()));
        }
        let mut out = Vec::with_capacity(self.device.len());
        for cfg in &self.device {
            out.push(resolve_device(cfg, &db)?);
        }
        Ok(out)
    }

    /// The resolved config as a single-line JSON string, embedded in every
    /// output file header so runs are self-describing.
    pub fn resolved_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| "{}".to_string())
    }
}

fn resolve_device(cfg: &DeviceConfig, db: &MaterialDb) -> Result<DeviceStructure, Error> {
    if let Some(name) = &cfg.preset {
        let mut dev = DeviceStructure::preset(name)?;
        // presets may still take material overrides
        for layer in &mut dev.layers {
            layer.material = db.get(&layer.material.name)?.clone();
        }
        if let Some(area) = resolve_area(cfg)? {
            dev.area = area;
        }
        dev.validate()?;
        return Ok(dev);
    }
    if cfg.layers.is_empty() {
        return Err(Error::config(
            "device needs either a preset or an inline layer stack".to_string(),
        ));
    }
    let layers: Vec<(String, f64, f64, f64)> = cfg
        .layers
        .iter()
        .map(|l| {
            (
                l.material.clone(),
                l.thickness_nm * 1e-7,
                l.donor_cm3,
                l.acceptor_cm3,
            )
        })
        .collect();
    let top = resolve_contact(cfg.top_contact.as_ref(), "top")?;
    let bottom = resolve_contact(cfg.bottom_contact.as_ref(), "bottom")?;
    let area = resolve_area(cfg)?.unwrap_or(oxidiode::device::DEFAULT_AREA);
    DeviceStructure::from_parts(
        cfg.name.as_deref().unwrap_or("custom"),
        db,
        &layers,
        top,
        bottom,
        area,
    )
}

fn resolve_contact(cfg: Option<&ContactConfig>, which: &str) -> Result<ContactSpec, Error> {
    let Some(c) = cfg else {
        return Err(Error::config(format!(
            "inline device needs a {which}_contact"
        )));
    };
    match c.kind.as_str() {
        "ohmic" => Ok(ContactSpec::ohmic()),
        "schottky" => {
            let wf = c.work_function_ev.ok_or_else(|| {
                Error::config(format!("{which}_contact: schottky needs work_function_ev"))
            })?;
            Ok(ContactSpec::schottky(wf))
        }
        other => Err(Error::config(format!(
            "{which}_contact kind must be ohmic or schottky, got \"{other}\""
        ))),
    }
}

fn resolve_area(cfg: &DeviceConfig) -> Result<Option<f64>, Error> {
    match (cfg.area_cm2, cfg.diameter_um) {
        (Some(_), Some(_)) => Err(Error::config(
            "specify area_cm2 or diameter_um, not both".to_string(),
        )),
        (Some(a), None) => Ok(Some(a)),
        (None, Some(d)) => {
            let r_cm = d * 1e-4 / 2.0;
            Ok(Some(std::f64::consts::PI * r_cm * r_cm))
        }
        (None, None) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn kelvin_conversion_and_validation() {
        let mut sweep = SweepConfig::default();
        sweep.temperatures = vec![25.0, 410.0];
        let k = sweep.kelvin().unwrap();
        assert!((k[0] - 298.15).abs() < 1e-12);
        assert!((k[1] - 683.15).abs() < 1e-12);
        sweep.temperature_unit = "K".into();
        sweep.temperatures = vec![900.0];
        assert!(sweep.kelvin().is_err());
    }

    #[test]
    fn inline_device_resolution() {
        let toml_text = r#"
            [[device]]
            name = "custom"
            layers = [
                { material = "NiO", thickness_nm = 200.0, acceptor_cm3 = 3.4e18 },
                { material = "Ga2O3", thickness_nm = 2000.0, donor_cm3 = 4e18 },
            ]
            top_contact = { kind = "ohmic" }
            bottom_contact = { kind = "ohmic" }
            diameter_um = 200.0
        "#;
        let cfg: RunConfig = toml::from_str(toml_text).unwrap();
        let devices = cfg.devices().unwrap();
        assert_eq!(devices.len(), 1);
        assert!((devices[0].area - 3.1416e-4).abs() < 1e-8);
        assert_eq!(devices[0].layers.len(), 2);
    }

    #[test]
    fn unknown_material_rejected() {
        let toml_text = r#"
            [[device]]
            name = "bad"
            layers = [{ material = "unobtainium", thickness_nm = 100.0 }]
            top_contact = { kind = "ohmic" }
            bottom_contact = { kind = "ohmic" }
        "#;
        let cfg: RunConfig = toml::from_str(toml_text).unwrap();
        let err = cfg.devices().unwrap_err();
        assert!(err.to_string().contains("unobtainium"));
    }

    #[test]
    fn material_override_merges_field_by_field() {
        let toml_text = r#"
            [materials.Ga2O3]
            relative_permittivity = 12.4
        "#;
        let cfg: RunConfig = toml::from_str(toml_text).unwrap();
        let db = cfg.material_db().unwrap();
        let g = db.get("Ga2O3").unwrap();
        assert_eq!(g.relative_permittivity, 12.4);
        assert_eq!(g.bandgap_300k, 5.02); // untouched
    }
}
