//! Diode layer stacks, contacts and vacuum-referenced band alignment.
//!
//! Layers are ordered top to bottom; the top contact sits at x = 0 and the
//! bottom (substrate) contact at the total stack thickness. Band edges are
//! referenced to vacuum through the electron affinity: E_c = -χ,
//! E_v = -(χ + E_g), so heterointerface offsets follow directly from the
//! material table.

use crate::error::{Error, Result};
use crate::materials::{MaterialDb, MaterialRecord};

/// Default acceptor density of the NiO layer in the heterojunction preset
/// [cm⁻³]. Together with the NiO default hole mobility this reproduces the
/// measured film resistivity of 60 Ω·cm (3e6 Ω/sq across 200 nm); the pair
/// is chosen so the junction depletes symmetrically (ε_p N_a ≈ ε_n N_d),
/// which is what pins interfacial recombination at the carrier crossover.
pub const DEFAULT_NIO_ACCEPTOR_DENSITY: f64 = 3.4e18;

/// Default donor density of the Ga₂O₃ substrate [cm⁻³] (C-V measured value).
pub const DEFAULT_GA2O3_DONOR_DENSITY: f64 = 4.0e18;

/// Ni work function [eV] used for the Schottky contact.
pub const NI_WORK_FUNCTION: f64 = 5.05;

/// Substrate truncation depth [cm]. Depletion in the reference devices stays
/// below ~50 nm, the rest of the substrate is folded into the lumped series
/// resistance.
pub const SUBSTRATE_THICKNESS: f64 = 2.0e-4;

/// Contact area of a circular 200 μm pad [cm²].
pub const DEFAULT_AREA: f64 = std::f64::consts::PI * 1.0e-4;

/// One layer of the stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: MaterialRecord,
    /// Thickness [cm]
    pub thickness: f64,
    /// Donor density [cm⁻³]
    pub donor_density: f64,
    /// Acceptor density [cm⁻³]
    pub acceptor_density: f64,
}

impl Layer {
    pub fn new(material: MaterialRecord, thickness: f64, nd: f64, na: f64) -> Self {
        Self {
            material,
            thickness,
            donor_density: nd,
            acceptor_density: na,
        }
    }

    /// Net doping N_d - N_a [cm⁻³].
    pub fn net_doping(&self) -> f64 {
        self.donor_density - self.acceptor_density
    }

    fn validate(&self) -> Result<()> {
        self.material.validate()?;
        if self.thickness <= 0.0 {
            return Err(Error::config(format!(
                "layer '{}': thickness must be > 0",
                self.material.name
            )));
        }
        if self.donor_density < 0.0 || self.acceptor_density < 0.0 {
            return Err(Error::config(format!(
                "layer '{}': doping densities must be >= 0",
                self.material.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    Ohmic,
    Schottky,
}

/// Contact description. `work_function` is only meaningful for Schottky
/// contacts.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSpec {
    pub kind: ContactKind,
    /// Metal work function [eV] (Schottky only)
    pub work_function: Option<f64>,
}

impl ContactSpec {
    pub fn ohmic() -> Self {
        Self {
            kind: ContactKind::Ohmic,
            work_function: None,
        }
    }

    pub fn schottky(work_function: f64) -> Self {
        Self {
            kind: ContactKind::Schottky,
            work_function: Some(work_function),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.kind == ContactKind::Schottky {
            let wf = self.work_function.ok_or_else(|| {
                Error::config("schottky contact requires a work function".to_string())
            })?;
            if !(3.0..=6.5).contains(&wf) {
                return Err(Error::config(format!(
                    "schottky work function {wf} eV outside [3.0, 6.5] eV"
                )));
            }
        }
        Ok(())
    }
}

/// The simulated diode: ordered stack, contacts, pad area.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceStructure {
    pub name: String,
    /// Top-to-bottom layer list
    pub layers: Vec<Layer>,
    pub top_contact: ContactSpec,
    pub bottom_contact: ContactSpec,
    /// Pad area [cm²]
    pub area: f64,
}

impl DeviceStructure {
    /// Vertical Ni Schottky diode on the n-type substrate (truncated to
    /// [`SUBSTRATE_THICKNESS`]): the `schottky-fig1` preset.
    pub fn schottky_preset() -> Self {
        Self {
            name: "schottky-fig1".to_string(),
            layers: vec![Layer::new(
                MaterialRecord::ga2o3(),
                SUBSTRATE_THICKNESS,
                DEFAULT_GA2O3_DONOR_DENSITY,
                0.0,
            )],
            top_contact: ContactSpec::schottky(NI_WORK_FUNCTION),
            bottom_contact: ContactSpec::ohmic(),
            area: DEFAULT_AREA,
        }
    }

    /// 200 nm p-NiO on the same substrate with an ohmic top contact: the
    /// `heterojunction-fig2` preset.
    pub fn heterojunction_preset() -> Self {
        Self {
            name: "heterojunction-fig2".to_string(),
            layers: vec![
                Layer::new(
                    MaterialRecord::nio(),
                    200.0e-7,
                    0.0,
                    DEFAULT_NIO_ACCEPTOR_DENSITY,
                ),
                Layer::new(
                    MaterialRecord::ga2o3(),
                    SUBSTRATE_THICKNESS,
                    DEFAULT_GA2O3_DONOR_DENSITY,
                    0.0,
                ),
            ],
            top_contact: ContactSpec::ohmic(),
            bottom_contact: ContactSpec::ohmic(),
            area: DEFAULT_AREA,
        }
    }

    /// Look up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "schottky-fig1" => Ok(Self::schottky_preset()),
            "heterojunction-fig2" => Ok(Self::heterojunction_preset()),
            other => Err(Error::config(format!(
                "unknown device preset '{other}' (known: schottky-fig1, heterojunction-fig2)"
            ))),
        }
    }

    /// Build a device from named materials.
    pub fn from_parts(
        name: &str,
        db: &MaterialDb,
        layers: &[(String, f64, f64, f64)],
        top: ContactSpec,
        bottom: ContactSpec,
        area: f64,
    ) -> Result<Self> {
        let mut out = Vec::with_capacity(layers.len());
        for (mat, thickness, nd, na) in layers {
            out.push(Layer::new(db.get(mat)?.clone(), *thickness, *nd, *na));
        }
        let dev = Self {
            name: name.to_string(),
            layers: out,
            top_contact: top,
            bottom_contact: bottom,
            area,
        };
        dev.validate()?;
        Ok(dev)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::config("device needs at least one layer".to_string()));
        }
        for layer in &self.layers {
            layer.validate()?;
        }
        let total = self.total_thickness();
        if total > 100.0e-4 {
            return Err(Error::config(format!(
                "total stack thickness {total} cm exceeds 100 μm"
            )));
        }
        if self.area <= 0.0 {
            return Err(Error::config("area must be > 0".to_string()));
        }
        self.top_contact.validate()?;
        self.bottom_contact.validate()?;
        Ok(())
    }

    /// Total stack thickness [cm].
    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Cumulative layer boundary positions, excluding x = 0, including the
    /// total thickness [cm].
    pub fn layer_boundaries(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.layers
            .iter()
            .map(|l| {
                acc += l.thickness;
                acc
            })
            .collect()
    }

    /// Vacuum-referenced band alignment at the given temperature.
    pub fn band_alignment(&self, temperature: f64) -> Result<BandAlignment> {
        self.validate()?;
        let mut layers = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let eg = l.material.bandgap_at(temperature)?;
            let chi = l.material.electron_affinity;
            layers.push(LayerBands {
                material: l.material.name.clone(),
                ec: -chi,
                ev: -(chi + eg),
            });
        }
        let mut interfaces = Vec::new();
        for (idx, pair) in layers.windows(2).enumerate() {
            let (top, bot) = (&pair[0], &pair[1]);
            let delta_ec = top.ec - bot.ec;
            let delta_ev = top.ev - bot.ev;
            interfaces.push(InterfaceOffsets {
                between: (idx, idx + 1),
                delta_ec,
                delta_ev,
                kind: classify_alignment(top, bot),
            });
        }
        let barrier = match (&self.top_contact.kind, self.layers.first()) {
            (ContactKind::Schottky, Some(first)) => self
                .top_contact
                .work_function
                .map(|wf| wf - first.material.electron_affinity),
            _ => None,
        };
        Ok(BandAlignment {
            temperature,
            layers,
            interfaces,
            schottky_barrier: barrier,
        })
    }
}

/// Vacuum-referenced band edges of one layer [eV].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerBands {
    pub material: String,
    pub ec: f64,
    pub ev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentKind {
    /// Type-I: one gap nested inside the other
    Straddling,
    /// Type-II: both edges of one side above the other
    Staggered,
    /// Type-III: valence band of one side above the conduction band of the
    /// other
    Broken,
}

/// Band-edge discontinuities across one interface, top layer minus bottom
/// layer: ΔE_c = E_c(top) - E_c(bottom), ΔE_v = E_v(top) - E_v(bottom).
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceOffsets {
    pub between: (usize, usize),
    pub delta_ec: f64,
    pub delta_ev: f64,
    pub kind: AlignmentKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandAlignment {
    pub temperature: f64,
    pub layers: Vec<LayerBands>,
    pub interfaces: Vec<InterfaceOffsets>,
    /// φ_B = Φ_M - χ for a Schottky top contact [eV]
    pub schottky_barrier: Option<f64>,
}

fn classify_alignment(a: &LayerBands, b: &LayerBands) -> AlignmentKind {
    if a.ev > b.ec || b.ev > a.ec {
        AlignmentKind::Broken
    } else if (a.ec > b.ec) == (a.ev > b.ev) && a.ec != b.ec {
        AlignmentKind::Staggered
    } else {
        AlignmentKind::Straddling
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        DeviceStructure::schottky_preset().validate().unwrap();
        DeviceStructure::heterojunction_preset().validate().unwrap();
        assert!(DeviceStructure::preset("nope").is_err());
    }

    #[test]
    fn default_area_is_200um_pad() {
        assert!((DEFAULT_AREA - 3.1416e-4).abs() < 1e-8);
    }

    #[test]
    fn nio_on_ga2o3_offsets() {
        let dev = DeviceStructure::heterojunction_preset();
        let al = dev.band_alignment(300.0).unwrap();
        let iface = &al.interfaces[0];
        assert!((iface.delta_ec - 2.168).abs() < 1e-12, "{}", iface.delta_ec);
        assert!((iface.delta_ev - 3.588).abs() < 1e-12, "{}", iface.delta_ev);
        assert_eq!(iface.kind, AlignmentKind::Staggered);
    }

    #[test]
    fn same_material_interface_is_degenerate() {
        let g = MaterialRecord::ga2o3();
        let dev = DeviceStructure {
            name: "homo".into(),
            layers: vec![
                Layer::new(g.clone(), 1e-4, 1e17, 0.0),
                Layer::new(g, 1e-4, 1e15, 0.0),
            ],
            top_contact: ContactSpec::ohmic(),
            bottom_contact: ContactSpec::ohmic(),
            area: DEFAULT_AREA,
        };
        let al = dev.band_alignment(300.0).unwrap();
        assert_eq!(al.interfaces[0].delta_ec, 0.0);
        assert_eq!(al.interfaces[0].delta_ev, 0.0);
    }

    #[test]
    fn schottky_barrier_from_work_function() {
        let dev = DeviceStructure::schottky_preset();
        let al = dev.band_alignment(300.0).unwrap();
        let phi = al.schottky_barrier.unwrap();
        assert!((phi - 1.432).abs() < 1e-12, "{phi}");
    }

    #[test]
    fn offset_identity_and_swap_antisymmetry() {
        // ΔE_c - ΔE_v = E_g(top) - E_g(bottom), exactly.
        let dev = DeviceStructure::heterojunction_preset();
        for t in [300.0, 450.0, 683.15] {
            let al = dev.band_alignment(t).unwrap();
            let iface = &al.interfaces[0];
            let eg_top = dev.layers[0].material.bandgap_at(t).unwrap();
            let eg_bot = dev.layers[1].material.bandgap_at(t).unwrap();
            assert!(
                (iface.delta_ec - iface.delta_ev - (eg_top - eg_bot)).abs() < 1e-12,
                "identity violated at {t} K"
            );
        }

        let mut swapped = dev.clone();
        swapped.layers.reverse();
        let a = dev.band_alignment(300.0).unwrap();
        let b = swapped.band_alignment(300.0).unwrap();
        assert!((a.interfaces[0].delta_ec + b.interfaces[0].delta_ec).abs() < 1e-12);
        assert!((a.interfaces[0].delta_ev + b.interfaces[0].delta_ev).abs() < 1e-12);
    }

    #[test]
    fn work_function_bounds_enforced() {
        let mut dev = DeviceStructure::schottky_preset();
        dev.top_contact = ContactSpec::schottky(2.0);
        assert!(dev.validate().is_err());
        dev.top_contact = ContactSpec::schottky(7.0);
        assert!(dev.validate().is_err());
    }

    #[test]
    fn broken_alignment_detected() {
        // Artificial pair with E_v(top) above E_c(bottom)
        let mut a = MaterialRecord::ga2o3();
        a.name = "A".into();
        a.electron_affinity = 0.5;
        a.bandgap_300k = 0.4; // E_v = -0.9
        let mut b = MaterialRecord::ga2o3();
        b.name = "B".into();
        b.electron_affinity = 2.0; // E_c = -2.0
        let dev = DeviceStructure {
            name: "broken".into(),
            layers: vec![Layer::new(a, 1e-5, 1e16, 0.0), Layer::new(b, 1e-5, 1e16, 0.0)],
            top_contact: ContactSpec::ohmic(),
            bottom_contact: ContactSpec::ohmic(),
            area: DEFAULT_AREA,
        };
        let al = dev.band_alignment(300.0).unwrap();
        assert_eq!(al.interfaces[0].kind, AlignmentKind::Broken);
    }
}
