//! Embedded reference dataset: measured figures of merit of the two
//! reference devices, used by `compare` to grade simulation output.

/// One named scalar observation with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceEntry {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
    /// Whether the value is a lower bound (measurement-floor limited)
    pub lower_bound: bool,
    pub provenance: &'static str,
}

pub const REFERENCE: &[ReferenceEntry] = &[
    ReferenceEntry {
        name: "schottky_von_rt",
        value: 1.3,
        unit: "V",
        lower_bound: false,
        provenance: "measured forward turn-on at 0.5 A/cm2, Ni Schottky reference device, room temperature",
    },
    ReferenceEntry {
        name: "hj_von_rt",
        value: 1.6,
        unit: "V",
        lower_bound: false,
        provenance: "measured forward turn-on at 0.5 A/cm2, NiO heterojunction reference device, room temperature",
    },
    ReferenceEntry {
        name: "schottky_von_683k",
        value: 0.4,
        unit: "V",
        lower_bound: false,
        provenance: "measured forward turn-on at 0.5 A/cm2, Ni Schottky reference device, 410 C",
    },
    ReferenceEntry {
        name: "hj_von_683k",
        value: 0.8,
        unit: "V",
        lower_bound: false,
        provenance: "measured forward turn-on at 0.5 A/cm2, NiO heterojunction reference device, 410 C",
    },
    ReferenceEntry {
        name: "schottky_vbi",
        value: 1.3,
        unit: "V",
        lower_bound: false,
        provenance: "measured Mott-Schottky intercept (100 kHz C-V), Ni Schottky reference device",
    },
    ReferenceEntry {
        name: "hj_vbi",
        value: 1.9,
        unit: "V",
        lower_bound: false,
        provenance: "measured Mott-Schottky intercept (100 kHz C-V), NiO heterojunction reference device",
    },
    ReferenceEntry {
        name: "schottky_min_ideality",
        value: 1.09,
        unit: "",
        lower_bound: false,
        provenance: "measured minimum ideality factor, Ni Schottky reference device, room temperature",
    },
    ReferenceEntry {
        name: "hj_min_ideality",
        value: 2.0,
        unit: "",
        lower_bound: false,
        provenance: "measured minimum ideality factor, NiO heterojunction reference device, room temperature",
    },
    ReferenceEntry {
        name: "schottky_rectification_rt",
        value: 1.0e6,
        unit: "",
        lower_bound: false,
        provenance: "measured on/off ratio, Ni Schottky reference device, room temperature",
    },
    ReferenceEntry {
        name: "schottky_rectification_683k",
        value: 1.0e3,
        unit: "",
        lower_bound: false,
        provenance: "measured on/off ratio, Ni Schottky reference device, 410 C",
    },
    ReferenceEntry {
        name: "hj_rectification_683k",
        value: 1.0e6,
        unit: "",
        lower_bound: true,
        provenance: "measured on/off ratio, NiO heterojunction reference device, 410 C; reverse branch at the equipment noise floor",
    },
    ReferenceEntry {
        name: "ga2o3_doping",
        value: 4.0e18,
        unit: "cm^-3",
        lower_bound: false,
        provenance: "C-V apparent doping of the substrate, flat over the probed depth",
    },
];

pub fn get(name: &str) -> Option<&'static ReferenceEntry> {
    REFERENCE.iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_are_unique_and_annotated() {
        for (i, a) in REFERENCE.iter().enumerate() {
            assert!(!a.provenance.is_empty());
            for b in &REFERENCE[i + 1..] {
                assert_ne!(a.name, b.name);
            }
        }
        assert_eq!(get("hj_vbi").unwrap().value, 1.9);
        assert!(get("nope").is_none());
    }
}
