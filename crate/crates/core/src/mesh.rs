//! Nonuniform 1D mesh generation.
//!
//! Each layer is meshed with a geometric ladder growing from both of its
//! boundaries (contacts and heterointerfaces need sub-nanometer cells, the
//! quasi-neutral interior does not). The spacing list per layer is built as
//! ladder / uniform plateau / mirrored ladder and then scaled uniformly to
//! fit the layer thickness exactly, which preserves all adjacent-cell
//! ratios. Every layer boundary lands on a node; material changes are
//! recorded in `interface_nodes` so the solver can double the carrier
//! unknowns there.

use crate::device::DeviceStructure;
use crate::error::{Error, Result};

/// Mesh refinement parameters, lengths in cm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshConfig {
    /// Cell size at contacts and interfaces [cm]
    pub min_spacing: f64,
    /// Cell size cap in layer interiors [cm]
    pub max_spacing: f64,
    /// Geometric growth ratio between adjacent cells (must be <= 1.5)
    pub growth_ratio: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        // The interior cap must stay below the Debye length at the highest
        // doping of interest (~6 nm at 4e18 cm⁻³) or quasi-static
        // capacitance picks up cell-size wiggles as the depletion edge
        // marches through the plateau.
        Self {
            min_spacing: 0.25e-7,
            max_spacing: 1.0e-7,
            growth_ratio: 1.3,
        }
    }
}

impl MeshConfig {
    fn validate(&self) -> Result<()> {
        if self.min_spacing <= 0.0 || self.max_spacing < self.min_spacing {
            return Err(Error::config(format!(
                "mesh spacings invalid: min {} cm, max {} cm",
                self.min_spacing, self.max_spacing
            )));
        }
        if self.min_spacing > 0.5e-7 {
            return Err(Error::config(
                "min_spacing must be <= 0.5 nm at contacts and interfaces".to_string(),
            ));
        }
        if !(1.0..=1.5).contains(&self.growth_ratio) {
            return Err(Error::config(format!(
                "growth ratio {} outside (1.0, 1.5]",
                self.growth_ratio
            )));
        }
        Ok(())
    }
}

pub const MIN_NODES: usize = 100;
pub const MAX_NODES: usize = 20_000;

/// Node grid with per-element material assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    /// Node positions [cm], strictly increasing, first 0, last = stack
    /// thickness
    pub node_positions: Vec<f64>,
    /// Material (layer) index per element
    pub element_material: Vec<usize>,
    /// Node indices where the material changes (doubled carrier unknowns)
    pub interface_nodes: Vec<usize>,
}

impl Mesh1D {
    pub fn node_count(&self) -> usize {
        self.node_positions.len()
    }

    pub fn element_count(&self) -> usize {
        self.element_material.len()
    }

    /// Element width [cm].
    pub fn spacing(&self, element: usize) -> f64 {
        self.node_positions[element + 1] - self.node_positions[element]
    }

    /// Split every element in two. Preserves adjacent spacing ratios and
    /// layer boundaries; used for mesh-convergence checks.
    pub fn refined_by_splitting(&self) -> Result<Mesh1D> {
        let n = self.node_count();
        let mut pos = Vec::with_capacity(2 * n - 1);
        let mut mat = Vec::with_capacity(2 * (n - 1));
        for e in 0..n - 1 {
            let (a, b) = (self.node_positions[e], self.node_positions[e + 1]);
            pos.push(a);
            pos.push(0.5 * (a + b));
            mat.push(self.element_material[e]);
            mat.push(self.element_material[e]);
        }
        pos.push(*self.node_positions.last().unwrap());
        let interface_nodes = self.interface_nodes.iter().map(|&i| 2 * i).collect();
        let mesh = Mesh1D {
            node_positions: pos,
            element_material: mat,
            interface_nodes,
        };
        if mesh.node_count() > MAX_NODES {
            return Err(Error::config(format!(
                "refined mesh would have {} nodes (> {MAX_NODES})",
                mesh.node_count()
            )));
        }
        Ok(mesh)
    }

    /// Check the structural invariants; used by tests and after generation.
    pub fn check_invariants(&self, device: &DeviceStructure) -> Result<()> {
        let pos = &self.node_positions;
        let n = pos.len();
        if !(MIN_NODES..=MAX_NODES).contains(&n) {
            return Err(Error::config(format!("node count {n} outside bounds")));
        }
        if pos[0] != 0.0 {
            return Err(Error::config("first node must be 0".to_string()));
        }
        let total = device.total_thickness();
        if (pos[n - 1] - total).abs() > 1e-12 * total {
            return Err(Error::config("last node must equal total thickness".to_string()));
        }
        for w in pos.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::config("node positions not strictly increasing".to_string()));
            }
        }
        for i in 1..n - 1 {
            let r = self.spacing(i) / self.spacing(i - 1);
            if !(1.0 / 1.5 - 1e-9..=1.5 + 1e-9).contains(&r) {
                return Err(Error::config(format!(
                    "adjacent spacing ratio {r} at element {i} outside [1/1.5, 1.5]"
                )));
            }
        }
        // Fine spacing at contacts and material interfaces
        let fine = 0.5e-7 * (1.0 + 1e-12);
        if self.spacing(0) > fine || self.spacing(n - 2) > fine {
            return Err(Error::config("contact spacing exceeds 0.5 nm".to_string()));
        }
        for &i in &self.interface_nodes {
            if self.spacing(i - 1) > fine || self.spacing(i) > fine {
                return Err(Error::config(format!(
                    "interface spacing at node {i} exceeds 0.5 nm"
                )));
            }
        }
        // Interfaces must coincide with layer boundaries
        let boundaries = device.layer_boundaries();
        for (&i, b) in self.interface_nodes.iter().zip(boundaries.iter()) {
            if (pos[i] - b).abs() > 1e-12 * total {
                return Err(Error::config(format!(
                    "interface node {i} at {} does not match layer boundary {b}",
                    pos[i]
                )));
            }
        }
        Ok(())
    }
}

/// Build the mesh for a device. If the requested spacings would produce
/// fewer than [`MIN_NODES`] nodes the caps are tightened automatically.
pub fn build_mesh(device: &DeviceStructure, config: &MeshConfig) -> Result<Mesh1D> {
    device.validate()?;
    config.validate()?;
    let mut cfg = *config;
    for _ in 0..40 {
        let mesh = generate(device, &cfg)?;
        if mesh.node_count() >= MIN_NODES {
            if mesh.node_count() > MAX_NODES {
                return Err(Error::config(format!(
                    "mesh has {} nodes (> {MAX_NODES}); relax the refinement",
                    mesh.node_count()
                )));
            }
            mesh.check_invariants(device)?;
            return Ok(mesh);
        }
        // Too coarse for the node floor: tighten caps and retry.
        if cfg.max_spacing > 2.0 * cfg.min_spacing {
            cfg.max_spacing /= 1.5;
        } else {
            cfg.min_spacing /= 1.5;
            cfg.max_spacing /= 1.5;
        }
    }
    Err(Error::config(
        "mesh generation failed to reach the minimum node count".to_string(),
    ))
}

fn generate(device: &DeviceStructure, cfg: &MeshConfig) -> Result<Mesh1D> {
    let mut positions = vec![0.0];
    let mut materials = Vec::new();
    let mut interface_nodes = Vec::new();
    let mut x0 = 0.0;
    for (li, layer) in device.layers.iter().enumerate() {
        if layer.thickness < 2.0 * cfg.min_spacing {
            return Err(Error::config(format!(
                "layer '{}' ({:.3e} cm) thinner than two minimum spacings",
                layer.material.name, layer.thickness
            )));
        }
        let spacings = layer_spacings(layer.thickness, cfg);
        let mut x = x0;
        for s in &spacings {
            x += s;
            positions.push(x);
            materials.push(li);
        }
        // Snap the exact boundary
        let last = positions.len() - 1;
        positions[last] = x0 + layer.thickness;
        x0 += layer.thickness;
        if li + 1 < device.layers.len() {
            interface_nodes.push(last);
        }
    }
    // Interfaces between identical materials do not double unknowns but are
    // still recorded so boundaries stay mesh nodes.
    Ok(Mesh1D {
        node_positions: positions,
        element_material: materials,
        interface_nodes,
    })
}

/// Spacing list for one layer: a geometric ladder grown symmetrically from
/// both boundaries (capped at `max_spacing`) until the layer is covered,
/// then scaled down uniformly to fit exactly. Uniform scaling preserves
/// every adjacent-cell ratio and can only shrink the boundary cells.
fn layer_spacings(thickness: f64, cfg: &MeshConfig) -> Vec<f64> {
    let mut half = Vec::new();
    let mut s = cfg.min_spacing;
    let mut covered = 0.0;
    loop {
        half.push(s);
        covered += 2.0 * s;
        if covered >= thickness {
            break;
        }
        s = (s * cfg.growth_ratio).min(cfg.max_spacing);
    }
    let scale = thickness / covered;
    let mut spacings = Vec::with_capacity(2 * half.len());
    spacings.extend(half.iter().map(|s| s * scale));
    spacings.extend(half.iter().rev().map(|s| s * scale));
    spacings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{ContactSpec, DeviceStructure, Layer, DEFAULT_AREA};
    use crate::materials::MaterialRecord;

    fn slab(thickness: f64) -> DeviceStructure {
        DeviceStructure {
            name: "slab".into(),
            layers: vec![Layer::new(MaterialRecord::ga2o3(), thickness, 1e17, 0.0)],
            top_contact: ContactSpec::ohmic(),
            bottom_contact: ContactSpec::ohmic(),
            area: DEFAULT_AREA,
        }
    }

    #[test]
    fn single_layer_mesh_obeys_construction_rule() {
        let dev = slab(500.0e-7);
        let mesh = build_mesh(&dev, &MeshConfig::default()).unwrap();
        mesh.check_invariants(&dev).unwrap();
        // Fine cells at both ends, growth toward the center.
        assert!(mesh.spacing(0) <= 0.5e-7);
        assert!(mesh.spacing(mesh.element_count() - 1) <= 0.5e-7);
        let mid = mesh.element_count() / 2;
        assert!(mesh.spacing(mid) > mesh.spacing(0));
    }

    #[test]
    fn heterojunction_boundary_is_interface_node() {
        let dev = DeviceStructure::heterojunction_preset();
        let mesh = build_mesh(&dev, &MeshConfig::default()).unwrap();
        mesh.check_invariants(&dev).unwrap();
        assert_eq!(mesh.interface_nodes.len(), 1);
        let i = mesh.interface_nodes[0];
        assert!((mesh.node_positions[i] - 200.0e-7).abs() < 1e-18);
        assert_eq!(mesh.element_material[i - 1], 0);
        assert_eq!(mesh.element_material[i], 1);
    }

    #[test]
    fn finer_min_spacing_increases_node_count() {
        let dev = DeviceStructure::schottky_preset();
        let coarse = build_mesh(&dev, &MeshConfig::default()).unwrap();
        let cfg = MeshConfig {
            min_spacing: 0.1e-7,
            ..MeshConfig::default()
        };
        let fine = build_mesh(&dev, &cfg).unwrap();
        fine.check_invariants(&dev).unwrap();
        assert!(fine.node_count() > coarse.node_count());
    }

    #[test]
    fn thin_layer_rejected() {
        let dev = slab(0.3e-7);
        let err = build_mesh(&dev, &MeshConfig::default()).unwrap_err();
        assert!(err.to_string().contains("thinner"), "{err}");
    }

    #[test]
    fn node_floor_enforced_for_short_stacks() {
        // 100 nm stack would be ~45 nodes at default caps; the generator
        // must tighten until >= MIN_NODES.
        let dev = slab(100.0e-7);
        let mesh = build_mesh(&dev, &MeshConfig::default()).unwrap();
        assert!(mesh.node_count() >= MIN_NODES);
        mesh.check_invariants(&dev).unwrap();
    }

    #[test]
    fn splitting_preserves_invariants() {
        let dev = DeviceStructure::heterojunction_preset();
        let mesh = build_mesh(&dev, &MeshConfig::default()).unwrap();
        let fine = mesh.refined_by_splitting().unwrap();
        fine.check_invariants(&dev).unwrap();
        assert_eq!(fine.node_count(), 2 * mesh.node_count() - 1);
        let i = fine.interface_nodes[0];
        assert!((fine.node_positions[i] - 200.0e-7).abs() < 1e-18);
    }
}
