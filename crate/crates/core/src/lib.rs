//! 1D drift-diffusion simulation and characterization toolkit for
//! wide-bandgap oxide diodes: vertical Ni/β-Ga₂O₃ Schottky and
//! p-NiO/n-β-Ga₂O₃ heterojunction devices over 300-683 K.
//!
//! The crate covers:
//! * a material database with temperature-dependent derived quantities
//!   ([`materials`]),
//! * layer stacks, contacts and band alignment ([`device`]),
//! * nonuniform meshing ([`mesh`]) and the coupled Poisson /
//!   Scharfetter-Gummel continuity solver with thermionic Schottky and
//!   heterointerface boundaries, SRH recombination and trap-assisted
//!   tunneling ([`solver`]),
//! * quasi-static capacitance sweeps ([`smallsignal`]),
//! * figure-of-merit extraction from I-V / C-V curves ([`extraction`]).

pub mod constants;
pub mod device;
pub mod error;
pub mod extraction;
pub mod materials;
pub mod mesh;
pub mod smallsignal;
pub mod solver;

pub use device::{ContactKind, ContactSpec, DeviceStructure, Layer};
pub use error::{Error, Result};
pub use extraction::{DiodeMetrics, ExtractionConfig, IVCurve};
pub use materials::{MaterialDb, MaterialRecord};
pub use mesh::{Mesh1D, MeshConfig};
pub use smallsignal::CVCurve;
pub use solver::{Compliance, PhysicsFlags, Problem, SolutionState, SolverConfig};
