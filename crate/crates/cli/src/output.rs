//! Deterministic CSV / JSON / gnuplot writers. Every file carries a header
//! block with the fully resolved run configuration so outputs are
//! self-describing and bit-identical across reruns of the same config.

use crate::config::RunConfig;
use oxidiode::error::Error;
use oxidiode::extraction::DiodeMetrics;
use oxidiode::smallsignal::CVCurve;
use oxidiode::solver::ProfilePoint;
use oxidiode::IVCurve;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const GENERATOR: &str = concat!("oxidiode ", env!("CARGO_PKG_VERSION"));

/// Standard header block shared by all curve files.
fn header(cfg: &RunConfig, device: &str, temperature: f64, extra: &[String]) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# generated-by: {GENERATOR}");
    let _ = writeln!(h, "# device: {device}");
    let _ = writeln!(h, "# temperature_K: {temperature:.4}");
    let _ = writeln!(
        h,
        "# compliance: {} mA ({})",
        cfg.solver.compliance_ma, cfg.solver.compliance_mode
    );
    let _ = writeln!(
        h,
        "# material-defaults: hole effective masses m_h*(Ga2O3)=1.0 m0 and m_h*(NiO)=0.8 m0 \
         are config-overridable defaults, as is the NiO acceptor/mobility pair constrained by \
         the 60 ohm-cm film resistivity"
    );
    let _ = writeln!(
        h,
        "# note: dielectric constants: the simulation uses the table value (Ga2O3 eps_r=10 \
         unless overridden); measured-style C-V reduction uses eps_r={}",
        cfg.extraction.cv_permittivity
    );
    for e in extra {
        let _ = writeln!(h, "# {e}");
    }
    let _ = writeln!(h, "# config: {}", cfg.resolved_json());
    h
}

fn fmt(v: f64) -> String {
    format!("{v:.9e}")
}

fn write_with_formats(
    base: &Path,
    stem: &str,
    header: &str,
    columns: &str,
    rows: &[Vec<String>],
    formats: &[String],
) -> Result<Vec<PathBuf>, Error> {
    let mut written = Vec::new();
    for format in formats {
        let (sep, ext) = match format.as_str() {
            "csv" => (",", "csv"),
            "dat" => (" ", "dat"),
            other => {
                return Err(Error::config(format!(
                    "unknown output format \"{other}\" (use csv or dat)"
                )))
            }
        };
        let path = base.join(format!("{stem}.{ext}"));
        let mut text = String::with_capacity(rows.len() * 64);
        text.push_str(header);
        text.push_str("# columns: ");
        text.push_str(&columns.replace(',', sep));
        text.push('\n');
        text.push_str(&columns.replace(',', sep));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(sep));
            text.push('\n');
        }
        std::fs::write(&path, text)
            .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_iv(
    cfg: &RunConfig,
    out: &Path,
    device: &str,
    curve: &IVCurve,
) -> Result<Vec<PathBuf>, Error> {
    let mut extra = Vec::new();
    if curve.partial {
        extra.push("warning: sweep partial (a continuation arm failed to converge)".to_string());
    }
    let rows: Vec<Vec<String>> = curve
        .bias
        .iter()
        .zip(&curve.current_density)
        .zip(&curve.compliance_hit)
        .map(|((v, j), c)| vec![fmt(*v), fmt(*j), (*c as u8).to_string()])
        .collect();
    write_with_formats(
        out,
        &format!("iv_{}_{:.0}K", device, curve.temperature),
        &header(cfg, device, curve.temperature, &extra),
        "voltage_V,current_A_per_cm2,compliance_hit",
        &rows,
        &cfg.output.formats,
    )
}

pub fn write_cv(
    cfg: &RunConfig,
    out: &Path,
    device: &str,
    curve: &CVCurve,
) -> Result<Vec<PathBuf>, Error> {
    let mut extra = Vec::new();
    if curve.partial {
        extra.push("warning: sweep partial (a bias point failed to converge)".to_string());
    }
    let rows: Vec<Vec<String>> = curve
        .bias
        .iter()
        .zip(&curve.capacitance_per_area)
        .map(|(v, c)| vec![fmt(*v), fmt(*c), fmt(1.0 / (c * c))])
        .collect();
    write_with_formats(
        out,
        &format!("cv_{}_{:.0}K", device, curve.temperature),
        &header(cfg, device, curve.temperature, &extra),
        "voltage_V,capacitance_F_per_cm2,inv_C2_cm4_per_F2",
        &rows,
        &cfg.output.formats,
    )
}

pub fn write_band_diagram(
    cfg: &RunConfig,
    out: &Path,
    device: &str,
    temperature: f64,
    profile: &[ProfilePoint],
) -> Result<Vec<PathBuf>, Error> {
    let rows: Vec<Vec<String>> = profile
        .iter()
        .map(|p| {
            vec![
                fmt(p.x * 1e7),
                fmt(p.ec),
                fmt(p.ev),
                fmt(p.efn),
                fmt(p.efp),
                fmt(p.psi),
                fmt(p.n),
                fmt(p.p),
            ]
        })
        .collect();
    write_with_formats(
        out,
        &format!("band_{}_{:.0}K", device, temperature),
        &header(cfg, device, temperature, &[]),
        "x_nm,Ec_eV,Ev_eV,Efn_eV,Efp_eV,psi_V,n_cm3,p_cm3",
        &rows,
        &cfg.output.formats,
    )
}

/// Residual-history diagnostic export (per solve, verbosity-gated).
pub fn write_residuals(
    out: &Path,
    stem: &str,
    histories: &[(f64, Vec<f64>)],
) -> Result<(), Error> {
    let mut text = String::from("# columns: bias_V,iteration,max_dpsi_V\nbias_V,iteration,max_dpsi_V\n");
    for (bias, hist) in histories {
        for (i, r) in hist.iter().enumerate() {
            let _ = writeln!(text, "{},{i},{}", fmt(*bias), fmt(*r));
        }
    }
    let path = out.join(format!("{stem}_residuals.csv"));
    std::fs::write(&path, text)
        .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))
}

/// Scalar metrics of one (device, temperature) run, serialized to the
/// metrics JSON.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunMetrics {
    pub device: String,
    pub temperature_k: f64,
    pub v_on_v: Option<f64>,
    pub min_ideality: Option<f64>,
    pub rectification_ratio: Option<f64>,
    /// ratio is a lower bound (reverse current floored and/or forward value
    /// taken at compliance); reports print ">=" instead of "="
    pub ratio_is_lower_bound: bool,
    pub leakage_at_minus3v_a_cm2: Option<f64>,
    pub leakage_below_noise_floor: bool,
    pub mott_schottky_vbi_v: Option<f64>,
    pub mott_schottky_doping_cm3: Option<f64>,
    pub iv_partial: bool,
    pub cv_partial: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsProvenance {
    pub ideality_window_a_cm2: (f64, f64),
    pub smoothing_window: usize,
    pub turn_on_threshold_a_cm2: f64,
    pub rectification_bias_v: f64,
    pub noise_floor_a_cm2: f64,
    pub mott_schottky_fraction: f64,
    pub cv_permittivity: f64,
    pub compliance: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsFile {
    pub generator: String,
    /// Fully resolved run configuration (single-line JSON), making the
    /// metrics file self-describing like the curve headers
    #[serde(default)]
    pub config: String,
    pub provenance: MetricsProvenance,
    pub runs: Vec<RunMetrics>,
}

impl MetricsFile {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            generator: GENERATOR.to_string(),
            config: cfg.resolved_json(),
            provenance: MetricsProvenance {
                ideality_window_a_cm2: cfg.extraction.ideality_window_a_cm2,
                smoothing_window: cfg.extraction.smoothing_window,
                turn_on_threshold_a_cm2: cfg.extraction.turn_on_threshold_a_cm2,
                rectification_bias_v: cfg.extraction.rectification_bias_v,
                noise_floor_a_cm2: cfg.extraction.noise_floor_a_cm2,
                mott_schottky_fraction: cfg.extraction.mott_schottky_fraction,
                cv_permittivity: cfg.extraction.cv_permittivity,
                compliance: format!(
                    "{} mA ({})",
                    cfg.solver.compliance_ma, cfg.solver.compliance_mode
                ),
            },
            runs: Vec::new(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::config(format!("metrics serialization failed: {e}")))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }
}

pub fn run_metrics(
    device: &str,
    metrics: &DiodeMetrics,
    iv_partial: bool,
    cv_partial: bool,
) -> RunMetrics {
    RunMetrics {
        device: device.to_string(),
        temperature_k: metrics.temperature,
        v_on_v: metrics.v_on,
        min_ideality: metrics.min_ideality,
        rectification_ratio: metrics.rectification_ratio,
        ratio_is_lower_bound: metrics.ratio_floored || metrics.ratio_forward_clamped,
        leakage_at_minus3v_a_cm2: metrics.leakage_at_minus3v,
        leakage_below_noise_floor: metrics.leakage_below_floor,
        mott_schottky_vbi_v: metrics.mott_schottky_vbi,
        mott_schottky_doping_cm3: metrics.mott_schottky_density,
        iv_partial,
        cv_partial,
    }
}
