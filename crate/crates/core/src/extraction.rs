//! Figure-of-merit extraction from I-V and C-V curves.
//!
//! All extractors are pure functions over curve data (simulated or
//! measured); inputs are re-sorted internally so point order never matters.

use crate::constants::{thermal_voltage, EPS0, Q};
use crate::error::{Error, Result};
use crate::smallsignal::CVCurve;

/// Swept current-voltage characteristic.
#[derive(Debug, Clone, PartialEq)]
pub struct IVCurve {
    /// Bias points [V]
    pub bias: Vec<f64>,
    /// Terminal current density [A/cm²]
    pub current_density: Vec<f64>,
    /// Per-point compliance flag
    pub compliance_hit: Vec<bool>,
    /// Lattice temperature [K]
    pub temperature: f64,
    /// True when an arm ended on a convergence failure rather than its
    /// range limit or compliance
    pub partial: bool,
}

impl IVCurve {
    pub fn new(bias: Vec<f64>, current_density: Vec<f64>, temperature: f64) -> Self {
        let n = bias.len();
        Self {
            bias,
            current_density,
            compliance_hit: vec![false; n],
            temperature,
            partial: false,
        }
    }

    fn sorted_points(&self) -> Vec<(f64, f64, bool)> {
        let mut pts: Vec<(f64, f64, bool)> = self
            .bias
            .iter()
            .zip(&self.current_density)
            .zip(&self.compliance_hit)
            .map(|((v, j), c)| (*v, *j, *c))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pts
    }
}

/// Extraction tuning knobs; the defaults mirror how the reference data was
/// reduced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionConfig {
    /// Current-density window for the minimum-ideality search [A/cm²]
    pub ideality_window: (f64, f64),
    /// Savitzky-style quadratic smoothing window on ln J (0 or 1 = off,
    /// otherwise odd; 5 recommended for measured data)
    pub smoothing_window: usize,
    /// Turn-on threshold [A/cm²]
    pub turn_on_threshold: f64,
    /// Rectification probe bias [V]
    pub rectification_bias: f64,
    /// Reverse-current noise floor emulating the measurement equipment
    /// [A/cm²]
    pub noise_floor: f64,
    /// Fraction of most-reverse points used by the Mott-Schottky fit
    pub mott_schottky_fraction: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            ideality_window: (1.0e-6, 1.0e-1),
            smoothing_window: 0,
            turn_on_threshold: 0.5,
            rectification_bias: 3.0,
            noise_floor: 1.0e-8,
            mott_schottky_fraction: 0.8,
        }
    }
}

/// Extracted figures of merit of one curve set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiodeMetrics {
    pub temperature: f64,
    /// Turn-on voltage at the configured threshold [V]
    pub v_on: Option<f64>,
    pub min_ideality: Option<f64>,
    pub rectification_ratio: Option<f64>,
    /// The reverse current was below the noise floor: the ratio is a lower
    /// bound and reports print ">=" rather than "="
    pub ratio_floored: bool,
    /// The forward value at the probe bias came from a compliance-clamped
    /// point, making the ratio a lower bound as well
    pub ratio_forward_clamped: bool,
    /// Reverse current density at -3 V [A/cm²]
    pub leakage_at_minus3v: Option<f64>,
    pub leakage_below_floor: bool,
    pub mott_schottky_vbi: Option<f64>,
    pub mott_schottky_density: Option<f64>,
}

/// Local ideality factor n(V) = (1/V_T) dV / d(ln J) by centered
/// differences over the forward branch.
pub fn ideality_profile(curve: &IVCurve, config: &ExtractionConfig) -> Result<Vec<(f64, f64)>> {
    let vt = thermal_voltage(curve.temperature);
    let pts: Vec<(f64, f64)> = curve
        .sorted_points()
        .into_iter()
        .filter(|(v, j, c)| *v > 0.0 && *j > 0.0 && !*c)
        .map(|(v, j, _)| (v, j))
        .collect();
    if pts.len() < 5 {
        return Err(Error::extraction(format!(
            "ideality extraction needs >= 5 forward points with positive current, got {}",
            pts.len()
        )));
    }
    let mut lnj: Vec<f64> = pts.iter().map(|(_, j)| j.ln()).collect();
    if config.smoothing_window >= 3 {
        lnj = smooth_quadratic(&lnj, config.smoothing_window);
    }
    let mut out = Vec::with_capacity(pts.len().saturating_sub(2));
    for i in 1..pts.len() - 1 {
        let dv = pts[i + 1].0 - pts[i - 1].0;
        let dlnj = lnj[i + 1] - lnj[i - 1];
        if dlnj.abs() < 1e-300 {
            continue;
        }
        out.push((pts[i].0, dv / dlnj / vt));
    }
    if out.len() < 3 {
        return Err(Error::extraction(
            "no usable exponential region in the forward branch".to_string(),
        ));
    }
    Ok(out)
}

/// Minimum ideality over points whose current lies in the configured
/// window.
pub fn min_ideality(curve: &IVCurve, config: &ExtractionConfig) -> Result<f64> {
    let profile = ideality_profile(curve, config)?;
    let pts = curve.sorted_points();
    let (lo, hi) = config.ideality_window;
    let mut best: Option<f64> = None;
    for (v, n) in &profile {
        // locate the current at this bias
        let j = pts
            .iter()
            .find(|(pv, _, _)| (pv - v).abs() < 1e-15)
            .map(|(_, j, _)| *j)
            .unwrap_or(0.0);
        if j >= lo && j <= hi && n.is_finite() && *n > 0.0 {
            best = Some(best.map_or(*n, |b: f64| b.min(*n)));
        }
    }
    best.ok_or_else(|| {
        Error::extraction(format!(
            "no ideality points with current in [{lo:e}, {hi:e}] A/cm2"
        ))
    })
}

/// Quadratic (Savitzky-Golay) smoothing with the requested odd window.
fn smooth_quadratic(y: &[f64], window: usize) -> Vec<f64> {
    let w = if window % 2 == 0 { window + 1 } else { window };
    let half = w / 2;
    if y.len() < w {
        return y.to_vec();
    }
    let mut out = y.to_vec();
    // closed-form quadratic coefficients for the 5-point window; larger
    // windows fall back to a least-squares fit evaluated directly
    for i in half..y.len() - half {
        if w == 5 {
            out[i] = (-3.0 * y[i - 2] + 12.0 * y[i - 1] + 17.0 * y[i]
                + 12.0 * y[i + 1]
                - 3.0 * y[i + 2])
                / 35.0;
        } else {
            // local quadratic least squares on index offsets
            let m = half as f64;
            let (mut s0, mut s2, mut s4) = (0.0, 0.0, 0.0);
            let (mut t0, mut t2) = (0.0, 0.0);
            for k in -(half as isize)..=(half as isize) {
                let x = k as f64 / m;
                let v = y[(i as isize + k) as usize];
                s0 += 1.0;
                s2 += x * x;
                s4 += x * x * x * x;
                t0 += v;
                t2 += v * x * x;
            }
            let det = s0 * s4 - s2 * s2;
            out[i] = (s4 * t0 - s2 * t2) / det;
        }
    }
    out
}

/// Interpolated current density at a bias, log-linear where the bracketing
/// currents share a sign, linear otherwise. Exact point hits return the
/// stored value.
fn current_at(pts: &[(f64, f64, bool)], v: f64) -> Option<f64> {
    if pts.is_empty() {
        return None;
    }
    for (pv, j, _) in pts {
        if (pv - v).abs() < 1e-12 {
            return Some(*j);
        }
    }
    let idx = pts.iter().position(|(pv, _, _)| *pv > v)?;
    if idx == 0 {
        return None;
    }
    let (v0, j0, _) = pts[idx - 1];
    let (v1, j1, _) = pts[idx];
    let t = (v - v0) / (v1 - v0);
    if j0 > 0.0 && j1 > 0.0 {
        Some((j0.ln() + t * (j1.ln() - j0.ln())).exp())
    } else if j0 < 0.0 && j1 < 0.0 {
        Some(-(((-j0).ln() + t * (((-j1).ln()) - (-j0).ln())).exp()))
    } else {
        Some(j0 + t * (j1 - j0))
    }
}

/// Forward voltage where the current density crosses the threshold,
/// log-linearly interpolated between the bracketing points.
pub fn turn_on_voltage(curve: &IVCurve, threshold: f64) -> Result<f64> {
    if threshold <= 0.0 {
        return Err(Error::domain("turn-on threshold must be > 0".to_string()));
    }
    let pts: Vec<(f64, f64, bool)> = curve
        .sorted_points()
        .into_iter()
        .filter(|(v, _, _)| *v >= 0.0)
        .collect();
    let mut prev: Option<(f64, f64)> = None;
    for (v, j, _) in &pts {
        if *j >= threshold {
            if let Some((v0, j0)) = prev {
                if j0 > 0.0 && *j > j0 {
                    let t = (threshold.ln() - j0.ln()) / (j.ln() - j0.ln());
                    return Ok(v0 + t * (v - v0));
                }
            }
            return Ok(*v);
        }
        if *j > 0.0 {
            prev = Some((*v, *j));
        }
    }
    if pts.iter().any(|(_, _, c)| *c) {
        Err(Error::extraction(format!(
            "compliance reached before the {threshold} A/cm2 threshold"
        )))
    } else {
        Err(Error::extraction(format!(
            "sweep never reaches {threshold} A/cm2; extend the forward range"
        )))
    }
}

/// Rectification ratio |J(+v)| / max(|J(-v)|, noise floor). Returns
/// (ratio, denominator_floored, forward_clamped): when the forward arm
/// ended at compliance below +v the clamped current is used and the ratio
/// is a lower bound.
pub fn rectification_ratio(
    curve: &IVCurve,
    v_probe: f64,
    noise_floor: f64,
) -> Result<(f64, bool, bool)> {
    if v_probe <= 0.0 {
        return Err(Error::domain("probe bias must be > 0".to_string()));
    }
    let pts = curve.sorted_points();
    let v_max = pts.last().map(|p| p.0).unwrap_or(0.0);
    let v_min = pts.first().map(|p| p.0).unwrap_or(0.0);

    let (j_fwd, clamped) = if v_max >= v_probe {
        (
            current_at(&pts, v_probe)
                .ok_or_else(|| Error::extraction("forward interpolation failed".to_string()))?
                .abs(),
            false,
        )
    } else {
        // Arm terminated early; the measurement convention is to carry the
        // compliance-clamped current forward as a lower bound.
        let last_fwd = pts
            .iter()
            .rev()
            .find(|(v, _, c)| *v > 0.0 && *c)
            .ok_or_else(|| {
                Error::extraction(format!(
                    "curve does not cover +{v_probe} V and did not end at compliance"
                ))
            })?;
        (last_fwd.1.abs(), true)
    };

    if v_min > -v_probe {
        return Err(Error::extraction(format!(
            "curve does not cover -{v_probe} V"
        )));
    }
    let j_rev = current_at(&pts, -v_probe)
        .ok_or_else(|| Error::extraction("reverse interpolation failed".to_string()))?
        .abs();
    let floored = j_rev < noise_floor;
    let denom = j_rev.max(noise_floor);
    Ok((j_fwd / denom, floored, clamped))
}

/// Mott-Schottky line fit result.
#[derive(Debug, Clone, PartialEq)]
pub struct MottSchottkyFit {
    /// Built-in potential including the kT/q correction [V]
    pub v_bi: f64,
    /// Raw voltage-axis crossing of the 1/C² line [V]
    pub v_intercept: f64,
    /// The kT/q term reported separately [V]
    pub thermal_correction: f64,
    /// Apparent doping density [cm⁻³]
    pub doping: f64,
    /// Coefficient of determination of the line fit
    pub r_squared: f64,
    /// d(1/C²)/dV [cm⁴/F²/V]
    pub slope: f64,
}

/// Least-squares line through 1/C² vs V over the most-reverse fraction of
/// the curve: doping from the slope, built-in potential from the intercept.
pub fn mott_schottky_fit(
    curve: &CVCurve,
    relative_permittivity: f64,
    config: &ExtractionConfig,
) -> Result<MottSchottkyFit> {
    let mut pts: Vec<(f64, f64)> = curve
        .bias
        .iter()
        .zip(&curve.capacitance_per_area)
        .map(|(v, c)| (*v, *c))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if pts.len() < 3 {
        return Err(Error::extraction(
            "Mott-Schottky fit needs at least 3 C-V points".to_string(),
        ));
    }
    if pts.iter().any(|(_, c)| *c <= 0.0) {
        return Err(Error::extraction("capacitance must be positive".to_string()));
    }
    let keep = ((pts.len() as f64) * config.mott_schottky_fraction).ceil() as usize;
    let keep = keep.clamp(3, pts.len());
    let window = &pts[..keep];

    let n = window.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (v, c) in window {
        let y = 1.0 / (c * c);
        sx += v;
        sy += y;
        sxx += v * v;
        sxy += v * y;
        syy += y * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    if slope >= 0.0 {
        return Err(Error::extraction(
            "non-negative 1/C² slope: junction is not rectifying in this range".to_string(),
        ));
    }
    let ss_tot = syy - sy * sy / n;
    let mut ss_res = 0.0;
    for (v, c) in window {
        let y = 1.0 / (c * c);
        let e = y - (intercept + slope * v);
        ss_res += e * e;
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    let eps = relative_permittivity * EPS0;
    let doping = 2.0 / (Q * eps * slope.abs());
    let v_intercept = -intercept / slope;
    let thermal_correction = thermal_voltage(curve.temperature);
    Ok(MottSchottkyFit {
        v_bi: v_intercept + thermal_correction,
        v_intercept,
        thermal_correction,
        doping,
        r_squared,
        slope,
    })
}

/// Apparent doping profile from pointwise derivatives of 1/C²:
/// w = ε/C, N(w) = 2 / (q ε d(1/C²)/dV) with the sign fixed so donors come
/// out positive.
pub fn apparent_doping_profile(
    curve: &CVCurve,
    relative_permittivity: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut pts: Vec<(f64, f64)> = curve
        .bias
        .iter()
        .zip(&curve.capacitance_per_area)
        .map(|(v, c)| (*v, *c))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if pts.len() < 3 {
        return Err(Error::extraction(
            "doping profile needs at least 3 C-V points".to_string(),
        ));
    }
    let increasing = pts.windows(2).all(|w| w[1].1 > w[0].1);
    let decreasing = pts.windows(2).all(|w| w[1].1 < w[0].1);
    if !increasing && !decreasing {
        return Err(Error::extraction(
            "capacitance is not monotone in bias; cannot invert to a profile".to_string(),
        ));
    }
    let eps = relative_permittivity * EPS0;
    let mut out = Vec::with_capacity(pts.len() - 2);
    for i in 1..pts.len() - 1 {
        let y_prev = 1.0 / (pts[i - 1].1 * pts[i - 1].1);
        let y_next = 1.0 / (pts[i + 1].1 * pts[i + 1].1);
        let dydv = (y_next - y_prev) / (pts[i + 1].0 - pts[i - 1].0);
        if dydv >= 0.0 {
            continue;
        }
        let w = eps / pts[i].1;
        out.push((w, -2.0 / (Q * eps * dydv)));
    }
    if out.is_empty() {
        return Err(Error::extraction(
            "no usable points for the doping profile".to_string(),
        ));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

/// Bundle the scalar metrics of one I-V curve (and optionally a C-V curve).
pub fn extract_metrics(
    iv: &IVCurve,
    cv: Option<(&CVCurve, f64)>,
    config: &ExtractionConfig,
) -> DiodeMetrics {
    let v_on = turn_on_voltage(iv, config.turn_on_threshold).ok();
    let ideality = min_ideality(iv, config).ok();
    let rect = rectification_ratio(iv, config.rectification_bias, config.noise_floor).ok();
    let pts = iv.sorted_points();
    let leakage = current_at(&pts, -3.0).map(|j| j.abs());
    let ms = cv.and_then(|(c, eps_r)| mott_schottky_fit(c, eps_r, config).ok());
    DiodeMetrics {
        temperature: iv.temperature,
        v_on,
        min_ideality: ideality,
        rectification_ratio: rect.map(|r| r.0),
        ratio_floored: rect.map(|r| r.1).unwrap_or(false),
        ratio_forward_clamped: rect.map(|r| r.2).unwrap_or(false),
        leakage_at_minus3v: leakage,
        leakage_below_floor: leakage.map(|j| j < config.noise_floor).unwrap_or(false),
        mott_schottky_vbi: ms.as_ref().map(|m| m.v_bi),
        mott_schottky_density: ms.as_ref().map(|m| m.doping),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::K_B;
    use crate::smallsignal::depletion_cv;

    fn synthetic_diode(js: f64, n: f64, t: f64, v_max: f64, points: usize) -> IVCurve {
        let vt = K_B * t;
        let bias: Vec<f64> = (0..=points)
            .map(|i| v_max * i as f64 / points as f64)
            .collect();
        let j: Vec<f64> = bias.iter().map(|v| js * ((v / (n * vt)).exp() - 1.0)).collect();
        IVCurve::new(bias, j, t)
    }

    #[test]
    fn ideality_of_perfect_exponentials() {
        for n_true in [1.0, 2.0] {
            let curve = synthetic_diode(1e-12, n_true, 300.0, 1.2, 240);
            let profile = ideality_profile(&curve, &ExtractionConfig::default()).unwrap();
            for (v, n) in &profile {
                // skip the region where the -1 term still matters
                if *v > 0.8 {
                    assert!((n - n_true).abs() < 1e-6, "n({v}) = {n}");
                }
            }
        }
    }

    #[test]
    fn ideality_insensitive_to_point_order() {
        let mut curve = synthetic_diode(1e-12, 1.0, 300.0, 1.0, 100);
        let cfg = ExtractionConfig::default();
        let a = min_ideality(&curve, &cfg).unwrap();
        // scramble deterministically
        let n = curve.bias.len();
        for i in 0..n / 2 {
            curve.bias.swap(i, n - 1 - i);
            curve.current_density.swap(i, n - 1 - i);
            curve.compliance_hit.swap(i, n - 1 - i);
        }
        let b = min_ideality(&curve, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ideality_needs_enough_points() {
        let curve = synthetic_diode(1e-12, 1.0, 300.0, 0.05, 3);
        assert!(matches!(
            ideality_profile(&curve, &ExtractionConfig::default()),
            Err(Error::Extraction(_))
        ));
    }

    #[test]
    fn turn_on_of_te_diode_against_closed_form() {
        // J_s = A* T² e^{-φ/kT}, A* = 33.6, φ = 1.432 eV, n = 1:
        // V_on = V_T ln(0.5/J_s) ≈ 1.03 V
        let t = 300.0;
        let vt = K_B * t;
        let js = 33.6 * t * t * (-1.432 / vt).exp();
        let curve = synthetic_diode(js, 1.0, t, 1.4, 560);
        let von = turn_on_voltage(&curve, 0.5).unwrap();
        let oracle = vt * (0.5 / js).ln();
        assert!((von - oracle).abs() < 2e-3, "von = {von}, oracle = {oracle}");
        assert!((von - 1.03).abs() < 0.01, "von = {von}");
    }

    #[test]
    fn turn_on_exact_hit_and_monotonicity() {
        let curve = IVCurve::new(
            vec![0.0, 0.5, 0.7, 0.9],
            vec![0.0, 1e-3, 0.5, 5.0],
            300.0,
        );
        assert_eq!(turn_on_voltage(&curve, 0.5).unwrap(), 0.7);
        let mut prev = 0.0;
        for thr in [1e-3, 1e-2, 0.1, 0.5, 1.0, 4.0] {
            let v = turn_on_voltage(&curve, thr).unwrap();
            assert!(v >= prev, "threshold {thr}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn turn_on_failure_modes_distinguished() {
        let too_low = synthetic_diode(1e-12, 1.0, 300.0, 0.3, 30);
        let err = turn_on_voltage(&too_low, 0.5).unwrap_err();
        assert!(err.to_string().contains("extend"), "{err}");

        let mut clamped = synthetic_diode(1e-12, 1.0, 300.0, 0.3, 30);
        *clamped.compliance_hit.last_mut().unwrap() = true;
        let err = turn_on_voltage(&clamped, 0.5).unwrap_err();
        assert!(err.to_string().contains("compliance"), "{err}");
    }

    #[test]
    fn rectification_of_symmetric_resistor_is_one() {
        let bias: Vec<f64> = (-30..=30).map(|i| i as f64 * 0.15).collect();
        let j: Vec<f64> = bias.iter().map(|v| 1.0e-2 * v).collect();
        let curve = IVCurve::new(bias, j, 300.0);
        let (r, floored, clamped) = rectification_ratio(&curve, 3.0, 1e-8).unwrap();
        assert!((r - 1.0).abs() < 1e-9, "r = {r}");
        assert!(!floored && !clamped);
    }

    #[test]
    fn rectification_of_ideal_diode() {
        let t = 300.0;
        let vt = K_B * t;
        let js = 1e-10;
        let bias: Vec<f64> = (-60..=70).map(|i| i as f64 * 0.05).collect();
        let j: Vec<f64> = bias.iter().map(|v| js * ((v / vt).exp() - 1.0)).collect();
        let curve = IVCurve::new(bias, j, t);
        let (r, floored, _) = rectification_ratio(&curve, 3.0, 1e-12).unwrap();
        let j3 = js * ((3.0 / vt).exp() - 1.0);
        assert!(!floored);
        assert!((r - j3 / js).abs() / (j3 / js) < 1e-6, "r = {r:e}");
    }

    #[test]
    fn rectification_uses_clamped_forward_value() {
        let bias = vec![-3.5, -1.0, 0.0, 0.4, 0.8];
        let j = vec![-2e-9, -1e-9, 0.0, 1.0, 3.18];
        let mut curve = IVCurve::new(bias, j, 300.0);
        curve.compliance_hit[4] = true;
        let (r, floored, clamped) = rectification_ratio(&curve, 3.0, 1e-8).unwrap();
        assert!(clamped);
        assert!(floored); // 2e-9 < 1e-8
        assert!((r - 3.18 / 1e-8).abs() / r < 1e-9);
    }

    #[test]
    fn mott_schottky_recovers_synthetic_parameters() {
        let biases: Vec<f64> = (0..=40).map(|i| -4.0 + i as f64 * 0.1).collect();
        let cv = depletion_cv(1.3, 4e18, 12.4, 300.0, &biases);
        let fit = mott_schottky_fit(&cv, 12.4, &ExtractionConfig::default()).unwrap();
        assert!((fit.doping - 4e18).abs() / 4e18 < 1e-3, "N = {:e}", fit.doping);
        assert!((fit.v_bi - 1.3).abs() < 1.3e-3, "v_bi = {}", fit.v_bi);
        assert!(fit.r_squared > 0.999999);
    }

    #[test]
    fn mott_schottky_scaling_identity() {
        // Doubling all capacitances quarters the 1/C² slope, so the
        // extracted density N = 2/(qε|slope|) quadruples; V_bi (slope and
        // intercept scale together) is unchanged.
        let biases: Vec<f64> = (0..=30).map(|i| -3.0 + i as f64 * 0.1).collect();
        let cv = depletion_cv(1.1, 1e17, 10.0, 300.0, &biases);
        let mut scaled = cv.clone();
        for c in &mut scaled.capacitance_per_area {
            *c *= 2.0;
        }
        let cfg = ExtractionConfig::default();
        let a = mott_schottky_fit(&cv, 10.0, &cfg).unwrap();
        let b = mott_schottky_fit(&scaled, 10.0, &cfg).unwrap();
        assert!((b.doping / a.doping - 4.0).abs() < 1e-9);
        assert!((b.v_bi - a.v_bi).abs() < 1e-9);
    }

    #[test]
    fn mott_schottky_rejects_wrong_slope() {
        let biases: Vec<f64> = (0..=10).map(|i| -2.0 + i as f64 * 0.2).collect();
        let mut cv = depletion_cv(1.0, 1e17, 10.0, 300.0, &biases);
        cv.capacitance_per_area.reverse(); // slope now positive
        assert!(mott_schottky_fit(&cv, 10.0, &ExtractionConfig::default()).is_err());
    }

    #[test]
    fn doping_profile_flat_for_uniform_synthetic() {
        let biases: Vec<f64> = (0..=40).map(|i| -4.0 + i as f64 * 0.1).collect();
        let cv = depletion_cv(1.3, 4e18, 12.4, 300.0, &biases);
        let profile = apparent_doping_profile(&cv, 12.4).unwrap();
        for (w, n) in &profile {
            assert!(
                (n - 4e18).abs() / 4e18 < 5e-3,
                "N({w:e}) = {n:e} deviates from 4e18"
            );
        }
        // ε_r doubled at fixed curve: N = 2/(qε·slope) scales as 1/ε
        let profile2 = apparent_doping_profile(&cv, 24.8).unwrap();
        for ((_, n1), (_, n2)) in profile.iter().zip(profile2.iter()) {
            assert!((n2 / n1 - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn doping_profile_two_step_structure() {
        // C(V) generated by numerically solving the depletion integral for
        // a step profile: N = 1e17 for w < 60 nm, 4e17 beyond. The
        // extracted profile must show the step near 60 nm.
        let eps = 10.0 * EPS0;
        let n_of_w = |w: f64| if w < 60.0e-7 { 1.0e17 } else { 4.0e17 };
        // V(w) from the depletion relation dV = q N(w) w dw / ε, starting
        // at the built-in potential with zero width.
        let v_bi = 1.0;
        let mut biases = Vec::new();
        let mut caps = Vec::new();
        let mut v = 0.0; // band bending beyond V_bi offset
        let mut w = 0.0;
        let dw = 0.05e-7;
        while w < 120.0e-7 {
            let n = n_of_w(w);
            v += Q * n * w * dw / eps;
            w += dw;
            biases.push(v_bi - v); // actual terminal bias
            caps.push(eps / w);
        }
        // thin to a measurement-like grid
        let take: Vec<usize> = (0..biases.len()).step_by(60).collect();
        let cv = CVCurve {
            bias: take.iter().map(|&i| biases[i]).collect(),
            capacitance_per_area: take.iter().map(|&i| caps[i]).collect(),
            temperature: 300.0,
            device: "two-step".to_string(),
            partial: false,
        };
        let profile = apparent_doping_profile(&cv, 10.0).unwrap();
        // find extracted density well inside each region
        let shallow: Vec<f64> = profile
            .iter()
            .filter(|(w, _)| *w < 45.0e-7)
            .map(|(_, n)| *n)
            .collect();
        let deep: Vec<f64> = profile
            .iter()
            .filter(|(w, _)| *w > 80.0e-7)
            .map(|(_, n)| *n)
            .collect();
        assert!(!shallow.is_empty() && !deep.is_empty());
        for n in shallow {
            assert!((n - 1e17).abs() / 1e17 < 0.05, "shallow N = {n:e}");
        }
        for n in deep {
            assert!((n - 4e17).abs() / 4e17 < 0.05, "deep N = {n:e}");
        }
        // the transition happens within a grid spacing of 60 nm
        let step_w = profile
            .iter()
            .find(|(_, n)| *n > 2e17)
            .map(|(w, _)| *w)
            .unwrap();
        assert!(
            (step_w - 60.0e-7).abs() < 5.0e-7,
            "step at {:.1} nm",
            step_w * 1e7
        );
    }

    #[test]
    fn round_trip_identity_over_randomized_parameters() {
        // mott_schottky_fit ∘ depletion generator is the identity on
        // (V_bi, N) for uniform doping; deterministic pseudo-random sample.
        let mut seed = 0x5851f42d4c957f2du64;
        let mut rand01 = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let cfg = ExtractionConfig::default();
        for _ in 0..100 {
            let v_bi = 0.5 + 2.5 * rand01();
            let n_d = 10f64.powf(16.0 + 3.0 * rand01());
            let biases: Vec<f64> = (0..=25).map(|i| -4.0 + i as f64 * 0.16).collect();
            let cv = depletion_cv(v_bi, n_d, 10.0, 300.0, &biases);
            let fit = mott_schottky_fit(&cv, 10.0, &cfg).unwrap();
            assert!(
                (fit.doping - n_d).abs() / n_d < 1e-3,
                "N: {:e} vs {n_d:e}",
                fit.doping
            );
            assert!((fit.v_bi - v_bi).abs() / v_bi < 1e-3, "V_bi: {} vs {v_bi}", fit.v_bi);
        }
    }
}
