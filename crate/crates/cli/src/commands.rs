//! Subcommand implementations.

use crate::config::RunConfig;
use crate::output::{self, MetricsFile, RunMetrics};
use crate::reference;
use oxidiode::error::{Error, Result};
use oxidiode::extraction::{extract_metrics, mott_schottky_fit, ExtractionConfig, IVCurve};
use oxidiode::smallsignal::{cv_sweep, CVCurve};
use oxidiode::solver::{iv_sweep, solve_equilibrium, PhysicsFlags, Problem, SolverConfig};
use oxidiode::DeviceStructure;
use std::path::Path;
use std::sync::Mutex;

/// Run the per-(device, temperature) task list on a small worker pool.
/// Results are collected by index so the output order (and therefore every
/// output byte) is independent of the pool size.
fn run_tasks<T, F>(tasks: usize, jobs: usize, f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let jobs = jobs.max(1).min(tasks.max(1));
    let results: Mutex<Vec<Option<Result<T>>>> =
        Mutex::new((0..tasks).map(|_| None).collect());
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= tasks {
                    break;
                }
                let r = f(i);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("task completed"))
        .collect()
}

struct TaskGrid {
    devices: Vec<DeviceStructure>,
    temps: Vec<f64>,
    flags: PhysicsFlags,
    solver: SolverConfig,
}

impl TaskGrid {
    fn new(cfg: &RunConfig) -> Result<Self> {
        Ok(Self {
            devices: cfg.devices()?,
            temps: cfg.sweep.kelvin()?,
            flags: cfg.physics.to_flags(),
            solver: cfg.solver.to_solver_config()?,
        })
    }

    fn len(&self) -> usize {
        self.devices.len() * self.temps.len()
    }

    fn split(&self, i: usize) -> (&DeviceStructure, f64) {
        (&self.devices[i / self.temps.len()], self.temps[i % self.temps.len()])
    }
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::config(format!("cannot create {}: {e}", dir.display())))
}

/// `band-diagram`: equilibrium band structure per device and temperature.
pub fn band_diagram(cfg: &RunConfig, out: &Path, jobs: usize) -> Result<()> {
    ensure_out_dir(out)?;
    let grid = TaskGrid::new(cfg)?;
    let results = run_tasks(grid.len(), jobs, |i| {
        let (device, t) = grid.split(i);
        let problem = Problem::new(device, t, &grid.flags, &grid.solver)?;
        let eq = solve_equilibrium(&problem)?;
        Ok((problem.profile(&eq), eq.residual_history.clone()))
    });
    for (i, res) in results.into_iter().enumerate() {
        let (device, t) = grid.split(i);
        let (profile, residuals) = res?;
        let files = output::write_band_diagram(cfg, out, &device.name, t, &profile)?;
        for f in files {
            println!("wrote {}", f.display());
        }
        if cfg.output.diagnostics {
            output::write_residuals(
                out,
                &format!("band_{}_{:.0}K", device.name, t),
                &[(0.0, residuals)],
            )?;
        }
    }
    Ok(())
}

/// `simulate-iv`: temperature-swept I-V curves plus extracted metrics.
pub fn simulate_iv(cfg: &RunConfig, out: &Path, jobs: usize) -> Result<()> {
    ensure_out_dir(out)?;
    let grid = TaskGrid::new(cfg)?;
    let (v_from, v_to) = cfg.sweep.iv_range;
    let xcfg = cfg.extraction.to_extraction_config();
    let results = run_tasks(grid.len(), jobs, |i| {
        let (device, t) = grid.split(i);
        let problem = Problem::new(device, t, &grid.flags, &grid.solver)?;
        iv_sweep(&problem, v_from, v_to)
    });
    let mut metrics = MetricsFile::new(cfg);
    let mut any_partial = false;
    for (i, res) in results.into_iter().enumerate() {
        let (device, _t) = grid.split(i);
        let curve = res?;
        any_partial |= curve.partial;
        for f in output::write_iv(cfg, out, &device.name, &curve)? {
            println!("wrote {}", f.display());
        }
        let m = extract_metrics(&curve, None, &xcfg);
        metrics
            .runs
            .push(output::run_metrics(&device.name, &m, curve.partial, false));
    }
    let path = out.join("metrics_iv.json");
    metrics.save(&path)?;
    println!("wrote {}", path.display());
    if any_partial {
        eprintln!("warning: one or more sweeps were partial; see the curve headers");
    }
    Ok(())
}

/// `simulate-cv`: quasi-static C-V curves plus Mott-Schottky fits.
pub fn simulate_cv(cfg: &RunConfig, out: &Path, jobs: usize) -> Result<()> {
    ensure_out_dir(out)?;
    let grid = TaskGrid::new(cfg)?;
    let (v_from, v_to) = cfg.sweep.cv_range;
    let step = cfg.sweep.cv_step;
    let delta = cfg.sweep.cv_delta;
    let xcfg = cfg.extraction.to_extraction_config();
    let results = run_tasks(grid.len(), jobs, |i| {
        let (device, t) = grid.split(i);
        let problem = Problem::new(device, t, &grid.flags, &grid.solver)?;
        cv_sweep(&problem, v_from, v_to, step, delta)
    });
    let mut metrics = MetricsFile::new(cfg);
    let mut any_partial = false;
    for (i, res) in results.into_iter().enumerate() {
        let (device, t) = grid.split(i);
        let curve = res?;
        any_partial |= curve.partial;
        for f in output::write_cv(cfg, out, &device.name, &curve)? {
            println!("wrote {}", f.display());
        }
        let fit = mott_schottky_fit(&curve, cfg.extraction.cv_permittivity, &xcfg).ok();
        metrics.runs.push(RunMetrics {
            device: device.name.clone(),
            temperature_k: t,
            v_on_v: None,
            min_ideality: None,
            rectification_ratio: None,
            ratio_is_lower_bound: false,
            leakage_at_minus3v_a_cm2: None,
            leakage_below_noise_floor: false,
            mott_schottky_vbi_v: fit.as_ref().map(|f| f.v_bi),
            mott_schottky_doping_cm3: fit.as_ref().map(|f| f.doping),
            iv_partial: false,
            cv_partial: curve.partial,
        });
    }
    let path = out.join("metrics_cv.json");
    metrics.save(&path)?;
    println!("wrote {}", path.display());
    if any_partial {
        eprintln!("warning: one or more sweeps were partial; see the curve headers");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// extract: metrics from external curve files
// ---------------------------------------------------------------------------

struct ParsedCurve {
    device: String,
    temperature: f64,
    voltage: Vec<f64>,
    values: Vec<f64>,
    kind: CurveKind,
}

#[derive(PartialEq, Clone, Copy)]
enum CurveKind {
    Current,
    Capacitance,
}

/// Parse a curve CSV: `#`-prefixed headers (optionally carrying
/// `temperature_K` and `device`), then a column-name line, then data rows.
fn parse_curve(path: &Path, want: CurveKind) -> Result<ParsedCurve> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    let mut device = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "unknown".to_string());
    let mut temperature = 300.0;
    let mut columns: Option<Vec<String>> = None;
    let mut voltage = Vec::new();
    let mut values = Vec::new();
    let (mut v_col, mut y_col) = (usize::MAX, usize::MAX);

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(t) = rest.strip_prefix("temperature_K:") {
                temperature = t.trim().parse().map_err(|_| {
                    Error::extraction(format!(
                        "{}:{}: bad temperature header",
                        path.display(),
                        lineno + 1
                    ))
                })?;
            } else if let Some(d) = rest.strip_prefix("device:") {
                device = d.trim().to_string();
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if columns.is_none() {
            let names: Vec<String> = fields.iter().map(|f| f.to_lowercase()).collect();
            v_col = names
                .iter()
                .position(|n| n.starts_with("volt") || n == "v" || n.starts_with("bias"))
                .ok_or_else(|| {
                    Error::extraction(format!(
                        "{}:{}: no voltage column (looked for voltage/bias/v)",
                        path.display(),
                        lineno + 1
                    ))
                })?;
            y_col = match want {
                CurveKind::Current => names
                    .iter()
                    .position(|n| n.starts_with("current") || n == "j" || n.starts_with("i_"))
                    .ok_or_else(|| {
                        Error::extraction(format!(
                            "{}:{}: no current column (looked for current/j)",
                            path.display(),
                            lineno + 1
                        ))
                    })?,
                CurveKind::Capacitance => names
                    .iter()
                    .position(|n| n.starts_with("cap") || n == "c")
                    .ok_or_else(|| {
                        Error::extraction(format!(
                            "{}:{}: no capacitance column (looked for capacitance/c)",
                            path.display(),
                            lineno + 1
                        ))
                    })?,
            };
            columns = Some(names);
            continue;
        }
        let parse = |idx: usize| -> Result<f64> {
            fields
                .get(idx)
                .ok_or_else(|| {
                    Error::extraction(format!(
                        "{}:{}: row has {} fields, need column {}",
                        path.display(),
                        lineno + 1,
                        fields.len(),
                        idx + 1
                    ))
                })?
                .parse()
                .map_err(|_| {
                    Error::extraction(format!(
                        "{}:{}: cannot parse \"{}\" as a number",
                        path.display(),
                        lineno + 1,
                        fields[idx]
                    ))
                })
        };
        voltage.push(parse(v_col)?);
        values.push(parse(y_col)?);
    }
    if voltage.len() < 2 {
        return Err(Error::extraction(format!(
            "{}: fewer than two data rows",
            path.display()
        )));
    }
    Ok(ParsedCurve {
        device,
        temperature,
        voltage,
        values,
        kind: want,
    })
}

/// `extract`: apply the curve analysis to measured/external CSV files.
pub fn extract(
    cfg: &RunConfig,
    iv_paths: &[std::path::PathBuf],
    cv_paths: &[std::path::PathBuf],
    temperature_override: Option<f64>,
    out_path: &Path,
) -> Result<()> {
    if iv_paths.is_empty() && cv_paths.is_empty() {
        return Err(Error::config("extract needs --iv and/or --cv files".to_string()));
    }
    let xcfg: ExtractionConfig = cfg.extraction.to_extraction_config();
    let eps_r = cfg.extraction.cv_permittivity;
    let mut metrics = MetricsFile::new(cfg);

    let cvs: Vec<ParsedCurve> = cv_paths
        .iter()
        .map(|p| parse_curve(p, CurveKind::Capacitance))
        .collect::<Result<_>>()?;

    for (idx, path) in iv_paths.iter().enumerate() {
        let parsed = parse_curve(path, CurveKind::Current)?;
        debug_assert!(parsed.kind == CurveKind::Current);
        let t = temperature_override.unwrap_or(parsed.temperature);
        let iv = IVCurve::new(parsed.voltage.clone(), parsed.values.clone(), t);
        // pair C-V files by position
        let cv_curve = cvs.get(idx).map(|c| CVCurve {
            bias: c.voltage.clone(),
            capacitance_per_area: c.values.clone(),
            temperature: temperature_override.unwrap_or(c.temperature),
            device: c.device.clone(),
            partial: false,
        });
        let m = extract_metrics(&iv, cv_curve.as_ref().map(|c| (c, eps_r)), &xcfg);
        metrics
            .runs
            .push(output::run_metrics(&parsed.device, &m, false, false));
    }
    // C-V-only inputs still produce Mott-Schottky entries
    for c in cvs.iter().skip(iv_paths.len()) {
        let curve = CVCurve {
            bias: c.voltage.clone(),
            capacitance_per_area: c.values.clone(),
            temperature: temperature_override.unwrap_or(c.temperature),
            device: c.device.clone(),
            partial: false,
        };
        let fit = mott_schottky_fit(&curve, eps_r, &xcfg)?;
        metrics.runs.push(RunMetrics {
            device: c.device.clone(),
            temperature_k: curve.temperature,
            v_on_v: None,
            min_ideality: None,
            rectification_ratio: None,
            ratio_is_lower_bound: false,
            leakage_at_minus3v_a_cm2: None,
            leakage_below_noise_floor: false,
            mott_schottky_vbi_v: Some(fit.v_bi),
            mott_schottky_doping_cm3: Some(fit.doping),
            iv_partial: false,
            cv_partial: false,
        });
    }
    metrics.save(out_path)?;
    print_metrics_table(&metrics.runs);
    println!("wrote {}", out_path.display());
    Ok(())
}

fn print_metrics_table(runs: &[RunMetrics]) {
    let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    let fmt_exp = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3e}"));
    println!(
        "{:<28} {:>8} {:>8} {:>9} {:>12} {:>12} {:>9} {:>11}",
        "device", "T_K", "V_on_V", "n_min", "on/off", "J(-3V)", "V_bi_V", "N_cm3"
    );
    for r in runs {
        let ratio = match (r.rectification_ratio, r.ratio_is_lower_bound) {
            (Some(x), true) => format!(">={x:.2e}"),
            (Some(x), false) => format!("{x:.2e}"),
            (None, _) => "-".to_string(),
        };
        println!(
            "{:<28} {:>8.1} {:>8} {:>9} {:>12} {:>12} {:>9} {:>11}",
            r.device,
            r.temperature_k,
            fmt_opt(r.v_on_v),
            fmt_opt(r.min_ideality),
            ratio,
            fmt_exp(r.leakage_at_minus3v_a_cm2),
            fmt_opt(r.mott_schottky_vbi_v),
            fmt_exp(r.mott_schottky_doping_cm3),
        );
    }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct Row {
    label: String,
    outcome: &'static str, // "PASS" | "FAIL" | "info" | "skip"
    detail: String,
    hard: bool,
}

fn find_runs<'a>(runs: &'a [RunMetrics], needle: &str) -> Vec<&'a RunMetrics> {
    let mut v: Vec<&RunMetrics> = runs
        .iter()
        .filter(|r| r.device.to_lowercase().contains(needle))
        .collect();
    v.sort_by(|a, b| a.temperature_k.partial_cmp(&b.temperature_k).unwrap());
    v
}

fn near(t: f64, target: f64) -> bool {
    (t - target).abs() < 2.0
}

/// `compare`: grade metrics against the embedded reference dataset and the
/// trend tolerances. Returns Ok(true) when every hard check passed.
pub fn compare(paths: &[std::path::PathBuf]) -> Result<bool> {
    let mut runs: Vec<RunMetrics> = Vec::new();
    for p in paths {
        runs.extend(MetricsFile::load(p)?.runs);
    }
    if runs.is_empty() {
        return Err(Error::config("nothing to compare: no runs in the metrics files".to_string()));
    }
    let schottky = find_runs(&runs, "schottky");
    let hj = find_runs(&runs, "heterojunction");
    if schottky.is_empty() || hj.is_empty() {
        return Err(Error::config(
            "compare needs metrics for both the schottky and heterojunction presets".to_string(),
        ));
    }

    let mut rows: Vec<Row> = Vec::new();

    // Reference-value context rows
    for (run, von_ref, n_ref) in [
        (schottky.first(), "schottky_von_rt", "schottky_min_ideality"),
        (hj.first(), "hj_von_rt", "hj_min_ideality"),
    ] {
        if let Some(r) = run {
            if near(r.temperature_k, 298.0) {
                if let (Some(v), Some(e)) = (r.v_on_v, reference::get(von_ref)) {
                    rows.push(Row {
                        label: format!("{} V_on at {:.0} K", r.device, r.temperature_k),
                        outcome: "info",
                        detail: format!("simulated {v:.3} V, measured {} V", e.value),
                        hard: false,
                    });
                }
                if let (Some(n), Some(e)) = (r.min_ideality, reference::get(n_ref)) {
                    rows.push(Row {
                        label: format!("{} min ideality at {:.0} K", r.device, r.temperature_k),
                        outcome: "info",
                        detail: format!("simulated {n:.3}, measured {}", e.value),
                        hard: false,
                    });
                }
            }
        }
    }

    // Hard: reference built-in potential separation
    let (vbi_s, vbi_h) = (
        reference::get("schottky_vbi").unwrap(),
        reference::get("hj_vbi").unwrap(),
    );
    let gap = vbi_h.value - vbi_s.value;
    rows.push(Row {
        label: "HJ V_bi - Schottky V_bi >= 0.4 V (measured reference)".to_string(),
        outcome: if gap >= 0.4 { "PASS" } else { "FAIL" },
        detail: format!("{} - {} = {gap:.2} V", vbi_h.value, vbi_s.value),
        hard: true,
    });

    // Hard: Schottky V_on strictly decreasing, in [0.3, 0.6] V at ~683 K
    let vons: Vec<(f64, f64)> = schottky
        .iter()
        .filter_map(|r| r.v_on_v.map(|v| (r.temperature_k, v)))
        .collect();
    if vons.len() >= 2 {
        let decreasing = vons.windows(2).all(|w| w[1].1 < w[0].1);
        rows.push(Row {
            label: "Schottky V_on strictly decreasing with T".to_string(),
            outcome: if decreasing { "PASS" } else { "FAIL" },
            detail: vons
                .iter()
                .map(|(t, v)| format!("{t:.0}K:{v:.3}V"))
                .collect::<Vec<_>>()
                .join(" "),
            hard: true,
        });
    }
    if let Some((t, v)) = vons.iter().find(|(t, _)| near(*t, 683.0)) {
        let ok = (0.3..=0.6).contains(v);
        rows.push(Row {
            label: "Schottky V_on in [0.3, 0.6] V at 683 K".to_string(),
            outcome: if ok { "PASS" } else { "FAIL" },
            detail: format!("{v:.3} V at {t:.1} K (measured ~0.4 V)"),
            hard: true,
        });
    }

    // Hard: HJ V_on above Schottky at every common temperature
    let mut gap_rows = Vec::new();
    let mut all_above = true;
    for s in &schottky {
        if let Some(h) = hj.iter().find(|h| near(h.temperature_k, s.temperature_k)) {
            if let (Some(vs), Some(vh)) = (s.v_on_v, h.v_on_v) {
                all_above &= vh > vs;
                gap_rows.push(format!("{:.0}K:+{:.3}V", s.temperature_k, vh - vs));
                if near(s.temperature_k, 683.0) {
                    let ok = vh - vs >= 0.2;
                    rows.push(Row {
                        label: "HJ V_on - Schottky V_on >= 0.2 V at 683 K".to_string(),
                        outcome: if ok { "PASS" } else { "FAIL" },
                        detail: format!("{:.3} V (measured 0.8 vs 0.4 V)", vh - vs),
                        hard: true,
                    });
                }
            }
        }
    }
    if !gap_rows.is_empty() {
        rows.push(Row {
            label: "HJ V_on > Schottky V_on at every temperature".to_string(),
            outcome: if all_above { "PASS" } else { "FAIL" },
            detail: gap_rows.join(" "),
            hard: true,
        });
    }

    // Hard: Schottky rectification falls by >= 1e3 from the coldest to the
    // hottest temperature
    let ratios: Vec<(f64, f64, bool)> = schottky
        .iter()
        .filter_map(|r| r.rectification_ratio.map(|x| (r.temperature_k, x, r.ratio_is_lower_bound)))
        .collect();
    if ratios.len() >= 2 {
        let first = ratios.first().unwrap();
        let last = ratios.last().unwrap();
        let fall = first.1 / last.1;
        let qual = |lb: bool| if lb { ">=" } else { "=" };
        rows.push(Row {
            label: "Schottky on/off ratio falls >= 1e3 toward 683 K".to_string(),
            outcome: if fall >= 1e3 { "PASS" } else { "FAIL" },
            detail: format!(
                "{:.0}K {} {:.2e} -> {:.0}K {} {:.2e} (fall {:.1e}; measured 1e6 -> 1e3)",
                first.0,
                qual(first.2),
                first.1,
                last.0,
                qual(last.2),
                last.1,
                fall
            ),
            hard: true,
        });
    }

    // Hard: HJ reverse leakage below the Schottky value at every common T
    let mut leak_rows = Vec::new();
    let mut all_below = true;
    for s in &schottky {
        if let Some(h) = hj.iter().find(|h| near(h.temperature_k, s.temperature_k)) {
            if let (Some(ls), Some(lh)) = (s.leakage_at_minus3v_a_cm2, h.leakage_at_minus3v_a_cm2)
            {
                all_below &= lh < ls;
                leak_rows.push(format!("{:.0}K:{:.1e}/{:.1e}", s.temperature_k, lh, ls));
            }
        }
    }
    if !leak_rows.is_empty() {
        rows.push(Row {
            label: "HJ reverse leakage below Schottky at every temperature".to_string(),
            outcome: if all_below { "PASS" } else { "FAIL" },
            detail: format!("HJ/Schottky at -3 V: {}", leak_rows.join(" ")),
            hard: true,
        });
    }

    // Note rows for noise-floor-limited values
    for r in hj.iter().filter(|r| r.leakage_below_noise_floor) {
        rows.push(Row {
            label: format!("HJ reverse leakage at {:.0} K", r.temperature_k),
            outcome: "info",
            detail: format!(
                "<= noise floor; reported value {:.2e} A/cm2 is an upper bound from the solver",
                r.leakage_at_minus3v_a_cm2.unwrap_or(0.0)
            ),
            hard: false,
        });
    }

    // Hard: heterojunction ideality window at room temperature
    if let Some(r) = hj.iter().find(|r| near(r.temperature_k, 298.0)) {
        if let Some(n) = r.min_ideality {
            let ok = (1.8..=2.2).contains(&n);
            rows.push(Row {
                label: "HJ min ideality in [1.8, 2.2] at room temperature".to_string(),
                outcome: if ok { "PASS" } else { "FAIL" },
                detail: format!("{n:.3} (measured 2)"),
                hard: true,
            });
        }
    }
    if let Some(r) = schottky.iter().find(|r| near(r.temperature_k, 298.0)) {
        if let Some(n) = r.min_ideality {
            let ok = n <= 1.10;
            rows.push(Row {
                label: "Schottky min ideality <= 1.10 at room temperature".to_string(),
                outcome: if ok { "PASS" } else { "FAIL" },
                detail: format!("{n:.3} (measured 1.09)"),
                hard: true,
            });
        }
    }

    // Render
    println!("comparison against the embedded reference dataset");
    println!("{}", "-".repeat(72));
    let mut hard_fail = false;
    for row in &rows {
        println!("[{:^4}] {}", row.outcome, row.label);
        println!("       {}", row.detail);
        if row.hard && row.outcome == "FAIL" {
            hard_fail = true;
        }
    }
    println!("{}", "-".repeat(72));
    let verdict = if hard_fail { "FAIL" } else { "PASS" };
    println!("overall: {verdict}");
    Ok(!hard_fail)
}

/// `show-config`: the fully resolved configuration, TOML-formatted.
pub fn show_config(cfg: &RunConfig) -> Result<()> {
    let text = toml::to_string_pretty(cfg)
        .map_err(|e| Error::config(format!("config serialization failed: {e}")))?;
    print!("{text}");
    Ok(())
}
