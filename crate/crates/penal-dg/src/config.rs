//! Run configuration: flat INI-style config files, programmatic builders,
//! and the executor turning a configuration into a completed run.

use crate::diagnostics::{
    l2_error_nodes, l2_error_region_1d, region_nodes_2d, solid_nodes_2d, write_snapshot_1d,
    write_snapshot_2d, RunRecord,
};
use crate::mask::{MaskGeometry, MaskParams};
use crate::operator1d::{
    Boundary1d, CancelFluxMode, FluxScheme, LineScratch, Mesh1d, Operator1d, PenalizationConfig,
};
use crate::operator2d::{Mesh2d, Operator2d, Penalization2d, Physics2d, Workspace2d};
use crate::time::{Rk3, TimeConfig};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

pub type IniSections = BTreeMap<String, BTreeMap<String, String>>;

/// Parse flat `key = value` text with `[section]` headers. `#` and `;` start
/// comments; blank lines are ignored.
pub fn parse_ini(text: &str) -> Result<IniSections> {
    let mut sections: IniSections = BTreeMap::new();
    let mut current = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find(['#', ';']) {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {}: unclosed section", lineno + 1)))?;
            current = name.trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        if current.is_empty() {
            return Err(Error::Config(format!(
                "line {}: key before any [section]",
                lineno + 1
            )));
        }
        sections
            .get_mut(&current)
            .unwrap()
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(sections)
}

fn get<'a>(ini: &'a IniSections, section: &str, key: &str) -> Result<&'a str> {
    ini.get(section)
        .and_then(|s| s.get(key))
        .map(|s| s.as_str())
        .ok_or_else(|| Error::Config(format!("missing key '{key}' in section [{section}]")))
}

fn opt<'a>(ini: &'a IniSections, section: &str, key: &str) -> Option<&'a str> {
    ini.get(section).and_then(|s| s.get(key)).map(|s| s.as_str())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    // Accept a trailing "pi" multiplier, e.g. "8pi".
    if let Some(prefix) = s.strip_suffix("pi") {
        let base = if prefix.is_empty() { 1.0 } else { parse_f64(prefix, what)? };
        return Ok(base * std::f64::consts::PI);
    }
    s.parse::<f64>()
        .map_err(|_| Error::Config(format!("{what}: cannot parse '{s}' as a number")))
}

fn get_f64(ini: &IniSections, section: &str, key: &str) -> Result<f64> {
    parse_f64(get(ini, section, key)?, &format!("[{section}] {key}"))
}

fn opt_f64(ini: &IniSections, section: &str, key: &str) -> Result<Option<f64>> {
    match opt(ini, section, key) {
        Some(s) => Ok(Some(parse_f64(s, &format!("[{section}] {key}"))?)),
        None => Ok(None),
    }
}

fn get_usize(ini: &IniSections, section: &str, key: &str) -> Result<usize> {
    get(ini, section, key)?
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("[{section}] {key}: expected an integer")))
}

/// A complete run description for either dimension.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case_id: String,
    pub dimension: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub k: [usize; 2],
    pub order: usize,
    pub c: [f64; 2],
    pub nu: [f64; 2],
    pub eta1: f64,
    pub eta2: [Option<f64>; 2],
    pub eta3: [Option<f64>; 2],
    pub u_s: f64,
    pub mask_sharp: bool,
    pub mask_delta: Option<f64>,
    pub geometry: MaskGeometry,
    pub scheme_name: String,
    pub scheme: FluxScheme,
    pub dt: f64,
    pub t_final: f64,
    pub omega: f64,
    pub fluid_lo: [f64; 2],
    pub fluid_hi: [f64; 2],
    pub solid_lo: f64,
    pub solid_hi: f64,
    pub cancel: CancelFluxMode,
}

impl RunConfig {
    pub fn from_ini_text(text: &str) -> Result<Self> {
        let ini = parse_ini(text)?;
        let dimension = get_usize(&ini, "case", "dimension")?;
        if dimension != 1 && dimension != 2 {
            return Err(Error::Config(format!(
                "dimension must be 1 or 2 (got {dimension})"
            )));
        }
        let case_id = opt(&ini, "case", "id").unwrap_or("run").to_string();

        let x_range = [get_f64(&ini, "domain", "x_min")?, get_f64(&ini, "domain", "x_max")?];
        let y_range = if dimension == 2 {
            [get_f64(&ini, "domain", "y_min")?, get_f64(&ini, "domain", "y_max")?]
        } else {
            [0.0, 1.0]
        };
        let k = if dimension == 2 {
            [get_usize(&ini, "mesh", "kx")?, get_usize(&ini, "mesh", "ky")?]
        } else {
            [get_usize(&ini, "mesh", "k")?, 1]
        };
        let order = get_usize(&ini, "mesh", "n")?;

        let (c, nu) = if dimension == 2 {
            (
                [get_f64(&ini, "physics", "c_x")?, get_f64(&ini, "physics", "c_y")?],
                [get_f64(&ini, "physics", "nu_x")?, get_f64(&ini, "physics", "nu_y")?],
            )
        } else {
            (
                [get_f64(&ini, "physics", "c")?, 0.0],
                [get_f64(&ini, "physics", "nu")?, 0.0],
            )
        };

        let eta1 = get_f64(&ini, "penalization", "eta1")?;
        let (eta2, eta3) = if dimension == 2 {
            (
                [
                    opt_f64(&ini, "penalization", "eta2_x")?,
                    opt_f64(&ini, "penalization", "eta2_y")?,
                ],
                [
                    opt_f64(&ini, "penalization", "eta3_x")?,
                    opt_f64(&ini, "penalization", "eta3_y")?,
                ],
            )
        } else {
            (
                [opt_f64(&ini, "penalization", "eta2")?, None],
                [opt_f64(&ini, "penalization", "eta3")?, None],
            )
        };
        let u_s = opt_f64(&ini, "penalization", "u_s")?.unwrap_or(0.0);

        let variant = opt(&ini, "mask", "variant").unwrap_or("sharp");
        let (mask_sharp, mask_delta) = match variant {
            "sharp" => (true, None),
            "smooth" => (false, Some(get_f64(&ini, "mask", "delta")?)),
            other => {
                return Err(Error::Config(format!(
                    "mask variant must be sharp or smooth (got '{other}')"
                )))
            }
        };
        let geometry = match opt(&ini, "mask", "geometry").unwrap_or("interval") {
            "interval" => MaskGeometry::Interval1d {
                start: get_f64(&ini, "mask", "solid_start")?,
                width: get_f64(&ini, "mask", "solid_width")?,
            },
            "l_shape" => MaskGeometry::LShape2d {
                corner: [
                    get_f64(&ini, "mask", "corner_x")?,
                    get_f64(&ini, "mask", "corner_y")?,
                ],
                arm_length: [
                    get_f64(&ini, "mask", "arm_x")?,
                    get_f64(&ini, "mask", "arm_y")?,
                ],
                thickness: get_f64(&ini, "mask", "width")?,
            },
            other => {
                return Err(Error::Config(format!(
                    "geometry must be interval or l_shape (got '{other}')"
                )))
            }
        };

        let scheme_name = opt(&ini, "scheme", "preset").unwrap_or("upwind").to_string();
        let mut scheme = FluxScheme::parse(&scheme_name)?;
        if let Some(v) = opt_f64(&ini, "scheme", "alpha")? {
            scheme.alpha = v;
        }
        if let Some(v) = opt_f64(&ini, "scheme", "beta")? {
            scheme.beta = v;
        }
        if let Some(v) = opt_f64(&ini, "scheme", "gamma")? {
            scheme.gamma = v;
        }
        if let Some(v) = opt_f64(&ini, "scheme", "delta")? {
            scheme.delta = v;
        }

        let dt = get_f64(&ini, "time", "dt")?;
        let t_final = get_f64(&ini, "time", "t_final")?;
        let omega = get_f64(&ini, "initial", "omega")?;

        let (fluid_lo, fluid_hi, solid_lo, solid_hi) = if dimension == 2 {
            (
                [
                    get_f64(&ini, "regions", "fluid_x_lo")?,
                    get_f64(&ini, "regions", "fluid_y_lo")?,
                ],
                [
                    get_f64(&ini, "regions", "fluid_x_hi")?,
                    get_f64(&ini, "regions", "fluid_y_hi")?,
                ],
                0.0,
                0.0,
            )
        } else {
            let (g_lo, g_hi) = match &geometry {
                MaskGeometry::Interval1d { start, width } => (*start, start + width),
                _ => (0.0, 0.0),
            };
            (
                [get_f64(&ini, "regions", "fluid_lo")?, 0.0],
                [get_f64(&ini, "regions", "fluid_hi")?, 0.0],
                opt_f64(&ini, "regions", "solid_lo")?.unwrap_or(g_lo),
                opt_f64(&ini, "regions", "solid_hi")?.unwrap_or(g_hi),
            )
        };

        let cancel = match opt(&ini, "solver", "cancel_physical_flux").unwrap_or("auto") {
            "auto" => CancelFluxMode::Auto,
            "on" => CancelFluxMode::On,
            "off" => CancelFluxMode::Off,
            other => {
                return Err(Error::Config(format!(
                    "cancel_physical_flux must be auto, on, or off (got '{other}')"
                )))
            }
        };

        Ok(RunConfig {
            case_id,
            dimension,
            x_range,
            y_range,
            k,
            order,
            c,
            nu,
            eta1,
            eta2,
            eta3,
            u_s,
            mask_sharp,
            mask_delta,
            geometry,
            scheme_name,
            scheme,
            dt,
            t_final,
            omega,
            fluid_lo,
            fluid_hi,
            solid_lo,
            solid_hi,
            cancel,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_ini_text(&text)
    }

    fn mask_params(&self) -> Result<MaskParams> {
        if self.mask_sharp {
            Ok(MaskParams::sharp())
        } else {
            MaskParams::smooth(self.mask_delta.ok_or_else(|| {
                Error::Config("smooth mask requires a delta value".into())
            })?)
        }
    }

    /// Record with the run's metadata filled in and zeroed errors.
    pub fn skeleton_record(&self) -> RunRecord {
        RunRecord {
            case_id: self.case_id.clone(),
            k: if self.dimension == 2 {
                format!("{}x{}", self.k[0], self.k[1])
            } else {
                format!("{}", self.k[0])
            },
            n: self.order,
            dt: self.dt,
            t_final: self.t_final,
            eta1: self.eta1,
            eta2: self.eta2[0],
            eta3: self.eta3[0],
            scheme: self.scheme_name.clone(),
            mask_delta: self.mask_delta,
            error_fluid: 0.0,
            error_solid: 0.0,
        }
    }
}

/// Completed run: the CSV record plus the final nodal state.
pub struct RunOutcome {
    pub record: RunRecord,
    pub steps: usize,
    pub final_state: Vec<f64>,
}

/// Execute a configuration, optionally writing nodal snapshots every
/// `snapshot_every` steps into `out_dir`.
pub fn run_with_options(
    cfg: &RunConfig,
    out_dir: Option<&Path>,
    snapshot_every: Option<usize>,
) -> Result<RunOutcome> {
    if !(cfg.dt > 0.0) || cfg.t_final < 0.0 {
        return Err(Error::Config(format!(
            "need dt > 0 and t_final >= 0 (got dt = {}, t_final = {})",
            cfg.dt, cfg.t_final
        )));
    }
    match cfg.dimension {
        1 => run_1d(cfg, out_dir, snapshot_every),
        2 => run_2d(cfg, out_dir, snapshot_every),
        d => Err(Error::Config(format!("dimension must be 1 or 2 (got {d})"))),
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    run_with_options(cfg, None, None)
}

fn snapshot_path(out_dir: &Path, case_id: &str, step: usize) -> std::path::PathBuf {
    out_dir.join(format!("{case_id}_step{step:07}.csv"))
}

fn run_1d(cfg: &RunConfig, out_dir: Option<&Path>, snapshot_every: Option<usize>) -> Result<RunOutcome> {
    let mesh = Mesh1d::new(cfg.x_range[0], cfg.x_range[1], cfg.k[0])?;
    let penal = PenalizationConfig::new(cfg.eta1, cfg.eta2[0], cfg.eta3[0], cfg.u_s)?;
    let op = Operator1d::new(
        cfg.order,
        mesh,
        cfg.c[0],
        cfg.nu[0],
        penal,
        cfg.scheme,
        &cfg.geometry,
        &cfg.mask_params()?,
        Boundary1d::Periodic,
        cfg.cancel,
    )?;
    let omega = cfg.omega;
    let mut u = op.project(|x| (omega * x).sin());

    let mut steps = 0;
    if cfg.t_final > 0.0 {
        let mut time = TimeConfig::new(cfg.dt, cfg.t_final)?;
        time.record_interval = snapshot_every;
        let mut ws = LineScratch::new();
        let mut rk = Rk3::new(op.n_dof());
        let mut rhs = |x: &[f64], out: &mut [f64]| op.rhs(x, &mut ws, out);
        steps = rk.integrate(&mut rhs, &mut u, &time, |step, _t, state| {
            if let (Some(dir), Some(_)) = (out_dir, snapshot_every) {
                let _ = write_snapshot_1d(&snapshot_path(dir, &cfg.case_id, step), &op, state);
            }
        })?;
    }

    let (error_fluid, _) =
        l2_error_region_1d(&op, &u, cfg.fluid_lo[0], cfg.fluid_hi[0], |_| 0.0)?;
    let (error_solid, _) = l2_error_region_1d(&op, &u, cfg.solid_lo, cfg.solid_hi, |_| 0.0)?;
    let mut record = cfg.skeleton_record();
    record.error_fluid = error_fluid;
    record.error_solid = error_solid;
    Ok(RunOutcome {
        record,
        steps,
        final_state: u,
    })
}

fn run_2d(cfg: &RunConfig, out_dir: Option<&Path>, snapshot_every: Option<usize>) -> Result<RunOutcome> {
    let mesh = Mesh2d::new(cfg.x_range, cfg.y_range, cfg.k[0], cfg.k[1])?;
    let penal = Penalization2d {
        eta1: cfg.eta1,
        eta2: cfg.eta2,
        eta3: cfg.eta3,
        u_s: cfg.u_s,
    };
    // Validate both axis configurations up front.
    penal.axis_config(0)?;
    penal.axis_config(1)?;
    let op = Operator2d::new(
        cfg.order,
        mesh,
        Physics2d { c: cfg.c, nu: cfg.nu },
        penal,
        cfg.scheme,
        &cfg.geometry,
        &cfg.mask_params()?,
        cfg.cancel,
    )?;
    let omega = cfg.omega;
    let mut u = op.project(|x, y| (omega * (x + y)).sin());

    let mut steps = 0;
    if cfg.t_final > 0.0 {
        let mut time = TimeConfig::new(cfg.dt, cfg.t_final)?;
        time.record_interval = snapshot_every;
        let mut ws = Workspace2d::new();
        let mut rk = Rk3::new(op.n_dof());
        let mut rhs = |x: &[f64], out: &mut [f64]| op.rhs(x, &mut ws, out);
        steps = rk.integrate(&mut rhs, &mut u, &time, |step, _t, state| {
            if let (Some(dir), Some(_)) = (out_dir, snapshot_every) {
                let _ = write_snapshot_2d(&snapshot_path(dir, &cfg.case_id, step), &op, state);
            }
        })?;
    }

    let fluid_nodes = region_nodes_2d(&op, cfg.fluid_lo, cfg.fluid_hi);
    let error_fluid = l2_error_nodes(&u, &fluid_nodes, 0.0)?;
    let solid_nodes = solid_nodes_2d(&op);
    let error_solid = l2_error_nodes(&u, &solid_nodes, 0.0)?;
    let mut record = cfg.skeleton_record();
    record.error_fluid = error_fluid;
    record.error_solid = error_solid;
    Ok(RunOutcome {
        record,
        steps,
        final_state: u,
    })
}

/// Sweepable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eta1,
    Eta2,
    Eta3,
    Delta,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "eta1" => Ok(SweepParam::Eta1),
            "eta2" => Ok(SweepParam::Eta2),
            "eta3" => Ok(SweepParam::Eta3),
            "delta" => Ok(SweepParam::Delta),
            other => Err(Error::Config(format!(
                "unknown sweep parameter '{other}' (expected eta1, eta2, eta3, or delta)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Eta1 => "eta1",
            SweepParam::Eta2 => "eta2",
            SweepParam::Eta3 => "eta3",
            SweepParam::Delta => "delta",
        }
    }
}

/// Clone the base configuration with one swept parameter replaced (both
/// directions at once in 2D).
pub fn with_sweep_value(base: &RunConfig, param: SweepParam, value: f64) -> RunConfig {
    let mut cfg = base.clone();
    match param {
        SweepParam::Eta1 => cfg.eta1 = value,
        SweepParam::Eta2 => {
            cfg.eta2[0] = Some(value);
            if cfg.dimension == 2 {
                cfg.eta2[1] = Some(value);
            }
        }
        SweepParam::Eta3 => {
            cfg.eta3[0] = Some(value);
            if cfg.dimension == 2 {
                cfg.eta3[1] = Some(value);
            }
        }
        SweepParam::Delta => {
            cfg.mask_sharp = false;
            cfg.mask_delta = Some(value);
        }
    }
    cfg.case_id = format!("{}_{}={:e}", base.case_id, param.name(), value);
    cfg
}

/// Run independent configurations concurrently on up to `jobs` threads,
/// preserving input order in the results.
pub fn run_many(configs: &[RunConfig], jobs: usize) -> Vec<Result<RunOutcome>> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;
    let jobs = jobs.max(1).min(configs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunOutcome>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let out = run(&configs[i]);
                results.lock().unwrap()[i] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect()
}
