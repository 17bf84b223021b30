//! Error norms over fluid/solid subregions, decay sweeps, and CSV output.

use crate::operator1d::Operator1d;
use crate::operator2d::Operator2d;
use crate::{Error, Result};
use std::io::Write;
use std::path::Path;

/// Errors of one completed run over its two report regions.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub error_fluid: f64,
    pub error_solid: f64,
    pub fluid_points: usize,
    pub solid_points: usize,
}

/// Relative geometric tolerance for region-boundary coincidence.
const BOUNDARY_TOL: f64 = 1e-9;

fn axis_in_region(x: f64, elem_mid: f64, lo: f64, hi: f64, tol: f64) -> bool {
    // Nodes strictly inside count; nodes on a region boundary are assigned
    // by their owning element's side, so duplicated interface nodes split
    // between the two regions.
    let above_lo = x > lo + tol || ((x - lo).abs() <= tol && elem_mid > lo);
    let below_hi = x < hi - tol || ((x - hi).abs() <= tol && elem_mid < hi);
    above_lo && below_hi
}

/// Indices of the 1D nodes inside `[lo, hi]`.
pub fn region_nodes_1d(op: &Operator1d, lo: f64, hi: f64) -> Vec<usize> {
    let n = op.rule.n_nodes();
    let tol = BOUNDARY_TOL * (op.mesh.x_max - op.mesh.x_min).abs();
    let mut nodes = Vec::new();
    for e in 0..op.mesh.k {
        let mid = op.mesh.x_left(e) + 0.5 * op.mesh.dx();
        for j in 0..n {
            if axis_in_region(op.node_x(e, j), mid, lo, hi, tol) {
                nodes.push(e * n + j);
            }
        }
    }
    nodes
}

/// Root-mean-square deviation from `exact` over the nodes inside `[lo, hi]`,
/// normalized by the number of nodes in the region.
pub fn l2_error_region_1d(
    op: &Operator1d,
    u: &[f64],
    lo: f64,
    hi: f64,
    exact: impl Fn(f64) -> f64,
) -> Result<(f64, usize)> {
    let nodes = region_nodes_1d(op, lo, hi);
    if nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let n = op.rule.n_nodes();
    let mut sum_sq = 0.0;
    for &p in &nodes {
        let x = op.node_x(p / n, p % n);
        let d = u[p] - exact(x);
        sum_sq += d * d;
    }
    Ok(((sum_sq / nodes.len() as f64).sqrt(), nodes.len()))
}

/// Indices of the 2D nodes inside the box `[lo, hi]` per axis.
pub fn region_nodes_2d(op: &Operator2d, lo: [f64; 2], hi: [f64; 2]) -> Vec<usize> {
    let n = op.rule.n_nodes();
    let tol_x = BOUNDARY_TOL * (op.mesh.x_max - op.mesh.x_min).abs();
    let tol_y = BOUNDARY_TOL * (op.mesh.y_max - op.mesh.y_min).abs();
    let mut nodes = Vec::new();
    for ey in 0..op.mesh.ky {
        let mid_y = op.mesh.y_min + (ey as f64 + 0.5) * op.mesh.dy();
        for ex in 0..op.mesh.kx {
            let mid_x = op.mesh.x_min + (ex as f64 + 0.5) * op.mesh.dx();
            for iy in 0..n {
                for ix in 0..n {
                    let p = op.node_pos(ex, ey, ix, iy);
                    if axis_in_region(p[0], mid_x, lo[0], hi[0], tol_x)
                        && axis_in_region(p[1], mid_y, lo[1], hi[1], tol_y)
                    {
                        nodes.push(op.node_index(ex, ey, ix, iy));
                    }
                }
            }
        }
    }
    nodes
}

/// Nodes whose owning element is solid (the solid error region of the
/// 2D experiments).
pub fn solid_nodes_2d(op: &Operator2d) -> Vec<usize> {
    let n = op.rule.n_nodes();
    let mut nodes = Vec::new();
    for ey in 0..op.mesh.ky {
        for ex in 0..op.mesh.kx {
            if !op.solid_elements()[ey * op.mesh.kx + ex] {
                continue;
            }
            for iy in 0..n {
                for ix in 0..n {
                    nodes.push(op.node_index(ex, ey, ix, iy));
                }
            }
        }
    }
    nodes
}

/// RMS deviation over an explicit node set.
pub fn l2_error_nodes(u: &[f64], nodes: &[usize], exact_value: f64) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let sum_sq: f64 = nodes
        .iter()
        .map(|&p| {
            let d = u[p] - exact_value;
            d * d
        })
        .sum();
    Ok((sum_sq / nodes.len() as f64).sqrt())
}

/// One row of a decay sweep; a diverged run keeps its ladder position but is
/// excluded from the fit.
#[derive(Debug, Clone)]
pub struct DecayRow {
    pub eta1: f64,
    pub error_fluid: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DecaySweep {
    pub rows: Vec<DecayRow>,
    /// Log-log slope of error versus eta1 over the successful rows.
    pub slope: f64,
}

/// Run a case per eta1 value and fit the log-log decay slope of the fluid
/// error. The ladder must span at least two decades.
pub fn eta1_decay_sweep(
    eta1_values: &[f64],
    mut run: impl FnMut(f64) -> Result<f64>,
) -> Result<DecaySweep> {
    let finite: Vec<f64> = eta1_values.iter().copied().filter(|v| *v > 0.0).collect();
    if finite.len() != eta1_values.len() || eta1_values.is_empty() {
        return Err(Error::DegenerateLadder(
            "eta1 values must be positive".into(),
        ));
    }
    let max = finite.iter().cloned().fold(f64::MIN, f64::max);
    let min = finite.iter().cloned().fold(f64::MAX, f64::min);
    if max / min < 100.0 * (1.0 - 1e-12) {
        return Err(Error::DegenerateLadder(format!(
            "ladder must span at least two decades (got {min:e}..{max:e})"
        )));
    }

    let mut rows = Vec::new();
    for &eta1 in eta1_values {
        match run(eta1) {
            Ok(err) => rows.push(DecayRow {
                eta1,
                error_fluid: Some(err),
                note: None,
            }),
            Err(e) => rows.push(DecayRow {
                eta1,
                error_fluid: None,
                note: Some(e.to_string()),
            }),
        }
    }

    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.error_fluid.map(|e| (r.eta1.ln(), e.ln())))
        .filter(|(_, y)| y.is_finite())
        .collect();
    let distinct = {
        let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.len()
    };
    if distinct < 2 {
        return Err(Error::DegenerateLadder(
            "need at least two distinct successful eta1 values to fit a slope".into(),
        ));
    }
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let slope = pts
        .iter()
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / pts.iter().map(|(x, _)| (x - xm) * (x - xm)).sum::<f64>();
    Ok(DecaySweep { rows, slope })
}

/// One CSV row of experiment output.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub case_id: String,
    /// "40" in 1D, "20x20" in 2D.
    pub k: String,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub eta1: f64,
    pub eta2: Option<f64>,
    pub eta3: Option<f64>,
    pub scheme: String,
    pub mask_delta: Option<f64>,
    pub error_fluid: f64,
    pub error_solid: f64,
}

pub const CSV_HEADER: &str =
    "case_id,k,n,dt,t_final,eta1,eta2,eta3,scheme,mask_delta,error_fluid,error_solid";

/// 17 significant digits, fixed scientific format.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

impl RunRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.case_id,
            self.k,
            self.n,
            fmt_float(self.dt),
            fmt_float(self.t_final),
            fmt_float(self.eta1),
            fmt_opt(self.eta2),
            fmt_opt(self.eta3),
            self.scheme,
            fmt_opt(self.mask_delta),
            fmt_float(self.error_fluid),
            fmt_float(self.error_solid),
        )
    }
}

/// CSV body (header plus one row per record), suitable for byte-identity
/// checks across reruns.
pub fn csv_body(records: &[RunRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(csv_body(records).as_bytes())?;
    Ok(())
}

/// Nodal snapshot rows: `x[,y],u`.
pub fn write_snapshot_1d(path: &Path, op: &Operator1d, u: &[f64]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "x,u")?;
    let n = op.rule.n_nodes();
    for e in 0..op.mesh.k {
        for j in 0..n {
            writeln!(f, "{},{}", fmt_float(op.node_x(e, j)), fmt_float(u[e * n + j]))?;
        }
    }
    Ok(())
}

pub fn write_snapshot_2d(path: &Path, op: &Operator2d, u: &[f64]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "x,y,u")?;
    let n = op.rule.n_nodes();
    for ey in 0..op.mesh.ky {
        for ex in 0..op.mesh.kx {
            for iy in 0..n {
                for ix in 0..n {
                    let p = op.node_pos(ex, ey, ix, iy);
                    writeln!(
                        f,
                        "{},{},{}",
                        fmt_float(p[0]),
                        fmt_float(p[1]),
                        fmt_float(u[op.node_index(ex, ey, ix, iy)])
                    )?;
                }
            }
        }
    }
    Ok(())
}
