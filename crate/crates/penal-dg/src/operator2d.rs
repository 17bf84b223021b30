//! Tensor-product extension of the penalized operator to 2D quadrilateral
//! meshes.
//!
//! The 2D equation is separable in its flux divergence: the right-hand side
//! is the x-direction 1D operator applied along every x-line of nodes, plus
//! the y-direction operator along every y-line, plus the pointwise reaction.
//! Both sweeps reuse the 1D line kernel.

use crate::basis::{gauss_lobatto_rule, QuadratureRule};
use crate::mask::{interface_node_mask, mask_value, InterfaceSide, MaskGeometry, MaskParams};
use crate::operator1d::{
    add_line_flux_rhs, effective_coefficients, CancelFluxMode, FluxScheme, LineBc, LineScratch,
    PenalizationConfig, CANCEL_DETECT_EPS,
};
use crate::{Error, Result};

/// Uniform 2D mesh of `kx * ky` square elements.
#[derive(Debug, Clone)]
pub struct Mesh2d {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub kx: usize,
    pub ky: usize,
}

impl Mesh2d {
    pub fn new(x: [f64; 2], y: [f64; 2], kx: usize, ky: usize) -> Result<Self> {
        if kx == 0 || ky == 0 || !(x[1] > x[0]) || !(y[1] > y[0]) {
            return Err(Error::Mesh(format!(
                "need kx, ky >= 1 and increasing bounds (got kx = {kx}, ky = {ky})"
            )));
        }
        Ok(Mesh2d {
            x_min: x[0],
            x_max: x[1],
            y_min: y[0],
            y_max: y[1],
            kx,
            ky,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.kx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ky as f64
    }
}

/// Constant advection speed and viscosity per direction.
#[derive(Debug, Clone, Copy)]
pub struct Physics2d {
    pub c: [f64; 2],
    pub nu: [f64; 2],
}

/// Per-direction first- and second-derivative penalties around a shared
/// reaction penalty.
#[derive(Debug, Clone, Copy)]
pub struct Penalization2d {
    pub eta1: f64,
    pub eta2: [Option<f64>; 2],
    pub eta3: [Option<f64>; 2],
    pub u_s: f64,
}

impl Penalization2d {
    pub fn axis_config(&self, axis: usize) -> Result<PenalizationConfig> {
        PenalizationConfig::new(self.eta1, self.eta2[axis], self.eta3[axis], self.u_s)
    }
}

/// Scratch buffers for the two line sweeps.
pub struct Workspace2d {
    u_line: Vec<f64>,
    out_line: Vec<f64>,
    cancel_line: Vec<bool>,
    scratch: LineScratch,
}

impl Workspace2d {
    pub fn new() -> Self {
        Workspace2d {
            u_line: Vec::new(),
            out_line: Vec::new(),
            cancel_line: Vec::new(),
            scratch: LineScratch::new(),
        }
    }
}

impl Default for Workspace2d {
    fn default() -> Self {
        Self::new()
    }
}

/// The assembled 2D operator on tensor-product Gauss-Lobatto nodes with
/// periodic boundaries.
pub struct Operator2d {
    pub rule: QuadratureRule,
    pub mesh: Mesh2d,
    pub scheme: FluxScheme,
    pub penal: Penalization2d,
    pub phys: Physics2d,
    chi: Vec<f64>,
    /// Effective coefficients stored in sweep order per direction: the
    /// x-direction array is line-contiguous over (ey, iy) lines, the
    /// y-direction over (ex, ix) lines.
    c_lines: [Vec<f64>; 2],
    nu_lines: [Vec<f64>; 2],
    solid: Vec<bool>,
    cancel: [Vec<bool>; 2],
}

impl Operator2d {
    pub fn new(
        order: usize,
        mesh: Mesh2d,
        phys: Physics2d,
        penal: Penalization2d,
        scheme: FluxScheme,
        geometry: &MaskGeometry,
        mask: &MaskParams,
        cancel_mode: CancelFluxMode,
    ) -> Result<Self> {
        let rule = gauss_lobatto_rule(order)?;
        let n = rule.n_nodes();
        let (kx, ky) = (mesh.kx, mesh.ky);
        let (dx, dy) = (mesh.dx(), mesh.dy());

        let elem_center = |ex: usize, ey: usize| {
            [
                mesh.x_min + (ex as f64 + 0.5) * dx,
                mesh.y_min + (ey as f64 + 0.5) * dy,
            ]
        };
        let solid: Vec<bool> = (0..kx * ky)
            .map(|e| geometry.is_solid(&elem_center(e % kx, e / kx)))
            .collect();

        let node_index = |ex: usize, ey: usize, ix: usize, iy: usize| {
            ((ey * kx + ex) * n + iy) * n + ix
        };
        let node_pos = |ex: usize, ey: usize, ix: usize, iy: usize| {
            [
                mesh.x_min + ex as f64 * dx + 0.5 * (rule.nodes[ix] + 1.0) * dx,
                mesh.y_min + ey as f64 * dy + 0.5 * (rule.nodes[iy] + 1.0) * dy,
            ]
        };

        let n_dof = kx * ky * n * n;
        let mut chi = vec![0.0; n_dof];
        for ey in 0..ky {
            for ex in 0..kx {
                let e = ey * kx + ex;
                for iy in 0..n {
                    for ix in 0..n {
                        let p = node_index(ex, ey, ix, iy);
                        chi[p] = if mask.sharp {
                            if solid[e] {
                                1.0
                            } else {
                                0.0
                            }
                        } else {
                            mask_value(&node_pos(ex, ey, ix, iy), geometry, mask)?
                        };
                    }
                }
                if !mask.sharp {
                    // Face-node overrides across solid/fluid element faces.
                    let side = if solid[e] {
                        InterfaceSide::SolidElement
                    } else {
                        InterfaceSide::FluidElement
                    };
                    let neighbors = [
                        (if ex == 0 { kx - 1 } else { ex - 1 }, ey, 0usize, true),
                        (if ex == kx - 1 { 0 } else { ex + 1 }, ey, n - 1, true),
                        (ex, if ey == 0 { ky - 1 } else { ey - 1 }, 0, false),
                        (ex, if ey == ky - 1 { 0 } else { ey + 1 }, n - 1, false),
                    ];
                    for (nx, ny, face, along_x) in neighbors {
                        if solid[ny * kx + nx] == solid[e] {
                            continue;
                        }
                        let v = interface_node_mask(side, mask);
                        for t in 0..n {
                            let p = if along_x {
                                node_index(ex, ey, face, t)
                            } else {
                                node_index(ex, ey, t, face)
                            };
                            chi[p] = v;
                        }
                    }
                }
            }
        }

        // Effective coefficients per direction, stored line-contiguously in
        // the order each sweep consumes them.
        let mut c_lines = [vec![0.0; n_dof], vec![0.0; n_dof]];
        let mut nu_lines = [vec![0.0; n_dof], vec![0.0; n_dof]];
        for axis in 0..2 {
            let cfg = penal.axis_config(axis)?;
            for ey in 0..ky {
                for ex in 0..kx {
                    for iy in 0..n {
                        for ix in 0..n {
                            let p = node_index(ex, ey, ix, iy);
                            let (ch, nh) = effective_coefficients(
                                phys.c[axis],
                                phys.nu[axis],
                                chi[p],
                                &cfg,
                            );
                            let q = if axis == 0 {
                                ((ey * n + iy) * kx + ex) * n + ix
                            } else {
                                ((ex * n + ix) * ky + ey) * n + iy
                            };
                            c_lines[axis][q] = ch;
                            nu_lines[axis][q] = nh;
                        }
                    }
                }
            }
        }

        let mut cancel = [vec![false; kx * ky], vec![false; kx * ky]];
        for axis in 0..2 {
            for ey in 0..ky {
                for ex in 0..kx {
                    let e = ey * kx + ex;
                    cancel[axis][e] = match cancel_mode {
                        CancelFluxMode::Off => false,
                        CancelFluxMode::On => solid[e],
                        CancelFluxMode::Auto => {
                            solid[e] && {
                                let mut all_zero = true;
                                for iy in 0..n {
                                    for ix in 0..n {
                                        let q = if axis == 0 {
                                            ((ey * n + iy) * kx + ex) * n + ix
                                        } else {
                                            ((ex * n + ix) * ky + ey) * n + iy
                                        };
                                        all_zero &= c_lines[axis][q].abs() < CANCEL_DETECT_EPS
                                            && nu_lines[axis][q].abs() < CANCEL_DETECT_EPS;
                                    }
                                }
                                all_zero
                            }
                        }
                    };
                }
            }
        }

        Ok(Operator2d {
            rule,
            mesh,
            scheme,
            penal,
            phys,
            chi,
            c_lines,
            nu_lines,
            solid,
            cancel,
        })
    }

    pub fn n_dof(&self) -> usize {
        self.mesh.kx * self.mesh.ky * self.rule.n_nodes() * self.rule.n_nodes()
    }

    pub fn node_index(&self, ex: usize, ey: usize, ix: usize, iy: usize) -> usize {
        let n = self.rule.n_nodes();
        ((ey * self.mesh.kx + ex) * n + iy) * n + ix
    }

    pub fn node_pos(&self, ex: usize, ey: usize, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.mesh.x_min
                + ex as f64 * self.mesh.dx()
                + 0.5 * (self.rule.nodes[ix] + 1.0) * self.mesh.dx(),
            self.mesh.y_min
                + ey as f64 * self.mesh.dy()
                + 0.5 * (self.rule.nodes[iy] + 1.0) * self.mesh.dy(),
        ]
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn solid_elements(&self) -> &[bool] {
        &self.solid
    }

    pub fn cancelled_elements(&self, axis: usize) -> &[bool] {
        &self.cancel[axis]
    }

    pub fn project(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let n = self.rule.n_nodes();
        let mut u = vec![0.0; self.n_dof()];
        for ey in 0..self.mesh.ky {
            for ex in 0..self.mesh.kx {
                for iy in 0..n {
                    for ix in 0..n {
                        let p = self.node_pos(ex, ey, ix, iy);
                        u[self.node_index(ex, ey, ix, iy)] = f(p[0], p[1]);
                    }
                }
            }
        }
        u
    }

    /// Full right-hand side du/dt: both directional sweeps plus the reaction.
    pub fn rhs(&self, u: &[f64], ws: &mut Workspace2d, out: &mut [f64]) {
        assert_eq!(u.len(), self.n_dof(), "field/operator shape mismatch");
        assert_eq!(out.len(), self.n_dof(), "output shape mismatch");
        let n = self.rule.n_nodes();
        let (kx, ky) = (self.mesh.kx, self.mesh.ky);
        out.fill(0.0);

        // x sweep: one line per (ey, iy).
        ws.u_line.resize(kx * n, 0.0);
        ws.out_line.resize(kx * n, 0.0);
        ws.cancel_line.resize(kx, false);
        for ey in 0..ky {
            for iy in 0..n {
                for ex in 0..kx {
                    ws.cancel_line[ex] = self.cancel[0][ey * kx + ex];
                    for ix in 0..n {
                        ws.u_line[ex * n + ix] = u[self.node_index(ex, ey, ix, iy)];
                    }
                }
                ws.out_line.fill(0.0);
                let line = (ey * n + iy) * kx * n;
                add_line_flux_rhs(
                    &self.rule,
                    self.mesh.dx(),
                    &self.scheme,
                    &LineBc::Periodic,
                    &ws.u_line,
                    &self.c_lines[0][line..line + kx * n],
                    &self.nu_lines[0][line..line + kx * n],
                    &ws.cancel_line,
                    &mut ws.scratch,
                    &mut ws.out_line,
                );
                for ex in 0..kx {
                    for ix in 0..n {
                        out[self.node_index(ex, ey, ix, iy)] += ws.out_line[ex * n + ix];
                    }
                }
            }
        }

        // y sweep: one line per (ex, ix).
        ws.u_line.resize(ky * n, 0.0);
        ws.out_line.resize(ky * n, 0.0);
        ws.cancel_line.resize(ky, false);
        for ex in 0..kx {
            for ix in 0..n {
                for ey in 0..ky {
                    ws.cancel_line[ey] = self.cancel[1][ey * kx + ex];
                    for iy in 0..n {
                        ws.u_line[ey * n + iy] = u[self.node_index(ex, ey, ix, iy)];
                    }
                }
                ws.out_line.fill(0.0);
                let line = (ex * n + ix) * ky * n;
                add_line_flux_rhs(
                    &self.rule,
                    self.mesh.dy(),
                    &self.scheme,
                    &LineBc::Periodic,
                    &ws.u_line,
                    &self.c_lines[1][line..line + ky * n],
                    &self.nu_lines[1][line..line + ky * n],
                    &ws.cancel_line,
                    &mut ws.scratch,
                    &mut ws.out_line,
                );
                for ey in 0..ky {
                    for iy in 0..n {
                        out[self.node_index(ex, ey, ix, iy)] += ws.out_line[ey * n + iy];
                    }
                }
            }
        }

        for p in 0..u.len() {
            out[p] -= self.chi[p] / self.penal.eta1 * (u[p] - self.penal.u_s);
        }
    }

    /// Discrete mass: sum over elements of (dx dy / 4) w_i w_j u_ij.
    pub fn total_mass(&self, u: &[f64]) -> f64 {
        let n = self.rule.n_nodes();
        let cell = 0.25 * self.mesh.dx() * self.mesh.dy();
        let mut m = 0.0;
        for ey in 0..self.mesh.ky {
            for ex in 0..self.mesh.kx {
                for iy in 0..n {
                    for ix in 0..n {
                        m += cell
                            * self.rule.weights[ix]
                            * self.rule.weights[iy]
                            * u[self.node_index(ex, ey, ix, iy)];
                    }
                }
            }
        }
        m
    }
}
