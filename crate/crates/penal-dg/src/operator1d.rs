//! The 1D penalized DG spectral element spatial operator.
//!
//! The semi-discrete system advances nodal values per element with three
//! contributions: volume terms evaluated by collocation quadrature, numerical
//! interface fluxes built from a one-parameter `W` function, and the
//! volume-penalization reaction term. The effective advection speed and
//! viscosity absorb the first- and second-derivative penalties:
//! `c_hat = c + chi/eta2`, `nu_hat = nu - chi/eta3`, evaluated nodally so a
//! single code path serves sharp and smooth masks.

use crate::basis::{gauss_lobatto_rule, QuadratureRule};
use crate::mask::{interface_node_mask, mask_value, InterfaceSide, MaskGeometry, MaskParams};
use crate::{Error, Result};

/// Effective coefficients with zeroed values below this threshold mark a
/// solid element as fully cancelled (physical terms removed).
pub const CANCEL_DETECT_EPS: f64 = 1e-12;

/// Penalization parameters. Absent `eta2`/`eta3` mean the corresponding
/// derivative penalty is switched off entirely.
#[derive(Debug, Clone, Copy)]
pub struct PenalizationConfig {
    pub eta1: f64,
    pub eta2: Option<f64>,
    pub eta3: Option<f64>,
    /// Target value inside the solid (0 in all experiments).
    pub u_s: f64,
}

impl PenalizationConfig {
    pub fn new(eta1: f64, eta2: Option<f64>, eta3: Option<f64>, u_s: f64) -> Result<Self> {
        if !(eta1 > 0.0) {
            return Err(Error::InvalidPenalization(format!(
                "eta1 must be positive (got {eta1})"
            )));
        }
        for (name, v) in [("eta2", eta2), ("eta3", eta3)] {
            if let Some(v) = v {
                if v == 0.0 || !v.is_finite() {
                    return Err(Error::InvalidPenalization(format!(
                        "{name} must be finite and nonzero (got {v}); omit it to disable"
                    )));
                }
            }
        }
        Ok(PenalizationConfig {
            eta1,
            eta2,
            eta3,
            u_s,
        })
    }

    pub fn reaction_only(eta1: f64) -> Self {
        PenalizationConfig {
            eta1,
            eta2: None,
            eta3: None,
            u_s: 0.0,
        }
    }
}

/// Effective advection speed and viscosity at a node with mask value `chi`:
/// `c_hat = c + chi/eta2` and `nu_hat = nu - chi/eta3`, each falling back to
/// the physical value when the corresponding penalty is absent.
pub fn effective_coefficients(
    c: f64,
    nu: f64,
    chi: f64,
    cfg: &PenalizationConfig,
) -> (f64, f64) {
    let c_hat = match cfg.eta2 {
        Some(eta2) => c + chi / eta2,
        None => c,
    };
    let nu_hat = match cfg.eta3 {
        Some(eta3) => nu - chi / eta3,
        None => nu,
    };
    (c_hat, nu_hat)
}

/// The four lambda switches of the `W` interface function: `alpha` for the
/// advective flux, `beta` for the diffusive interface flux, `gamma` for the
/// diffusive-flux traces fed into it, and `delta` for the solution trace `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxScheme {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl FluxScheme {
    /// Upwind advection; viscous switches central (same as BR1).
    pub fn upwind() -> Self {
        FluxScheme {
            alpha: -1.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 0.0,
        }
    }

    /// Bassi-Rebay 1: upwind advection, central viscous traces.
    pub fn br1() -> Self {
        FluxScheme {
            alpha: -1.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 0.0,
        }
    }

    /// Local DG: alternating viscous traces.
    pub fn ldg() -> Self {
        FluxScheme {
            alpha: -1.0,
            beta: -1.0,
            gamma: -1.0,
            delta: 1.0,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "upwind" => Ok(Self::upwind()),
            "br1" => Ok(Self::br1()),
            "ldg" => Ok(Self::ldg()),
            _ => Err(Error::Config(format!(
                "unknown scheme '{name}' (expected upwind, br1, or ldg)"
            ))),
        }
    }
}

/// The unified interface function
/// `W(a, b; lambda) = {{a b}} - (lambda/2) [[|a| b]]`
/// with left/right traces and the jump convention `[[v]] = v_left - v_right`.
/// `lambda = -1` upwinds, `0` averages, `+1` downwinds.
pub fn w_flux(a_left: f64, b_left: f64, a_right: f64, b_right: f64, lambda: f64) -> f64 {
    0.5 * (a_left * b_left + a_right * b_right)
        - 0.5 * lambda * (a_left.abs() * b_left - a_right.abs() * b_right)
}

/// Linear weights of one interface value expanded from the `W` function.
///
/// `f_left`/`f_right` are the literal coefficients of the advective flux on
/// the two solution traces. `g_left`/`g_right` describe the solution trace
/// `U` in the doubled scaling used by the analysis tables (a plain average is
/// `g = 1` on each side, a one-sided trace is `g = 2` and `g = 0`); the
/// literal coefficients in `U` are half of these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceWeights {
    pub f_left: f64,
    pub f_right: f64,
    pub g_left: f64,
    pub g_right: f64,
}

/// Expand the advective `W(c_hat, u; alpha)` and solution-trace
/// `W(1, u; delta)` functions into per-side weights.
pub fn flux_weights(scheme: &FluxScheme, c_hat_left: f64, c_hat_right: f64) -> InterfaceWeights {
    InterfaceWeights {
        f_left: 0.5 * (c_hat_left - scheme.alpha * c_hat_left.abs()),
        f_right: 0.5 * (c_hat_right + scheme.alpha * c_hat_right.abs()),
        g_left: 1.0 - scheme.delta,
        g_right: 1.0 + scheme.delta,
    }
}

/// Uniform 1D mesh of `k` elements.
#[derive(Debug, Clone)]
pub struct Mesh1d {
    pub x_min: f64,
    pub x_max: f64,
    pub k: usize,
}

impl Mesh1d {
    pub fn new(x_min: f64, x_max: f64, k: usize) -> Result<Self> {
        if k == 0 || !(x_max > x_min) {
            return Err(Error::Mesh(format!(
                "need k >= 1 elements and x_max > x_min (got k = {k}, [{x_min}, {x_max}])"
            )));
        }
        Ok(Mesh1d { x_min, x_max, k })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.k as f64
    }

    /// Left edge of element `e`.
    pub fn x_left(&self, e: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * e as f64 / self.k as f64
    }
}

/// Boundary closure of the 1D operator.
#[derive(Debug, Clone, Copy)]
pub enum Boundary1d {
    Periodic,
    /// Exterior ghost traces carry the prescribed boundary values.
    Dirichlet { left: f64, right: f64 },
}

/// Whether interface fluxes of fully penalized solid elements are zeroed in
/// those elements' own equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CancelFluxMode {
    /// Zero when the solid effective coefficients vanish (trivial parameters).
    Auto,
    On,
    Off,
}

pub(crate) enum LineBc {
    Periodic,
    Dirichlet {
        left_value: f64,
        right_value: f64,
        exterior_c: f64,
        exterior_nu: f64,
    },
}

/// Reusable buffers for one spatial-operator line sweep.
pub struct LineScratch {
    u_trace_vol: Vec<f64>,
    u_trace_flux: Vec<f64>,
    fdiff: Vec<f64>,
    flux: Vec<f64>,
}

impl LineScratch {
    pub fn new() -> Self {
        LineScratch {
            u_trace_vol: Vec::new(),
            u_trace_flux: Vec::new(),
            fdiff: Vec::new(),
            flux: Vec::new(),
        }
    }

    fn ensure(&mut self, k: usize, n: usize) {
        self.u_trace_vol.resize(k + 1, 0.0);
        self.u_trace_flux.resize(k + 1, 0.0);
        self.fdiff.resize(k * n, 0.0);
        self.flux.resize(k + 1, 0.0);
    }
}

impl Default for LineScratch {
    fn default() -> Self {
        Self::new()
    }
}

/// Accumulate the flux-divergence part of the penalized operator (everything
/// except the reaction term) for one line of `k` elements into `out`.
///
/// `u`, `c_hat`, `nu_hat`, `out` hold `k * (order + 1)` nodal values;
/// `cancel` flags elements whose own interface fluxes are zeroed.
pub(crate) fn add_line_flux_rhs(
    rule: &QuadratureRule,
    dx: f64,
    scheme: &FluxScheme,
    bc: &LineBc,
    u: &[f64],
    c_hat: &[f64],
    nu_hat: &[f64],
    cancel: &[bool],
    scratch: &mut LineScratch,
    out: &mut [f64],
) {
    let n = rule.n_nodes();
    let k = cancel.len();
    let last = n - 1;
    let jac = 2.0 / dx;
    scratch.ensure(k, n);

    // Trace values (uL, cL, nuL, uR, cR, nuR) at interface i.
    let traces = |i: usize| -> (f64, f64, f64, f64, f64, f64) {
        match bc {
            LineBc::Periodic => {
                let el = if i == 0 { k - 1 } else { i - 1 };
                let er = if i == k { 0 } else { i };
                (
                    u[el * n + last],
                    c_hat[el * n + last],
                    nu_hat[el * n + last],
                    u[er * n],
                    c_hat[er * n],
                    nu_hat[er * n],
                )
            }
            LineBc::Dirichlet {
                left_value,
                right_value,
                exterior_c,
                exterior_nu,
            } => {
                let (ul, cl, nl) = if i == 0 {
                    (*left_value, *exterior_c, *exterior_nu)
                } else {
                    let el = i - 1;
                    (u[el * n + last], c_hat[el * n + last], nu_hat[el * n + last])
                };
                let (ur, cr, nr) = if i == k {
                    (*right_value, *exterior_c, *exterior_nu)
                } else {
                    (u[i * n], c_hat[i * n], nu_hat[i * n])
                };
                (ul, cl, nl, ur, cr, nr)
            }
        }
    };

    // Solution traces: the delta switch lifts the auxiliary gradient, the
    // gamma switch builds the diffusive-flux trace values fed to the
    // interface flux. Gamma orients by the element-outward normal at the
    // face owning the trace, which flips its sign in this loop's global
    // left/right convention; the flip makes the alternating preset pair its
    // gradient and flux traces on opposite sides.
    for i in 0..=k {
        let (ul, _, _, ur, _, _) = traces(i);
        scratch.u_trace_vol[i] = w_flux(1.0, ul, 1.0, ur, scheme.delta);
        scratch.u_trace_flux[i] = w_flux(1.0, ul, 1.0, ur, -scheme.gamma);
    }

    // Auxiliary diffusive flux f_diff = -nu_hat du/dx in weak form, with the
    // delta-lifted solution traces at the element faces.
    for e in 0..k {
        let base = e * n;
        for j in 0..n {
            let mut vol = 0.0;
            for i in 0..n {
                vol += rule.weights[i] * nu_hat[base + i] * rule.deriv[i][j] * u[base + i];
            }
            scratch.fdiff[base + j] = jac * vol / rule.weights[j];
        }
        scratch.fdiff[base] += jac * nu_hat[base] * scratch.u_trace_vol[e] / rule.weights[0];
        scratch.fdiff[base + last] -=
            jac * nu_hat[base + last] * scratch.u_trace_vol[e + 1] / rule.weights[last];
    }

    // Total interface flux: advective W(c_hat, u; alpha) plus diffusive
    // W(1, f_diff; beta) on gamma-lifted diffusive-flux traces.
    for i in 0..=k {
        let (ul, cl, nl, ur, cr, nr) = traces(i);
        let f_adv = w_flux(cl, ul, cr, ur, scheme.alpha);
        let du = scratch.u_trace_flux[i] - scratch.u_trace_vol[i];
        let (fd_l, fd_r) = match bc {
            LineBc::Periodic => {
                let el = if i == 0 { k - 1 } else { i - 1 };
                let er = if i == k { 0 } else { i };
                let fd_l =
                    scratch.fdiff[el * n + last] - jac * nl / rule.weights[last] * du;
                let fd_r = scratch.fdiff[er * n] + jac * nr / rule.weights[0] * du;
                (fd_l, fd_r)
            }
            LineBc::Dirichlet { .. } => {
                // Ghost diffusive-flux traces copy the interior side.
                if i == 0 {
                    let fd_int = scratch.fdiff[0] + jac * nr / rule.weights[0] * du;
                    (fd_int, fd_int)
                } else if i == k {
                    let fd_int =
                        scratch.fdiff[(k - 1) * n + last] - jac * nl / rule.weights[last] * du;
                    (fd_int, fd_int)
                } else {
                    let el = i - 1;
                    let fd_l =
                        scratch.fdiff[el * n + last] - jac * nl / rule.weights[last] * du;
                    let fd_r = scratch.fdiff[i * n] + jac * nr / rule.weights[0] * du;
                    (fd_l, fd_r)
                }
            }
        };
        scratch.flux[i] = f_adv + w_flux(1.0, fd_l, 1.0, fd_r, scheme.beta);
    }

    // Volume terms and flux lifting.
    for e in 0..k {
        let base = e * n;
        let (f_left, f_right) = if cancel[e] {
            (0.0, 0.0)
        } else {
            (scratch.flux[e], scratch.flux[e + 1])
        };
        for j in 0..n {
            let mut vol = 0.0;
            for i in 0..n {
                vol += rule.weights[i]
                    * rule.deriv[i][j]
                    * (c_hat[base + i] * u[base + i] + scratch.fdiff[base + i]);
            }
            out[base + j] += jac * vol / rule.weights[j];
        }
        out[base] += jac * f_left / rule.weights[0];
        out[base + last] -= jac * f_right / rule.weights[last];
    }
}

/// One element of the semi-discrete system with prescribed interface data:
/// numerical fluxes `f_minus`/`f_plus` and solution traces
/// `u_trace_minus`/`u_trace_plus` are taken as given.
///
/// This is the element operator with the numerical fluxes left abstract; the
/// modified-equation analysis and the polynomial-exactness oracle both drive
/// it directly.
#[allow(clippy::too_many_arguments)]
pub fn element_rhs_with_traces(
    rule: &QuadratureRule,
    dx: f64,
    u: &[f64],
    c_hat: &[f64],
    nu_hat: &[f64],
    chi: &[f64],
    penal: &PenalizationConfig,
    f_minus: f64,
    f_plus: f64,
    u_trace_minus: f64,
    u_trace_plus: f64,
) -> Vec<f64> {
    let n = rule.n_nodes();
    let last = n - 1;
    let jac = 2.0 / dx;
    let mut fdiff = vec![0.0; n];
    for j in 0..n {
        let mut vol = 0.0;
        for i in 0..n {
            vol += rule.weights[i] * nu_hat[i] * rule.deriv[i][j] * u[i];
        }
        fdiff[j] = jac * vol / rule.weights[j];
    }
    fdiff[0] += jac * nu_hat[0] * u_trace_minus / rule.weights[0];
    fdiff[last] -= jac * nu_hat[last] * u_trace_plus / rule.weights[last];

    let mut out = vec![0.0; n];
    for j in 0..n {
        let mut vol = 0.0;
        for i in 0..n {
            vol += rule.weights[i] * rule.deriv[i][j] * (c_hat[i] * u[i] + fdiff[i]);
        }
        out[j] = jac * vol / rule.weights[j];
    }
    out[0] += jac * f_minus / rule.weights[0];
    out[last] -= jac * f_plus / rule.weights[last];
    for j in 0..n {
        out[j] -= chi[j] / penal.eta1 * (u[j] - penal.u_s);
    }
    out
}

/// The assembled 1D operator: mesh, basis, nodal mask and effective
/// coefficients, and the boundary closure.
pub struct Operator1d {
    pub rule: QuadratureRule,
    pub mesh: Mesh1d,
    pub scheme: FluxScheme,
    pub penal: PenalizationConfig,
    pub c: f64,
    pub nu: f64,
    pub bc: Boundary1d,
    chi: Vec<f64>,
    c_hat: Vec<f64>,
    nu_hat: Vec<f64>,
    solid: Vec<bool>,
    cancel: Vec<bool>,
}

impl Operator1d {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        order: usize,
        mesh: Mesh1d,
        c: f64,
        nu: f64,
        penal: PenalizationConfig,
        scheme: FluxScheme,
        geometry: &MaskGeometry,
        mask: &MaskParams,
        bc: Boundary1d,
        cancel_mode: CancelFluxMode,
    ) -> Result<Self> {
        let rule = gauss_lobatto_rule(order)?;
        let n = rule.n_nodes();
        let k = mesh.k;
        let dx = mesh.dx();
        if !(dx > 0.0) {
            return Err(Error::Mesh(format!("nonpositive element size {dx}")));
        }

        let solid: Vec<bool> = (0..k)
            .map(|e| geometry.is_solid(&[mesh.x_left(e) + 0.5 * dx]))
            .collect();

        let mut chi = vec![0.0; k * n];
        for e in 0..k {
            for j in 0..n {
                let x = mesh.x_left(e) + 0.5 * (rule.nodes[j] + 1.0) * dx;
                chi[e * n + j] = if mask.sharp {
                    if solid[e] {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    mask_value(&[x], geometry, mask)?
                };
            }
            if !mask.sharp {
                // Duplicated interface nodes across a solid/fluid interface
                // get the per-side override.
                let left_neighbor = if e == 0 { k - 1 } else { e - 1 };
                let right_neighbor = if e == k - 1 { 0 } else { e + 1 };
                let wrap_ok = matches!(bc, Boundary1d::Periodic);
                if (e > 0 || wrap_ok) && solid[e] != solid[left_neighbor] {
                    let side = if solid[e] {
                        InterfaceSide::SolidElement
                    } else {
                        InterfaceSide::FluidElement
                    };
                    chi[e * n] = interface_node_mask(side, mask);
                }
                if (e < k - 1 || wrap_ok) && solid[e] != solid[right_neighbor] {
                    let side = if solid[e] {
                        InterfaceSide::SolidElement
                    } else {
                        InterfaceSide::FluidElement
                    };
                    chi[e * n + n - 1] = interface_node_mask(side, mask);
                }
            }
        }

        let mut c_hat = vec![0.0; k * n];
        let mut nu_hat = vec![0.0; k * n];
        for p in 0..k * n {
            let (ch, nh) = effective_coefficients(c, nu, chi[p], &penal);
            c_hat[p] = ch;
            nu_hat[p] = nh;
        }

        let cancel: Vec<bool> = (0..k)
            .map(|e| match cancel_mode {
                CancelFluxMode::Off => false,
                CancelFluxMode::On => solid[e],
                CancelFluxMode::Auto => {
                    solid[e]
                        && (0..n).all(|j| {
                            c_hat[e * n + j].abs() < CANCEL_DETECT_EPS
                                && nu_hat[e * n + j].abs() < CANCEL_DETECT_EPS
                        })
                }
            })
            .collect();

        Ok(Operator1d {
            rule,
            mesh,
            scheme,
            penal,
            c,
            nu,
            bc,
            chi,
            c_hat,
            nu_hat,
            solid,
            cancel,
        })
    }

    pub fn n_dof(&self) -> usize {
        self.mesh.k * self.rule.n_nodes()
    }

    /// Replace the nodal mask values and recompute the effective
    /// coefficients and flux-cancellation flags. The solid-element flags
    /// keep their geometric meaning.
    pub fn set_nodal_mask(&mut self, chi: Vec<f64>, cancel_mode: CancelFluxMode) -> Result<()> {
        if chi.len() != self.n_dof() {
            return Err(Error::Shape(format!(
                "mask has {} values for {} nodes",
                chi.len(),
                self.n_dof()
            )));
        }
        let n = self.rule.n_nodes();
        for p in 0..chi.len() {
            let (ch, nh) = effective_coefficients(self.c, self.nu, chi[p], &self.penal);
            self.c_hat[p] = ch;
            self.nu_hat[p] = nh;
        }
        for e in 0..self.mesh.k {
            self.cancel[e] = match cancel_mode {
                CancelFluxMode::Off => false,
                CancelFluxMode::On => self.solid[e],
                CancelFluxMode::Auto => {
                    self.solid[e]
                        && (0..n).all(|j| {
                            self.c_hat[e * n + j].abs() < CANCEL_DETECT_EPS
                                && self.nu_hat[e * n + j].abs() < CANCEL_DETECT_EPS
                        })
                }
            };
        }
        self.chi = chi;
        Ok(())
    }

    /// Physical coordinate of node `j` of element `e`.
    pub fn node_x(&self, e: usize, j: usize) -> f64 {
        self.mesh.x_left(e) + 0.5 * (self.rule.nodes[j] + 1.0) * self.mesh.dx()
    }

    /// Nodal values of a function of x.
    pub fn project(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.rule.n_nodes();
        let mut u = vec![0.0; self.n_dof()];
        for e in 0..self.mesh.k {
            for j in 0..n {
                u[e * n + j] = f(self.node_x(e, j));
            }
        }
        u
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn c_hat(&self) -> &[f64] {
        &self.c_hat
    }

    pub fn nu_hat(&self) -> &[f64] {
        &self.nu_hat
    }

    pub fn solid_elements(&self) -> &[bool] {
        &self.solid
    }

    pub fn cancelled_elements(&self) -> &[bool] {
        &self.cancel
    }

    fn line_bc(&self) -> LineBc {
        match self.bc {
            Boundary1d::Periodic => LineBc::Periodic,
            Boundary1d::Dirichlet { left, right } => LineBc::Dirichlet {
                left_value: left,
                right_value: right,
                exterior_c: self.c,
                exterior_nu: self.nu,
            },
        }
    }

    /// Flux-divergence part of du/dt (no reaction), accumulated into `out`.
    pub fn add_rhs_flux(&self, u: &[f64], scratch: &mut LineScratch, out: &mut [f64]) {
        add_line_flux_rhs(
            &self.rule,
            self.mesh.dx(),
            &self.scheme,
            &self.line_bc(),
            u,
            &self.c_hat,
            &self.nu_hat,
            &self.cancel,
            scratch,
            out,
        );
    }

    /// Full right-hand side du/dt.
    pub fn rhs(&self, u: &[f64], scratch: &mut LineScratch, out: &mut [f64]) {
        assert_eq!(u.len(), self.n_dof());
        assert_eq!(out.len(), self.n_dof());
        out.fill(0.0);
        self.add_rhs_flux(u, scratch, out);
        for p in 0..u.len() {
            out[p] -= self.chi[p] / self.penal.eta1 * (u[p] - self.penal.u_s);
        }
    }

    /// Discrete mass: sum over elements of (dx/2) sum_j w_j u_j.
    pub fn total_mass(&self, u: &[f64]) -> f64 {
        let n = self.rule.n_nodes();
        let half_dx = 0.5 * self.mesh.dx();
        let mut m = 0.0;
        for e in 0..self.mesh.k {
            for j in 0..n {
                m += half_dx * self.rule.weights[j] * u[e * n + j];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn far_geometry() -> MaskGeometry {
        // Solid entirely outside the test domains: chi = 0 everywhere.
        MaskGeometry::Interval1d {
            start: 100.0,
            width: 1.0,
        }
    }

    fn fluid_operator(k: usize, order: usize, c: f64, nu: f64, scheme: FluxScheme) -> Operator1d {
        Operator1d::new(
            order,
            Mesh1d::new(0.0, 1.0, k).unwrap(),
            c,
            nu,
            PenalizationConfig::reaction_only(1.0),
            scheme,
            &far_geometry(),
            &MaskParams::sharp(),
            Boundary1d::Periodic,
            CancelFluxMode::Auto,
        )
        .unwrap()
    }

    #[test]
    fn effective_coefficients_examples() {
        let cfg = PenalizationConfig::new(1e-3, Some(-1.0), Some(1000.0), 0.0).unwrap();
        let (ch, nh) = effective_coefficients(1.0, 0.001, 0.0, &cfg);
        assert_eq!((ch, nh), (1.0, 0.001));
        let (ch, _) = effective_coefficients(1.0, 0.0, 1.0, &cfg);
        assert_eq!(ch, 0.0);
        let (_, nh) = effective_coefficients(0.0, 0.001, 1.0, &cfg);
        assert!(nh.abs() < 1e-18);
        let no_penalty = PenalizationConfig::reaction_only(1e-3);
        assert_eq!(effective_coefficients(2.0, 0.5, 1.0, &no_penalty), (2.0, 0.5));
    }

    #[test]
    fn zero_eta2_rejected() {
        assert!(PenalizationConfig::new(1e-3, Some(0.0), None, 0.0).is_err());
        assert!(PenalizationConfig::new(-1.0, None, None, 0.0).is_err());
    }

    #[test]
    fn w_flux_examples() {
        // Pure average.
        assert_eq!(w_flux(1.0, 2.0, 1.0, 4.0, 0.0), 3.0);
        // Upwind selects the left value for positive speed.
        let c = 2.5;
        assert!((w_flux(c, 7.0, c, -3.0, -1.0) - c * 7.0).abs() < 1e-14);
        // Downwind selects the right value.
        assert!((w_flux(c, 7.0, c, -3.0, 1.0) - c * (-3.0)).abs() < 1e-14);
    }

    #[test]
    fn flux_weight_expansion() {
        let up = flux_weights(&FluxScheme::upwind(), 2.0, 2.0);
        assert_eq!((up.f_left, up.f_right), (2.0, 0.0));
        let br1 = flux_weights(&FluxScheme::br1(), 1.0, 1.0);
        assert_eq!((br1.g_left, br1.g_right), (1.0, 1.0));
        let ldg = flux_weights(&FluxScheme::ldg(), 1.0, 1.0);
        assert_eq!((ldg.g_left, ldg.g_right), (0.0, 2.0));
        // Solid element with trivial parameters: zero traces give zero weights.
        let zeroed = flux_weights(&FluxScheme::upwind(), 0.0, 0.0);
        assert_eq!((zeroed.f_left, zeroed.f_right), (0.0, 0.0));
    }

    #[test]
    fn flux_weights_reproduce_w() {
        // The expansion must agree with the W function on arbitrary traces.
        let scheme = FluxScheme::ldg();
        let (cl, cr) = (1.3, -0.7);
        let (ul, ur) = (0.9, -2.1);
        let w = flux_weights(&scheme, cl, cr);
        let f = w_flux(cl, ul, cr, ur, scheme.alpha);
        assert!((w.f_left * ul + w.f_right * ur - f).abs() < 1e-14);
        let u_trace = w_flux(1.0, ul, 1.0, ur, scheme.delta);
        assert!((0.5 * w.g_left * ul + 0.5 * w.g_right * ur - u_trace).abs() < 1e-14);
    }

    #[test]
    fn free_stream_preservation() {
        for scheme in [FluxScheme::upwind(), FluxScheme::br1(), FluxScheme::ldg()] {
            let op = fluid_operator(5, 3, 1.0, 0.01, scheme);
            let u = vec![1.0; op.n_dof()];
            let mut out = vec![0.0; op.n_dof()];
            let mut ws = LineScratch::new();
            op.rhs(&u, &mut ws, &mut out);
            for (p, v) in out.iter().enumerate() {
                assert!(v.abs() < 1e-12, "node {p}: {v}");
            }
        }
    }

    #[test]
    fn discrete_conservation_periodic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for scheme in [FluxScheme::br1(), FluxScheme::ldg()] {
            let op = fluid_operator(6, 3, 0.8, 0.05, scheme);
            let u: Vec<f64> = (0..op.n_dof()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut out = vec![0.0; op.n_dof()];
            let mut ws = LineScratch::new();
            op.rhs(&u, &mut ws, &mut out);
            let dmass = op.total_mass(&out);
            assert!(dmass.abs() < 1e-12, "{scheme:?}: d(mass)/dt = {dmass}");
        }
    }

    #[test]
    fn solid_element_with_trivial_parameters_reduces_to_reaction() {
        // Solid on [0.25, 0.375] of an 8-element mesh; eta2 = -1/c and pure
        // advection make the effective coefficients vanish in the solid.
        let geom = MaskGeometry::Interval1d {
            start: 0.25,
            width: 0.125,
        };
        let penal = PenalizationConfig::new(1e-3, Some(-1.0), None, 0.0).unwrap();
        let op = Operator1d::new(
            3,
            Mesh1d::new(0.0, 1.0, 8).unwrap(),
            1.0,
            0.0,
            penal,
            FluxScheme::upwind(),
            &geom,
            &MaskParams::sharp(),
            Boundary1d::Periodic,
            CancelFluxMode::Auto,
        )
        .unwrap();
        assert_eq!(op.solid_elements(), &[false, false, true, false, false, false, false, false]);
        assert_eq!(op.cancelled_elements(), op.solid_elements());

        let u = op.project(|x| (3.1 * x).sin() + 0.4);
        let mut out = vec![0.0; op.n_dof()];
        let mut ws = LineScratch::new();
        op.rhs(&u, &mut ws, &mut out);
        let n = op.rule.n_nodes();
        for j in 0..n {
            let p = 2 * n + j;
            let expected = -u[p] / 1e-3;
            assert!(
                (out[p] - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                "node {j}: {} vs {expected}",
                out[p]
            );
        }

        // Same cancellation with viscosity and the matching eta3 = 1/nu.
        let viscous = Operator1d::new(
            3,
            Mesh1d::new(0.0, 1.0, 8).unwrap(),
            1.0,
            0.001,
            PenalizationConfig::new(1e-3, Some(-1.0), Some(1000.0), 0.0).unwrap(),
            FluxScheme::ldg(),
            &geom,
            &MaskParams::sharp(),
            Boundary1d::Periodic,
            CancelFluxMode::Auto,
        )
        .unwrap();
        assert!(viscous.cancelled_elements()[2]);
        let u = viscous.project(|x| (3.1 * x).sin() + 0.4);
        let mut out = vec![0.0; viscous.n_dof()];
        viscous.rhs(&u, &mut ws, &mut out);
        for j in 0..n {
            let p = 2 * n + j;
            let expected = -u[p] / 1e-3;
            assert!(
                (out[p] - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                "viscous node {j}: {} vs {expected}",
                out[p]
            );
        }
    }

    #[test]
    fn element_kernel_is_exact_on_polynomials() {
        // With exact interface data the element operator reproduces
        // -(c u' - nu u'') at the nodes for polynomial data of degree <= N.
        let order = 3;
        let rule = gauss_lobatto_rule(order).unwrap();
        let dx = 0.4;
        let (c, nu) = (1.2, 0.03);
        let penal = PenalizationConfig::reaction_only(1.0);
        // u(x) = 2 x^3 - x^2 + 0.5 x - 1 on the element [0, dx].
        let f = |x: f64| 2.0 * x.powi(3) - x * x + 0.5 * x - 1.0;
        let fp = |x: f64| 6.0 * x * x - 2.0 * x + 0.5;
        let fpp = |x: f64| 12.0 * x - 2.0;
        let xs: Vec<f64> = rule.nodes.iter().map(|&xi| 0.5 * (xi + 1.0) * dx).collect();
        let u: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let c_hat = vec![c; order + 1];
        let nu_hat = vec![nu; order + 1];
        let chi = vec![0.0; order + 1];
        // Exact fluxes: F = c u - nu u' at the faces, U = u at the faces.
        let f_minus = c * f(0.0) - nu * fp(0.0);
        let f_plus = c * f(dx) - nu * fp(dx);
        let out = element_rhs_with_traces(
            &rule,
            dx,
            &u,
            &c_hat,
            &nu_hat,
            &chi,
            &penal,
            f_minus,
            f_plus,
            f(0.0),
            f(dx),
        );
        for (j, &x) in xs.iter().enumerate() {
            let exact = -(c * fp(x) - nu * fpp(x));
            assert!(
                (out[j] - exact).abs() < 1e-12 * exact.abs().max(1.0),
                "node {j}: {} vs {exact}",
                out[j]
            );
        }
    }

    #[test]
    fn dirichlet_inflow_of_matching_constant_is_steady() {
        let op = Operator1d::new(
            2,
            Mesh1d::new(0.0, 1.0, 4).unwrap(),
            1.0,
            0.0,
            PenalizationConfig::reaction_only(1.0),
            FluxScheme::upwind(),
            &far_geometry(),
            &MaskParams::sharp(),
            Boundary1d::Dirichlet {
                left: 0.75,
                right: 0.75,
            },
            CancelFluxMode::Auto,
        )
        .unwrap();
        let u = vec![0.75; op.n_dof()];
        let mut out = vec![0.0; op.n_dof()];
        op.rhs(&u, &mut LineScratch::new(), &mut out);
        for v in &out {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn empty_mesh_rejected() {
        assert!(Mesh1d::new(0.0, 1.0, 0).is_err());
        assert!(Mesh1d::new(1.0, 0.0, 4).is_err());
    }
}
