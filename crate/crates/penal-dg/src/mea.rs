//! Modified-equation analysis of the three-point (N = 2) penalized DG
//! scheme.
//!
//! Expanding the nodal solution in Taylor series around each Gauss-Lobatto
//! node turns the semi-discrete equation at node j into
//!
//! `du_j/dt + (chi_j/eta1 + r_j) u_j + sum_m (2/dx)^m Zhe_j^(m) / m! d^m u = S_j`
//!
//! with a reactive parameter `r_j`, a coefficient ladder `Zhe_j^(m)` whose
//! first two entries define the effective advection speed
//! `c_tilde = Zhe^(1)` and viscosity `nu_tilde = -Zhe^(2)/2`, and a source
//! `S_j` carrying the exterior trace values. The truncation error vanishes to
//! all orders exactly when the effective coefficients and all four advective
//! trace weights vanish — the scheme then keeps only the reaction term inside
//! the solid.
//!
//! The trace weights here are the literal linear coefficients on the trace
//! values in the interface fluxes `F` and solution traces `U` (the convention
//! of the semi-discrete source as assembled by the solver); the coefficient
//! ladder below is derived from, and cross-checked against, that assembly.

use crate::basis::gauss_lobatto_rule;
use crate::operator1d::{element_rhs_with_traces, PenalizationConfig};
use crate::{Error, Result};

/// Null threshold on nondimensionalized coefficients.
pub const ZERO_TOL: f64 = 1e-12;

/// Linear weights on the four trace values around one element: the exterior
/// and interior traces of the left interface, and the interior and exterior
/// traces of the right interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceWeights {
    pub left_exterior: f64,
    pub left_interior: f64,
    pub right_interior: f64,
    pub right_exterior: f64,
}

impl TraceWeights {
    pub fn zero() -> Self {
        TraceWeights {
            left_exterior: 0.0,
            left_interior: 0.0,
            right_interior: 0.0,
            right_exterior: 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.left_exterior
            .abs()
            .max(self.left_interior.abs())
            .max(self.right_interior.abs())
            .max(self.right_exterior.abs())
    }
}

/// Inputs of the three-point analysis: nodal effective coefficients, element
/// size, reaction parameter, mask values, and the trace weights of the
/// numerical flux (`f`) and solution trace (`g`).
#[derive(Debug, Clone)]
pub struct MeaInput {
    pub c_hat: [f64; 3],
    pub nu_hat: [f64; 3],
    pub dx: f64,
    pub eta1: f64,
    pub chi: [f64; 3],
    pub f: TraceWeights,
    pub g: TraceWeights,
    pub max_order: usize,
}

impl MeaInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0) {
            return Err(Error::MeaPrecondition(format!(
                "dx must be positive (got {})",
                self.dx
            )));
        }
        if self.max_order < 3 {
            return Err(Error::MeaPrecondition(format!(
                "max_order must be at least 3 (got {})",
                self.max_order
            )));
        }
        Ok(())
    }
}

/// Trace values around one element: the left-exterior value, the three nodal
/// values, and the right-exterior value.
#[derive(Debug, Clone, Copy)]
pub struct ElementTraces {
    pub u_left_exterior: f64,
    pub u: [f64; 3],
    pub u_right_exterior: f64,
}

/// The VP-DG matrix of the three-point scheme, entry `[j][i]` multiplying
/// nodal value `u_i` in the equation for node `j`.
pub fn vp_dg_matrix(input: &MeaInput) -> [[f64; 3]; 3] {
    let s = 2.0 / input.dx;
    let s2 = s * s;
    let c = &input.c_hat;
    let nu = &input.nu_hat;
    let reac = [
        input.chi[0] / input.eta1,
        input.chi[1] / input.eta1,
        input.chi[2] / input.eta1,
    ];
    [
        [
            reac[0] + 1.5 * s * c[0] - s2 * nu[0],
            2.0 * s * c[1] - 4.0 * s2 * nu[1],
            -0.5 * s * c[2] - s2 * nu[2],
        ],
        [
            -0.5 * s * c[0] + 0.5 * s2 * nu[0],
            reac[1] + 2.0 * s2 * nu[1],
            0.5 * s * c[2] + 0.5 * s2 * nu[2],
        ],
        [
            0.5 * s * c[0] - s2 * nu[0],
            -2.0 * s * c[1] - 4.0 * s2 * nu[1],
            reac[2] - 1.5 * s * c[2] - s2 * nu[2],
        ],
    ]
}

/// Reactive parameters `r_j`: the zeroth-order coefficient of the modified
/// equation beyond the reaction penalty.
pub fn reactive_params(input: &MeaInput) -> [f64; 3] {
    let dx = input.dx;
    let c = &input.c_hat;
    let nu = &input.nu_hat;
    let nu_sum = nu[0] + 4.0 * nu[1] + nu[2];
    [
        (3.0 * c[0] + 4.0 * c[1] - c[2]) / dx - 4.0 * nu_sum / (dx * dx),
        -(c[0] - c[2]) / dx + 2.0 * nu_sum / (dx * dx),
        (c[0] - 4.0 * c[1] - 3.0 * c[2]) / dx - 4.0 * nu_sum / (dx * dx),
    ]
}

/// The advective and viscous parts of the ladder coefficient, so that
/// `Zhe_j^(m) = adv * dx^(m-1) + visc * dx^(m-2)`.
///
/// Splitting the two parts keeps the null tests scale-aware: `adv` carries
/// the dimensions of a speed and `visc` of a viscosity.
pub fn zhe_parts(input: &MeaInput, j: usize, m: usize) -> (f64, f64) {
    let c = &input.c_hat;
    let nu = &input.nu_hat;
    let two_pow = |e: i32| 2.0f64.powi(e);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    match j {
        0 => {
            let adv = two_pow(2 - m as i32) * c[1] - c[2];
            let visc = -4.0
                * (two_pow(2 - m as i32) * nu[1] + nu[2] * (1.0 - 1.5 * input.g.right_interior));
            (adv, visc)
        }
        1 => {
            let adv = -two_pow(-(m as i32)) * (sign * c[0] - c[2]);
            let visc = two_pow(1 - m as i32)
                * (sign * nu[0] * (1.0 - 3.0 * input.g.left_interior)
                    + nu[2] * (1.0 - 3.0 * input.g.right_interior));
            (adv, visc)
        }
        2 => {
            let adv = sign * (c[0] - two_pow(2 - m as i32) * c[1]);
            let visc = sign
                * (-4.0)
                * (nu[0] * (1.0 - 1.5 * input.g.left_interior) + two_pow(2 - m as i32) * nu[1]);
            (adv, visc)
        }
        _ => panic!("node index out of range"),
    }
}

/// Ladder coefficient `Zhe_j^(m)`.
pub fn zhe_coefficient(input: &MeaInput, j: usize, m: usize) -> f64 {
    let (adv, visc) = zhe_parts(input, j, m);
    adv * input.dx.powi(m as i32 - 1) + visc * input.dx.powi(m as i32 - 2)
}

/// The same ladder coefficient evaluated independently from the VP-DG matrix
/// by regrouping the own-element trace terms of the numerical source into the
/// Taylor expansion. Used to cross-check the closed forms.
pub fn zhe_from_matrix(input: &MeaInput, j: usize, m: usize) -> f64 {
    let d = vp_dg_matrix(input);
    let s6 = 6.0 / (input.dx * input.dx);
    let nu = &input.nu_hat;
    let g = &input.g;
    let bracket = match j {
        0 => {
            d[0][1] + 2.0f64.powi(m as i32) * (d[0][2] + s6 * nu[2] * g.right_interior)
        }
        1 => {
            let a0 = d[1][0] - s6 * nu[0] * g.left_interior;
            let a2 = d[1][2] - s6 * nu[2] * g.right_interior;
            a0 * (-1.0f64).powi(m as i32) + a2
        }
        2 => {
            let a0 = d[2][0] + s6 * nu[0] * g.left_interior;
            a0 * (-2.0f64).powi(m as i32) + d[2][1] * (-1.0f64).powi(m as i32)
        }
        _ => panic!("node index out of range"),
    };
    (input.dx / 2.0).powi(m as i32) * bracket
}

/// Effective advection speeds `c_tilde_j = Zhe_j^(1)`.
pub fn c_tilde(input: &MeaInput) -> [f64; 3] {
    [0, 1, 2].map(|j| zhe_coefficient(input, j, 1))
}

/// Effective viscosities `nu_tilde_j = -Zhe_j^(2) / 2`.
pub fn nu_tilde(input: &MeaInput) -> [f64; 3] {
    [0, 1, 2].map(|j| -0.5 * zhe_coefficient(input, j, 2))
}

/// Numerical source `S_j` with the own-element trace contributions expanded
/// around node j (only the exterior trace values remain as free data).
pub fn numerical_source(input: &MeaInput, traces: &ElementTraces) -> [f64; 3] {
    let dx = input.dx;
    let nu = &input.nu_hat;
    let f = &input.f;
    let g = &input.g;
    let (ule, ure) = (traces.u_left_exterior, traces.u_right_exterior);
    let u = &traces.u;
    let s0 = 2.0 / dx
        * ((3.0 * f.left_exterior - 9.0 / dx * nu[0] * g.left_exterior) * ule
            - 3.0 / dx * nu[2] * g.right_exterior * ure
            + (3.0 * f.left_interior
                - 3.0 / dx * (3.0 * nu[0] * g.left_interior + nu[2] * g.right_interior))
                * u[0]);
    let s1 = 6.0 / (dx * dx)
        * (nu[0] * g.left_exterior * ule
            + nu[2] * g.right_exterior * ure
            + (nu[0] * g.left_interior + nu[2] * g.right_interior) * u[1]);
    let s2 = -2.0 / dx
        * (3.0 / dx * nu[0] * g.left_exterior * ule
            + (3.0 * f.right_exterior + 9.0 / dx * nu[2] * g.right_exterior) * ure
            + (3.0 * f.right_interior
                + 3.0 / dx * (3.0 * nu[2] * g.right_interior + nu[0] * g.left_interior))
                * u[2]);
    [s0, s1, s2]
}

/// DG source `s_DG,j = S_j - r_j u_j`.
pub fn dg_source(input: &MeaInput, traces: &ElementTraces) -> [f64; 3] {
    let s = numerical_source(input, traces);
    let r = reactive_params(input);
    [0, 1, 2].map(|j| s[j] - r[j] * traces.u[j])
}

/// Right-hand side predicted by the modified equation for the given element
/// data, with the ladder truncated at m = 2. Exact for quadratic nodal data
/// (the higher ladder terms multiply vanishing derivatives).
pub fn modified_equation_rhs(input: &MeaInput, traces: &ElementTraces) -> [f64; 3] {
    let s_dg = dg_source(input, traces);
    let ct = c_tilde(input);
    let nt = nu_tilde(input);
    let u = &traces.u;
    // Reference-coordinate derivatives of the quadratic interpolant on the
    // nodes (-1, 0, 1).
    let deriv = [
        [-1.5, 2.0, -0.5],
        [-0.5, 0.0, 0.5],
        [0.5, -2.0, 1.5],
    ];
    let d2 = u[0] - 2.0 * u[1] + u[2];
    let s = 2.0 / input.dx;
    [0, 1, 2].map(|j| {
        let d1 = deriv[j][0] * u[0] + deriv[j][1] * u[1] + deriv[j][2] * u[2];
        s_dg[j] - input.chi[j] / input.eta1 * u[j] - ct[j] * s * d1 + nt[j] * s * s * d2
    })
}

/// The same element right-hand side evaluated through the solver's element
/// kernel, with the numerical fluxes and solution traces assembled from the
/// trace weights. The two routes agree exactly for quadratic data.
pub fn solver_element_rhs(input: &MeaInput, traces: &ElementTraces) -> [f64; 3] {
    let rule = gauss_lobatto_rule(2).expect("order 2");
    let penal = PenalizationConfig {
        eta1: input.eta1,
        eta2: None,
        eta3: None,
        u_s: 0.0,
    };
    let f = &input.f;
    let g = &input.g;
    let (ule, ure) = (traces.u_left_exterior, traces.u_right_exterior);
    let u = &traces.u;
    let f_minus = f.left_exterior * ule + f.left_interior * u[0];
    let f_plus = f.right_interior * u[2] + f.right_exterior * ure;
    let u_minus = g.left_exterior * ule + g.left_interior * u[0];
    let u_plus = g.right_interior * u[2] + g.right_exterior * ure;
    let out = element_rhs_with_traces(
        &rule,
        input.dx,
        u,
        &input.c_hat,
        &input.nu_hat,
        &input.chi,
        &penal,
        f_minus,
        f_plus,
        u_minus,
        u_plus,
    );
    [out[0], out[1], out[2]]
}

/// Truncation-error order of the modified equation at one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationOrder {
    Order(u32),
    Infinite,
}

impl std::fmt::Display for TruncationOrder {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TruncationOrder::Order(p) => write!(fmt, "O(dx^{p})"),
            TruncationOrder::Infinite => write!(fmt, "O(dx^inf)"),
        }
    }
}

/// Whether exterior traces coincide with the adjacent interior nodal values
/// (a continuous, CG-like solution) or stay independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceContinuity {
    Continuous,
    Discontinuous,
}

/// Linear coefficients of `s_DG,j` on (left exterior, right exterior, own
/// node) values.
fn dg_source_coefficients(input: &MeaInput, j: usize) -> (f64, f64, f64) {
    let dx = input.dx;
    let nu = &input.nu_hat;
    let f = &input.f;
    let g = &input.g;
    let r = reactive_params(input);
    match j {
        0 => (
            2.0 / dx * (3.0 * f.left_exterior - 9.0 / dx * nu[0] * g.left_exterior),
            -6.0 / (dx * dx) * nu[2] * g.right_exterior,
            2.0 / dx
                * (3.0 * f.left_interior
                    - 3.0 / dx * (3.0 * nu[0] * g.left_interior + nu[2] * g.right_interior))
                - r[0],
        ),
        1 => (
            6.0 / (dx * dx) * nu[0] * g.left_exterior,
            6.0 / (dx * dx) * nu[2] * g.right_exterior,
            6.0 / (dx * dx) * (nu[0] * g.left_interior + nu[2] * g.right_interior) - r[1],
        ),
        2 => (
            -6.0 / (dx * dx) * nu[0] * g.left_exterior,
            -2.0 / dx * (3.0 * f.right_exterior + 9.0 / dx * nu[2] * g.right_exterior),
            -2.0 / dx
                * (3.0 * f.right_interior
                    + 3.0 / dx * (3.0 * nu[2] * g.right_interior + nu[0] * g.left_interior))
                - r[2],
        ),
        _ => panic!("node index out of range"),
    }
}

fn coefficient_scale(input: &MeaInput) -> (f64, f64) {
    let c_ref = input
        .c_hat
        .iter()
        .fold(1.0f64, |m, v| m.max(v.abs()))
        .max(input.f.max_abs());
    let nu_ref = input
        .nu_hat
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        * (1.0 + input.g.max_abs());
    (c_ref, nu_ref.max(1.0))
}

/// Whether `s_DG,j` vanishes identically as a linear form over the element
/// data, under the given trace-continuity assumption.
pub fn dg_source_is_null(input: &MeaInput, j: usize, continuity: TraceContinuity) -> bool {
    let (a_le, b_re, own) = dg_source_coefficients(input, j);
    let (c_ref, nu_ref) = coefficient_scale(input);
    let scale = (1.0 + c_ref) / input.dx + (1.0 + nu_ref) / (input.dx * input.dx);
    let null = |v: f64| v.abs() <= ZERO_TOL * scale;
    match continuity {
        TraceContinuity::Discontinuous => null(a_le) && null(b_re) && null(own),
        TraceContinuity::Continuous => match j {
            // Left exterior folds onto u_0, right exterior onto u_2.
            0 => null(a_le + own) && null(b_re),
            1 => null(a_le) && null(b_re) && null(own),
            2 => null(a_le) && null(b_re + own),
            _ => unreachable!(),
        },
    }
}

/// Classify the truncation-error order node by node: the tiers test, in
/// sequence, the DG source, the first-order mismatch `c_hat - c_tilde`, the
/// second-order mismatch `nu_hat - nu_tilde`, and then the ladder
/// `Zhe^(m) = 0` for m = 3..max_order. The first failing ladder entry at m
/// gives order `m - 1`; surviving every tier is reported as infinite order.
pub fn classify_te_order(
    input: &MeaInput,
    continuity: TraceContinuity,
) -> [TruncationOrder; 3] {
    let ct = c_tilde(input);
    let nt = nu_tilde(input);
    let (c_ref, nu_ref) = coefficient_scale(input);
    [0, 1, 2].map(|j| {
        if !dg_source_is_null(input, j, continuity) {
            return TruncationOrder::Order(0);
        }
        let c_scale = c_ref + nu_ref / input.dx;
        if (input.c_hat[j] - ct[j]).abs() > ZERO_TOL * c_scale {
            return TruncationOrder::Order(0);
        }
        let nu_scale = nu_ref + c_ref * input.dx;
        if (input.nu_hat[j] - nt[j]).abs() > ZERO_TOL * nu_scale {
            return TruncationOrder::Order(0);
        }
        for m in 3..=input.max_order {
            let (adv, visc) = zhe_parts(input, j, m);
            if adv.abs() > ZERO_TOL * c_ref || visc.abs() > ZERO_TOL * nu_ref {
                return TruncationOrder::Order(m as u32 - 1);
            }
        }
        TruncationOrder::Infinite
    })
}

/// Residual of the parameter relation `c_hat + (4/dx) nu_hat` that closes
/// the zero-flux family; zero means the relation holds at that node.
pub fn dx_constraint_residual(c_hat: f64, nu_hat: f64, dx: f64) -> f64 {
    c_hat + 4.0 / dx * nu_hat
}

/// Outcome of a cancellation check over the full ladder.
#[derive(Debug, Clone)]
pub struct CancellationReport {
    pub pass: bool,
    /// First `(j, m)` with a nonvanishing ladder coefficient, and its value.
    pub first_failure: Option<(usize, usize, f64)>,
    pub max_zhe: f64,
    pub max_dg_source: f64,
    pub orders: [TruncationOrder; 3],
}

/// Check that every ladder coefficient (m = 1 covers `c_tilde`, m = 2 covers
/// `nu_tilde`), and the DG source for random trace data, vanish.
pub fn verify_cancellation(input: &MeaInput) -> Result<CancellationReport> {
    input.validate()?;
    let (c_ref, nu_ref) = coefficient_scale(input);
    let mut first_failure = None;
    let mut max_zhe = 0.0f64;
    for m in 1..=input.max_order {
        for j in 0..3 {
            let (adv, visc) = zhe_parts(input, j, m);
            let z = zhe_coefficient(input, j, m);
            max_zhe = max_zhe.max(z.abs());
            let bad = adv.abs() > ZERO_TOL * c_ref || visc.abs() > ZERO_TOL * nu_ref;
            if bad && first_failure.is_none() {
                first_failure = Some((j, m, z));
            }
        }
    }

    let mut rng = SplitMix64::new(0x5eed_1d0f);
    let mut max_sdg = 0.0f64;
    for _ in 0..16 {
        let traces = ElementTraces {
            u_left_exterior: rng.next_symmetric(),
            u: [
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
            ],
            u_right_exterior: rng.next_symmetric(),
        };
        let s = dg_source(input, &traces);
        for v in s {
            max_sdg = max_sdg.max(v.abs());
        }
    }
    let sdg_scale =
        (1.0 + c_ref) / input.dx + (1.0 + nu_ref) / (input.dx * input.dx);
    let sdg_ok = max_sdg <= ZERO_TOL * sdg_scale;
    if !sdg_ok && first_failure.is_none() {
        first_failure = Some((usize::MAX, 0, max_sdg));
    }

    let orders = classify_te_order(input, TraceContinuity::Discontinuous);
    Ok(CancellationReport {
        pass: first_failure.is_none(),
        first_failure,
        max_zhe,
        max_dg_source: max_sdg,
        orders,
    })
}

/// Verify the trivial solution: `eta2 = -1/c`, `eta3 = 1/nu`, all advective
/// trace weights zero, solution-trace weights arbitrary. Every ladder
/// coefficient and the DG source must vanish and the order must be infinite
/// at all three nodes.
pub fn verify_trivial_solution(
    c: f64,
    nu: f64,
    dx: f64,
    eta1: f64,
    max_order: usize,
) -> Result<CancellationReport> {
    if c == 0.0 {
        return Err(Error::MeaPrecondition(
            "trivial solution needs c != 0 (eta2 = -1/c is undefined)".into(),
        ));
    }
    if !(nu > 0.0) {
        return Err(Error::MeaPrecondition(
            "trivial solution needs nu > 0 (eta3 = 1/nu is undefined)".into(),
        ));
    }
    let eta2 = -1.0 / c;
    let eta3 = 1.0 / nu;
    let c_hat = c + 1.0 / eta2;
    let nu_hat = nu - 1.0 / eta3;
    let mut rng = SplitMix64::new(0x7a11_5eed);
    let input = MeaInput {
        c_hat: [c_hat; 3],
        nu_hat: [nu_hat; 3],
        dx,
        eta1,
        chi: [1.0; 3],
        f: TraceWeights::zero(),
        g: TraceWeights {
            left_exterior: rng.next_symmetric(),
            left_interior: rng.next_symmetric(),
            right_interior: rng.next_symmetric(),
            right_exterior: rng.next_symmetric(),
        },
        max_order,
    };
    verify_cancellation(&input)
}

/// Fourier/Taylor cross-check on the central-difference semi-discretization
/// of the advection equation.
#[derive(Debug, Clone)]
pub struct FourierTaylorReport {
    /// Leading modified-equation coefficient from the stencil moments.
    pub taylor_coefficient: f64,
    /// The same coefficient from the series expansion of the stencil symbol.
    pub fourier_coefficient: f64,
    pub coefficient_gap: f64,
    /// Largest deviation of the applied stencil from its symbol on
    /// sinusoidal grid data over the wavenumber ladder.
    pub max_symbol_residual: f64,
}

/// Compare the leading truncation term of `(u_{j+1} - u_{j-1}) / (2 dx)`
/// obtained two ways: Taylor stencil moments give `-c dx^2 / 6` on the third
/// derivative, and the series of the Fourier symbol `c sin(w dx) / dx` gives
/// its cubic coefficient. Also checks the stencil against the symbol on
/// sinusoidal data for every wavenumber in `omegas`.
pub fn fourier_taylor_check(c: f64, dx: f64, omegas: &[f64]) -> FourierTaylorReport {
    // Stencil of d/dx: points at +-1 with weights +-1/(2 dx).
    let points = [-1.0f64, 1.0];
    let weights = [-1.0 / (2.0 * dx), 1.0 / (2.0 * dx)];
    // Moving the m = 3 Taylor term to the right-hand side flips its sign.
    let third_moment: f64 = points
        .iter()
        .zip(&weights)
        .map(|(&p, &w)| w * (p * dx).powi(3))
        .sum::<f64>()
        / 6.0;
    let taylor = -c * third_moment;

    // sin(z)/z = sum_p (-1)^p z^(2p) / (2p+1)!; the omega^3 coefficient of
    // c sin(w dx)/dx is the p = 1 term.
    let fourier = -c * dx * dx / factorial(3);

    let mut max_residual = 0.0f64;
    for &omega in omegas {
        let symbol = c * (omega * dx).sin() / dx;
        for &xj in &[0.0, 0.3 * dx, 7.0 * dx] {
            // u = exp(i w x): stencil result must equal i * symbol * u_j.
            let (re_m, im_m) = ((omega * (xj - dx)).cos(), (omega * (xj - dx)).sin());
            let (re_p, im_p) = ((omega * (xj + dx)).cos(), (omega * (xj + dx)).sin());
            let app_re = c * (re_p - re_m) / (2.0 * dx);
            let app_im = c * (im_p - im_m) / (2.0 * dx);
            let (uj_re, uj_im) = ((omega * xj).cos(), (omega * xj).sin());
            let sym_re = -symbol * uj_im;
            let sym_im = symbol * uj_re;
            let res = ((app_re - sym_re).powi(2) + (app_im - sym_im).powi(2)).sqrt();
            max_residual = max_residual.max(res);
        }
    }

    FourierTaylorReport {
        taylor_coefficient: taylor,
        fourier_coefficient: fourier,
        coefficient_gap: (taylor - fourier).abs(),
        max_symbol_residual: max_residual,
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Full analysis bundle for reporting.
#[derive(Debug, Clone)]
pub struct MeaReport {
    pub input: MeaInput,
    pub d_matrix: [[f64; 3]; 3],
    pub r_tilde: [f64; 3],
    /// `zhe[m - 1][j]` for m = 1..=max_order.
    pub zhe: Vec<[f64; 3]>,
    pub c_tilde: [f64; 3],
    pub nu_tilde: [f64; 3],
    pub te_order: [TruncationOrder; 3],
}

pub fn build_report(input: &MeaInput, continuity: TraceContinuity) -> Result<MeaReport> {
    input.validate()?;
    let zhe: Vec<[f64; 3]> = (1..=input.max_order)
        .map(|m| [0, 1, 2].map(|j| zhe_coefficient(input, j, m)))
        .collect();
    Ok(MeaReport {
        input: input.clone(),
        d_matrix: vp_dg_matrix(input),
        r_tilde: reactive_params(input),
        zhe,
        c_tilde: c_tilde(input),
        nu_tilde: nu_tilde(input),
        te_order: classify_te_order(input, continuity),
    })
}

impl MeaReport {
    /// Aligned text rendering for the CLI.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "c_hat  = [{:+.6e} {:+.6e} {:+.6e}]\n",
            self.input.c_hat[0], self.input.c_hat[1], self.input.c_hat[2]
        ));
        s.push_str(&format!(
            "nu_hat = [{:+.6e} {:+.6e} {:+.6e}]\n",
            self.input.nu_hat[0], self.input.nu_hat[1], self.input.nu_hat[2]
        ));
        s.push_str(&format!(
            "dx = {:.6e}   eta1 = {:.6e}\n\n",
            self.input.dx, self.input.eta1
        ));
        s.push_str("VP-DG matrix (rows are node equations):\n");
        for row in &self.d_matrix {
            s.push_str(&format!(
                "  [{:+.6e} {:+.6e} {:+.6e}]\n",
                row[0], row[1], row[2]
            ));
        }
        s.push_str(&format!(
            "\nr_tilde  = [{:+.6e} {:+.6e} {:+.6e}]\n",
            self.r_tilde[0], self.r_tilde[1], self.r_tilde[2]
        ));
        s.push_str(&format!(
            "c_tilde  = [{:+.6e} {:+.6e} {:+.6e}]\n",
            self.c_tilde[0], self.c_tilde[1], self.c_tilde[2]
        ));
        s.push_str(&format!(
            "nu_tilde = [{:+.6e} {:+.6e} {:+.6e}]\n\n",
            self.nu_tilde[0], self.nu_tilde[1], self.nu_tilde[2]
        ));
        s.push_str("ladder (m: node 0, node 1, node 2):\n");
        for (i, row) in self.zhe.iter().enumerate() {
            s.push_str(&format!(
                "  m = {:2}: {:+.6e} {:+.6e} {:+.6e}\n",
                i + 1,
                row[0],
                row[1],
                row[2]
            ));
        }
        s.push_str(&format!(
            "\ntruncation order: node 0 {}, node 1 {}, node 2 {}\n",
            self.te_order[0], self.te_order[1], self.te_order[2]
        ));
        s
    }

    /// CSV rows `(j, m, zhe)` plus summary rows per node.
    pub fn csv(&self) -> String {
        let mut s = String::from("kind,j,m,value\n");
        for (i, row) in self.zhe.iter().enumerate() {
            for j in 0..3 {
                s.push_str(&format!("zhe,{},{},{:.16e}\n", j, i + 1, row[j]));
            }
        }
        for j in 0..3 {
            s.push_str(&format!("r_tilde,{},,{:.16e}\n", j, self.r_tilde[j]));
            s.push_str(&format!("c_tilde,{},,{:.16e}\n", j, self.c_tilde[j]));
            s.push_str(&format!("nu_tilde,{},,{:.16e}\n", j, self.nu_tilde[j]));
            s.push_str(&format!("te_order,{},,{}\n", j, self.te_order[j]));
        }
        s
    }
}

pub const FAMILY_NAMES: &str =
    "trivial, case1_upwind, case1_interior, case1_free, case2_g2, case2_upwind_g2, case2_zero_f";

/// Construct the analysis input for a named solution family, together with
/// the trace-continuity assumption under which its tabulated order holds.
pub fn family(
    name: &str,
    c: f64,
    nu: f64,
    dx: f64,
    eta1: f64,
    max_order: usize,
) -> Result<(MeaInput, TraceContinuity)> {
    let base = |c_hat: f64, nu_hat: f64, f: TraceWeights, g: TraceWeights| MeaInput {
        c_hat: [c_hat; 3],
        nu_hat: [nu_hat; 3],
        dx,
        eta1,
        chi: [1.0; 3],
        f,
        g,
        max_order,
    };
    let upwind_f = |speed: f64| TraceWeights {
        left_exterior: speed,
        left_interior: 0.0,
        right_interior: speed,
        right_exterior: 0.0,
    };
    let g2 = TraceWeights {
        left_exterior: 0.0,
        left_interior: 2.0,
        right_interior: 2.0,
        right_exterior: 0.0,
    };
    match name {
        "trivial" => {
            if c == 0.0 {
                return Err(Error::MeaPrecondition(
                    "trivial family needs c != 0".into(),
                ));
            }
            let mut rng = SplitMix64::new(0xfeed_beef);
            let g = TraceWeights {
                left_exterior: rng.next_symmetric(),
                left_interior: rng.next_symmetric(),
                right_interior: rng.next_symmetric(),
                right_exterior: rng.next_symmetric(),
            };
            Ok((
                base(0.0, 0.0, TraceWeights::zero(), g),
                TraceContinuity::Discontinuous,
            ))
        }
        "case1_upwind" => Ok((
            base(c, 0.0, upwind_f(c), TraceWeights::zero()),
            TraceContinuity::Continuous,
        )),
        "case1_interior" => {
            let f = TraceWeights {
                left_exterior: 0.0,
                left_interior: c,
                right_interior: c,
                right_exterior: 0.0,
            };
            Ok((
                base(c, 0.0, f, TraceWeights::zero()),
                TraceContinuity::Discontinuous,
            ))
        }
        "case1_free" => {
            let f = TraceWeights {
                left_exterior: 0.5 * c,
                left_interior: 0.5 * c,
                right_interior: 0.5 * c,
                right_exterior: 0.5 * c,
            };
            Ok((
                base(c, 0.0, f, TraceWeights::zero()),
                TraceContinuity::Discontinuous,
            ))
        }
        "case2_g2" => {
            let f = TraceWeights {
                left_exterior: 0.5 * c,
                left_interior: 0.5 * c,
                right_interior: 0.5 * c,
                right_exterior: 0.5 * c,
            };
            Ok((base(c, nu, f, g2), TraceContinuity::Discontinuous))
        }
        "case2_upwind_g2" => {
            let speed = c + 4.0 / dx * nu;
            Ok((base(c, nu, upwind_f(speed), g2), TraceContinuity::Continuous))
        }
        "case2_zero_f" => {
            // Parameter relation c_hat = -(4/dx) nu_hat closes the family.
            let c_hat = -4.0 / dx * nu;
            Ok((
                base(c_hat, nu, TraceWeights::zero(), g2),
                TraceContinuity::Discontinuous,
            ))
        }
        other => Err(Error::UnknownFamily(other.to_string(), FAMILY_NAMES)),
    }
}

/// Small deterministic generator for "arbitrary" weights in checks.
struct SplitMix64(u64);

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-2, 2).
    fn next_symmetric(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
    }
}
