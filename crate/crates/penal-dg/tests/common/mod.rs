//! Dense-matrix oracle: assembles the semi-discrete operator entrywise from
//! the VP-DG derivative matrix and the numerical-source formulas, with the
//! interface values expanded into linear trace weights. Everything here is a
//! single-pass algebraic assembly, independent of the solver's two-pass
//! matrix-free evaluation path.

use penal_dg::basis::QuadratureRule;
use penal_dg::operator1d::{FluxScheme, Operator1d};

/// Dense row operations over the global dof vector.
#[derive(Clone)]
pub struct Row(pub Vec<f64>);

impl Row {
    fn zeros(n: usize) -> Self {
        Row(vec![0.0; n])
    }

    fn axpy(&mut self, a: f64, other: &Row) {
        for (x, y) in self.0.iter_mut().zip(&other.0) {
            *x += a * y;
        }
    }
}

/// Dense periodic assembly of one line of the penalized operator, reaction
/// included: `rhs(u) = A u` for `u_s = 0`.
#[allow(clippy::too_many_arguments)]
pub fn dense_line_operator(
    rule: &QuadratureRule,
    dx: f64,
    scheme: &FluxScheme,
    eta1: f64,
    chi: &[f64],
    c_hat: &[f64],
    nu_hat: &[f64],
    cancel: &[bool],
) -> Vec<Vec<f64>> {
    let n = rule.n_nodes();
    let k = cancel.len();
    let last = n - 1;
    let dof = k * n;
    let jac = 2.0 / dx;
    let w = &rule.weights;
    let d = &rule.deriv;

    // Solution-trace rows per interface (0..=k, wrapped): the literal linear
    // weights of W(1, u; lambda) are (1 -+ lambda)/2 on the two traces. The
    // gamma switch orients by the face-owner normal, flipping its sign in
    // the global left/right convention.
    let trace_row = |i: usize, lambda: f64| -> Row {
        let el = if i == 0 { k - 1 } else { i - 1 };
        let er = if i == k { 0 } else { i };
        let mut r = Row::zeros(dof);
        r.0[el * n + last] += 0.5 * (1.0 - lambda);
        r.0[er * n] += 0.5 * (1.0 + lambda);
        r
    };

    // Diffusive-flux nodal rows (delta-lifted): volume weak derivative plus
    // the solution-trace lift at the faces.
    let mut fd_rows: Vec<Vec<Row>> = Vec::with_capacity(k);
    for e in 0..k {
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            let mut r = Row::zeros(dof);
            for i in 0..n {
                r.0[e * n + i] += jac * w[i] / w[j] * nu_hat[e * n + i] * d[i][j];
            }
            if j == 0 {
                r.axpy(jac * nu_hat[e * n] / w[0], &trace_row(e, scheme.delta));
            }
            if j == last {
                r.axpy(
                    -jac * nu_hat[e * n + last] / w[last],
                    &trace_row(e + 1, scheme.delta),
                );
            }
            rows.push(r);
        }
        fd_rows.push(rows);
    }

    // Total interface-flux rows: advective W(c_hat, u; alpha) expanded into
    // trace weights, plus W(1, fd; beta) on the gamma-lifted fd traces.
    let flux_row = |i: usize| -> Row {
        let el = if i == 0 { k - 1 } else { i - 1 };
        let er = if i == k { 0 } else { i };
        let (cl, cr) = (c_hat[el * n + last], c_hat[er * n]);
        let mut r = Row::zeros(dof);
        r.0[el * n + last] += 0.5 * (cl - scheme.alpha * cl.abs());
        r.0[er * n] += 0.5 * (cr + scheme.alpha * cr.abs());

        let mut du = trace_row(i, -scheme.gamma);
        du.axpy(-1.0, &trace_row(i, scheme.delta));
        let mut fd_l = fd_rows[el][last].clone();
        fd_l.axpy(-jac * nu_hat[el * n + last] / w[last], &du);
        let mut fd_r = fd_rows[er][0].clone();
        fd_r.axpy(jac * nu_hat[er * n] / w[0], &du);
        r.axpy(0.5 * (1.0 - scheme.beta), &fd_l);
        r.axpy(0.5 * (1.0 + scheme.beta), &fd_r);
        r
    };

    let mut a = vec![vec![0.0; dof]; dof];
    for e in 0..k {
        for j in 0..n {
            let row = e * n + j;
            // Minus the VP-DG derivative matrix: reaction, advective, and
            // viscous volume blocks.
            a[row][row] -= chi[row] / eta1;
            for i in 0..n {
                a[row][e * n + i] += jac * c_hat[e * n + i] * w[i] / w[j] * d[i][j];
                let mut lap = 0.0;
                for r in 0..n {
                    lap += d[r][j] * d[i][r];
                }
                a[row][e * n + i] += jac * jac * nu_hat[e * n + i] * w[i] / w[j] * lap;
            }
            // Numerical source: interface fluxes at the two faces plus the
            // viscous solution-trace terms.
            if !cancel[e] {
                if j == 0 {
                    let f = flux_row(e);
                    for p in 0..dof {
                        a[row][p] += jac / w[0] * f.0[p];
                    }
                }
                if j == last {
                    let f = flux_row(e + 1);
                    for p in 0..dof {
                        a[row][p] -= jac / w[last] * f.0[p];
                    }
                }
            }
            let u_left = trace_row(e, scheme.delta);
            let u_right = trace_row(e + 1, scheme.delta);
            for p in 0..dof {
                a[row][p] += jac * jac / w[j]
                    * (nu_hat[e * n] * u_left.0[p] * d[0][j]
                        - nu_hat[e * n + last] * u_right.0[p] * d[last][j]);
            }
        }
    }
    a
}

/// Dense assembly matching a periodic 1D operator.
pub fn dense_operator(op: &Operator1d) -> Vec<Vec<f64>> {
    dense_line_operator(
        &op.rule,
        op.mesh.dx(),
        &op.scheme,
        op.penal.eta1,
        op.chi(),
        op.c_hat(),
        op.nu_hat(),
        op.cancelled_elements(),
    )
}

pub fn matvec(a: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(u).map(|(r, x)| r * x).sum())
        .collect()
}
