//! Matrix-free / dense-assembly equivalence of the spatial operators.

mod common;

use common::{dense_line_operator, dense_operator, matvec};
use penal_dg::mask::{MaskGeometry, MaskParams};
use penal_dg::operator1d::{
    effective_coefficients, Boundary1d, CancelFluxMode, FluxScheme, LineScratch, Mesh1d,
    Operator1d, PenalizationConfig,
};
use penal_dg::operator2d::{Mesh2d, Operator2d, Penalization2d, Physics2d, Workspace2d};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn far_geometry() -> MaskGeometry {
    MaskGeometry::Interval1d {
        start: 100.0,
        width: 1.0,
    }
}

fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    let scale = a
        .iter()
        .chain(b.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    for (p, (x, y)) in a.iter().zip(b).enumerate() {
        assert!(
            (x - y).abs() <= tol * scale,
            "{what}: dof {p}: {x} vs {y} (scale {scale})"
        );
    }
}

#[test]
fn dense_equivalence_random_masks() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let schemes = [
        FluxScheme::upwind(),
        FluxScheme::br1(),
        FluxScheme::ldg(),
        FluxScheme {
            alpha: 0.0,
            beta: 1.0,
            gamma: -1.0,
            delta: -1.0,
        },
    ];
    for order in 1..=4usize {
        for &k in &[4usize, 8] {
            for scheme in &schemes {
                let penal =
                    PenalizationConfig::new(0.03, Some(-2.0), Some(50.0), 0.0).unwrap();
                let mut op = Operator1d::new(
                    order,
                    Mesh1d::new(-0.3, 0.9, k).unwrap(),
                    1.3,
                    0.02,
                    penal,
                    *scheme,
                    &far_geometry(),
                    &MaskParams::sharp(),
                    Boundary1d::Periodic,
                    CancelFluxMode::Off,
                )
                .unwrap();
                // Arbitrary smooth-ish nodal mask exercises the nodal
                // effective coefficients.
                let chi: Vec<f64> = (0..op.n_dof()).map(|_| rng.random_range(0.0..1.0)).collect();
                op.set_nodal_mask(chi, CancelFluxMode::Off).unwrap();

                let a = dense_operator(&op);
                let u: Vec<f64> = (0..op.n_dof()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mut out = vec![0.0; op.n_dof()];
                op.rhs(&u, &mut LineScratch::new(), &mut out);
                let expected = matvec(&a, &u);
                assert_close(
                    &out,
                    &expected,
                    1e-12,
                    &format!("order {order}, k {k}, scheme {scheme:?}"),
                );
            }
        }
    }
}

#[test]
fn dense_equivalence_with_cancelled_solid() {
    // Trivial parameters in a solid element: the cancel flags must agree
    // between the dense assembly and the matrix-free path.
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let geom = MaskGeometry::Interval1d {
        start: 0.0,
        width: 0.25,
    };
    let penal = PenalizationConfig::new(1e-3, Some(-1.0), None, 0.0).unwrap();
    let op = Operator1d::new(
        2,
        Mesh1d::new(0.0, 1.0, 4).unwrap(),
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
    assert_eq!(op.cancelled_elements(), &[true, false, false, false]);
    let a = dense_operator(&op);
    let u: Vec<f64> = (0..op.n_dof()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut out = vec![0.0; op.n_dof()];
    op.rhs(&u, &mut LineScratch::new(), &mut out);
    assert_close(&out, &matvec(&a, &u), 1e-12, "cancelled solid");
}

#[test]
fn two_dimensional_rhs_splits_into_dense_line_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let penal = Penalization2d {
        eta1: 2e-3,
        eta2: [Some(-1.0), Some(-0.5)],
        eta3: [Some(400.0), None],
        u_s: 0.0,
    };
    let phys = Physics2d {
        c: [1.0, 0.7],
        nu: [0.004, 0.002],
    };
    let op = Operator2d::new(
        2,
        Mesh2d::new([-0.1, 0.1], [-0.1, 0.1], 4, 3).unwrap(),
        phys,
        penal,
        FluxScheme::ldg(),
        &MaskGeometry::LShape2d {
            corner: [0.0, 0.0],
            arm_length: [0.1, 0.1],
            thickness: 0.05,
        },
        &MaskParams::sharp(),
        CancelFluxMode::Auto,
    )
    .unwrap();
    let n = op.rule.n_nodes();
    let (kx, ky) = (op.mesh.kx, op.mesh.ky);
    let u: Vec<f64> = (0..op.n_dof()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut out = vec![0.0; op.n_dof()];
    op.rhs(&u, &mut Workspace2d::new(), &mut out);

    // Reference: dense x-line and y-line operators without the reaction,
    // then the reaction applied pointwise once.
    let mut expected = vec![0.0; op.n_dof()];
    let chi_zero_x = vec![0.0; kx * n];
    let chi_zero_y = vec![0.0; ky * n];
    for axis in 0..2 {
        let cfg = op.penal.axis_config(axis).unwrap();
        let (lines_outer, lines_inner, k_line, dx) = if axis == 0 {
            (ky, n, kx, op.mesh.dx())
        } else {
            (kx, n, ky, op.mesh.dy())
        };
        for outer in 0..lines_outer {
            for inner in 0..lines_inner {
                let mut u_line = vec![0.0; k_line * n];
                let mut c_line = vec![0.0; k_line * n];
                let mut nu_line = vec![0.0; k_line * n];
                let mut cancel = vec![false; k_line];
                let mut index = vec![0usize; k_line * n];
                for e in 0..k_line {
                    for q in 0..n {
                        let p = if axis == 0 {
                            op.node_index(e, outer, q, inner)
                        } else {
                            op.node_index(outer, e, inner, q)
                        };
                        index[e * n + q] = p;
                        u_line[e * n + q] = u[p];
                        let (ch, nh) =
                            effective_coefficients(op.phys.c[axis], op.phys.nu[axis], op.chi()[p], &cfg);
                        c_line[e * n + q] = ch;
                        nu_line[e * n + q] = nh;
                    }
                    let elem = if axis == 0 {
                        outer * kx + e
                    } else {
                        e * kx + outer
                    };
                    cancel[e] = op.cancelled_elements(axis)[elem];
                }
                let a = dense_line_operator(
                    &op.rule,
                    dx,
                    &op.scheme,
                    1.0,
                    if axis == 0 { &chi_zero_x } else { &chi_zero_y },
                    &c_line,
                    &nu_line,
                    &cancel,
                );
                let line_out = matvec(&a, &u_line);
                for (q, &p) in index.iter().enumerate() {
                    expected[p] += line_out[q];
                }
            }
        }
    }
    for p in 0..op.n_dof() {
        expected[p] -= op.chi()[p] / op.penal.eta1 * u[p];
    }
    assert_close(&out, &expected, 1e-12, "2d line splitting");
}
