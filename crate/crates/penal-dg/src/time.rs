//! Explicit third-order strong-stability-preserving Runge-Kutta integration.

use crate::{Error, Result};

/// Time-march settings. The final step is shortened to land exactly on
/// `t_final`.
#[derive(Debug, Clone, Copy)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
    pub record_interval: Option<usize>,
}

impl TimeConfig {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        if !(dt > 0.0) || !(t_final >= dt) {
            return Err(Error::Config(format!(
                "need dt > 0 and t_final >= dt (got dt = {dt}, t_final = {t_final})"
            )));
        }
        Ok(TimeConfig {
            dt,
            t_final,
            record_interval: None,
        })
    }
}

/// Shu-Osher SSP-RK3 stepper with preallocated stage buffers.
pub struct Rk3 {
    u1: Vec<f64>,
    u2: Vec<f64>,
    du: Vec<f64>,
}

impl Rk3 {
    pub fn new(n_dof: usize) -> Self {
        Rk3 {
            u1: vec![0.0; n_dof],
            u2: vec![0.0; n_dof],
            du: vec![0.0; n_dof],
        }
    }

    /// Advance one step:
    /// `u1 = u + dt L(u)`,
    /// `u2 = 3/4 u + 1/4 (u1 + dt L(u1))`,
    /// `u  = 1/3 u + 2/3 (u2 + dt L(u2))`.
    ///
    /// `step_index` only labels the divergence error.
    pub fn step<F>(&mut self, rhs: &mut F, u: &mut [f64], dt: f64, step_index: usize) -> Result<()>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let n = u.len();
        assert_eq!(self.u1.len(), n);

        rhs(u, &mut self.du);
        for p in 0..n {
            self.u1[p] = u[p] + dt * self.du[p];
        }
        check_finite(&self.u1, step_index)?;

        rhs(&self.u1, &mut self.du);
        for p in 0..n {
            self.u2[p] = 0.75 * u[p] + 0.25 * (self.u1[p] + dt * self.du[p]);
        }
        check_finite(&self.u2, step_index)?;

        rhs(&self.u2, &mut self.du);
        for p in 0..n {
            u[p] = u[p] / 3.0 + 2.0 / 3.0 * (self.u2[p] + dt * self.du[p]);
        }
        check_finite(u, step_index)?;
        Ok(())
    }

    /// March from t = 0 to `time.t_final`, invoking `on_record` after every
    /// `record_interval`-th step (and after the final one). Returns the
    /// number of steps taken.
    pub fn integrate<F, R>(
        &mut self,
        rhs: &mut F,
        u: &mut [f64],
        time: &TimeConfig,
        mut on_record: R,
    ) -> Result<usize>
    where
        F: FnMut(&[f64], &mut [f64]),
        R: FnMut(usize, f64, &[f64]),
    {
        let mut t = 0.0;
        let mut step = 0usize;
        while t < time.t_final {
            let remaining = time.t_final - t;
            let dt = if remaining < time.dt * (1.0 + 1e-9) {
                remaining
            } else {
                time.dt
            };
            self.step(rhs, u, dt, step)?;
            step += 1;
            t += dt;
            if let Some(every) = time.record_interval {
                if every > 0 && step % every == 0 {
                    on_record(step, t, u);
                }
            }
        }
        on_record(step, time.t_final, u);
        Ok(step)
    }
}

fn check_finite(u: &[f64], step: usize) -> Result<()> {
    if u.iter().all(|v| v.is_finite()) {
        return Ok(());
    }
    let max_norm = u
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    Err(Error::Diverged { step, max_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_matches_exponential_to_fourth_order() {
        // u' = -u, u(0) = 1: any three-stage third-order scheme has stability
        // polynomial 1 + z + z^2/2 + z^3/6, so the one-step defect against
        // exp(z) is z^4/24 + O(z^5) = 4.08e-6 at dt = 0.1.
        let mut rk = Rk3::new(1);
        let mut u = vec![1.0];
        let mut rhs = |x: &[f64], out: &mut [f64]| out[0] = -x[0];
        rk.step(&mut rhs, &mut u, 0.1, 0).unwrap();
        let err = (u[0] - (-0.1f64).exp()).abs();
        assert!(err <= 0.1f64.powi(4) / 24.0, "error {err}");
        assert!(err > 3.9e-6, "suspiciously small one-step defect: {err}");
    }

    #[test]
    fn zero_rhs_leaves_state_unchanged() {
        let mut rk = Rk3::new(3);
        let mut u = vec![1.0, -2.0, 0.5];
        let orig = u.clone();
        let mut rhs = |_: &[f64], out: &mut [f64]| out.fill(0.0);
        rk.step(&mut rhs, &mut u, 0.3, 0).unwrap();
        assert_eq!(u, orig);
    }

    #[test]
    fn linear_step_equals_cubic_stability_polynomial() {
        use rand::{Rng, SeedableRng};
        // For u' = A u one SSP-RK3 step is (I + dtA + dt^2 A^2/2 + dt^3 A^3/6) u.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 4;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let matvec = |m: &Vec<Vec<f64>>, x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| (0..n).map(|j| m[i][j] * x[j]).sum())
                .collect()
        };
        let u0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dt = 0.05;

        let mut u = u0.clone();
        let mut rk = Rk3::new(n);
        let mut rhs = |x: &[f64], out: &mut [f64]| out.copy_from_slice(&matvec(&a, x));
        rk.step(&mut rhs, &mut u, dt, 0).unwrap();

        let au = matvec(&a, &u0);
        let a2u = matvec(&a, &au);
        let a3u = matvec(&a, &a2u);
        for i in 0..n {
            let expected = u0[i] + dt * au[i] + dt * dt / 2.0 * a2u[i] + dt.powi(3) / 6.0 * a3u[i];
            assert!((u[i] - expected).abs() < 1e-14, "component {i}");
        }
    }

    #[test]
    fn third_order_convergence_slope() {
        // u' = lambda u integrated to t = 1 on a 4-point dt ladder.
        let lambda = -1.3;
        let exact = (lambda * 1.0f64).exp();
        let mut errors = Vec::new();
        let dts = [0.1, 0.05, 0.025, 0.0125];
        for &dt in &dts {
            let mut u = vec![1.0];
            let mut rk = Rk3::new(1);
            let mut rhs = |x: &[f64], out: &mut [f64]| out[0] = lambda * x[0];
            let time = TimeConfig::new(dt, 1.0).unwrap();
            rk.integrate(&mut rhs, &mut u, &time, |_, _, _| {}).unwrap();
            errors.push((u[0] - exact).abs());
        }
        // Least-squares slope of log(err) vs log(dt).
        let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let xm = xs.iter().sum::<f64>() / 4.0;
        let ym = ys.iter().sum::<f64>() / 4.0;
        let slope: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
        assert!((slope - 3.0).abs() <= 0.1, "slope {slope}");
    }

    #[test]
    fn linearity_of_one_step() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let step_of = |v: &[f64]| -> Vec<f64> {
            let mut u = v.to_vec();
            let mut rk = Rk3::new(n);
            let c = coeffs.clone();
            let mut rhs = move |x: &[f64], out: &mut [f64]| {
                for i in 0..x.len() {
                    out[i] = c[i] * x[i];
                }
            };
            rk.step(&mut rhs, &mut u, 0.02, 0).unwrap();
            u
        };
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (a, b) = (0.7, -1.9);
        let combined: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = step_of(&combined);
        let su = step_of(&u);
        let sv = step_of(&v);
        for i in 0..n {
            assert!((lhs[i] - (a * su[i] + b * sv[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_is_reported_with_step_index() {
        let mut rk = Rk3::new(1);
        let mut u = vec![1.0];
        // Unstable: dt/eta far outside the stability region.
        let mut rhs = |x: &[f64], out: &mut [f64]| out[0] = x[0] * x[0] * 1e200;
        let err = rk.step(&mut rhs, &mut u, 1e200, 5).unwrap_err();
        match err {
            Error::Diverged { step, .. } => assert_eq!(step, 5),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn final_partial_step_lands_exactly() {
        let mut rk = Rk3::new(1);
        let mut u = vec![1.0];
        let mut t_hit = 0.0;
        let mut rhs = |_: &[f64], out: &mut [f64]| out[0] = 1.0;
        let time = TimeConfig::new(0.3, 1.0).unwrap();
        let steps = rk
            .integrate(&mut rhs, &mut u, &time, |_, t, _| t_hit = t)
            .unwrap();
        assert_eq!(steps, 4);
        assert_eq!(t_hit, 1.0);
        // du/dt = 1 integrates exactly regardless of the partial step.
        assert!((u[0] - 2.0).abs() < 1e-14);
    }
}
