//! Time integration of the coupled moment equations.
//!
//! The hierarchy
//! `İ_n = −nκI_n − 2ng·Im R_{n−1}`,
//! `Ḃ_n = −σ_n B_n + pI_n + 2g·Im R_n`,
//! `Ṙ_n = −(iδ+γ̃_n)R_n − ig[(n+1)B_n + 2B_{n+1} − I_{n+1}]`
//! is closed by zeroing all moments at `max_n` and integrated from vacuum
//! with an adaptive embedded Runge–Kutta pair (Cash–Karp 4(5)). Long-time
//! values converge to the steady-state moments.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

use super::OracleMoments;

#[derive(Clone, Copy, Debug)]
pub struct EomOptions {
    /// Closure order: I, B, R at this order are held at zero.
    pub max_n: usize,
    /// Relative tolerance of the step controller.
    pub rtol: f64,
    pub atol: f64,
    /// End time in the same units as the rates' inverse (seconds for s⁻¹
    /// rates). Defaults to 50/min(κ, Γ).
    pub t_end: Option<f64>,
    pub max_steps: usize,
    /// Trajectory sample count (available in the output).
    pub samples: usize,
}

impl Default for EomOptions {
    fn default() -> Self {
        EomOptions { max_n: 24, rtol: 1e-9, atol: 1e-14, t_end: None, max_steps: 2_000_000, samples: 200 }
    }
}

/// Integration output: sampled intensity/population plus final moments.
#[derive(Clone, Debug)]
pub struct EomTrajectory {
    /// Sample times (input units).
    pub t: Vec<f64>,
    pub i1: Vec<f64>,
    pub b0: Vec<f64>,
    pub final_moments: OracleMoments,
    pub steps: usize,
    pub rejected: usize,
    /// Whether the derivative had decayed to steady-state level by t_end.
    pub converged: bool,
}

struct Hierarchy {
    m: usize,
    g: f64,
    kappa: f64,
    p: f64,
    delta: f64,
    sigma: Vec<f64>,
    gamma_t: Vec<f64>,
}

impl Hierarchy {
    fn new(norm: &SystemParams, m: usize) -> Self {
        let sigma = (0..m).map(|n| norm.gamma + norm.p + n as f64 * norm.kappa).collect();
        let gamma_t = (0..m)
            .map(|n| {
                (norm.gamma + norm.p + norm.kappa * (2.0 * n as f64 + 1.0)) / 2.0
                    + norm.gamma_d / 2.0
            })
            .collect();
        Hierarchy { m, g: norm.g, kappa: norm.kappa, p: norm.p, delta: norm.delta, sigma, gamma_t }
    }

    /// State layout: [I_1..I_{m−1} | B_0..B_{m−1} | Re R_0..Re R_{m−1} | Im R_0..Im R_{m−1}]
    fn dim(&self) -> usize {
        (self.m - 1) + 3 * self.m
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let m = self.m;
        let i = |n: usize| -> f64 {
            if n == 0 {
                1.0
            } else if n < m {
                y[n - 1]
            } else {
                0.0
            }
        };
        let b_off = m - 1;
        let rr_off = b_off + m;
        let ri_off = rr_off + m;
        let b = |n: usize| -> f64 { if n < m { y[b_off + n] } else { 0.0 } };
        let r_im = |n: usize| -> f64 { if n < m { y[ri_off + n] } else { 0.0 } };
        let r_re = |n: usize| -> f64 { if n < m { y[rr_off + n] } else { 0.0 } };
        for n in 1..m {
            dy[n - 1] = -(n as f64) * self.kappa * i(n) - 2.0 * n as f64 * self.g * r_im(n - 1);
        }
        for n in 0..m {
            dy[b_off + n] = -self.sigma[n] * b(n) + self.p * i(n) + 2.0 * self.g * r_im(n);
            // Ṙ = −(iδ+γ̃)R − igX, X real
            let x = (n as f64 + 1.0) * b(n) + 2.0 * b(n + 1) - i(n + 1);
            dy[rr_off + n] = -self.gamma_t[n] * r_re(n) + self.delta * r_im(n);
            dy[ri_off + n] = -self.gamma_t[n] * r_im(n) - self.delta * r_re(n) - self.g * x;
        }
    }
}

// Cash–Karp embedded 4(5) tableau
const A: [[f64; 5]; 5] = [
    [0.2, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [0.3, -0.9, 1.2, 0.0, 0.0],
    [-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [
        1631.0 / 55296.0,
        175.0 / 512.0,
        575.0 / 13824.0,
        44275.0 / 110592.0,
        253.0 / 4096.0,
    ],
];
const B5: [f64; 6] = [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0];
const B4: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    0.25,
];

/// Integrate the truncated hierarchy from vacuum up to `t_end`.
pub fn integrate_eom(params: &SystemParams, opts: &EomOptions) -> Result<EomTrajectory> {
    params.validate()?;
    if opts.max_n < 3 {
        return Err(Error::Integration("closure order must be at least 3".into()));
    }
    let norm = params.normalize();
    // time is integrated in units of 1/κ
    let t_end_in = opts.t_end.unwrap_or(50.0 / params.kappa.min(params.gamma));
    let tau_end = t_end_in * params.kappa;
    let sys = Hierarchy::new(&norm, opts.max_n);
    let dim = sys.dim();
    let mut y = vec![0.0f64; dim];
    let mut tau = 0.0f64;
    let mut dt = (tau_end / 1000.0).min(0.1).max(1e-8);
    let mut k = [
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    ];
    let mut ytmp = vec![0.0; dim];
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut t_samples = Vec::with_capacity(opts.samples + 1);
    let mut i1_samples = Vec::with_capacity(opts.samples + 1);
    let mut b0_samples = Vec::with_capacity(opts.samples + 1);
    let sample_every = tau_end / opts.samples.max(1) as f64;
    let mut next_sample = 0.0f64;

    while tau < tau_end {
        if tau + dt > tau_end {
            dt = tau_end - tau;
        }
        sys.rhs(&y, &mut k[0]);
        for stage in 1..6 {
            for (j, yt) in ytmp.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (s, ks) in k.iter().enumerate().take(stage) {
                    let a = A[stage - 1][s];
                    if a != 0.0 {
                        acc += a * ks[j];
                    }
                }
                *yt = y[j] + dt * acc;
            }
            let (head, tail) = k.split_at_mut(stage);
            let _ = head;
            sys.rhs(&ytmp, &mut tail[0]);
        }
        // 5th-order solution and embedded error
        let mut err_norm: f64 = 0.0;
        for j in 0..dim {
            let mut y5 = 0.0;
            let mut y4 = 0.0;
            for s in 0..6 {
                y5 += B5[s] * k[s][j];
                y4 += B4[s] * k[s][j];
            }
            let ynew = y[j] + dt * y5;
            let e = dt * (y5 - y4);
            let scale = opts.atol + opts.rtol * y[j].abs().max(ynew.abs());
            err_norm = err_norm.max((e / scale).abs());
            ytmp[j] = ynew;
        }
        if err_norm <= 1.0 {
            y.copy_from_slice(&ytmp);
            tau += dt;
            steps += 1;
            if tau >= next_sample || tau >= tau_end {
                t_samples.push(tau / params.kappa);
                i1_samples.push(if dim > 0 { y[0] } else { 0.0 });
                b0_samples.push(y[sys.m - 1]);
                next_sample += sample_every;
            }
        } else {
            rejected += 1;
        }
        let factor = if err_norm > 0.0 { 0.9 * err_norm.powf(-0.2) } else { 5.0 };
        dt *= factor.clamp(0.2, 5.0);
        if dt < 1e-13 * tau_end {
            return Err(Error::Integration(format!("step size underflow at τ = {tau:e}")));
        }
        if steps + rejected > opts.max_steps {
            return Err(Error::Integration(format!(
                "exceeded {} steps before t_end",
                opts.max_steps
            )));
        }
    }

    // final derivative magnitude relative to the state magnitude
    sys.rhs(&y, &mut k[0]);
    let ymax = y.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-30);
    let dymax = k[0].iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let converged = dymax / ymax < 1e-7;

    let m = sys.m;
    let mut i = vec![0.0; m];
    i[0] = 1.0;
    i[1..m].copy_from_slice(&y[0..m - 1]);
    let b = y[m - 1..2 * m - 1].to_vec();
    let r: Vec<C64> = (0..m).map(|n| C64::new(y[2 * m - 1 + n], y[3 * m - 1 + n])).collect();
    Ok(EomTrajectory {
        t: t_samples,
        i1: i1_samples,
        b0: b0_samples,
        final_moments: OracleMoments { i, b, r },
        steps,
        rejected,
        converged,
    })
}

/// Largest derivative produced when the hierarchy is seeded with externally
/// computed steady-state moments; near zero iff they solve the equations.
pub fn seeded_derivative_norm(
    params: &SystemParams,
    i: &[f64],
    b: &[f64],
    r: &[C64],
) -> Result<f64> {
    params.validate()?;
    let m = b.len().min(r.len()).min(i.len().saturating_sub(1));
    if m < 3 {
        return Err(Error::Integration("need at least 3 moment orders".into()));
    }
    let norm = params.normalize();
    let sys = Hierarchy::new(&norm, m);
    let mut y = vec![0.0; sys.dim()];
    y[0..m - 1].copy_from_slice(&i[1..m]);
    for n in 0..m {
        y[m - 1 + n] = b[n];
        y[2 * m - 1 + n] = r[n].re;
        y[3 * m - 1 + n] = r[n].im;
    }
    let mut dy = vec![0.0; sys.dim()];
    sys.rhs(&y, &mut dy);
    // closure error pollutes the last two orders; measure the interior
    let interior = |v: &[f64], hi: usize| -> f64 {
        v.iter().take(hi).fold(0.0f64, |a, &x| a.max(x.abs()))
    };
    let ymax = y.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-30);
    let mut worst = interior(&dy[0..m - 1], m.saturating_sub(3));
    worst = worst.max(interior(&dy[m - 1..2 * m - 1], m.saturating_sub(2)));
    worst = worst.max(interior(&dy[2 * m - 1..3 * m - 1], m.saturating_sub(2)));
    worst = worst.max(interior(&dy[3 * m - 1..4 * m - 1], m.saturating_sub(2)));
    Ok(worst / ymax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::steady_state_reduced;
    use crate::scalar::Precision;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_stays_vacuum() {
        let params = SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let traj = integrate_eom(&params, &EomOptions { max_n: 6, ..Default::default() }).unwrap();
        assert!(traj.final_moments.i[1..].iter().all(|&x| x.abs() < 1e-14));
        assert!(traj.final_moments.b.iter().all(|&x| x.abs() < 1e-14));
        assert!(traj.converged);
    }

    #[test]
    fn long_time_limit_matches_steady_state() {
        let params = SystemParams::set_a(1e11);
        let traj = integrate_eom(&params, &EomOptions { max_n: 16, ..Default::default() }).unwrap();
        assert!(traj.converged, "not converged: {} steps", traj.steps);
        let red = steady_state_reduced(&params, 30, Precision::F64).unwrap();
        let m = red.moments(3).unwrap();
        assert_relative_eq!(traj.final_moments.i[1], m.i[1], max_relative = 1e-6);
        assert_relative_eq!(traj.final_moments.b[0], m.b[0], max_relative = 1e-6);
        assert_relative_eq!(traj.final_moments.r[0].im, m.r[0].im, max_relative = 1e-5);
    }

    #[test]
    fn seeded_with_steady_state_gives_tiny_derivative() {
        let params = SystemParams::set_b(1e11);
        let red = steady_state_reduced(&params, 40, Precision::Big(128)).unwrap();
        let m = red.moments(10).unwrap();
        let norm = seeded_derivative_norm(&params, &m.i, &m.b, &m.r).unwrap();
        assert!(norm < 1e-10, "seeded derivative {norm:e}");
    }

    #[test]
    fn trajectory_is_sampled() {
        let params = SystemParams::set_a(1e11);
        let traj = integrate_eom(
            &params,
            &EomOptions { max_n: 10, samples: 50, t_end: Some(1e-10), ..Default::default() },
        )
        .unwrap();
        assert!(traj.t.len() >= 40);
        // rises from vacuum (transient may ring, so no strict monotonicity)
        assert!(traj.i1[0] < *traj.i1.last().unwrap());
        assert!(traj.i1.iter().all(|&v| v > -1e-12));
    }
}
