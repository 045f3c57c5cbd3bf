//! Emitter and joint moments from the photon ladder.
//!
//! With the ladder I_n in hand, the steady-state equations of motion give
//! the remaining moments by back-substitution:
//! `B_n = (p I_n − κ I_{n+1})/σ_n` and
//! `R_n = −i g [(n+1)B_n + 2B_{n+1} − I_{n+1}]/(iδ + γ̃_n)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::recurrence::{MomentLadder, RecurrenceCoeffs};

/// Photon ladder plus the emitter population and coherence sequences.
#[derive(Clone, Debug)]
pub struct FullMoments {
    pub ladder: MomentLadder,
    /// B_n = ⟨Â₂₂ â†ⁿâⁿ⟩, real; B_0 is the excited-state population.
    pub b_moments: Vec<f64>,
    /// R_n = ⟨Â₂₁ â†ⁿâⁿ⁺¹⟩, purely imaginary at δ = 0.
    pub r_moments: Vec<Complex64>,
}

impl FullMoments {
    pub fn i(&self, n: usize) -> Option<f64> {
        self.ladder.i(n)
    }
    pub fn b(&self, n: usize) -> Option<f64> {
        self.b_moments.get(n).copied()
    }
    pub fn r(&self, n: usize) -> Option<Complex64> {
        self.r_moments.get(n).copied()
    }
}

/// Compute B and R from a ladder. Entries at the truncation edge that would
/// need I beyond the ladder are dropped, not extrapolated: with I_0..I_N
/// stored, B runs to N−1 and R to N−2.
pub fn back_substitute(ladder: &MomentLadder, coeffs: &RecurrenceCoeffs) -> Result<FullMoments> {
    let iv = &ladder.i_moments;
    if iv.len() < 3 {
        return Err(Error::LadderTooShort { needed: 3, have: iv.len() });
    }
    let p = coeffs.params();
    let nb = iv.len() - 1;
    let mut b = Vec::with_capacity(nb);
    for n in 0..nb {
        b.push((p.p * iv[n] - p.kappa * iv[n + 1]) / coeffs.sigma(n as f64));
    }
    let nr = nb - 1;
    let mut r = Vec::with_capacity(nr);
    for n in 0..nr {
        let x = (n as f64 + 1.0) * b[n] + 2.0 * b[n + 1] - iv[n + 1];
        // −ig·x/(iδ + γ̃)
        let den = Complex64::new(coeffs.gamma_n(n as f64), p.delta);
        r.push(Complex64::new(0.0, -p.g * x) / den);
    }
    Ok(FullMoments { ladder: ladder.clone(), b_moments: b, r_moments: r })
}

/// Normalized intensity correlation g⁽ⁿ⁾(0) = I_n/I₁ⁿ.
pub fn g_n_zero(ladder: &MomentLadder, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("correlation order must be >= 1"));
    }
    let i1 = ladder.i(1).ok_or(Error::LadderTooShort { needed: 2, have: ladder.i_moments.len() })?;
    if i1 <= 0.0 {
        return Err(Error::VacuumUndefined { what: "g^(n)(0)" });
    }
    let i_n = ladder
        .i(n)
        .ok_or(Error::LadderTooShort { needed: n + 1, have: ladder.i_moments.len() })?;
    Ok(i_n / i1.powi(n as i32))
}

/// Mandel Q parameter, (⟨(Δn̂)²⟩ − ⟨n̂⟩)/⟨n̂⟩ expressed in normally ordered
/// moments: Q = (I₂ − I₁²)/I₁. Negative values signal sub-Poissonian
/// statistics.
pub fn mandel_q(ladder: &MomentLadder) -> Result<f64> {
    let i1 = ladder.i(1).ok_or(Error::LadderTooShort { needed: 3, have: ladder.i_moments.len() })?;
    let i2 = ladder.i(2).ok_or(Error::LadderTooShort { needed: 3, have: ladder.i_moments.len() })?;
    if i1 <= 0.0 {
        return Err(Error::VacuumUndefined { what: "Mandel Q" });
    }
    Ok((i2 - i1 * i1) / i1)
}

/// Maximum relative residuals of the three steady-state equations of motion.
#[derive(Clone, Copy, Debug)]
pub struct EomResiduals {
    /// d/dt I_n = −nκI_n − 2ng·Im R_{n−1}
    pub photon: f64,
    /// d/dt B_n = −σ_n B_n + p I_n + 2g·Im R_n
    pub emitter: f64,
    /// d/dt R_n = −(iδ + γ̃_n) R_n − ig[(n+1)B_n + 2B_{n+1} − I_{n+1}]
    pub coherence: f64,
}

impl EomResiduals {
    pub fn max(&self) -> f64 {
        self.photon.max(self.emitter).max(self.coherence)
    }
}

/// Substitute (I, B, R) into the steady-state equations and report the
/// largest relative residual of each family.
pub fn eom_residuals(full: &FullMoments, coeffs: &RecurrenceCoeffs) -> EomResiduals {
    let p = coeffs.params();
    let iv = &full.ladder.i_moments;
    let b = &full.b_moments;
    let r = &full.r_moments;
    let rel = |num: f64, scale: f64| num.abs() / scale.max(f64::MIN_POSITIVE);

    let mut photon = 0.0f64;
    for n in 1..=r.len() {
        let t1 = -(n as f64) * p.kappa * iv[n];
        let t2 = -2.0 * n as f64 * p.g * r[n - 1].im;
        photon = photon.max(rel(t1 + t2, t1.abs() + t2.abs()));
    }
    let mut emitter = 0.0f64;
    for n in 0..r.len() {
        let t1 = -coeffs.sigma(n as f64) * b[n];
        let t2 = p.p * iv[n];
        let t3 = 2.0 * p.g * r[n].im;
        emitter = emitter.max(rel(t1 + t2 + t3, t1.abs() + t2.abs() + t3.abs()));
    }
    let mut coherence = 0.0f64;
    for n in 0..r.len().min(b.len().saturating_sub(1)) {
        let den = Complex64::new(coeffs.gamma_n(n as f64), p.delta);
        let t1 = -den * r[n];
        let x = (n as f64 + 1.0) * b[n] + 2.0 * b[n + 1] - iv[n + 1];
        let t2 = Complex64::new(0.0, -p.g * x);
        coherence = coherence.max(rel((t1 + t2).norm(), t1.norm() + t2.norm()));
    }
    EomResiduals { photon, emitter, coherence }
}

/// Reference ladder of a coherent state, I_n = I₁ⁿ.
pub fn coherent_reference(i1: f64, n_max: usize) -> Vec<f64> {
    (0..=n_max).map(|n| i1.powi(n as i32)).collect()
}

/// Reference ladder of a thermal state, I_n = n!·I₁ⁿ.
pub fn thermal_reference(i1: f64, n_max: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(n_max + 1);
    let mut f = 1.0;
    for n in 0..=n_max {
        if n > 0 {
            f *= n as f64 * i1;
        }
        v.push(f);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::recurrence::{coeffs, estimate_i1, solve_ladder, SolveOptions};
    use crate::scalar::Precision;
    use approx::assert_relative_eq;

    fn reference_ladder(values: Vec<f64>) -> MomentLadder {
        MomentLadder {
            cutoff_n: values.len() - 1,
            i_moments: values,
            i1_bracket: crate::recurrence::I1Bracket { lower: 0.0, upper: 0.0 },
            epsilon: 0.1,
            first_negative: None,
            precision: Precision::F64,
        }
    }

    fn solve(params: SystemParams, n: usize) -> (RecurrenceCoeffs, FullMoments) {
        let c = coeffs(&params).unwrap();
        let est =
            estimate_i1(&c, &SolveOptions::default().with_precision(Precision::Big(256))).unwrap();
        let lad = solve_ladder(&c, &est, n);
        let full = back_substitute(&lad, &c).unwrap();
        (c, full)
    }

    #[test]
    fn vacuum_moments_all_zero() {
        let (_, full) = solve(SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap(), 8);
        assert!(full.b_moments.iter().all(|&x| x == 0.0));
        assert!(full.r_moments.iter().all(|&z| z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn excited_population_in_unit_interval() {
        for p in [1e10, 1e11, 1e12, 1e13] {
            let (_, full) = solve(SystemParams::set_a(p), 10);
            let b0 = full.b(0).unwrap();
            assert!((0.0..=1.0).contains(&b0), "B0 = {b0} at p = {p:e}");
            assert!(full.b_moments.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn r_purely_imaginary_on_resonance() {
        let (_, full) = solve(SystemParams::set_b(1e11), 10);
        for z in &full.r_moments {
            assert_eq!(z.re, 0.0);
        }
    }

    #[test]
    fn r_gains_real_part_off_resonance() {
        let (_, full) = solve(SystemParams::set_b(1e11).with_delta(5e10), 10);
        assert!(full.r_moments.iter().any(|z| z.re.abs() > 1e-6));
    }

    #[test]
    fn steady_state_residuals_vanish() {
        for params in [SystemParams::set_a(1e11), SystemParams::set_b(1e11)] {
            let (c, full) = solve(params, 12);
            let res = eom_residuals(&full, &c);
            assert!(res.max() < 1e-10, "residuals {res:?}");
        }
        // off resonance and with dephasing too
        let (c, full) = solve(SystemParams::set_a(1e11).with_delta(-3e10).with_dephasing(2e10), 10);
        let res = eom_residuals(&full, &c);
        assert!(res.max() < 1e-10, "residuals {res:?}");
    }

    #[test]
    fn ladder_too_short_rejected() {
        let c = coeffs(&SystemParams::set_a(1e11)).unwrap();
        let lad = reference_ladder(vec![1.0, 0.1]);
        assert!(matches!(back_substitute(&lad, &c), Err(Error::LadderTooShort { .. })));
    }

    #[test]
    fn g_n_reference_states() {
        let coh = reference_ladder(coherent_reference(1.7, 6));
        let th = reference_ladder(thermal_reference(0.8, 6));
        for n in 1..=6 {
            assert_relative_eq!(g_n_zero(&coh, n).unwrap(), 1.0, max_relative = 1e-12);
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert_relative_eq!(g_n_zero(&th, n).unwrap(), fact, max_relative = 1e-12);
        }
        assert_eq!(g_n_zero(&coh, 1).unwrap(), 1.0);
        assert!(g_n_zero(&coh, 0).is_err());
        let vac = reference_ladder(vec![1.0, 0.0, 0.0]);
        assert!(matches!(g_n_zero(&vac, 2), Err(Error::VacuumUndefined { .. })));
    }

    #[test]
    fn mandel_q_reference_states() {
        let coh = reference_ladder(coherent_reference(1.3, 3));
        assert_relative_eq!(mandel_q(&coh).unwrap(), 0.0, epsilon = 1e-12);
        let th = reference_ladder(thermal_reference(0.9, 3));
        assert_relative_eq!(mandel_q(&th).unwrap(), 0.9, max_relative = 1e-12);
        let vac = reference_ladder(vec![1.0, 0.0, 0.0]);
        assert!(mandel_q(&vac).is_err());
    }

    #[test]
    fn mandel_q_sign_tracks_g2() {
        for (params, n) in [(SystemParams::set_a(1e10), 6), (SystemParams::set_b(1e11), 6)] {
            let (_, full) = solve(params, n);
            let q = mandel_q(&full.ladder).unwrap();
            let g2 = g_n_zero(&full.ladder, 2).unwrap();
            assert_eq!(q < 0.0, g2 < 1.0);
        }
    }

    #[test]
    fn set_a_low_pump_sub_poissonian() {
        let (_, full) = solve(SystemParams::set_a(1e10), 6);
        assert!(mandel_q(&full.ladder).unwrap() < 0.0);
    }
}
