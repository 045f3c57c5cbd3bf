//! Normally ordered characteristic function of the intracavity field.
//!
//! `Φ(α) = Σ (−1)ⁿ |α|^{2n} I_n / (n!)²` is phase independent and real.
//! |Φ| > 1 anywhere witnesses nonclassicality. The alternating series
//! cancels catastrophically at large |α|, so evaluation tracks the
//! largest-term/result ratio and escalates to wide floats when needed.
//!
//! Beyond the stored ladder the asymptotic moment recursion
//! `I_{n+1} = (ξ/n) I_n` continues the series (split-sum form), and for
//! `x = |α|²ξ` large the whole tail collapses to the closed envelope
//! `Φ ≈ (1/√3π)·exp((3/2)x^{1/3})·cos((3√3/2)x^{1/3})`, which eventually
//! exceeds any polynomial: the steady-state field is always nonclassical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recurrence::{ratio_bounds, select_cutoff, MomentLadder, RecurrenceCoeffs};
use crate::scalar::{CompensatedSum, Mp, Precision, Real};

/// Below this x^{1/3} the closed-form envelope drops terms that are not yet
/// negligible; values are flagged rather than trusted.
pub const ENVELOPE_VALIDITY_XT: f64 = 5.0;

/// Escalate from f64 once the largest term exceeds this multiple of the sum.
pub const ESCALATION_RATIO: f64 = 1e12;

/// One evaluated Φ sample with numerical quality metadata.
#[derive(Clone, Copy, Debug)]
pub struct PhiValue {
    pub value: f64,
    /// Estimated magnitude of the truncated tail.
    pub tail_bound: f64,
    /// max |term| / |Φ| — digits lost to cancellation.
    pub max_term_ratio: f64,
    /// Last series order actually summed.
    pub n_used: usize,
}

fn acceptable(value: f64, tail: f64) -> bool {
    tail.is_finite() && tail <= 1e-9 * value.abs().max(1.0)
}

/// Largest |α| at which the truncated series stays controlled, from the
/// ladder length and the precision's digit budget.
fn max_safe_alpha(ladder: &MomentLadder, xi: f64, prec: Precision) -> f64 {
    if xi <= 0.0 {
        return f64::INFINITY;
    }
    let n = ladder.max_order() as f64;
    // terms must turn over and decay a few orders before the ladder ends
    let x_ladder = 0.5 * ((n - 4.0).max(1.0)).powi(3) / xi;
    // cancellation: ln(max term / Φ) ≈ 1.5 x^{1/3}
    let digits = prec.decimal_digits() - 8.0;
    let x_cancel = (digits.max(1.0) * std::f64::consts::LN_10 / 1.5).powi(3) / xi;
    (x_ladder.min(x_cancel) / xi).sqrt()
}

enum TailRule<'a> {
    /// Stop at the ladder end; bound the remainder by the ratio bound.
    Truncate(&'a RecurrenceCoeffs),
    /// Continue past `n_split` with I_{n+1} = (ξ/n) I_n until convergence.
    Asymptotic { xi: f64, n_split: usize },
}

fn phi_sum<S: Real>(
    ladder: &MomentLadder,
    alpha_abs: f64,
    bits: u32,
    rule: &TailRule,
) -> Result<PhiValue> {
    let x = alpha_abs * alpha_abs;
    let xs = S::of(x, bits);
    let mut sum_f64 = CompensatedSum::default();
    let mut sum_mp = S::of(0.0, bits);
    let use_comp = bits <= 53;
    let add = |t: &S, acc_f64: &mut CompensatedSum, acc: &mut S| {
        if use_comp {
            acc_f64.add(t.to_f64());
        } else {
            *acc = acc.add(t);
        }
    };

    // f_n = x^n/(n!)² built incrementally; term_n = ±f_n I_n
    let mut f = S::of(1.0, bits);
    let mut max_term = 0.0f64;
    let mut term_f64;
    let mut n = 0usize;
    let head_end = match rule {
        TailRule::Truncate(_) => ladder.max_order(),
        TailRule::Asymptotic { n_split, .. } => *n_split,
    };
    let mut i_cur = S::of(1.0, bits);
    loop {
        let sign_neg = n % 2 == 1;
        let term = f.mul(&i_cur);
        let term_signed = if sign_neg { term.neg() } else { term.clone() };
        add(&term_signed, &mut sum_f64, &mut sum_mp);
        term_f64 = term.to_f64();
        if !term_f64.is_finite() {
            return Err(Error::AlphaOutOfRange {
                requested: alpha_abs,
                max_safe: 0.0,
                bits,
            });
        }
        max_term = max_term.max(term_f64.abs());
        if n == head_end {
            break;
        }
        n += 1;
        f = f.mul(&xs).div(&S::of((n * n) as f64, bits));
        i_cur = S::of(ladder.i_moments[n], bits);
    }

    let tail_bound = match rule {
        TailRule::Truncate(coeffs) => {
            // bound the first omitted term through the rigorous ratio bound,
            // then a geometric envelope
            let last_i = ladder.i_moments[head_end];
            if last_i == 0.0 {
                0.0
            } else {
                let rb = ratio_bounds(coeffs, head_end, ladder.epsilon.max(1e-6));
                match rb.upper {
                    Some(u) => {
                        let t_next =
                            f.to_f64().abs() * x / ((head_end + 1) * (head_end + 1)) as f64
                                * last_i
                                * u;
                        let q = x * u / ((head_end + 2) * (head_end + 2)) as f64;
                        if q < 1.0 {
                            t_next / (1.0 - q)
                        } else {
                            f64::INFINITY
                        }
                    }
                    None => f64::INFINITY,
                }
            }
        }
        TailRule::Asymptotic { xi, n_split } => {
            // keep summing with the asymptotic recursion until terms die
            let mut tail_last = 0.0f64;
            if ladder.i_moments[*n_split] != 0.0 && *xi > 0.0 {
                let x_tail = x * xi;
                let cap = *n_split + 4 * (x_tail.cbrt().ceil() as usize + 2) + 400;
                loop {
                    // I_{n+1} = (ξ/n) I_n
                    i_cur = i_cur.mul(&S::of(xi / n as f64, bits));
                    n += 1;
                    f = f.mul(&xs).div(&S::of((n * n) as f64, bits));
                    let term = f.mul(&i_cur);
                    let term_signed = if n % 2 == 1 { term.neg() } else { term.clone() };
                    add(&term_signed, &mut sum_f64, &mut sum_mp);
                    tail_last = term.to_f64().abs();
                    max_term = max_term.max(tail_last);
                    let cur = if use_comp { sum_f64.value().abs() } else { sum_mp.to_f64().abs() };
                    if tail_last <= 1e-25 * cur.max(1.0) && n > *n_split + 4 {
                        break;
                    }
                    if n >= cap {
                        return Err(Error::AlphaOutOfRange {
                            requested: alpha_abs,
                            max_safe: 0.0,
                            bits,
                        });
                    }
                }
            }
            tail_last
        }
    };

    let value = if use_comp { sum_f64.value() } else { sum_mp.to_f64() };
    Ok(PhiValue {
        value,
        tail_bound,
        max_term_ratio: if value == 0.0 { f64::INFINITY } else { max_term / value.abs() },
        n_used: n,
    })
}

/// Truncated alternating series for Φ(|α|) over the stored ladder, with a
/// tail-bound estimate from the moment-ratio bound.
pub fn phi_series(
    ladder: &MomentLadder,
    coeffs: &RecurrenceCoeffs,
    alpha_abs: f64,
    prec: Precision,
) -> Result<PhiValue> {
    if alpha_abs < 0.0 || !alpha_abs.is_finite() {
        return Err(Error::Domain("|alpha| must be finite and nonnegative"));
    }
    let rule = TailRule::Truncate(coeffs);
    let out = match prec {
        Precision::F64 => phi_sum::<f64>(ladder, alpha_abs, 53, &rule),
        Precision::Big(bits) => phi_sum::<Mp>(ladder, alpha_abs, bits, &rule),
    }?;
    // rounding noise ≈ max term · 2^{−bits}, with a few guard bits
    let rounding =
        out.max_term_ratio * out.value.abs() * 2f64.powi(-(prec.bits() as i32) + 6);
    let numeric_ok = rounding.is_finite() && rounding <= 1e-9 * out.value.abs().max(1.0);
    if acceptable(out.value, out.tail_bound) && numeric_ok {
        Ok(out)
    } else {
        Err(Error::AlphaOutOfRange {
            requested: alpha_abs,
            max_safe: max_safe_alpha(ladder, coeffs.xi(), prec),
            bits: prec.bits(),
        })
    }
}

/// Split-sum form: exact moments through `n_split`, then the asymptotic
/// recursion I_{n+1} = (ξ/n) I_n summed to convergence.
pub fn phi_split(
    ladder: &MomentLadder,
    coeffs: &RecurrenceCoeffs,
    alpha_abs: f64,
    n_split: usize,
    prec: Precision,
) -> Result<PhiValue> {
    if alpha_abs < 0.0 || !alpha_abs.is_finite() {
        return Err(Error::Domain("|alpha| must be finite and nonnegative"));
    }
    let cutoff = select_cutoff(coeffs, ladder.epsilon.max(1e-6).min(1.0))?;
    if n_split < cutoff.n {
        return Err(Error::SplitBelowCutoff { given: n_split, cutoff: cutoff.n });
    }
    if n_split > ladder.max_order() {
        return Err(Error::LadderTooShort { needed: n_split + 1, have: ladder.i_moments.len() });
    }
    let rule = TailRule::Asymptotic { xi: coeffs.xi(), n_split };
    match prec {
        Precision::F64 => phi_sum::<f64>(ladder, alpha_abs, 53, &rule),
        Precision::Big(bits) => phi_sum::<Mp>(ladder, alpha_abs, bits, &rule),
    }
}

/// Closed-form asymptotic envelope of Φ at x = |α|²ξ.
#[derive(Clone, Copy, Debug)]
pub struct AsympEnvelope {
    pub value: f64,
    pub xt: f64,
    /// x^{1/3} ≥ [`ENVELOPE_VALIDITY_XT`]; below, the dropped exp(−3x̃) and
    /// constant terms are not negligible.
    pub valid: bool,
}

/// `Φ_asymp(x) ≈ (1/√3π) exp((3/2)x^{1/3}) cos((3√3/2)x^{1/3})`, x > 0.
pub fn phi_asymp_envelope(x: f64) -> Result<AsympEnvelope> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain("envelope argument x must be positive"));
    }
    let xt = x.cbrt();
    let value = (1.5 * xt).exp() * (1.5 * 3f64.sqrt() * xt).cos()
        / (3f64.sqrt() * std::f64::consts::PI);
    Ok(AsympEnvelope { value, xt, valid: xt >= ENVELOPE_VALIDITY_XT })
}

/// Σ_{n≥1} (−3x̃)^{3n}/(3n)! by direct summation at `bits` precision.
pub fn three_exp_series(xt: f64, bits: u32) -> Mp {
    let y = Mp::of(-3.0 * xt, bits).powi(3); // (−3x̃)³
    let mut term = y.div(&Mp::of(6.0, bits)); // n = 1: y/3!
    let mut sum = term.clone();
    let mut n = 1usize;
    loop {
        let d = ((3 * n + 1) * (3 * n + 2) * (3 * n + 3)) as f64;
        term = term.mul(&y).div(&Mp::of(d, bits));
        sum = sum.add(&term);
        n += 1;
        if term.abs().to_f64() == 0.0
            || term.abs().le(&sum.abs().mul(&Mp::of(2f64.powi(-(bits as i32) - 16), bits)))
        {
            break;
        }
        if n > 100_000 {
            break;
        }
    }
    sum
}

/// The same sum in closed form:
/// (1/3)[2 exp(3x̃/2) cos((3√3/2)x̃) + exp(−3x̃)] − 1.
pub fn three_exp_closed(xt: f64, bits: u32) -> Mp {
    let xt_m = Mp::of(xt, bits);
    let s3 = Mp::of(3.0, bits).sqrt();
    let e_pos = Mp::of(1.5, bits).mul(&xt_m).exp();
    let c = Mp::of(1.5, bits).mul(&s3).mul(&xt_m).cos();
    let e_neg = Mp::of(-3.0, bits).mul(&xt_m).exp();
    Mp::of(2.0, bits)
        .mul(&e_pos)
        .mul(&c)
        .add(&e_neg)
        .div(&Mp::of(3.0, bits))
        .sub(&Mp::of(1.0, bits))
}

/// Σ_{n≥1} n(−x)ⁿ/(n!)³ by direct summation at `bits` precision.
pub fn reduced_series(x: f64, bits: u32) -> Mp {
    let neg_x = Mp::of(-x, bits);
    let mut term = neg_x.clone(); // n = 1: 1·(−x)/1
    let mut sum = term.clone();
    let mut n = 1usize;
    loop {
        // t_{n+1}/t_n = −x / (n(n+1)²)
        let d = (n * (n + 1) * (n + 1)) as f64;
        term = term.mul(&neg_x).div(&Mp::of(d, bits));
        sum = sum.add(&term);
        n += 1;
        if term.abs().to_f64() == 0.0
            || term.abs().le(&sum.abs().mul(&Mp::of(2f64.powi(-(bits as i32) - 16), bits)))
        {
            break;
        }
        if n > 100_000 {
            break;
        }
    }
    sum
}

/// Sampled Φ profile over an |α| grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharFnProfile {
    pub alpha: Vec<f64>,
    pub phi: Vec<f64>,
    pub tail_bound: Vec<f64>,
    pub exceeds_one: Vec<bool>,
    /// Series truncation order (ladder length used).
    pub n_trunc: usize,
    /// Split-sum tail metadata: (N, ξ, I_N).
    pub tail_params: (usize, f64, f64),
    /// Widest precision used across samples, in significand bits.
    pub precision_bits: u32,
    /// First sample index that needed escalation beyond f64, if any.
    pub escalated_at: Option<usize>,
}

/// Grid request for [`profile`].
#[derive(Clone, Copy, Debug)]
pub struct AlphaGrid {
    /// Upper end of the grid; `None` picks the largest safe value, capped at
    /// the display default 6.0.
    pub max: Option<f64>,
    pub samples: usize,
    pub precision: Precision,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid { max: None, samples: 512, precision: Precision::Big(256) }
    }
}

/// Evaluate Φ over a grid, escalating precision per sample when cancellation
/// passes [`ESCALATION_RATIO`]. A sample whose |Φ| exceeds 1 by more than its
/// tail bound plus rounding slack is marked as a nonclassicality witness.
pub fn profile(
    ladder: &MomentLadder,
    coeffs: &RecurrenceCoeffs,
    grid: &AlphaGrid,
) -> Result<CharFnProfile> {
    if grid.samples < 2 {
        return Err(Error::Domain("grid needs at least 2 samples"));
    }
    let hard_max = max_safe_alpha(ladder, coeffs.xi(), grid.precision);
    let alpha_max = match grid.max {
        Some(m) if m > 0.0 => m,
        Some(_) => return Err(Error::Domain("alpha max must be positive")),
        None => hard_max.min(6.0),
    };
    let mut out = CharFnProfile {
        alpha: Vec::with_capacity(grid.samples),
        phi: Vec::with_capacity(grid.samples),
        tail_bound: Vec::with_capacity(grid.samples),
        exceeds_one: Vec::with_capacity(grid.samples),
        n_trunc: ladder.max_order(),
        tail_params: (
            ladder.max_order(),
            coeffs.xi(),
            *ladder.i_moments.last().expect("nonempty ladder"),
        ),
        precision_bits: Precision::F64.bits(),
        escalated_at: None,
    };
    for k in 0..grid.samples {
        let a = alpha_max * k as f64 / (grid.samples - 1) as f64;
        let fast = phi_series(ladder, coeffs, a, Precision::F64);
        let v = match fast {
            Ok(v) if v.max_term_ratio < ESCALATION_RATIO => v,
            _ => {
                let wide = match grid.precision {
                    Precision::F64 => Precision::Big(256),
                    b => b,
                };
                if out.escalated_at.is_none() {
                    out.escalated_at = Some(k);
                }
                out.precision_bits = out.precision_bits.max(wide.bits());
                phi_series(ladder, coeffs, a, wide)?
            }
        };
        let slack = 1e-12 * v.value.abs().max(1.0);
        out.alpha.push(a);
        out.phi.push(v.value);
        out.tail_bound.push(v.tail_bound);
        out.exceeds_one.push(v.value.abs() > 1.0 + v.tail_bound + slack);
    }
    Ok(out)
}

/// Verdict of the |Φ| > 1 test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiVerdict {
    /// Some(α) at the first sample exceeding 1 beyond its uncertainty.
    pub witnessed_at: Option<f64>,
    /// ξ > 0 guarantees the envelope exp((3/2)(|α|²ξ)^{1/3}) eventually beats
    /// any polynomial, so the state is nonclassical regardless of the
    /// sampled range; inapplicable only for the vacuum (ξ = 0).
    pub asymptotically_nonclassical: Option<bool>,
}

pub fn nonclassicality_by_phi(profile: &CharFnProfile) -> PhiVerdict {
    let witnessed_at = profile
        .exceeds_one
        .iter()
        .position(|&b| b)
        .map(|k| profile.alpha[k]);
    let xi = profile.tail_params.1;
    PhiVerdict {
        witnessed_at,
        asymptotically_nonclassical: if xi > 0.0 { Some(true) } else { None },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::recurrence::{coeffs, estimate_i1, solve_ladder, SolveOptions};
    use approx::assert_relative_eq;

    fn ladder_bits(params: SystemParams, n: usize, bits: u32) -> (RecurrenceCoeffs, MomentLadder) {
        let c = coeffs(&params).unwrap();
        let est = estimate_i1(&c, &SolveOptions::default().with_precision(Precision::Big(bits)))
            .unwrap();
        let lad = solve_ladder(&c, &est, n);
        (c, lad)
    }

    fn ladder_for(params: SystemParams, n: usize) -> (RecurrenceCoeffs, MomentLadder) {
        ladder_bits(params, n, 256)
    }

    #[test]
    fn phi_at_zero_is_one() {
        let (c, lad) = ladder_for(SystemParams::set_a(1e11), 20);
        let v = phi_series(&lad, &c, 0.0, Precision::F64).unwrap();
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn vacuum_phi_identically_one() {
        let (c, lad) = ladder_for(SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap(), 10);
        for a in [0.0, 0.7, 2.0, 5.0] {
            let v = phi_series(&lad, &c, a, Precision::F64).unwrap();
            assert_eq!(v.value, 1.0);
            assert_eq!(v.tail_bound, 0.0);
        }
    }

    // unit-scale parameters keep the cutoff low enough that a fully positive
    // ladder past it is achievable at moderate widths (the deep ladder tail
    // sits ~40 decades below I_0 and the forward march amplifies ~70)
    fn unit_params() -> SystemParams {
        SystemParams::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn series_and_split_agree_where_both_converge() {
        let (c, lad) = ladder_bits(unit_params(), 40, 512);
        assert_eq!(lad.first_negative, None, "need the full ladder here");
        let cutoff = select_cutoff(&c, 0.1).unwrap();
        assert!(cutoff.n <= 36, "cutoff {} too large for this test", cutoff.n);
        for a in [0.4, 1.0, 1.8] {
            let s = phi_series(&lad, &c, a, Precision::Big(256)).unwrap();
            let sp = phi_split(&lad, &c, a, cutoff.n, Precision::Big(256)).unwrap();
            assert_relative_eq!(s.value, sp.value, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn split_agreement_improves_with_n() {
        let (c, lad) = ladder_bits(unit_params(), 40, 512);
        let cutoff = select_cutoff(&c, 0.1).unwrap().n;
        let a = 1.5;
        let s = phi_series(&lad, &c, a, Precision::Big(256)).unwrap().value;
        let lo = phi_split(&lad, &c, a, cutoff, Precision::Big(256)).unwrap().value;
        let hi = phi_split(&lad, &c, a, (cutoff + 14).min(40), Precision::Big(256)).unwrap().value;
        assert!((hi - s).abs() <= (lo - s).abs() + 1e-12);
    }

    #[test]
    fn split_below_cutoff_rejected() {
        let (c, lad) = ladder_bits(unit_params(), 40, 512);
        let cutoff = select_cutoff(&c, 0.1).unwrap().n;
        assert!(matches!(
            phi_split(&lad, &c, 1.0, cutoff - 1, Precision::F64),
            Err(Error::SplitBelowCutoff { .. })
        ));
    }

    #[test]
    fn alpha_beyond_ladder_errors_with_max_safe() {
        let (c, lad) = ladder_for(SystemParams::set_b(1e11), 30);
        match phi_series(&lad, &c, 50.0, Precision::F64) {
            Err(Error::AlphaOutOfRange { max_safe, .. }) => {
                assert!(max_safe > 0.0 && max_safe < 50.0);
            }
            other => panic!("expected AlphaOutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn three_exp_identity_at_moderate_argument() {
        for xt in [1.0, 3.5, 10.0] {
            let s = three_exp_series(xt, 320);
            let cf = three_exp_closed(xt, 320);
            let diff = s.sub(&cf).abs().to_f64();
            let scale = cf.abs().to_f64().max(1e-300);
            assert!(diff / scale < 1e-40, "xt={xt}: rel diff {}", diff / scale);
        }
    }

    #[test]
    fn envelope_matches_reduced_series_in_regime() {
        // away from cosine zeros, Σ n(−x)ⁿ/(n!)³ ≈ (√3/2π)·closed form and
        // the final envelope within Stirling error
        let xt: f64 = 7.0;
        let x = xt.powi(3);
        let series = reduced_series(x, 512).to_f64();
        let env = phi_asymp_envelope(x).unwrap();
        assert!(env.valid);
        let cosarg = (1.5 * 3f64.sqrt() * xt).cos().abs();
        assert!(cosarg > 0.3, "test point sits too close to a cosine zero");
        assert_relative_eq!(series, env.value, max_relative = 0.05);
    }

    #[test]
    fn envelope_zeros_at_cosine_zeros() {
        // (3√3/2) x̃ = π/2 + kπ ⇒ envelope vanishes
        for k in 0..4 {
            let xt = (std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI)
                / (1.5 * 3f64.sqrt());
            let x = xt.powi(3);
            let env = phi_asymp_envelope(x).unwrap();
            assert!(env.value.abs() < 1e-12 * (1.5 * xt).exp());
        }
        assert!(phi_asymp_envelope(0.0).is_err());
        assert!(phi_asymp_envelope(-1.0).is_err());
    }

    #[test]
    fn profile_escalates_and_flags() {
        let (c, lad) = ladder_for(SystemParams::set_a(1e11), 60);
        let prof = profile(&lad, &c, &AlphaGrid { max: Some(4.0), samples: 96, ..Default::default() })
            .unwrap();
        assert_eq!(prof.alpha.len(), 96);
        assert_eq!(prof.phi[0], 1.0);
        let verdict = nonclassicality_by_phi(&prof);
        assert_eq!(verdict.asymptotically_nonclassical, Some(true));
    }

    #[test]
    fn moment_recovery_from_small_alpha_samples() {
        // Φ(α) = 1 − α²I₁ + α⁴I₂/4 + O(α⁶): two small samples recover I₁, I₂
        let (c, lad) = ladder_for(SystemParams::set_b(1e11), 30);
        let h = 0.02; // α² step
        let f1 = phi_series(&lad, &c, h.sqrt(), Precision::Big(256)).unwrap().value;
        let f2 = phi_series(&lad, &c, (2.0 * h).sqrt(), Precision::Big(256)).unwrap().value;
        // [1 - f(h)]/h = I1 - h·I2/4 + O(h²); eliminate the linear term
        let d1 = (1.0 - f1) / h;
        let d2 = (1.0 - f2) / (2.0 * h);
        let i1 = 2.0 * d1 - d2;
        let i2_est = (d1 - i1) * -4.0 / h;
        assert_relative_eq!(i1, lad.i_moments[1], max_relative = 1e-4);
        assert_relative_eq!(i2_est, lad.i_moments[2], max_relative = 1e-2);
    }
}
