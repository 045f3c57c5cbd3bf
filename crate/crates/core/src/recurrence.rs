//! Three-term recurrence for the intracavity photon moments.
//!
//! The steady state of the coupled moment equations reduces to
//! `I_{n+2} = α_{n+1} I_{n+1} + β_n I_n`. Two boundary conditions close the
//! problem: `I_0 = 1` and `I_n → 0`. Running the auxiliary sequences C and D
//! forward (`C_0 = 0, C_1 = 1, D_0 = 1, D_1 = 0`) gives
//! `I_1 = lim −D_n/C_n`, with a rigorous two-sided error bracket obtained
//! from the ratio bounds `β_n/(ε−α_{n+1}) ≤ I_{n+1}/I_n ≤ β_n/(−α_{n+1})`
//! valid once `n ≥ ξ/ε`, where `ξ = 2g²p/κ³`.
//!
//! The minimal solution is ill-conditioned under forward iteration, so the
//! kernels are generic over [`Real`]: plain f64 for speed, or a wide
//! software float when high orders are needed.

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::scalar::{Mp, Precision, Real};

/// Closed-form recurrence coefficients for one parameter set.
///
/// All methods are exact evaluations (up to rounding); no asymptotics.
#[derive(Clone, Copy, Debug)]
pub struct RecurrenceCoeffs {
    params: SystemParams,
}

/// Build the coefficient evaluator for a validated parameter set.
pub fn coeffs(params: &SystemParams) -> Result<RecurrenceCoeffs> {
    params.validate()?;
    Ok(RecurrenceCoeffs { params: *params })
}

impl RecurrenceCoeffs {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// σ_n = Γ + p + nκ
    pub fn sigma(&self, n: f64) -> f64 {
        self.params.gamma + self.params.p + n * self.params.kappa
    }

    /// γ̃_n = (Γ + p + κ(2n+1))/2 + Γ_D/2
    ///
    /// Dephasing enters the problem only through this shift.
    pub fn gamma_n(&self, n: f64) -> f64 {
        (self.params.gamma + self.params.p + self.params.kappa * (2.0 * n + 1.0)) / 2.0
            + self.params.gamma_d / 2.0
    }

    /// Λ_n = 2g²γ̃_n / [κ(δ² + γ̃_n²)]
    pub fn lambda(&self, n: f64) -> f64 {
        let gn = self.gamma_n(n);
        2.0 * self.params.g * self.params.g * gn
            / (self.params.kappa * (self.params.delta * self.params.delta + gn * gn))
    }

    /// α_n = (σ_n/2κ)(2p/σ_n − nκ/σ_{n−1} − (1+Λ_{n−1})/Λ_{n−1})
    pub fn alpha(&self, n: f64) -> f64 {
        let s = self.sigma(n);
        let lm = self.lambda(n - 1.0);
        s / (2.0 * self.params.kappa)
            * (2.0 * self.params.p / s
                - n * self.params.kappa / self.sigma(n - 1.0)
                - (1.0 + lm) / lm)
    }

    /// β_n = ((n+1)p/2κ)(σ_{n+1}/σ_n), strictly positive for p > 0.
    pub fn beta(&self, n: f64) -> f64 {
        (n + 1.0) * self.params.p / (2.0 * self.params.kappa) * self.sigma(n + 1.0)
            / self.sigma(n)
    }

    /// ξ = 2g²p/κ³, the constant governing the asymptotic ratio I_{n+1}/I_n ≤ ξ/n.
    pub fn xi(&self) -> f64 {
        2.0 * self.params.g * self.params.g * self.params.p / self.params.kappa.powi(3)
    }

    /// Next-to-leading-order expansions of the coefficients at large n:
    /// `α_{n+1} ≈ −(κ²/4g²)n² − [1 + (κ²/4g²)(5/2 + (3/2)(Γ+p)/κ)]n` and
    /// `β_n ≈ (p/2κ)(n+2)`.
    pub fn asymptotic_coeff_series(&self, n: f64) -> (f64, f64) {
        let k2_4g2 =
            self.params.kappa * self.params.kappa / (4.0 * self.params.g * self.params.g);
        let alpha_nlo = -k2_4g2 * n * n
            - (1.0 + k2_4g2 * (2.5 + 1.5 * (self.params.gamma + self.params.p) / self.params.kappa))
                * n;
        let beta_nlo = self.params.p / (2.0 * self.params.kappa) * (n + 2.0);
        (alpha_nlo, beta_nlo)
    }
}

/// Generic-precision coefficient evaluator. Parameters are lifted from their
/// exact f64 values, so at wide significands the coefficients are accurate to
/// the working precision.
struct GenCoeffs<S: Real> {
    g2x2: S, // 2g²
    kappa: S,
    gp: S, // Γ + p
    p: S,
    delta2: S,
    gamma_d_half: S,
    half: S,
    one: S,
    two: S,
    bits: u32,
}

impl<S: Real> GenCoeffs<S> {
    fn new(params: &SystemParams, bits: u32) -> Self {
        let g = S::of(params.g, bits);
        Self {
            g2x2: S::of(2.0, bits).mul(&g).mul(&g),
            kappa: S::of(params.kappa, bits),
            gp: S::of(params.gamma, bits).add(&S::of(params.p, bits)),
            p: S::of(params.p, bits),
            delta2: S::of(params.delta, bits).mul(&S::of(params.delta, bits)),
            gamma_d_half: S::of(params.gamma_d / 2.0, bits),
            half: S::of(0.5, bits),
            one: S::of(1.0, bits),
            two: S::of(2.0, bits),
            bits,
        }
    }

    fn int(&self, n: usize) -> S {
        S::of(n as f64, self.bits)
    }

    fn sigma(&self, n: usize) -> S {
        self.gp.add(&self.int(n).mul(&self.kappa))
    }

    fn gamma_n(&self, n: usize) -> S {
        self.gp
            .add(&self.kappa.mul(&self.int(2 * n + 1)))
            .mul(&self.half)
            .add(&self.gamma_d_half)
    }

    fn lambda(&self, n: usize) -> S {
        let gn = self.gamma_n(n);
        self.g2x2.mul(&gn).div(&self.kappa.mul(&self.delta2.add(&gn.mul(&gn))))
    }

    /// α_{n+1}
    fn alpha_np1(&self, n: usize) -> S {
        let s = self.sigma(n + 1);
        let lm = self.lambda(n);
        let t1 = self.two.mul(&self.p).div(&s);
        let t2 = self.int(n + 1).mul(&self.kappa).div(&self.sigma(n));
        let t3 = self.one.add(&lm).div(&lm);
        s.div(&self.two.mul(&self.kappa)).mul(&t1.sub(&t2).sub(&t3))
    }

    /// β_n
    fn beta_n(&self, n: usize) -> S {
        self.int(n + 1)
            .mul(&self.p)
            .div(&self.two.mul(&self.kappa))
            .mul(&self.sigma(n + 1))
            .div(&self.sigma(n))
    }
}

/// Two-sided bound for I₁ from the ratio inequalities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct I1Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl I1Bracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Containment up to a relative slack (rounding at the march endpoint).
    pub fn contains(&self, x: f64, rel_slack: f64) -> bool {
        let pad = rel_slack * self.upper.abs().max(self.lower.abs()).max(f64::MIN_POSITIVE);
        x >= self.lower - pad && x <= self.upper + pad
    }
}

/// Outcome of the forward C/D march.
#[derive(Clone, Debug)]
pub struct I1Estimate {
    /// Point estimate −D_{n+1}/C_{n+1} at the final order.
    pub value: f64,
    pub bracket: I1Bracket,
    /// Final march order n (the bracket uses C_n..C_{n+1}).
    pub n_used: usize,
    pub epsilon: f64,
    pub precision: Precision,
    raw: RawI1,
}

#[derive(Clone, Debug)]
enum RawI1 {
    F64(f64),
    Big(Mp),
}

impl I1Estimate {
    fn vacuum(prec: Precision) -> Self {
        I1Estimate {
            value: 0.0,
            bracket: I1Bracket { lower: 0.0, upper: 0.0 },
            n_used: 0,
            epsilon: 0.0,
            precision: prec,
            raw: RawI1::F64(0.0),
        }
    }
}

/// Options for [`estimate_i1`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Bracket validity parameter ε (ratio lower bound uses β/(ε−α)).
    pub epsilon: f64,
    /// Relative bracket width demanded of I₁.
    pub tol: f64,
    /// Hard cap on the march order.
    pub max_order: usize,
    pub precision: Precision,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { epsilon: 0.1, tol: 1e-10, max_order: 5_000_000, precision: Precision::F64 }
    }
}

impl SolveOptions {
    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    /// Significand bits the bracket is tightened to at wide precisions,
    /// with a guard margin for accumulated rounding. High-order ladders need
    /// I₁ resolved essentially to the working width, not to the f64-era
    /// default tolerance.
    fn tol_bits(&self) -> Option<u32> {
        match self.precision {
            Precision::F64 => None,
            Precision::Big(bits) => Some(((bits as f64 * 0.97 - 53.0).max(53.0)) as u32),
        }
    }
}

/// First two terms of both auxiliary sequences, per their initial conditions.
pub const CD_INIT: (f64, f64, f64, f64) = (0.0, 1.0, 1.0, 0.0);

/// The C/D sequences up to order `n_max`, with a joint rescaling log.
///
/// Only ratios of same-order entries are meaningful once any rescaling
/// occurred; `rescales` records (order, factor) pairs.
#[derive(Clone, Debug)]
pub struct CdSequences {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub rescales: Vec<(usize, f64)>,
}

/// Forward-iterate C and D to order `n_max` (≥ 2) in f64, jointly rescaling
/// to prevent overflow.
pub fn cd_sequences(coeffs: &RecurrenceCoeffs, n_max: usize) -> Result<CdSequences> {
    if n_max < 2 {
        return Err(Error::Domain("cd_sequences requires n_max >= 2"));
    }
    let mut c = Vec::with_capacity(n_max + 1);
    let mut d = Vec::with_capacity(n_max + 1);
    let (c0, c1, d0, d1) = CD_INIT;
    c.extend_from_slice(&[c0, c1]);
    d.extend_from_slice(&[d0, d1]);
    let mut rescales = Vec::new();
    for n in 0..(n_max - 1) {
        let a = coeffs.alpha(n as f64 + 1.0);
        let b = coeffs.beta(n as f64);
        let c2 = a * c[n + 1] + b * c[n];
        let d2 = a * d[n + 1] + b * d[n];
        if !c2.is_finite() || !d2.is_finite() {
            return Err(Error::CdOverflow { order: n + 2 });
        }
        let m = c2.abs().max(d2.abs());
        if m > RESCALE_THRESHOLD {
            // rescale the trailing pair; older stored entries keep their
            // scale, the log records where the cuts are
            let f = 1.0 / m;
            c.push(c2 * f);
            d.push(d2 * f);
            let k = c.len() - 2;
            c[k] *= f;
            d[k] *= f;
            rescales.push((n + 2, f));
        } else {
            c.push(c2);
            d.push(d2);
        }
    }
    Ok(CdSequences { c, d, rescales })
}

const RESCALE_THRESHOLD: f64 = 1e250;
const RESCALE_PERIOD: usize = 16;

/// Estimate I₁ by the forward C/D march with the two-sided error bracket.
///
/// Stops once (a) the order has passed the validity threshold ξ/ε, and
/// (b) the bracket width is below `tol` relative to I₁. `p = 0`
/// short-circuits to the vacuum result.
pub fn estimate_i1(coeffs: &RecurrenceCoeffs, opts: &SolveOptions) -> Result<I1Estimate> {
    if opts.tol <= 0.0 {
        return Err(Error::Domain("tol must be positive"));
    }
    if opts.epsilon <= 0.0 {
        return Err(Error::Domain("epsilon must be positive"));
    }
    if coeffs.params().p == 0.0 {
        return Ok(I1Estimate::vacuum(opts.precision));
    }
    match opts.precision {
        Precision::F64 => {
            let (point, lo, hi, n) = march::<f64>(coeffs, opts, 53)?;
            Ok(I1Estimate {
                value: point,
                bracket: I1Bracket { lower: lo, upper: hi },
                n_used: n,
                epsilon: opts.epsilon,
                precision: opts.precision,
                raw: RawI1::F64(point),
            })
        }
        Precision::Big(bits) => {
            let (point, lo, hi, n) = march::<Mp>(coeffs, opts, bits)?;
            Ok(I1Estimate {
                value: point.to_f64(),
                bracket: I1Bracket { lower: lo.to_f64(), upper: hi.to_f64() },
                n_used: n,
                epsilon: opts.epsilon,
                precision: opts.precision,
                raw: RawI1::Big(point),
            })
        }
    }
}

/// 2^−k constructed multiplicatively so it stays exact beyond the f64
/// exponent range.
fn exp2_neg<S: Real>(k: u32, bits: u32) -> S {
    let chunk = S::of(2f64.powi(-900), bits);
    let mut out = S::of(2f64.powi(-((k % 900) as i32)), bits);
    for _ in 0..k / 900 {
        out = out.mul(&chunk);
    }
    out
}

fn march<S: Real>(
    coeffs: &RecurrenceCoeffs,
    opts: &SolveOptions,
    bits: u32,
) -> Result<(S, S, S, usize)> {
    let gc = GenCoeffs::<S>::new(coeffs.params(), bits);
    let tol = match opts.tol_bits() {
        // f64 tolerances underflow beyond ~1020 bits, so the wide-precision
        // demand is built in S directly
        Some(tb) => {
            let wide = exp2_neg::<S>(tb, bits);
            let user = S::of(opts.tol, bits);
            if user.lt(&wide) {
                user
            } else {
                wide
            }
        }
        None => S::of(opts.tol, bits),
    };
    let eps = S::of(opts.epsilon, bits);
    let n_min = ((coeffs.xi() / opts.epsilon).ceil() as usize).max(2);

    let (mut c0, mut c1) = (S::of(0.0, bits), S::of(1.0, bits));
    let (mut d0, mut d1) = (S::of(1.0, bits), S::of(0.0, bits));
    let mut n = 0usize;
    let mut last_bracket: Option<(S, S, S)> = None; // lower, upper, point
    loop {
        let a = gc.alpha_np1(n);
        let b = gc.beta_n(n);
        let c2 = a.mul(&c1).add(&b.mul(&c0));
        let d2 = a.mul(&d1).add(&b.mul(&d0));
        c0 = c1;
        c1 = c2;
        d0 = d1;
        d1 = d2;
        n += 1;
        if !c1.is_finite_val() || !d1.is_finite_val() {
            return Err(Error::CdOverflow { order: n + 1 });
        }
        if n % RESCALE_PERIOD == 0 {
            let m = c1.abs();
            let m = if d1.abs().gt(&m) { d1.abs() } else { m };
            if !m.is_zero_val() {
                c0 = c0.div(&m);
                c1 = c1.div(&m);
                d0 = d0.div(&m);
                d1 = d1.div(&m);
            }
        }
        // bracket at this order: ratio bounds apply to I_{n+1}/I_n
        let a_next = gc.alpha_np1(n);
        if n >= n_min && a_next.is_negative_val() {
            let b_n = gc.beta_n(n);
            let r_lo = b_n.div(&eps.sub(&a_next));
            let r_hi = b_n.div(&a_next.neg());
            let den_lo = c1.sub(&r_lo.mul(&c0));
            let den_hi = c1.sub(&r_hi.mul(&c0));
            if !den_lo.is_zero_val() && !den_hi.is_zero_val() {
                let v1 = d1.sub(&r_lo.mul(&d0)).neg().div(&den_lo);
                let v2 = d1.sub(&r_hi.mul(&d0)).neg().div(&den_hi);
                let (lo, hi) = if v1.le(&v2) { (v1.clone(), v2.clone()) } else { (v2, v1) };
                let point = d1.neg().div(&c1);
                let width = hi.sub(&lo);
                let scale = lo.abs().add(&hi.abs()).mul(&S::of(0.5, bits));
                // stop only when the point estimate has joined the bracket:
                // −D/C implicitly sets I_{n+1} = 0 and trails the bracket by
                // an O(n⁻³)-type correction for a few orders
                let pad = tol.mul(&scale);
                let done = !scale.is_zero_val()
                    && width.le(&pad)
                    && point.ge(&lo.sub(&pad))
                    && point.le(&hi.add(&pad));
                last_bracket = Some((lo, hi, point));
                if done {
                    break;
                }
            }
        }
        if n >= opts.max_order {
            let (lo, hi) = match &last_bracket {
                Some((lo, hi, _)) => (lo.to_f64(), hi.to_f64()),
                None => (f64::NEG_INFINITY, f64::INFINITY),
            };
            return Err(Error::I1NotConverged { max_order: opts.max_order, lower: lo, upper: hi });
        }
    }
    let (lo, hi, point) = last_bracket.expect("loop exits with a bracket");
    Ok((point, lo, hi, n))
}

/// Moment ladder with truncation metadata.
#[derive(Clone, Debug)]
pub struct MomentLadder {
    /// I_0..I_N, truncated at the last strictly nonnegative entry.
    pub i_moments: Vec<f64>,
    pub i1_bracket: I1Bracket,
    /// Requested order N.
    pub cutoff_n: usize,
    pub epsilon: f64,
    /// First order at which forward positivity failed, if any.
    pub first_negative: Option<usize>,
    pub precision: Precision,
}

impl MomentLadder {
    /// Largest stored order.
    pub fn max_order(&self) -> usize {
        self.i_moments.len() - 1
    }

    pub fn i(&self, n: usize) -> Option<f64> {
        self.i_moments.get(n).copied()
    }
}

/// Forward-iterate the moment recurrence from (I₀ = 1, I₁) up to order `n`.
///
/// Positivity is monitored at every step; on a negative entry the ladder is
/// truncated there and the order recorded (forward instability of the
/// minimal solution).
pub fn solve_ladder(coeffs: &RecurrenceCoeffs, i1: &I1Estimate, n: usize) -> MomentLadder {
    let i_moments = match (&i1.raw, i1.precision) {
        (RawI1::Big(v), Precision::Big(bits)) => ladder_values::<Mp>(coeffs, v.clone(), n, bits),
        (RawI1::F64(v), _) => ladder_values::<f64>(coeffs, *v, n, 53),
        (RawI1::Big(v), Precision::F64) => ladder_values::<f64>(coeffs, v.to_f64(), n, 53),
    };
    finish_ladder(i_moments, coeffs, i1, n)
}

fn ladder_values<S: Real>(coeffs: &RecurrenceCoeffs, i1: S, n: usize, bits: u32) -> Vec<f64> {
    let gc = GenCoeffs::<S>::new(coeffs.params(), bits);
    let mut v: Vec<S> = Vec::with_capacity(n + 1);
    v.push(S::of(1.0, bits));
    if n >= 1 {
        v.push(i1);
    }
    for k in 0..n.saturating_sub(1) {
        let next = gc.alpha_np1(k).mul(&v[k + 1]).add(&gc.beta_n(k).mul(&v[k]));
        v.push(next);
    }
    v.iter().map(|x| x.to_f64()).collect()
}

fn finish_ladder(
    values: Vec<f64>,
    _coeffs: &RecurrenceCoeffs,
    i1: &I1Estimate,
    n: usize,
) -> MomentLadder {
    let mut first_negative = None;
    let mut keep = values.len();
    for (k, &x) in values.iter().enumerate() {
        if x < 0.0 || !x.is_finite() {
            first_negative = Some(k);
            keep = k;
            break;
        }
    }
    MomentLadder {
        i_moments: values[..keep].to_vec(),
        i1_bracket: i1.bracket,
        cutoff_n: n,
        epsilon: i1.epsilon,
        first_negative,
        precision: i1.precision,
    }
}

/// Ratio bounds for I_{n+1}/I_n.
#[derive(Clone, Copy, Debug)]
pub struct RatioBounds {
    /// β_n/(ε−α_{n+1}); only rigorous once `lower_valid`.
    pub lower: f64,
    /// Valid from n ≥ ξ/ε on.
    pub lower_valid: bool,
    /// β_n/(−α_{n+1}); `None` when α_{n+1} ≥ 0 (the inequality is trivial).
    pub upper: Option<f64>,
}

/// Evaluate the two-sided ratio bound at order `n`.
pub fn ratio_bounds(coeffs: &RecurrenceCoeffs, n: usize, epsilon: f64) -> RatioBounds {
    let a = coeffs.alpha(n as f64 + 1.0);
    let b = coeffs.beta(n as f64);
    let lower = b / (epsilon - a);
    let lower_valid = (n as f64) >= coeffs.xi() / epsilon;
    let upper = if a < 0.0 { Some(b / (-a)) } else { None };
    RatioBounds { lower, lower_valid, upper }
}

/// Cutoff order selection.
#[derive(Clone, Copy, Debug)]
pub struct Cutoff {
    pub n: usize,
    /// For ε < 1 the moments decrease strictly monotonically beyond `n`.
    pub monotone_tail: bool,
}

/// Smallest order N with N ≥ ξ/ε and next-to-leading-order coefficient
/// mismatch below ε for both α and β.
pub fn select_cutoff(coeffs: &RecurrenceCoeffs, epsilon: f64) -> Result<Cutoff> {
    if epsilon <= 0.0 {
        return Err(Error::Domain("epsilon must be positive"));
    }
    let mut n = ((coeffs.xi() / epsilon).ceil() as usize).max(2);
    loop {
        let (a_nlo, b_nlo) = coeffs.asymptotic_coeff_series(n as f64);
        let a = coeffs.alpha(n as f64 + 1.0);
        let b = coeffs.beta(n as f64);
        let a_mis = if a == 0.0 { 0.0 } else { (a_nlo - a).abs() / a.abs() };
        let b_mis = if b == 0.0 { 0.0 } else { (b_nlo - b).abs() / b.abs() };
        if a_mis < epsilon && b_mis < epsilon {
            return Ok(Cutoff { n, monotone_tail: epsilon < 1.0 });
        }
        n = (n + 1).max(n + n / 8);
        if n > 1_000_000_000 {
            return Err(Error::Domain("cutoff selection did not settle"));
        }
    }
}

/// Thermal-limit reference moment for strong pumping.
#[derive(Clone, Copy, Debug)]
pub struct LargePReference {
    /// n! (2g²/κp)ⁿ; 0 for n ≥ 1 in the strict p → ∞ limit (vacuum).
    pub value: f64,
    /// Whether p clears the regime threshold p ≥ ratio·max(Γ, κ, g, |δ|).
    pub in_regime: bool,
}

/// Large-pumping reference `I_n ≈ n!(2g²/κp)ⁿ` with a configurable regime
/// threshold (`ratio` defaults to 100 in callers).
pub fn large_p_reference(params: &SystemParams, n: usize, ratio: f64) -> Result<LargePReference> {
    params.validate()?;
    if params.p == 0.0 {
        return Err(Error::Domain("large-p regime undefined at p = 0"));
    }
    let in_regime = params.p >= ratio * params.max_rate();
    let base = 2.0 * params.g * params.g / (params.kappa * params.p);
    let mut value = 1.0;
    for k in 1..=n {
        value *= k as f64 * base;
    }
    Ok(LargePReference { value, in_regime })
}

/// Benchmark kernel: run the C/D march for exactly `steps` orders and return
/// the current point estimate. Same per-step arithmetic as [`estimate_i1`],
/// without the convergence exit.
pub fn cd_scan(coeffs: &RecurrenceCoeffs, steps: usize) -> f64 {
    let gc = GenCoeffs::<f64>::new(coeffs.params(), 53);
    let (mut c0, mut c1, mut d0, mut d1) = CD_INIT;
    for n in 0..steps {
        let a = gc.alpha_np1(n);
        let b = gc.beta_n(n);
        let c2 = a * c1 + b * c0;
        let d2 = a * d1 + b * d0;
        c0 = c1;
        c1 = c2;
        d0 = d1;
        d1 = d2;
        if n % RESCALE_PERIOD == 0 {
            let m = c1.abs().max(d1.abs());
            if m > 0.0 {
                c0 /= m;
                c1 /= m;
                d0 /= m;
                d1 /= m;
            }
        }
    }
    -d1 / c1
}

/// Benchmark kernel: `steps` forward ladder iterations with periodic
/// renormalization so magnitudes stay representable at any length.
pub fn ladder_scan(coeffs: &RecurrenceCoeffs, i1: f64, steps: usize) -> f64 {
    let gc = GenCoeffs::<f64>::new(coeffs.params(), 53);
    let (mut x0, mut x1) = (1.0f64, i1);
    for n in 0..steps {
        let next = gc.alpha_np1(n) * x1 + gc.beta_n(n) * x0;
        x0 = x1;
        x1 = next;
        if n % RESCALE_PERIOD == 0 {
            let m = x0.abs().max(x1.abs());
            if m > 0.0 {
                x0 /= m;
                x1 /= m;
            }
        }
    }
    x1
}
