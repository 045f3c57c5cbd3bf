//! Floating-point abstraction: plain f64 or an arbitrary-precision float.
//!
//! Forward iteration of the minimal recurrence solution and the alternating
//! characteristic-function series both lose digits fast, so the numerical
//! kernels are generic over [`Real`] and can run at any mantissa width.

use std::cell::RefCell;
use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Requested arithmetic width for a solver run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    /// Hardware double precision.
    F64,
    /// Software float with the given significand width in bits (>= 64).
    Big(u32),
}

impl Precision {
    /// Significand bits actually carried.
    pub fn bits(self) -> u32 {
        match self {
            Precision::F64 => 53,
            Precision::Big(b) => b,
        }
    }

    /// Decimal digits the significand resolves.
    pub fn decimal_digits(self) -> f64 {
        self.bits() as f64 * std::f64::consts::LOG10_2
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::F64
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precision::F64 => write!(f, "f64"),
            Precision::Big(b) => write!(f, "big{b}"),
        }
    }
}

/// Real scalar with explicit construction width.
pub trait Real: Clone + std::fmt::Debug + 'static {
    fn of(v: f64, bits: u32) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn cmp_val(&self, o: &Self) -> Option<Ordering>;
    fn is_finite_val(&self) -> bool;
    fn is_zero_val(&self) -> bool;

    fn lt(&self, o: &Self) -> bool {
        self.cmp_val(o) == Some(Ordering::Less)
    }
    fn gt(&self, o: &Self) -> bool {
        self.cmp_val(o) == Some(Ordering::Greater)
    }
    fn le(&self, o: &Self) -> bool {
        matches!(self.cmp_val(o), Some(Ordering::Less | Ordering::Equal))
    }
    fn ge(&self, o: &Self) -> bool {
        matches!(self.cmp_val(o), Some(Ordering::Greater | Ordering::Equal))
    }
    fn is_negative_val(&self) -> bool {
        self.lt(&Self::of(0.0, 64))
    }
}

impl Real for f64 {
    fn of(v: f64, _bits: u32) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn cmp_val(&self, o: &Self) -> Option<Ordering> {
        self.partial_cmp(o)
    }
    fn is_finite_val(&self) -> bool {
        self.is_finite()
    }
    fn is_zero_val(&self) -> bool {
        *self == 0.0
    }
}

/// Arbitrary-precision real. The significand width travels with the value so
/// that intermediate results never silently degrade.
#[derive(Clone, Debug)]
pub struct Mp {
    v: BigFloat,
    bits: u32,
}

impl Mp {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn exp(&self) -> Self {
        let v = CONSTS.with(|cc| self.v.exp(self.bits as usize, RM, &mut cc.borrow_mut()));
        Self { v, bits: self.bits }
    }

    pub fn cos(&self) -> Self {
        let v = CONSTS.with(|cc| self.v.cos(self.bits as usize, RM, &mut cc.borrow_mut()));
        Self { v, bits: self.bits }
    }

    pub fn pi(bits: u32) -> Self {
        let v = CONSTS.with(|cc| cc.borrow_mut().pi(bits as usize, RM));
        Self { v, bits }
    }

    /// Raise to a small nonnegative integer power.
    pub fn powi(&self, n: usize) -> Self {
        Self { v: self.v.powi(n, self.bits as usize, RM), bits: self.bits }
    }
}

impl Real for Mp {
    fn of(v: f64, bits: u32) -> Self {
        Self { v: BigFloat::from_f64(v, bits as usize), bits }
    }

    /// Round to the nearest f64 through the top two mantissa words.
    fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        if self.v.is_zero() {
            return 0.0;
        }
        let (words, _n, sign, e, _inexact) = self.v.as_raw_parts().expect("finite raw parts");
        // Mantissa words are little-endian; the value is 0.m·2^e with the
        // leading 1 in the top bit of the last word. The top 128 bits carry
        // more than enough for one correct f64 rounding.
        let hi = words.last().copied().unwrap_or(0) as u128;
        let lo = if words.len() >= 2 { words[words.len() - 2] as u128 } else { 0 };
        let m = (hi << 64) | lo;
        let acc = m as f64; // one rounding to 53 bits
        // scale by 2^(e−128) in two in-range steps so intermediates stay
        // normal until the final (possibly subnormal) rounding
        let k = e as i64 - 128;
        let k1 = k.clamp(-900, 900);
        let k2 = k - k1;
        let acc = (acc * pow2(k1)) * pow2(k2);
        if sign == astro_float::Sign::Neg {
            -acc
        } else {
            acc
        }
    }

    fn add(&self, o: &Self) -> Self {
        Self { v: self.v.add(&o.v, self.bits as usize, RM), bits: self.bits }
    }
    fn sub(&self, o: &Self) -> Self {
        Self { v: self.v.sub(&o.v, self.bits as usize, RM), bits: self.bits }
    }
    fn mul(&self, o: &Self) -> Self {
        Self { v: self.v.mul(&o.v, self.bits as usize, RM), bits: self.bits }
    }
    fn div(&self, o: &Self) -> Self {
        Self { v: self.v.div(&o.v, self.bits as usize, RM), bits: self.bits }
    }
    fn neg(&self) -> Self {
        Self { v: self.v.neg(), bits: self.bits }
    }
    fn abs(&self) -> Self {
        Self { v: self.v.abs(), bits: self.bits }
    }
    fn sqrt(&self) -> Self {
        Self { v: self.v.sqrt(self.bits as usize, RM), bits: self.bits }
    }
    fn cmp_val(&self, o: &Self) -> Option<Ordering> {
        self.v.cmp(&o.v).map(|s| s.cmp(&0))
    }
    fn is_finite_val(&self) -> bool {
        !(self.v.is_nan() || self.v.is_inf())
    }
    fn is_zero_val(&self) -> bool {
        self.v.is_zero()
    }
}

/// Exact 2^k for |k| within the f64 exponent range.
fn pow2(k: i64) -> f64 {
    if k >= -1022 && k <= 1023 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else if k < -1022 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Neumaier-compensated accumulator for alternating f64 sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    s: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}
