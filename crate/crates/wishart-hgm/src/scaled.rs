//! Extended-range and extended-precision arithmetic.
//!
//! [`ScaledReal`] carries a number as sign plus natural-log magnitude, so
//! quantities like 10^43429447 flow through prefactor/determinant algebra
//! without overflow. Addition is log-sum-exp with sign handling; multiplication
//! is exponent arithmetic.
//!
//! [`Dd`] is an unevaluated double-double pair (~106-bit significand) used by
//! the determinant's optional high-precision mode, where cancellation between
//! nearly dependent columns exceeds what a 53-bit significand can absorb.
//!
//! [`NeumaierSum`] is compensated accumulation for long series in the
//! determinant feeding paths.

use std::cmp::Ordering;

/// Above this log₁₀ magnitude, intermediate quantities should be carried as
/// [`ScaledReal`] rather than native doubles (safety margin below the native
/// double range limit of ~308).
pub const NATIVE_LOG10_LIMIT: f64 = 280.0;

/// Sign + natural-log-magnitude representation: value = sign · e^{ln_mag}.
///
/// `sign == 0` represents exact zero (with `ln_mag = -inf`).
#[derive(Clone, Copy, Debug)]
pub struct ScaledReal {
    sign: i8,
    ln_mag: f64,
}

// Named methods rather than operator impls: every call site handles signs
// and log magnitudes explicitly, and `a.add(&b)` keeps that visible.
#[allow(clippy::should_implement_trait)]
impl ScaledReal {
    /// Exact zero.
    pub fn zero() -> Self {
        ScaledReal {
            sign: 0,
            ln_mag: f64::NEG_INFINITY,
        }
    }

    /// One.
    pub fn one() -> Self {
        ScaledReal {
            sign: 1,
            ln_mag: 0.0,
        }
    }

    /// Construct from sign and natural-log magnitude. `sign` is clamped to
    /// {-1, 0, +1}; a zero sign forces the zero representation.
    pub fn from_ln(sign: i8, ln_mag: f64) -> Self {
        if sign == 0 || ln_mag == f64::NEG_INFINITY {
            return Self::zero();
        }
        debug_assert!(!ln_mag.is_nan(), "ScaledReal log magnitude is NaN");
        ScaledReal {
            sign: sign.signum(),
            ln_mag,
        }
    }

    /// Construct from a native double. Infinite or NaN input is a caller bug.
    pub fn from_f64(v: f64) -> Self {
        debug_assert!(!v.is_nan(), "ScaledReal from NaN");
        if v == 0.0 {
            Self::zero()
        } else {
            ScaledReal {
                sign: if v > 0.0 { 1 } else { -1 },
                ln_mag: v.abs().ln(),
            }
        }
    }

    /// Sign in {-1, 0, +1}.
    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of the absolute value (−∞ for zero).
    pub fn ln_abs(&self) -> f64 {
        self.ln_mag
    }

    /// log₁₀ of the absolute value (−∞ for zero).
    pub fn log10_abs(&self) -> f64 {
        self.ln_mag / std::f64::consts::LN_10
    }

    /// Convert to native double; overflows to ±∞ and underflows to 0.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.ln_mag.exp()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// True when the value fits comfortably in a native double.
    pub fn is_native(&self) -> bool {
        self.sign == 0 || self.log10_abs().abs() <= NATIVE_LOG10_LIMIT
    }

    pub fn neg(&self) -> Self {
        ScaledReal {
            sign: -self.sign,
            ln_mag: self.ln_mag,
        }
    }

    pub fn abs(&self) -> Self {
        ScaledReal {
            sign: self.sign.abs(),
            ln_mag: self.ln_mag,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.sign == 0 || o.sign == 0 {
            return Self::zero();
        }
        ScaledReal {
            sign: self.sign * o.sign,
            ln_mag: self.ln_mag + o.ln_mag,
        }
    }

    /// Division; dividing by zero is a caller bug (debug assert).
    pub fn div(&self, o: &Self) -> Self {
        debug_assert!(o.sign != 0, "ScaledReal division by zero");
        if self.sign == 0 {
            return Self::zero();
        }
        ScaledReal {
            sign: self.sign * o.sign,
            ln_mag: self.ln_mag - o.ln_mag,
        }
    }

    /// Signed log-sum-exp addition.
    pub fn add(&self, o: &Self) -> Self {
        if self.sign == 0 {
            return *o;
        }
        if o.sign == 0 {
            return *self;
        }
        // Order so that `a` has the larger magnitude.
        let (a, b) = if self.ln_mag >= o.ln_mag {
            (self, o)
        } else {
            (o, self)
        };
        let d = b.ln_mag - a.ln_mag; // d ≤ 0
        if a.sign == b.sign {
            ScaledReal {
                sign: a.sign,
                ln_mag: a.ln_mag + d.exp().ln_1p(),
            }
        } else if d == 0.0 {
            Self::zero()
        } else {
            // |a| > |b|, opposite signs: magnitude |a|·(1 − e^d).
            ScaledReal {
                sign: a.sign,
                ln_mag: a.ln_mag + (-d.exp_m1()).ln(),
            }
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Decompose into a decimal mantissa string and a decimal exponent,
    /// with `digits` significant digits (≥ 1).
    pub fn sci_parts(&self, digits: usize) -> (String, i64) {
        let digits = digits.max(1);
        if self.sign == 0 {
            return (format!("{:.*}", digits - 1, 0.0), 0);
        }
        let lg = self.log10_abs();
        let mut e = lg.floor() as i64;
        let mut mant = 10f64.powf(lg - lg.floor());
        // Rounding at the requested precision can push the mantissa to 10.
        let half_ulp = 0.5 * 10f64.powi(-(digits as i32 - 1));
        if mant + half_ulp >= 10.0 {
            mant /= 10.0;
            e += 1;
        }
        let sign_str = if self.sign < 0 { "-" } else { "" };
        (format!("{sign_str}{:.*}", digits - 1, mant), e)
    }

    /// Scientific-notation string with `digits` significant digits, exact for
    /// exponents far beyond native-double range.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let (mant, e) = self.sci_parts(digits);
        format!("{mant}e{e}")
    }
}

impl PartialEq for ScaledReal {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.ln_mag == other.ln_mag)
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            ord => return Some(ord),
        }
        match self.sign {
            0 => Some(Ordering::Equal),
            1 => self.ln_mag.partial_cmp(&other.ln_mag),
            _ => other.ln_mag.partial_cmp(&self.ln_mag),
        }
    }
}

/// Error-free transform: s + e = a + b exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free transform assuming |a| ≥ |b|.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Unevaluated sum of two doubles (`hi + lo`, |lo| ≤ ½ulp(hi)):
/// ~106-bit significand arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[allow(clippy::should_implement_trait)]
impl Dd {
    pub fn zero() -> Self {
        Dd { hi: 0.0, lo: 0.0 }
    }

    pub fn one() -> Self {
        Dd { hi: 1.0, lo: 0.0 }
    }

    pub fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    /// Renormalizing constructor (no ordering assumption on |hi|, |lo|).
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Self) -> Self {
        let (s1, e1) = two_sum(self.hi, o.hi);
        let (s2, e2) = two_sum(self.lo, o.lo);
        let (s1, e1) = quick_two_sum(s1, e1 + s2);
        let (hi, lo) = quick_two_sum(s1, e1 + e2);
        Dd { hi, lo }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn mul_f64(self, f: f64) -> Self {
        let (p, e) = two_prod(self.hi, f);
        let (hi, lo) = quick_two_sum(p, e + self.lo * f);
        Dd { hi, lo }
    }

    pub fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        let (s, e) = two_sum(q1, q2);
        Dd { hi: s, lo: e }.add(Dd::from_f64(q3))
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    /// Natural log of |value|; −∞ for zero.
    pub fn ln_abs(self) -> f64 {
        if self.hi == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.hi.abs().ln() + (self.lo / self.hi).ln_1p()
    }
}

/// Scalar interface shared by the native and double-double determinant paths.
pub trait DetScalar: Copy {
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    /// |value| as a native double, for pivot selection.
    fn abs_f64(self) -> f64;
    fn ln_abs(self) -> f64;
    fn is_zero(self) -> bool;
    fn signum(self) -> i8;
}

impl DetScalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn abs_f64(self) -> f64 {
        self.abs()
    }
    fn ln_abs(self) -> f64 {
        self.abs().ln()
    }
    fn is_zero(self) -> bool {
        self == 0.0
    }
    fn signum(self) -> i8 {
        if self == 0.0 {
            0
        } else if self > 0.0 {
            1
        } else {
            -1
        }
    }
}

impl DetScalar for Dd {
    fn from_f64(v: f64) -> Self {
        Dd::from_f64(v)
    }
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn add(self, o: Self) -> Self {
        Dd::add(self, o)
    }
    fn sub(self, o: Self) -> Self {
        Dd::sub(self, o)
    }
    fn mul(self, o: Self) -> Self {
        Dd::mul(self, o)
    }
    fn div(self, o: Self) -> Self {
        Dd::div(self, o)
    }
    fn abs_f64(self) -> f64 {
        self.hi.abs()
    }
    fn ln_abs(self) -> f64 {
        Dd::ln_abs(self)
    }
    fn is_zero(self) -> bool {
        Dd::is_zero(self)
    }
    fn signum(self) -> i8 {
        if self.hi == 0.0 && self.lo == 0.0 {
            0
        } else if self.hi > 0.0 || (self.hi == 0.0 && self.lo > 0.0) {
            1
        } else {
            -1
        }
    }
}

/// Neumaier-compensated accumulator: ~double-length running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
