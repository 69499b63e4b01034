//! Double-double floating point: an unevaluated sum `hi + lo` of two `f64`
//! with `|lo| ≤ ulp(hi)/2`, giving about 106 bits of significand.
//!
//! Arithmetic follows the error-free transformations of Dekker and Knuth as
//! used in the QD library. `exp`, `ln`, `sqrt`, `sin` and `cos` are accurate
//! to a few units of `2^-104`; the inverse trigonometric and hyperbolic
//! functions are only needed for trait completeness and carry plain `f64`
//! accuracy.
//!
//! This is the scalar that makes clustered-mode Hankel spectra resolvable:
//! singular values down to ~1e-28 of `σ_max` stay above round-off.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, NumCast, One, Pow, Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

/// `2^-104`
const EPS: f64 = 4.930380657631324e-32;

const PI: DoubleDouble =
    DoubleDouble::from_parts_unchecked(std::f64::consts::PI, 1.2246467991473532e-16);
const FRAC_PI_2: DoubleDouble =
    DoubleDouble::from_parts_unchecked(std::f64::consts::FRAC_PI_2, 6.123233995736766e-17);
const LN_2: DoubleDouble =
    DoubleDouble::from_parts_unchecked(std::f64::consts::LN_2, 2.3190468138462996e-17);
const LN_10: DoubleDouble =
    DoubleDouble::from_parts_unchecked(std::f64::consts::LN_10, -2.1707562233822494e-16);

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self::from_parts_unchecked(0.0, 0.0);
    pub const ONE: Self = Self::from_parts_unchecked(1.0, 0.0);

    const fn from_parts_unchecked(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    /// Normalizes `hi + lo`.
    pub fn new(hi: f64, lo: f64) -> Self {
        if !hi.is_finite() {
            return DoubleDouble { hi, lo: 0.0 };
        }
        let (hi, lo) = two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }

    /// Exact embedding of an `f64`.
    pub const fn lift(value: f64) -> Self {
        DoubleDouble { hi: value, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn special(hi: f64) -> Self {
        DoubleDouble { hi, lo: 0.0 }
    }

    fn add_f64(self, b: f64) -> Self {
        self + DoubleDouble::lift(b)
    }

    fn mul_f64(self, b: f64) -> Self {
        self * DoubleDouble::lift(b)
    }

    /// Exact multiplication by a power of two.
    fn ldexp(self, exp: i32) -> Self {
        let mut out = self;
        let mut remaining = exp;
        while remaining != 0 {
            let step = remaining.clamp(-1000, 1000);
            let scale = 2f64.powi(step);
            out = DoubleDouble {
                hi: out.hi * scale,
                lo: out.lo * scale,
            };
            remaining -= step;
        }
        out
    }

    fn square(self) -> Self {
        self * self
    }

    fn exact(self) -> Option<BigRational> {
        if !self.is_finite() {
            return None;
        }
        Some(BigRational::from_float(self.hi)? + BigRational::from_float(self.lo)?)
    }

    fn from_rational(value: &BigRational) -> Self {
        let hi = value.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return DoubleDouble::special(hi);
        }
        let rest = value - BigRational::from_float(hi).expect("finite");
        DoubleDouble::new(hi, rest.to_f64().unwrap_or(0.0))
    }

    /// Scientific notation with `digits` digits after the point, correctly
    /// rounded from the exact binary value.
    pub fn to_scientific(self, digits: usize) -> String {
        let Some(exact) = self.exact() else {
            return format!("{}", self.hi);
        };
        if exact.is_zero() {
            return format!("{:.*e}", digits, 0.0);
        }
        let negative = exact.is_negative();
        let magnitude = exact.abs();
        let ten = BigRational::from_integer(BigInt::from(10));
        let mut exponent = self.hi.abs().log10().floor() as i32;
        // settle 10^e ≤ |x| < 10^(e+1) exactly
        loop {
            let low = Pow::pow(&ten, exponent);
            if magnitude < low {
                exponent -= 1;
                continue;
            }
            if magnitude >= &low * &ten {
                exponent += 1;
                continue;
            }
            break;
        }
        let scale = digits as i32 - exponent;
        let scaled = &magnitude * Pow::pow(&ten, scale);
        let mut mantissa = round_half_even(&scaled);
        let limit = num_traits::pow(BigInt::from(10), digits + 1);
        if mantissa >= limit {
            mantissa /= 10;
            exponent += 1;
        }
        let text = mantissa.to_string();
        let (lead, rest) = text.split_at(1);
        let sign = if negative { "-" } else { "" };
        if rest.is_empty() {
            format!("{sign}{lead}e{exponent}")
        } else {
            format!("{sign}{lead}.{rest}e{exponent}")
        }
    }

    fn taylor_sin_cos(t: Self) -> (Self, Self) {
        let t2 = t.square();
        let threshold = EPS * 1e-2;
        let mut sin = t;
        let mut term = t;
        let mut k = 1.0;
        while term.hi.abs() > threshold * sin.hi.abs().max(1e-300) && k < 80.0 {
            term = -(term * t2) / DoubleDouble::lift((k + 1.0) * (k + 2.0));
            sin += term;
            k += 2.0;
        }
        let mut cos = DoubleDouble::ONE;
        let mut term = DoubleDouble::ONE;
        let mut k = 0.0;
        while term.hi.abs() > threshold && k < 80.0 {
            term = -(term * t2) / DoubleDouble::lift((k + 1.0) * (k + 2.0));
            cos += term;
            k += 2.0;
        }
        (sin, cos)
    }
}

fn round_half_even(value: &BigRational) -> BigInt {
    let floor = value.floor();
    let fraction = value - &floor;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let base = floor.to_integer();
    match fraction.cmp(&half) {
        Ordering::Less => base,
        Ordering::Greater => base + 1,
        Ordering::Equal => {
            if base.is_even() {
                base
            } else {
                base + 1
            }
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(value: f64) -> Self {
        DoubleDouble { hi: value, lo: 0.0 }
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scientific(33))
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scientific(f.precision().unwrap_or(33)))
    }
}

impl fmt::LowerExp for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scientific(f.precision().unwrap_or(33)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDoubleDoubleError;

impl fmt::Display for ParseDoubleDoubleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid double-double literal")
    }
}

impl std::error::Error for ParseDoubleDoubleError {}

impl FromStr for DoubleDouble {
    type Err = ParseDoubleDoubleError;

    /// Decimal literals are converted exactly and then rounded once, so a
    /// 34-digit string recovers the value it was printed from.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let (negative, body) = match text.as_bytes().first() {
            Some(b'-') => (true, &text[1..]),
            Some(b'+') => (false, &text[1..]),
            _ => (false, text),
        };
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(i) => (
                &body[..i],
                body[i + 1..]
                    .parse::<i32>()
                    .map_err(|_| ParseDoubleDoubleError)?,
            ),
            None => (body, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
        if int_part.is_empty() && frac_part.is_empty()
            || !all_digits(int_part)
            || !all_digits(frac_part)
        {
            // inf, NaN and friends
            return text
                .parse::<f64>()
                .map(DoubleDouble::lift)
                .map_err(|_| ParseDoubleDoubleError);
        }
        let digits: BigInt = format!("0{int_part}{frac_part}")
            .parse()
            .map_err(|_| ParseDoubleDoubleError)?;
        let ten = BigRational::from_integer(BigInt::from(10));
        let value =
            BigRational::from_integer(digits) * Pow::pow(&ten, exponent - frac_part.len() as i32);
        let value = if negative { -value } else { value };
        if value.is_zero() && negative {
            return Ok(DoubleDouble::lift(-0.0));
        }
        Ok(DoubleDouble::from_rational(&value))
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return DoubleDouble::special(s1);
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        DoubleDouble { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        if !p1.is_finite() {
            return DoubleDouble::special(p1);
        }
        let (hi, lo) = quick_two_sum(p1, p2 + (self.hi * b.lo + self.lo * b.hi));
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() || b.hi == 0.0 {
            return DoubleDouble::special(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo }.add_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;

    fn rem(self, b: Self) -> Self {
        self - b * (self / b).trunc()
    }
}

macro_rules! assign_ops {
    ($($trait:ident $method:ident $op:tt),*) => {
        $(impl $trait for DoubleDouble {
            fn $method(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        })*
    };
}

assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DoubleDouble::ZERO, |a, b| a + b)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::ZERO
    }

    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble::ONE
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = ParseDoubleDoubleError;

    fn from_str_radix(text: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseDoubleDoubleError);
        }
        text.parse()
    }
}

impl Signed for DoubleDouble {
    fn abs(&self) -> Self {
        if self.hi < 0.0 {
            -*self
        } else {
            *self
        }
    }

    fn abs_sub(&self, other: &Self) -> Self {
        if *self <= *other {
            DoubleDouble::ZERO
        } else {
            *self - *other
        }
    }

    fn signum(&self) -> Self {
        Float::signum(*self)
    }

    fn is_positive(&self) -> bool {
        self.hi > 0.0
    }

    fn is_negative(&self) -> bool {
        self.hi < 0.0
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        let total = t.hi.to_i128()? + t.lo.to_i128()?;
        i64::try_from(total).ok()
    }

    fn to_u64(&self) -> Option<u64> {
        let t = self.trunc();
        let total = t.hi.to_i128()? + t.lo.to_i128()?;
        u64::try_from(total).ok()
    }

    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let rest = (n as i128 - hi as i128) as f64;
        Some(DoubleDouble::new(hi, rest))
    }

    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let rest = (n as i128 - hi as i128) as f64;
        Some(DoubleDouble::new(hi, rest))
    }

    fn from_f64(n: f64) -> Option<Self> {
        Some(DoubleDouble::lift(n))
    }

    fn from_f32(n: f32) -> Option<Self> {
        Some(DoubleDouble::lift(n as f64))
    }
}

impl NumCast for DoubleDouble {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(DoubleDouble::lift)
    }
}

impl Float for DoubleDouble {
    fn nan() -> Self {
        DoubleDouble::special(f64::NAN)
    }

    fn infinity() -> Self {
        DoubleDouble::special(f64::INFINITY)
    }

    fn neg_infinity() -> Self {
        DoubleDouble::special(f64::NEG_INFINITY)
    }

    fn neg_zero() -> Self {
        DoubleDouble::lift(-0.0)
    }

    fn min_value() -> Self {
        -Self::max_value()
    }

    fn min_positive_value() -> Self {
        // smallest value that still carries a full double-double significand
        DoubleDouble::lift(f64::MIN_POSITIVE * 2f64.powi(53))
    }

    fn max_value() -> Self {
        DoubleDouble::new(f64::MAX, f64::MAX * EPS / 2.0)
    }

    fn epsilon() -> Self {
        DoubleDouble::lift(EPS)
    }

    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }

    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }

    fn classify(self) -> FpCategory {
        self.hi.classify()
    }

    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            DoubleDouble::new(hi, self.lo.floor())
        } else {
            DoubleDouble::lift(hi)
        }
    }

    fn ceil(self) -> Self {
        let hi = self.hi.ceil();
        if hi == self.hi {
            DoubleDouble::new(hi, self.lo.ceil())
        } else {
            DoubleDouble::lift(hi)
        }
    }

    fn round(self) -> Self {
        if self.hi >= 0.0 {
            (self + DoubleDouble::lift(0.5)).floor()
        } else {
            (self - DoubleDouble::lift(0.5)).ceil()
        }
    }

    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }

    fn fract(self) -> Self {
        self - self.trunc()
    }

    fn abs(self) -> Self {
        Signed::abs(&self)
    }

    fn signum(self) -> Self {
        if self.is_nan() {
            Self::nan()
        } else {
            DoubleDouble::lift(self.hi.signum())
        }
    }

    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }

    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }

    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }

    fn recip(self) -> Self {
        DoubleDouble::ONE / self
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return DoubleDouble::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = DoubleDouble::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    fn powf(self, n: Self) -> Self {
        if n.fract().is_zero() && n.abs().hi < i32::MAX as f64 {
            return self.powi(n.hi as i32);
        }
        (n * self.ln()).exp()
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                DoubleDouble::ZERO
            } else {
                Self::nan()
            };
        }
        if !self.is_finite() {
            return self;
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (p, e) = two_prod(ax, ax);
        let residual = self - DoubleDouble { hi: p, lo: e };
        let (hi, lo) = two_sum(ax, residual.hi * (x * 0.5));
        DoubleDouble { hi, lo }
    }

    fn exp(self) -> Self {
        const HALVINGS: i32 = 10;
        if self.hi <= -745.0 {
            return DoubleDouble::ZERO;
        }
        if self.hi >= 709.8 {
            return Self::infinity();
        }
        if self.is_nan() {
            return self;
        }
        if self.is_zero() {
            return DoubleDouble::ONE;
        }
        let m = (self.hi / LN_2.hi).round();
        let r = (self - LN_2.mul_f64(m)).ldexp(-HALVINGS);
        // expm1(r) by Taylor series, then undo the halvings with
        // expm1(2r) = expm1(r)·(expm1(r) + 2)
        let mut sum = r;
        let mut term = r;
        let mut k = 1.0;
        while term.hi.abs() > EPS * 1e-3 * sum.hi.abs() && k < 40.0 {
            k += 1.0;
            term = term * r / DoubleDouble::lift(k);
            sum += term;
        }
        for _ in 0..HALVINGS {
            sum = sum * (sum + DoubleDouble::lift(2.0));
        }
        (sum + DoubleDouble::ONE).ldexp(m as i32)
    }

    fn exp2(self) -> Self {
        (self * LN_2).exp()
    }

    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::neg_infinity()
            } else {
                Self::nan()
            };
        }
        if !self.is_finite() {
            return self;
        }
        // one Newton step on exp(x) = a from the f64 logarithm
        let x = DoubleDouble::lift(self.hi.ln());
        x + self * (-x).exp() - DoubleDouble::ONE
    }

    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }

    fn log2(self) -> Self {
        self.ln() / LN_2
    }

    fn log10(self) -> Self {
        self.ln() / LN_10
    }

    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }

    fn abs_sub(self, other: Self) -> Self {
        Signed::abs_sub(&self, &other)
    }

    fn cbrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let root = Float::abs(self).ln().mul_f64(1.0 / 3.0).exp();
        // refine against the 1/3 rounding
        let root = root - (root.powi(3) - Float::abs(self)) / (root.square().mul_f64(3.0));
        if self.hi < 0.0 {
            -root
        } else {
            root
        }
    }

    fn hypot(self, other: Self) -> Self {
        (self.square() + other.square()).sqrt()
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn tan(self) -> Self {
        let (s, c) = self.sin_cos();
        s / c
    }

    fn asin(self) -> Self {
        DoubleDouble::lift(self.hi.asin())
    }

    fn acos(self) -> Self {
        DoubleDouble::lift(self.hi.acos())
    }

    fn atan(self) -> Self {
        DoubleDouble::lift(self.hi.atan())
    }

    fn atan2(self, other: Self) -> Self {
        DoubleDouble::lift(self.hi.atan2(other.hi))
    }

    fn sin_cos(self) -> (Self, Self) {
        if !self.is_finite() {
            return (Self::nan(), Self::nan());
        }
        if self.is_zero() {
            return (self, DoubleDouble::ONE);
        }
        let quadrant = (self / FRAC_PI_2).round();
        let t = self - FRAC_PI_2 * quadrant;
        let (s, c) = DoubleDouble::taylor_sin_cos(t);
        match (quadrant.hi as i64 + quadrant.lo as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn exp_m1(self) -> Self {
        self.exp() - DoubleDouble::ONE
    }

    fn ln_1p(self) -> Self {
        (self + DoubleDouble::ONE).ln()
    }

    fn sinh(self) -> Self {
        let e = self.exp();
        (e - e.recip()).mul_f64(0.5)
    }

    fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()).mul_f64(0.5)
    }

    fn tanh(self) -> Self {
        let e2 = self.mul_f64(2.0).exp();
        (e2 - DoubleDouble::ONE) / (e2 + DoubleDouble::ONE)
    }

    fn asinh(self) -> Self {
        (self + (self.square() + DoubleDouble::ONE).sqrt()).ln()
    }

    fn acosh(self) -> Self {
        (self + (self.square() - DoubleDouble::ONE).sqrt()).ln()
    }

    fn atanh(self) -> Self {
        ((DoubleDouble::ONE + self) / (DoubleDouble::ONE - self))
            .ln()
            .mul_f64(0.5)
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }

    fn to_degrees(self) -> Self {
        self * DoubleDouble::lift(180.0) / PI
    }

    fn to_radians(self) -> Self {
        self * PI / DoubleDouble::lift(180.0)
    }
}
