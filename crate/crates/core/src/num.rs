//! Arbitrary-precision integers with an inline fast path, plus the float
//! arithmetic and formatting rules shared by the interpreter and AST dumps.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Exact integer. Values that fit in an `i64` are always stored `Small`, so
/// the derived `Eq`/`Hash` agree with numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Int {
    Small(i64),
    Big(Box<BigInt>),
}

impl Int {
    pub fn zero() -> Int {
        Int::Small(0)
    }

    pub fn from_bigint(value: BigInt) -> Int {
        match value.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(Box::new(value)),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => (**b).clone(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Int::Small(v) => Some(*v),
            Int::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Int::Small(v) => *v < 0,
            Int::Big(b) => b.is_negative(),
        }
    }

    /// Magnitude bit length.
    pub fn bits(&self) -> u64 {
        match self {
            Int::Small(v) => 64 - v.unsigned_abs().leading_zeros() as u64,
            Int::Big(b) => b.bits(),
        }
    }

    pub fn add(&self, other: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if let Some(r) = a.checked_add(*b) {
                return Int::Small(r);
            }
        }
        Int::from_bigint(self.to_bigint() + other.to_bigint())
    }

    pub fn sub(&self, other: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if let Some(r) = a.checked_sub(*b) {
                return Int::Small(r);
            }
        }
        Int::from_bigint(self.to_bigint() - other.to_bigint())
    }

    pub fn mul(&self, other: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if let Some(r) = a.checked_mul(*b) {
                return Int::Small(r);
            }
        }
        Int::from_bigint(self.to_bigint() * other.to_bigint())
    }

    /// Floored remainder (sign follows the divisor). `None` on a zero divisor.
    pub fn mod_floor(&self, other: &Int) -> Option<Int> {
        if other.is_zero() {
            return None;
        }
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if *b == -1 {
                return Some(Int::zero());
            }
            return Some(Int::Small(a.mod_floor(b)));
        }
        Some(Int::from_bigint(self.to_bigint().mod_floor(&other.to_bigint())))
    }

    /// Nearest `f64`; saturates to an infinity when out of range.
    pub fn to_f64(&self) -> f64 {
        match self {
            Int::Small(v) => *v as f64,
            Int::Big(b) => b.to_f64().unwrap_or(if b.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }),
        }
    }

    /// True division, correctly rounded on the exactly-representable range.
    /// `None` on a zero divisor.
    pub fn true_div(&self, other: &Int) -> Option<f64> {
        if other.is_zero() {
            return None;
        }
        const EXACT: u64 = 1 << 53;
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if a.unsigned_abs() <= EXACT && b.unsigned_abs() <= EXACT {
                return Some(*a as f64 / *b as f64);
            }
        }
        // Scale the numerator so the integer quotient carries at least 64
        // significant bits, fold the remainder into a sticky bit, then rescale.
        let num = self.to_bigint();
        let den = other.to_bigint();
        let negative = num.is_negative() != den.is_negative();
        let (num, den) = (num.abs(), den.abs());
        let shift = (den.bits() as i64 - num.bits() as i64 + 66).max(0);
        let (mut q, r) = (num << shift as usize).div_rem(&den);
        if !r.is_zero() {
            q |= BigInt::from(1u8);
        }
        let extra = q.bits().saturating_sub(64);
        let top = (&q >> extra as usize).to_u64().unwrap_or(u64::MAX);
        let sticky = !(&q & ((BigInt::from(1u8) << extra as usize) - 1u8)).is_zero();
        let top = if sticky { top | 1 } else { top };
        let exp = extra as i64 - shift;
        let mag = scale_pow2(top as f64, exp);
        Some(if negative { -mag } else { mag })
    }

    /// Exact comparison against a float; `None` when `f` is NaN.
    pub fn cmp_f64(&self, f: f64) -> Option<Ordering> {
        if f.is_nan() {
            return None;
        }
        if f.is_infinite() {
            return Some(if f > 0.0 { Ordering::Less } else { Ordering::Greater });
        }
        if let Int::Small(v) = self {
            if v.unsigned_abs() <= 1 << 53 {
                return (*v as f64).partial_cmp(&f);
            }
        }
        let floor = f.floor();
        let floor_int = BigInt::from_f64(floor).expect("finite float");
        match self.to_bigint().cmp(&floor_int) {
            Ordering::Equal if f > floor => Some(Ordering::Less),
            ord => Some(ord),
        }
    }
}

/// `value * 2^exp` without intermediate overflow for moderate exponents.
fn scale_pow2(mut value: f64, mut exp: i64) -> f64 {
    while exp > 0 {
        let step = exp.min(1000);
        value *= 2f64.powi(step as i32);
        exp -= step;
        if value.is_infinite() {
            return value;
        }
    }
    while exp < 0 {
        let step = (-exp).min(1000);
        value /= 2f64.powi(step as i32);
        exp += step;
        if value == 0.0 {
            return value;
        }
    }
    value
}

impl Ord for Int {
    fn cmp(&self, other: &Int) -> Ordering {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a.cmp(b),
            _ => self.to_bigint().cmp(&other.to_bigint()),
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Int) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Int {
        Int::Small(v)
    }
}

impl From<BigInt> for Int {
    fn from(v: BigInt) -> Int {
        Int::from_bigint(v)
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => write!(f, "{v}"),
            Int::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Floored float remainder: the result takes the sign of the divisor.
pub fn float_mod_floor(a: f64, b: f64) -> f64 {
    let r = a % b;
    if r == 0.0 {
        0f64.copysign(b)
    } else if (r < 0.0) != (b < 0.0) {
        r + b
    } else {
        r
    }
}

/// Shortest round-trip decimal rendering with at least one fractional digit
/// in positional form (`1.0`, `0.5`), switching to exponent form outside
/// `1e-4 <= |x| < 1e16` (`1e+16`, `1.5e-05`).
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0" } else { "0.0" }.to_string();
    }
    // `{:e}` yields the shortest round-trip digits, e.g. "1.2345e-7".
    let sci = format!("{:e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if x < 0.0 { "-" } else { "" };
    if (-4..16).contains(&exp) {
        let point = exp + 1;
        let body = if point <= 0 {
            format!("0.{}{}", "0".repeat((-point) as usize), digits)
        } else if point as usize >= digits.len() {
            format!("{}{}.0", digits, "0".repeat(point as usize - digits.len()))
        } else {
            let (int_part, frac) = digits.split_at(point as usize);
            format!("{int_part}.{frac}")
        };
        format!("{sign}{body}")
    } else {
        let mant = if digits.len() == 1 {
            digits
        } else {
            format!("{}.{}", &digits[..1], &digits[1..])
        };
        let exp_sign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{mant}e{exp_sign}{:02}", exp.abs())
    }
}
