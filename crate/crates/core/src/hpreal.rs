//! Decimal floating point with a configurable number of significant digits.
//!
//! A value is `mantissa * 10^exponent` with `|mantissa| < 10^precision`.
//! Every operation computes the exact result and rounds it once, half to even,
//! to the smaller precision of its operands. Decimal literals with at most
//! `precision` digits are therefore held exactly, as are thresholds such as
//! `10^-15`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Result, TentError};

const POW10_CACHE: usize = 1200;

fn pow10_ref(n: u32) -> std::borrow::Cow<'static, BigInt> {
    static CACHE: OnceLock<Vec<BigInt>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        let mut v = Vec::with_capacity(POW10_CACHE);
        let mut p = BigInt::one();
        for _ in 0..POW10_CACHE {
            v.push(p.clone());
            p *= 10u32;
        }
        v
    });
    match cache.get(n as usize) {
        Some(p) => std::borrow::Cow::Borrowed(p),
        None => std::borrow::Cow::Owned(num_traits::pow(BigInt::from(10u32), n as usize)),
    }
}

fn pow10(n: u32) -> BigInt {
    pow10_ref(n).into_owned()
}

/// Number of decimal digits of `|n|`; zero has zero digits.
fn digits(n: &BigInt) -> u32 {
    if n.is_zero() {
        return 0;
    }
    let bits = n.bits();
    let est = ((bits - 1) as f64 * std::f64::consts::LOG10_2).floor() as u32 + 1;
    if n.magnitude() >= pow10_ref(est).magnitude() {
        est + 1
    } else {
        est
    }
}

fn round_half_even(mant: BigInt, exp: i64, prec: u32) -> (BigInt, i64) {
    if mant.is_zero() {
        return (mant, 0);
    }
    let d = digits(&mant);
    if d <= prec {
        return (mant, exp);
    }
    let shift = d - prec;
    let unit = pow10_ref(shift);
    let (mut q, r): (BigInt, BigInt) = mant.div_rem(unit.as_ref());
    let twice: BigInt = r.abs() << 1;
    let up = match twice.cmp(unit.as_ref()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => q.is_odd(),
    };
    if up {
        if mant.is_negative() {
            q -= 1;
        } else {
            q += 1;
        }
    }
    let mut e = exp + shift as i64;
    if digits(&q) > prec {
        q /= 10;
        e += 1;
    }
    (q, e)
}

/// `num / den` rounded to `prec` digits, as (mantissa, exponent).
fn divide(num: &BigInt, num_exp: i64, den: &BigInt, den_exp: i64, prec: u32) -> (BigInt, i64) {
    assert!(!den.is_zero(), "HpReal division by zero");
    if num.is_zero() {
        return (BigInt::zero(), 0);
    }
    let k = (prec as i64 + 2 + digits(den) as i64 - digits(num) as i64).max(0) as u32;
    let scaled = num * pow10_ref(k).as_ref();
    let (q, r): (BigInt, BigInt) = scaled.div_rem(den);
    // One sticky digit below the guard digits keeps the single rounding correct.
    let mut q: BigInt = q * 10;
    if !r.is_zero() {
        if q.is_negative() {
            q -= 1;
        } else {
            q += 1;
        }
    }
    round_half_even(q, num_exp - den_exp - k as i64 - 1, prec)
}

#[derive(Clone)]
pub struct HpReal {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

impl HpReal {
    fn from_parts(mant: BigInt, exp: i64, prec: u32) -> Self {
        assert!(prec >= 1, "precision must be at least one digit");
        let (mant, exp) = round_half_even(mant, exp, prec);
        HpReal { mant, exp, prec }
    }

    pub fn zero(prec: u32) -> Self {
        HpReal::from_parts(BigInt::zero(), 0, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        HpReal::from_parts(BigInt::from(v), 0, prec)
    }

    /// `10^e`, exact.
    pub fn power_of_ten(e: i64, prec: u32) -> Self {
        HpReal::from_parts(BigInt::one(), e, prec)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(prec >= 1, "precision must be at least one digit");
        let (mant, exp) = divide(num, 0, den, 0, prec);
        HpReal { mant, exp, prec }
    }

    pub fn from_rational(value: &BigRational, prec: u32) -> Self {
        HpReal::from_ratio(value.numer(), value.denom(), prec)
    }

    /// Parses a decimal literal such as `-1.25e-3`, rounding if it has more than `prec` digits.
    pub fn parse(text: &str, prec: u32) -> Result<Self> {
        let err = || TentError::Parse(text.to_string());
        let s = text.trim();
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| err())?),
            None => (s, 0),
        };
        let (negative, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let mut mant: BigInt = format!("{int_part}{frac_part}").parse().map_err(|_| err())?;
        if negative {
            mant = -mant;
        }
        Ok(HpReal::from_parts(mant, exponent - frac_part.len() as i64, prec))
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        HpReal::from_parts(self.mant.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> Self {
        HpReal { mant: self.mant.abs(), exp: self.exp, prec: self.prec }
    }

    /// Decimal exponent of the leading digit, `None` for zero.
    pub fn order(&self) -> Option<i64> {
        if self.mant.is_zero() {
            None
        } else {
            Some(self.exp + digits(&self.mant) as i64 - 1)
        }
    }

    /// The exact value as a rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant * pow10(self.exp as u32))
        } else {
            BigRational::new(self.mant.clone(), pow10((-self.exp) as u32))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_scientific(17).parse().unwrap_or(f64::NAN)
    }

    /// Scientific notation with `sig` significant digits, e.g. `1e-16` or `2.50e-3`.
    pub fn to_scientific(&self, sig: u32) -> String {
        if self.mant.is_zero() {
            return "0".to_string();
        }
        let r = self.with_precision(sig.max(1));
        let d = digits(&r.mant);
        let lead = r.exp + d as i64 - 1;
        let s = r.mant.magnitude().to_string();
        let sign = if r.mant.is_negative() { "-" } else { "" };
        let body = s.trim_end_matches('0');
        let body = if body.is_empty() { "0" } else { body };
        let (head, tail) = body.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{lead}")
        } else {
            format!("{sign}{head}.{tail}e{lead}")
        }
    }

    /// Plain decimal text carrying exactly `precision` significant digits.
    pub fn to_sig_string(&self) -> String {
        if self.mant.is_zero() {
            return "0".to_string();
        }
        let d = digits(&self.mant);
        let pad = self.prec.saturating_sub(d);
        let digits_str = format!("{}{}", self.mant.magnitude(), "0".repeat(pad as usize));
        let exp = self.exp - pad as i64;
        let lead = exp + digits_str.len() as i64 - 1;
        let sign = if self.mant.is_negative() { "-" } else { "" };
        if !(-24..=48).contains(&lead) {
            let (head, tail) = digits_str.split_at(1);
            return if tail.is_empty() {
                format!("{sign}{head}e{lead}")
            } else {
                format!("{sign}{head}.{tail}e{lead}")
            };
        }
        if exp >= 0 {
            return format!("{sign}{digits_str}{}", "0".repeat(exp as usize));
        }
        let point = digits_str.len() as i64 + exp;
        if point > 0 {
            let (a, b) = digits_str.split_at(point as usize);
            format!("{sign}{a}.{b}")
        } else {
            format!("{sign}0.{}{digits_str}", "0".repeat((-point) as usize))
        }
    }

    fn add_impl(&self, other: &HpReal, negate_other: bool) -> HpReal {
        let prec = self.prec.min(other.prec);
        let rhs_mant = if negate_other { -&other.mant } else { other.mant.clone() };
        if other.mant.is_zero() {
            return self.with_precision(prec);
        }
        if self.mant.is_zero() {
            return HpReal::from_parts(rhs_mant, other.exp, prec);
        }
        // The smaller term sits entirely below the rounding position.
        let (oa, ob) = (self.order().unwrap(), other.order().unwrap());
        let gap = self.prec.max(other.prec) as i64 + 2;
        if oa - ob > gap && self.prec <= prec {
            return self.clone();
        }
        if ob - oa > gap && other.prec <= prec {
            return HpReal { mant: rhs_mant, exp: other.exp, prec };
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant * pow10_ref((self.exp - e) as u32).as_ref();
        let b = rhs_mant * pow10_ref((other.exp - e) as u32).as_ref();
        HpReal::from_parts(a + b, e, prec)
    }
}

impl PartialEq for HpReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HpReal {}

impl PartialOrd for HpReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HpReal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mant.sign(), other.mant.sign());
        if sa != sb || sa == Sign::NoSign {
            return sa.cmp(&sb);
        }
        let by_magnitude = match self.order().cmp(&other.order()) {
            Ordering::Equal => {
                let e = self.exp.min(other.exp);
                let a = self.mant.magnitude() * pow10_ref((self.exp - e) as u32).magnitude();
                let b = other.mant.magnitude() * pow10_ref((other.exp - e) as u32).magnitude();
                a.cmp(&b)
            }
            ord => ord,
        };
        if sa == Sign::Plus {
            by_magnitude
        } else {
            by_magnitude.reverse()
        }
    }
}

impl fmt::Display for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sig_string())
    }
}

impl fmt::Debug for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HpReal({}, P={})", self.to_sig_string(), self.prec)
    }
}

impl<'a> Add<&'a HpReal> for &HpReal {
    type Output = HpReal;
    fn add(self, rhs: &'a HpReal) -> HpReal {
        self.add_impl(rhs, false)
    }
}

impl<'a> Sub<&'a HpReal> for &HpReal {
    type Output = HpReal;
    fn sub(self, rhs: &'a HpReal) -> HpReal {
        self.add_impl(rhs, true)
    }
}

impl<'a> Mul<&'a HpReal> for &HpReal {
    type Output = HpReal;
    fn mul(self, rhs: &'a HpReal) -> HpReal {
        let prec = self.prec.min(rhs.prec);
        HpReal::from_parts(&self.mant * &rhs.mant, self.exp + rhs.exp, prec)
    }
}

impl<'a> Div<&'a HpReal> for &HpReal {
    type Output = HpReal;
    /// Panics on division by zero.
    fn div(self, rhs: &'a HpReal) -> HpReal {
        let prec = self.prec.min(rhs.prec);
        let (mant, exp) = divide(&self.mant, self.exp, &rhs.mant, rhs.exp, prec);
        HpReal { mant, exp, prec }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for HpReal {
            type Output = HpReal;
            fn $m(self, rhs: HpReal) -> HpReal {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a HpReal> for HpReal {
            type Output = HpReal;
            fn $m(self, rhs: &'a HpReal) -> HpReal {
                (&self).$m(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl Neg for HpReal {
    type Output = HpReal;
    fn neg(self) -> HpReal {
        HpReal { mant: -self.mant, exp: self.exp, prec: self.prec }
    }
}

impl Neg for &HpReal {
    type Output = HpReal;
    fn neg(self) -> HpReal {
        HpReal { mant: -&self.mant, exp: self.exp, prec: self.prec }
    }
}
