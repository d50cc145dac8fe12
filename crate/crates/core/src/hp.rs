//! Log-space reals for the constant ledger.
//!
//! The ledger only ever stores base-2 logarithms, so the arithmetic it needs is
//! the four field operations plus `log2`/`exp2` on moderately sized numbers.
//! [`LogReal`] abstracts over a plain `f64` and [`Hp`], a fixed-precision binary
//! float backed by `astro-float`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

/// Default number of significant decimal digits carried by [`Hp`].
pub const DEFAULT_DIGITS: usize = 100;

/// Environment variable overriding the digit count.
pub const PRECISION_ENV: &str = "FLATCERT_PRECISION";

/// Arithmetic required by the ledger.
pub trait LogReal:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn from_f64(v: f64) -> Self;
    fn parse_decimal(s: &str) -> Option<Self>;
    fn log2(&self) -> Self;
    fn exp2(&self) -> Self;
    fn floor(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Relative accuracy of a single rounded operation.
    fn unit_roundoff() -> f64;
    /// Significant decimal digits carried.
    fn digits() -> usize;
    /// Decimal rendering with [`LogReal::digits`] significant digits.
    fn to_decimal(&self) -> String;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn abs(&self) -> Self {
        if *self < Self::from_i64(0) {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Comparison tolerance for values of the given magnitude after a short
    /// chain of operations.
    fn tolerance(magnitude: &Self) -> f64 {
        let m = magnitude.to_f64().abs().max(1.0);
        m * Self::unit_roundoff() * 1024.0
    }
}

impl LogReal for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn log2(&self) -> Self {
        f64::log2(*self)
    }
    fn exp2(&self) -> Self {
        f64::exp2(*self)
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn unit_roundoff() -> f64 {
        f64::EPSILON
    }
    fn digits() -> usize {
        17
    }
    fn to_decimal(&self) -> String {
        crate::scalar::fmt_real(*self)
    }
}

static PRECISION_DIGITS: AtomicUsize = AtomicUsize::new(0);

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

const RM: RoundingMode = RoundingMode::ToEven;

/// Sets the working precision of [`Hp`] in significant decimal digits.
/// Values created earlier keep their precision; new operations use the new one.
pub fn set_precision_digits(digits: usize) {
    PRECISION_DIGITS.store(digits.max(20), AtomicOrdering::Relaxed);
}

/// Current working precision in decimal digits (environment override applied
/// on first use).
pub fn precision_digits() -> usize {
    let d = PRECISION_DIGITS.load(AtomicOrdering::Relaxed);
    if d != 0 {
        return d;
    }
    let from_env = std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .unwrap_or(DEFAULT_DIGITS)
        .max(20);
    PRECISION_DIGITS.store(from_env, AtomicOrdering::Relaxed);
    from_env
}

/// Mantissa bits: digits·log2(10) plus 32 guard bits, rounded up to whole words.
fn precision_bits() -> usize {
    let bits = (precision_digits() as f64 * std::f64::consts::LOG2_10).ceil() as usize + 32;
    bits.div_ceil(64) * 64
}

/// High-precision binary float used for ledger arithmetic.
#[derive(Clone)]
pub struct Hp(BigFloat);

impl Hp {
    fn wrap(x: BigFloat) -> Self {
        Hp(x)
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
        CONSTS.with(|c| f(&mut c.borrow_mut()))
    }
}

impl fmt::Debug for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hp({})", self.0)
    }
}

impl fmt::Display for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl PartialEq for Hp {
    fn eq(&self, other: &Self) -> bool {
        matches!(self.0.cmp(&other.0), Some(0))
    }
}

impl PartialOrd for Hp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! hp_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Hp {
            type Output = Hp;
            fn $method(self, rhs: Hp) -> Hp {
                Hp::wrap(self.0.$method(&rhs.0, precision_bits(), RM))
            }
        }
        impl<'a> $tr<&'a Hp> for &'a Hp {
            type Output = Hp;
            fn $method(self, rhs: &'a Hp) -> Hp {
                Hp::wrap(self.0.$method(&rhs.0, precision_bits(), RM))
            }
        }
    };
}

hp_binop!(Add, add);
hp_binop!(Sub, sub);
hp_binop!(Mul, mul);
hp_binop!(Div, div);

impl Neg for Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp::wrap(self.0.neg())
    }
}

impl LogReal for Hp {
    fn from_i64(v: i64) -> Self {
        Hp::wrap(BigFloat::from_i64(v, precision_bits()))
    }

    fn from_f64(v: f64) -> Self {
        Hp::wrap(BigFloat::from_f64(v, precision_bits()))
    }

    fn parse_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        let x = Self::with_consts(|cc| BigFloat::parse(s, Radix::Dec, precision_bits(), RM, cc));
        (!x.is_nan()).then_some(Hp(x))
    }

    fn log2(&self) -> Self {
        Hp::wrap(Self::with_consts(|cc| self.0.log2(precision_bits(), RM, cc)))
    }

    fn exp2(&self) -> Self {
        let p = precision_bits();
        let two = BigFloat::from_i32(2, p);
        Hp::wrap(Self::with_consts(|cc| two.pow(&self.0, p, RM, cc)))
    }

    fn floor(&self) -> Self {
        Hp::wrap(self.0.floor())
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        // Correctly rounded through the decimal expansion, which carries more
        // digits than f64 can hold.
        let s = Self::with_consts(|cc| {
            self.0
                .format(Radix::Dec, RM, cc)
                .unwrap_or_else(|_| "NaN".to_string())
        });
        s.parse().unwrap_or(f64::NAN)
    }

    fn unit_roundoff() -> f64 {
        2f64.powi(-(precision_bits() as i32) + 1)
    }

    fn digits() -> usize {
        precision_digits()
    }

    fn to_decimal(&self) -> String {
        let raw = Self::with_consts(|cc| {
            self.0
                .format(Radix::Dec, RM, cc)
                .unwrap_or_else(|_| "NaN".to_string())
        });
        round_decimal(&raw, precision_digits())
    }
}

/// Rounds a scientific-notation decimal string (`-1.2345e-3` style, as
/// produced by astro-float) to `digits` significant digits and renders it
/// positionally when the exponent is moderate.
pub(crate) fn round_decimal(raw: &str, digits: usize) -> String {
    let raw = raw.trim();
    let (neg, body) = match raw.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, raw.strip_prefix('+').unwrap_or(raw)),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let mut ds: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .filter(u8::is_ascii_digit)
        .map(|b| b - b'0')
        .collect();
    if ds.is_empty() || !mant.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return raw.to_string();
    }
    // Decimal point position relative to the digit string.
    let mut point = int_part.len() as i64 + exp;
    let lead = ds.iter().take_while(|&&d| d == 0).count();
    if lead == ds.len() {
        return "0".to_string();
    }
    ds.drain(..lead);
    point -= lead as i64;
    if ds.len() > digits {
        let round_up = ds[digits] >= 5;
        ds.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    point += 1;
                    ds.truncate(digits);
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
    }
    while ds.len() > 1 && *ds.last().unwrap() == 0 && (ds.len() as i64) > point {
        ds.pop();
    }
    let digit_str: String = ds.iter().map(|d| (b'0' + d) as char).collect();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if point <= -20 || point > 40 {
        out.push_str(&digit_str[..1]);
        if digit_str.len() > 1 {
            out.push('.');
            out.push_str(&digit_str[1..]);
        }
        out.push_str(&format!("e{}", point - 1));
    } else if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(&digit_str);
    } else if point as usize >= digit_str.len() {
        out.push_str(&digit_str);
        out.extend(std::iter::repeat_n('0', point as usize - digit_str.len()));
    } else {
        out.push_str(&digit_str[..point as usize]);
        out.push('.');
        out.push_str(&digit_str[point as usize..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_of_decimal_strings() {
        assert_eq!(round_decimal("1.23456e2", 4), "123.5");
        assert_eq!(round_decimal("-9.9996e-1", 4), "-1");
        assert_eq!(round_decimal("3.0e0", 10), "3");
        assert_eq!(round_decimal("-1.15e4", 10), "-11500");
        assert_eq!(round_decimal("1.5e-3", 5), "0.0015");
        assert_eq!(round_decimal("0.0", 5), "0");
        assert_eq!(round_decimal("1.25e-30", 5), "1.25e-30");
    }

    #[test]
    fn hp_log2_matches_reference() {
        // log2(0.8) to 40 digits.
        let x = Hp::parse_decimal("0.8").unwrap().log2();
        let reference = Hp::parse_decimal("-0.3219280948873623478703194294893901758648").unwrap();
        let diff = (x - reference).abs().to_f64();
        assert!(diff < 1e-39, "{diff}");
    }

    #[test]
    fn hp_exp2_inverts_log2() {
        let x = Hp::from_ratio(7, 3);
        let back = x.exp2().log2();
        assert!((back - x).abs().to_f64() < 1e-90);
        assert_eq!(Hp::from_i64(8).log2().to_f64(), 3.0);
    }

    #[test]
    fn hp_floor_and_order() {
        assert_eq!(Hp::from_ratio(37, 3).floor().to_f64(), 12.0);
        assert_eq!(Hp::from_ratio(-1, 3).floor().to_f64(), -1.0);
        assert!(Hp::from_i64(2) < Hp::from_ratio(7, 3));
        assert!(Hp::parse_decimal("not a number").is_none());
    }
}
