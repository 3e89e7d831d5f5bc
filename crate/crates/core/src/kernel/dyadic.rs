//! Exact dyadic rationals `mantissa / 2^exponent`.
//!
//! Every construction coordinate (cell boundaries `k·4^-m`, the step height
//! `3/4`, displacements `a_k·4^-m_k` with `a_k` taken as an exact binary64)
//! is a dyadic rational, so the construction can be carried out without any
//! rounding. Arithmetic is checked: overflowing the 128-bit mantissa or the
//! exponent limit is reported as an error, never rounded.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bound on the binary exponent of any [`Dyadic`].
pub const DEFAULT_EXPONENT_LIMIT: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyadicError {
    #[error("dyadic exponent {exponent} exceeds the limit {limit}")]
    ExponentLimit { exponent: u64, limit: u32 },
    #[error("dyadic mantissa overflow")]
    Overflow,
    #[error("value is not finite")]
    NotFinite,
    #[error("`{0}` is not a dyadic rational")]
    NotDyadic(String),
}

/// Canonical dyadic rational. Either `exponent == 0` or `mantissa` is odd,
/// so equality of values is equality of representations.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "(i128, u32)", into = "(i128, u32)")]
pub struct Dyadic {
    mantissa: i128,
    exponent: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic {
        mantissa: 0,
        exponent: 0,
    };
    pub const ONE: Dyadic = Dyadic {
        mantissa: 1,
        exponent: 0,
    };

    pub fn from_int(v: i128) -> Self {
        Dyadic {
            mantissa: v,
            exponent: 0,
        }
    }

    /// `num / 2^log2_den`, normalized, checked against the default limit.
    pub fn new(num: i128, log2_den: u32) -> Result<Self, DyadicError> {
        Self::new_with_limit(num, log2_den, DEFAULT_EXPONENT_LIMIT)
    }

    pub fn new_with_limit(num: i128, log2_den: u32, limit: u32) -> Result<Self, DyadicError> {
        let d = Self::normalized(num, log2_den);
        if d.exponent > limit {
            return Err(DyadicError::ExponentLimit {
                exponent: d.exponent as u64,
                limit,
            });
        }
        Ok(d)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Result<Self, DyadicError> {
        Self::new(1, k)
    }

    /// `4^-m`.
    pub fn pow4_neg(m: u32) -> Result<Self, DyadicError> {
        Self::new(1, 2 * m)
    }

    fn normalized(num: i128, log2_den: u32) -> Self {
        if num == 0 {
            return Dyadic::ZERO;
        }
        let tz = num.trailing_zeros().min(log2_den);
        Dyadic {
            mantissa: num >> tz,
            exponent: log2_den - tz,
        }
    }

    pub fn mantissa(&self) -> i128 {
        self.mantissa
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn signum(&self) -> i32 {
        self.mantissa.signum() as i32
    }

    /// Exact conversion of a finite binary64 value.
    pub fn from_f64(v: f64) -> Result<Self, DyadicError> {
        if !v.is_finite() {
            return Err(DyadicError::NotFinite);
        }
        if v == 0.0 {
            return Ok(Dyadic::ZERO);
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i128 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (mant, exp2) = if biased == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1i128 << 52), biased - 1075)
        };
        // value = mant * 2^exp2
        if exp2 >= 0 {
            if exp2 > 74 {
                return Err(DyadicError::Overflow);
            }
            Ok(Dyadic::normalized(sign * (mant << exp2), 0))
        } else {
            let den = (-exp2) as u64;
            let tz = (mant.trailing_zeros() as u64).min(den);
            let e = den - tz;
            if e > DEFAULT_EXPONENT_LIMIT as u64 {
                return Err(DyadicError::ExponentLimit {
                    exponent: e,
                    limit: DEFAULT_EXPONENT_LIMIT,
                });
            }
            Ok(Dyadic {
                mantissa: sign * (mant >> tz),
                exponent: e as u32,
            })
        }
    }

    /// Nearest binary64 (a single rounding).
    pub fn to_f64(&self) -> f64 {
        if self.mantissa == 0 {
            return 0.0;
        }
        let m = self.mantissa as f64;
        // split the scaling so 2^-e never underflows for e <= 128
        let e = self.exponent as i32;
        m * 2f64.powi(-e.min(1000))
    }

    pub fn checked_add(self, rhs: Dyadic) -> Result<Dyadic, DyadicError> {
        self.checked_add_with_limit(rhs, DEFAULT_EXPONENT_LIMIT)
    }

    pub fn checked_add_with_limit(self, rhs: Dyadic, limit: u32) -> Result<Dyadic, DyadicError> {
        let (a, b, e) = align(self, rhs)?;
        let sum = a.checked_add(b).ok_or(DyadicError::Overflow)?;
        Dyadic::new_with_limit(sum, e, limit)
    }

    pub fn checked_sub(self, rhs: Dyadic) -> Result<Dyadic, DyadicError> {
        self.checked_add(-rhs)
    }

    pub fn checked_mul(self, rhs: Dyadic) -> Result<Dyadic, DyadicError> {
        self.checked_mul_with_limit(rhs, DEFAULT_EXPONENT_LIMIT)
    }

    pub fn checked_mul_with_limit(self, rhs: Dyadic, limit: u32) -> Result<Dyadic, DyadicError> {
        let m = self
            .mantissa
            .checked_mul(rhs.mantissa)
            .ok_or(DyadicError::Overflow)?;
        let e = self.exponent as u64 + rhs.exponent as u64;
        if e > u32::MAX as u64 {
            return Err(DyadicError::ExponentLimit { exponent: e, limit });
        }
        Dyadic::new_with_limit(m, e as u32, limit)
    }

    /// Multiply by `2^k` (k may be negative).
    pub fn mul_pow2(self, k: i64) -> Result<Dyadic, DyadicError> {
        if self.mantissa == 0 {
            return Ok(Dyadic::ZERO);
        }
        let e = self.exponent as i64 - k;
        if e >= 0 {
            if e > DEFAULT_EXPONENT_LIMIT as i64 {
                return Err(DyadicError::ExponentLimit {
                    exponent: e as u64,
                    limit: DEFAULT_EXPONENT_LIMIT,
                });
            }
            Ok(Dyadic::normalized(self.mantissa, e as u32))
        } else {
            let m = checked_shl(self.mantissa, (-e) as u32).ok_or(DyadicError::Overflow)?;
            Ok(Dyadic::from_int(m))
        }
    }

    /// `floor(self)` as an integer.
    pub fn floor(&self) -> i128 {
        if self.exponent == 0 {
            self.mantissa
        } else if self.exponent >= 127 {
            if self.mantissa < 0 {
                -1
            } else {
                0
            }
        } else {
            self.mantissa >> self.exponent
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(&self) -> Dyadic {
        // exact: floor is an integer with exponent 0
        self.checked_sub(Dyadic::from_int(self.floor()))
            .expect("fractional part of a dyadic is representable")
    }

    pub fn abs(self) -> Dyadic {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    pub fn min(self, other: Dyadic) -> Dyadic {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Dyadic) -> Dyadic {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub(crate) fn to_bigint_scaled(self, exponent: u32) -> BigInt {
        debug_assert!(exponent >= self.exponent);
        BigInt::from(self.mantissa) << (exponent - self.exponent) as usize
    }
}

fn checked_shl(v: i128, s: u32) -> Option<i128> {
    if v == 0 {
        return Some(0);
    }
    if s >= 127 {
        return None;
    }
    let r = v << s;
    if r >> s == v {
        Some(r)
    } else {
        None
    }
}

/// Mantissas of `a` and `b` rescaled to the common exponent.
fn align(a: Dyadic, b: Dyadic) -> Result<(i128, i128, u32), DyadicError> {
    let e = a.exponent.max(b.exponent);
    let am = checked_shl(a.mantissa, e - a.exponent).ok_or(DyadicError::Overflow)?;
    let bm = checked_shl(b.mantissa, e - b.exponent).ok_or(DyadicError::Overflow)?;
    Ok((am, bm, e))
}

/// Exact sign of `a·b − c·d`.
pub fn cmp_products(a: Dyadic, b: Dyadic, c: Dyadic, d: Dyadic) -> Ordering {
    if let (Ok(ab), Ok(cd)) = (a.checked_mul(b), c.checked_mul(d)) {
        if let Ok(diff) = ab.checked_sub(cd) {
            return diff.mantissa.cmp(&0);
        }
    }
    let e = a.exponent + b.exponent;
    let f = c.exponent + d.exponent;
    let common = e.max(f);
    let ab = BigInt::from(a.mantissa) * BigInt::from(b.mantissa);
    let cd = BigInt::from(c.mantissa) * BigInt::from(d.mantissa);
    let ab = ab << (common - e) as usize;
    let cd = cd << (common - f) as usize;
    ab.cmp(&cd)
}

impl std::ops::Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exponent == other.exponent {
            return self.mantissa.cmp(&other.mantissa);
        }
        let s1 = self.mantissa.signum();
        let s2 = other.mantissa.signum();
        if s1 != s2 {
            return s1.cmp(&s2);
        }
        let e = self.exponent.max(other.exponent);
        match (
            checked_shl(self.mantissa, e - self.exponent),
            checked_shl(other.mantissa, e - other.exponent),
        ) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => {
                let a = self.to_bigint_scaled(e);
                let b = other.to_bigint_scaled(e);
                a.cmp(&b)
            }
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<(i128, u32)> for Dyadic {
    type Error = DyadicError;
    fn try_from((num, log2_den): (i128, u32)) -> Result<Self, Self::Error> {
        Dyadic::new(num, log2_den)
    }
}

impl From<Dyadic> for (i128, u32) {
    fn from(d: Dyadic) -> Self {
        (d.mantissa, d.exponent)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v as i128)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "{}/2^{}", self.mantissa, self.exponent)
        }
    }
}

impl FromStr for Dyadic {
    type Err = DyadicError;

    /// Accepts integers, `p/q` with `q` a power of two (`3/8`, `3/2^3`), and
    /// terminating decimals whose value is dyadic (`0.375`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || DyadicError::NotDyadic(s.to_string());
        if let Some((p, q)) = t.split_once('/') {
            let num: i128 = p.trim().parse().map_err(|_| bad())?;
            let q = q.trim();
            let log2 = if let Some(k) = q.strip_prefix("2^") {
                k.parse::<u32>().map_err(|_| bad())?
            } else {
                let den: u128 = q.parse().map_err(|_| bad())?;
                if den == 0 || !den.is_power_of_two() {
                    return Err(bad());
                }
                den.trailing_zeros()
            };
            return Dyadic::new(num, log2);
        }
        if let Some((ip, fp)) = t.split_once('.') {
            let neg = ip.starts_with('-');
            let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
            let num: i128 = digits.parse().map_err(|_| bad())?;
            let scale = fp.len() as u32;
            // num / 10^scale = num / (2^scale 5^scale); dyadic iff 5^scale | num
            let five = 5i128.checked_pow(scale).ok_or_else(bad)?;
            if num % five != 0 {
                return Err(bad());
            }
            let v = Dyadic::new(num / five, scale)?;
            return Ok(if neg { -v } else { v });
        }
        let v: i128 = t.parse().map_err(|_| bad())?;
        Ok(Dyadic::from_int(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(n: i128, e: u32) -> Dyadic {
        Dyadic::new(n, e).unwrap()
    }

    #[test]
    fn canonical_form() {
        let x = d(12, 4);
        assert_eq!(x.mantissa(), 3);
        assert_eq!(x.exponent(), 2);
        assert_eq!(d(0, 9), Dyadic::ZERO);
        assert_eq!(d(8, 3), Dyadic::ONE);
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = d(3, 2); // 3/4
        let b = d(1, 5); // 1/32
        assert_eq!(a.checked_add(b).unwrap(), d(25, 5));
        assert_eq!(a.checked_sub(b).unwrap(), d(23, 5));
        assert_eq!(a.checked_mul(b).unwrap(), d(3, 7));
        assert!(a > b);
        assert!(-a < b);
    }

    #[test]
    fn exponent_limit_is_an_error() {
        let tiny = Dyadic::pow2_neg(100).unwrap();
        assert!(matches!(
            tiny.checked_mul(tiny),
            Err(DyadicError::ExponentLimit { .. })
        ));
        assert!(Dyadic::new(1, 129).is_err());
        assert!(Dyadic::new_with_limit(1, 10, 8).is_err());
    }

    #[test]
    fn mantissa_overflow_is_an_error() {
        let big = Dyadic::from_int(i128::MAX / 2);
        assert_eq!(big.checked_mul(big), Err(DyadicError::Overflow));
    }

    #[test]
    fn f64_conversion() {
        let v = Dyadic::from_f64(0.1).unwrap();
        assert_eq!(v.to_f64(), 0.1);
        assert_eq!(Dyadic::from_f64(-0.75).unwrap(), d(-3, 2));
        assert_eq!(Dyadic::from_f64(6.0).unwrap(), Dyadic::from_int(6));
        assert!(Dyadic::from_f64(f64::NAN).is_err());
        assert!(Dyadic::from_f64(1e-300).is_err());
    }

    #[test]
    fn parse() {
        assert_eq!("3/8".parse::<Dyadic>().unwrap(), d(3, 3));
        assert_eq!("5/2^4".parse::<Dyadic>().unwrap(), d(5, 4));
        assert_eq!("0.375".parse::<Dyadic>().unwrap(), d(3, 3));
        assert_eq!("-1.5".parse::<Dyadic>().unwrap(), d(-3, 1));
        assert_eq!("7".parse::<Dyadic>().unwrap(), Dyadic::from_int(7));
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("0.1".parse::<Dyadic>().is_err());
    }

    #[test]
    fn floor_and_fract() {
        assert_eq!(d(13, 3).floor(), 1);
        assert_eq!(d(13, 3).fract(), d(5, 3));
        assert_eq!(d(-1, 2).floor(), -1);
        assert_eq!(d(-1, 2).fract(), d(3, 2));
    }

    #[test]
    fn product_comparison_falls_back_to_bigint() {
        let a = Dyadic::from_int(1i128 << 100);
        let b = Dyadic::from_int((1i128 << 100) + 1);
        assert_eq!(cmp_products(a, b, b, a), Ordering::Equal);
        assert_eq!(cmp_products(a, a, b, b), Ordering::Less);
        assert_eq!(
            cmp_products(d(1, 2), d(1, 2), d(1, 4), Dyadic::ONE),
            Ordering::Equal
        );
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (-(1i128 << 60)..(1i128 << 60), 0u32..60).prop_map(|(m, e)| d(m, e))
    }

    proptest! {
        #[test]
        fn add_sub_round_trip(a in arb_dyadic(), b in arb_dyadic()) {
            let s = a.checked_add(b).unwrap();
            prop_assert_eq!(s.checked_sub(b).unwrap(), a);
        }

        #[test]
        fn order_agrees_with_subtraction(a in arb_dyadic(), b in arb_dyadic()) {
            let diff = a.checked_sub(b).unwrap();
            prop_assert_eq!(a.cmp(&b), diff.signum().cmp(&0));
        }

        #[test]
        fn serde_round_trip(a in arb_dyadic()) {
            let s = serde_json::to_string(&a).unwrap();
            let back: Dyadic = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
