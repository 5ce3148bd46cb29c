//! Fixed-point decimals backed by arbitrary-precision integers.
//!
//! Ratios of large sequence terms are computed exactly and rounded once, so
//! every emitted digit is reproducible across platforms.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

/// A decimal `mantissa / 10^scale`.
#[derive(Clone, Debug)]
pub struct FixedDecimal {
    mantissa: BigInt,
    scale: u32,
}

fn pow10(exp: u32) -> BigInt {
    BigInt::from(10u32).pow(exp)
}

/// `n / d` rounded to the nearest integer, ties to even. `d` must be positive.
fn div_round_half_even(n: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_mod_floor(d);
    let twice: BigInt = &r << 1;
    match twice.cmp(d) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q.is_odd() {
                q + 1
            } else {
                q
            }
        }
    }
}

impl FixedDecimal {
    pub fn new(mantissa: impl Into<BigInt>, scale: u32) -> Self {
        Self {
            mantissa: mantissa.into(),
            scale,
        }
    }

    pub fn zero(scale: u32) -> Self {
        Self::new(BigInt::zero(), scale)
    }

    /// `numerator / denominator` rounded half-even to `digits` decimals.
    ///
    /// The quotient is formed by exact integer division; the remainder decides
    /// the final digit, so no intermediate truncation can bias the rounding.
    pub fn from_ratio(numerator: &BigUint, denominator: &BigUint, digits: u32) -> Self {
        assert!(!denominator.is_zero(), "zero denominator");
        let n = BigInt::from_biguint(Sign::Plus, numerator.clone()) * pow10(digits);
        let d = BigInt::from_biguint(Sign::Plus, denominator.clone());
        Self::new(div_round_half_even(&n, &d), digits)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn abs(&self) -> Self {
        Self::new(self.mantissa.abs(), self.scale)
    }

    /// Re-expresses the value with `scale` decimals, rounding half-even when
    /// digits are dropped.
    pub fn rescale(&self, scale: u32) -> Self {
        match scale.cmp(&self.scale) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => Self::new(&self.mantissa * pow10(scale - self.scale), scale),
            Ordering::Less => Self::new(
                div_round_half_even(&self.mantissa, &pow10(self.scale - scale)),
                scale,
            ),
        }
    }

    /// Nearest `f64`, via the standard library's correctly rounded parser.
    pub fn to_f64(&self) -> f64 {
        self.to_string()
            .parse()
            .expect("decimal rendering is always a valid float literal")
    }

    /// Decimal exponent of the leading digit (`value` lies in
    /// `[10^e, 10^(e+1))`). `None` for zero.
    fn leading_exponent(&self) -> Option<i64> {
        if self.mantissa.is_zero() {
            return None;
        }
        let len = self.mantissa.abs().to_str_radix(10).len() as i64;
        Some(len - 1 - self.scale as i64)
    }

    /// Rounds to `sig` significant digits (half-even) and renders the result
    /// the way the published tables do: trailing zeros trimmed, plain decimal
    /// notation down to `1e-5`, scientific notation (`7.63452e-6`) below.
    pub fn display_significant(&self, sig: u32) -> String {
        assert!(sig >= 1);
        let Some(exp) = self.leading_exponent() else {
            return "0".to_string();
        };
        // Keep `sig` digits: target scale = sig - 1 - exp, possibly negative.
        let target = sig as i64 - 1 - exp;
        let (mantissa, scale) = if target >= self.scale as i64 {
            (self.mantissa.clone(), self.scale as i64)
        } else {
            let drop = (self.scale as i64 - target) as u32;
            (div_round_half_even(&self.mantissa, &pow10(drop)), target)
        };
        let negative = mantissa.is_negative();
        let digits = mantissa.abs().to_str_radix(10);
        // Rounding may carry into a new leading digit (9.999995 -> 10.0000).
        let exp = digits.len() as i64 - 1 - scale;
        let digits = digits.trim_end_matches('0');
        let digits = if digits.is_empty() { "0" } else { digits };
        let sign = if negative { "-" } else { "" };

        if exp < -5 {
            let (head, tail) = digits.split_at(1);
            if tail.is_empty() {
                format!("{sign}{head}e{exp}")
            } else {
                format!("{sign}{head}.{tail}e{exp}")
            }
        } else {
            let (magnitude, scale) = if scale < 0 {
                (mantissa.abs() * pow10((-scale) as u32), 0)
            } else {
                (mantissa.abs(), scale as u32)
            };
            let text = Self::new(magnitude, scale).to_string();
            let text = if text.contains('.') {
                text.trim_end_matches('0').trim_end_matches('.').to_string()
            } else {
                text
            };
            format!("{sign}{text}")
        }
    }
}

impl fmt::Display for FixedDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let negative = self.mantissa.is_negative();
        let mut digits = self.mantissa.abs().to_str_radix(10);
        let scale = self.scale as usize;
        if scale > 0 && digits.len() <= scale {
            digits = format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits);
        }
        if negative {
            f.write_str("-")?;
        }
        if scale == 0 {
            f.write_str(&digits)
        } else {
            let (int, frac) = digits.split_at(digits.len() - scale);
            write!(f, "{int}.{frac}")
        }
    }
}

impl Serialize for FixedDecimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl PartialEq for FixedDecimal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FixedDecimal {}

impl PartialOrd for FixedDecimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedDecimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let scale = self.scale.max(other.scale);
        self.rescale(scale)
            .mantissa
            .cmp(&other.rescale(scale).mantissa)
    }
}

impl Sub for &FixedDecimal {
    type Output = FixedDecimal;

    fn sub(self, rhs: &FixedDecimal) -> FixedDecimal {
        let scale = self.scale.max(rhs.scale);
        FixedDecimal::new(
            self.rescale(scale).mantissa - rhs.rescale(scale).mantissa,
            scale,
        )
    }
}

impl Add for &FixedDecimal {
    type Output = FixedDecimal;

    fn add(self, rhs: &FixedDecimal) -> FixedDecimal {
        let scale = self.scale.max(rhs.scale);
        FixedDecimal::new(
            self.rescale(scale).mantissa + rhs.rescale(scale).mantissa,
            scale,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(m: i64, s: u32) -> FixedDecimal {
        FixedDecimal::new(m, s)
    }

    #[test]
    fn renders_fixed_point() {
        assert_eq!(dec(618034, 6).to_string(), "0.618034");
        assert_eq!(dec(-5, 3).to_string(), "-0.005");
        assert_eq!(dec(12, 0).to_string(), "12");
        assert_eq!(dec(0, 2).to_string(), "0.00");
    }

    #[test]
    fn ratio_rounds_half_even() {
        let r = |n: u32, d: u32, digits| {
            FixedDecimal::from_ratio(&BigUint::from(n), &BigUint::from(d), digits).to_string()
        };
        assert_eq!(r(1, 8, 2), "0.12");
        assert_eq!(r(3, 8, 2), "0.38");
        assert_eq!(r(1, 3, 4), "0.3333");
        assert_eq!(r(2, 3, 4), "0.6667");
    }

    #[test]
    fn significant_display_matches_table_style() {
        assert_eq!(dec(51879006, 8).display_significant(6), "0.51879");
        assert_eq!(dec(500000476846, 12).display_significant(6), "0.5");
        assert_eq!(dec(5000009537, 10).display_significant(6), "0.500001");
        assert_eq!(dec(1_527_794, 11).display_significant(6), "0.0000152779");
        assert_eq!(dec(763452083, 14).display_significant(6), "7.63452e-6");
        assert_eq!(dec(2_000_000, 20).display_significant(6), "2e-14");
        assert_eq!(dec(0, 4).display_significant(6), "0");
        assert_eq!(dec(-21212, 7).display_significant(6), "-0.0021212");
        assert_eq!(dec(9999996, 7).display_significant(6), "1");
        assert_eq!(dec(123456789, 0).display_significant(6), "123457000");
    }

    #[test]
    fn arithmetic_aligns_scales() {
        let a = dec(618034, 6);
        let b = dec(5436890, 7);
        assert_eq!((&a - &b).to_string(), "0.0743450");
        assert_eq!((&a + &b).to_string(), "1.1617230");
        assert!(a > b);
        assert_eq!(dec(5, 1), dec(500, 3));
    }

    #[test]
    fn rescale_down_rounds() {
        assert_eq!(dec(125, 3).rescale(2).to_string(), "0.12");
        assert_eq!(dec(135, 3).rescale(2).to_string(), "0.14");
        assert_eq!(dec(-135, 3).rescale(2).to_string(), "-0.14");
    }

    #[test]
    fn to_f64_is_nearest() {
        assert_eq!(dec(618034, 6).to_f64(), 0.618034);
        assert_eq!(dec(-1, 10).to_f64(), -1e-10);
    }
}
