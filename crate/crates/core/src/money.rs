//! Exact currency with two fractional digits.
//!
//! Amounts are stored as integer cents. Every conversion from a real number
//! (config values, percentage updates) is evaluated on the exact binary value
//! of the inputs and rounded half-to-even to the nearest cent, so results do
//! not depend on platform floating-point behaviour.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MoneyError {
    #[error("amount {0} is not a finite number")]
    NotFinite(f64),
    #[error("amount {0} is out of the representable range")]
    OutOfRange(String),
}

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    /// Nearest `f64` to the decimal amount. Used only for reporting and for
    /// feeding utilities; accounting stays in cents.
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// Converts a real amount to cents, rounding half-to-even.
    pub fn from_f64(amount: f64) -> Result<Self, MoneyError> {
        let exact = BigRational::from_f64(amount).ok_or(MoneyError::NotFinite(amount))?;
        let cents = round_half_even(&(exact * BigRational::from_integer(BigInt::from(100))));
        cents
            .to_i64()
            .map(Money)
            .ok_or_else(|| MoneyError::OutOfRange(amount.to_string()))
    }

    /// `self * (1 + alpha * beta / 100)`, rounded half-to-even to the cent and
    /// clipped at zero.
    ///
    /// Panics if `alpha` or `beta` is not finite; callers validate actions
    /// before they reach the ledger.
    pub fn scaled_by_percent(self, alpha: f64, beta: f64) -> Money {
        let alpha = BigRational::from_f64(alpha).expect("finite alpha");
        let beta = BigRational::from_f64(beta).expect("finite beta");
        let hundred = BigRational::from_integer(BigInt::from(100));
        let factor = (hundred.clone() + alpha * beta) / hundred;
        let exact = BigRational::from_integer(BigInt::from(self.0)) * factor;
        let rounded = round_half_even(&exact);
        if rounded.is_negative() {
            return Money::ZERO;
        }
        Money(rounded.to_i64().unwrap_or(i64::MAX))
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

/// Rounds an exact rational to the nearest integer, ties to even.
pub(crate) fn round_half_even(value: &BigRational) -> BigInt {
    let (floor, rem) = value.numer().div_mod_floor(value.denom());
    // rem in [0, denom)
    let twice = rem * BigInt::from(2);
    match twice.cmp(value.denom()) {
        std::cmp::Ordering::Less => floor,
        std::cmp::Ordering::Greater => floor + BigInt::one(),
        std::cmp::Ordering::Equal => {
            if floor.is_even() {
                floor
            } else {
                floor + BigInt::one()
            }
        }
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = f64::deserialize(deserializer)?;
        Money::from_f64(raw).map_err(serde::de::Error::custom)
    }
}

impl Zero for Money {
    fn zero() -> Self {
        Money::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn percent_update_examples() {
        let p = Money::from_cents(10_000);
        assert_eq!(p.scaled_by_percent(1.0, 25.0), Money::from_cents(12_500));
        assert_eq!(p.scaled_by_percent(0.0, 25.0), p);
        assert_eq!(Money::ZERO.scaled_by_percent(-1.0, 25.0), Money::ZERO);
        assert_eq!(p.scaled_by_percent(-1.0, 400.0), Money::ZERO);
    }

    #[test]
    fn ties_round_to_even() {
        // 1 cent * 1.5 = 1.5 -> 2; 1 cent * 2.5 -> 2
        assert_eq!(Money::from_cents(1).scaled_by_percent(0.5, 100.0), Money::from_cents(2));
        assert_eq!(Money::from_cents(1).scaled_by_percent(1.0, 150.0), Money::from_cents(2));
        assert_eq!(Money::from_f64(0.125).unwrap(), Money::from_cents(12));
        assert_eq!(Money::from_f64(0.375).unwrap(), Money::from_cents(38));
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(Money::from_cents(11_250).to_string(), "112.50");
        assert_eq!(Money::from_cents(-5).to_string(), "-0.05");
        assert_eq!(Money::from_f64(62.5).unwrap(), Money::from_cents(6_250));
        assert!(Money::from_f64(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn f64_round_trip(cents in -1_000_000_000i64..1_000_000_000) {
            let m = Money::from_cents(cents);
            prop_assert_eq!(Money::from_f64(m.to_f64()).unwrap(), m);
        }
    }
}
