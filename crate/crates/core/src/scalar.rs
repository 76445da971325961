//! Scalar abstractions.
//!
//! Everything in this crate is exact. [`Scalar`] is an ordered ring with
//! integer rounding (enough for min-sum, the computation-tree DP and factor
//! evaluation); [`Field`] adds exact division and is required by the LP and
//! averaging code. Floating point types intentionally do not implement
//! either trait: argmax tie sets are only meaningful with exact equality.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Clone + Debug + Display + Ord + Num + Signed + FromStr + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;

    /// Largest integer not above `self`, saturating at the `i64` range.
    fn floor_i64(&self) -> i64;

    /// Smallest integer not below `self`, saturating at the `i64` range.
    fn ceil_i64(&self) -> i64;

    fn is_integral(&self) -> bool;

    /// `self * k` for a small integer multiplier.
    fn scale(&self, k: i64) -> Self {
        self.clone() * Self::from_i64(k)
    }
}

/// Scalars with exact division.
pub trait Field: Scalar {
    /// Exact quotient; `rhs` must be non-zero.
    fn ratio(&self, rhs: &Self) -> Self {
        self.clone() / rhs.clone()
    }
}

impl Scalar for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
    fn floor_i64(&self) -> i64 {
        *self
    }
    fn ceil_i64(&self) -> i64 {
        *self
    }
    fn is_integral(&self) -> bool {
        true
    }
}

fn saturate<I: ToPrimitive + Signed>(v: &I) -> i64 {
    v.to_i64()
        .unwrap_or(if v.is_negative() { i64::MIN } else { i64::MAX })
}

impl<I> Scalar for Ratio<I>
where
    I: Integer
        + Signed
        + Clone
        + Debug
        + Display
        + FromStr
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static,
{
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(I::from_i64(v).expect("i64 fits the integer type"))
    }
    fn floor_i64(&self) -> i64 {
        saturate(&self.floor().to_integer())
    }
    fn ceil_i64(&self) -> i64 {
        saturate(&self.ceil().to_integer())
    }
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

impl<I> Field for Ratio<I> where Ratio<I>: Scalar {}

/// Parses the textual form used by instance files: `"p/q"` or `"p"`.
pub fn parse_scalar<T: Scalar>(text: &str) -> Option<T> {
    let text = text.trim();
    if let Ok(v) = text.parse::<T>() {
        return Some(v);
    }
    // Integer-only scalars still accept "p/1" and exact quotients.
    let (p, q) = text.split_once('/')?;
    let p = p.trim().parse::<T>().ok()?;
    let q = q.trim().parse::<T>().ok()?;
    if q.is_zero() || !(p.clone() % q.clone()).is_zero() {
        return None;
    }
    Some(p / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn rounding() {
        assert_eq!(r(3, 2).floor_i64(), 1);
        assert_eq!(r(3, 2).ceil_i64(), 2);
        assert_eq!(r(-3, 2).floor_i64(), -2);
        assert_eq!(r(-3, 2).ceil_i64(), -1);
        assert_eq!(r(4, 2).floor_i64(), 2);
        assert!(r(4, 2).is_integral());
        assert!(!r(1, 3).is_integral());
    }

    #[test]
    fn canonical_text() {
        assert_eq!(r(2, 4).to_string(), "1/2");
        assert_eq!(r(6, 3).to_string(), "2");
        assert_eq!(r(-1, 2).to_string(), "-1/2");
        assert_eq!(parse_scalar::<BigRational>("3/6"), Some(r(1, 2)));
        assert_eq!(parse_scalar::<BigRational>("7"), Some(r(7, 1)));
        assert_eq!(parse_scalar::<BigRational>("1/0"), None);
        assert_eq!(parse_scalar::<i64>("4/2"), Some(2));
        assert_eq!(parse_scalar::<i64>("1/2"), None);
        assert_eq!(parse_scalar::<Ratio<i64>>("-2/8"), Some(Ratio::new(-1, 4)));
    }
}
