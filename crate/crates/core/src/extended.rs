use std::fmt;
use std::ops::Add;

use crate::scalar::Scalar;

/// A scalar extended with the infinities used by factor functions.
///
/// Variant order gives `-∞ < finite < +∞`. Packing code only ever produces
/// `NegInf`; covering objectives only `PosInf`. Should the two meet in a sum,
/// `NegInf` wins.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedValue<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Scalar> ExtendedValue<T> {
    pub fn zero() -> Self {
        ExtendedValue::Finite(T::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedValue::Finite(_))
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            ExtendedValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Adds a finite scalar; infinities absorb.
    pub fn plus(&self, rhs: &T) -> Self {
        match self {
            ExtendedValue::Finite(v) => ExtendedValue::Finite(v.clone() + rhs.clone()),
            other => other.clone(),
        }
    }

    pub fn add_ref(&self, rhs: &Self) -> Self {
        use ExtendedValue::*;
        match (self, rhs) {
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
            (Finite(a), Finite(b)) => Finite(a.clone() + b.clone()),
        }
    }
}

impl<T: Scalar> Add for ExtendedValue<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl<T: Scalar> From<T> for ExtendedValue<T> {
    fn from(v: T) -> Self {
        ExtendedValue::Finite(v)
    }
}

impl<T: fmt::Display> fmt::Display for ExtendedValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::NegInf => f.write_str("-inf"),
            ExtendedValue::Finite(v) => write!(f, "{v}"),
            ExtendedValue::PosInf => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::ExtendedValue::*;

    #[test]
    fn ordering_and_absorption() {
        assert!(NegInf < Finite(-1_000_000i64));
        assert!(Finite(5i64) < PosInf);
        assert_eq!(NegInf + Finite(3i64), NegInf);
        assert_eq!(Finite(2i64) + Finite(3), Finite(5));
        assert_eq!(std::cmp::max(NegInf, Finite(4i64)), Finite(4));
        assert_eq!(PosInf.plus(&1i64), PosInf);
        assert_eq!(NegInf::<i64>.to_string(), "-inf");
    }
}
