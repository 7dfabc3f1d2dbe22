//! Exact half-integers.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A value `j` in `{..., -1/2, 0, 1/2, 1, ...}`, stored as the integer `2j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: i32) -> Self {
        Self { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        Self { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// `self` as an integer, if it is one.
    pub fn as_int(self) -> Option<i32> {
        self.is_integer().then_some(self.twice / 2)
    }

    pub fn abs(self) -> Self {
        Self {
            twice: self.twice.abs(),
        }
    }

    /// Whether `self` and `other` differ by an integer.
    pub fn same_parity(self, other: HalfInt) -> bool {
        (self.twice - other.twice) % 2 == 0
    }

    /// `2j + 1`, the dimension of the spin-`j` representation.
    pub fn dim(self) -> usize {
        (self.twice + 1) as usize
    }

    /// Projections `-j, -j+1, ..., j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> + Clone {
        (-self.twice..=self.twice)
            .step_by(2)
            .map(HalfInt::from_twice)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl PartialOrd for HalfInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HalfInt {
    fn cmp(&self, other: &Self) -> Ordering {
        self.twice.cmp(&other.twice)
    }
}

impl From<i32> for HalfInt {
    fn from(n: i32) -> Self {
        HalfInt::from_int(n)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3"`, `"-2"`, `"7/2"`, `"-1/2"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::ParseHalfInt(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            None => t.parse::<i32>().map(HalfInt::from_int).map_err(|_| bad()),
            Some((num, den)) => {
                let num: i32 = num.trim().parse().map_err(|_| bad())?;
                match den.trim() {
                    "2" => Ok(HalfInt::from_twice(num)),
                    "1" => Ok(HalfInt::from_int(num)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i32),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(n) => Ok(HalfInt::from_int(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_print() {
        assert_eq!("7/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(7));
        assert_eq!("-1/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(-1));
        assert_eq!("3".parse::<HalfInt>().unwrap(), HalfInt::from_int(3));
        assert_eq!("6/2".parse::<HalfInt>().unwrap(), HalfInt::from_int(3));
        assert_eq!(HalfInt::from_twice(-5).to_string(), "-5/2");
        assert_eq!(HalfInt::from_int(-4).to_string(), "-4");
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("x".parse::<HalfInt>().is_err());
    }

    #[test]
    fn projections_cover_range() {
        let s = HalfInt::from_twice(3);
        let ms: Vec<_> = s.projections().map(|m| m.twice()).collect();
        assert_eq!(ms, vec![-3, -1, 1, 3]);
        assert_eq!(s.dim(), 4);
    }

    proptest! {
        #[test]
        fn text_roundtrip(t in -80i32..=80) {
            let h = HalfInt::from_twice(t);
            prop_assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
        }

        #[test]
        fn arithmetic_is_exact(a in -80i32..=80, b in -80i32..=80) {
            let (x, y) = (HalfInt::from_twice(a), HalfInt::from_twice(b));
            prop_assert_eq!((x + y) - y, x);
            prop_assert_eq!((x + y).value(), x.value() + y.value());
            prop_assert_eq!(x < y, x.value() < y.value());
        }
    }
}
