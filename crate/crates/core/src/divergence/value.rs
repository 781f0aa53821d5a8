use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A divergence in bits on the extended half-line: either a finite real or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DivergenceValue<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> DivergenceValue<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, DivergenceValue::Finite(_))
    }

    pub fn bits(&self) -> Option<T> {
        match *self {
            DivergenceValue::Finite(x) => Some(x),
            DivergenceValue::Infinite => None,
        }
    }

    /// Finite value or a panic with `what` as context; for call sites that
    /// have already established support inclusion.
    pub fn expect_finite(&self, what: &str) -> T {
        self.bits().unwrap_or_else(|| panic!("{what}: divergence is infinite"))
    }

    /// `self ≤ other + tol` in the extended order.
    pub fn le_within(&self, other: &Self, tol: T) -> bool {
        match (self, other) {
            (_, DivergenceValue::Infinite) => true,
            (DivergenceValue::Infinite, DivergenceValue::Finite(_)) => false,
            (DivergenceValue::Finite(a), DivergenceValue::Finite(b)) => *a <= *b + tol,
        }
    }

    pub fn map(self, f: impl FnOnce(T) -> T) -> Self {
        match self {
            DivergenceValue::Finite(x) => DivergenceValue::Finite(f(x)),
            DivergenceValue::Infinite => DivergenceValue::Infinite,
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.bits().map_or(f64::INFINITY, |x| x.as_f64())
    }
}

impl<T: Real> PartialOrd for DivergenceValue<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (DivergenceValue::Infinite, DivergenceValue::Infinite) => Some(Ordering::Equal),
            (DivergenceValue::Infinite, _) => Some(Ordering::Greater),
            (_, DivergenceValue::Infinite) => Some(Ordering::Less),
            (DivergenceValue::Finite(a), DivergenceValue::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<T: Real> fmt::Display for DivergenceValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceValue::Finite(x) => write!(f, "{}", x.as_f64()),
            DivergenceValue::Infinite => f.write_str("+inf"),
        }
    }
}

// JSON form: {"bits": <number> | "+inf", "finite": <bool>}.
impl<T: Real> Serialize for DivergenceValue<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("DivergenceValue", 2)?;
        match self {
            DivergenceValue::Finite(x) => s.serialize_field("bits", &x.as_f64())?,
            DivergenceValue::Infinite => s.serialize_field("bits", "+inf")?,
        }
        s.serialize_field("finite", &self.is_finite())?;
        s.end()
    }
}

impl<'de, T: Real> Deserialize<'de> for DivergenceValue<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Bits {
            Number(f64),
            Text(String),
        }
        #[derive(Deserialize)]
        struct Raw {
            bits: Bits,
            finite: bool,
        }
        let raw = Raw::deserialize(deserializer)?;
        match (raw.bits, raw.finite) {
            (Bits::Number(x), true) if x.is_finite() => Ok(DivergenceValue::Finite(T::lit(x))),
            (Bits::Text(t), false) if t == "+inf" => Ok(DivergenceValue::Infinite),
            _ => Err(de::Error::custom("inconsistent divergence value")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let f: DivergenceValue<f64> = DivergenceValue::Finite(0.5);
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"bits":0.5,"finite":true}"#);
        let i: DivergenceValue<f64> = DivergenceValue::Infinite;
        assert_eq!(serde_json::to_string(&i).unwrap(), r#"{"bits":"+inf","finite":false}"#);
        for v in [f, i] {
            let back: DivergenceValue<f64> = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
            assert_eq!(back, v);
        }
        assert!(serde_json::from_str::<DivergenceValue<f64>>(r#"{"bits":1.0,"finite":false}"#).is_err());
    }

    #[test]
    fn extended_order() {
        let one = DivergenceValue::Finite(1.0);
        let inf = DivergenceValue::<f64>::Infinite;
        assert!(one < inf);
        assert!(one.le_within(&inf, 0.0));
        assert!(!inf.le_within(&one, 1e9));
        assert!(inf.le_within(&inf, 0.0));
        assert!(DivergenceValue::Finite(1.0 + 1e-10).le_within(&one, 1e-9));
    }
}
