use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;
use std::sync::Arc;

use dashu_int::ops::{BitTest, PowerOfTwo, SquareRoot};
use dashu_int::UBig;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A natural number of arbitrary size.
///
/// Values that fit in a `u64` are stored inline; larger values share a heap
/// allocated big integer, so cloning is always cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Element(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(u64),
    // Invariant: strictly greater than u64::MAX.
    Big(Arc<UBig>),
}

impl Element {
    pub const ZERO: Element = Element(Repr::Small(0));
    pub const ONE: Element = Element(Repr::Small(1));

    pub const fn new(value: u64) -> Self {
        Element(Repr::Small(value))
    }

    pub fn from_ubig(value: UBig) -> Self {
        match u64::try_from(&value) {
            Ok(v) => Element(Repr::Small(v)),
            Err(_) => Element(Repr::Big(Arc::new(value))),
        }
    }

    pub fn to_ubig(&self) -> UBig {
        match &self.0 {
            Repr::Small(v) => UBig::from(*v),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self.0 {
            Repr::Small(v) => Some(v),
            Repr::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn succ(&self) -> Self {
        self.add_u64(1)
    }

    pub fn pred(&self) -> Option<Self> {
        self.checked_sub(&Element::ONE)
    }

    pub fn add_u64(&self, rhs: u64) -> Self {
        match &self.0 {
            Repr::Small(v) => match v.checked_add(rhs) {
                Some(s) => Element::new(s),
                None => Element::from_ubig(UBig::from(*v) + UBig::from(rhs)),
            },
            Repr::Big(b) => Element::from_ubig(&**b + UBig::from(rhs)),
        }
    }

    pub fn checked_sub(&self, rhs: &Element) -> Option<Self> {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => a.checked_sub(*b).map(Element::new),
            (Repr::Small(_), Repr::Big(_)) => None,
            _ => {
                if self < rhs {
                    None
                } else {
                    Some(Element::from_ubig(self.to_ubig() - rhs.to_ubig()))
                }
            }
        }
    }

    /// `self - rhs`, clamped at zero.
    pub fn saturating_sub(&self, rhs: &Element) -> Self {
        self.checked_sub(rhs).unwrap_or(Element::ZERO)
    }

    pub fn mul_u64(&self, rhs: u64) -> Self {
        match &self.0 {
            Repr::Small(v) => match v.checked_mul(rhs) {
                Some(p) => Element::new(p),
                None => Element::from_ubig(UBig::from(*v) * UBig::from(rhs)),
            },
            Repr::Big(b) => Element::from_ubig(&**b * UBig::from(rhs)),
        }
    }

    /// Quotient and remainder by a nonzero machine word.
    pub fn div_rem_u64(&self, rhs: u64) -> (Self, u64) {
        assert!(rhs != 0, "division by zero");
        match &self.0 {
            Repr::Small(v) => (Element::new(v / rhs), v % rhs),
            Repr::Big(b) => {
                let d = UBig::from(rhs);
                let q = &**b / &d;
                let r = &**b % &d;
                (Element::from_ubig(q), u64::try_from(&r).expect("remainder fits"))
            }
        }
    }

    pub fn rem_u64(&self, rhs: u64) -> u64 {
        match &self.0 {
            Repr::Small(v) => v % rhs,
            Repr::Big(_) => self.div_rem_u64(rhs).1,
        }
    }

    pub fn div_rem(&self, rhs: &Element) -> (Self, Self) {
        assert!(!rhs.is_zero(), "division by zero");
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => (Element::new(a / b), Element::new(a % b)),
            _ => {
                let (a, b) = (self.to_ubig(), rhs.to_ubig());
                (Element::from_ubig(&a / &b), Element::from_ubig(&a % &b))
            }
        }
    }

    /// Number of significant bits; zero has length 0.
    pub fn bit_len(&self) -> usize {
        match &self.0 {
            Repr::Small(v) => (64 - v.leading_zeros()) as usize,
            Repr::Big(b) => b.bit_len(),
        }
    }

    pub fn is_power_of_two(&self) -> bool {
        match &self.0 {
            Repr::Small(v) => v.is_power_of_two(),
            Repr::Big(b) => b.is_power_of_two(),
        }
    }

    /// `2^exp`.
    pub fn pow2(exp: usize) -> Self {
        if exp < 64 {
            Element::new(1u64 << exp)
        } else {
            Element::from_ubig(UBig::ONE << exp)
        }
    }

    /// Floor of the square root.
    pub fn isqrt(&self) -> Self {
        match &self.0 {
            Repr::Small(v) => {
                let mut r = (*v as f64).sqrt() as u64;
                while r.checked_mul(r).map_or(true, |sq| sq > *v) {
                    r -= 1;
                }
                while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= *v) {
                    r += 1;
                }
                Element::new(r)
            }
            Repr::Big(b) => Element::from_ubig(b.sqrt()),
        }
    }

    /// Short, stable rendering: the decimal form for moderate values and a
    /// digest otherwise.
    pub fn short_repr(&self) -> String {
        if self.bit_len() <= 192 {
            return self.to_string();
        }
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.to_ubig().to_be_bytes());
        let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
        format!("big[{}b:{hex}]", self.bit_len())
    }
}

impl Default for Element {
    fn default() -> Self {
        Element::ZERO
    }
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            (Repr::Small(_), Repr::Big(_)) => Ordering::Less,
            (Repr::Big(_), Repr::Small(_)) => Ordering::Greater,
            (Repr::Big(a), Repr::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        match rhs.0 {
            Repr::Small(v) => self.add_u64(v),
            Repr::Big(_) => Element::from_ubig(self.to_ubig() + rhs.to_ubig()),
        }
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.checked_sub(rhs).expect("subtraction underflow on naturals")
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        match rhs.0 {
            Repr::Small(v) => self.mul_u64(v),
            Repr::Big(_) => Element::from_ubig(self.to_ubig() * rhs.to_ubig()),
        }
    }
}

impl From<u64> for Element {
    fn from(v: u64) -> Self {
        Element::new(v)
    }
}

impl From<u32> for Element {
    fn from(v: u32) -> Self {
        Element::new(v as u64)
    }
}

impl From<usize> for Element {
    fn from(v: usize) -> Self {
        Element::new(v as u64)
    }
}

impl From<UBig> for Element {
    fn from(v: UBig) -> Self {
        Element::from_ubig(v)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => write!(f, "{v}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.short_repr())
    }
}

impl FromStr for Element {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Element::new(v));
        }
        UBig::from_str_radix(s, 10).map(Element::from_ubig).map_err(|e| format!("invalid natural number {s:?}: {e}"))
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Repr::Small(v) => serializer.serialize_u64(v),
            Repr::Big(_) => serializer.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ElementVisitor;
        impl Visitor<'_> for ElementVisitor {
            type Value = Element;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a natural number or a decimal string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Element, E> {
                Ok(Element::new(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Element, E> {
                u64::try_from(v).map(Element::new).map_err(|_| E::custom("negative numbers are not naturals"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Element, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_any(ElementVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_and_big_order_consistently() {
        let max = Element::new(u64::MAX);
        let over = max.succ();
        assert!(over > max);
        assert_eq!(over.to_string(), "18446744073709551616");
        assert_eq!(over.pred().unwrap(), max);
        assert_eq!(over.as_u64(), None);
        assert_eq!((&over - &Element::ONE).as_u64(), Some(u64::MAX));
    }

    #[test]
    fn isqrt_matches_exhaustive_search() {
        for v in 0u64..2000 {
            let r = Element::new(v).isqrt().as_u64().unwrap();
            assert!(r * r <= v && (r + 1) * (r + 1) > v);
        }
        let big = &Element::pow2(300) * &Element::pow2(300);
        assert_eq!(big.isqrt(), Element::pow2(300));
    }

    #[test]
    fn json_accepts_numbers_and_strings() {
        let e: Element = serde_json::from_str("\"340282366920938463463374607431768211456\"").unwrap();
        assert_eq!(e, Element::pow2(128));
        assert_eq!(serde_json::to_string(&Element::new(7)).unwrap(), "7");
        let back: Element = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn powers_of_two_detected_across_widths() {
        assert!(Element::pow2(70).is_power_of_two());
        assert!(!Element::pow2(70).succ().is_power_of_two());
        assert_eq!(Element::pow2(70).bit_len(), 71);
        assert_eq!(Element::ZERO.bit_len(), 0);
    }
}
