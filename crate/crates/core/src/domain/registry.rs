//! Named builtins from which opaque sets are loaded.

use std::sync::Arc;

use serde_json::{json, Value};

use super::setexpr::{Combinator, Combined, OpaqueSet, SetExpr};
use super::Element;
use crate::error::{Error, Result};

pub const BUILTINS: &[&str] =
    &["squares", "powers_of_two", "factorial_blocks", "and", "or", "minus", "cofinal", "zero_density_bin"];

/// Builds the opaque set registered under `name`.
pub fn build(name: &str, params: &Value) -> Result<SetExpr> {
    let set: Arc<dyn OpaqueSet> = match name {
        "squares" => Arc::new(Squares),
        "powers_of_two" => Arc::new(PowersOfTwo),
        "factorial_blocks" => Arc::new(FactorialBlocks),
        "and" | "or" | "minus" => {
            let side = |key: &str| -> Result<SetExpr> {
                let v = params.get(key).ok_or_else(|| Error::InvalidParams(format!("{name}: missing {key}")))?;
                serde_json::from_value(v.clone()).map_err(|e| Error::InvalidParams(e.to_string()))
            };
            let op = match name {
                "and" => Combinator::And,
                "or" => Combinator::Or,
                _ => Combinator::Minus,
            };
            Arc::new(Combined { op, left: side("left")?, right: side("right")? })
        }
        "cofinal" => Arc::new(crate::generators::cofinal::CofinalSet::from_params(params)?),
        "zero_density_bin" => Arc::new(crate::adversaries::ZeroDensityBin::from_params(params)?),
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    };
    Ok(SetExpr::Opaque(set))
}

/// Perfect squares `0, 1, 4, 9, ...`.
#[derive(Debug)]
pub struct Squares;

impl OpaqueSet for Squares {
    fn builtin(&self) -> &str {
        "squares"
    }
    fn params(&self) -> Value {
        json!({})
    }
    fn contains(&self, x: &Element) -> bool {
        let r = x.isqrt();
        &r * &r == *x
    }
    fn next_in(&self, from: &Element, limit: &Element) -> Option<Element> {
        let mut r = from.isqrt();
        if &r * &r < *from {
            r = r.succ();
        }
        Some(&r * &r).filter(|sq| sq < limit)
    }
    fn count_below(&self, n: &Element) -> Option<Element> {
        Some(match n.pred() {
            None => Element::ZERO,
            Some(m) => m.isqrt().succ(),
        })
    }
}

/// Powers of two `1, 2, 4, ...`.
#[derive(Debug)]
pub struct PowersOfTwo;

impl OpaqueSet for PowersOfTwo {
    fn builtin(&self) -> &str {
        "powers_of_two"
    }
    fn params(&self) -> Value {
        json!({})
    }
    fn contains(&self, x: &Element) -> bool {
        x.is_power_of_two()
    }
    fn next_in(&self, from: &Element, limit: &Element) -> Option<Element> {
        let p = if from.is_zero() || from.is_power_of_two() {
            from.clone().max(Element::ONE)
        } else {
            Element::pow2(from.bit_len())
        };
        Some(p).filter(|p| p < limit)
    }
    fn count_below(&self, n: &Element) -> Option<Element> {
        Some(match n.pred() {
            None => Element::ZERO,
            Some(m) => Element::new(m.bit_len() as u64),
        })
    }
}

/// The union over `r >= 1` of the intervals `((2r)!, (2r+1)!]`: a set whose
/// density ratios oscillate between near 0 and near 1.
#[derive(Debug)]
pub struct FactorialBlocks;

impl FactorialBlocks {
    // Consecutive intervals (lo, hi] = ((2r)!, (2r+1)!], paired with the
    // factorial preceding them.
    fn intervals() -> impl Iterator<Item = (Element, Element)> {
        let mut fact = Element::new(2);
        let mut k = 2u64;
        std::iter::from_fn(move || {
            let lo = fact.clone();
            let hi = fact.mul_u64(k + 1);
            fact = hi.mul_u64(k + 2);
            k += 2;
            Some((lo, hi))
        })
    }
}

impl OpaqueSet for FactorialBlocks {
    fn builtin(&self) -> &str {
        "factorial_blocks"
    }
    fn params(&self) -> Value {
        json!({})
    }
    fn contains(&self, x: &Element) -> bool {
        for (lo, hi) in FactorialBlocks::intervals() {
            if *x <= hi {
                return *x > lo;
            }
        }
        unreachable!()
    }
    fn next_in(&self, from: &Element, limit: &Element) -> Option<Element> {
        for (lo, hi) in FactorialBlocks::intervals() {
            if *from <= hi {
                let cand = if *from > lo { from.clone() } else { lo.succ() };
                return Some(cand).filter(|c| c < limit);
            }
            if hi >= *limit {
                return None;
            }
        }
        None
    }
    fn count_below(&self, n: &Element) -> Option<Element> {
        let mut total = Element::ZERO;
        for (lo, hi) in FactorialBlocks::intervals() {
            if *n <= lo.succ() {
                break;
            }
            // Members in (lo, hi] below n: lo+1 ..= min(hi, n-1).
            let top = hi.min(n.pred().expect("n > 0"));
            total = &total + &(&top - &lo);
        }
        Some(total)
    }
}
