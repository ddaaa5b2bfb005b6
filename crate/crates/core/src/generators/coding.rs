//! Element-based generation that carries its whole history inside each
//! output: the output is a codeword from the cofinal subset of the current
//! guess, at a position that encodes the prefix seen so far.

use std::sync::Arc;

use super::cofinal::CofinalSystem;
use super::incremental::{IdentifierMode, IncrementalIdentifier};
use super::{Generator, Output, OutputMode};
use crate::domain::{Collection, Element, ProbePolicy};
use crate::error::{Error, Result};

/// Cantor pairing `(u + n)(u + n + 1)/2 + n`.
pub fn pair(u: &Element, n: &Element) -> Element {
    let w = u + n;
    &(&w * &w.succ()).div_rem_u64(2).0 + n
}

/// Inverse of [`pair`].
pub fn unpair(z: &Element) -> (Element, Element) {
    let w = z.mul_u64(8).succ().isqrt().pred().expect("sqrt >= 1").div_rem_u64(2).0;
    let t = (&w * &w.succ()).div_rem_u64(2).0;
    let n = z - &t;
    let u = &w - &n;
    (u, n)
}

/// `code(ε) = 0`, `code(σ·x) = pair(code(σ), x) + 1`.
pub fn seq_encode(seq: &[Element]) -> Element {
    seq.iter().fold(Element::ZERO, |code, x| pair(&code, x).succ())
}

pub fn seq_decode(code: &Element) -> Vec<Element> {
    let mut out = Vec::new();
    let mut c = code.clone();
    while let Some(prev) = c.pred() {
        let (u, x) = unpair(&prev);
        out.push(x);
        c = u;
    }
    out.reverse();
    out
}

/// Rounds after which a coding run stops by default.
pub const DEFAULT_CODING_ROUNDS: usize = 24;

/// The codeword generator. Its only state is the previous output.
pub struct CodingGenerator {
    cofinal: Arc<CofinalSystem>,
    learner: IncrementalIdentifier,
    last: Element,
    rounds: usize,
    max_rounds: usize,
}

/// A decoded codeword.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub index: usize,
    pub position: Element,
    pub prefix: Vec<Element>,
    pub counter: Element,
}

impl CodingGenerator {
    pub fn new(collection: &Collection, policy: ProbePolicy, max_rounds: usize) -> Result<Self> {
        let cofinal = CofinalSystem::new(collection, policy.clone())?;
        if cofinal.tail()?.is_none() {
            return Err(Error::DecodeFailure("cofinal subsets have no periodic tail".into()));
        }
        let learner = IncrementalIdentifier::new(collection, IdentifierMode::Approximate, &policy)?;
        let first = learner.current();
        let start = cofinal.nth(first, &pair(&Element::ZERO, &Element::ONE))?;
        Ok(CodingGenerator { cofinal, learner, last: start, rounds: 0, max_rounds })
    }

    pub fn cofinal(&self) -> &Arc<CofinalSystem> {
        &self.cofinal
    }

    pub fn last(&self) -> &Element {
        &self.last
    }

    /// Recovers the guess, prefix and counter behind a codeword.
    pub fn decode(&self, s: &Element) -> Result<Decoded> {
        for index in 0..self.cofinal.len() {
            if let Some(position) = self.cofinal.position(index, s)? {
                let (code, counter) = unpair(&position);
                return Ok(Decoded { index, prefix: seq_decode(&code), position, counter });
            }
        }
        Err(Error::DecodeFailure(format!("{} is not a codeword", s.short_repr())))
    }

    /// One round as a pure function of the previous output.
    pub fn next_codeword(&self, previous: &Element, x: &Element) -> Result<(Element, usize, Vec<Element>)> {
        let decoded = self.decode(previous)?;
        let mut prefix = decoded.prefix;
        prefix.push(x.clone());
        let guess = self.learner.replay(&prefix);
        let code = seq_encode(&prefix);
        let floor = previous.clone().max(x.clone());
        let mut n = Element::ZERO;
        loop {
            let s = self.cofinal.nth(guess, &pair(&code, &n))?;
            if s > floor {
                return Ok((s, guess, prefix));
            }
            n = n.succ();
        }
    }
}

impl Generator for CodingGenerator {
    fn mode(&self) -> OutputMode {
        OutputMode::Element
    }
    fn name(&self) -> String {
        "coding".into()
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        if self.rounds >= self.max_rounds {
            return Err(Error::SizeLimit { n: self.rounds + 1, max: self.max_rounds });
        }
        let (s, _, _) = self.next_codeword(&self.last, x)?;
        self.last = s.clone();
        self.rounds += 1;
        Ok(Output::Element(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    #[test]
    fn pairing_matches_the_diagonal_walk() {
        // Walk the diagonals u + n = 0, 1, 2, ... with n increasing.
        let mut z = 0u64;
        for d in 0..40u64 {
            for n in 0..=d {
                let (u, n) = (e(d - n), e(n));
                assert_eq!(pair(&u, &n), e(z));
                assert_eq!(unpair(&e(z)), (u, n));
                z += 1;
            }
        }
    }

    #[test]
    fn sequences_round_trip() {
        assert_eq!(seq_encode(&[]), e(0));
        assert_eq!(seq_encode(&[e(0)]), e(1));
        assert_eq!(seq_encode(&[e(1)]), e(3));
        let seq: Vec<Element> = [5, 0, 17, 3, 3, 9].map(e).to_vec();
        assert_eq!(seq_decode(&seq_encode(&seq)), seq);
        let big = Element::pow2(300);
        assert_eq!(unpair(&pair(&big, &e(7))), (big, e(7)));
    }
}
