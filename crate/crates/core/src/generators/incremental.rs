use serde::{Deserialize, Serialize};

use super::{Generator, Output, OutputMode};
use crate::domain::{almost_compare, AlmostOrder, Collection, Element, Language, ProbePolicy};
use crate::error::{Error, Result};

/// Relabeling of a finite collection in which every language comes before
/// the languages it is almost contained in (strictly, up to finite sets).
/// Ties keep the original order. Entry `p` is the original index at
/// position `p`.
pub fn topological_order(languages: &[Language], policy: &ProbePolicy) -> Result<Vec<usize>> {
    let n = languages.len();
    let mut preds = vec![0usize; n];
    let mut succs = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            match almost_compare(languages[i].expr(), languages[j].expr(), policy)? {
                AlmostOrder::Below => {
                    succs[i].push(j);
                    preds[j] += 1;
                }
                AlmostOrder::Above => {
                    succs[j].push(i);
                    preds[i] += 1;
                }
                _ => {}
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut done = vec![false; n];
    while order.len() < n {
        let next = (0..n)
            .find(|&i| !done[i] && preds[i] == 0)
            .ok_or_else(|| Error::InvalidParams("almost-containment is not acyclic".into()))?;
        done[next] = true;
        order.push(next);
        for &j in &succs[next] {
            preds[j] -= 1;
        }
    }
    Ok(order)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentifierMode {
    Exact,
    Approximate,
}

/// Index-based learner that starts at the first language of the relabeled
/// order and moves to the next one whenever the current language misses
/// the input.
#[derive(Clone, Debug)]
pub struct IncrementalIdentifier {
    languages: Vec<Language>,
    order: Vec<usize>,
    position: usize,
    mode: IdentifierMode,
}

impl IncrementalIdentifier {
    pub fn new(collection: &Collection, mode: IdentifierMode, policy: &ProbePolicy) -> Result<Self> {
        let languages = collection
            .languages()
            .ok_or_else(|| Error::InvalidParams("the identifier needs a finite collection".into()))?
            .to_vec();
        let order = topological_order(&languages, policy)?;
        Ok(IncrementalIdentifier { languages, order, position: 0, mode })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position in the relabeled order; never decreases.
    pub fn position(&self) -> usize {
        self.position
    }

    pub fn mode(&self) -> IdentifierMode {
        self.mode
    }

    /// Original index of the current guess.
    pub fn current(&self) -> usize {
        self.order[self.position]
    }

    pub fn reset(&mut self) {
        self.position = 0;
    }

    /// Advances on `x` and returns the original index of the new guess.
    pub fn observe(&mut self, x: &Element) -> usize {
        if !self.languages[self.current()].contains(x) {
            self.position = (self.position + 1).min(self.order.len() - 1);
        }
        self.current()
    }

    /// Guess after reading `prefix` from the initial state.
    pub fn replay(&self, prefix: &[Element]) -> usize {
        let mut fresh = self.clone();
        fresh.reset();
        for x in prefix {
            fresh.observe(x);
        }
        fresh.current()
    }
}

impl Generator for IncrementalIdentifier {
    fn mode(&self) -> OutputMode {
        OutputMode::Index
    }
    fn name(&self) -> String {
        format!("incremental({:?})", self.mode)
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        Ok(Output::Index(self.observe(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CellSystem, Structured};

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    #[test]
    fn smaller_languages_come_first() {
        let coll =
            Collection::finite(vec![Language::naturals(), Language::from_cells(CellSystem::residue(2), [0]).unwrap()])
                .unwrap();
        let mut id = IncrementalIdentifier::new(&coll, IdentifierMode::Exact, &ProbePolicy::default()).unwrap();
        assert_eq!(id.order(), &[1, 0]);
        assert_eq!(id.observe(&e(0)), 1);
        assert_eq!(id.observe(&e(1)), 0);
        assert_eq!(id.observe(&e(2)), 0);
        assert_eq!(id.replay(&[e(2), e(4)]), 1);
    }

    #[test]
    fn finite_variants_keep_their_order() {
        let c = Structured::from_cells(CellSystem::residue(3), [0]).unwrap();
        let with = |pts: &[u64]| {
            Language::structured(c.union(&Structured::finite(pts.iter().map(|&v| e(v))).unwrap()).unwrap()).unwrap()
        };
        let langs = vec![with(&[1]), with(&[2]), with(&[1, 2])];
        assert_eq!(topological_order(&langs, &ProbePolicy::default()).unwrap(), vec![0, 1, 2]);
    }
}
