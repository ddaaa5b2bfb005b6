use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::memoryless::CanonicalIntersection;
use super::{Generator, Output, OutputMode};
use crate::domain::{signature, Collection, Element, ProbePolicy, SetExpr};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowStrategy {
    /// Canonical intersection at the newest element.
    LastElement,
    /// Intersection of the languages containing the whole window.
    IntersectWindow,
}

/// Generator that sees only the last `w` distinct elements.
pub struct WindowGenerator {
    inner: CanonicalIntersection,
    w: usize,
    strategy: WindowStrategy,
    window: VecDeque<Element>,
    memo: HashMap<Vec<usize>, SetExpr>,
}

impl WindowGenerator {
    pub fn new(collection: &Collection, w: usize, strategy: WindowStrategy, policy: ProbePolicy) -> Result<Self> {
        if w == 0 {
            return Err(Error::InvalidParams("window size must be positive".into()));
        }
        Ok(WindowGenerator {
            inner: CanonicalIntersection::new(collection, policy)?,
            w,
            strategy,
            window: VecDeque::new(),
            memo: HashMap::new(),
        })
    }

    pub fn window(&self) -> &VecDeque<Element> {
        &self.window
    }

    /// Output for an arbitrary window of distinct elements, newest last.
    pub fn query(&mut self, window: &[Element]) -> Result<SetExpr> {
        let newest = window.last().ok_or_else(|| Error::InvalidParams("empty window".into()))?;
        match self.strategy {
            WindowStrategy::LastElement => self.inner.output_for(newest),
            WindowStrategy::IntersectWindow => {
                let langs = self.inner.languages();
                let mut sig = signature(langs, newest);
                for x in &window[..window.len() - 1] {
                    sig.retain(|&i| langs[i].contains(x));
                }
                if let Some(s) = self.memo.get(&sig) {
                    return Ok(s.clone());
                }
                let out = self.inner.for_signature(sig.clone())?;
                self.memo.insert(sig, out.clone());
                Ok(out)
            }
        }
    }
}

impl Generator for WindowGenerator {
    fn mode(&self) -> OutputMode {
        OutputMode::Set
    }
    fn name(&self) -> String {
        format!("window(w={},{:?})", self.w, self.strategy)
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        if self.window.contains(x) {
            return Err(Error::DuplicateInWindow(x.short_repr()));
        }
        self.window.push_back(x.clone());
        if self.window.len() > self.w {
            self.window.pop_front();
        }
        let snapshot: Vec<Element> = self.window.iter().cloned().collect();
        self.query(&snapshot).map(Output::Set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CellSystem, Language, Structured};

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    fn mod4() -> Collection {
        let sys = CellSystem::residue(4);
        Collection::finite(vec![
            Language::naturals(),
            Language::from_cells(sys.clone(), [0, 1]).unwrap(),
            Language::from_cells(sys, [0, 2]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn window_strategies_differ() {
        let mut last = WindowGenerator::new(&mod4(), 2, WindowStrategy::LastElement, ProbePolicy::default()).unwrap();
        let mut both =
            WindowGenerator::new(&mod4(), 2, WindowStrategy::IntersectWindow, ProbePolicy::default()).unwrap();
        last.step(&e(1)).unwrap();
        both.step(&e(1)).unwrap();
        let Output::Set(a) = last.step(&e(2)).unwrap() else { panic!() };
        let Output::Set(b) = both.step(&e(2)).unwrap() else { panic!() };
        let zero_two = Structured::from_cells(CellSystem::residue(4), [0, 2]).unwrap();
        assert!(a.as_structured().unwrap().set_eq(&zero_two).unwrap());
        // 1 and 2 share only the naturals.
        assert!(b.as_structured().unwrap().set_eq(&Structured::full(CellSystem::trivial())).unwrap());
    }

    #[test]
    fn duplicates_inside_the_window_are_rejected() {
        let mut g = WindowGenerator::new(&mod4(), 2, WindowStrategy::LastElement, ProbePolicy::default()).unwrap();
        g.step(&e(1)).unwrap();
        assert!(matches!(g.step(&e(1)), Err(Error::DuplicateInWindow(_))));
        let mut g = WindowGenerator::new(&mod4(), 1, WindowStrategy::LastElement, ProbePolicy::default()).unwrap();
        g.step(&e(1)).unwrap();
        g.step(&e(2)).unwrap();
        assert!(g.step(&e(1)).is_ok());
    }
}
