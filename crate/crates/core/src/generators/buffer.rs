use super::memoryless::CanonicalIntersection;
use super::{Generator, Output, OutputMode};
use crate::domain::{Collection, Element, ProbePolicy};
use crate::error::Result;

/// Stored elements and the languages containing all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BufferState {
    pub stored: Vec<Element>,
    pub residual: Vec<usize>,
}

/// Generator with a buffer of at most `b` elements that are never evicted.
///
/// The output is the canonical intersection at `x` over the residual
/// languages. Afterwards `x` is stored when the buffer has room and storing
/// it strictly shrinks the residual.
pub struct BufferGenerator {
    inner: CanonicalIntersection,
    b: usize,
    state: BufferState,
}

impl BufferGenerator {
    pub fn new(collection: &Collection, b: usize, policy: ProbePolicy) -> Result<Self> {
        let inner = CanonicalIntersection::new(collection, policy)?;
        let residual = (0..inner.languages().len()).collect();
        Ok(BufferGenerator { inner, b, state: BufferState { stored: Vec::new(), residual } })
    }

    pub fn state(&self) -> &BufferState {
        &self.state
    }

    pub fn capacity(&self) -> usize {
        self.b
    }
}

impl Generator for BufferGenerator {
    fn mode(&self) -> OutputMode {
        OutputMode::Set
    }
    fn name(&self) -> String {
        format!("buffer(b={})", self.b)
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        let langs = self.inner.languages();
        let sig: Vec<usize> = self.state.residual.iter().copied().filter(|&i| langs[i].contains(x)).collect();
        let out = self.inner.for_signature(sig.clone())?;
        if self.state.stored.len() < self.b && sig.len() < self.state.residual.len() {
            self.state.stored.push(x.clone());
            self.state.residual = sig;
        }
        Ok(Output::Set(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CellSystem, Language};

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    #[test]
    fn stores_only_shrinking_elements() {
        let sys = CellSystem::residue(4);
        let coll = Collection::finite(vec![
            Language::naturals(),
            Language::from_cells(sys.clone(), [0, 1]).unwrap(),
            Language::from_cells(sys, [0, 2]).unwrap(),
        ])
        .unwrap();
        let mut g = BufferGenerator::new(&coll, 2, ProbePolicy::default()).unwrap();
        g.step(&e(0)).unwrap(); // in every language: no shrink
        assert!(g.state().stored.is_empty());
        g.step(&e(1)).unwrap(); // drops the third language
        assert_eq!(g.state().stored, vec![e(1)]);
        assert_eq!(g.state().residual, vec![0, 1]);
        g.step(&e(5)).unwrap(); // same residual
        g.step(&e(3)).unwrap(); // only the naturals remain
        assert_eq!(g.state().stored, vec![e(1), e(3)]);
        assert_eq!(g.state().residual, vec![0]);
        g.step(&e(7)).unwrap();
        assert_eq!(g.state().stored.len(), 2);
    }
}
