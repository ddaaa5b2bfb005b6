//! Generators: each consumes one element per round and emits a set, an
//! index into its collection, or a single element.

pub mod buffer;
pub mod coding;
pub mod cofinal;
pub mod incremental;
pub mod memoryless;
pub mod window;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{Element, SetExpr};
use crate::error::Result;

pub use buffer::{BufferGenerator, BufferState};
pub use coding::{pair, seq_decode, seq_encode, unpair, CodingGenerator};
pub use cofinal::{CofinalSet, CofinalSystem};
pub use incremental::{topological_order, IdentifierMode, IncrementalIdentifier};
pub use memoryless::{canonical_intersection, CanonicalIntersection, MemorylessCountable};
pub use window::{WindowGenerator, WindowStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    Set,
    Index,
    Element,
}

#[derive(Clone, Debug)]
pub enum Output {
    Set(SetExpr),
    /// Index into the generator's collection (0-based).
    Index(usize),
    Element(Element),
}

impl Output {
    pub fn mode(&self) -> OutputMode {
        match self {
            Output::Set(_) => OutputMode::Set,
            Output::Index(_) => OutputMode::Index,
            Output::Element(_) => OutputMode::Element,
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Output::Set(s) => write!(f, "{s}"),
            Output::Index(i) => write!(f, "L[{i}]"),
            Output::Element(x) => write!(f, "{}", x.short_repr()),
        }
    }
}

/// A generator driven one round at a time.
pub trait Generator {
    fn mode(&self) -> OutputMode;
    fn name(&self) -> String;
    fn step(&mut self, x: &Element) -> Result<Output>;
}

/// Memoryless set generator given by a rule.
pub struct FnSetGenerator<F: FnMut(&Element) -> Result<SetExpr>> {
    pub name: String,
    pub rule: F,
}

impl<F: FnMut(&Element) -> Result<SetExpr>> Generator for FnSetGenerator<F> {
    fn mode(&self) -> OutputMode {
        OutputMode::Set
    }
    fn name(&self) -> String {
        self.name.clone()
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        (self.rule)(x).map(Output::Set)
    }
}

/// Memoryless index generator given by a rule.
pub struct FnIndexGenerator<F: FnMut(&Element) -> usize> {
    pub name: String,
    pub rule: F,
}

impl<F: FnMut(&Element) -> usize> Generator for FnIndexGenerator<F> {
    fn mode(&self) -> OutputMode {
        OutputMode::Index
    }
    fn name(&self) -> String {
        self.name.clone()
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        Ok(Output::Index((self.rule)(x)))
    }
}

/// Memoryless element generator given by a rule.
pub struct FnElementGenerator<F: FnMut(&Element) -> Element> {
    pub name: String,
    pub rule: F,
}

impl<F: FnMut(&Element) -> Element> Generator for FnElementGenerator<F> {
    fn mode(&self) -> OutputMode {
        OutputMode::Element
    }
    fn name(&self) -> String {
        self.name.clone()
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        Ok(Output::Element((self.rule)(x)))
    }
}
