use std::fmt;

use serde::{Deserialize, Serialize};

use super::Element;
use crate::error::Result;

/// How often a stream may repeat an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepetitionPolicy {
    Free,
    FinitelyRepeating { cap: u32 },
    Unbounded,
}

/// Produces the elements of a stream one at a time.
pub trait StreamSource: Send {
    fn next_element(&mut self) -> Result<Element>;
}

impl<F: FnMut() -> Result<Element> + Send> StreamSource for F {
    fn next_element(&mut self) -> Result<Element> {
        self()
    }
}

/// An enumeration of a target language, consumed one element per round.
pub struct EnumerationStream {
    label: String,
    policy: RepetitionPolicy,
    seed: u64,
    source: Box<dyn StreamSource>,
    emitted: u64,
}

impl EnumerationStream {
    pub fn new(label: impl Into<String>, policy: RepetitionPolicy, seed: u64, source: Box<dyn StreamSource>) -> Self {
        EnumerationStream { label: label.into(), policy, seed, source, emitted: 0 }
    }

    pub fn next_element(&mut self) -> Result<Element> {
        let x = self.source.next_element()?;
        self.emitted += 1;
        Ok(x)
    }

    pub fn take_vec(&mut self, n: usize) -> Result<Vec<Element>> {
        (0..n).map(|_| self.next_element()).collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn policy(&self) -> RepetitionPolicy {
        self.policy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }
}

impl fmt::Debug for EnumerationStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnumerationStream")
            .field("label", &self.label)
            .field("policy", &self.policy)
            .field("seed", &self.seed)
            .field("emitted", &self.emitted)
            .finish()
    }
}
