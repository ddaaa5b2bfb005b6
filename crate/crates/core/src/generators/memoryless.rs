use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap};

use super::{Generator, Output, OutputMode};
use crate::domain::{
    finiteness, signature, CellSystem, Collection, CountableFamily, Element, FinitenessVerdict, Language, ProbePolicy,
    SetExpr,
};
use crate::error::{Error, Result};

/// Intersection of the given languages, or the naturals when it is finite.
fn intersect_or_naturals(langs: &[&Language], policy: &ProbePolicy) -> Result<SetExpr> {
    let exprs: Vec<&SetExpr> = langs.iter().map(|l| l.expr()).collect();
    let inter = SetExpr::intersect_all(&exprs)?;
    Ok(match finiteness(&inter, policy) {
        FinitenessVerdict::Infinite { .. } => inter,
        _ => SetExpr::naturals(),
    })
}

/// `I_x`, the intersection of all languages containing `x`, when infinite;
/// otherwise the naturals.
pub fn canonical_intersection(languages: &[Language], x: &Element, policy: &ProbePolicy) -> Result<SetExpr> {
    let sig = signature(languages, x);
    let langs: Vec<&Language> = sig.iter().map(|&i| &languages[i]).collect();
    intersect_or_naturals(&langs, policy)
}

/// The canonical memoryless generator of a finite collection.
pub struct CanonicalIntersection {
    languages: Vec<Language>,
    policy: ProbePolicy,
    memo: HashMap<Vec<usize>, SetExpr>,
}

impl CanonicalIntersection {
    pub fn new(collection: &Collection, policy: ProbePolicy) -> Result<Self> {
        let languages = collection
            .languages()
            .ok_or_else(|| Error::InvalidParams("canonical intersection needs a finite collection".into()))?
            .to_vec();
        Ok(CanonicalIntersection { languages, policy, memo: HashMap::new() })
    }

    pub fn languages(&self) -> &[Language] {
        &self.languages
    }

    /// Output for the languages listed in `sig`.
    pub fn for_signature(&mut self, sig: Vec<usize>) -> Result<SetExpr> {
        if let Some(s) = self.memo.get(&sig) {
            return Ok(s.clone());
        }
        let langs: Vec<&Language> = sig.iter().map(|&i| &self.languages[i]).collect();
        let out = intersect_or_naturals(&langs, &self.policy)?;
        self.memo.insert(sig, out.clone());
        Ok(out)
    }

    pub fn output_for(&mut self, x: &Element) -> Result<SetExpr> {
        let sig = signature(&self.languages, x);
        self.for_signature(sig)
    }
}

impl Generator for CanonicalIntersection {
    fn mode(&self) -> OutputMode {
        OutputMode::Set
    }
    fn name(&self) -> String {
        "canonical_intersection".into()
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        self.output_for(x).map(Output::Set)
    }
}

/// Memoryless generator for a countable collection.
///
/// With `J_n(x)` the intersection of those of the first `n` languages that
/// contain `x`, the output is `J_n(x)` for the largest `n <= bijection(x)`
/// keeping it infinite. The bijection is `x + shift`.
pub struct MemorylessCountable {
    family: CountableFamily,
    shift: u64,
    policy: ProbePolicy,
    cache: Vec<Language>,
}

/// Largest prefix length the countable generator will materialize.
pub const MAX_COUNTABLE_PREFIX: u64 = 10_000;

impl MemorylessCountable {
    pub fn new(collection: &Collection, shift: u64, policy: ProbePolicy) -> Result<Self> {
        let family = match collection {
            Collection::Countable(f) => f.clone(),
            Collection::Finite(list) => CountableFamily::Cycle(list.clone()),
        };
        if shift == 0 {
            return Err(Error::InvalidParams("the bijection must map into the positive integers".into()));
        }
        Ok(MemorylessCountable { family, shift, policy, cache: Vec::new() })
    }

    pub fn bijection(&self, x: &Element) -> Element {
        x.add_u64(self.shift)
    }

    fn ensure(&mut self, n: usize) -> Result<()> {
        while self.cache.len() < n {
            let next = self.family.get(self.cache.len())?;
            self.cache.push(next);
        }
        Ok(())
    }

    /// The chosen `n(x)` and the output set.
    pub fn evaluate(&mut self, x: &Element) -> Result<(usize, SetExpr)> {
        let b = self.bijection(x);
        let b = b
            .as_u64()
            .filter(|&v| v <= MAX_COUNTABLE_PREFIX)
            .ok_or(Error::SizeLimit { n: usize::MAX, max: MAX_COUNTABLE_PREFIX as usize })? as usize;
        self.ensure(b)?;
        // A cycled list repeats its languages; repeats change no intersection.
        let distinct = match &self.family {
            CountableFamily::Cycle(list) => list.len().min(b),
            CountableFamily::LengthThreshold => b,
        };
        let containing: Vec<usize> = (0..distinct).filter(|&j| self.cache[j].contains(x)).collect();
        let all_structured = containing.iter().all(|&j| self.cache[j].as_structured().is_some());
        // Index (exclusive) of the first containing language that makes the
        // running intersection finite, i.e. the prefix length n(x).
        let mut cut = b;
        if all_structured {
            let mut system = CellSystem::trivial();
            for &j in &containing {
                system = CellSystem::refine(&system, self.cache[j].as_structured().unwrap().system())?;
            }
            let mut running: Option<BTreeSet<u32>> = None;
            for &j in &containing {
                let s = self.cache[j].as_structured().unwrap();
                let lifted = if *s.system() == system { Cow::Borrowed(s) } else { Cow::Owned(s.lift(&system)?) };
                let cells: BTreeSet<u32> = match running {
                    None => lifted.cells().clone(),
                    Some(r) => r.intersection(lifted.cells()).copied().collect(),
                };
                if cells.is_empty() {
                    cut = j;
                    break;
                }
                running = Some(cells);
            }
        } else {
            let mut acc = SetExpr::naturals();
            for &j in &containing {
                let next = acc.intersect(self.cache[j].expr())?;
                if !finiteness(&next, &self.policy).is_infinite() {
                    cut = j;
                    break;
                }
                acc = next;
            }
        }
        let chosen: Vec<&Language> = containing.iter().filter(|&&j| j < cut).map(|&j| &self.cache[j]).collect();
        let exprs: Vec<&SetExpr> = chosen.iter().map(|l| l.expr()).collect();
        let out = SetExpr::intersect_all(&exprs)?;
        Ok((cut, out))
    }
}

impl Generator for MemorylessCountable {
    fn mode(&self) -> OutputMode {
        OutputMode::Set
    }
    fn name(&self) -> String {
        "memoryless_countable".into()
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        self.evaluate(x).map(|(_, s)| Output::Set(s))
    }
}
