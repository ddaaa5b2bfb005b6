use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::domain::{
    finiteness, signature, CellSystem, Collection, Element, FinitenessVerdict, Language, ProbePolicy, SetExpr,
    Structured,
};
use crate::error::{Error, Result};

/// Whether a single example already pins down an infinite safe set: every
/// `x` in the union of the collection must have an infinite intersection
/// `I_x` of the languages containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SingleExampleClass {
    Generable,
    /// The least `x` whose `I_x` is finite.
    Counterexample {
        x: Element,
    },
    Unknown,
}

pub fn classify_single_example(collection: &Collection, policy: &ProbePolicy) -> Result<SingleExampleClass> {
    let languages = collection
        .languages()
        .ok_or_else(|| Error::InvalidParams("classification needs a finite collection".into()))?;
    let structured: Option<Vec<&Structured>> = languages.iter().map(Language::as_structured).collect();
    match structured {
        Some(sets) => classify_structured(&sets),
        None => Ok(classify_probed(languages, policy)),
    }
}

fn classify_structured(sets: &[&Structured]) -> Result<SingleExampleClass> {
    let mut system = CellSystem::trivial();
    for s in sets {
        system = CellSystem::refine(&system, s.system())?;
    }
    let lifted: Vec<Structured> = sets.iter().map(|s| s.lift(&system)).collect::<Result<_>>()?;
    let finite_for = |sig: &[usize]| -> Result<bool> {
        let parts: Vec<&Structured> = sig.iter().map(|&i| &lifted[i]).collect();
        Ok(Structured::intersect_all(&parts)?.is_finite())
    };
    // Points where some language deviates from its cells.
    let mut special: BTreeSet<Element> = BTreeSet::new();
    for s in &lifted {
        special.extend(s.plus().iter());
        special.extend(s.minus().iter());
    }
    let mut worst: Option<Element> = None;
    for x in &special {
        let sig: Vec<usize> = (0..lifted.len()).filter(|&i| lifted[i].contains(x)).collect();
        if !sig.is_empty() && finite_for(&sig)? {
            worst = Some(x.clone());
            break;
        }
    }
    for cell in 0..system.cell_count() {
        if !system.is_infinite_cell(cell) {
            continue;
        }
        let sig: Vec<usize> = (0..lifted.len()).filter(|&i| lifted[i].cells().contains(&cell)).collect();
        if sig.is_empty() || !finite_for(&sig)? {
            continue;
        }
        let mut from = Element::ZERO;
        let x = loop {
            let x = system.next_in_cell(cell, &from).expect("infinite cell");
            if !special.contains(&x) {
                break x;
            }
            from = x.succ();
        };
        if worst.as_ref().map_or(true, |w| x < *w) {
            worst = Some(x);
        }
    }
    Ok(match worst {
        Some(x) => SingleExampleClass::Counterexample { x },
        None => SingleExampleClass::Generable,
    })
}

fn classify_probed(languages: &[Language], policy: &ProbePolicy) -> SingleExampleClass {
    let mut memo: HashMap<Vec<usize>, FinitenessVerdict> = HashMap::new();
    let mut unknown = false;
    let mut x = Element::ZERO;
    while x <= policy.horizon {
        let sig = signature(languages, &x);
        if !sig.is_empty() {
            let verdict = memo.entry(sig.clone()).or_insert_with(|| {
                let exprs: Vec<&SetExpr> = sig.iter().map(|&i| languages[i].expr()).collect();
                match SetExpr::intersect_all(&exprs) {
                    Ok(inter) => finiteness(&inter, policy),
                    Err(_) => FinitenessVerdict::Unknown,
                }
            });
            match verdict {
                FinitenessVerdict::Finite(_) => return SingleExampleClass::Counterexample { x },
                FinitenessVerdict::Unknown => unknown = true,
                FinitenessVerdict::Infinite { .. } => {}
            }
        }
        x = x.succ();
    }
    if unknown {
        SingleExampleClass::Unknown
    } else {
        SingleExampleClass::Generable
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::{demo_collection, index_pair_instance};

    #[test]
    fn known_classifications() {
        let policy = ProbePolicy::default();
        let pair = index_pair_instance().unwrap();
        assert_eq!(classify_single_example(&pair.collection, &policy).unwrap(), SingleExampleClass::Generable);
        let evens = Language::from_cells(CellSystem::residue(2), [0]).unwrap();
        let odds_zero = Language::structured(
            Structured::from_cells(CellSystem::residue(2), [1])
                .unwrap()
                .union(&Structured::finite([Element::ZERO]).unwrap())
                .unwrap(),
        )
        .unwrap();
        let coll = Collection::finite(vec![evens.clone(), odds_zero]).unwrap();
        assert_eq!(
            classify_single_example(&coll, &policy).unwrap(),
            SingleExampleClass::Counterexample { x: Element::ZERO }
        );
        let single = Collection::finite(vec![evens]).unwrap();
        assert_eq!(classify_single_example(&single, &policy).unwrap(), SingleExampleClass::Generable);
        let mixed = demo_collection("mixed").unwrap();
        // I_0 = evens ∩ (odds ∪ {0}) = {0}.
        assert_eq!(
            classify_single_example(&mixed, &policy).unwrap(),
            SingleExampleClass::Counterexample { x: Element::ZERO }
        );
    }

    #[test]
    fn disjoint_cells_give_the_first_member() {
        // {0 mod 3} and {1 mod 3} ∪ {3}: I_3 = {3}.
        let sys = CellSystem::residue(3);
        let a = Language::from_cells(sys.clone(), [0]).unwrap();
        let b = Language::structured(
            Structured::from_cells(sys, [1]).unwrap().union(&Structured::finite([Element::new(3)]).unwrap()).unwrap(),
        )
        .unwrap();
        let coll = Collection::finite(vec![a, b]).unwrap();
        assert_eq!(
            classify_single_example(&coll, &ProbePolicy::default()).unwrap(),
            SingleExampleClass::Counterexample { x: Element::new(3) }
        );
    }
}
