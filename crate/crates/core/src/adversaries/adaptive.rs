use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::streams::Walker;
use crate::domain::{is_subset, Element, EnumerationStream, Language, ProbePolicy, RepetitionPolicy, SetExpr, Verdict};
use crate::error::{Error, Result};

/// Members of the target sampled when classifying an element generator.
pub fn probe_sample(policy: &ProbePolicy) -> usize {
    16 * policy.witness_count
}

/// Which infinite set the element adversary exploits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryCase {
    /// Infinitely many inputs whose output leaves the target or repeats the
    /// input.
    BadSet,
    /// Infinitely many inputs sharing the output `y`.
    Fiber { y: Element },
    /// Infinitely many distinct outputs inside the target.
    Image,
}

/// A stream built against one element generator, with the rounds on which
/// the generator is bound to fail.
pub struct ElementAdversary {
    pub case: AdversaryCase,
    pub stream: EnumerationStream,
}

impl ElementAdversary {
    /// Whether round `t` (1-based) carries a planted input.
    pub fn planted(&self, t: u64) -> bool {
        match self.case {
            AdversaryCase::BadSet => t % 2 == 1,
            AdversaryCase::Fiber { .. } => t >= 2 && t % 2 == 0,
            AdversaryCase::Image => t % 3 == 2,
        }
    }
}

/// Probes a memoryless element generator `g` on members of `k` and builds a
/// finitely repeating enumeration of `k` on which it fails infinitely often:
///
/// - bad set: `b_1, z_1, b_2, z_2, ...` where `g(b_i) ∉ k` or `g(b_i) = b_i`;
/// - fiber: `y, a_1, z_1, a_2, z_2, ...` where `g(a_i) = y`;
/// - image: `g(a_1), a_1, z_1, g(a_2), a_2, z_2, ...` with distinct images.
///
/// The `z_i` run through `k` in canonical order.
pub fn element_memoryless_adversary<G>(g: G, k: &Language, policy: &ProbePolicy) -> Result<ElementAdversary>
where
    G: Fn(&Element) -> Element + Send + 'static,
{
    let need = policy.witness_count;
    let mut walk = Walker::new(k.expr(), policy);
    let mut bad = 0usize;
    let mut fibers: BTreeMap<Element, usize> = BTreeMap::new();
    for _ in 0..probe_sample(policy) {
        let Ok(x) = walk.advance() else { break };
        let y = g(&x);
        if !k.contains(&y) || y == x {
            bad += 1;
        } else {
            *fibers.entry(y).or_default() += 1;
        }
    }
    let case = if bad >= need {
        AdversaryCase::BadSet
    } else if let Some((y, _)) = fibers.iter().filter(|(_, &c)| c >= need).max_by_key(|(_, &c)| c) {
        AdversaryCase::Fiber { y: y.clone() }
    } else if fibers.len() >= need {
        AdversaryCase::Image
    } else {
        return Err(Error::CaseUndetermined);
    };

    let lang = k.clone();
    let mut planted = Walker::new(k.expr(), policy);
    let mut canonical = Walker::new(k.expr(), policy);
    let mut used_images: HashSet<Element> = HashSet::new();
    let mut queue: Vec<Element> = Vec::new();
    let mut started = false;
    let case_for_stream = case.clone();
    let source = move || -> Result<Element> {
        if queue.is_empty() {
            let mut batch = Vec::new();
            match &case_for_stream {
                AdversaryCase::BadSet => {
                    let b = next_where(&mut planted, |x| {
                        let y = g(x);
                        !lang.contains(&y) || y == *x
                    })?;
                    batch.push(b);
                }
                AdversaryCase::Fiber { y } => {
                    if !started {
                        batch.push(y.clone());
                    }
                    batch.push(next_where(&mut planted, |x| g(x) == *y)?);
                }
                AdversaryCase::Image => {
                    let a = next_where(&mut planted, |x| {
                        let y = g(x);
                        lang.contains(&y) && y != *x && !used_images.contains(&y)
                    })?;
                    let y = g(&a);
                    used_images.insert(y.clone());
                    batch.push(y);
                    batch.push(a);
                }
            }
            started = true;
            batch.push(canonical.advance()?);
            batch.reverse();
            queue = batch;
        }
        Ok(queue.pop().expect("nonempty batch"))
    };
    Ok(ElementAdversary {
        case,
        stream: EnumerationStream::new(
            "element_adversary",
            RepetitionPolicy::FinitelyRepeating { cap: 3 },
            0,
            Box::new(source),
        ),
    })
}

fn next_where(walk: &mut Walker, pred: impl Fn(&Element) -> bool) -> Result<Element> {
    loop {
        let x = walk.advance()?;
        if pred(&x) {
            return Ok(x);
        }
    }
}

/// Stream and target chosen against an index rule on the shared part `C`
/// of two languages.
pub struct IndexPairAdversary {
    /// Index of the target in the pair (0-based).
    pub target: usize,
    pub stream: EnumerationStream,
}

impl IndexPairAdversary {
    pub fn planted(&self, t: u64) -> bool {
        t % 2 == 1
    }
}

/// Given the two languages, their common part `c` and an index rule `g`,
/// picks the index `i` that `g` answers on infinitely many points of `c`
/// (by majority over a probe sample) and enumerates the other language,
/// alternating those points with its canonical order.
pub fn index_pair_adversary<G>(
    languages: [&Language; 2],
    c: &SetExpr,
    g: G,
    policy: &ProbePolicy,
) -> Result<IndexPairAdversary>
where
    G: Fn(&Element) -> usize + Send + 'static,
{
    let mut walk = Walker::new(c, policy);
    let mut votes = [0usize; 2];
    for _ in 0..probe_sample(policy) {
        let Ok(x) = walk.advance() else { break };
        match g(&x) {
            0 => votes[0] += 1,
            1 => votes[1] += 1,
            _ => {}
        }
    }
    let answered = if votes[0] >= votes[1] { 0 } else { 1 };
    if votes[answered] == 0 {
        return Err(Error::CaseUndetermined);
    }
    let target = 1 - answered;
    let mut planted = Walker::new(c, policy);
    let mut canonical = Walker::new(languages[target].expr(), policy);
    let mut second: Option<Element> = None;
    let source = move || -> Result<Element> {
        if let Some(z) = second.take() {
            return Ok(z);
        }
        let a = next_where(&mut planted, |x| g(x) == answered)?;
        second = Some(canonical.advance()?);
        Ok(a)
    };
    Ok(IndexPairAdversary {
        target,
        stream: EnumerationStream::new(
            "index_pair_adversary",
            RepetitionPolicy::FinitelyRepeating { cap: 2 },
            0,
            Box::new(source),
        ),
    })
}

/// Default number of candidate tuples examined per stage.
pub const WINDOW_TUPLE_BUDGET: usize = 1000;

/// Result of the staged window adversary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WindowOutcome {
    /// Every stage found a tuple whose output leaves the target. The prefix
    /// is repetition-free; `failing_rounds` are 1-based.
    Realized { prefix: Vec<Element>, failing_rounds: Vec<u64> },
    /// Stage `stage` found no bad tuple within budget. `exceptional` holds
    /// the elements emitted before it.
    WindowSafe { stage: usize, exceptional: Vec<Element> },
}

/// Builds a repetition-free enumeration of `l` in stages against a window
/// generator of width `w`: stage `s` emits the least unused element of `l`,
/// then `w` fresh elements on which `query` returns a set not contained in
/// `l`. Candidates are ordered tuples of distinct elements drawn from the
/// first unused members of `l`, at most `budget` per stage.
pub fn window_staged_adversary(
    query: &mut dyn FnMut(&[Element]) -> Result<SetExpr>,
    l: &Language,
    w: usize,
    budget: usize,
    stages: usize,
    policy: &ProbePolicy,
) -> Result<WindowOutcome> {
    if w == 0 {
        return Err(Error::InvalidParams("window must be positive".into()));
    }
    let mut used: HashSet<Element> = HashSet::new();
    let mut prefix: Vec<Element> = Vec::new();
    let mut failing = Vec::new();
    let mut canonical = Walker::new(l.expr(), policy);
    let pool_size = pool_for(w, budget);
    for stage in 1..=stages {
        let u = next_where(&mut canonical, |x| !used.contains(x))?;
        used.insert(u.clone());
        prefix.push(u);
        let mut pool = Vec::with_capacity(pool_size);
        let mut scan = canonical.clone();
        while pool.len() < pool_size {
            let x = scan.advance()?;
            if !used.contains(&x) {
                pool.push(x);
            }
        }
        let mut found = None;
        let mut tried = 0usize;
        let mut idx: Vec<usize> = Vec::new();
        // Depth-first over ordered tuples of distinct pool indices.
        let mut stack: Vec<usize> = vec![0];
        while let Some(top) = stack.last_mut() {
            if tried >= budget {
                break;
            }
            if *top >= pool.len() {
                stack.pop();
                idx.pop();
                if let Some(t) = stack.last_mut() {
                    *t += 1;
                }
                continue;
            }
            if idx.contains(top) {
                *top += 1;
                continue;
            }
            idx.push(*top);
            if idx.len() == w {
                tried += 1;
                let tuple: Vec<Element> = idx.iter().map(|&i| pool[i].clone()).collect();
                let out = query(&tuple)?;
                if is_subset(&out, l.expr(), policy)? == Verdict::False {
                    found = Some(tuple);
                    break;
                }
                idx.pop();
                *stack.last_mut().unwrap() += 1;
            } else {
                stack.push(0);
            }
        }
        match found {
            Some(tuple) => {
                for x in tuple {
                    used.insert(x.clone());
                    prefix.push(x);
                }
                failing.push(prefix.len() as u64);
            }
            None => return Ok(WindowOutcome::WindowSafe { stage, exceptional: prefix }),
        }
    }
    Ok(WindowOutcome::Realized { prefix, failing_rounds: failing })
}

// Smallest pool whose ordered w-tuples reach the budget.
fn pool_for(w: usize, budget: usize) -> usize {
    let mut m = w;
    loop {
        let tuples = (m + 1 - w..=m).try_fold(1usize, |acc, f| acc.checked_mul(f));
        if tuples.map_or(true, |t| t >= budget) || m >= w + 64 {
            return m;
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CellSystem, Structured};

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    fn evens() -> Language {
        Language::from_cells(CellSystem::residue(2), [0]).unwrap()
    }

    #[test]
    fn shift_by_two_is_an_image_case() {
        let mut adv =
            element_memoryless_adversary(|x: &Element| x.add_u64(2), &evens(), &ProbePolicy::default()).unwrap();
        assert_eq!(adv.case, AdversaryCase::Image);
        let items = adv.stream.take_vec(9).unwrap();
        assert_eq!(items, [2, 0, 0, 4, 2, 2, 6, 4, 4].map(e));
    }

    #[test]
    fn identity_and_constant_rules() {
        let adv = element_memoryless_adversary(|x: &Element| x.clone(), &evens(), &ProbePolicy::default()).unwrap();
        assert_eq!(adv.case, AdversaryCase::BadSet);
        let mut adv = element_memoryless_adversary(|_: &Element| e(10), &evens(), &ProbePolicy::default()).unwrap();
        assert_eq!(adv.case, AdversaryCase::Fiber { y: e(10) });
        assert_eq!(adv.stream.take_vec(5).unwrap(), [10, 0, 0, 2, 2].map(e));
    }

    #[test]
    fn undetermined_when_images_are_few() {
        // Forty outputs, each hit fewer times than the witness count asks for.
        let rule = |x: &Element| e(1000 + 2 * (x.div_rem_u64(2).0.rem_u64(40)));
        let out = element_memoryless_adversary(rule, &evens(), &ProbePolicy::default());
        assert!(matches!(out, Err(Error::CaseUndetermined)));
    }

    #[test]
    fn window_adversary_finds_planted_tuples() {
        let l = evens();
        let nat = SetExpr::naturals();
        let ev = l.expr().clone();
        let mut query = |t: &[Element]| -> Result<SetExpr> {
            Ok(if t.iter().all(|x| x.rem_u64(3) == 1) { nat.clone() } else { ev.clone() })
        };
        let out = window_staged_adversary(&mut query, &l, 2, WINDOW_TUPLE_BUDGET, 3, &ProbePolicy::default()).unwrap();
        let WindowOutcome::Realized { prefix, failing_rounds } = out else { panic!("expected failures") };
        assert_eq!(failing_rounds, vec![3, 6, 9]);
        assert_eq!(&prefix[..3], &[e(0), e(4), e(10)]);
        let distinct: HashSet<_> = prefix.iter().collect();
        assert_eq!(distinct.len(), prefix.len());

        let mut safe = |_: &[Element]| -> Result<SetExpr> {
            Ok(SetExpr::Structured(Structured::from_cells(CellSystem::residue(4), [0]).unwrap()))
        };
        let out = window_staged_adversary(&mut safe, &l, 2, WINDOW_TUPLE_BUDGET, 3, &ProbePolicy::default()).unwrap();
        assert_eq!(out, WindowOutcome::WindowSafe { stage: 1, exceptional: vec![e(0)] });
    }
}
