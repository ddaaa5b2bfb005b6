//! Exhaustive search over small incremental learners: every update map on
//! the three hypotheses, over an alphabet of special points plus one or two
//! classes of base-set elements, together with every initial hypothesis.

use serde::{Deserialize, Serialize};

use crate::adversaries::{HardInstance, Text};
use crate::domain::{Element, Structured};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessCriterion {
    /// The eventual hypotheses all equal the target.
    Exact,
    /// The eventual hypotheses are all contained in the target.
    Generation,
}

/// An update map `table[state * alphabet + symbol]` and its initial state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub initial: u8,
    pub table: Vec<u8>,
}

/// Two prefixes that must lead to different states: after `suffix`, the
/// texts they start converge to different targets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairWitness {
    pub left: Vec<Element>,
    pub right: Vec<Element>,
    pub suffix: Vec<Element>,
    pub targets: (usize, usize),
}

/// Pairwise-distinct states forced by the prefixes, against the states
/// available.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pigeonhole {
    pub prefixes: usize,
    pub states: usize,
    pub witnesses: Vec<PairWitness>,
    /// Every pair is witnessed and there are more prefixes than states.
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BruteforceReport {
    pub learner_class: String,
    pub criterion: SuccessCriterion,
    pub states: usize,
    pub alphabet: usize,
    pub candidates_total: u64,
    pub survivors: Vec<Candidate>,
    /// Number of candidates whose first failing text is text `i`.
    pub failures_by_text: Vec<u64>,
    /// First failing text of each candidate, in enumeration order;
    /// `u8::MAX` marks a survivor.
    #[serde(skip)]
    pub failing_text: Vec<u8>,
    pub texts: Vec<Text>,
    pub pigeonhole: Option<Pigeonhole>,
}

/// Runs every learner of the class on every text of `instance` and keeps
/// the ones that succeed on all of them.
///
/// With `uniform_on_base` the learner sees every base-set element as the
/// same symbol; otherwise base elements alternate between two symbols in
/// the order the text presents them.
pub fn bruteforce_incremental(
    instance: &HardInstance,
    uniform_on_base: bool,
    criterion: SuccessCriterion,
) -> Result<BruteforceReport> {
    let cert = &instance.certificate;
    if cert.texts.is_empty() || cert.symbols.is_empty() {
        return Err(Error::InvalidParams(format!("{} carries no texts", instance.name)));
    }
    let langs: Vec<Structured> = instance.structured()?;
    let states = langs.len();
    if states > 8 {
        return Err(Error::SizeLimit { n: states, max: 8 });
    }
    let specials = cert.symbols.len();
    let classes = if uniform_on_base { 1 } else { 2 };
    let alphabet = specials + classes;
    let cells = states * alphabet;

    let mut valid = vec![vec![false; states]; states];
    for (q, row) in valid.iter_mut().enumerate() {
        for (t, ok) in row.iter_mut().enumerate() {
            *ok = match criterion {
                SuccessCriterion::Exact => langs[q].set_eq(&langs[t])?,
                SuccessCriterion::Generation => langs[q].is_subset(&langs[t])?,
            };
        }
    }
    let texts: Vec<(Vec<usize>, usize)> = cert
        .texts
        .iter()
        .map(|t| {
            let syms = t
                .prefix
                .iter()
                .map(|x| {
                    cert.symbols
                        .iter()
                        .position(|s| s == x)
                        .ok_or_else(|| Error::InvalidParams(format!("{x} is not a symbol")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((syms, t.target))
        })
        .collect::<Result<_>>()?;
    if texts.len() >= u8::MAX as usize {
        return Err(Error::SizeLimit { n: texts.len(), max: u8::MAX as usize - 1 });
    }

    let total = (states as u64).pow(cells as u32) * states as u64;
    let mut survivors = Vec::new();
    let mut failing_text = Vec::with_capacity(total as usize);
    let mut failures_by_text = vec![0u64; texts.len()];
    let mut table = vec![0u8; cells];
    let mut seen = vec![usize::MAX; states * classes];
    let mut outputs: Vec<u8> = Vec::with_capacity(states * classes + 1);
    for initial in 0..states as u8 {
        table.iter_mut().for_each(|c| *c = 0);
        loop {
            let failed = texts.iter().position(|(prefix, target)| {
                let mut q = initial as usize;
                for &s in prefix {
                    q = table[q * alphabet + s] as usize;
                }
                seen.iter_mut().for_each(|v| *v = usize::MAX);
                outputs.clear();
                let mut step = 0usize;
                let cycle_start = loop {
                    let key = q * classes + step % classes;
                    if seen[key] != usize::MAX {
                        break seen[key];
                    }
                    seen[key] = step;
                    q = table[q * alphabet + specials + step % classes] as usize;
                    outputs.push(q as u8);
                    step += 1;
                };
                !outputs[cycle_start..].iter().all(|&o| valid[o as usize][*target])
            });
            match failed {
                Some(i) => {
                    failures_by_text[i] += 1;
                    failing_text.push(i as u8);
                }
                None => {
                    survivors.push(Candidate { initial, table: table.clone() });
                    failing_text.push(u8::MAX);
                }
            }
            // Next table in odometer order.
            let mut i = 0;
            while i < cells {
                table[i] += 1;
                if (table[i] as usize) < states {
                    break;
                }
                table[i] = 0;
                i += 1;
            }
            if i == cells {
                break;
            }
        }
    }

    let pigeonhole =
        (!cert.prefixes.is_empty()).then(|| pigeonhole(&cert.prefixes, &cert.symbols, &cert.texts, states));
    Ok(BruteforceReport {
        learner_class: format!(
            "update maps on {states} hypotheses over {specials} special points and {classes} base class{} ({}), with any initial hypothesis",
            if classes == 1 { "" } else { "es" },
            if uniform_on_base { "base elements treated alike" } else { "base elements split by position parity" },
        ),
        criterion,
        states,
        alphabet,
        candidates_total: total,
        survivors,
        failures_by_text,
        failing_text,
        texts: cert.texts.clone(),
        pigeonhole,
    })
}

/// Checks that every pair of `prefixes` has a continuation among the texts
/// whose targets differ, so an incremental learner must reach pairwise
/// different states after them.
pub fn pigeonhole(prefixes: &[Vec<Element>], symbols: &[Element], texts: &[Text], states: usize) -> Pigeonhole {
    let target_of = |p: &[Element]| texts.iter().find(|t| t.prefix == p).map(|t| t.target);
    let mut suffixes: Vec<Vec<Element>> = vec![Vec::new()];
    suffixes.extend(symbols.iter().map(|s| vec![s.clone()]));
    let mut witnesses = Vec::new();
    let mut all = true;
    for i in 0..prefixes.len() {
        for j in i + 1..prefixes.len() {
            let found = suffixes.iter().find_map(|u| {
                let left: Vec<Element> = prefixes[i].iter().chain(u).cloned().collect();
                let right: Vec<Element> = prefixes[j].iter().chain(u).cloned().collect();
                match (target_of(&left), target_of(&right)) {
                    (Some(a), Some(b)) if a != b => Some(PairWitness {
                        left: prefixes[i].clone(),
                        right: prefixes[j].clone(),
                        suffix: u.clone(),
                        targets: (a, b),
                    }),
                    _ => None,
                }
            });
            match found {
                Some(w) => witnesses.push(w),
                None => all = false,
            }
        }
    }
    Pigeonhole { prefixes: prefixes.len(), states, witnesses, holds: all && prefixes.len() > states }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::identification_counterexample;

    #[test]
    fn pigeonhole_needs_four_states() {
        let inst = identification_counterexample().unwrap();
        let c = &inst.certificate;
        let p = pigeonhole(&c.prefixes, &c.symbols, &c.texts, 3);
        assert_eq!(p.witnesses.len(), 6);
        assert!(p.holds);
    }

    #[test]
    fn a_learner_without_the_hard_texts_survives() {
        // Only the two one-point texts: start at L_3, jump to L_1 on 1 and
        // to L_2 on 2, stay put on base elements.
        let mut inst = identification_counterexample().unwrap();
        inst.certificate.texts.truncate(2);
        inst.certificate.prefixes.clear();
        let report = bruteforce_incremental(&inst, true, SuccessCriterion::Exact).unwrap();
        assert_eq!(report.candidates_total, 59049);
        let wanted = Candidate { initial: 2, table: vec![0, 1, 0, 0, 1, 1, 0, 1, 2] };
        assert!(report.survivors.contains(&wanted));
        assert_eq!(report.failing_text.len(), 59049);
    }
}
