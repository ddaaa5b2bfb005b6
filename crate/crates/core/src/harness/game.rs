use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::domain::{
    almost_compare, empirical_density, exact_upper_density, finiteness, is_subset, AlmostOrder, Collection, Density,
    Element, EnumerationStream, FinitenessVerdict, Language, ProbePolicy, SetExpr, Verdict, DEFAULT_BURN_IN,
};
use crate::error::{Error, Result};
use crate::generators::{Generator, Output};

/// When an index output counts as correct.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexValidity {
    /// `L_i = K`.
    #[default]
    Exact,
    /// `L_i` and `K` differ on finitely many elements.
    Approximate,
    /// `L_i ⊆ K`.
    Generation,
}

/// Density sampling: exact values from declared cell densities when
/// available, otherwise empirical ratios when `estimate` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    /// Sample every `every` rounds (0 disables sampling).
    #[serde(default)]
    pub every: usize,
    #[serde(default)]
    pub estimate: bool,
    #[serde(default)]
    pub horizons: Vec<u64>,
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
}

fn default_burn_in() -> f64 {
    DEFAULT_BURN_IN
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { every: 0, estimate: false, horizons: Vec::new(), burn_in: DEFAULT_BURN_IN }
    }
}

impl Sampling {
    pub fn every(every: usize) -> Self {
        Sampling { every, ..Sampling::default() }
    }
}

#[derive(Clone, Debug)]
pub struct GameConfig {
    pub rounds: usize,
    pub index_validity: IndexValidity,
    pub sampling: Sampling,
    pub policy: ProbePolicy,
}

impl GameConfig {
    pub fn new(rounds: usize) -> Self {
        GameConfig {
            rounds,
            index_validity: IndexValidity::default(),
            sampling: Sampling::default(),
            policy: ProbePolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensitySample {
    pub upper: Density,
    /// From declared densities rather than finite prefixes.
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct RoundRecord {
    /// 1-based.
    pub round: u64,
    pub input: Element,
    pub output: Output,
    pub valid: Verdict,
    pub density: Option<DensitySample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameSummary {
    pub generator: String,
    pub stream: String,
    pub target: String,
    pub rounds: u64,
    pub t_star: Option<u64>,
    pub violations_before: u64,
    pub violations_after: u64,
    pub unknown: u64,
    pub density_sup: Option<String>,
    pub density_inf: Option<String>,
}

#[derive(Clone, Debug)]
pub struct GameTranscript {
    pub generator: String,
    pub stream: String,
    pub target: String,
    pub rounds: Vec<RoundRecord>,
    pub t_star: Option<u64>,
}

impl GameTranscript {
    pub fn violations(&self) -> impl Iterator<Item = &RoundRecord> {
        self.rounds.iter().filter(|r| r.valid != Verdict::True)
    }

    pub fn summary(&self) -> GameSummary {
        let cut = self.t_star.unwrap_or(u64::MAX);
        let before = self.violations().filter(|r| r.round < cut).count() as u64;
        let after = self.violations().count() as u64 - before;
        let profile = density_profile(self);
        GameSummary {
            generator: self.generator.clone(),
            stream: self.stream.clone(),
            target: self.target.clone(),
            rounds: self.rounds.len() as u64,
            t_star: self.t_star,
            violations_before: before,
            violations_after: after,
            unknown: self.rounds.iter().filter(|r| r.valid == Verdict::Unknown).count() as u64,
            density_sup: profile.sup.map(|d| d.to_string()),
            density_inf: profile.inf.map(|d| d.to_string()),
        }
    }
}

/// Plays `rounds` rounds of `generator` against `stream` for target `k`.
///
/// Set outputs must be infinite subsets of `k`; index outputs are judged
/// by `config.index_validity` against `collection`; element outputs must
/// lie in `k` and differ from every input seen so far.
pub fn run_game(
    generator: &mut dyn Generator,
    stream: &mut EnumerationStream,
    k: &Language,
    collection: Option<&Collection>,
    config: &GameConfig,
) -> Result<GameTranscript> {
    let mut seen: HashSet<Element> = HashSet::new();
    let mut rounds = Vec::with_capacity(config.rounds);
    for t in 1..=config.rounds as u64 {
        let x = stream.next_element()?;
        seen.insert(x.clone());
        let output = generator.step(&x)?;
        let sampled = config.sampling.every > 0 && t % config.sampling.every as u64 == 0;
        let (valid, density) = match &output {
            Output::Set(s) => {
                let valid = set_validity(s, k, &config.policy)?;
                let density = if sampled { sample_density(s, k, &config.sampling, &config.policy)? } else { None };
                (valid, density)
            }
            Output::Index(i) => {
                let coll = collection.ok_or_else(|| Error::InvalidParams("index outputs need a collection".into()))?;
                let l = coll.get(*i)?;
                let valid = index_validity(&l, k, config.index_validity, &config.policy)?;
                let density =
                    if sampled { sample_density(l.expr(), k, &config.sampling, &config.policy)? } else { None };
                (valid, density)
            }
            Output::Element(y) => (Verdict::from(k.contains(y) && !seen.contains(y)), None),
        };
        rounds.push(RoundRecord { round: t, input: x, output, valid, density });
    }
    let mut tr = GameTranscript {
        generator: generator.name(),
        stream: stream.label().to_string(),
        target: k.to_string(),
        rounds,
        t_star: None,
    };
    tr.t_star = detect_convergence(&tr);
    Ok(tr)
}

fn set_validity(s: &SetExpr, k: &Language, policy: &ProbePolicy) -> Result<Verdict> {
    let sub = is_subset(s, k.expr(), policy)?;
    if sub == Verdict::False {
        return Ok(Verdict::False);
    }
    let infinite = match finiteness(s, policy) {
        FinitenessVerdict::Infinite { .. } => Verdict::True,
        FinitenessVerdict::Finite(_) => Verdict::False,
        FinitenessVerdict::Unknown => Verdict::Unknown,
    };
    Ok(match (sub, infinite) {
        (Verdict::True, Verdict::True) => Verdict::True,
        (_, Verdict::False) => Verdict::False,
        _ => Verdict::Unknown,
    })
}

fn index_validity(l: &Language, k: &Language, mode: IndexValidity, policy: &ProbePolicy) -> Result<Verdict> {
    match mode {
        IndexValidity::Generation => is_subset(l.expr(), k.expr(), policy),
        IndexValidity::Exact => match (l.as_structured(), k.as_structured()) {
            (Some(a), Some(b)) => Ok(a.set_eq(b)?.into()),
            _ => {
                let ab = is_subset(l.expr(), k.expr(), policy)?;
                let ba = is_subset(k.expr(), l.expr(), policy)?;
                Ok(match (ab, ba) {
                    (Verdict::True, Verdict::True) => Verdict::True,
                    (Verdict::False, _) | (_, Verdict::False) => Verdict::False,
                    _ => Verdict::Unknown,
                })
            }
        },
        IndexValidity::Approximate => Ok(match almost_compare(l.expr(), k.expr(), policy)? {
            AlmostOrder::Equivalent => Verdict::True,
            AlmostOrder::Unknown => Verdict::Unknown,
            _ => Verdict::False,
        }),
    }
}

fn sample_density(
    s: &SetExpr,
    k: &Language,
    sampling: &Sampling,
    policy: &ProbePolicy,
) -> Result<Option<DensitySample>> {
    if let (Some(a), Some(b)) = (s.as_structured(), k.as_structured()) {
        if let Some(d) = exact_upper_density(a, b)? {
            return Ok(Some(DensitySample { upper: d, exact: true }));
        }
    }
    if !sampling.estimate || sampling.horizons.is_empty() {
        return Ok(None);
    }
    let est = empirical_density(s, k.expr(), &sampling.horizons, sampling.burn_in, policy)?;
    Ok(Some(DensitySample { upper: est.upper_est, exact: false }))
}

/// Fraction of the run kept as evidence: a violation inside the last
/// `ceil(rounds / 10)` rounds means no convergence round is reported.
pub const TAIL_FRACTION: u64 = 10;

/// One past the last violating round, or `None` when that violation falls
/// in the final tenth of the run. Unknown verdicts count as violations.
pub fn detect_convergence(tr: &GameTranscript) -> Option<u64> {
    let total = tr.rounds.len() as u64;
    let tail = total.div_ceil(TAIL_FRACTION);
    match tr.violations().map(|r| r.round).max() {
        None => Some(1),
        Some(last) if last > total - tail => None,
        Some(last) => Some(last + 1),
    }
}

/// Sampled densities from the convergence round on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityProfile {
    pub samples: Vec<(u64, Density)>,
    pub sup: Option<Density>,
    pub inf: Option<Density>,
}

pub fn density_profile(tr: &GameTranscript) -> DensityProfile {
    let from = tr.t_star.unwrap_or(u64::MAX);
    let samples: Vec<(u64, Density)> = tr
        .rounds
        .iter()
        .filter(|r| r.round >= from)
        .filter_map(|r| r.density.as_ref().map(|d| (r.round, d.upper)))
        .collect();
    DensityProfile { sup: samples.iter().map(|s| s.1).max(), inf: samples.iter().map(|s| s.1).min(), samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::{canonical_enumeration, sperner_hard_instance};
    use crate::domain::{RepetitionPolicy, Verdict};
    use crate::generators::{CanonicalIntersection, FnElementGenerator};

    fn transcript_with(violations: &[u64], total: u64) -> GameTranscript {
        GameTranscript {
            generator: "g".into(),
            stream: "s".into(),
            target: "k".into(),
            rounds: (1..=total)
                .map(|t| RoundRecord {
                    round: t,
                    input: Element::new(t),
                    output: Output::Index(0),
                    valid: Verdict::from(!violations.contains(&t)),
                    density: None,
                })
                .collect(),
            t_star: None,
        }
    }

    #[test]
    fn convergence_rule() {
        assert_eq!(detect_convergence(&transcript_with(&[], 1000)), Some(1));
        assert_eq!(detect_convergence(&transcript_with(&[5], 1000)), Some(6));
        assert_eq!(detect_convergence(&transcript_with(&[995], 1000)), None);
        assert_eq!(detect_convergence(&transcript_with(&[900], 1000)), Some(901));
        assert_eq!(detect_convergence(&transcript_with(&[901], 1000)), None);
    }

    #[test]
    fn canonical_generator_on_three_languages() {
        let inst = sperner_hard_instance(3).unwrap();
        let k = inst.target_language().unwrap();
        let mut g = CanonicalIntersection::new(&inst.collection, ProbePolicy::default()).unwrap();
        let mut s = canonical_enumeration(&k, &ProbePolicy::default());
        let config = GameConfig { sampling: Sampling::every(10), ..GameConfig::new(200) };
        let tr = run_game(&mut g, &mut s, &k, Some(&inst.collection), &config).unwrap();
        assert_eq!(tr.t_star, Some(1));
        let p = density_profile(&tr);
        assert_eq!(p.samples.len(), 20);
        assert_eq!(p.sup, Some(Density::new(1, 2)));
        assert_eq!(p.inf, Some(Density::new(1, 2)));
    }

    #[test]
    fn successor_generator_against_its_own_outputs() {
        // Each x + 1 arrives right before x, so x + 1 is never new.
        let k = Language::naturals();
        let mut next = 0u64;
        let mut pending: Option<u64> = None;
        let source = move || -> Result<Element> {
            if let Some(x) = pending.take() {
                return Ok(Element::new(x));
            }
            let x = next;
            next += 2;
            pending = Some(x);
            Ok(Element::new(x + 1))
        };
        let mut s = EnumerationStream::new("interleaved", RepetitionPolicy::Free, 0, Box::new(source));
        let mut g = FnElementGenerator { name: "succ".into(), rule: |x: &Element| x.succ() };
        let tr = run_game(&mut g, &mut s, &k, None, &GameConfig::new(1000)).unwrap();
        assert_eq!(tr.t_star, None);
        assert_eq!(tr.violations().count(), 500);
    }
}
