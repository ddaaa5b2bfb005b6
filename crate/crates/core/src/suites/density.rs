use std::collections::BTreeSet;

use super::{row, SuiteRow};
use crate::adversaries::{
    canonical_enumeration, lower_density_instance, sperner_hard_instance, window_hard_instance, window_stage_start,
    HardInstance,
};
use crate::combinatorics::{minimax_buffer, minimax_memoryless};
use crate::domain::{block_boundary, Density, Element, Language, ProbePolicy, Structured, Verdict};
use crate::error::{Error, Result};
use crate::generators::{
    BufferGenerator, CanonicalIntersection, Generator, Output, OutputMode, WindowGenerator, WindowStrategy,
};
use crate::harness::{density_profile, run_game, GameConfig, GameTranscript, Sampling};

fn config(rounds: usize, every: usize, policy: &ProbePolicy) -> GameConfig {
    GameConfig { sampling: Sampling::every(every), policy: policy.clone(), ..GameConfig::new(rounds) }
}

fn structured_output(out: &Output) -> Result<&Structured> {
    match out {
        Output::Set(s) => s.as_structured().ok_or_else(|| Error::InvalidParams("expected a structured output".into())),
        _ => Err(Error::InvalidParams("expected a set output".into())),
    }
}

fn cells(inst: &HardInstance) -> Result<Vec<Structured>> {
    let n = inst.certificate.cells.unwrap_or(0) as usize;
    (0..n).map(|i| inst.cell(i)).collect()
}

fn list(values: &BTreeSet<Density>) -> String {
    let v: Vec<String> = values.iter().map(ToString::to_string).collect();
    format!("{{{}}}", v.join(", "))
}

fn show_t_star(tr: &GameTranscript) -> String {
    tr.t_star.map_or("none".to_string(), |t| t.to_string())
}

/// Canonical intersection on the Sperner instances: exact density of every
/// post-convergence output, outputs equal to cells, and the antichain
/// identity; then the zero-lower-density bins.
pub(super) fn minimax(policy: &ProbePolicy) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for k in 2..=6usize {
        let inst = sperner_hard_instance(k)?;
        let target = inst.target_language()?;
        let expected = minimax_memoryless(k as u64)?;
        let mut g = CanonicalIntersection::new(&inst.collection, policy.clone())?;
        let mut stream = canonical_enumeration(&target, policy);
        let tr = run_game(&mut g, &mut stream, &target, Some(&inst.collection), &config(5000, 50, policy))?;
        let profile = density_profile(&tr);
        let values: BTreeSet<Density> = profile.samples.iter().map(|s| s.1).collect();
        let from = tr.t_star.unwrap_or(u64::MAX);
        let exact = tr.rounds.iter().filter(|r| r.round >= from).all(|r| r.density.as_ref().map_or(true, |d| d.exact));
        let pass = tr.t_star.is_some() && exact && !values.is_empty() && values.iter().all(|v| *v == expected);
        rows.push(row(
            1,
            format!("sperner k={k}"),
            format!("t*={} samples={} values={}", show_t_star(&tr), profile.samples.len(), list(&values)),
            expected,
            pass,
        ));

        let a = cells(&inst)?;
        let mut matched = 0usize;
        let mut after = 0usize;
        for r in tr.rounds.iter().filter(|r| r.round >= from) {
            after += 1;
            let s = structured_output(&r.output)?;
            if a.iter().any(|c| c.set_eq(s).unwrap_or(false)) {
                matched += 1;
            }
        }
        let langs = inst.structured()?;
        let mut identity = 0usize;
        for (i, &mask) in inst.certificate.masks.iter().enumerate() {
            let mut acc = langs[0].clone();
            for j in (0..64).filter(|j| mask >> j & 1 == 1) {
                acc = acc.intersect(&langs[j + 1])?;
            }
            if acc.set_eq(&a[i])? {
                identity += 1;
            }
        }
        rows.push(row(
            2,
            format!("sperner k={k} cells"),
            format!("{matched}/{after} outputs are cells, identity on {identity}/{} cells", a.len()),
            "every output a cell, identity on every cell",
            tr.t_star.is_some() && after > 0 && matched == after && identity == a.len(),
        ));
    }

    for k in [3usize, 4] {
        let inst = lower_density_instance(k)?;
        let bins = cells(&inst)?;
        let m = bins.len() as u64;
        let mut bound_ok = true;
        let mut ratios = Vec::new();
        for (i, bin) in bins.iter().enumerate() {
            let off = |t: u64| (t - 1) % m != i as u64;
            for t in (1..=8u64).filter(|&t| off(t)) {
                let s = block_boundary(t);
                let c = bin.count_below(&s);
                bound_ok &= c.mul_u64(1 + t * t) <= s;
            }
            let t = (7..).find(|&t| off(t)).expect("some block skips the bin");
            let s = block_boundary(t);
            let c = bin.count_below(&s);
            ratios.push((t, c.mul_u64(50) < s, format!("{}/{}", c.short_repr(), s.short_repr())));
        }
        let ratio_ok = ratios.iter().all(|r| r.1);
        let shown: Vec<String> = ratios.iter().enumerate().map(|(i, r)| format!("bin{i}@t={}: {}", r.0, r.2)).collect();
        rows.push(row(
            3,
            format!("lower density k={k} checkpoints"),
            format!("bounds {}; {}", if bound_ok { "hold" } else { "broken" }, shown.join(", ")),
            "count·(1+t²) ≤ s_t off-bin for t ≤ 8, ratio < 1/50 at the first off-bin t ≥ 7",
            bound_ok && ratio_ok,
        ));

        let target = inst.target_language()?;
        let mut g = CanonicalIntersection::new(&inst.collection, policy.clone())?;
        let mut stream = canonical_enumeration(&target, policy);
        let tr = run_game(&mut g, &mut stream, &target, Some(&inst.collection), &config(300, 0, policy))?;
        let single = tr
            .rounds
            .iter()
            .filter(|r| structured_output(&r.output).is_ok_and(|s| bins.iter().any(|b| b.set_eq(s).unwrap_or(false))))
            .count();
        rows.push(row(
            3,
            format!("lower density k={k} outputs"),
            format!("{single}/{} outputs are single bins", tr.rounds.len()),
            "every output a single bin",
            single == tr.rounds.len(),
        ));
    }
    Ok(rows)
}

/// Window generators of several widths against the staged enumeration.
pub(super) fn window(policy: &ProbePolicy) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for k in [3usize, 5] {
        let inst = window_hard_instance(k)?;
        let target = inst.target_language()?;
        let n = inst.certificate.cells.unwrap_or(0);
        let sys = inst.certificate.system.clone().ok_or_else(|| Error::InvalidParams("no cell layout".into()))?;
        let z = Structured::from_cells(sys.clone(), [n as u32])?;
        let arms: Vec<Structured> =
            (0..n as u32).map(|i| Structured::from_cells(sys.clone(), [i, n as u32])).collect::<Result<_>>()?;
        let bound = Density::new(1, n);
        let spec = inst.enumeration.clone().ok_or_else(|| Error::InvalidParams("no enumeration".into()))?;
        for w in [1usize, 2, 4, 8] {
            for strategy in [WindowStrategy::LastElement, WindowStrategy::IntersectWindow] {
                let mut g = WindowGenerator::new(&inst.collection, w, strategy, policy.clone())?;
                let mut stream = spec.build(&target, policy)?;
                let tr = run_game(&mut g, &mut stream, &target, Some(&inst.collection), &config(2000, 10, policy))?;
                let start = window_stage_start(w as u64, n) + w as u64 - 1;
                let mut total = 0usize;
                let mut inside = 0usize;
                let mut sup: Option<Density> = None;
                for r in tr.rounds.iter().filter(|r| r.round >= start) {
                    total += 1;
                    let s = structured_output(&r.output)?;
                    if r.valid == Verdict::True
                        && (s.is_subset(&z)? || arms.iter().any(|a| s.is_subset(a).unwrap_or(false)))
                    {
                        inside += 1;
                    }
                    if let Some(d) = &r.density {
                        sup = Some(sup.map_or(d.upper, |m: Density| m.max(d.upper)));
                    }
                }
                let pass = total > 0 && inside == total && sup.is_some_and(|s| s <= bound);
                rows.push(row(
                    4,
                    format!("window k={k} w={w} {}", strategy_name(strategy)),
                    format!(
                        "from round {start}: {inside}/{total} in Z or A_i∪Z, sup {}",
                        sup.map_or("none".to_string(), |d| d.to_string())
                    ),
                    format!("all, sup ≤ {bound}"),
                    pass,
                ));
            }
        }
    }
    Ok(rows)
}

fn strategy_name(s: WindowStrategy) -> &'static str {
    match s {
        WindowStrategy::LastElement => "last",
        WindowStrategy::IntersectWindow => "intersect",
    }
}

/// Buffer generator that checks its own state after every round.
struct Audited {
    inner: BufferGenerator,
    languages: Vec<Language>,
    target: usize,
    limit: usize,
    stored: Vec<Element>,
    residual: Vec<usize>,
    ok: bool,
}

impl Generator for Audited {
    fn mode(&self) -> OutputMode {
        self.inner.mode()
    }
    fn name(&self) -> String {
        self.inner.name()
    }
    fn step(&mut self, x: &Element) -> Result<Output> {
        let out = self.inner.step(x)?;
        let st = self.inner.state();
        let recomputed: Vec<usize> =
            (0..self.languages.len()).filter(|&i| st.stored.iter().all(|y| self.languages[i].contains(y))).collect();
        self.ok &= st.stored.len() <= self.limit
            && st.stored.starts_with(&self.stored)
            && st.residual == recomputed
            && st.residual.iter().all(|i| self.residual.contains(i))
            && st.residual.contains(&self.target)
            && st.residual.len() + st.stored.len() <= self.languages.len();
        self.stored = st.stored.clone();
        self.residual = st.residual.clone();
        Ok(out)
    }
}

/// Buffer generators on the Sperner instances, for every target.
pub(super) fn buffer(policy: &ProbePolicy) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for (k, b) in [(5usize, 1usize), (5, 2), (5, 3), (4, 2), (6, 4)] {
        let inst = sperner_hard_instance(k)?;
        let expected = minimax_buffer(k as u64, b as u64)?.0;
        let languages = inst.languages().to_vec();
        let mut worst: Option<Density> = None;
        let mut all_ok = true;
        let mut insertions = 0usize;
        for target in 0..languages.len() {
            let tl = languages[target].clone();
            let mut g = Audited {
                inner: BufferGenerator::new(&inst.collection, b, policy.clone())?,
                languages: languages.clone(),
                target,
                limit: b.min(k - 1),
                stored: Vec::new(),
                residual: (0..languages.len()).collect(),
                ok: true,
            };
            let mut stream = canonical_enumeration(&tl, policy);
            let tr = run_game(&mut g, &mut stream, &tl, Some(&inst.collection), &config(3000, 25, policy))?;
            let sup = density_profile(&tr).sup;
            all_ok &= g.ok && tr.t_star.is_some();
            insertions = insertions.max(g.stored.len());
            worst = match (worst, sup) {
                (_, None) => {
                    all_ok = false;
                    worst
                }
                (None, Some(s)) => Some(s),
                (Some(w), Some(s)) => Some(w.min(s)),
            };
        }
        let pass = all_ok && worst.is_some_and(|w| w >= expected);
        rows.push(row(
            5,
            format!("buffer k={k} b={b}"),
            format!(
                "min sup over {} targets {}, max insertions {insertions}, invariants {}",
                languages.len(),
                worst.map_or("none".to_string(), |d| d.to_string()),
                if all_ok { "hold" } else { "broken" }
            ),
            format!("sup ≥ {expected}, insertions ≤ {}", b.min(k - 1)),
            pass,
        ));
    }
    Ok(rows)
}
