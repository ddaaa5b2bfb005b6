use std::collections::BTreeSet;

use super::{row, SuiteRow};
use crate::adversaries::{
    canonical_enumeration, default_generation_counterexample, demo_collection, element_memoryless_adversary,
    finitely_repeating_enumeration, identification_counterexample, index_pair_adversary, index_pair_instance,
    AdversaryCase, DEFAULT_BLOCK,
};
use crate::combinatorics::{binomial, is_antichain, middle_layer, symmetric_chain_decomposition};
use crate::domain::{
    almost_compare, is_subset, AlmostOrder, CellSystem, Collection, Element, Language, ProbePolicy, SetExpr,
    Structured, Verdict,
};
use crate::error::{Error, Result};
use crate::generators::{
    seq_decode, seq_encode, unpair, CodingGenerator, CofinalSystem, FnElementGenerator, FnIndexGenerator, Generator,
    IdentifierMode, IncrementalIdentifier, MemorylessCountable, Output,
};
use crate::harness::{
    bruteforce_incremental, classify_single_example, run_game, GameConfig, IndexValidity, SingleExampleClass,
    SuccessCriterion,
};

/// Domain elements scanned for the bad set of the countable generator.
const BAD_SET_SCAN: u64 = 10_000;

/// Union of the finite intersections of nonempty subfamilies of `first`.
fn finite_intersections(first: &[Language]) -> Result<BTreeSet<Element>> {
    let mut out = BTreeSet::new();
    for mask in 1u64..1 << first.len() {
        let exprs: Vec<&SetExpr> = (0..first.len()).filter(|j| mask >> j & 1 == 1).map(|j| first[j].expr()).collect();
        let inter = SetExpr::intersect_all(&exprs)?;
        let s = inter.as_structured().ok_or_else(|| Error::InvalidParams("opaque language".into()))?;
        if let Some(items) = s.finite_elements() {
            out.extend(items);
        }
    }
    Ok(out)
}

fn bad_set_rows(name: &str, targets: &[usize], policy: &ProbePolicy, rows: &mut Vec<SuiteRow>) -> Result<()> {
    let coll = demo_collection(name)?;
    let shift = 1;
    let mut g = MemorylessCountable::new(&coll, shift, policy.clone())?;
    let outputs: Vec<SetExpr> =
        (0..BAD_SET_SCAN).map(|x| g.evaluate(&Element::new(x)).map(|r| r.1)).collect::<Result<_>>()?;
    let family: Vec<Language> =
        (0..=*targets.iter().max().unwrap_or(&0)).map(|i| coll.get(i)).collect::<Result<_>>()?;
    for &t in targets {
        let z = t as u64 + 1;
        let k = &family[t];
        let u = finite_intersections(&family[..=t])?;
        let mut bad = Vec::new();
        for (x, out) in outputs.iter().enumerate() {
            let x = Element::new(x as u64);
            if k.contains(&x) && is_subset(out, k.expr(), policy)? != Verdict::True {
                bad.push(x);
            }
        }
        let outside: Vec<&Element> =
            bad.iter().filter(|x| !(x.add_u64(shift) < Element::new(z) || u.contains(x))).collect();
        let shown: Vec<String> = bad.iter().take(6).map(Element::short_repr).collect();
        rows.push(row(
            6,
            format!("{name} z={z} bad set"),
            format!(
                "|B_K|={} [{}] U_z={:?}, {} outside",
                bad.len(),
                shown.join(","),
                u.iter().map(Element::short_repr).collect::<Vec<_>>(),
                outside.len()
            ),
            "B_K ⊆ {x : x+1 < z} ∪ U_z",
            outside.is_empty(),
        ));
    }
    Ok(())
}

fn repeating_rows(name: &str, targets: &[usize], policy: &ProbePolicy, rows: &mut Vec<SuiteRow>) -> Result<()> {
    let coll = demo_collection(name)?;
    for &t in targets {
        let k = coll.get(t)?;
        let mut stars = Vec::new();
        for seed in 0..3 {
            let mut g = MemorylessCountable::new(&coll, 1, policy.clone())?;
            let mut stream = finitely_repeating_enumeration(&k, 3, seed, DEFAULT_BLOCK, policy)?;
            let config = GameConfig { policy: policy.clone(), ..GameConfig::new(1500) };
            let tr = run_game(&mut g, &mut stream, &k, Some(&coll), &config)?;
            stars.push(tr.t_star);
        }
        let shown: Vec<String> = stars.iter().map(|s| s.map_or("none".into(), |v| v.to_string())).collect();
        rows.push(row(
            6,
            format!("{name} z={} cap 3", t + 1),
            format!("t* over 3 seeds: {}", shown.join(",")),
            "t* found, exact subsets after it",
            stars.iter().all(Option::is_some),
        ));
    }
    Ok(())
}

pub(super) fn memoryless(policy: &ProbePolicy) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    bad_set_rows("length_threshold", &[0, 1, 2, 4, 7], policy, &mut rows)?;
    bad_set_rows("mixed", &[0, 1, 2], policy, &mut rows)?;
    repeating_rows("length_threshold", &[0, 2, 7], policy, &mut rows)?;
    repeating_rows("mixed", &[0, 1, 2], policy, &mut rows)?;

    let pair = index_pair_instance()?;
    let class = classify_single_example(&pair.collection, policy)?;
    rows.push(row(7, "classify index pair", format!("{class:?}"), "Generable", class == SingleExampleClass::Generable));
    let r2 = CellSystem::residue(2);
    let evens = Language::from_cells(r2.clone(), [0])?;
    let odds_zero =
        Language::structured(Structured::from_cells(r2, [1])?.union(&Structured::finite([Element::ZERO])?)?)?;
    let class = classify_single_example(&Collection::finite(vec![evens.clone(), odds_zero])?, policy)?;
    rows.push(row(
        7,
        "classify evens, odds∪{0}",
        format!("{class:?}"),
        "Counterexample { x: 0 }",
        class == SingleExampleClass::Counterexample { x: Element::ZERO },
    ));

    let languages = pair.languages();
    let c = pair.certificate.base.clone().ok_or_else(|| Error::InvalidParams("no base set".into()))?;
    for answer in [0usize, 1] {
        let rule = move |x: &Element| match x.rem_u64(4) {
            0 => answer,
            2 => 1,
            _ => 0,
        };
        let adv = index_pair_adversary([&languages[0], &languages[1]], &c, rule, policy)?;
        let planted: Vec<u64> = (1..=500).filter(|&t| adv.planted(t)).collect();
        let target = languages[adv.target].clone();
        let mut stream = adv.stream;
        let mut g = FnIndexGenerator { name: format!("constant {answer} on C"), rule };
        let config =
            GameConfig { index_validity: IndexValidity::Generation, policy: policy.clone(), ..GameConfig::new(500) };
        let tr = run_game(&mut g, &mut stream, &target, Some(&pair.collection), &config)?;
        let failures = tr.violations().count();
        let planted_failed = planted.iter().all(|&t| tr.rounds[t as usize - 1].valid == Verdict::False);
        rows.push(row(
            7,
            format!("index pair, constant {answer} on C"),
            format!("{failures} failures in 500 rounds, planted rounds all failed: {planted_failed}"),
            "≥ 50 failures",
            failures >= 50 && planted_failed,
        ));
    }

    let successor = |x: &Element| x.add_u64(2);
    let adv = element_memoryless_adversary(successor, &evens, policy)?;
    let planted: Vec<u64> = (1..=200).filter(|&t| adv.planted(t)).collect();
    let case = adv.case.clone();
    let mut stream = adv.stream;
    let mut g = FnElementGenerator { name: "x+2".into(), rule: successor };
    let config = GameConfig { policy: policy.clone(), ..GameConfig::new(200) };
    let tr = run_game(&mut g, &mut stream, &evens, None, &config)?;
    let failed = planted.iter().filter(|&&t| tr.rounds[t as usize - 1].valid == Verdict::False).count();
    rows.push(row(
        7,
        "element adversary, x+2 on evens",
        format!("case {case:?}, {failed}/{} planted rounds failed", planted.len()),
        "every planted round fails",
        case == AdversaryCase::Image && !planted.is_empty() && failed == planted.len(),
    ));
    Ok(rows)
}

/// Demo collections of size 2 to 6 used for the identifier.
const IDENTIFY_DEMOS: &[&str] = &["evens_naturals", "mixed", "identification", "quarters", "sperner5", "thresholds6"];

pub(super) fn identify(policy: &ProbePolicy) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for &name in IDENTIFY_DEMOS {
        let coll = demo_collection(name)?;
        let langs = coll.languages().ok_or_else(|| Error::InvalidParams("finite demo expected".into()))?.to_vec();
        let mut runs = 0usize;
        let mut good = 0usize;
        let mut latest = 0u64;
        for t in 0..langs.len() {
            let k = &langs[t];
            let mut learner = IncrementalIdentifier::new(&coll, IdentifierMode::Approximate, policy)?;
            let order = learner.order().to_vec();
            let ks = k.as_structured().ok_or_else(|| Error::InvalidParams("opaque language".into()))?;
            let z = order
                .iter()
                .position(|&i| langs[i].as_structured().is_some_and(|s| s.set_eq(ks).unwrap_or(false)))
                .expect("the target is in the collection");
            for seed in 0..20 {
                runs += 1;
                learner.reset();
                let mut stream = finitely_repeating_enumeration(k, 3, seed, DEFAULT_BLOCK, policy)?;
                let mut ok = true;
                let mut prev = 0usize;
                let mut reached = false;
                let mut changes = 0usize;
                let mut last_change = 0u64;
                for round in 1..=400u64 {
                    learner.observe(&stream.next_element()?);
                    let p = learner.position();
                    ok &= p >= prev && !(reached && p != z);
                    if p != prev {
                        changes += 1;
                        last_change = round;
                    }
                    reached |= p == z;
                    prev = p;
                }
                let final_lang = &langs[learner.current()];
                ok &= changes < langs.len()
                    && almost_compare(final_lang.expr(), k.expr(), policy)? == AlmostOrder::Equivalent;
                latest = latest.max(last_change);
                good += ok as usize;
            }
        }
        rows.push(row(
            8,
            format!("identifier on {name} ({} languages)", langs.len()),
            format!("{good}/{runs} runs good, last index change by round {latest}"),
            "all runs: nondecreasing, fixed after the target's first exact index, final guess ∼_F K",
            good == runs,
        ));
    }
    Ok(rows)
}

pub(super) fn bruteforce() -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    let inst = identification_counterexample()?;
    let report = bruteforce_incremental(&inst, true, SuccessCriterion::Exact)?;
    let holds = report.pigeonhole.as_ref().is_some_and(|p| p.holds);
    rows.push(row(
        8,
        "bruteforce identification, uniform",
        format!(
            "{} candidates, {} survivors, pigeonhole holds: {holds}",
            report.candidates_total,
            report.survivors.len()
        ),
        "59049 candidates, 0 survivors",
        report.candidates_total == 59049 && report.survivors.is_empty() && holds,
    ));
    let report = bruteforce_incremental(&inst, false, SuccessCriterion::Exact)?;
    rows.push(row(
        8,
        "bruteforce identification, parity classes",
        format!("{} candidates, {} survivors", report.candidates_total, report.survivors.len()),
        "0 survivors",
        report.survivors.is_empty(),
    ));
    let gen = default_generation_counterexample()?;
    let report = bruteforce_incremental(&gen, true, SuccessCriterion::Generation)?;
    rows.push(row(
        8,
        "bruteforce generation, uniform",
        format!(
            "{} candidates, {} survivors over {} texts",
            report.candidates_total,
            report.survivors.len(),
            report.texts.len()
        ),
        "0 survivors",
        report.survivors.is_empty(),
    ));

    // The same texts are identified up to finite differences.
    let policy = ProbePolicy::default();
    let base = inst.certificate.base.clone().ok_or_else(|| Error::InvalidParams("no base set".into()))?;
    let base = Language::new(base, &policy)?;
    let langs = inst.languages();
    let mut good = 0usize;
    for text in &inst.certificate.texts {
        let mut learner = IncrementalIdentifier::new(&inst.collection, IdentifierMode::Approximate, &policy)?;
        text.prefix.iter().for_each(|x| {
            learner.observe(x);
        });
        let mut tail = canonical_enumeration(&base, &policy);
        for _ in 0..200 {
            learner.observe(&tail.next_element()?);
        }
        let order = almost_compare(langs[learner.current()].expr(), langs[text.target].expr(), &policy)?;
        good += (order == AlmostOrder::Equivalent) as usize;
    }
    rows.push(row(
        8,
        "approximate identifier on the hard texts",
        format!("{good}/{} texts end ∼_F target", inst.certificate.texts.len()),
        "all texts",
        good == inst.certificate.texts.len(),
    ));
    Ok(rows)
}

/// Probe points for cofinality: small values and large powers of two.
fn probe_points() -> Vec<Element> {
    (0..100u64)
        .map(|j| if j < 50 { Element::new(j * j * 37) } else { Element::pow2(3 * j as usize).add_u64(j) })
        .collect()
}

pub(super) fn coding(policy: &ProbePolicy) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for name in ["evens_naturals", "mixed", "quarters", "identification"] {
        let coll = demo_collection(name)?;
        let langs = coll.languages().expect("finite demo").to_vec();
        let system = CofinalSystem::new(&coll, policy.clone())?;
        let n = system.len();
        let mut seen = BTreeSet::new();
        let mut disjoint = true;
        for i in 0..n {
            for c in system.explicit(i, 2048)? {
                disjoint &= langs[i].contains(&c) && seen.insert(c);
            }
        }
        let mut spots = 0usize;
        for p in probe_points() {
            for i in 0..n {
                let y = system.next_member(i, &p)?;
                let mut ok = y >= p && langs[i].contains(&y) && system.position(i, &y)?.is_some();
                for j in (0..n).filter(|&j| j != i) {
                    ok &= system.position(j, &y)?.is_none();
                }
                spots += ok as usize;
            }
        }
        rows.push(row(
            9,
            format!("cofinal subsets of {name}"),
            format!("disjoint on 2048 steps: {disjoint}, {spots}/{} probe checks", 100 * n),
            "disjoint, every probe passes",
            disjoint && spots == 100 * n,
        ));
    }

    let coll = demo_collection("evens_naturals")?;
    for (t, label) in [(0usize, "evens"), (1, "naturals")] {
        let k = coll.get(t)?;
        let mut g = CodingGenerator::new(&coll, policy.clone(), 20)?;
        let mut stream = canonical_enumeration(&k, policy);
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        let mut guesses = Vec::new();
        let mut increasing = true;
        let mut decoded_ok = 0usize;
        let mut prev: Option<Element> = None;
        for _ in 0..20 {
            let x = stream.next_element()?;
            inputs.push(x.clone());
            let Output::Element(s) = g.step(&x)? else { unreachable!("coding emits elements") };
            increasing &= s > x && prev.as_ref().map_or(true, |p| s > *p);
            let d = g.decode(&s)?;
            let (code, _) = unpair(&d.position);
            if d.prefix == inputs && seq_decode(&code) == inputs && seq_encode(&inputs) == code {
                decoded_ok += 1;
            }
            guesses.push(d.index);
            prev = Some(s.clone());
            outputs.push(s);
        }
        let last = *guesses.last().expect("20 rounds");
        let settle = guesses.iter().rposition(|&g| g != last).map_or(0, |p| p + 1);
        let fresh = (settle..20).filter(|&r| k.contains(&outputs[r]) && !inputs[..=r].contains(&outputs[r])).count();
        let bits = outputs.last().map_or(0, Element::bit_len);
        rows.push(row(
            9,
            format!("coding on evens, naturals; target {label}"),
            format!(
                "increasing {increasing}, decode {decoded_ok}/20, settled at round {} with {fresh}/{} outputs in K\\S_t, last codeword {bits} bits",
                settle + 1,
                20 - settle
            ),
            "increasing, 20/20 decoded, all post-settling outputs fresh in K",
            increasing && decoded_ok == 20 && fresh == 20 - settle && bits > 64,
        ));
    }
    Ok(rows)
}

pub(super) fn scd() -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for n in 0..=12usize {
        let chains = symmetric_chain_decomposition(n)?;
        let mut seen = vec![false; 1 << n];
        let mut ok = true;
        for chain in &chains {
            let (lo, hi) = (chain[0].count_ones() as usize, chain[chain.len() - 1].count_ones() as usize);
            ok &= lo + hi == n;
            for w in chain.windows(2) {
                ok &= w[0] & w[1] == w[0] && (w[1] & !w[0]).count_ones() == 1;
            }
            for &m in chain {
                ok &= !std::mem::replace(&mut seen[m as usize], true);
            }
        }
        ok &= seen.iter().all(|&s| s);
        let width = binomial(n as u64, n as u64 / 2);
        let count_ok = Element::new(chains.len() as u64) == width;
        rows.push(row(
            10,
            format!("scd n={n}"),
            format!("{} chains, partition and symmetry {}", chains.len(), if ok { "hold" } else { "broken" }),
            format!("{} chains", width.short_repr()),
            ok && count_ok,
        ));
    }
    let mut layers = 0usize;
    for n in 0..=6usize {
        let layer = middle_layer(n)?;
        layers +=
            (is_antichain(&layer) && Element::new(layer.len() as u64) == binomial(n as u64, n as u64 / 2)) as usize;
    }
    rows.push(row(10, "middle layers n ≤ 6", format!("{layers}/7 antichains of full width"), "7/7", layers == 7));
    Ok(rows)
}
