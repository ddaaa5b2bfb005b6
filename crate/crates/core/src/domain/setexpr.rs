use std::borrow::Cow;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::cells::CellSystem;
use super::runs::RunSet;
use super::Element;
use crate::error::{Error, Result};

/// Cap on the number of elements held in the finite corrections of one set.
pub const CORRECTION_CAP: u64 = 10_000;

/// A set given by a cell system: the union of some cells, with finitely many
/// elements removed (`minus`) and added (`plus`).
///
/// Values are kept normalized: `cells` lists infinite cells only, every
/// element of `plus` lies outside those cells and every element of `minus`
/// inside them. On a fixed system the normal form is unique, so structural
/// equality is extensional equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structured {
    system: CellSystem,
    cells: BTreeSet<u32>,
    plus: RunSet,
    minus: RunSet,
}

/// Membership predicate plus increasing enumerator, provided by a registered
/// builtin.
pub trait OpaqueSet: Send + Sync + fmt::Debug {
    fn builtin(&self) -> &str;
    fn params(&self) -> serde_json::Value;
    fn contains(&self, x: &Element) -> bool;
    /// Least member `m` with `from <= m < limit`.
    fn next_in(&self, from: &Element, limit: &Element) -> Option<Element>;
    /// A declared bound: every member is below it.
    fn universe_bound(&self) -> Option<Element> {
        None
    }
    /// Exact count of members below `n`, when cheaply available.
    fn count_below(&self, _n: &Element) -> Option<Element> {
        None
    }
}

#[derive(Clone, Debug)]
pub enum SetExpr {
    Structured(Structured),
    Opaque(Arc<dyn OpaqueSet>),
}

// Which label classes of a segment need a correction.
enum Uniform {
    All,
    None,
    Mixed,
}

fn classify_cells(system: &CellSystem, want: &dyn Fn(u32) -> bool) -> Uniform {
    let n = system.cell_count();
    let hits = (0..n).filter(|&c| want(c)).count() as u32;
    match hits {
        0 => Uniform::None,
        h if h == n => Uniform::All,
        _ => Uniform::Mixed,
    }
}

// Appends to `out` the elements of `[lo, hi)` whose label satisfies `want`.
fn push_filtered(
    out: &mut RunSet,
    system: &CellSystem,
    lo: &Element,
    hi: &Element,
    class: &Uniform,
    want: &dyn Fn(u32) -> bool,
) {
    match class {
        Uniform::None => {}
        Uniform::All => out.push_back(lo.clone(), hi.clone()),
        Uniform::Mixed => {
            let mut x = lo.clone();
            while x < *hi {
                if want(system.label(&x)) {
                    out.push_back(x.clone(), x.succ());
                }
                x = x.succ();
            }
        }
    }
}

fn filter_runs(runs: &RunSet, system: &CellSystem, want: &dyn Fn(u32) -> bool) -> RunSet {
    let class = classify_cells(system, want);
    let mut out = RunSet::new();
    for (lo, hi) in runs.runs() {
        push_filtered(&mut out, system, lo, hi, &class, want);
    }
    out
}

impl Structured {
    /// Builds the set `(cells \ minus) ∪ plus` and normalizes it. `cells`
    /// may name finite cells.
    pub fn new(system: CellSystem, cells: BTreeSet<u32>, plus: RunSet, minus: RunSet) -> Result<Self> {
        system.validate()?;
        if let Some(&bad) = cells.iter().find(|&&c| c >= system.cell_count()) {
            return Err(Error::InvalidParams(format!("cell {bad} not in {system}")));
        }
        let infinite: BTreeSet<u32> = cells.iter().copied().filter(|&c| system.is_infinite_cell(c)).collect();
        let finite_members = RunSet::from_elements(
            cells
                .iter()
                .filter(|&&c| !system.is_infinite_cell(c))
                .map(|&c| Element::new(c as u64))
                .filter(|x| !minus.contains(x)),
        );
        let plus_all = plus.union(&finite_members);
        let plus = filter_runs(&plus_all, &system, &|c| !infinite.contains(&c));
        let minus_in = filter_runs(&minus, &system, &|c| infinite.contains(&c));
        let minus = subtract_runs(&minus_in, &plus_all);
        let out = Structured { system, cells: infinite, plus, minus };
        out.check_cap()?;
        Ok(out)
    }

    fn check_cap(&self) -> Result<()> {
        let count = &self.plus.len() + &self.minus.len();
        if count > Element::new(CORRECTION_CAP) {
            return Err(Error::CorrectionsTooLarge { count: count.to_string(), cap: CORRECTION_CAP });
        }
        Ok(())
    }

    /// Union of the given cells.
    pub fn from_cells<I: IntoIterator<Item = u32>>(system: CellSystem, cells: I) -> Result<Self> {
        Structured::new(system, cells.into_iter().collect(), RunSet::new(), RunSet::new())
    }

    pub fn full(system: CellSystem) -> Self {
        let n = system.cell_count();
        Structured::from_cells(system, 0..n).expect("all cells of a valid system")
    }

    pub fn empty(system: CellSystem) -> Self {
        Structured::from_cells(system, []).expect("valid system")
    }

    pub fn finite<I: IntoIterator<Item = Element>>(items: I) -> Result<Self> {
        Structured::new(CellSystem::trivial(), BTreeSet::new(), RunSet::from_elements(items), RunSet::new())
    }

    pub fn system(&self) -> &CellSystem {
        &self.system
    }

    pub fn cells(&self) -> &BTreeSet<u32> {
        &self.cells
    }

    pub fn plus(&self) -> &RunSet {
        &self.plus
    }

    pub fn minus(&self) -> &RunSet {
        &self.minus
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.plus.contains(x) || (self.cells.contains(&self.system.label(x)) && !self.minus.contains(x))
    }

    pub fn is_finite(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty() && self.plus.is_empty()
    }

    /// Members of a finite set in increasing order.
    pub fn finite_elements(&self) -> Option<Vec<Element>> {
        self.is_finite().then(|| self.plus.iter().collect())
    }

    /// Re-expresses the set on a refinement of its system.
    pub fn lift(&self, fine: &CellSystem) -> Result<Structured> {
        if *fine == self.system {
            return Ok(self.clone());
        }
        let cells =
            (0..fine.cell_count()).filter(|&p| self.cells.contains(&self.system.project_from(fine, p))).collect();
        Structured::new(fine.clone(), cells, self.plus.clone(), self.minus.clone())
    }

    /// Pointwise combination of two sets by a boolean function.
    pub fn combine(&self, other: &Structured, f: impl Fn(bool, bool) -> bool) -> Result<Structured> {
        let system = CellSystem::refine(&self.system, &other.system)?;
        let a = self.lift(&system)?;
        let b = other.lift(&system)?;
        let cells: BTreeSet<u32> = (0..system.cell_count())
            .filter(|&p| system.is_infinite_cell(p) && f(a.cells.contains(&p), b.cells.contains(&p)))
            .collect();

        let mut points: Vec<&Element> = a
            .plus
            .boundaries()
            .chain(a.minus.boundaries())
            .chain(b.plus.boundaries())
            .chain(b.minus.boundaries())
            .collect();
        points.sort();
        points.dedup();

        let mut plus = RunSet::new();
        let mut minus = RunSet::new();
        for w in points.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let status = |s: &Structured| -> Option<bool> {
                if s.plus.contains(lo) {
                    Some(true)
                } else if s.minus.contains(lo) {
                    Some(false)
                } else {
                    None
                }
            };
            let (sa, sb) = (status(&a), status(&b));
            if sa.is_none() && sb.is_none() {
                continue;
            }
            let result = |c: u32| {
                let ma = sa.unwrap_or_else(|| a.cells.contains(&c));
                let mb = sb.unwrap_or_else(|| b.cells.contains(&c));
                f(ma, mb)
            };
            let want_plus = |c: u32| result(c) && !cells.contains(&c);
            let want_minus = |c: u32| !result(c) && cells.contains(&c);
            let cp = classify_cells(&system, &want_plus);
            push_filtered(&mut plus, &system, lo, hi, &cp, &want_plus);
            let cm = classify_cells(&system, &want_minus);
            push_filtered(&mut minus, &system, lo, hi, &cm, &want_minus);
        }
        let out = Structured { system, cells, plus, minus };
        out.check_cap()?;
        Ok(out)
    }

    pub fn intersect(&self, other: &Structured) -> Result<Structured> {
        self.combine(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Structured) -> Result<Structured> {
        self.combine(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &Structured) -> Result<Structured> {
        self.combine(other, |a, b| a && !b)
    }

    /// Intersection of many sets in one pass.
    pub fn intersect_all(sets: &[&Structured]) -> Result<Structured> {
        let Some(first) = sets.first() else {
            return Ok(Structured::full(CellSystem::trivial()));
        };
        let mut system = first.system.clone();
        for s in &sets[1..] {
            system = CellSystem::refine(&system, &s.system)?;
        }
        let lifted: Vec<Cow<Structured>> = sets
            .iter()
            .map(|s| if s.system == system { Ok(Cow::Borrowed(*s)) } else { s.lift(&system).map(Cow::Owned) })
            .collect::<Result<_>>()?;
        let mut cells: BTreeSet<u32> = lifted[0].cells.clone();
        for s in &lifted[1..] {
            cells.retain(|c| s.cells.contains(c));
        }
        let minus_all = RunSet::union_all(lifted.iter().map(|s| &s.minus));
        let minus = filter_runs(&minus_all, &system, &|c| cells.contains(&c));
        let plus_all = RunSet::union_all(lifted.iter().map(|s| &s.plus));
        let plus = RunSet::from_elements(
            plus_all.iter().filter(|x| !cells.contains(&system.label(x)) && lifted.iter().all(|s| s.contains(x))),
        );
        let out = Structured { system, cells, plus, minus };
        out.check_cap()?;
        Ok(out)
    }

    pub fn is_subset(&self, other: &Structured) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn set_eq(&self, other: &Structured) -> Result<bool> {
        Ok(self.combine(other, |a, b| a != b)?.is_empty())
    }

    /// Number of members below `n`.
    pub fn count_below(&self, n: &Element) -> Element {
        let cells = self.cells.iter().fold(Element::ZERO, |acc, &c| &acc + &self.system.count_below(c, n));
        &(&cells - &self.minus.count_below(n)) + &self.plus.count_below(n)
    }

    /// Least member `>= from`.
    pub fn next_at_or_after(&self, from: &Element) -> Option<Element> {
        let from_plus = self.plus.first_at_or_after(from);
        let mut y = from.clone();
        let from_cells = loop {
            let cand = self.cells.iter().filter_map(|&c| self.system.next_in_cell(c, &y)).min();
            match cand {
                None => break None,
                Some(x) => match self.minus.run_end(&x) {
                    Some(end) => y = end,
                    None => break Some(x),
                },
            }
        };
        match (from_plus, from_cells) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// The `n`-th member (0-based) in increasing order.
    pub fn nth(&self, n: &Element) -> Option<Element> {
        let target = n.succ();
        // Least bound `b` with count_below(b) >= n + 1; the member is b - 1.
        let mut hi = Element::new(1);
        loop {
            if self.count_below(&hi) >= target {
                break;
            }
            if self.is_finite() && hi > self.plus.max().unwrap_or(Element::ZERO) {
                return None;
            }
            hi = hi.mul_u64(2);
        }
        let mut lo = Element::ZERO;
        while lo.succ() < hi {
            let mid = (&lo + &hi).div_rem_u64(2).0;
            if self.count_below(&mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi.pred()
    }
}

fn subtract_runs(a: &RunSet, b: &RunSet) -> RunSet {
    if b.is_empty() {
        return a.clone();
    }
    RunSet::from_elements(a.iter().filter(|x| !b.contains(x)))
}

impl fmt::Display for Structured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.cells.iter().map(|&c| self.system.cell_name(c)).collect();
        write!(f, "{}[{}]", self.system, names.join(","))?;
        let show = |runs: &RunSet| -> String {
            runs.runs()
                .iter()
                .map(|(lo, hi)| {
                    if hi == &lo.succ() {
                        lo.short_repr()
                    } else {
                        format!("{}..{}", lo.short_repr(), hi.short_repr())
                    }
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        if !self.plus.is_empty() {
            write!(f, "+{{{}}}", show(&self.plus))?;
        }
        if !self.minus.is_empty() {
            write!(f, "-{{{}}}", show(&self.minus))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Opaque combinators

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Combinator {
    And,
    Or,
    Minus,
}

#[derive(Debug)]
pub(crate) struct Combined {
    pub(crate) op: Combinator,
    pub(crate) left: SetExpr,
    pub(crate) right: SetExpr,
}

impl OpaqueSet for Combined {
    fn builtin(&self) -> &str {
        match self.op {
            Combinator::And => "and",
            Combinator::Or => "or",
            Combinator::Minus => "minus",
        }
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "left": self.left.to_json(), "right": self.right.to_json() })
    }

    fn contains(&self, x: &Element) -> bool {
        let (l, r) = (self.left.contains(x), self.right.contains(x));
        match self.op {
            Combinator::And => l && r,
            Combinator::Or => l || r,
            Combinator::Minus => l && !r,
        }
    }

    fn next_in(&self, from: &Element, limit: &Element) -> Option<Element> {
        match self.op {
            Combinator::And => {
                let mut y = from.clone();
                loop {
                    let p = self.left.next_in(&y, limit)?;
                    let q = self.right.next_in(&p, limit)?;
                    if q == p {
                        return Some(p);
                    }
                    y = q;
                }
            }
            Combinator::Or => match (self.left.next_in(from, limit), self.right.next_in(from, limit)) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            Combinator::Minus => {
                let mut y = from.clone();
                loop {
                    let p = self.left.next_in(&y, limit)?;
                    if !self.right.contains(&p) {
                        return Some(p);
                    }
                    y = p.succ();
                }
            }
        }
    }

    fn universe_bound(&self) -> Option<Element> {
        let (l, r) = (self.left.universe_bound(), self.right.universe_bound());
        match self.op {
            Combinator::And => match (l, r) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            Combinator::Or => Some(l?.max(r?)),
            Combinator::Minus => l,
        }
    }
}

// ---------------------------------------------------------------------------
// SetExpr

impl SetExpr {
    pub fn structured(s: Structured) -> Self {
        SetExpr::Structured(s)
    }

    pub fn naturals() -> Self {
        SetExpr::Structured(Structured::full(CellSystem::trivial()))
    }

    pub fn as_structured(&self) -> Option<&Structured> {
        match self {
            SetExpr::Structured(s) => Some(s),
            SetExpr::Opaque(_) => None,
        }
    }

    pub fn contains(&self, x: &Element) -> bool {
        match self {
            SetExpr::Structured(s) => s.contains(x),
            SetExpr::Opaque(o) => o.contains(x),
        }
    }

    /// Least member `m` with `from <= m < limit`.
    pub fn next_in(&self, from: &Element, limit: &Element) -> Option<Element> {
        match self {
            SetExpr::Structured(s) => s.next_at_or_after(from).filter(|x| x < limit),
            SetExpr::Opaque(o) => o.next_in(from, limit),
        }
    }

    pub fn universe_bound(&self) -> Option<Element> {
        match self {
            SetExpr::Structured(s) => s.finite_elements().map(|v| v.last().map_or(Element::ZERO, Element::succ)),
            SetExpr::Opaque(o) => o.universe_bound(),
        }
    }

    fn combine(&self, other: &SetExpr, op: Combinator) -> Result<SetExpr> {
        if let (SetExpr::Structured(a), SetExpr::Structured(b)) = (self, other) {
            let s = match op {
                Combinator::And => a.intersect(b)?,
                Combinator::Or => a.union(b)?,
                Combinator::Minus => a.difference(b)?,
            };
            return Ok(SetExpr::Structured(s));
        }
        let (all_a, none_a) = (self.is_everything(), self.is_nothing());
        let (all_b, none_b) = (other.is_everything(), other.is_nothing());
        let shortcut = match op {
            Combinator::And if all_a || none_b => Some(other),
            Combinator::And if all_b || none_a => Some(self),
            Combinator::Or if none_a || all_b => Some(other),
            Combinator::Or if none_b || all_a => Some(self),
            Combinator::Minus if none_b || none_a => Some(self),
            Combinator::Minus if all_b => return Ok(SetExpr::Structured(Structured::empty(CellSystem::trivial()))),
            _ => None,
        };
        if let Some(s) = shortcut {
            return Ok(s.clone());
        }
        Ok(SetExpr::Opaque(Arc::new(Combined { op, left: self.clone(), right: other.clone() })))
    }

    fn is_everything(&self) -> bool {
        matches!(self, SetExpr::Structured(s) if s.minus.is_empty() && s.cells.len() as u32 == s.system.cell_count() && s.system.threshold == 0)
    }

    fn is_nothing(&self) -> bool {
        matches!(self, SetExpr::Structured(s) if s.is_empty())
    }

    pub fn intersect(&self, other: &SetExpr) -> Result<SetExpr> {
        self.combine(other, Combinator::And)
    }

    pub fn union(&self, other: &SetExpr) -> Result<SetExpr> {
        self.combine(other, Combinator::Or)
    }

    pub fn difference(&self, other: &SetExpr) -> Result<SetExpr> {
        self.combine(other, Combinator::Minus)
    }

    /// Intersection of a family; the empty family gives the naturals.
    pub fn intersect_all(sets: &[&SetExpr]) -> Result<SetExpr> {
        let structured: Option<Vec<&Structured>> = sets.iter().map(|s| s.as_structured()).collect();
        if let Some(parts) = structured {
            return Structured::intersect_all(&parts).map(SetExpr::Structured);
        }
        let mut acc = SetExpr::naturals();
        for s in sets {
            acc = acc.intersect(s)?;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("set expressions serialize")
    }

    pub fn describe(&self) -> String {
        match self {
            SetExpr::Structured(s) => s.to_string(),
            SetExpr::Opaque(o) => format!("{}({})", o.builtin(), o.params()),
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SetExprJson {
    Structured {
        system: CellSystem,
        cells: Vec<u32>,
        #[serde(default)]
        plus: Vec<Element>,
        #[serde(default)]
        minus: Vec<Element>,
    },
    Opaque {
        builtin: String,
        #[serde(default)]
        params: serde_json::Value,
    },
}

impl Serialize for SetExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let json = match self {
            SetExpr::Structured(s) => SetExprJson::Structured {
                system: s.system.clone(),
                cells: s.cells.iter().copied().collect(),
                plus: s.plus.iter().collect(),
                minus: s.minus.iter().collect(),
            },
            SetExpr::Opaque(o) => SetExprJson::Opaque { builtin: o.builtin().to_string(), params: o.params() },
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SetExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match SetExprJson::deserialize(deserializer)? {
            SetExprJson::Structured { system, cells, plus, minus } => Structured::new(
                system,
                cells.into_iter().collect(),
                RunSet::from_elements(plus),
                RunSet::from_elements(minus),
            )
            .map(SetExpr::Structured)
            .map_err(D::Error::custom),
            SetExprJson::Opaque { builtin, params } => {
                super::registry::build(&builtin, &params).map_err(D::Error::custom)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::cells::Core;

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    fn residue(m: u64, cells: &[u32]) -> Structured {
        Structured::from_cells(CellSystem::residue(m), cells.iter().copied()).unwrap()
    }

    fn members(s: &Structured, n: u64) -> Vec<u64> {
        (0..n).filter(|&x| s.contains(&e(x))).collect()
    }

    #[test]
    fn corrections_normalize_against_cells() {
        let sys = CellSystem::residue(2);
        let s =
            Structured::new(sys, [0].into(), RunSet::from_elements([e(2), e(3)]), RunSet::from_elements([e(4), e(5)]))
                .unwrap();
        // 2 is already even, 5 is not even: both corrections are redundant.
        assert_eq!(s.plus().iter().collect::<Vec<_>>(), vec![e(3)]);
        assert_eq!(s.minus().iter().collect::<Vec<_>>(), vec![e(4)]);
        assert_eq!(members(&s, 10), [0, 2, 3, 6, 8]);
    }

    #[test]
    fn mixed_systems_refine_by_lcm() {
        let evens = residue(2, &[0]);
        let thirds = residue(3, &[0]);
        let both = evens.intersect(&thirds).unwrap();
        assert_eq!(both.system(), &CellSystem::residue(6));
        assert_eq!(both.cells(), &BTreeSet::from([0]));
        let either = evens.union(&thirds).unwrap();
        assert_eq!(members(&either, 10), [0, 2, 3, 4, 6, 8, 9]);
    }

    #[test]
    fn difference_tracks_finite_corrections() {
        let nat = Structured::full(CellSystem::trivial());
        let tail = nat.difference(&Structured::finite((0..5).map(e)).unwrap()).unwrap();
        assert_eq!(tail.minus().runs(), &[(e(0), e(5))]);
        assert!(!tail.is_finite());
        let evens = residue(2, &[0]);
        let odd_tail = tail.difference(&evens).unwrap();
        assert_eq!(members(&odd_tail, 12), [5, 7, 9, 11]);
        assert_eq!(odd_tail.minus().iter().collect::<Vec<_>>(), [1, 3].map(e));
    }

    #[test]
    fn intersect_all_agrees_with_pairwise() {
        let nat = Structured::full(CellSystem::trivial());
        let tails: Vec<Structured> =
            (1..40u64).map(|l| nat.difference(&Structured::finite((0..l).map(e)).unwrap()).unwrap()).collect();
        let refs: Vec<&Structured> = tails.iter().collect();
        let all = Structured::intersect_all(&refs).unwrap();
        let mut pairwise = nat.clone();
        for t in &tails {
            pairwise = pairwise.intersect(t).unwrap();
        }
        assert_eq!(all, pairwise);
        assert_eq!(all.next_at_or_after(&e(0)), Some(e(39)));
    }

    #[test]
    fn counting_and_nth_agree_with_enumeration() {
        let sys = CellSystem::new(0, Core::Dyadic { arms: 3 }).unwrap();
        let s =
            Structured::new(sys, [1, 3].into(), RunSet::from_elements([e(0)]), RunSet::from_elements([e(9)])).unwrap();
        let listed = members(&s, 3000);
        for (i, &x) in listed.iter().enumerate() {
            assert_eq!(s.nth(&e(i as u64)), Some(e(x)));
            assert_eq!(s.count_below(&e(x)), e(i as u64));
        }
        let mut cur = Some(e(0));
        for &x in &listed {
            let got = cur.clone().and_then(|c| s.next_at_or_after(&c)).unwrap();
            assert_eq!(got, e(x));
            cur = Some(got.succ());
        }
    }

    #[test]
    fn corrections_beyond_cap_are_rejected() {
        let nat = Structured::full(CellSystem::residue(2));
        let too_many = Structured::finite((0..20_002).map(e)).unwrap_err();
        assert!(matches!(too_many, Error::CorrectionsTooLarge { .. }));
        let ok = nat.difference(&Structured::finite((0..10_000).map(e)).unwrap());
        assert!(ok.is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = residue(4, &[0, 1]).union(&Structured::finite([e(2)]).unwrap()).unwrap();
        let json = serde_json::to_string(&SetExpr::Structured(s.clone())).unwrap();
        let back: SetExpr = serde_json::from_str(&json).unwrap();
        assert_eq!(back.as_structured(), Some(&s));
        let bad = r#"{"kind":"structured","system":{"core":{"kind":"residue","modulus":2}},"cells":[0],"extra":1}"#;
        assert!(serde_json::from_str::<SetExpr>(bad).is_err());
    }
}
