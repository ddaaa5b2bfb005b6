use super::Element;

/// A finite set of naturals stored as sorted, disjoint, non-adjacent
/// half-open runs `[lo, hi)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RunSet {
    runs: Vec<(Element, Element)>,
}

impl RunSet {
    pub fn new() -> Self {
        RunSet::default()
    }

    /// The run `[lo, hi)`; empty when `hi <= lo`.
    pub fn range(lo: Element, hi: Element) -> Self {
        if hi <= lo {
            RunSet::new()
        } else {
            RunSet { runs: vec![(lo, hi)] }
        }
    }

    pub fn from_elements<I: IntoIterator<Item = Element>>(items: I) -> Self {
        let mut v: Vec<Element> = items.into_iter().collect();
        v.sort();
        v.dedup();
        let mut out = RunSet::new();
        for x in v {
            out.push_back(x.clone(), x.succ());
        }
        out
    }

    /// Appends a run that starts at or after every stored element.
    pub(crate) fn push_back(&mut self, lo: Element, hi: Element) {
        if hi <= lo {
            return;
        }
        if let Some(last) = self.runs.last_mut() {
            debug_assert!(last.1 <= lo || last.0 <= lo);
            if lo <= last.1 {
                if hi > last.1 {
                    last.1 = hi;
                }
                return;
            }
        }
        self.runs.push((lo, hi));
    }

    pub fn runs(&self) -> &[(Element, Element)] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of stored elements.
    pub fn len(&self) -> Element {
        self.runs.iter().fold(Element::ZERO, |acc, (lo, hi)| &acc + &(hi - lo))
    }

    pub fn contains(&self, x: &Element) -> bool {
        let idx = self.runs.partition_point(|(lo, _)| lo <= x);
        idx > 0 && *x < self.runs[idx - 1].1
    }

    /// Number of stored elements strictly below `bound`.
    pub fn count_below(&self, bound: &Element) -> Element {
        let mut total = Element::ZERO;
        for (lo, hi) in &self.runs {
            if lo >= bound {
                break;
            }
            let top = if hi < bound { hi } else { bound };
            total = &total + &(top - lo);
        }
        total
    }

    /// Least stored element `>= x`.
    pub fn first_at_or_after(&self, x: &Element) -> Option<Element> {
        let idx = self.runs.partition_point(|(_, hi)| hi <= x);
        self.runs.get(idx).map(|(lo, _)| if lo > x { lo.clone() } else { x.clone() })
    }

    /// End of the run containing `x`, if any.
    pub fn run_end(&self, x: &Element) -> Option<Element> {
        let idx = self.runs.partition_point(|(lo, _)| lo <= x);
        (idx > 0 && *x < self.runs[idx - 1].1).then(|| self.runs[idx - 1].1.clone())
    }

    pub fn max(&self) -> Option<Element> {
        self.runs.last().map(|(_, hi)| hi.pred().expect("runs are nonempty"))
    }

    pub fn iter(&self) -> impl Iterator<Item = Element> + '_ {
        self.runs.iter().flat_map(|(lo, hi)| {
            let mut cur = lo.clone();
            let hi = hi.clone();
            std::iter::from_fn(move || {
                (cur < hi).then(|| {
                    let out = cur.clone();
                    cur = cur.succ();
                    out
                })
            })
        })
    }

    pub fn union(&self, other: &RunSet) -> RunSet {
        let mut all: Vec<&(Element, Element)> = self.runs.iter().chain(other.runs.iter()).collect();
        all.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = RunSet::new();
        for (lo, hi) in all {
            out.push_back(lo.clone(), hi.clone());
        }
        out
    }

    /// Union of many run sets in one pass.
    pub fn union_all<'a, I: IntoIterator<Item = &'a RunSet>>(sets: I) -> RunSet {
        let mut all: Vec<&(Element, Element)> = sets.into_iter().flat_map(|s| s.runs.iter()).collect();
        all.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = RunSet::new();
        for (lo, hi) in all {
            out.push_back(lo.clone(), hi.clone());
        }
        out
    }

    /// Run boundaries, i.e. every point where membership may change.
    pub(crate) fn boundaries(&self) -> impl Iterator<Item = &Element> {
        self.runs.iter().flat_map(|(lo, hi)| [lo, hi])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    #[test]
    fn adjacent_elements_collapse_into_runs() {
        let s = RunSet::from_elements([3, 1, 2, 7, 8, 10].map(e));
        assert_eq!(s.runs().len(), 3);
        assert_eq!(s.len(), e(6));
        assert!(s.contains(&e(2)) && !s.contains(&e(4)) && s.contains(&e(10)));
        assert_eq!(s.count_below(&e(8)), e(4));
        assert_eq!(s.first_at_or_after(&e(4)), Some(e(7)));
        assert_eq!(s.first_at_or_after(&e(8)), Some(e(8)));
        assert_eq!(s.first_at_or_after(&e(11)), None);
        assert_eq!(s.run_end(&e(7)), Some(e(9)));
        assert_eq!(s.iter().collect::<Vec<_>>(), [1, 2, 3, 7, 8, 10].map(e));
    }

    #[test]
    fn union_merges_overlaps() {
        let a = RunSet::range(e(0), e(5));
        let b = RunSet::range(e(3), e(9));
        let c = RunSet::range(e(20), e(21));
        let u = RunSet::union_all([&a, &b, &c]);
        assert_eq!(u.runs(), &[(e(0), e(9)), (e(20), e(21))]);
        assert_eq!(a.union(&b), RunSet::range(e(0), e(9)));
    }
}
