use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::cells::Density;
use super::setexpr::{SetExpr, Structured};
use super::Element;
use crate::error::{Error, Result};

pub const DEFAULT_WITNESS_COUNT: usize = 64;
pub const DEFAULT_HORIZON: u64 = 1_000_000;
pub const HORIZON_ENV: &str = "LIMITGEN_PROBE_HORIZON";

/// Bounds on every search over an opaque set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbePolicy {
    pub witness_count: usize,
    pub horizon: Element,
}

impl Default for ProbePolicy {
    fn default() -> Self {
        ProbePolicy { witness_count: DEFAULT_WITNESS_COUNT, horizon: Element::new(DEFAULT_HORIZON) }
    }
}

impl ProbePolicy {
    /// Default policy, with the horizon taken from `LIMITGEN_PROBE_HORIZON`
    /// when set.
    pub fn from_env() -> Result<Self> {
        let mut policy = ProbePolicy::default();
        if let Ok(v) = std::env::var(HORIZON_ENV) {
            policy.horizon = v.parse().map_err(|e| Error::InvalidParams(format!("{HORIZON_ENV}: {e}")))?;
        }
        Ok(policy)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FinitenessVerdict {
    Finite(Vec<Element>),
    /// Either exact (structured sets) or backed by `witness_count` members
    /// found below the horizon.
    Infinite {
        witnesses: Vec<Element>,
    },
    Unknown,
}

impl FinitenessVerdict {
    pub fn is_infinite(&self) -> bool {
        matches!(self, FinitenessVerdict::Infinite { .. })
    }
    pub fn is_finite(&self) -> bool {
        matches!(self, FinitenessVerdict::Finite(_))
    }
}

/// Tri-state truth value for questions only probes can answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    True,
    False,
    Unknown,
}

impl From<bool> for Verdict {
    fn from(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }
}

/// First members of `s` (at most `count`), searching below `limit`.
pub fn first_members(s: &SetExpr, count: usize, limit: &Element) -> Vec<Element> {
    let mut out = Vec::new();
    let mut from = Element::ZERO;
    while out.len() < count {
        match s.next_in(&from, limit) {
            Some(x) => {
                from = x.succ();
                out.push(x);
            }
            None => break,
        }
    }
    out
}

pub fn finiteness(s: &SetExpr, policy: &ProbePolicy) -> FinitenessVerdict {
    match s {
        SetExpr::Structured(st) => match st.finite_elements() {
            Some(v) => FinitenessVerdict::Finite(v),
            None => {
                let mut witnesses = Vec::new();
                let mut from = Element::ZERO;
                while witnesses.len() < policy.witness_count {
                    let x = st.next_at_or_after(&from).expect("infinite set has successors");
                    from = x.succ();
                    witnesses.push(x);
                }
                FinitenessVerdict::Infinite { witnesses }
            }
        },
        SetExpr::Opaque(_) => {
            let bound = s.universe_bound();
            let limit = match &bound {
                Some(b) if *b <= policy.horizon => b.clone(),
                _ => policy.horizon.clone(),
            };
            let found = first_members(s, policy.witness_count, &limit);
            if found.len() >= policy.witness_count {
                if bound.is_some_and(|b| b <= limit) {
                    // Exhaustive within a declared bound: enumerate the rest.
                    let mut all = found;
                    let mut from = all.last().unwrap().succ();
                    while let Some(x) = s.next_in(&from, &limit) {
                        from = x.succ();
                        all.push(x);
                    }
                    return FinitenessVerdict::Finite(all);
                }
                FinitenessVerdict::Infinite { witnesses: found }
            } else if bound.is_some_and(|b| b <= policy.horizon) {
                FinitenessVerdict::Finite(found)
            } else {
                FinitenessVerdict::Unknown
            }
        }
    }
}

/// Number of members of `s` below `n`.
pub fn count_below(s: &SetExpr, n: &Element, policy: &ProbePolicy) -> Result<Element> {
    match s {
        SetExpr::Structured(st) => Ok(st.count_below(n)),
        SetExpr::Opaque(o) => {
            if let Some(c) = o.count_below(n) {
                return Ok(c);
            }
            if *n > policy.horizon.succ() {
                return Err(Error::ProbeExhausted(format!("counting {} below {n}", s.describe())));
            }
            let mut count = 0u64;
            let mut from = Element::ZERO;
            while let Some(x) = s.next_in(&from, n) {
                count += 1;
                from = x.succ();
            }
            Ok(Element::new(count))
        }
    }
}

/// The `n`-th member (0-based) of `s`.
pub fn nth_element(s: &SetExpr, n: u64, policy: &ProbePolicy) -> Result<Element> {
    match s {
        SetExpr::Structured(st) => st
            .nth(&Element::new(n))
            .ok_or_else(|| Error::ProbeExhausted(format!("{} has fewer than {} members", s.describe(), n + 1))),
        SetExpr::Opaque(_) => {
            let limit = policy.horizon.succ();
            let mut from = Element::ZERO;
            let mut idx = 0u64;
            loop {
                let x = s
                    .next_in(&from, &limit)
                    .ok_or_else(|| Error::ProbeExhausted(format!("member {n} of {}", s.describe())))?;
                if idx == n {
                    return Ok(x);
                }
                idx += 1;
                from = x.succ();
            }
        }
    }
}

/// Exact density ratios of `s` within `k` at a schedule of prefix sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityEstimate {
    pub horizons: Vec<u64>,
    pub ratios: Vec<Density>,
    pub upper_est: Density,
    pub lower_est: Density,
}

/// Default sampling schedule: `2^j` for `4 <= j <= 20`.
pub fn default_schedule() -> Vec<u64> {
    (4..=20).map(|j| 1u64 << j).collect()
}

pub const DEFAULT_BURN_IN: f64 = 0.5;

/// Ratios `|s ∩ K_{<=n}| / n`, where `K_{<=n}` is the first `n` members of
/// `k`. The estimates are the max and min over horizons from index
/// `floor(burn_in * len)` on.
pub fn empirical_density(
    s: &SetExpr,
    k: &SetExpr,
    horizons: &[u64],
    burn_in: f64,
    policy: &ProbePolicy,
) -> Result<DensityEstimate> {
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(Error::InvalidParams("density horizons must be positive".into()));
    }
    let both = s.intersect(k)?;
    let mut ratios = Vec::with_capacity(horizons.len());
    for &n in horizons {
        let bound = nth_element(k, n - 1, policy)?.succ();
        let count = count_below(&both, &bound, policy)?;
        let c = count.as_u64().ok_or_else(|| Error::InvalidParams("count overflow".into()))?;
        ratios.push(Ratio::new(c, n));
    }
    let skip = ((burn_in.clamp(0.0, 1.0) * horizons.len() as f64).floor() as usize).min(horizons.len() - 1);
    let tail = &ratios[skip..];
    Ok(DensityEstimate {
        horizons: horizons.to_vec(),
        upper_est: *tail.iter().max().unwrap(),
        lower_est: *tail.iter().min().unwrap(),
        ratios,
    })
}

/// Upper density of `s` within `k` from declared cell densities; finite
/// corrections contribute nothing. `None` when the declared data do not
/// determine it.
pub fn exact_upper_density(s: &Structured, k: &Structured) -> Result<Option<Density>> {
    let both = s.intersect(k)?;
    let sys = both.system().clone();
    let k = k.lift(&sys)?;
    let sk = both.cells();
    let kc = k.cells();
    if kc.is_empty() {
        return Ok(None);
    }
    if sk.is_empty() {
        return Ok(Some(Ratio::from_integer(0)));
    }
    if sk == kc {
        return Ok(Some(Ratio::from_integer(1)));
    }
    let zero = Ratio::from_integer(0);
    let regular = |c: &u32| sys.density(*c).is_regular();
    let k_is_everything = kc.len() as u32 == (0..sys.cell_count()).filter(|&c| sys.is_infinite_cell(c)).count() as u32;
    if kc.iter().all(regular) {
        let total: Density = kc.iter().fold(zero, |acc, c| acc + sys.density(*c).upper);
        if total == zero {
            return Ok(None);
        }
        let part: Density = sk.iter().fold(zero, |acc, c| acc + sys.density(*c).upper);
        return Ok(Some(part / total));
    }
    if k_is_everything {
        if sk.len() == 1 {
            return Ok(Some(sys.density(*sk.iter().next().unwrap()).upper));
        }
        if sk.iter().all(regular) {
            return Ok(Some(sk.iter().fold(zero, |acc, c| acc + sys.density(*c).upper)));
        }
    }
    Ok(None)
}

/// Relation between two sets up to finite differences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlmostOrder {
    /// Finite symmetric difference.
    Equivalent,
    /// `a \ b` finite, `b \ a` infinite.
    Below,
    /// `b \ a` finite, `a \ b` infinite.
    Above,
    Incomparable,
    Unknown,
}

/// Whether `a \ b` is finite.
pub fn almost_subset(a: &SetExpr, b: &SetExpr, policy: &ProbePolicy) -> Result<Verdict> {
    let diff = a.difference(b)?;
    Ok(match finiteness(&diff, policy) {
        FinitenessVerdict::Finite(_) => Verdict::True,
        FinitenessVerdict::Infinite { .. } => Verdict::False,
        FinitenessVerdict::Unknown => Verdict::Unknown,
    })
}

pub fn almost_compare(a: &SetExpr, b: &SetExpr, policy: &ProbePolicy) -> Result<AlmostOrder> {
    let ab = almost_subset(a, b, policy)?;
    let ba = almost_subset(b, a, policy)?;
    Ok(match (ab, ba) {
        (Verdict::True, Verdict::True) => AlmostOrder::Equivalent,
        (Verdict::True, Verdict::False) => AlmostOrder::Below,
        (Verdict::False, Verdict::True) => AlmostOrder::Above,
        (Verdict::False, Verdict::False) => AlmostOrder::Incomparable,
        _ => AlmostOrder::Unknown,
    })
}

/// Exact or probed subset test.
pub fn is_subset(a: &SetExpr, b: &SetExpr, policy: &ProbePolicy) -> Result<Verdict> {
    if let (SetExpr::Structured(x), SetExpr::Structured(y)) = (a, b) {
        return Ok(x.is_subset(y)?.into());
    }
    let diff = a.difference(b)?;
    let limit = policy.horizon.succ();
    if diff.next_in(&Element::ZERO, &limit).is_some() {
        return Ok(Verdict::False);
    }
    Ok(match diff.universe_bound() {
        Some(bound) if bound <= limit => Verdict::True,
        _ => Verdict::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::cells::{CellSystem, Core};
    use crate::domain::registry;

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    fn residue(m: u64, cells: &[u32]) -> SetExpr {
        SetExpr::Structured(Structured::from_cells(CellSystem::residue(m), cells.iter().copied()).unwrap())
    }

    #[test]
    fn structured_finiteness_is_exact() {
        let evens = residue(2, &[0]);
        match finiteness(&evens, &ProbePolicy::default()) {
            FinitenessVerdict::Infinite { witnesses } => {
                assert_eq!(witnesses.len(), 64);
                assert_eq!(witnesses[63], e(126));
            }
            v => panic!("{v:?}"),
        }
        let small = SetExpr::Structured(Structured::finite([e(3), e(5)]).unwrap());
        assert_eq!(finiteness(&small, &ProbePolicy::default()), FinitenessVerdict::Finite(vec![e(3), e(5)]));
    }

    #[test]
    fn opaque_finiteness_uses_declared_bounds() {
        let squares = registry::build("squares", &serde_json::json!({})).unwrap();
        assert!(finiteness(&squares, &ProbePolicy::default()).is_infinite());
        let window = SetExpr::Structured(Structured::finite((0..50).map(e)).unwrap());
        let small_squares = squares.intersect(&window).unwrap();
        assert_eq!(
            finiteness(&small_squares, &ProbePolicy::default()),
            FinitenessVerdict::Finite([0, 1, 4, 9, 16, 25, 36, 49].map(e).to_vec())
        );
        let tight = ProbePolicy { witness_count: 64, horizon: e(100) };
        assert_eq!(finiteness(&squares, &tight), FinitenessVerdict::Unknown);
    }

    #[test]
    fn density_of_halves_and_sparse_sets() {
        let nat = SetExpr::naturals();
        let evens = residue(2, &[0]);
        let est = empirical_density(&evens, &nat, &[10, 100, 1000], 0.5, &ProbePolicy::default()).unwrap();
        assert_eq!(est.upper_est, Ratio::new(1, 2));
        assert_eq!(est.lower_est, Ratio::new(1, 2));
        let squares = registry::build("squares", &serde_json::json!({})).unwrap();
        let est = empirical_density(&squares, &nat, &default_schedule(), 0.5, &ProbePolicy::default()).unwrap();
        assert!(est.upper_est < Ratio::new(1, 50));
        // Multiples of four inside the evens: half of every prefix of K.
        let fours = residue(4, &[0]);
        let est = empirical_density(&fours, &evens, &[8, 64], 0.0, &ProbePolicy::default()).unwrap();
        assert_eq!(est.ratios, vec![Ratio::new(1, 2); 2]);
    }

    #[test]
    fn declared_densities() {
        let sys = CellSystem::new(0, Core::Dyadic { arms: 3 }).unwrap();
        let nat = Structured::full(sys.clone());
        let arm_and_z = Structured::from_cells(sys.clone(), [0, 3]).unwrap();
        assert_eq!(exact_upper_density(&arm_and_z, &nat).unwrap(), Some(Ratio::new(1, 3)));
        let z = Structured::from_cells(sys, [3]).unwrap();
        assert_eq!(exact_upper_density(&z, &nat).unwrap(), Some(Ratio::from_integer(0)));
        let blocks = CellSystem::new(0, Core::Blocks { bins: 2 }).unwrap();
        let bin = Structured::from_cells(blocks.clone(), [0]).unwrap();
        assert_eq!(exact_upper_density(&bin, &Structured::full(blocks)).unwrap(), Some(Ratio::from_integer(1)));
        let fours = Structured::from_cells(CellSystem::residue(4), [0]).unwrap();
        let evens = Structured::from_cells(CellSystem::residue(2), [0]).unwrap();
        assert_eq!(exact_upper_density(&fours, &evens).unwrap(), Some(Ratio::new(1, 2)));
    }

    #[test]
    fn almost_order_cases() {
        let p = ProbePolicy::default();
        let evens = residue(2, &[0]);
        let evens_plus = evens.union(&SetExpr::Structured(Structured::finite([e(1)]).unwrap())).unwrap();
        let nat = SetExpr::naturals();
        let odds = residue(2, &[1]);
        assert_eq!(almost_compare(&evens, &evens_plus, &p).unwrap(), AlmostOrder::Equivalent);
        assert_eq!(almost_compare(&evens, &nat, &p).unwrap(), AlmostOrder::Below);
        assert_eq!(almost_compare(&nat, &odds, &p).unwrap(), AlmostOrder::Above);
        assert_eq!(almost_compare(&evens, &odds, &p).unwrap(), AlmostOrder::Incomparable);
    }
}
