use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::Element;
use crate::error::{Error, Result};

/// Upper bound on the number of cells of any system, refinements included.
pub const CELL_BUDGET: u32 = 4096;

pub type Density = Ratio<u64>;

/// Declared upper and lower density of a cell, relative to the naturals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellDensity {
    pub upper: Density,
    pub lower: Density,
}

impl CellDensity {
    fn regular(d: Density) -> Self {
        CellDensity { upper: d, lower: d }
    }

    pub fn is_regular(&self) -> bool {
        self.upper == self.lower
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cardinality {
    Finite(Vec<Element>),
    Infinite,
}

/// The infinite part of a labeling: every cell is an infinite set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Core {
    /// Cell `r` holds the naturals congruent to `r` modulo `modulus`.
    Residue { modulus: u64 },
    /// Positions `p = x + 1` that are powers of two `2^m` with `m >= 1` form
    /// the last cell; the remaining positions are dealt round-robin into
    /// `arms` cells in order.
    Dyadic { arms: u64 },
    /// Positions are cut into consecutive blocks `(s_{t-1}, s_t]` with
    /// `s_0 = 0` and `s_t = s_{t-1} + t^2 (1 + s_{t-1})`; block `t` goes to
    /// cell `(t - 1) mod bins`.
    Blocks { bins: u64 },
}

/// Block boundaries `s_0 = 0, s_1, s_2, ...` of the [`Core::Blocks`] labeling.
pub fn block_boundary(t: u64) -> Element {
    let mut s = Element::ZERO;
    for j in 1..=t {
        s = &s + &s.succ().mul_u64(j * j);
    }
    s
}

/// Block `t` containing position `p >= 1`, with its bounds `(s_{t-1}, s_t]`.
fn block_of(p: &Element) -> (u64, Element, Element) {
    let mut prev = Element::ZERO;
    let mut t = 1u64;
    loop {
        let next = &prev + &prev.succ().mul_u64(t * t);
        if *p <= next {
            return (t, prev, next);
        }
        prev = next;
        t += 1;
    }
}

// Number of powers 2^m (m >= 1) at most p.
fn dyadic_count(p: &Element) -> Element {
    match p.bit_len() {
        0 => Element::ZERO,
        b => Element::new(b as u64 - 1),
    }
}

// Position of the q-th (1-based) position that is not a power 2^m, m >= 1.
fn dyadic_arm_position(q: &Element) -> Element {
    let mut p = q.clone();
    loop {
        let next = q + &dyadic_count(&p);
        if next == p {
            break;
        }
        p = next;
    }
    if p.bit_len() > 1 && p.is_power_of_two() {
        p.pred().expect("positive")
    } else {
        p
    }
}

impl Core {
    pub fn cell_count(&self) -> u64 {
        match *self {
            Core::Residue { modulus } => modulus,
            Core::Dyadic { arms } => arms + 1,
            Core::Blocks { bins } => bins,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Core::Residue { modulus } => modulus >= 1,
            Core::Dyadic { arms } => arms >= 1,
            Core::Blocks { bins } => bins >= 1,
        };
        if !ok {
            return Err(Error::InvalidParams(format!("degenerate labeling {self}")));
        }
        if self.cell_count() > CELL_BUDGET as u64 {
            return Err(Error::SizeLimit { n: self.cell_count() as usize, max: CELL_BUDGET as usize });
        }
        Ok(())
    }

    pub fn label(&self, x: &Element) -> u32 {
        match *self {
            Core::Residue { modulus } => x.rem_u64(modulus) as u32,
            Core::Dyadic { arms } => {
                let p = x.succ();
                if p.bit_len() > 1 && p.is_power_of_two() {
                    arms as u32
                } else {
                    let q = &p - &dyadic_count(&p);
                    q.pred().expect("q >= 1").rem_u64(arms) as u32
                }
            }
            Core::Blocks { bins } => {
                let (t, _, _) = block_of(&x.succ());
                ((t - 1) % bins) as u32
            }
        }
    }

    /// Number of `x < n` carrying label `cell`.
    pub fn count_below(&self, cell: u32, n: &Element) -> Element {
        let c = cell as u64;
        match *self {
            Core::Residue { modulus } => {
                if *n > Element::new(c) {
                    n.pred().unwrap().saturating_sub(&Element::new(c)).div_rem_u64(modulus).0.succ()
                } else {
                    Element::ZERO
                }
            }
            Core::Dyadic { arms } => {
                let z = dyadic_count(n);
                if c == arms {
                    return z;
                }
                let q = n - &z;
                if q > Element::new(c) {
                    (&q - &Element::new(c + 1)).div_rem_u64(arms).0.succ()
                } else {
                    Element::ZERO
                }
            }
            Core::Blocks { bins } => {
                let mut total = Element::ZERO;
                let mut prev = Element::ZERO;
                let mut t = 1u64;
                while prev < *n {
                    let next = &prev + &prev.succ().mul_u64(t * t);
                    if (t - 1) % bins == c {
                        let top = if next < *n { &next } else { n };
                        total = &total + &(top - &prev);
                    }
                    prev = next;
                    t += 1;
                }
                total
            }
        }
    }

    /// Least `x >= from` carrying label `cell`.
    pub fn next_in_cell(&self, cell: u32, from: &Element) -> Element {
        let c = cell as u64;
        match *self {
            Core::Residue { modulus } => {
                let r = from.rem_u64(modulus);
                from.add_u64((c + modulus - r) % modulus)
            }
            Core::Dyadic { arms } => {
                let p0 = from.succ();
                if c == arms {
                    let p = if p0 < Element::new(2) { Element::new(2) } else { p0 };
                    let p = if p.is_power_of_two() { p } else { Element::pow2(p.bit_len()) };
                    return p.pred().unwrap();
                }
                let before = from.clone();
                let q0 = &before - &dyadic_count(&before);
                let offset = (c + arms - q0.rem_u64(arms)) % arms;
                let q = q0.add_u64(1 + offset);
                dyadic_arm_position(&q).pred().unwrap()
            }
            Core::Blocks { bins } => {
                let (mut t, _, mut hi) = block_of(&from.succ());
                if (t - 1) % bins == c {
                    return from.clone();
                }
                loop {
                    t += 1;
                    let lo = hi;
                    hi = &lo + &lo.succ().mul_u64(t * t);
                    if (t - 1) % bins == c {
                        return lo;
                    }
                }
            }
        }
    }

    pub fn density(&self, cell: u32) -> CellDensity {
        match *self {
            Core::Residue { modulus } => CellDensity::regular(Ratio::new(1, modulus)),
            Core::Dyadic { arms } => {
                if cell as u64 == arms {
                    CellDensity::regular(Ratio::from_integer(0))
                } else {
                    CellDensity::regular(Ratio::new(1, arms))
                }
            }
            Core::Blocks { bins: 1 } => CellDensity::regular(Ratio::from_integer(1)),
            Core::Blocks { .. } => CellDensity { upper: Ratio::from_integer(1), lower: Ratio::from_integer(0) },
        }
    }

    pub fn cell_name(&self, cell: u32) -> String {
        match *self {
            Core::Residue { modulus } => format!("{cell}mod{modulus}"),
            Core::Dyadic { arms } if cell as u64 == arms => "Z".to_string(),
            Core::Dyadic { .. } => format!("A{}", cell + 1),
            Core::Blocks { .. } => format!("bin{}", cell + 1),
        }
    }

    fn refine(a: &Core, b: &Core) -> Option<Core> {
        match (a, b) {
            _ if a == b => Some(a.clone()),
            (Core::Residue { modulus: 1 }, _) => Some(b.clone()),
            (_, Core::Residue { modulus: 1 }) => Some(a.clone()),
            (Core::Residue { modulus: m }, Core::Residue { modulus: n }) => Some(Core::Residue { modulus: m.lcm(n) }),
            _ => None,
        }
    }

    // Maps a cell of a refinement `fine` of `self` to the cell of `self` containing it.
    fn project_from(&self, fine: &Core, cell: u32) -> u32 {
        match (self, fine) {
            _ if self == fine => cell,
            (Core::Residue { modulus: 1 }, _) => 0,
            (Core::Residue { modulus }, Core::Residue { .. }) => (cell as u64 % modulus) as u32,
            _ => unreachable!("{fine} does not refine {self}"),
        }
    }
}

impl fmt::Display for Core {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Core::Residue { modulus } => write!(f, "residue({modulus})"),
            Core::Dyadic { arms } => write!(f, "dyadic({arms})"),
            Core::Blocks { bins } => write!(f, "blocks({bins})"),
        }
    }
}

/// A labeling of the naturals by finitely many cells.
///
/// The naturals below `threshold` are singleton cells `0..threshold`; every
/// `x >= threshold` gets cell `threshold + core.label(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSystem {
    #[serde(default)]
    pub threshold: u32,
    pub core: Core,
}

impl CellSystem {
    pub fn new(threshold: u32, core: Core) -> Result<Self> {
        core.validate()?;
        let sys = CellSystem { threshold, core };
        if sys.cell_count() > CELL_BUDGET {
            return Err(Error::SizeLimit { n: sys.cell_count() as usize, max: CELL_BUDGET as usize });
        }
        Ok(sys)
    }

    pub fn residue(modulus: u64) -> Self {
        CellSystem::new(0, Core::Residue { modulus }).expect("valid residue system")
    }

    /// The one-cell system.
    pub fn trivial() -> Self {
        CellSystem::residue(1)
    }

    pub fn validate(&self) -> Result<()> {
        CellSystem::new(self.threshold, self.core.clone()).map(|_| ())
    }

    pub fn cell_count(&self) -> u32 {
        self.threshold + self.core.cell_count() as u32
    }

    pub fn label(&self, x: &Element) -> u32 {
        match x.as_u64() {
            Some(v) if v < self.threshold as u64 => v as u32,
            _ => self.threshold + self.core.label(x),
        }
    }

    pub fn cardinality(&self, cell: u32) -> Cardinality {
        if cell < self.threshold {
            Cardinality::Finite(vec![Element::new(cell as u64)])
        } else {
            Cardinality::Infinite
        }
    }

    pub fn is_infinite_cell(&self, cell: u32) -> bool {
        cell >= self.threshold
    }

    pub fn density(&self, cell: u32) -> CellDensity {
        if cell < self.threshold {
            CellDensity::regular(Ratio::from_integer(0))
        } else {
            self.core.density(cell - self.threshold)
        }
    }

    /// Number of `x < n` in `cell`.
    pub fn count_below(&self, cell: u32, n: &Element) -> Element {
        if cell < self.threshold {
            return if Element::new(cell as u64) < *n { Element::ONE } else { Element::ZERO };
        }
        let c = cell - self.threshold;
        let t = Element::new(self.threshold as u64);
        let head = if *n < t { n } else { &t };
        &self.core.count_below(c, n) - &self.core.count_below(c, head)
    }

    /// Least `x >= from` in `cell`, if any.
    pub fn next_in_cell(&self, cell: u32, from: &Element) -> Option<Element> {
        if cell < self.threshold {
            let v = Element::new(cell as u64);
            return (*from <= v).then_some(v);
        }
        let t = Element::new(self.threshold as u64);
        let start = if *from < t { &t } else { from };
        Some(self.core.next_in_cell(cell - self.threshold, start))
    }

    pub fn cell_name(&self, cell: u32) -> String {
        if cell < self.threshold {
            format!("{{{cell}}}")
        } else {
            self.core.cell_name(cell - self.threshold)
        }
    }

    /// Common refinement of two systems (product labeling).
    pub fn refine(a: &CellSystem, b: &CellSystem) -> Result<CellSystem> {
        if a == b {
            return Ok(a.clone());
        }
        let incompatible = || Error::IncompatibleCellSystems { left: a.to_string(), right: b.to_string() };
        let core = Core::refine(&a.core, &b.core).ok_or_else(incompatible)?;
        CellSystem::new(a.threshold.max(b.threshold), core).map_err(|_| incompatible())
    }

    /// Cell of `self` containing the given cell of the refinement `fine`.
    pub fn project_from(&self, fine: &CellSystem, cell: u32) -> u32 {
        if fine == self {
            return cell;
        }
        if cell < fine.threshold {
            return self.label(&Element::new(cell as u64));
        }
        self.threshold + self.core.project_from(&fine.core, cell - fine.threshold)
    }
}

impl fmt::Display for CellSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.threshold > 0 {
            write!(f, "{}+{}", self.threshold, self.core)
        } else {
            write!(f, "{}", self.core)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    // Brute-force reference labels for the dyadic layout over positions 1..=n.
    fn dyadic_reference(arms: u64, n: u64) -> Vec<u32> {
        let mut q = 0u64;
        (1..=n)
            .map(|p| {
                if p >= 2 && p.is_power_of_two() {
                    arms as u32
                } else {
                    q += 1;
                    ((q - 1) % arms) as u32
                }
            })
            .collect()
    }

    #[test]
    fn block_boundaries_follow_the_recurrence() {
        let s: Vec<u64> = (0..=8).map(|t| block_boundary(t).as_u64().unwrap()).collect();
        assert_eq!(s, [0, 1, 9, 99, 1699, 44199, 1635399, 81769999, 5315049999]);
        for t in 1..=8u64 {
            assert_eq!(s[t as usize] + 1, (1 + t * t) * (1 + s[t as usize - 1]));
        }
    }

    #[test]
    fn every_core_agrees_with_brute_force_counts() {
        let cores = [
            Core::Residue { modulus: 1 },
            Core::Residue { modulus: 6 },
            Core::Dyadic { arms: 1 },
            Core::Dyadic { arms: 3 },
            Core::Blocks { bins: 2 },
            Core::Blocks { bins: 3 },
        ];
        for core in cores {
            let labels: Vec<u32> = (0..2000u64).map(|x| core.label(&e(x))).collect();
            if let Core::Dyadic { arms } = core {
                assert_eq!(labels, dyadic_reference(arms, 2000), "{core}");
            }
            for cell in 0..core.cell_count() as u32 {
                let mut seen = 0u64;
                for n in 0..=2000u64 {
                    assert_eq!(core.count_below(cell, &e(n)), e(seen), "{core} cell {cell} n {n}");
                    if n < 2000 && labels[n as usize] == cell {
                        seen += 1;
                    }
                }
                for from in 0..1200u64 {
                    let expected = (from..2000).find(|&x| labels[x as usize] == cell);
                    if let Some(x) = expected {
                        assert_eq!(core.next_in_cell(cell, &e(from)), e(x), "{core} cell {cell} from {from}");
                    }
                }
            }
        }
    }

    #[test]
    fn threshold_cells_are_finite_singletons() {
        let sys = CellSystem::new(3, Core::Residue { modulus: 2 }).unwrap();
        assert_eq!(sys.cell_count(), 5);
        assert_eq!((0..8).map(|x| sys.label(&e(x))).collect::<Vec<_>>(), [0, 1, 2, 4, 3, 4, 3, 4]);
        assert_eq!(sys.cardinality(1), Cardinality::Finite(vec![e(1)]));
        assert_eq!(sys.count_below(3, &e(10)), e(3));
        assert_eq!(sys.next_in_cell(4, &e(0)), Some(e(3)));
        assert_eq!(sys.next_in_cell(1, &e(2)), None);
    }

    #[test]
    fn refinement_projects_back() {
        let a = CellSystem::residue(4);
        let b = CellSystem::new(2, Core::Residue { modulus: 6 }).unwrap();
        let r = CellSystem::refine(&a, &b).unwrap();
        assert_eq!(r, CellSystem::new(2, Core::Residue { modulus: 12 }).unwrap());
        for x in 0..100u64 {
            let fine = r.label(&e(x));
            assert_eq!(a.project_from(&r, fine), a.label(&e(x)));
            assert_eq!(b.project_from(&r, fine), b.label(&e(x)));
        }
        let d = CellSystem::new(0, Core::Dyadic { arms: 2 }).unwrap();
        assert!(matches!(CellSystem::refine(&a, &d), Err(Error::IncompatibleCellSystems { .. })));
        assert_eq!(CellSystem::refine(&CellSystem::trivial(), &d).unwrap(), d);
        let huge = CellSystem::residue(64);
        let other = CellSystem::residue(63 * 65);
        assert!(CellSystem::refine(&huge, &other).is_err());
    }
}
