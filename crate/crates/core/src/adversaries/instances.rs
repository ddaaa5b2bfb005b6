use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::streams::StreamSpec;
use crate::combinatorics::{middle_layer, sperner_width};
use crate::domain::{
    count_below, nth_element, CellSystem, Collection, Core, CountableFamily, Element, Language, OpaqueSet, ProbePolicy,
    SetExpr, Structured,
};
use crate::error::{Error, Result};

/// Construction parameters recorded alongside an instance.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Number of cells `A_i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<u64>,
    /// `masks[i]` has bit `j` set when `L_{j+1}` contains `A_{i+1}`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub masks: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<CellSystem>,
    /// Special points, for instances built around a shared base set.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symbols: Vec<Element>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<SetExpr>,
    /// Texts `prefix · base` and the index of the language each enumerates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub texts: Vec<Text>,
    /// Prefixes that any correct incremental learner must keep apart.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prefixes: Vec<Vec<Element>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Text {
    pub prefix: Vec<Element>,
    pub target: usize,
}

/// A collection, a target in it, and optionally a fixed enumeration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardInstance {
    pub name: String,
    pub collection: Collection,
    /// Index of the target (0-based).
    pub target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<StreamSpec>,
    pub certificate: Certificate,
}

impl HardInstance {
    pub fn target_language(&self) -> Result<Language> {
        self.collection.get(self.target)
    }

    pub fn languages(&self) -> &[Language] {
        self.collection.languages().expect("instances are finite")
    }

    /// The languages as structured sets.
    pub fn structured(&self) -> Result<Vec<Structured>> {
        self.languages()
            .iter()
            .map(|l| l.as_structured().cloned().ok_or_else(|| Error::InvalidParams("opaque language".into())))
            .collect()
    }

    /// `A_i` (0-based `i`) as a set, for instances with a cell layout.
    pub fn cell(&self, i: usize) -> Result<Structured> {
        let sys = self.certificate.system.clone().ok_or_else(|| Error::InvalidParams("no cell layout".into()))?;
        Structured::from_cells(sys, [i as u32])
    }
}

fn antichain_layout(k: usize) -> Result<(usize, Vec<u64>)> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("k must be at least 2, got {k}")));
    }
    let n = k - 1;
    let masks = middle_layer(n)?;
    let width = sperner_width(n as u64).as_u64().expect("small width");
    debug_assert_eq!(width as usize, masks.len());
    Ok((n, masks))
}

fn cells_with(masks: &[u64], j: usize) -> impl Iterator<Item = u32> + '_ {
    masks.iter().enumerate().filter(move |(_, &m)| m >> j & 1 == 1).map(|(i, _)| i as u32)
}

/// `K = ℕ` dealt round-robin into `N = μ(k-1)` cells (the `m`-th element,
/// 1-based, goes to `A_i` with `i ≡ m mod N`), with `L_j` the union of the
/// cells whose middle-layer mask contains `j`.
///
/// For `k = 2` the middle layer of `[1]` is `{∅}`, which would make `L_1`
/// empty. The instance then uses `K = A_1 = evens` and `L_1 = ℕ` instead.
pub fn sperner_hard_instance(k: usize) -> Result<HardInstance> {
    let (n, masks) = antichain_layout(k)?;
    if k == 2 {
        let sys = CellSystem::residue(2);
        let collection = Collection::finite(vec![Language::from_cells(sys.clone(), [0])?, Language::naturals()])?;
        return Ok(HardInstance {
            name: "sperner(k=2)".into(),
            collection,
            target: 0,
            enumeration: Some(StreamSpec::Canonical),
            certificate: Certificate {
                k,
                n: Some(n),
                cells: Some(1),
                masks: vec![1],
                system: Some(sys),
                ..Default::default()
            },
        });
    }
    let big_n = masks.len() as u64;
    let sys = CellSystem::new(0, Core::Residue { modulus: big_n })?;
    let mut languages = vec![Language::structured(Structured::full(sys.clone()))?];
    for j in 0..n {
        languages.push(Language::from_cells(sys.clone(), cells_with(&masks, j))?);
    }
    Ok(HardInstance {
        name: format!("sperner(k={k})"),
        collection: Collection::finite(languages)?,
        target: 0,
        enumeration: Some(StreamSpec::Canonical),
        certificate: Certificate { k, n: Some(n), cells: Some(big_n), masks, system: Some(sys), ..Default::default() },
    })
}

/// `K = ℕ` with `Z` the elements at positions `2^m` (`m >= 1`) and the rest
/// dealt round-robin into `N = μ(k-1)` arms; `L_j = Z ∪ ⋃{A_i : j ∈ S_i}`.
/// Comes with its staged enumeration, which does not depend on any window
/// size.
pub fn window_hard_instance(k: usize) -> Result<HardInstance> {
    let (n, masks) = antichain_layout(k)?;
    let big_n = masks.len() as u64;
    let sys = CellSystem::new(0, Core::Dyadic { arms: big_n })?;
    let z = big_n as u32;
    let mut languages = vec![Language::structured(Structured::full(sys.clone()))?];
    for j in 0..n {
        languages.push(Language::from_cells(sys.clone(), cells_with(&masks, j).chain([z]))?);
    }
    Ok(HardInstance {
        name: format!("window(k={k})"),
        collection: Collection::finite(languages)?,
        target: 0,
        enumeration: Some(StreamSpec::WindowStages { arms: big_n }),
        certificate: Certificate { k, n: Some(n), cells: Some(big_n), masks, system: Some(sys), ..Default::default() },
    })
}

/// Splits `k` into `m` bins of zero lower density: the canonical positions
/// are cut into blocks `(s_{t-1}, s_t]` with `s_t = s_{t-1} + t²(1 + s_{t-1})`
/// and block `t` goes to bin `(t - 1) mod m`.
pub fn zero_density_partition(k: &Language, m: u64) -> Result<Vec<SetExpr>> {
    if m < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 bins, got {m}")));
    }
    if let Some(s) = k.as_structured() {
        if s.set_eq(&Structured::full(CellSystem::trivial())).unwrap_or(false) {
            let sys = CellSystem::new(0, Core::Blocks { bins: m })?;
            return (0..m as u32).map(|i| Ok(SetExpr::Structured(Structured::from_cells(sys.clone(), [i])?))).collect();
        }
    }
    Ok((0..m as u32)
        .map(|bin| {
            SetExpr::Opaque(std::sync::Arc::new(ZeroDensityBin {
                base: k.expr().clone(),
                bins: m,
                bin,
                policy: ProbePolicy::default(),
            }))
        })
        .collect())
}

/// One bin of [`zero_density_partition`] over an arbitrary base set.
#[derive(Debug)]
pub struct ZeroDensityBin {
    base: SetExpr,
    bins: u64,
    bin: u32,
    policy: ProbePolicy,
}

impl ZeroDensityBin {
    pub fn from_params(params: &Value) -> Result<Self> {
        let base: SetExpr = serde_json::from_value(params.get("base").cloned().unwrap_or(Value::Null))
            .map_err(|e| Error::InvalidParams(format!("zero_density_bin base: {e}")))?;
        let field = |key: &str| {
            params
                .get(key)
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::InvalidParams(format!("zero_density_bin: missing {key}")))
        };
        let bins = field("bins")?;
        let bin = field("bin")?;
        if bins < 2 || bin >= bins {
            return Err(Error::InvalidParams(format!("bin {bin} of {bins}")));
        }
        Ok(ZeroDensityBin { base, bins, bin: bin as u32, policy: ProbePolicy::default() })
    }

    fn blocks(&self) -> Core {
        Core::Blocks { bins: self.bins }
    }
}

impl OpaqueSet for ZeroDensityBin {
    fn builtin(&self) -> &str {
        "zero_density_bin"
    }
    fn params(&self) -> Value {
        json!({ "base": self.base.to_json(), "bins": self.bins, "bin": self.bin })
    }
    fn contains(&self, x: &Element) -> bool {
        if !self.base.contains(x) {
            return false;
        }
        match count_below(&self.base, x, &self.policy) {
            Ok(rank) => self.blocks().label(&rank) == self.bin,
            Err(_) => false,
        }
    }
    fn next_in(&self, from: &Element, limit: &Element) -> Option<Element> {
        let rank = count_below(&self.base, from, &self.policy).ok()?;
        let pos = self.blocks().next_in_cell(self.bin, &rank);
        let x = match &self.base {
            SetExpr::Structured(s) => s.nth(&pos)?,
            SetExpr::Opaque(_) => nth_element(&self.base, pos.as_u64()?, &self.policy).ok()?,
        };
        (x < *limit).then_some(x)
    }
}

/// `{ℕ, A_1, ..., A_{k-1}}` with the bins of the zero-lower-density
/// partition of `ℕ`.
pub fn lower_density_instance(k: usize) -> Result<HardInstance> {
    if k < 3 {
        return Err(Error::InvalidParams(format!("k must be at least 3, got {k}")));
    }
    let bins = (k - 1) as u64;
    let sys = CellSystem::new(0, Core::Blocks { bins })?;
    let mut languages = vec![Language::naturals()];
    for i in 0..bins as u32 {
        languages.push(Language::from_cells(sys.clone(), [i])?);
    }
    Ok(HardInstance {
        name: format!("lower_density(k={k})"),
        collection: Collection::finite(languages)?,
        target: 0,
        enumeration: Some(StreamSpec::Canonical),
        certificate: Certificate { k, n: Some(k - 1), cells: Some(bins), system: Some(sys), ..Default::default() },
    })
}

/// `L_1 = {x ≡ 0, 1 mod 4}` and `L_2 = {x ≡ 0, 2 mod 4}`, sharing
/// `C = {x ≡ 0 mod 4}`.
pub fn index_pair_instance() -> Result<HardInstance> {
    let sys = CellSystem::residue(4);
    let collection = Collection::finite(vec![
        Language::from_cells(sys.clone(), [0, 1])?,
        Language::from_cells(sys.clone(), [0, 2])?,
    ])?;
    Ok(HardInstance {
        name: "index_pair".into(),
        collection,
        target: 0,
        enumeration: None,
        certificate: Certificate {
            k: 2,
            system: Some(sys.clone()),
            base: Some(SetExpr::Structured(Structured::from_cells(sys, [0])?)),
            ..Default::default()
        },
    })
}

fn with_points(base: &Structured, points: &[Element]) -> Result<Language> {
    Language::structured(base.union(&Structured::finite(points.iter().cloned())?)?)
}

/// `{C ∪ {1}, C ∪ {2}, C ∪ {1, 2}}` with `C = {3n}`, together with the
/// texts and prefixes that defeat every incremental identifier.
pub fn identification_counterexample() -> Result<HardInstance> {
    let c = Structured::from_cells(CellSystem::residue(3), [0])?;
    let (a, b) = (Element::new(1), Element::new(2));
    let collection = Collection::finite(vec![
        with_points(&c, std::slice::from_ref(&a))?,
        with_points(&c, std::slice::from_ref(&b))?,
        with_points(&c, &[a.clone(), b.clone()])?,
    ])?;
    let text = |prefix: &[&Element], target| Text { prefix: prefix.iter().map(|x| (*x).clone()).collect(), target };
    Ok(HardInstance {
        name: "identification".into(),
        collection,
        target: 2,
        enumeration: None,
        certificate: Certificate {
            k: 3,
            symbols: vec![a.clone(), b.clone()],
            base: Some(SetExpr::Structured(c)),
            texts: vec![text(&[&a], 0), text(&[&b], 1), text(&[&a, &b], 2), text(&[&b, &a], 2), text(&[&a, &b, &a], 2)],
            prefixes: vec![vec![], vec![a.clone()], vec![b.clone()], vec![a, b]],
            ..Default::default()
        },
    })
}

/// `{T ∪ {a, b}, T ∪ {a, c}, T ∪ {b, c}}`, with every text over a pair that
/// uses at most two copies of each point and has length 2 to 4.
pub fn generation_counterexample(a: Element, b: Element, c: Element, t: &Structured) -> Result<HardInstance> {
    let symbols = [a.clone(), b.clone(), c.clone()];
    if a == b || b == c || a == c {
        return Err(Error::InvalidParams("special points must be distinct".into()));
    }
    if symbols.iter().any(|x| t.contains(x)) {
        return Err(Error::InvalidParams("special points must avoid the base set".into()));
    }
    if t.is_finite() {
        return Err(Error::NotInfinite(t.to_string()));
    }
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let languages = pairs
        .iter()
        .map(|&(p, q)| with_points(t, &[symbols[p].clone(), symbols[q].clone()]))
        .collect::<Result<Vec<_>>>()?;
    let mut texts = Vec::new();
    for len in 2..=4usize {
        for code in 0..3usize.pow(len as u32) {
            let digits: Vec<usize> = (0..len).map(|d| code / 3usize.pow(d as u32) % 3).collect();
            let mut counts = [0; 3];
            digits.iter().for_each(|&d| counts[d] += 1);
            if counts.iter().any(|&c| c > 2) {
                continue;
            }
            let used: Vec<usize> = (0..3).filter(|&s| counts[s] > 0).collect();
            if used.len() != 2 {
                continue;
            }
            let target = pairs.iter().position(|&(p, q)| used == [p, q]).expect("pair");
            texts.push(Text { prefix: digits.iter().map(|&d| symbols[d].clone()).collect(), target });
        }
    }
    Ok(HardInstance {
        name: "generation".into(),
        collection: Collection::finite(languages)?,
        target: 0,
        enumeration: None,
        certificate: Certificate {
            k: 3,
            symbols: symbols.to_vec(),
            base: Some(SetExpr::Structured(t.clone())),
            texts,
            ..Default::default()
        },
    })
}

/// `T = {3n : n >= 1}` with special points 1, 2 and 4.
pub fn default_generation_counterexample() -> Result<HardInstance> {
    let t = Structured::new(
        CellSystem::residue(3),
        [0].into(),
        crate::domain::RunSet::new(),
        crate::domain::RunSet::from_elements([Element::ZERO]),
    )?;
    generation_counterexample(Element::new(1), Element::new(2), Element::new(4), &t)
}

/// Names accepted by [`demo_collection`].
pub const DEMO_COLLECTIONS: &[&str] =
    &["evens_naturals", "mixed", "quarters", "identification", "sperner5", "thresholds6", "length_threshold"];

/// Small named collections used by examples and suites.
pub fn demo_collection(name: &str) -> Result<Collection> {
    let r2 = CellSystem::residue(2);
    let r4 = CellSystem::residue(4);
    match name {
        "evens_naturals" => Collection::finite(vec![Language::from_cells(r2, [0])?, Language::naturals()]),
        "mixed" => {
            let odds_zero = Structured::from_cells(r2.clone(), [1])?.union(&Structured::finite([Element::ZERO])?)?;
            Collection::finite(vec![
                Language::naturals(),
                Language::from_cells(r2, [0])?,
                Language::structured(odds_zero)?,
            ])
        }
        "quarters" => Collection::finite(vec![
            Language::naturals(),
            Language::from_cells(r4.clone(), [0, 1])?,
            Language::from_cells(r4.clone(), [0, 2])?,
            Language::from_cells(r4, [0])?,
        ]),
        "identification" => Ok(identification_counterexample()?.collection),
        "sperner5" => Ok(sperner_hard_instance(5)?.collection),
        "thresholds6" => {
            Collection::finite((0..6).map(|i| CountableFamily::LengthThreshold.get(i)).collect::<Result<_>>()?)
        }
        "length_threshold" => Collection::countable(CountableFamily::LengthThreshold),
        other => Err(Error::InvalidParams(format!("unknown demo collection {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    #[test]
    fn sperner_instances_have_the_expected_shape() {
        let inst = sperner_hard_instance(3).unwrap();
        let l = inst.structured().unwrap();
        assert!(l[1].set_eq(&inst.cell(0).unwrap()).unwrap());
        assert!(l[2].set_eq(&inst.cell(1).unwrap()).unwrap());
        let inst = sperner_hard_instance(5).unwrap();
        assert_eq!(inst.certificate.cells, Some(6));
        for l in &inst.structured().unwrap()[1..] {
            assert_eq!(l.cells().len(), 3);
        }
        let two = sperner_hard_instance(2).unwrap();
        assert!(two.languages()[1].contains(&e(1)) && !two.languages()[0].contains(&e(1)));
    }

    #[test]
    fn partition_bins_follow_the_blocks() {
        let bins = zero_density_partition(&Language::naturals(), 2).unwrap();
        // Positions 1 | 2..9 | 10..99 alternate between the two bins.
        assert!(bins[0].contains(&e(0)) && bins[1].contains(&e(1)) && bins[1].contains(&e(8)));
        assert!(bins[0].contains(&e(9)) && bins[0].contains(&e(98)) && bins[1].contains(&e(99)));
        let evens = Language::from_cells(CellSystem::residue(2), [0]).unwrap();
        let opaque = zero_density_partition(&evens, 2).unwrap();
        let members: Vec<Element> = {
            let mut out = Vec::new();
            let mut from = e(0);
            while let Some(x) = opaque[1].next_in(&from, &e(40)) {
                from = x.succ();
                out.push(x);
            }
            out
        };
        assert_eq!(members, [2, 4, 6, 8, 10, 12, 14, 16].map(e));
        assert!(opaque[0].contains(&e(18)) && !opaque[0].contains(&e(16)));
        let json = serde_json::to_string(&opaque[0]).unwrap();
        let back: SetExpr = serde_json::from_str(&json).unwrap();
        assert!(back.contains(&e(0)) && !back.contains(&e(2)));
    }

    #[test]
    fn counterexamples_are_pairwise_incomparable() {
        let id = identification_counterexample().unwrap();
        let l = id.languages();
        assert!(l[0].contains(&e(1)) && !l[1].contains(&e(1)) && l[2].contains(&e(1)));
        let gen = default_generation_counterexample().unwrap();
        let l = gen.languages();
        assert!(l[0].contains(&e(1)) && !l[0].contains(&e(4)) && !l[0].contains(&e(0)));
        assert!(l[2].contains(&e(4)) && !l[2].contains(&e(1)));
        assert!(gen.certificate.texts.iter().all(|t| t.prefix.len() >= 2));
        assert!(gen.certificate.texts.iter().any(|t| t.prefix == [e(2), e(4), e(4), e(2)] && t.target == 2));
    }

    #[test]
    fn demo_collections_build() {
        for name in DEMO_COLLECTIONS {
            demo_collection(name).unwrap();
        }
    }
}
