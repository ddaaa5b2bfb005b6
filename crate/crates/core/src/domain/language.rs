use std::fmt;

use serde::{Deserialize, Serialize};

use super::cells::CellSystem;
use super::probe::{finiteness, FinitenessVerdict, ProbePolicy};
use super::runs::RunSet;
use super::setexpr::{SetExpr, Structured};
use super::Element;
use crate::error::{Error, Result};

/// An infinite set of naturals.
#[derive(Clone, Debug)]
pub struct Language {
    expr: SetExpr,
}

impl Language {
    /// Wraps `expr`, which must be infinite (exactly for structured sets,
    /// by probe for opaque ones).
    pub fn new(expr: SetExpr, policy: &ProbePolicy) -> Result<Self> {
        match finiteness(&expr, policy) {
            FinitenessVerdict::Infinite { .. } => Ok(Language { expr }),
            FinitenessVerdict::Finite(_) => Err(Error::NotInfinite(expr.describe())),
            FinitenessVerdict::Unknown => {
                Err(Error::ProbeExhausted(format!("cannot certify {} infinite", expr.describe())))
            }
        }
    }

    pub fn structured(s: Structured) -> Result<Self> {
        if s.is_finite() {
            return Err(Error::NotInfinite(s.to_string()));
        }
        Ok(Language { expr: SetExpr::Structured(s) })
    }

    pub fn from_cells<I: IntoIterator<Item = u32>>(system: CellSystem, cells: I) -> Result<Self> {
        Language::structured(Structured::from_cells(system, cells)?)
    }

    pub fn naturals() -> Self {
        Language { expr: SetExpr::naturals() }
    }

    pub fn expr(&self) -> &SetExpr {
        &self.expr
    }

    pub fn as_structured(&self) -> Option<&Structured> {
        self.expr.as_structured()
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.expr.contains(x)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

impl Serialize for Language {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.expr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Language {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let expr = SetExpr::deserialize(d)?;
        Language::new(expr, &ProbePolicy::default()).map_err(D::Error::custom)
    }
}

/// A countably infinite family given by a rule.
#[derive(Clone, Debug)]
pub enum CountableFamily {
    /// The `i`-th language (0-based) is `{x : x >= i + 1}`.
    LengthThreshold,
    /// A finite list repeated forever.
    Cycle(Vec<Language>),
}

impl CountableFamily {
    pub fn get(&self, i: usize) -> Result<Language> {
        match self {
            CountableFamily::LengthThreshold => {
                let head = RunSet::range(Element::ZERO, Element::new(i as u64 + 1));
                let s = Structured::new(CellSystem::trivial(), [0].into(), RunSet::new(), head)?;
                Language::structured(s)
            }
            CountableFamily::Cycle(list) => Ok(list[i % list.len()].clone()),
        }
    }
}

/// A finite or countable family of languages, indexed from 0.
#[derive(Clone, Debug)]
pub enum Collection {
    Finite(Vec<Language>),
    Countable(CountableFamily),
}

impl Collection {
    /// A finite collection; rejects empty lists and repeated languages.
    pub fn finite(languages: Vec<Language>) -> Result<Self> {
        if languages.is_empty() {
            return Err(Error::EmptyCollection);
        }
        for i in 0..languages.len() {
            for j in i + 1..languages.len() {
                if same_language(&languages[i], &languages[j])? {
                    return Err(Error::DuplicateLanguage(i, j));
                }
            }
        }
        Ok(Collection::Finite(languages))
    }

    pub fn countable(family: CountableFamily) -> Result<Self> {
        if let CountableFamily::Cycle(list) = &family {
            if list.is_empty() {
                return Err(Error::EmptyCollection);
            }
        }
        Ok(Collection::Countable(family))
    }

    pub fn get(&self, i: usize) -> Result<Language> {
        match self {
            Collection::Finite(list) => {
                list.get(i).cloned().ok_or(Error::IndexOutOfRange { index: i, len: list.len() })
            }
            Collection::Countable(f) => f.get(i),
        }
    }

    /// Number of languages, `None` for countable families.
    pub fn len(&self) -> Option<usize> {
        match self {
            Collection::Finite(list) => Some(list.len()),
            Collection::Countable(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn languages(&self) -> Option<&[Language]> {
        match self {
            Collection::Finite(list) => Some(list),
            Collection::Countable(_) => None,
        }
    }

    /// The finite list, or the family cut to the first `n` members.
    pub fn prefix(&self, n: usize) -> Result<Vec<Language>> {
        match self {
            Collection::Finite(list) => Ok(list.iter().take(n).cloned().collect()),
            Collection::Countable(f) => (0..n).map(|i| f.get(i)).collect(),
        }
    }
}

fn same_language(a: &Language, b: &Language) -> Result<bool> {
    match (a.as_structured(), b.as_structured()) {
        (Some(x), Some(y)) => match x.set_eq(y) {
            Ok(eq) => Ok(eq),
            // Systems without a common refinement: cannot be proved equal.
            Err(Error::IncompatibleCellSystems { .. }) => Ok(false),
            Err(e) => Err(e),
        },
        _ => Ok(a.expr().to_json() == b.expr().to_json()),
    }
}

/// Indices of the languages of a finite list that contain `x`.
pub fn signature(languages: &[Language], x: &Element) -> Vec<usize> {
    languages.iter().enumerate().filter(|(_, l)| l.contains(x)).map(|(i, _)| i).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum CollectionJson {
    Finite {
        languages: Vec<Language>,
    },
    Countable {
        family: String,
        #[serde(default)]
        languages: Vec<Language>,
    },
}

impl Serialize for Collection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let json = match self {
            Collection::Finite(list) => CollectionJson::Finite { languages: list.clone() },
            Collection::Countable(CountableFamily::LengthThreshold) => {
                CollectionJson::Countable { family: "length_threshold".into(), languages: vec![] }
            }
            Collection::Countable(CountableFamily::Cycle(list)) => {
                CollectionJson::Countable { family: "cycle".into(), languages: list.clone() }
            }
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Collection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let built = match CollectionJson::deserialize(d)? {
            CollectionJson::Finite { languages } => Collection::finite(languages),
            CollectionJson::Countable { family, languages } => match family.as_str() {
                "length_threshold" => Collection::countable(CountableFamily::LengthThreshold),
                "cycle" => Collection::countable(CountableFamily::Cycle(languages)),
                other => Err(Error::UnknownBuiltin(other.to_string())),
            },
        };
        built.map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    #[test]
    fn finite_sets_are_not_languages() {
        let small = Structured::finite([e(1), e(2)]).unwrap();
        assert!(matches!(Language::structured(small), Err(Error::NotInfinite(_))));
    }

    #[test]
    fn duplicates_are_detected_extensionally() {
        let evens = Language::from_cells(CellSystem::residue(2), [0]).unwrap();
        let evens4 = Language::from_cells(CellSystem::residue(4), [0, 2]).unwrap();
        assert_eq!(Collection::finite(vec![evens, evens4]).unwrap_err(), Error::DuplicateLanguage(0, 1));
        assert_eq!(Collection::finite(vec![]).unwrap_err(), Error::EmptyCollection);
    }

    #[test]
    fn length_threshold_family() {
        let c = Collection::countable(CountableFamily::LengthThreshold).unwrap();
        let l4 = c.get(4).unwrap();
        assert!(!l4.contains(&e(4)) && l4.contains(&e(5)));
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"kind":"countable","family":"length_threshold","languages":[]}"#);
    }

    #[test]
    fn signature_lists_containing_languages() {
        let sys = CellSystem::residue(4);
        let l1 = Language::from_cells(sys.clone(), [0, 1]).unwrap();
        let l2 = Language::from_cells(sys, [0, 2]).unwrap();
        let langs = vec![l1, l2];
        assert_eq!(signature(&langs, &e(4)), vec![0, 1]);
        assert_eq!(signature(&langs, &e(5)), vec![0]);
        assert_eq!(signature(&langs, &e(3)), Vec::<usize>::new());
    }
}
