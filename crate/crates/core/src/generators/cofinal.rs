//! Pairwise disjoint infinite subsets `C_i ⊆ L_i` built greedily: at step
//! `t`, each language in turn takes its least unused element above `t - 1`.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};

use crate::domain::{Collection, Element, Language, OpaqueSet, ProbePolicy, SetExpr};
use crate::error::{Error, Result};

/// Steps computed explicitly before falling back to the periodic tail.
pub const EXPLICIT_STEPS: usize = 1 << 16;
/// Steps examined when looking for a periodic tail.
pub const TAIL_WINDOW: usize = 4096;

/// Eventual shape `c_{i,t+P} = c_{i,t} + D_i` for `t >= start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicTail {
    pub start: usize,
    pub period: usize,
    pub shifts: Vec<Element>,
}

#[derive(Debug)]
struct Table {
    // rows[t - 1][i] = c_{i,t}
    rows: Vec<Vec<Element>>,
    used: BTreeSet<Element>,
    cursors: Vec<Element>,
    tail: Option<Option<PeriodicTail>>,
}

#[derive(Debug)]
pub struct CofinalSystem {
    collection: Collection,
    languages: Vec<Language>,
    policy: ProbePolicy,
    table: Mutex<Table>,
}

impl CofinalSystem {
    pub fn new(collection: &Collection, policy: ProbePolicy) -> Result<Arc<Self>> {
        let languages = collection
            .languages()
            .ok_or_else(|| Error::InvalidParams("cofinal subsets need a finite collection".into()))?
            .to_vec();
        let n = languages.len();
        Ok(Arc::new(CofinalSystem {
            collection: collection.clone(),
            languages,
            policy,
            table: Mutex::new(Table {
                rows: Vec::new(),
                used: BTreeSet::new(),
                cursors: vec![Element::ZERO; n],
                tail: None,
            }),
        }))
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    /// The subsets as opaque sets.
    pub fn sets(self: &Arc<Self>) -> Vec<SetExpr> {
        (0..self.len()).map(|i| SetExpr::Opaque(Arc::new(CofinalSet { system: self.clone(), index: i }))).collect()
    }

    fn extend(&self, table: &mut Table, steps: usize) -> Result<()> {
        while table.rows.len() < steps {
            let t = table.rows.len() as u64 + 1;
            let threshold = Element::new(t);
            let mut row = Vec::with_capacity(self.languages.len());
            for (i, lang) in self.languages.iter().enumerate() {
                let mut cursor = table.cursors[i].clone().max(threshold.clone());
                let c = loop {
                    let c = lang
                        .expr()
                        .next_in(&cursor, &self.policy.horizon)
                        .ok_or_else(|| Error::ProbeExhausted(format!("enumerating {lang}")))?;
                    cursor = c.succ();
                    if !table.used.contains(&c) {
                        break c;
                    }
                };
                table.cursors[i] = cursor;
                table.used.insert(c.clone());
                row.push(c);
            }
            table.used = table.used.split_off(&threshold);
            table.rows.push(row);
        }
        Ok(())
    }

    fn detect_tail(&self, table: &mut Table) -> Result<Option<PeriodicTail>> {
        if let Some(t) = &table.tail {
            return Ok(t.clone());
        }
        self.extend(table, TAIL_WINDOW)?;
        let rows = &table.rows[..TAIL_WINDOW];
        let n = self.languages.len();
        let diff = |t: usize, p: usize, i: usize| rows[t + p][i].checked_sub(&rows[t][i]);
        let mut found = None;
        'period: for p in 1..=TAIL_WINDOW / 8 {
            let last = TAIL_WINDOW - 1 - p;
            let shifts: Vec<Element> = match (0..n).map(|i| diff(last, p, i)).collect::<Option<Vec<_>>>() {
                Some(s) => s,
                None => continue,
            };
            let mut start = last;
            while start > 0 && (0..n).all(|i| diff(start - 1, p, i).as_ref() == Some(&shifts[i])) {
                start -= 1;
            }
            if start <= TAIL_WINDOW / 2 {
                found = Some(PeriodicTail { start: start + 1, period: p, shifts });
                break 'period;
            }
        }
        table.tail = Some(found.clone());
        Ok(found)
    }

    /// Periodic tail, when one is visible within the examined window.
    pub fn tail(&self) -> Result<Option<PeriodicTail>> {
        let mut table = self.table.lock().expect("cofinal table lock");
        self.detect_tail(&mut table)
    }

    /// `c_{i,t}` for `1 <= t <= steps`, computed explicitly.
    pub fn explicit(&self, i: usize, steps: usize) -> Result<Vec<Element>> {
        let mut table = self.table.lock().expect("cofinal table lock");
        self.extend(&mut table, steps)?;
        Ok(table.rows[..steps].iter().map(|r| r[i].clone()).collect())
    }

    /// `d_{i,m}`, the `m`-th (1-based) element of `C_i`.
    pub fn nth(&self, i: usize, m: &Element) -> Result<Element> {
        if m.is_zero() {
            return Err(Error::InvalidParams("positions start at 1".into()));
        }
        let mut table = self.table.lock().expect("cofinal table lock");
        if let Some(mm) = m.as_u64().filter(|&v| v as usize <= EXPLICIT_STEPS) {
            self.extend(&mut table, mm as usize)?;
            return Ok(table.rows[mm as usize - 1][i].clone());
        }
        let tail = self
            .detect_tail(&mut table)?
            .ok_or_else(|| Error::DecodeFailure("no periodic tail for distant positions".into()))?;
        let offset = m - &Element::new(tail.start as u64);
        let (q, r) = offset.div_rem_u64(tail.period as u64);
        let base = &table.rows[tail.start - 1 + r as usize][i];
        Ok(base + &(&q * &tail.shifts[i]))
    }

    /// Position `m` with `d_{i,m} = y`, if `y` is in `C_i`.
    pub fn position(&self, i: usize, y: &Element) -> Result<Option<Element>> {
        let mut table = self.table.lock().expect("cofinal table lock");
        self.extend(&mut table, 1)?;
        while table.rows.last().unwrap()[i] < *y && table.rows.len() < EXPLICIT_STEPS {
            let next = (table.rows.len() * 2).min(EXPLICIT_STEPS);
            self.extend(&mut table, next)?;
        }
        if table.rows.last().unwrap()[i] >= *y {
            let idx = table.rows.partition_point(|r| r[i] < *y);
            return Ok((table.rows[idx][i] == *y).then(|| Element::new(idx as u64 + 1)));
        }
        let Some(tail) = self.detect_tail(&mut table)? else {
            return Err(Error::DecodeFailure("no periodic tail for distant elements".into()));
        };
        for r in 0..tail.period {
            let base = &table.rows[tail.start - 1 + r][i];
            if let Some(delta) = y.checked_sub(base) {
                let (q, rem) = delta.div_rem(&tail.shifts[i]);
                if rem.is_zero() {
                    let m = &Element::new((tail.start + r) as u64) + &q.mul_u64(tail.period as u64);
                    return Ok(Some(m));
                }
            }
        }
        Ok(None)
    }

    /// Least member of `C_i` that is `>= from`.
    pub fn next_member(&self, i: usize, from: &Element) -> Result<Element> {
        {
            let mut table = self.table.lock().expect("cofinal table lock");
            self.extend(&mut table, 1)?;
            while table.rows.last().unwrap()[i] < *from && table.rows.len() < EXPLICIT_STEPS {
                let next = (table.rows.len() * 2).min(EXPLICIT_STEPS);
                self.extend(&mut table, next)?;
            }
            if table.rows.last().unwrap()[i] >= *from {
                let idx = table.rows.partition_point(|r| r[i] < *from);
                return Ok(table.rows[idx][i].clone());
            }
        }
        let mut table = self.table.lock().expect("cofinal table lock");
        let tail = self
            .detect_tail(&mut table)?
            .ok_or_else(|| Error::DecodeFailure("no periodic tail for distant elements".into()))?;
        let mut best: Option<Element> = None;
        for r in 0..tail.period {
            let base = &table.rows[tail.start - 1 + r][i];
            let cand = match from.checked_sub(base) {
                None => base.clone(),
                Some(delta) => {
                    let (q, rem) = delta.div_rem(&tail.shifts[i]);
                    let q = if rem.is_zero() { q } else { q.succ() };
                    base + &(&q * &tail.shifts[i])
                }
            };
            best = Some(match best {
                Some(b) if b <= cand => b,
                _ => cand,
            });
        }
        Ok(best.expect("period is positive"))
    }
}

/// One cofinal subset as an opaque set.
#[derive(Debug)]
pub struct CofinalSet {
    system: Arc<CofinalSystem>,
    index: usize,
}

impl CofinalSet {
    pub fn from_params(params: &Value) -> Result<Self> {
        let collection: Collection = serde_json::from_value(params.get("collection").cloned().unwrap_or(Value::Null))
            .map_err(|e| Error::InvalidParams(format!("cofinal collection: {e}")))?;
        let index = params
            .get("index")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidParams("cofinal: missing index".into()))? as usize;
        let system = CofinalSystem::new(&collection, ProbePolicy::default())?;
        if index >= system.len() {
            return Err(Error::IndexOutOfRange { index, len: system.len() });
        }
        Ok(CofinalSet { system, index })
    }
}

impl OpaqueSet for CofinalSet {
    fn builtin(&self) -> &str {
        "cofinal"
    }
    fn params(&self) -> Value {
        json!({ "collection": serde_json::to_value(&self.system.collection).unwrap(), "index": self.index })
    }
    fn contains(&self, x: &Element) -> bool {
        matches!(self.system.position(self.index, x), Ok(Some(_)))
    }
    fn next_in(&self, from: &Element, limit: &Element) -> Option<Element> {
        self.system.next_member(self.index, from).ok().filter(|x| x < limit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::CellSystem;

    fn e(v: u64) -> Element {
        Element::new(v)
    }

    fn evens_and_naturals() -> Collection {
        Collection::finite(vec![Language::from_cells(CellSystem::residue(2), [0]).unwrap(), Language::naturals()])
            .unwrap()
    }

    #[test]
    fn greedy_recursion_on_evens_and_naturals() {
        let sys = CofinalSystem::new(&evens_and_naturals(), ProbePolicy::default()).unwrap();
        assert_eq!(sys.explicit(0, 5).unwrap(), [2, 4, 6, 8, 10].map(e));
        assert_eq!(sys.explicit(1, 5).unwrap(), [1, 3, 5, 7, 9].map(e));
        let tail = sys.tail().unwrap().unwrap();
        assert_eq!(tail.period, 1);
        assert_eq!(tail.shifts, vec![e(2), e(2)]);
        let far = Element::pow2(200);
        assert_eq!(sys.nth(0, &far).unwrap(), far.mul_u64(2));
        assert_eq!(sys.position(1, &far.mul_u64(2).pred().unwrap()).unwrap(), Some(far.clone()));
        assert_eq!(sys.position(1, &far).unwrap(), None);
    }

    #[test]
    fn opaque_view_round_trips_through_json() {
        let sys = CofinalSystem::new(&evens_and_naturals(), ProbePolicy::default()).unwrap();
        let sets = sys.sets();
        let json = serde_json::to_string(&sets[1]).unwrap();
        let back: SetExpr = serde_json::from_str(&json).unwrap();
        for x in 0..50 {
            assert_eq!(back.contains(&e(x)), x % 2 == 1);
        }
    }
}
