use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{CellSystem, Core, Element, EnumerationStream, Language, ProbePolicy, RepetitionPolicy, SetExpr};
use crate::error::{Error, Result};

/// Increasing walk through a set; fails once the probe horizon is passed
/// for opaque sets.
#[derive(Clone)]
pub(crate) struct Walker {
    set: SetExpr,
    next: Element,
    limit: Element,
}

impl Walker {
    pub(crate) fn new(set: &SetExpr, policy: &ProbePolicy) -> Self {
        let limit = match set {
            SetExpr::Structured(_) => Element::pow2(1 << 20),
            SetExpr::Opaque(_) => policy.horizon.succ(),
        };
        Walker { set: set.clone(), next: Element::ZERO, limit }
    }

    pub(crate) fn advance(&mut self) -> Result<Element> {
        let x = self
            .set
            .next_in(&self.next, &self.limit)
            .ok_or_else(|| Error::StreamExhausted(format!("no member of {} at or after {}", self.set, self.next)))?;
        self.next = x.succ();
        Ok(x)
    }
}

/// Every member of `k` once, in increasing order.
pub fn canonical_enumeration(k: &Language, policy: &ProbePolicy) -> EnumerationStream {
    let mut walk = Walker::new(k.expr(), policy);
    EnumerationStream::new(format!("canonical({k})"), RepetitionPolicy::Free, 0, Box::new(move || walk.advance()))
}

/// Default number of canonical elements shuffled together.
pub const DEFAULT_BLOCK: usize = 4;

/// Round by which the `n`-th (1-based) canonical element has appeared:
/// `block * n * cap`.
pub fn coverage_deadline(n: u64, cap: u32, block: usize) -> u64 {
    block as u64 * n * cap as u64
}

/// Covers `k`, repeating each element between 1 and `cap` times. Elements
/// are taken `block` at a time in canonical order; the copies within a
/// block are shuffled by a seeded generator.
pub fn finitely_repeating_enumeration(
    k: &Language,
    cap: u32,
    seed: u64,
    block: usize,
    policy: &ProbePolicy,
) -> Result<EnumerationStream> {
    if cap == 0 || block == 0 {
        return Err(Error::InvalidParams("cap and block must be positive".into()));
    }
    let mut walk = Walker::new(k.expr(), policy);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pending: Vec<Element> = Vec::new();
    let source = move || -> Result<Element> {
        if pending.is_empty() {
            let mut batch = Vec::new();
            for _ in 0..block {
                let x = walk.advance()?;
                let copies = rng.gen_range(1..=cap);
                batch.extend(std::iter::repeat_n(x, copies as usize));
            }
            batch.shuffle(&mut rng);
            batch.reverse();
            pending = batch;
        }
        Ok(pending.pop().expect("nonempty batch"))
    };
    Ok(EnumerationStream::new(
        format!("finitely_repeating(cap={cap},seed={seed})"),
        RepetitionPolicy::FinitelyRepeating { cap },
        seed,
        Box::new(source),
    ))
}

/// Canonical enumeration of `k` with `point` after every element:
/// `x_1, b, x_2, b, ...`.
pub fn bad_point_interleaver(k: &Language, point: &Element, policy: &ProbePolicy) -> EnumerationStream {
    let mut walk = Walker::new(k.expr(), policy);
    let mut round = 0u64;
    let point = point.clone();
    EnumerationStream::new(
        format!("bad_point({point})"),
        RepetitionPolicy::Unbounded,
        0,
        Box::new(move || {
            round += 1;
            if round % 2 == 0 {
                Ok(point.clone())
            } else {
                walk.advance()
            }
        }),
    )
}

/// First round (1-based) of stage `r` of the staged dyadic enumeration.
pub fn window_stage_start(r: u64, arms: u64) -> u64 {
    1 + arms * ((r - 1) + (r - 1) * r / 2)
}

/// Staged enumeration of the naturals for the dyadic layout with `arms`
/// arms: stage `r` emits, for each arm `i`, the `r`-th element of `A_i`
/// followed by the next `r` unused elements of `Z`.
pub fn window_stage_enumeration(arms: u64) -> Result<EnumerationStream> {
    let system = CellSystem::new(0, Core::Dyadic { arms })?;
    let mut cursors = vec![Element::ZERO; arms as usize];
    let mut z_next = Element::ZERO;
    let mut queue: Vec<Element> = Vec::new();
    let mut stage = 0u64;
    let source = move || -> Result<Element> {
        if queue.is_empty() {
            stage += 1;
            let mut batch = Vec::new();
            for i in 0..arms as usize {
                let a = system.next_in_cell(i as u32, &cursors[i]).expect("arms are infinite");
                cursors[i] = a.succ();
                batch.push(a);
                for _ in 0..stage {
                    let z = system.next_in_cell(arms as u32, &z_next).expect("Z is infinite");
                    z_next = z.succ();
                    batch.push(z);
                }
            }
            batch.reverse();
            queue = batch;
        }
        Ok(queue.pop().expect("nonempty stage"))
    };
    Ok(EnumerationStream::new(format!("window_stages(arms={arms})"), RepetitionPolicy::Free, 0, Box::new(source)))
}

/// Serializable description of a stream over a target language.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum StreamSpec {
    Canonical,
    FinitelyRepeating {
        cap: u32,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_block")]
        block: usize,
    },
    BadPoint {
        point: Element,
    },
    WindowStages {
        arms: u64,
    },
}

fn default_block() -> usize {
    DEFAULT_BLOCK
}

impl StreamSpec {
    pub fn build(&self, target: &Language, policy: &ProbePolicy) -> Result<EnumerationStream> {
        match self {
            StreamSpec::Canonical => Ok(canonical_enumeration(target, policy)),
            StreamSpec::FinitelyRepeating { cap, seed, block } => {
                finitely_repeating_enumeration(target, *cap, *seed, *block, policy)
            }
            StreamSpec::BadPoint { point } => Ok(bad_point_interleaver(target, point, policy)),
            StreamSpec::WindowStages { arms } => window_stage_enumeration(*arms),
        }
    }

    /// The same stream with a different seed, where seeds apply.
    pub fn with_seed(&self, new_seed: u64) -> Self {
        match self {
            StreamSpec::FinitelyRepeating { cap, block, .. } => {
                StreamSpec::FinitelyRepeating { cap: *cap, seed: new_seed, block: *block }
            }
            other => other.clone(),
        }
    }
}
