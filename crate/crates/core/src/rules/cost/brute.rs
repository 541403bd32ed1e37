//! Exhaustive search over all m! schedules, in lexicographic order.

use std::time::Instant;

use super::{finish, Method, SolveReport};
use crate::error::{Error, Result};
use crate::model::{Aggregation, CostKind, CostSpec, Instance, JobId};

/// Largest job count accepted by [`brute_force`]; 10! is about 3.6 million.
pub const MAX_BRUTE_JOBS: usize = 10;

/// Per-entry reference data, expanded once so the permutation loop only
/// does arithmetic.
enum Refs {
    /// Preferred completion time of each job.
    Delay(Vec<Vec<i64>>),
    /// Preferred slot of each job.
    Slots(Vec<Vec<i64>>),
    /// Preferred slot of each job, used for counting flipped pairs.
    Positions(Vec<Vec<u32>>),
}

struct Eval {
    kind: CostKind,
    agg: Aggregation,
    weights: Vec<i64>,
    refs: Refs,
}

impl Eval {
    fn new(instance: &Instance, spec: CostSpec) -> Self {
        let entries = instance.profile().entries();
        let weights = entries.iter().map(|e| e.weight as i64).collect();
        let refs = match spec.kind {
            CostKind::Kendall => Refs::Positions(
                entries
                    .iter()
                    .map(|e| {
                        (0..instance.m() as u32)
                            .map(|j| {
                                e.schedule
                                    .position(JobId(j))
                                    .expect("entry schedules cover every job")
                                    as u32
                            })
                            .collect()
                    })
                    .collect(),
            ),
            CostKind::Spearman => Refs::Slots(
                entries
                    .iter()
                    .map(|e| {
                        (0..instance.m() as u32)
                            .map(|j| {
                                e.schedule
                                    .position(JobId(j))
                                    .expect("entry schedules cover every job")
                                    as i64
                            })
                            .collect()
                    })
                    .collect(),
            ),
            _ => Refs::Delay(
                entries
                    .iter()
                    .map(|e| {
                        instance
                            .completion_times(&e.schedule)
                            .expect("entry schedules match the instance")
                            .into_iter()
                            .map(|c| c as i64)
                            .collect()
                    })
                    .collect(),
            ),
        };
        Eval {
            kind: spec.kind,
            agg: spec.agg,
            weights,
            refs,
        }
    }

    /// Objective of `perm`, or `None` once it provably exceeds `bound`.
    /// `scratch` maps job index to completion time or slot.
    fn evaluate(
        &self,
        instance: &Instance,
        perm: &[u32],
        scratch: &mut [i64],
        bound: Option<i128>,
    ) -> Result<Option<i128>> {
        match self.refs {
            Refs::Delay(_) => {
                let mut clock = 0i64;
                for &j in perm {
                    clock += instance.processing_time(JobId(j)) as i64;
                    scratch[j as usize] = clock;
                }
            }
            Refs::Slots(_) | Refs::Positions(_) => {
                for (slot, &j) in perm.iter().enumerate() {
                    scratch[j as usize] = slot as i64;
                }
            }
        }
        // Entry costs are nonnegative for every kind except lateness, so a
        // running total past the bound cannot recover; lateness sums are
        // always evaluated in full.
        let can_abandon = self.kind.nonnegative();
        let mut total: i128 = 0;
        let mut max: i128 = i128::MIN;
        for (e, &w) in self.weights.iter().enumerate() {
            let cost: i64 = match &self.refs {
                Refs::Delay(pref) => {
                    let pref = &pref[e];
                    let mut acc = 0i64;
                    for j in 0..scratch.len() {
                        let diff = scratch[j] - pref[j];
                        acc += match self.kind {
                            CostKind::Tardiness => diff.max(0),
                            CostKind::Late => i64::from(diff > 0),
                            CostKind::Lateness => diff,
                            CostKind::Earliness => (-diff).max(0),
                            CostKind::Deviation => diff.abs(),
                            CostKind::SquaredDeviation => diff * diff,
                            CostKind::Kendall | CostKind::Spearman => unreachable!(),
                        };
                    }
                    acc
                }
                Refs::Slots(pref) => {
                    let pref = &pref[e];
                    (0..scratch.len())
                        .map(|j| (scratch[j] - pref[j]).abs())
                        .sum()
                }
                Refs::Positions(pref) => {
                    let pref = &pref[e];
                    let mut inversions = 0i64;
                    for a in 0..perm.len() {
                        for b in a + 1..perm.len() {
                            if pref[perm[a] as usize] > pref[perm[b] as usize] {
                                inversions += 1;
                            }
                        }
                    }
                    inversions
                }
            };
            match self.agg {
                Aggregation::Sum => total += w as i128 * cost as i128,
                Aggregation::Max => max = max.max(cost as i128),
                Aggregation::Lp(p) => {
                    let term = (cost as i128)
                        .checked_pow(p)
                        .and_then(|v| v.checked_mul(w as i128))
                        .ok_or_else(|| {
                            Error::Capacity(format!("lp aggregation overflowed at p = {p}"))
                        })?;
                    total = total.checked_add(term).ok_or_else(|| {
                        Error::Capacity(format!("lp aggregation overflowed at p = {p}"))
                    })?;
                }
            }
            if can_abandon {
                if let Some(bound) = bound {
                    let running = if self.agg == Aggregation::Max { max } else { total };
                    if running > bound {
                        return Ok(None);
                    }
                }
            }
        }
        Ok(Some(if self.agg == Aggregation::Max { max } else { total }))
    }
}

/// Classic lexicographic successor; false once `perm` is the last one.
fn next_permutation(perm: &mut [u32]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Checks every schedule and keeps the first one attaining the minimum,
/// which is the lexicographically smallest optimum because schedules are
/// enumerated in lexicographic order. Any cost kind and aggregation.
pub fn brute_force(instance: &Instance, spec: CostSpec) -> Result<SolveReport> {
    let started = Instant::now();
    let spec = CostSpec::new(spec.kind, spec.agg)?;
    let m = instance.m();
    if m > MAX_BRUTE_JOBS {
        return Err(Error::Capacity(format!(
            "brute force handles at most {MAX_BRUTE_JOBS} jobs, this instance has {m}"
        )));
    }
    let eval = Eval::new(instance, spec);
    let mut perm: Vec<u32> = (0..m as u32).collect();
    let mut scratch = vec![0i64; m];
    let mut best_value = eval
        .evaluate(instance, &perm, &mut scratch, None)?
        .expect("unbounded evaluation always completes");
    let mut best_perm = perm.clone();
    let mut nodes = 1u64;
    while next_permutation(&mut perm) {
        nodes += 1;
        if let Some(value) = eval.evaluate(instance, &perm, &mut scratch, Some(best_value))? {
            if value < best_value {
                best_value = value;
                best_perm.copy_from_slice(&perm);
            }
        }
    }
    let order = best_perm.into_iter().map(JobId).collect();
    finish(
        instance,
        spec,
        order,
        Some(best_value),
        Method::BruteForce,
        nodes,
        started,
    )
}
