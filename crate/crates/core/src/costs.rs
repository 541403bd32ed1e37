//! Disagreement costs between a shared schedule and agents' preferences,
//! and their aggregation into objectives.
//!
//! All values are exact integers. With the documented capacity bounds
//! (n <= 10^4, m <= 32, processing times <= 10^3) per-agent costs fit in
//! `i64` and aggregated objectives in `i128`; `Lp` aggregation checks for
//! overflow and reports a capacity error instead of wrapping.

use crate::error::{Error, Result};
use crate::model::{Aggregation, CostKind, CostSpec, Instance, JobId, Schedule};

/// Number of job pairs the two schedules order oppositely.
pub fn kendall(a: &Schedule, b: &Schedule) -> Result<i64> {
    if a.m() != b.m() {
        return Err(Error::InvalidInstance(format!(
            "schedules cover {} and {} jobs",
            a.m(),
            b.m()
        )));
    }
    let mut inversions = 0;
    let order = a.order();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            // a runs order[i] before order[j].
            if b.position(order[j])? < b.position(order[i])? {
                inversions += 1;
            }
        }
    }
    Ok(inversions)
}

/// Sum over jobs of the absolute difference between their slots.
pub fn spearman(a: &Schedule, b: &Schedule) -> Result<i64> {
    if a.m() != b.m() {
        return Err(Error::InvalidInstance(format!(
            "schedules cover {} and {} jobs",
            a.m(),
            b.m()
        )));
    }
    let mut total = 0i64;
    for &job in a.order() {
        let pa = a.position(job)? as i64;
        let pb = b.position(job)? as i64;
        total += (pa - pb).abs();
    }
    Ok(total)
}

/// Per-job delay cost for an actual completion time `c` against the
/// preferred completion time `d`. Only defined for the delay kinds.
pub fn delay_cost(kind: CostKind, c: u64, d: u64) -> Result<i64> {
    let diff = c as i64 - d as i64;
    Ok(match kind {
        CostKind::Tardiness => diff.max(0),
        CostKind::Late => i64::from(diff > 0),
        CostKind::Lateness => diff,
        CostKind::Earliness => (-diff).max(0),
        CostKind::Deviation => diff.abs(),
        CostKind::SquaredDeviation => diff * diff,
        CostKind::Kendall | CostKind::Spearman => {
            return Err(Error::Unsupported(format!(
                "{kind} is not a per-job delay cost"
            )))
        }
    })
}

/// Cost of `tau` for a single agent whose preferred schedule is `sigma`.
/// Delay kinds sum `delay_cost` over jobs, with the preferred completion
/// times taken from `sigma`.
pub fn agent_cost(
    instance: &Instance,
    kind: CostKind,
    tau: &Schedule,
    sigma: &Schedule,
) -> Result<i64> {
    match kind {
        CostKind::Kendall => kendall(tau, sigma),
        CostKind::Spearman => spearman(tau, sigma),
        _ => {
            let actual = instance.completion_times(tau)?;
            let preferred = instance.completion_times(sigma)?;
            let mut total = 0i64;
            for job in 0..instance.m() {
                total += delay_cost(kind, actual[job], preferred[job])?;
            }
            Ok(total)
        }
    }
}

/// Per-agent costs of `tau`, one entry per distinct preferred schedule in
/// profile order, with that schedule's multiplicity. The weighted entry
/// count equals the number of agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostVector {
    pub entries: Vec<(i64, u64)>,
}

impl CostVector {
    /// Number of agents covered.
    pub fn n(&self) -> u64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }
}

pub fn cost_vector(instance: &Instance, kind: CostKind, tau: &Schedule) -> Result<CostVector> {
    let mut entries = Vec::with_capacity(instance.profile().entries().len());
    for entry in instance.profile().entries() {
        let cost = agent_cost(instance, kind, tau, &entry.schedule)?;
        entries.push((cost, entry.weight));
    }
    Ok(CostVector { entries })
}

/// Combines weighted per-agent costs per the aggregation. Exposed for
/// callers that already hold a cost vector.
pub fn aggregate_values(agg: Aggregation, entries: &[(i64, u64)]) -> Result<i128> {
    match agg {
        Aggregation::Sum => Ok(entries
            .iter()
            .map(|&(cost, w)| cost as i128 * w as i128)
            .sum()),
        Aggregation::Max => Ok(entries
            .iter()
            .map(|&(cost, _)| cost as i128)
            .max()
            .unwrap_or(0)),
        Aggregation::Lp(p) => {
            let mut total: i128 = 0;
            for &(cost, w) in entries {
                debug_assert!(cost >= 0, "Lp aggregation over signed costs");
                let powered = (cost as i128).checked_pow(p).ok_or_else(|| {
                    Error::Capacity(format!("per-agent cost {cost} overflows i128 at power {p}"))
                })?;
                total = powered
                    .checked_mul(w as i128)
                    .and_then(|v| total.checked_add(v))
                    .ok_or_else(|| {
                        Error::Capacity(format!("L{p} objective overflows i128"))
                    })?;
            }
            Ok(total)
        }
    }
}

/// Exact objective of `tau` under `spec`: per-agent costs aggregated over
/// the whole profile. For `Lp` this is the p-th power of the norm, which
/// orders schedules identically and stays integral.
pub fn aggregate(instance: &Instance, spec: CostSpec, tau: &Schedule) -> Result<i128> {
    // Re-validate in case the spec was built from raw fields.
    let spec = CostSpec::new(spec.kind, spec.agg)?;
    let vector = cost_vector(instance, spec.kind, tau)?;
    aggregate_values(spec.agg, &vector.entries)
}

/// Per-job query structure for solvers: for a fixed cost kind, the
/// weighted cost contribution of placing one job so that it completes at
/// time `c` (delay kinds) or runs in slot `c` (Spearman), summed over all
/// agents. Queries cost O(log n) after an O(m n log n) build.
///
/// Kendall is pairwise, not per-job, and is handled separately.
#[derive(Debug)]
pub(crate) struct DelayIndex {
    kind: CostKind,
    jobs: Vec<JobIndex>,
}

#[derive(Debug)]
struct JobIndex {
    /// Distinct preferred values (completion times or slots), ascending.
    vals: Vec<i64>,
    /// Cumulative agent weight, weighted value and weighted value^2 for
    /// `vals[..k]`; index 0 is the empty prefix.
    cum_w: Vec<i64>,
    cum_wv: Vec<i64>,
    cum_wv2: Vec<i64>,
}

impl JobIndex {
    fn build(mut pairs: Vec<(i64, i64)>) -> Self {
        pairs.sort_unstable();
        let mut vals = Vec::with_capacity(pairs.len());
        let mut cum_w = vec![0];
        let mut cum_wv = vec![0];
        let mut cum_wv2 = vec![0];
        for (v, w) in pairs {
            if vals.last() == Some(&v) {
                let k = vals.len();
                cum_w[k] += w;
                cum_wv[k] += w * v;
                cum_wv2[k] += w * v * v;
            } else {
                vals.push(v);
                cum_w.push(cum_w.last().unwrap() + w);
                cum_wv.push(cum_wv.last().unwrap() + w * v);
                cum_wv2.push(cum_wv2.last().unwrap() + w * v * v);
            }
        }
        JobIndex {
            vals,
            cum_w,
            cum_wv,
            cum_wv2,
        }
    }

    fn totals(&self) -> (i64, i64, i64) {
        (
            *self.cum_w.last().unwrap(),
            *self.cum_wv.last().unwrap(),
            *self.cum_wv2.last().unwrap(),
        )
    }

    /// Weighted sum of `max(0, c - v)` over agents (tardiness shape).
    fn late_sum(&self, c: i64) -> i64 {
        let k = self.vals.partition_point(|&v| v < c);
        c * self.cum_w[k] - self.cum_wv[k]
    }

    /// Weighted count of agents with `v < c`.
    fn late_count(&self, c: i64) -> i64 {
        self.cum_w[self.vals.partition_point(|&v| v < c)]
    }

    /// Weighted sum of `max(0, v - c)` over agents (earliness shape).
    fn early_sum(&self, c: i64) -> i64 {
        let k = self.vals.partition_point(|&v| v <= c);
        let (w, wv, _) = self.totals();
        (wv - self.cum_wv[k]) - c * (w - self.cum_w[k])
    }
}

impl DelayIndex {
    /// Builds the index over preferred completion times (delay kinds) or
    /// preferred slots (Spearman).
    pub(crate) fn build(instance: &Instance, kind: CostKind) -> Result<Self> {
        if kind == CostKind::Kendall {
            return Err(Error::Unsupported(
                "kendall cost has no per-job decomposition".into(),
            ));
        }
        let m = instance.m();
        let mut per_job: Vec<Vec<(i64, i64)>> = vec![Vec::new(); m];
        for entry in instance.profile().entries() {
            let w = entry.weight as i64;
            if kind == CostKind::Spearman {
                for job in 0..m {
                    let slot = entry.schedule.position(JobId(job as u32))? as i64;
                    per_job[job].push((slot, w));
                }
            } else {
                let completions = instance.completion_times(&entry.schedule)?;
                for job in 0..m {
                    per_job[job].push((completions[job] as i64, w));
                }
            }
        }
        Ok(DelayIndex {
            kind,
            jobs: per_job.into_iter().map(JobIndex::build).collect(),
        })
    }

    /// Total weighted cost of job `job` completing at time `c` (delay
    /// kinds) or running in slot `c` (Spearman).
    pub(crate) fn job_cost(&self, job: usize, c: i64) -> i64 {
        let idx = &self.jobs[job];
        match self.kind {
            CostKind::Tardiness => idx.late_sum(c),
            CostKind::Late => idx.late_count(c),
            CostKind::Earliness => idx.early_sum(c),
            CostKind::Deviation | CostKind::Spearman => idx.late_sum(c) + idx.early_sum(c),
            CostKind::Lateness => {
                let (w, wv, _) = idx.totals();
                c * w - wv
            }
            CostKind::SquaredDeviation => {
                let (w, wv, wv2) = idx.totals();
                c * c * w - 2 * c * wv + wv2
            }
            CostKind::Kendall => unreachable!("rejected at build"),
        }
    }
}
