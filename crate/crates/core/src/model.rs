//! Core domain types: jobs, schedules, preference profiles and cost specs.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Capacity bounds the integer accumulators are sized for. Construction
/// rejects anything larger, which is what makes the "no overflow" claim
/// of the cost layer hold without runtime checks on hot paths.
pub const MAX_JOBS: usize = 32;
pub const MAX_AGENTS: u64 = 10_000;
pub const MAX_PROCESSING_TIME: u64 = 1_000;

/// Exact fraction used wherever a rate or index must not be rounded.
/// Within the capacity bounds above, numerators and denominators stay far
/// from the i128 range.
pub type Rational = num_rational::Ratio<i128>;

/// Dense 0-based job identifier. Display is 1-based to match file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobId(pub u32);

impl JobId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

/// A job with a positive integer processing time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub id: JobId,
    pub processing_time: u64,
}

/// A permutation of the job set `0..m`. Jobs run back to back starting at
/// time zero, so the permutation determines all completion times.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    order: Vec<JobId>,
    /// Inverse permutation: `positions[job.index()]` is the job's slot.
    positions: Vec<u32>,
}

impl Schedule {
    /// Builds a schedule over `m` jobs, checking that `order` is a
    /// permutation of `0..m`.
    pub fn new(order: Vec<JobId>, m: usize) -> Result<Self> {
        if order.len() != m {
            return Err(Error::InvalidInstance(format!(
                "schedule has {} entries, expected {}",
                order.len(),
                m
            )));
        }
        let mut positions = vec![u32::MAX; m];
        for (slot, job) in order.iter().enumerate() {
            let Some(p) = positions.get_mut(job.index()) else {
                return Err(Error::InvalidInstance(format!(
                    "schedule mentions unknown job {job}"
                )));
            };
            if *p != u32::MAX {
                return Err(Error::InvalidInstance(format!(
                    "schedule mentions job {job} twice"
                )));
            }
            *p = slot as u32;
        }
        Ok(Schedule { order, positions })
    }

    /// Convenience constructor from 0-based indices.
    pub fn from_indices(order: &[u32]) -> Result<Self> {
        let m = order.len();
        Schedule::new(order.iter().map(|&i| JobId(i)).collect(), m)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn order(&self) -> &[JobId] {
        &self.order
    }

    /// 0-based slot of `job`.
    pub fn position(&self, job: JobId) -> Result<usize> {
        self.positions
            .get(job.index())
            .map(|&p| p as usize)
            .ok_or_else(|| Error::InvalidInstance(format!("unknown job {job}")))
    }

    /// Whether `a` runs before `b`.
    pub fn precedes(&self, a: JobId, b: JobId) -> Result<bool> {
        Ok(self.position(a)? < self.position(b)?)
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.order.iter().map(|j| j.to_string()).collect();
        write!(f, "Schedule({})", ids.join(","))
    }
}

/// One distinct preferred schedule and how many agents submitted it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileEntry {
    pub schedule: Schedule,
    pub weight: u64,
}

/// The agents' preferred schedules. Identical submissions are stored once
/// with a multiplicity, in first-seen order; rules treat an entry of
/// weight `w` exactly like `w` separate agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    m: usize,
    entries: Vec<ProfileEntry>,
}

impl PreferenceProfile {
    /// Builds a profile from one schedule per agent, merging duplicates.
    pub fn from_schedules(m: usize, schedules: Vec<Schedule>) -> Result<Self> {
        Self::from_weighted(m, schedules.into_iter().map(|s| (s, 1)).collect())
    }

    /// Builds a profile from (schedule, multiplicity) pairs, merging
    /// duplicates. Multiplicities must be positive.
    pub fn from_weighted(m: usize, weighted: Vec<(Schedule, u64)>) -> Result<Self> {
        if weighted.is_empty() {
            return Err(Error::InvalidInstance("profile has no agents".into()));
        }
        if m > MAX_JOBS {
            return Err(Error::Capacity(format!(
                "{m} jobs exceeds the supported maximum of {MAX_JOBS}"
            )));
        }
        let mut total_weight: u64 = 0;
        let mut entries: Vec<ProfileEntry> = Vec::new();
        let mut seen: HashMap<Vec<JobId>, usize> = HashMap::new();
        for (schedule, weight) in weighted {
            if schedule.m() != m {
                return Err(Error::InvalidInstance(format!(
                    "preferred schedule covers {} jobs, instance has {m}",
                    schedule.m()
                )));
            }
            if weight == 0 {
                return Err(Error::InvalidInstance(
                    "schedule multiplicity must be positive".into(),
                ));
            }
            total_weight = total_weight.saturating_add(weight);
            if total_weight > MAX_AGENTS {
                return Err(Error::Capacity(format!(
                    "more than {MAX_AGENTS} agents"
                )));
            }
            match seen.entry(schedule.order().to_vec()) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    entries[*e.get()].weight += weight;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(entries.len());
                    entries.push(ProfileEntry { schedule, weight });
                }
            }
        }
        Ok(PreferenceProfile { m, entries })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of agents (sum of multiplicities).
    pub fn n(&self) -> u64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    #[inline]
    pub fn entries(&self) -> &[ProfileEntry] {
        &self.entries
    }

    /// `matrix[a][b]` is true when every agent runs a before b.
    pub fn unanimous_pairs(&self) -> Vec<Vec<bool>> {
        let m = self.m;
        let mut unanimous = vec![vec![true; m]; m];
        for a in 0..m {
            unanimous[a][a] = false;
        }
        for entry in &self.entries {
            for a in 0..m {
                for b in 0..m {
                    if a != b
                        && !entry
                            .schedule
                            .precedes(JobId(a as u32), JobId(b as u32))
                            .expect("profile schedules cover every job")
                    {
                        unanimous[a][b] = false;
                    }
                }
            }
        }
        unanimous
    }
}

/// A job set with processing times plus the agents' preferred schedules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    jobs: Vec<Job>,
    profile: PreferenceProfile,
    /// Display label per job; defaults to the 1-based id.
    labels: Vec<String>,
}

impl Instance {
    /// Validates that job ids are dense `0..m`, processing times are
    /// positive and the profile covers the same job set.
    pub fn new(jobs: Vec<Job>, profile: PreferenceProfile) -> Result<Self> {
        let labels = (1..=jobs.len()).map(|i| i.to_string()).collect();
        Self::with_labels(jobs, profile, labels)
    }

    pub fn with_labels(
        jobs: Vec<Job>,
        profile: PreferenceProfile,
        labels: Vec<String>,
    ) -> Result<Self> {
        if jobs.is_empty() {
            return Err(Error::InvalidInstance("instance has no jobs".into()));
        }
        for (i, job) in jobs.iter().enumerate() {
            if job.id.index() != i {
                return Err(Error::InvalidInstance(format!(
                    "job ids must be dense 0..m, found {} at index {i}",
                    job.id
                )));
            }
            if job.processing_time == 0 {
                return Err(Error::InvalidInstance(format!(
                    "job {} has zero processing time",
                    job.id
                )));
            }
            if job.processing_time > MAX_PROCESSING_TIME {
                return Err(Error::Capacity(format!(
                    "job {} has processing time {} above the supported maximum of {MAX_PROCESSING_TIME}",
                    job.id, job.processing_time
                )));
            }
        }
        if profile.m() != jobs.len() {
            return Err(Error::InvalidInstance(format!(
                "profile covers {} jobs, instance has {}",
                profile.m(),
                jobs.len()
            )));
        }
        if labels.len() != jobs.len() {
            return Err(Error::InvalidInstance(format!(
                "{} labels for {} jobs",
                labels.len(),
                jobs.len()
            )));
        }
        Ok(Instance {
            jobs,
            profile,
            labels,
        })
    }

    /// Builds an instance from processing times, one per job in id order.
    pub fn from_times(times: &[u64], profile: PreferenceProfile) -> Result<Self> {
        let jobs = times
            .iter()
            .enumerate()
            .map(|(i, &p)| Job {
                id: JobId(i as u32),
                processing_time: p,
            })
            .collect();
        Instance::new(jobs, profile)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.jobs.len()
    }

    /// Number of agents.
    pub fn n(&self) -> u64 {
        self.profile.n()
    }

    #[inline]
    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    #[inline]
    pub fn profile(&self) -> &PreferenceProfile {
        &self.profile
    }

    #[inline]
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn processing_time(&self, job: JobId) -> u64 {
        self.jobs[job.index()].processing_time
    }

    pub fn total_processing(&self) -> u64 {
        self.jobs.iter().map(|j| j.processing_time).sum()
    }

    /// The common processing time, if all jobs share one.
    pub fn equal_length(&self) -> Option<u64> {
        let p = self.jobs[0].processing_time;
        self.jobs
            .iter()
            .all(|j| j.processing_time == p)
            .then_some(p)
    }

    /// Completion time per job (indexed by job id) under `schedule`.
    /// Jobs run gap-free from time zero, so these are prefix sums.
    pub fn completion_times(&self, schedule: &Schedule) -> Result<Vec<u64>> {
        if schedule.m() != self.m() {
            return Err(Error::InvalidInstance(format!(
                "schedule covers {} jobs, instance has {}",
                schedule.m(),
                self.m()
            )));
        }
        let mut completions = vec![0u64; self.m()];
        let mut clock = 0u64;
        for &job in schedule.order() {
            clock += self.processing_time(job);
            completions[job.index()] = clock;
        }
        Ok(completions)
    }

    /// Renders a schedule as comma-separated job labels.
    pub fn format_schedule(&self, schedule: &Schedule) -> String {
        schedule
            .order()
            .iter()
            .map(|&j| self.labels[j.index()].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Per-agent disagreement measures between a shared schedule and an
/// agent's preferred one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostKind {
    /// Number of job pairs ordered oppositely (swap distance).
    Kendall,
    /// Sum over jobs of the absolute slot displacement.
    Spearman,
    /// Sum of per-job tardiness `max(0, c - d)`.
    Tardiness,
    /// Number of late jobs (`c > d`).
    Late,
    /// Sum of per-job lateness `c - d`; the only signed kind.
    Lateness,
    /// Sum of per-job earliness `max(0, d - c)`.
    Earliness,
    /// Sum of per-job absolute deviation `|c - d|`.
    Deviation,
    /// Sum of per-job squared deviation `(c - d)^2`.
    SquaredDeviation,
}

impl CostKind {
    pub const ALL: [CostKind; 8] = [
        CostKind::Kendall,
        CostKind::Spearman,
        CostKind::Tardiness,
        CostKind::Late,
        CostKind::Lateness,
        CostKind::Earliness,
        CostKind::Deviation,
        CostKind::SquaredDeviation,
    ];

    /// Kinds defined through per-job completion-time delays.
    pub fn is_delay(self) -> bool {
        !matches!(self, CostKind::Kendall | CostKind::Spearman)
    }

    /// Whether per-agent costs are always nonnegative.
    pub fn nonnegative(self) -> bool {
        !matches!(self, CostKind::Lateness)
    }

    pub fn token(self) -> &'static str {
        match self {
            CostKind::Kendall => "k",
            CostKind::Spearman => "s",
            CostKind::Tardiness => "t",
            CostKind::Late => "u",
            CostKind::Lateness => "l",
            CostKind::Earliness => "e",
            CostKind::Deviation => "d",
            CostKind::SquaredDeviation => "sd",
        }
    }

    pub fn parse_token(token: &str) -> Result<Self> {
        CostKind::ALL
            .into_iter()
            .find(|k| k.token() == token)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown cost kind `{token}`")))
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.token())
    }
}

/// How per-agent costs combine into one objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregation {
    Sum,
    Max,
    /// Compared through the p-th power of the L_p norm, which is an exact
    /// integer and ranks schedules identically.
    Lp(u32),
}

impl Aggregation {
    /// Parses `sum`, `max` or `l<p>` (the display format).
    pub fn parse_token(token: &str) -> Result<Self> {
        match token {
            "sum" => Ok(Aggregation::Sum),
            "max" => Ok(Aggregation::Max),
            _ => token
                .strip_prefix('l')
                .and_then(|p| p.parse().ok())
                .map(Aggregation::Lp)
                .ok_or_else(|| {
                    Error::InvalidSpec(format!(
                        "unknown aggregation `{token}`, expected sum, max or l<p>"
                    ))
                }),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregation::Sum => write!(f, "sum"),
            Aggregation::Max => write!(f, "max"),
            Aggregation::Lp(p) => write!(f, "l{p}"),
        }
    }
}

/// A cost kind together with an aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CostSpec {
    pub kind: CostKind,
    pub agg: Aggregation,
}

impl CostSpec {
    /// Validates the combination: `Lp` needs `p >= 2` (use `Sum` for
    /// p = 1), and the signed `Lateness` kind only supports `Sum`.
    pub fn new(kind: CostKind, agg: Aggregation) -> Result<Self> {
        if let Aggregation::Lp(p) = agg {
            if p < 2 {
                return Err(Error::InvalidSpec(format!(
                    "Lp aggregation needs p >= 2, got {p}; use sum for p = 1"
                )));
            }
        }
        if kind == CostKind::Lateness && agg != Aggregation::Sum {
            return Err(Error::Unsupported(
                "lateness can be negative, so only sum aggregation is defined for it".into(),
            ));
        }
        Ok(CostSpec { kind, agg })
    }

    pub fn sum(kind: CostKind) -> Self {
        CostSpec {
            kind,
            agg: Aggregation::Sum,
        }
    }

    pub fn max(kind: CostKind) -> Self {
        // `new` only rejects max for Lateness.
        CostSpec::new(kind, Aggregation::Max).expect("max spec")
    }

    /// Parses the display format `<agg>-<kind>`, e.g. `sum-t` or `l2-sd`.
    pub fn parse(token: &str) -> Result<Self> {
        let (agg, kind) = token.split_once('-').ok_or_else(|| {
            Error::InvalidSpec(format!(
                "unknown cost objective `{token}`, expected <agg>-<kind> like sum-t"
            ))
        })?;
        CostSpec::new(CostKind::parse_token(kind)?, Aggregation::parse_token(agg)?)
    }
}

impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.agg, self.kind)
    }
}
