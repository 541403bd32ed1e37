//! Axiom checks on rule outputs.
//!
//! Three normative properties are covered. Pareto efficiency: when every
//! agent orders one job before another, the output should too. Majority
//! consistency: pairwise winners under the length-proportional threshold
//! should come first, with a paradox rate measuring how often they do
//! not. Reinforcement: when two disjoint agent groups get the same
//! schedule, their union should get it as well; a randomized harness
//! hunts for counterexamples since no finite check proves the axiom.

use itertools::Itertools;

use crate::costs;
use crate::error::{Error, Result};
use crate::model::{CostSpec, Instance, JobId, PreferenceProfile, Rational, Schedule};
use crate::profiles::{assign_lengths, generate_impartial, LengthSpec};
use crate::rng::{derive_seed, Rng};
use crate::rules::condorcet::{is_pta_condorcet_consistent, PtaTournament};
use crate::rules::Rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    Pareto,
    Reinforcement,
    PtaCondorcet,
}

/// Verdict plus the evidence: `holds` exactly when `witnesses` is empty.
#[derive(Debug, Clone)]
pub struct AxiomReport<W> {
    pub axiom: Axiom,
    pub holds: bool,
    pub witnesses: Vec<W>,
}

fn report<W>(axiom: Axiom, witnesses: Vec<W>) -> AxiomReport<W> {
    AxiomReport {
        axiom,
        holds: witnesses.is_empty(),
        witnesses,
    }
}

/// Lists every unanimous pair the schedule reverses. A witness `(k, l)`
/// means all agents run k before l but the schedule does not.
pub fn check_pareto(
    schedule: &Schedule,
    profile: &PreferenceProfile,
) -> Result<AxiomReport<(JobId, JobId)>> {
    if schedule.m() != profile.m() {
        return Err(Error::InvalidInstance(format!(
            "schedule covers {} jobs, profile has {}",
            schedule.m(),
            profile.m()
        )));
    }
    let unanimous = profile.unanimous_pairs();
    let order = schedule.order();
    let mut witnesses = Vec::new();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if unanimous[order[j].index()][order[i].index()] {
                witnesses.push((order[j], order[i]));
            }
        }
    }
    Ok(report(Axiom::Pareto, witnesses))
}

/// Wraps the majority consistency check as an axiom report; witnesses are
/// the violated (winner, loser) pairs.
pub fn check_pta_condorcet(
    schedule: &Schedule,
    instance: &Instance,
) -> Result<AxiomReport<(JobId, JobId)>> {
    let outcome = is_pta_condorcet_consistent(schedule, instance)?;
    Ok(report(Axiom::PtaCondorcet, outcome.violations))
}

/// Fraction of job pairs scheduled against an undisputed pairwise winner,
/// out of all m(m-1)/2 pairs. Pairs whose jobs beat each other are not
/// counted: no order can satisfy them, so they say nothing about this
/// schedule.
pub fn paradox_rate(schedule: &Schedule, instance: &Instance) -> Result<Rational> {
    let m = instance.m();
    if m < 2 {
        return Err(Error::InvalidSpec(
            "the paradox rate needs at least two jobs".into(),
        ));
    }
    if schedule.m() != m {
        return Err(Error::InvalidInstance(format!(
            "schedule covers {} jobs, instance has {m}",
            schedule.m()
        )));
    }
    let tournament = PtaTournament::build(instance);
    let order = schedule.order();
    let mut violated: i128 = 0;
    for i in 0..m {
        for j in i + 1..m {
            let (first, second) = (order[i], order[j]);
            if tournament.beats(second, first) && !tournament.beats(first, second) {
                violated += 1;
            }
        }
    }
    Ok(Rational::new(
        violated,
        m as i128 * (m as i128 - 1) / 2,
    ))
}

/// One reinforcement counterexample: both halves agreed on `shared`, yet
/// their union produced `union`.
#[derive(Debug, Clone)]
pub struct ReinforcementWitness {
    pub trial: u64,
    pub shared: Schedule,
    pub union: Schedule,
}

#[derive(Debug, Clone)]
pub struct ReinforcementOutcome {
    pub report: AxiomReport<ReinforcementWitness>,
    pub trials: u64,
    /// Trials where both halves produced the same schedule and the union
    /// check therefore applied.
    pub coincided: u64,
    /// Trials whose halves matched only by tie-breaking (some optimum was
    /// not unique); skipped, since the axiom speaks about selected sets.
    pub skipped_ties: u64,
}

/// True when exactly one schedule attains the optimal objective. Checked
/// by full enumeration, which is why cost rules cap the job count.
fn unique_optimum(instance: &Instance, spec: CostSpec) -> Result<bool> {
    let m = instance.m();
    let mut best = i128::MAX;
    let mut ties = 0u32;
    for perm in (0..m as u32).permutations(m) {
        let schedule = Schedule::from_indices(&perm)?;
        let value = costs::aggregate(instance, spec, &schedule)?;
        if value < best {
            best = value;
            ties = 1;
        } else if value == best {
            ties += 1;
        }
    }
    Ok(ties == 1)
}

/// Samples pairs of agent groups over a shared job set and checks that
/// whenever the rule gives both groups the same schedule, the combined
/// group gets it too. Jobs per trial vary between 2 and `max_jobs`;
/// lengths are drawn small so ties and near-ties are common.
///
/// For cost rules a trial only counts when the optimum is unique in both
/// halves (the enumeration oracle caps `max_jobs` at 6). Uniqueness in
/// the union then comes free: union objectives add up per agent, so the
/// shared optimum stays strictly ahead of every other schedule.
pub fn test_reinforcement(
    rule: &Rule,
    max_jobs: usize,
    trials: u64,
    seed: u64,
) -> Result<ReinforcementOutcome> {
    if max_jobs < 2 {
        return Err(Error::InvalidSpec(
            "reinforcement trials need at least two jobs".into(),
        ));
    }
    let is_cost = matches!(rule, Rule::Cost(_));
    if is_cost && max_jobs > 6 {
        return Err(Error::Capacity(
            "tie detection enumerates every schedule, so cost rules allow at most 6 jobs".into(),
        ));
    }
    let mut witnesses = Vec::new();
    let mut coincided = 0u64;
    let mut skipped_ties = 0u64;
    for trial in 0..trials {
        let mut rng = Rng::new(derive_seed(seed, trial));
        let m = 2 + rng.next_below(max_jobs as u64 - 1) as usize;
        let p_max = 1 + rng.next_below(3);
        let lengths = LengthSpec::Explicit((0..m).map(|_| 1 + rng.next_below(p_max)).collect());
        let first = generate_impartial(m, 1 + rng.next_below(4), rng.next_u64())?;
        let second = generate_impartial(m, 1 + rng.next_below(4), rng.next_u64())?;
        let mut combined: Vec<(Schedule, u64)> = Vec::new();
        for profile in [&first, &second] {
            combined.extend(
                profile
                    .entries()
                    .iter()
                    .map(|e| (e.schedule.clone(), e.weight)),
            );
        }
        let union = PreferenceProfile::from_weighted(m, combined)?;
        let half_a = assign_lengths(first, &lengths, 0)?;
        let half_b = assign_lengths(second, &lengths, 0)?;
        let joint = assign_lengths(union, &lengths, 0)?;
        let out_a = rule.apply(&half_a)?;
        if out_a != rule.apply(&half_b)? {
            continue;
        }
        if let Rule::Cost(spec) = rule {
            if !unique_optimum(&half_a, *spec)? || !unique_optimum(&half_b, *spec)? {
                skipped_ties += 1;
                continue;
            }
        }
        coincided += 1;
        let out_joint = rule.apply(&joint)?;
        if out_joint != out_a {
            witnesses.push(ReinforcementWitness {
                trial,
                shared: out_a,
                union: out_joint,
            });
        }
    }
    Ok(ReinforcementOutcome {
        report: report(Axiom::Reinforcement, witnesses),
        trials,
        coincided,
        skipped_ties,
    })
}
