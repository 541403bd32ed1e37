//! Majority rules with length-proportional thresholds.
//!
//! A plain majority between two jobs ignores how long they run, so a
//! popular long job could displace many short ones and make most agents
//! wait. Here the bar scales with processing time: J_k wins the pairwise
//! comparison against J_l when the fraction of agents placing J_k first
//! is at least p_k / (p_k + p_l). Displacing a long job takes
//! proportionally more support than displacing a short one. All threshold
//! checks cross multiply integers; nothing is rounded.
//!
//! With the bar at "at least", an exact split can make two jobs beat each
//! other simultaneously. Two agents disagreeing over two equal-length
//! jobs is the smallest case: each direction has half the votes and the
//! threshold is exactly one half. No ordering honors both directions, so
//! when a mutual pair occurs nothing passes [`is_pta_condorcet_consistent`]
//! and [`pta_consistent_schedule_exists`] returns `None`.

use crate::error::{Error, Result};
use crate::model::{Instance, JobId, Schedule};

/// Pairwise support counts plus the lengths needed to interpret them.
#[derive(Debug, Clone)]
pub struct PtaTournament {
    n: u64,
    times: Vec<u64>,
    /// support[k][l] = total weight of agents scheduling J_k before J_l.
    support: Vec<Vec<u64>>,
}

impl PtaTournament {
    pub fn build(instance: &Instance) -> Self {
        let m = instance.m();
        let mut support = vec![vec![0u64; m]; m];
        let mut pos = vec![0usize; m];
        for entry in instance.profile().entries() {
            for (slot, &job) in entry.schedule.order().iter().enumerate() {
                pos[job.index()] = slot;
            }
            for k in 0..m {
                for l in 0..m {
                    if pos[k] < pos[l] {
                        support[k][l] += entry.weight;
                    }
                }
            }
        }
        PtaTournament {
            n: instance.n(),
            times: (0..m)
                .map(|j| instance.processing_time(JobId(j as u32)))
                .collect(),
            support,
        }
    }

    pub fn m(&self) -> usize {
        self.support.len()
    }

    /// Total weight of agents scheduling `k` before `l`.
    pub fn support(&self, k: JobId, l: JobId) -> u64 {
        self.support[k.index()][l.index()]
    }

    /// Whether `k` wins the pairwise comparison against `l`: the agents
    /// putting `k` first are at least a p_k / (p_k + p_l) fraction of all
    /// agents. Compared as support * (p_k + p_l) >= n * p_k, exactly.
    pub fn beats(&self, k: JobId, l: JobId) -> bool {
        let (k, l) = (k.index(), l.index());
        if k == l {
            return false;
        }
        let have = self.support[k][l] as u128 * (self.times[k] + self.times[l]) as u128;
        have >= self.n as u128 * self.times[k] as u128
    }

    /// Both directions hold at once. Happens exactly when the support
    /// split matches the length ratio to the agent; see the module notes.
    pub fn mutual(&self, k: JobId, l: JobId) -> bool {
        self.beats(k, l) && self.beats(l, k)
    }

    pub fn has_mutual_pair(&self) -> bool {
        let m = self.m();
        (0..m).any(|k| {
            (k + 1..m).any(|l| self.mutual(JobId(k as u32), JobId(l as u32)))
        })
    }

    /// Number of jobs each job beats. Mutual pairs score for both sides.
    pub fn copeland_scores(&self) -> Vec<usize> {
        let m = self.m();
        (0..m)
            .map(|k| {
                (0..m)
                    .filter(|&l| self.beats(JobId(k as u32), JobId(l as u32)))
                    .count()
            })
            .collect()
    }

    /// Support shortfall of `k` against `l`, in agents, as an exact
    /// fraction (numerator, denominator): zero when `k` beats `l`.
    fn defeat_parts(&self, k: usize, l: usize) -> (i128, i128) {
        let den = (self.times[k] + self.times[l]) as i128;
        let num = self.n as i128 * self.times[k] as i128
            - self.support[k][l] as i128 * den;
        (num.max(0), den)
    }

    /// Largest shortfall of `k` against any opponent still in play.
    fn worst_defeat(&self, k: usize, remaining: &[bool]) -> (i128, i128) {
        let mut worst = (0i128, 1i128);
        for l in 0..self.m() {
            if l != k && remaining[l] {
                let d = self.defeat_parts(k, l);
                if d.0 * worst.1 > worst.0 * d.1 {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Schedules jobs by descending pairwise win count; ties go to shorter
/// processing time, then lower id.
pub fn pta_copeland(instance: &Instance) -> Schedule {
    let t = PtaTournament::build(instance);
    let scores = t.copeland_scores();
    let mut scored: Vec<(usize, u64, u32)> = (0..instance.m())
        .map(|k| (scores[k], t.times[k], k as u32))
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let order = scored.iter().map(|&(_, _, id)| JobId(id)).collect();
    Schedule::new(order, instance.m()).expect("a permutation of all jobs")
}

/// Repeatedly schedules the remaining job whose largest support shortfall
/// against any other remaining job is smallest, comparing the shortfall
/// fractions exactly; ties go to shorter processing time, then lower id.
pub fn pta_iterative_minimax(instance: &Instance) -> Schedule {
    let t = PtaTournament::build(instance);
    let m = instance.m();
    let mut remaining = vec![true; m];
    let mut order = Vec::with_capacity(m);
    for _ in 0..m {
        let mut pick: Option<(i128, i128, u64, u32)> = None;
        for k in 0..m {
            if !remaining[k] {
                continue;
            }
            let (num, den) = t.worst_defeat(k, &remaining);
            let better = match pick {
                None => true,
                Some((bn, bd, bp, bid)) => match (num * bd).cmp(&(bn * den)) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Equal => (t.times[k], k as u32) < (bp, bid),
                    std::cmp::Ordering::Greater => false,
                },
            };
            if better {
                pick = Some((num, den, t.times[k], k as u32));
            }
        }
        let id = pick.expect("some job always remains").3;
        remaining[id as usize] = false;
        order.push(JobId(id));
    }
    Schedule::new(order, m).expect("a permutation of all jobs")
}

/// Outcome of checking a schedule against every won pairwise comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// Pairs (winner, loser) where the winner must precede the loser but
    /// does not, in schedule order of the offending positions.
    pub violations: Vec<(JobId, JobId)>,
}

/// Checks that every pairwise winner precedes the job it beats. A mutual
/// pair makes this impossible, so it always surfaces as a violation.
pub fn is_pta_condorcet_consistent(
    schedule: &Schedule,
    instance: &Instance,
) -> Result<ConsistencyReport> {
    if schedule.m() != instance.m() {
        return Err(Error::InvalidInstance(format!(
            "schedule covers {} jobs, instance has {}",
            schedule.m(),
            instance.m()
        )));
    }
    let t = PtaTournament::build(instance);
    let order = schedule.order();
    let mut violations = Vec::new();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if t.beats(order[j], order[i]) {
                violations.push((order[j], order[i]));
            }
        }
    }
    Ok(ConsistencyReport {
        consistent: violations.is_empty(),
        violations,
    })
}

/// The schedule honoring every won pairwise comparison, when one exists.
///
/// Some direction always wins each pair (the two thresholds sum to the
/// total agent weight), so the beat relation is a complete tournament.
/// A mutual pair rules out any consistent order immediately. Otherwise
/// consistent orders are exactly the topological orders, a complete
/// acyclic tournament has a unique one, and peeling the job that beats
/// every other remaining job finds it or proves a cycle.
pub fn pta_consistent_schedule_exists(instance: &Instance) -> Option<Schedule> {
    let t = PtaTournament::build(instance);
    if t.has_mutual_pair() {
        return None;
    }
    let m = instance.m();
    let mut remaining = vec![true; m];
    let mut order = Vec::with_capacity(m);
    for _ in 0..m {
        let source = (0..m).find(|&k| {
            remaining[k]
                && (0..m).all(|l| {
                    !remaining[l] || l == k || t.beats(JobId(k as u32), JobId(l as u32))
                })
        })?;
        remaining[source] = false;
        order.push(JobId(source as u32));
    }
    Some(Schedule::new(order, m).expect("a permutation of all jobs"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PreferenceProfile;

    /// Five unit-length agents: one (J1,J2,J3), two (J1,J3,J2), two
    /// (J2,J3,J1). J1 beats both others 3-2, J2 beats J3 3-2.
    fn five_unit_agents() -> Instance {
        let profile = PreferenceProfile::from_weighted(
            3,
            vec![
                (Schedule::from_indices(&[0, 1, 2]).unwrap(), 1),
                (Schedule::from_indices(&[0, 2, 1]).unwrap(), 2),
                (Schedule::from_indices(&[1, 2, 0]).unwrap(), 2),
            ],
        )
        .unwrap();
        Instance::from_times(&[1, 1, 1], profile).unwrap()
    }

    fn permutations(m: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut ids: Vec<u32> = (0..m as u32).collect();
        loop {
            out.push(ids.clone());
            // next lexicographic permutation of ids
            let Some(i) = (0..ids.len().saturating_sub(1)).rev().find(|&i| ids[i] < ids[i + 1])
            else {
                return out;
            };
            let j = (i + 1..ids.len()).rev().find(|&j| ids[j] > ids[i]).unwrap();
            ids.swap(i, j);
            ids[i + 1..].reverse();
        }
    }

    /// All consistent schedules, by checking every permutation.
    fn consistent_orders(instance: &Instance) -> Vec<Vec<u32>> {
        permutations(instance.m())
            .into_iter()
            .filter(|ids| {
                let s = Schedule::from_indices(ids).unwrap();
                is_pta_condorcet_consistent(&s, instance).unwrap().consistent
            })
            .collect()
    }

    #[test]
    fn tournament_counts_and_beats() {
        let t = PtaTournament::build(&five_unit_agents());
        let (a, b, c) = (JobId(0), JobId(1), JobId(2));
        assert_eq!(t.support(a, b), 3);
        assert_eq!(t.support(b, a), 2);
        assert_eq!(t.support(a, c), 3);
        assert_eq!(t.support(c, a), 2);
        assert_eq!(t.support(b, c), 3);
        assert_eq!(t.support(c, b), 2);
        assert!(t.beats(a, b) && t.beats(a, c) && t.beats(b, c));
        assert!(!t.beats(b, a) && !t.beats(c, a) && !t.beats(c, b));
        assert!(!t.beats(a, a));
        assert!(!t.has_mutual_pair());
        assert_eq!(t.copeland_scores(), vec![2, 1, 0]);
    }

    #[test]
    fn support_rows_sum_to_agent_count() {
        let instance = five_unit_agents();
        let t = PtaTournament::build(&instance);
        for k in 0..3 {
            for l in 0..3 {
                if k != l {
                    let (k, l) = (JobId(k), JobId(l));
                    assert_eq!(t.support(k, l) + t.support(l, k), instance.n());
                    // the thresholds sum to n, so some direction always wins
                    assert!(t.beats(k, l) || t.beats(l, k));
                }
            }
        }
    }

    #[test]
    fn both_rules_follow_the_unbeaten_job() {
        let instance = five_unit_agents();
        let want = Schedule::from_indices(&[0, 1, 2]).unwrap();
        assert_eq!(pta_copeland(&instance), want);
        assert_eq!(pta_iterative_minimax(&instance), want);
        assert_eq!(pta_consistent_schedule_exists(&instance), Some(want));
    }

    #[test]
    fn consistency_report_names_the_violated_pair() {
        let instance = five_unit_agents();
        let good = Schedule::from_indices(&[0, 1, 2]).unwrap();
        let report = is_pta_condorcet_consistent(&good, &instance).unwrap();
        assert!(report.consistent);
        assert!(report.violations.is_empty());
        let bad = Schedule::from_indices(&[0, 2, 1]).unwrap();
        let report = is_pta_condorcet_consistent(&bad, &instance).unwrap();
        assert!(!report.consistent);
        assert_eq!(report.violations, vec![(JobId(1), JobId(2))]);
        assert_eq!(consistent_orders(&instance), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn single_agent_gets_her_order() {
        let own = Schedule::from_indices(&[2, 0, 1]).unwrap();
        let profile = PreferenceProfile::from_schedules(3, vec![own.clone()]).unwrap();
        let instance = Instance::from_times(&[3, 1, 2], profile).unwrap();
        assert_eq!(pta_consistent_schedule_exists(&instance), Some(own.clone()));
        assert_eq!(pta_copeland(&instance), own);
        assert_eq!(pta_iterative_minimax(&instance), own);
        assert!(is_pta_condorcet_consistent(&own, &instance)
            .unwrap()
            .consistent);
    }

    #[test]
    fn opposite_agents_beat_each_other() {
        let profile = PreferenceProfile::from_schedules(
            2,
            vec![
                Schedule::from_indices(&[0, 1]).unwrap(),
                Schedule::from_indices(&[1, 0]).unwrap(),
            ],
        )
        .unwrap();
        let instance = Instance::from_times(&[4, 4], profile).unwrap();
        let t = PtaTournament::build(&instance);
        assert!(t.mutual(JobId(0), JobId(1)));
        assert_eq!(pta_consistent_schedule_exists(&instance), None);
        assert!(consistent_orders(&instance).is_empty());
    }

    #[test]
    fn majority_cycle_has_no_consistent_schedule() {
        let profile = PreferenceProfile::from_schedules(
            3,
            vec![
                Schedule::from_indices(&[0, 1, 2]).unwrap(),
                Schedule::from_indices(&[1, 2, 0]).unwrap(),
                Schedule::from_indices(&[2, 0, 1]).unwrap(),
            ],
        )
        .unwrap();
        let instance = Instance::from_times(&[1, 1, 1], profile).unwrap();
        let t = PtaTournament::build(&instance);
        assert!(!t.has_mutual_pair());
        assert_eq!(t.copeland_scores(), vec![1, 1, 1]);
        assert_eq!(pta_consistent_schedule_exists(&instance), None);
        assert!(consistent_orders(&instance).is_empty());
        // every defeat ties at 1/2, so both rules fall back to job id
        let fallback = Schedule::from_indices(&[0, 1, 2]).unwrap();
        assert_eq!(pta_copeland(&instance), fallback);
        assert_eq!(pta_iterative_minimax(&instance), fallback);
    }

    #[test]
    fn split_matching_length_ratio_blocks_existence() {
        // 3 agents (J1,J2,J3) vs 3 agents (J2,J3,J1) with p = (1,2,1):
        // on the pair (J1,J3) each side holds exactly half the weight and
        // the lengths are equal, so J1 and J3 beat each other.
        let profile = PreferenceProfile::from_weighted(
            3,
            vec![
                (Schedule::from_indices(&[0, 1, 2]).unwrap(), 3),
                (Schedule::from_indices(&[1, 2, 0]).unwrap(), 3),
            ],
        )
        .unwrap();
        let instance = Instance::from_times(&[1, 2, 1], profile).unwrap();
        let t = PtaTournament::build(&instance);
        assert!(t.mutual(JobId(0), JobId(2)));
        assert_eq!(pta_consistent_schedule_exists(&instance), None);
        assert!(consistent_orders(&instance).is_empty());
    }

    #[test]
    fn existence_matches_checker_on_all_small_unit_profiles() {
        // every profile of up to three agents over three unit jobs
        let perms = permutations(3);
        let mut profiles: Vec<Vec<usize>> = Vec::new();
        for n in 1..=3usize {
            let mut pick = vec![0usize; n];
            loop {
                profiles.push(pick.clone());
                let Some(i) = (0..n).rev().find(|&i| pick[i] < perms.len() - 1) else {
                    break;
                };
                pick[i] += 1;
                pick[i + 1..].iter_mut().for_each(|v| *v = 0);
            }
        }
        assert_eq!(profiles.len(), 6 + 36 + 216);
        for pick in profiles {
            let schedules = pick
                .iter()
                .map(|&i| Schedule::from_indices(&perms[i]).unwrap())
                .collect();
            let profile = PreferenceProfile::from_schedules(3, schedules).unwrap();
            let instance = Instance::from_times(&[1, 1, 1], profile).unwrap();
            let consistent = consistent_orders(&instance);
            match pta_consistent_schedule_exists(&instance) {
                Some(found) => {
                    let ids: Vec<u32> = found.order().iter().map(|j| j.0).collect();
                    assert_eq!(consistent, vec![ids], "profile {pick:?}");
                    assert_eq!(pta_copeland(&instance), found, "profile {pick:?}");
                    assert_eq!(pta_iterative_minimax(&instance), found, "profile {pick:?}");
                }
                None => assert!(consistent.is_empty(), "profile {pick:?}"),
            }
        }
    }

    #[test]
    fn existence_matches_checker_on_random_length_instances() {
        let mut rng = crate::rng::Rng::new(77);
        for trial in 0..200 {
            let m = 2 + rng.next_below(4) as usize;
            let times: Vec<u64> = (0..m).map(|_| 1 + rng.next_below(5)).collect();
            let entries: Vec<(Schedule, u64)> = (0..1 + rng.next_below(4))
                .map(|_| {
                    let mut ids: Vec<u32> = (0..m as u32).collect();
                    rng.shuffle(&mut ids);
                    (Schedule::from_indices(&ids).unwrap(), 1 + rng.next_below(3))
                })
                .collect();
            let profile = PreferenceProfile::from_weighted(m, entries).unwrap();
            let instance = Instance::from_times(&times, profile).unwrap();
            let consistent = consistent_orders(&instance);
            match pta_consistent_schedule_exists(&instance) {
                Some(found) => {
                    let ids: Vec<u32> = found.order().iter().map(|j| j.0).collect();
                    assert_eq!(consistent, vec![ids], "trial {trial}");
                    assert_eq!(pta_copeland(&instance), found, "trial {trial}");
                    assert_eq!(pta_iterative_minimax(&instance), found, "trial {trial}");
                }
                None => assert!(consistent.is_empty(), "trial {trial}"),
            }
        }
    }

    #[test]
    fn decisions_survive_scaling_weights_and_lengths() {
        let mut rng = crate::rng::Rng::new(78);
        for _ in 0..50 {
            let m = 2 + rng.next_below(4) as usize;
            let times: Vec<u64> = (0..m).map(|_| 1 + rng.next_below(6)).collect();
            let entries: Vec<(Schedule, u64)> = (0..1 + rng.next_below(3))
                .map(|_| {
                    let mut ids: Vec<u32> = (0..m as u32).collect();
                    rng.shuffle(&mut ids);
                    (Schedule::from_indices(&ids).unwrap(), 1 + rng.next_below(4))
                })
                .collect();
            let scaled_entries: Vec<(Schedule, u64)> = entries
                .iter()
                .map(|(s, w)| (s.clone(), w * 3))
                .collect();
            let scaled_times: Vec<u64> = times.iter().map(|p| p * 5).collect();
            let base = Instance::from_times(
                &times,
                PreferenceProfile::from_weighted(m, entries).unwrap(),
            )
            .unwrap();
            let scaled = Instance::from_times(
                &scaled_times,
                PreferenceProfile::from_weighted(m, scaled_entries).unwrap(),
            )
            .unwrap();
            let (tb, ts) = (PtaTournament::build(&base), PtaTournament::build(&scaled));
            for k in 0..m as u32 {
                for l in 0..m as u32 {
                    assert_eq!(tb.beats(JobId(k), JobId(l)), ts.beats(JobId(k), JobId(l)));
                }
            }
            assert_eq!(pta_copeland(&base), pta_copeland(&scaled));
            assert_eq!(
                pta_iterative_minimax(&base),
                pta_iterative_minimax(&scaled)
            );
        }
    }
}
