//! Exact sum-objective solvers over subsets of jobs.
//!
//! Both solvers share one dynamic program: `g(mask)` is the cheapest cost
//! attributable to the jobs in `mask` when they run as the final `|mask|`
//! jobs of the schedule. Peeling the job that runs first among them gives
//! `g(mask) = min_j step(j, mask) + g(mask without j)`, where `step` only
//! ever looks at which jobs are in `mask`, not their order. Costs that are
//! sums over agents of per-job terms (delay costs, displacement) and the
//! pair inversion count both fit this shape.

use std::time::Instant;

use super::{finish, Method, SolveReport};
use crate::costs::DelayIndex;
use crate::error::{Error, Result};
use crate::model::{CostKind, CostSpec, Instance, JobId};

/// Largest job count for the subset solvers; 2^24 states is the limit of
/// what fits comfortably in memory.
pub const MAX_DP_JOBS: usize = 24;

/// Runs the subset recurrence and rebuilds the schedule front to back,
/// always taking the lowest job id that still reaches the optimum, so the
/// result is the lexicographically smallest optimal schedule.
fn subset_dp<F: Fn(usize, usize) -> i64>(m: usize, step: F) -> (i64, Vec<JobId>) {
    let full = (1usize << m) - 1;
    let mut g = vec![0i64; full + 1];
    for mask in 1..=full {
        let mut best = i64::MAX;
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let candidate = step(j, mask) + g[mask ^ (1 << j)];
            if candidate < best {
                best = candidate;
            }
        }
        g[mask] = best;
    }
    let mut order = Vec::with_capacity(m);
    let mut mask = full;
    while mask != 0 {
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if step(j, mask) + g[mask ^ (1 << j)] == g[mask] {
                order.push(JobId(j as u32));
                mask ^= 1 << j;
                break;
            }
        }
    }
    debug_assert_eq!(order.len(), m, "every state must have a witness");
    (g[full], order)
}

/// Minimizes the summed cost for any per-job kind: the six delay costs or
/// slot displacement. Runs in `O(2^m m)` time and memory.
pub fn solve_sum_dp(instance: &Instance, kind: CostKind) -> Result<SolveReport> {
    let started = Instant::now();
    if kind == CostKind::Kendall {
        return Err(Error::Unsupported(
            "pair inversions are order-coupled, use the kemeny solver".into(),
        ));
    }
    let m = instance.m();
    if m > MAX_DP_JOBS {
        return Err(Error::Capacity(format!(
            "subset solver handles at most {MAX_DP_JOBS} jobs, this instance has {m}"
        )));
    }
    let index = DelayIndex::build(instance, kind)?;
    let (value, order) = if kind == CostKind::Spearman {
        // The job peeled from `mask` occupies slot m - |mask|.
        subset_dp(m, |j, mask| {
            index.job_cost(j, (m - mask.count_ones() as usize) as i64)
        })
    } else {
        let times: Vec<i64> = (0..m)
            .map(|j| instance.processing_time(JobId(j as u32)) as i64)
            .collect();
        let total: i64 = times.iter().sum();
        // Processing time of each subset, built incrementally.
        let mut subset_time = vec![0i64; 1 << m];
        for mask in 1..1usize << m {
            let low = mask.trailing_zeros() as usize;
            subset_time[mask] = subset_time[mask & (mask - 1)] + times[low];
        }
        subset_dp(m, |j, mask| {
            let elapsed = total - subset_time[mask];
            index.job_cost(j, elapsed + times[j])
        })
    };
    finish(
        instance,
        CostSpec::sum(kind),
        order,
        Some(value as i128),
        Method::SubsetDp,
        1 << m,
        started,
    )
}

/// Minimizes the summed pair inversion count (the weighted Kemeny order).
///
/// Placing job j first among the jobs in `mask` flips exactly the pairs
/// (k, j) with k still in `mask` that an agent wanted the other way round,
/// so the step cost is a subset sum over the mask. Splitting the mask into
/// halves turns that sum into two table lookups.
pub fn solve_kemeny_dp(instance: &Instance) -> Result<SolveReport> {
    let started = Instant::now();
    let m = instance.m();
    if m > MAX_DP_JOBS {
        return Err(Error::Capacity(format!(
            "kemeny solver handles at most {MAX_DP_JOBS} jobs, this instance has {m}"
        )));
    }
    // before[k][j] = total weight of agents running k ahead of j.
    let mut before = vec![vec![0i64; m]; m];
    for entry in instance.profile().entries() {
        let w = entry.weight as i64;
        for a in 0..m {
            for b in 0..m {
                if entry
                    .schedule
                    .precedes(JobId(a as u32), JobId(b as u32))
                    .expect("profile schedules cover every job")
                {
                    before[a][b] += w;
                }
            }
        }
    }
    let lo_bits = m / 2;
    let lo_mask = (1usize << lo_bits) - 1;
    let build = |j: usize, base: usize, width: usize| {
        let mut table = vec![0i64; 1 << width];
        for s in 1..1usize << width {
            let low = s.trailing_zeros() as usize;
            table[s] = table[s & (s - 1)] + before[base + low][j];
        }
        table
    };
    let tbl_lo: Vec<Vec<i64>> = (0..m).map(|j| build(j, 0, lo_bits)).collect();
    let tbl_hi: Vec<Vec<i64>> = (0..m).map(|j| build(j, lo_bits, m - lo_bits)).collect();
    let (value, order) = subset_dp(m, |j, mask| {
        tbl_lo[j][mask & lo_mask] + tbl_hi[j][mask >> lo_bits]
    });
    finish(
        instance,
        CostSpec::sum(CostKind::Kendall),
        order,
        Some(value as i128),
        Method::KemenyDp,
        1 << m,
        started,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PreferenceProfile, Schedule};
    use crate::rules::cost::brute_force;

    fn example_instance() -> Instance {
        let sigma_a = Schedule::from_indices(&[0, 2, 1]).unwrap();
        let sigma_b = Schedule::from_indices(&[1, 0, 2]).unwrap();
        let profile = PreferenceProfile::from_schedules(3, vec![sigma_a, sigma_b]).unwrap();
        Instance::from_times(&[20, 5, 1], profile).unwrap()
    }

    #[test]
    fn sum_tardiness_on_example() {
        let report = solve_sum_dp(&example_instance(), CostKind::Tardiness).unwrap();
        assert_eq!(report.objective, 7);
        assert_eq!(report.schedule.order(), &[JobId(1), JobId(2), JobId(0)]);
        assert_eq!(report.method, Method::SubsetDp);
        assert_eq!(report.nodes_explored, 8);
    }

    #[test]
    fn kemeny_on_example() {
        let report = solve_kemeny_dp(&example_instance()).unwrap();
        assert_eq!(report.objective, 2);
        assert_eq!(report.schedule.order(), &[JobId(0), JobId(1), JobId(2)]);
        assert_eq!(report.method, Method::KemenyDp);
    }

    fn random_instance(rng: &mut crate::rng::Rng, max_m: usize) -> Instance {
        let m = 1 + rng.next_below(max_m as u64) as usize;
        let times: Vec<u64> = (0..m).map(|_| 1 + rng.next_below(10)).collect();
        let entries: Vec<(Schedule, u64)> = (0..1 + rng.next_below(4))
            .map(|_| {
                let mut ids: Vec<u32> = (0..m as u32).collect();
                rng.shuffle(&mut ids);
                (
                    Schedule::from_indices(&ids).unwrap(),
                    1 + rng.next_below(5),
                )
            })
            .collect();
        let profile = PreferenceProfile::from_weighted(m, entries).unwrap();
        Instance::from_times(&times, profile).unwrap()
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = crate::rng::Rng::new(99);
        let kinds = [
            CostKind::Tardiness,
            CostKind::Late,
            CostKind::Lateness,
            CostKind::Earliness,
            CostKind::Deviation,
            CostKind::SquaredDeviation,
            CostKind::Spearman,
        ];
        for _ in 0..40 {
            let instance = random_instance(&mut rng, 6);
            for kind in kinds {
                let fast = solve_sum_dp(&instance, kind).unwrap();
                let slow = brute_force(&instance, CostSpec::sum(kind)).unwrap();
                assert_eq!(fast.objective, slow.objective, "{kind}");
                assert_eq!(fast.schedule, slow.schedule, "{kind}");
            }
            let fast = solve_kemeny_dp(&instance).unwrap();
            let slow = brute_force(&instance, CostSpec::sum(CostKind::Kendall)).unwrap();
            assert_eq!(fast.objective, slow.objective);
            assert_eq!(fast.schedule, slow.schedule);
        }
    }

    #[test]
    fn rejects_kendall_and_oversize() {
        let instance = example_instance();
        assert!(matches!(
            solve_sum_dp(&instance, CostKind::Kendall),
            Err(Error::Unsupported(_))
        ));
        let big = Instance::from_times(
            &[1; 25],
            PreferenceProfile::from_schedules(
                25,
                vec![Schedule::from_indices(&(0..25).collect::<Vec<_>>()).unwrap()],
            )
            .unwrap(),
        )
        .unwrap();
        assert!(matches!(
            solve_sum_dp(&big, CostKind::Tardiness),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(solve_kemeny_dp(&big), Err(Error::Capacity(_))));
    }
}
