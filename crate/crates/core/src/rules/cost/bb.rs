//! Branch and bound for max and p-norm aggregations.
//!
//! These objectives do not decompose over schedule suffixes the way sums
//! do, so the solver walks the prefix tree of schedules instead. Each node
//! carries the exact cost every agent has accrued on the placed prefix,
//! plus an optimistic bound on the rest: the remaining completion times
//! are bounded below by running the shortest remaining jobs first, and
//! matching those bounds to each agent's sorted preferred times in order
//! is the cheapest pairing for costs that grow with lateness (a standard
//! exchange argument), so the resulting value never overshoots.
//!
//! The search runs twice. The first pass only establishes the optimal
//! value, pruning anything that cannot strictly improve the incumbent
//! (seeded by the sum-optimal schedule plus pairwise swaps). The second
//! pass descends in ascending job id order, keeps everything that can
//! still tie the optimum, and stops at the first optimal schedule, which
//! by construction is the lexicographically smallest one. Splitting the
//! phases avoids enumerating the often huge set of tied optima.

use std::time::Instant;

use super::{finish, Method, SolveReport};
use crate::error::{Error, Result};
use crate::model::{Aggregation, CostKind, CostSpec, Instance, JobId};

/// Largest job count for the branch and bound solver.
pub const MAX_BB_JOBS: usize = 20;

/// Immutable search tables.
struct Ctx {
    kind: CostKind,
    /// None is max aggregation, Some(p) the p-norm compared by p-th power.
    exponent: Option<u32>,
    times: Vec<i64>,
    weights: Vec<i64>,
    /// Preferred completion time (delay costs) or slot (displacement) per
    /// entry and job. Empty for pair inversions.
    pref: Vec<Vec<i64>>,
    /// For pair inversions: per entry and job j, the set of jobs the agent
    /// runs before j.
    want_first: Vec<Vec<u32>>,
    /// Job ids ascending by processing time, for completion lower bounds.
    by_time: Vec<u32>,
    /// Per entry, job ids ascending by preferred value, for the matching
    /// bound. Empty for pair inversions.
    by_pref: Vec<Vec<u32>>,
}

struct State {
    acc: Vec<i64>,
    order: Vec<u32>,
    best_value: i128,
    best_order: Vec<u32>,
    nodes: u64,
    /// Completion lower bounds of the unplaced jobs, reused per candidate.
    lb: Vec<i64>,
    /// Per-depth candidate buffers for the value phase.
    cand: Vec<Vec<(i128, u32)>>,
    /// Entry that pruned most recently; checked first under max.
    hot: usize,
}

/// Exact cost entry `e` pays for job `j` placed at `depth` finishing at
/// `t_child`, with `rest` still unscheduled.
fn step_cost(ctx: &Ctx, e: usize, j: usize, depth: usize, t_child: i64, rest: u32) -> i64 {
    match ctx.kind {
        CostKind::Kendall => (ctx.want_first[e][j] & rest).count_ones() as i64,
        CostKind::Spearman => (depth as i64 - ctx.pref[e][j]).abs(),
        _ => {
            let diff = t_child - ctx.pref[e][j];
            match ctx.kind {
                CostKind::Tardiness => diff.max(0),
                CostKind::Late => i64::from(diff > 0),
                CostKind::Earliness => (-diff).max(0),
                CostKind::Deviation => diff.abs(),
                CostKind::SquaredDeviation => diff * diff,
                _ => unreachable!("lateness never reaches the tree"),
            }
        }
    }
}

/// Fills `lb` with lower bounds for the completion values the jobs in
/// `rest` will receive, ascending: slots are known exactly, completion
/// times are bounded by running the shortest remaining jobs first.
fn completion_lower_bounds(ctx: &Ctx, rest: u32, t_child: i64, next_slot: i64, lb: &mut Vec<i64>) {
    lb.clear();
    if ctx.kind == CostKind::Spearman {
        for offset in 0..rest.count_ones() as i64 {
            lb.push(next_slot + offset);
        }
    } else {
        let mut clock = t_child;
        for &j in &ctx.by_time {
            if rest & (1 << j) != 0 {
                clock += ctx.times[j as usize];
                lb.push(clock);
            }
        }
    }
}

/// Lower bound on what entry `e` must still pay for the jobs in `rest`.
///
/// Pairing the i-th smallest completion bound with the i-th smallest
/// preferred value minimizes sums of max(0, c - d) and |c - d| terms, and
/// true completions only exceed the bounds, which cannot help any cost
/// that grows with lateness. Earliness can always be driven to zero in
/// the bound's optimistic world; pair inversions get no bound; the late
/// job count does not survive the sorting argument, so it only uses each
/// job's own earliest finish.
fn entry_future(ctx: &Ctx, e: usize, rest: u32, t_child: i64, lb: &[i64]) -> i64 {
    match ctx.kind {
        CostKind::Kendall | CostKind::Earliness => 0,
        CostKind::Late => {
            let pref = &ctx.pref[e];
            let mut bound = 0i64;
            let mut bits = rest;
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                bound += i64::from(t_child + ctx.times[k] > pref[k]);
            }
            bound
        }
        _ => {
            let pref = &ctx.pref[e];
            let mut bound = 0i64;
            let mut rank = 0usize;
            for &k in &ctx.by_pref[e] {
                if rest & (1 << k) == 0 {
                    continue;
                }
                let diff = lb[rank] - pref[k as usize];
                rank += 1;
                bound += match ctx.kind {
                    // Slots are exact, so the full distance counts.
                    CostKind::Spearman => diff.abs(),
                    CostKind::SquaredDeviation => {
                        let d = diff.max(0);
                        d * d
                    }
                    _ => diff.max(0),
                };
            }
            bound
        }
    }
}

fn power(base: i128, p: u32) -> i128 {
    base.checked_pow(p)
        .expect("the preflight check bounds every power")
}

/// Aggregated value of a full schedule from the per-entry totals.
fn total_value(ctx: &Ctx, acc: &[i64]) -> i128 {
    match ctx.exponent {
        None => acc.iter().map(|&c| c as i128).max().unwrap_or(0),
        Some(p) => acc
            .iter()
            .zip(&ctx.weights)
            .map(|(&c, &w)| power(c as i128, p) * w as i128)
            .sum(),
    }
}

fn eval_order(ctx: &Ctx, order: &[u32]) -> i128 {
    let mut acc = vec![0i64; ctx.weights.len()];
    let mut elapsed = 0i64;
    let mut rest: u32 = order.iter().map(|&j| 1 << j).sum();
    for (depth, &j) in order.iter().enumerate() {
        let t_child = elapsed + ctx.times[j as usize];
        rest ^= 1 << j;
        for (e, a) in acc.iter_mut().enumerate() {
            *a += step_cost(ctx, e, j as usize, depth, t_child, rest);
        }
        elapsed = t_child;
    }
    total_value(ctx, &acc)
}

/// First-improvement pairwise swaps until no swap helps.
fn local_search(ctx: &Ctx, order: &mut [u32]) -> i128 {
    let mut value = eval_order(ctx, order);
    loop {
        let mut improved = false;
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                order.swap(i, j);
                let swapped = eval_order(ctx, order);
                if swapped < value {
                    value = swapped;
                    improved = true;
                } else {
                    order.swap(i, j);
                }
            }
        }
        if !improved {
            return value;
        }
    }
}

/// Bound for placing `j` next, or None once it exceeds `limit`.
fn child_bound(
    ctx: &Ctx,
    st: &mut State,
    j: usize,
    depth: usize,
    t_child: i64,
    rest: u32,
    limit: i128,
) -> Option<i128> {
    let next_slot = depth as i64 + 1;
    let needs_lb = !matches!(
        ctx.kind,
        CostKind::Kendall | CostKind::Earliness | CostKind::Late
    );
    if needs_lb {
        let mut lb = std::mem::take(&mut st.lb);
        completion_lower_bounds(ctx, rest, t_child, next_slot, &mut lb);
        st.lb = lb;
    }
    let entries = ctx.weights.len();
    match ctx.exponent {
        None => {
            let mut worst: i128 = 0;
            for scan in 0..entries {
                // The entry that pruned last time tends to prune again.
                let e = if scan == 0 {
                    st.hot
                } else if scan <= st.hot {
                    scan - 1
                } else {
                    scan
                };
                let inc = step_cost(ctx, e, j, depth, t_child, rest);
                let future = entry_future(ctx, e, rest, t_child, &st.lb);
                let entry_bound = (st.acc[e] + inc + future) as i128;
                if entry_bound > worst {
                    worst = entry_bound;
                    if worst > limit {
                        st.hot = e;
                        return None;
                    }
                }
            }
            Some(worst)
        }
        Some(p) => {
            let mut bound: i128 = 0;
            for e in 0..entries {
                let inc = step_cost(ctx, e, j, depth, t_child, rest);
                let future = entry_future(ctx, e, rest, t_child, &st.lb);
                let entry_low = (st.acc[e] + inc + future) as i128;
                bound += power(entry_low, p) * ctx.weights[e] as i128;
                if bound > limit {
                    return None;
                }
            }
            Some(bound)
        }
    }
}

fn apply_step(ctx: &Ctx, st: &mut State, j: usize, depth: usize, t_child: i64, rest: u32) {
    for e in 0..ctx.weights.len() {
        st.acc[e] += step_cost(ctx, e, j, depth, t_child, rest);
    }
    st.order.push(j as u32);
}

fn revert_step(ctx: &Ctx, st: &mut State, j: usize, depth: usize, t_child: i64, rest: u32) {
    st.order.pop();
    for e in 0..ctx.weights.len() {
        st.acc[e] -= step_cost(ctx, e, j, depth, t_child, rest);
    }
}

/// Value phase: shrink `best_value` to the optimum. Children are visited
/// cheapest bound first and only descended when they can strictly improve.
fn dfs_value(ctx: &Ctx, st: &mut State, depth: usize, elapsed: i64, remaining: u32) {
    st.nodes += 1;
    if remaining == 0 {
        let value = total_value(ctx, &st.acc);
        if value < st.best_value {
            st.best_value = value;
        }
        return;
    }
    let mut cand = std::mem::take(&mut st.cand[depth]);
    cand.clear();
    let mut bits = remaining;
    while bits != 0 {
        let j = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let t_child = elapsed + ctx.times[j];
        if let Some(bound) =
            child_bound(ctx, st, j, depth, t_child, remaining ^ (1 << j), st.best_value - 1)
        {
            cand.push((bound, j as u32));
        }
    }
    cand.sort_unstable();
    for &(bound, j) in cand.iter() {
        // The incumbent may have improved since the bound was computed.
        if bound >= st.best_value {
            break;
        }
        let j = j as usize;
        let rest = remaining ^ (1 << j);
        let t_child = elapsed + ctx.times[j];
        apply_step(ctx, st, j, depth, t_child, rest);
        dfs_value(ctx, st, depth + 1, t_child, rest);
        revert_step(ctx, st, j, depth, t_child, rest);
    }
    st.cand[depth] = cand;
}

/// Tie phase: visit children in ascending job id order, keep anything that
/// can still reach `best_value`, and stop at the first schedule that does.
/// That schedule is the lexicographically smallest optimum.
fn dfs_lex(ctx: &Ctx, st: &mut State, depth: usize, elapsed: i64, remaining: u32) -> bool {
    st.nodes += 1;
    if remaining == 0 {
        if total_value(ctx, &st.acc) == st.best_value {
            st.best_order.clear();
            st.best_order.extend_from_slice(&st.order);
            return true;
        }
        return false;
    }
    let mut bits = remaining;
    while bits != 0 {
        let j = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let rest = remaining ^ (1 << j);
        let t_child = elapsed + ctx.times[j];
        if child_bound(ctx, st, j, depth, t_child, rest, st.best_value).is_none() {
            continue;
        }
        apply_step(ctx, st, j, depth, t_child, rest);
        let found = dfs_lex(ctx, st, depth + 1, t_child, rest);
        revert_step(ctx, st, j, depth, t_child, rest);
        if found {
            return true;
        }
    }
    false
}

/// Minimizes a max or p-norm aggregated cost exactly, any kind except
/// lateness (whose negative values make those aggregations meaningless).
pub fn solve_minmax_bb(instance: &Instance, spec: CostSpec) -> Result<SolveReport> {
    let started = Instant::now();
    let spec = CostSpec::new(spec.kind, spec.agg)?;
    let exponent = match spec.agg {
        Aggregation::Sum => {
            return Err(Error::Unsupported(
                "sum objectives have dedicated solvers, use those".into(),
            ))
        }
        Aggregation::Max => None,
        Aggregation::Lp(p) => Some(p),
    };
    let m = instance.m();
    if m > MAX_BB_JOBS {
        return Err(Error::Capacity(format!(
            "branch and bound handles at most {MAX_BB_JOBS} jobs, this instance has {m}"
        )));
    }
    let entries = instance.profile().entries();
    let times: Vec<i64> = (0..m)
        .map(|j| instance.processing_time(JobId(j as u32)) as i64)
        .collect();
    let total: i64 = times.iter().sum();
    let (pref, want_first) = match spec.kind {
        CostKind::Kendall => {
            let masks = entries
                .iter()
                .map(|entry| {
                    (0..m)
                        .map(|j| {
                            let mut mask = 0u32;
                            for k in 0..m {
                                if entry
                                    .schedule
                                    .precedes(JobId(k as u32), JobId(j as u32))
                                    .expect("profile schedules cover every job")
                                {
                                    mask |= 1 << k;
                                }
                            }
                            mask
                        })
                        .collect()
                })
                .collect();
            (Vec::new(), masks)
        }
        CostKind::Spearman => (
            entries
                .iter()
                .map(|e| {
                    (0..m as u32)
                        .map(|j| {
                            e.schedule
                                .position(JobId(j))
                                .expect("entry schedules cover every job")
                                as i64
                        })
                        .collect()
                })
                .collect(),
            Vec::new(),
        ),
        _ => (
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
            Vec::new(),
        ),
    };
    let mut by_time: Vec<u32> = (0..m as u32).collect();
    by_time.sort_by_key(|&j| times[j as usize]);
    let by_pref: Vec<Vec<u32>> = pref
        .iter()
        .map(|row: &Vec<i64>| {
            let mut ids: Vec<u32> = (0..m as u32).collect();
            ids.sort_by_key(|&j| row[j as usize]);
            ids
        })
        .collect();
    let ctx = Ctx {
        kind: spec.kind,
        exponent,
        times,
        weights: entries.iter().map(|e| e.weight as i64).collect(),
        pref,
        want_first,
        by_time,
        by_pref,
    };
    // Make sure no power computed during the search can overflow i128.
    if let Some(p) = exponent {
        let worst: i128 = match spec.kind {
            CostKind::Kendall | CostKind::Spearman => (m as i128) * (m as i128),
            CostKind::Late => m as i128,
            CostKind::SquaredDeviation => m as i128 * (total as i128) * (total as i128),
            _ => m as i128 * total as i128,
        };
        let total_weight: i128 = ctx.weights.iter().map(|&w| w as i128).sum();
        worst
            .checked_pow(p)
            .and_then(|v| v.checked_mul(total_weight))
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "p-norm exponent {p} overflows on this instance, use a smaller p"
                ))
            })?;
    }
    // Warm start: the sum optimum for the same kind, then swap descent.
    let warm = match spec.kind {
        CostKind::Kendall => super::solve_kemeny_dp(instance)?,
        _ => super::solve_sum_dp(instance, spec.kind)?,
    };
    let mut warm_order: Vec<u32> = warm.schedule.order().iter().map(|j| j.0).collect();
    let warm_value = local_search(&ctx, &mut warm_order);
    let mut st = State {
        acc: vec![0; ctx.weights.len()],
        order: Vec::with_capacity(m),
        best_value: warm_value,
        best_order: warm_order,
        nodes: 0,
        lb: Vec::with_capacity(m),
        cand: vec![Vec::with_capacity(m); m.max(1)],
        hot: 0,
    };
    let full: u32 = ((1u64 << m) - 1) as u32;
    dfs_value(&ctx, &mut st, 0, 0, full);
    let found = dfs_lex(&ctx, &mut st, 0, 0, full);
    debug_assert!(found, "the optimum is always reachable in the tie phase");
    let order = st.best_order.iter().map(|&j| JobId(j)).collect();
    finish(
        instance,
        spec,
        order,
        Some(st.best_value),
        Method::BranchAndBound,
        st.nodes,
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
    fn max_tardiness_on_example() {
        let report = solve_minmax_bb(&example_instance(), CostSpec::max(CostKind::Tardiness))
            .unwrap();
        assert_eq!(report.objective, 6);
        assert_eq!(report.schedule.order(), &[JobId(1), JobId(2), JobId(0)]);
        assert_eq!(report.method, Method::BranchAndBound);
        assert!(report.nodes_explored > 0);
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = crate::rng::Rng::new(4242);
        let kinds = [
            CostKind::Tardiness,
            CostKind::Late,
            CostKind::Earliness,
            CostKind::Deviation,
            CostKind::SquaredDeviation,
            CostKind::Spearman,
            CostKind::Kendall,
        ];
        let aggs = [Aggregation::Max, Aggregation::Lp(2), Aggregation::Lp(3)];
        for trial in 0..15 {
            let m = 1 + rng.next_below(6) as usize;
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
            let instance = Instance::from_times(&times, profile).unwrap();
            for kind in kinds {
                for agg in aggs {
                    let spec = CostSpec::new(kind, agg).unwrap();
                    let fast = solve_minmax_bb(&instance, spec).unwrap();
                    let slow = brute_force(&instance, spec).unwrap();
                    assert_eq!(fast.objective, slow.objective, "trial {trial} {spec}");
                    assert_eq!(fast.schedule, slow.schedule, "trial {trial} {spec}");
                }
            }
        }
    }

    #[test]
    fn stays_fast_on_many_agents() {
        use crate::profiles::{assign_lengths, generate_impartial, LengthSpec};
        let profile = generate_impartial(10, 500, 1001).unwrap();
        let unit = assign_lengths(profile, &LengthSpec::Unit, 0).unwrap();
        let t = std::time::Instant::now();
        let report = solve_minmax_bb(&unit, CostSpec::max(CostKind::Tardiness)).unwrap();
        assert_eq!(report.objective, 24);
        assert!(
            t.elapsed() < std::time::Duration::from_secs(5),
            "500-agent unit instance took {:?}",
            t.elapsed()
        );
    }

    #[test]
    fn rejects_sum_oversize_and_huge_exponent() {
        let instance = example_instance();
        assert!(matches!(
            solve_minmax_bb(&instance, CostSpec::sum(CostKind::Tardiness)),
            Err(Error::Unsupported(_))
        ));
        let big = Instance::from_times(
            &[1; 21],
            PreferenceProfile::from_schedules(
                21,
                vec![Schedule::from_indices(&(0..21).collect::<Vec<_>>()).unwrap()],
            )
            .unwrap(),
        )
        .unwrap();
        assert!(matches!(
            solve_minmax_bb(&big, CostSpec::max(CostKind::Tardiness)),
            Err(Error::Capacity(_))
        ));
        let spec = CostSpec::new(CostKind::SquaredDeviation, Aggregation::Lp(30)).unwrap();
        let wide = Instance::from_times(
            &[1000, 1000, 1000],
            example_instance().profile().clone(),
        )
        .unwrap();
        assert!(matches!(
            solve_minmax_bb(&wide, spec),
            Err(Error::Capacity(_))
        ));
    }
}
