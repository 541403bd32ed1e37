//! Cost-based rules: pick the schedule minimizing an aggregated
//! disagreement cost over the profile.
//!
//! Every solver here is exact and returns the lexicographically smallest
//! optimal schedule (by job id at the earliest differing slot), so results
//! are reproducible across solvers and runs. Capability overview:
//!
//! | solver                       | costs                     | aggregation | size    |
//! |------------------------------|---------------------------|-------------|---------|
//! | [`brute_force`]              | all                       | all         | m <= 10 |
//! | [`solve_sum_dp`]             | delay costs, displacement | sum         | m <= 24 |
//! | [`solve_kemeny_dp`]          | pair inversions           | sum         | m <= 24 |
//! | [`solve_equal_size_assignment`] | delay costs, displacement | sum      | equal lengths |
//! | [`solve_sum_lateness`]       | lateness                  | sum         | any     |
//! | [`solve_minmax_bb`]          | all but lateness          | max, lp     | m <= 20 |
//!
//! [`solve`] dispatches to the cheapest applicable solver and is what the
//! command line uses by default. [`export_ilp`] writes a 0/1 program for
//! external solvers instead of solving.

mod assignment;
mod bb;
mod brute;
mod dp;
mod ilp;

pub use assignment::solve_equal_size_assignment;
pub use bb::solve_minmax_bb;
pub use brute::brute_force;
pub use dp::{solve_kemeny_dp, solve_sum_dp};
pub use ilp::export_ilp;

use std::time::{Duration, Instant};

use crate::costs::aggregate;
use crate::error::Result;
use crate::model::{Aggregation, CostKind, CostSpec, Instance, JobId, Schedule};

/// Which algorithm produced a [`SolveReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BruteForce,
    SubsetDp,
    KemenyDp,
    Assignment,
    ShortestFirst,
    BranchAndBound,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::BruteForce => "brute-force",
            Method::SubsetDp => "subset-dp",
            Method::KemenyDp => "kemeny-dp",
            Method::Assignment => "assignment",
            Method::ShortestFirst => "shortest-first",
            Method::BranchAndBound => "branch-and-bound",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of an exact solve: the optimal schedule plus bookkeeping.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub schedule: Schedule,
    /// Exact objective value of `schedule` under the requested spec.
    pub objective: i128,
    pub method: Method,
    /// Search nodes visited (permutations, subsets, or tree nodes).
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

/// Solves with the cheapest exact method that applies to the spec and size.
pub fn solve(instance: &Instance, spec: CostSpec) -> Result<SolveReport> {
    let spec = CostSpec::new(spec.kind, spec.agg)?;
    match spec.agg {
        Aggregation::Sum => match spec.kind {
            CostKind::Lateness => solve_sum_lateness(instance),
            CostKind::Kendall => solve_kemeny_dp(instance),
            _ if instance.equal_length().is_some() => {
                solve_equal_size_assignment(instance, spec.kind)
            }
            _ => solve_sum_dp(instance, spec.kind),
        },
        Aggregation::Max | Aggregation::Lp(_) => solve_minmax_bb(instance, spec),
    }
}

/// Sum of lateness is minimized by running jobs shortest first, regardless
/// of the profile: the preferred completion times only shift the objective
/// by a constant, leaving the classic mean completion time problem.
pub fn solve_sum_lateness(instance: &Instance) -> Result<SolveReport> {
    let started = Instant::now();
    let mut order: Vec<JobId> = instance.jobs().iter().map(|j| j.id).collect();
    order.sort_by_key(|&j| (instance.processing_time(j), j.index()));
    finish(
        instance,
        CostSpec::sum(CostKind::Lateness),
        order,
        None,
        Method::ShortestFirst,
        instance.m() as u64,
        started,
    )
}

/// Common tail for all solvers: apply the unanimity repair where it is
/// cost-free, recompute the objective from scratch, and cross-check the
/// value the search claimed.
pub(crate) fn finish(
    instance: &Instance,
    spec: CostSpec,
    mut order: Vec<JobId>,
    claimed: Option<i128>,
    method: Method,
    nodes_explored: u64,
    started: Instant,
) -> Result<SolveReport> {
    if spec.kind == CostKind::Tardiness
        && spec.agg == Aggregation::Sum
        && instance.equal_length().is_some()
    {
        pareto_swap_pass(instance, &mut order);
    }
    let schedule = Schedule::new(order, instance.m())?;
    let objective = aggregate(instance, spec, &schedule)?;
    if let Some(claimed) = claimed {
        assert_eq!(
            objective, claimed,
            "{method} claimed {claimed} for {spec} but the schedule costs {objective}"
        );
    }
    Ok(SolveReport {
        schedule,
        objective,
        method,
        nodes_explored,
        elapsed: started.elapsed(),
    })
}

/// Repeatedly swaps pairs that every agent orders the other way.
///
/// With equal job lengths and total tardiness this never increases the
/// objective: the swapped jobs trade completion times, and any weak gain
/// for the majority side is matched or beaten because all agents agree on
/// the pair. Each swap strictly reduces the number of violated unanimous
/// pairs (the swapped pair is fixed, and any pair it disturbs was itself
/// violated before), so the loop ends after at most m(m-1)/2 swaps.
pub(crate) fn pareto_swap_pass(instance: &Instance, order: &mut [JobId]) {
    let unanimous = instance.profile().unanimous_pairs();
    loop {
        let mut swapped = false;
        'scan: for i in 0..order.len() {
            for j in i + 1..order.len() {
                if unanimous[order[j].index()][order[i].index()] {
                    order.swap(i, j);
                    swapped = true;
                    break 'scan;
                }
            }
        }
        if !swapped {
            return;
        }
    }
}
