//! Sum objectives with equal job lengths, solved as an assignment problem.
//!
//! With one shared length p, the job finishing s-th always completes at
//! (s + 1) p, so each job's cost depends only on its slot and the objective
//! is a minimum cost perfect matching between jobs and slots.

use std::time::Instant;

use super::{finish, Method, SolveReport};
use crate::costs::DelayIndex;
use crate::error::{Error, Result};
use crate::model::{CostKind, CostSpec, Instance, JobId};

const INF: i64 = i64::MAX / 4;

/// Minimum cost perfect matching on a square matrix via shortest augmenting
/// paths with potentials, O(k^3). Entries may be negative. Returns the
/// matched column of each row and the total cost.
fn hungarian(cost: &[Vec<i64>]) -> (Vec<usize>, i64) {
    let k = cost.len();
    // Index 0 is a sentinel row/column; real indices are 1-based.
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut matched_row = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; k];
    let mut total = 0i64;
    for j in 1..=k {
        assignment[matched_row[j] - 1] = j - 1;
        total += cost[matched_row[j] - 1][j - 1];
    }
    (assignment, total)
}

/// Minimizes a summed per-job cost when all jobs share one length. Works
/// for the delay costs and displacement; pair inversions do not decompose
/// per slot.
pub fn solve_equal_size_assignment(instance: &Instance, kind: CostKind) -> Result<SolveReport> {
    let started = Instant::now();
    if kind == CostKind::Kendall {
        return Err(Error::Unsupported(
            "pair inversions are order-coupled, use the kemeny solver".into(),
        ));
    }
    let p = instance.equal_length().ok_or_else(|| {
        Error::Unsupported("the assignment solver needs all jobs to share one length".into())
    })?;
    let m = instance.m();
    let index = DelayIndex::build(instance, kind)?;
    let cost: Vec<Vec<i64>> = (0..m)
        .map(|j| {
            (0..m)
                .map(|s| {
                    let at = if kind == CostKind::Spearman {
                        s as i64
                    } else {
                        ((s as u64 + 1) * p) as i64
                    };
                    index.job_cost(j, at)
                })
                .collect()
        })
        .collect();
    let (_, best) = hungarian(&cost);
    let mut solves = 1u64;
    // Pin slots front to back with the smallest job id that still reaches
    // the optimum; the result is the lexicographically smallest optimal
    // schedule.
    let mut free: Vec<usize> = (0..m).collect();
    let mut fixed_cost = 0i64;
    let mut order: Vec<JobId> = Vec::with_capacity(m);
    for slot in 0..m {
        let mut chosen = None;
        for (pos, &job) in free.iter().enumerate() {
            let rest: i64 = if free.len() == 1 {
                0
            } else {
                let sub: Vec<Vec<i64>> = free
                    .iter()
                    .filter(|&&other| other != job)
                    .map(|&other| cost[other][slot + 1..m].to_vec())
                    .collect();
                solves += 1;
                hungarian(&sub).1
            };
            if fixed_cost + cost[job][slot] + rest == best {
                chosen = Some(pos);
                break;
            }
        }
        let pos = chosen.expect("an optimal matching extends through every slot");
        let job = free.remove(pos);
        fixed_cost += cost[job][slot];
        order.push(JobId(job as u32));
    }
    finish(
        instance,
        CostSpec::sum(kind),
        order,
        Some(best as i128),
        Method::Assignment,
        solves,
        started,
    )
}
