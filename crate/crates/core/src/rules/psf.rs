//! Positional scoring rules.
//!
//! A job's score from one agent is `h(total processing time of the jobs
//! the agent ranks after it)`, summed over agents; jobs run in descending
//! score order. With unit jobs and the identity transform this is exactly
//! the Borda count. Longer jobs ranked early push more "time after them"
//! into the score, so these rules weight preferences by duration.

use crate::error::{Error, Result};
use crate::model::{Instance, JobId, Schedule};

/// The monotone score transform `h`. It must be strictly increasing over
/// `0..=total processing time`; a custom table is validated against the
/// instance it is used on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoreTransform {
    Identity,
    Square,
    /// `table[x]` is `h(x)`; must cover `0..=total` and strictly increase.
    Table(Vec<i64>),
}

impl ScoreTransform {
    fn validate(&self, total: u64) -> Result<()> {
        if let ScoreTransform::Table(table) = self {
            if table.len() <= total as usize {
                return Err(Error::InvalidSpec(format!(
                    "score table covers 0..={}, instance needs 0..={total}",
                    table.len().saturating_sub(1)
                )));
            }
            if table.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSpec(
                    "score table must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    fn apply(&self, x: u64) -> i64 {
        match self {
            ScoreTransform::Identity => x as i64,
            ScoreTransform::Square => (x * x) as i64,
            ScoreTransform::Table(table) => table[x as usize],
        }
    }
}

/// Weighted score of one job: for each agent, `h` of the total duration
/// of the jobs that agent ranks after `job`.
pub fn h_score(instance: &Instance, job: JobId, transform: &ScoreTransform) -> Result<i64> {
    let total = instance.total_processing();
    transform.validate(total)?;
    if job.index() >= instance.m() {
        return Err(Error::InvalidInstance(format!("unknown job {job}")));
    }
    let mut score = 0i64;
    for entry in instance.profile().entries() {
        // Everything after `job` in sigma is the total minus the prefix
        // ending at `job`, i.e. the total minus its completion time.
        let completions = instance.completion_times(&entry.schedule)?;
        let after = total - completions[job.index()];
        score += entry.weight as i64 * transform.apply(after);
    }
    Ok(score)
}

/// Schedules jobs by descending score; ties go to the shorter job, then
/// to the smaller id.
pub fn psf_rule(instance: &Instance, transform: &ScoreTransform) -> Result<Schedule> {
    let m = instance.m();
    let mut scored: Vec<(i64, u64, u32)> = Vec::with_capacity(m);
    for job in 0..m as u32 {
        let score = h_score(instance, JobId(job), transform)?;
        scored.push((score, instance.processing_time(JobId(job)), job));
    }
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Schedule::new(scored.into_iter().map(|(_, _, id)| JobId(id)).collect(), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PreferenceProfile;
    use crate::rng::Rng;

    fn schedule(order: &[u32]) -> Schedule {
        Schedule::from_indices(order).unwrap()
    }

    /// Two long jobs (length 10) and one short one, 400 agents: 151 rank
    /// each long job first and the short one last, 49 rank the short job
    /// first with each long order. A per-job majority would start with
    /// the short job; duration weighting puts it last.
    fn long_vs_short() -> Instance {
        let weighted = vec![
            (schedule(&[0, 1, 2]), 151),
            (schedule(&[1, 0, 2]), 151),
            (schedule(&[2, 0, 1]), 49),
            (schedule(&[2, 1, 0]), 49),
        ];
        let profile = PreferenceProfile::from_weighted(3, weighted).unwrap();
        Instance::from_times(&[10, 10, 1], profile).unwrap()
    }

    #[test]
    fn duration_outweighs_a_short_majority() {
        let instance = long_vs_short();
        let id = ScoreTransform::Identity;
        assert_eq!(h_score(&instance, JobId(0), &id).unwrap(), 2302);
        assert_eq!(h_score(&instance, JobId(1), &id).unwrap(), 2302);
        assert_eq!(h_score(&instance, JobId(2), &id).unwrap(), 1960);
        let out = psf_rule(&instance, &id).unwrap();
        // The long jobs tie and fall back to id order; the short job,
        // preferred first by only 98 of 400 agents, runs last.
        assert_eq!(out.order(), schedule(&[0, 1, 2]).order());
    }

    #[test]
    fn unit_jobs_with_identity_is_borda() {
        let mut rng = Rng::new(77);
        let m = 5u32;
        let mut schedules = Vec::new();
        for _ in 0..20 {
            let mut order: Vec<u32> = (0..m).collect();
            rng.shuffle(&mut order);
            schedules.push(schedule(&order));
        }
        let profile = PreferenceProfile::from_schedules(m as usize, schedules).unwrap();
        let instance = assign_unit(profile);

        for job in 0..m {
            // Borda: a job in slot k earns m-1-k points from that agent.
            let mut borda = 0i64;
            for entry in instance.profile().entries() {
                let slot = entry.schedule.position(JobId(job)).unwrap() as i64;
                borda += entry.weight as i64 * (m as i64 - 1 - slot);
            }
            assert_eq!(
                h_score(&instance, JobId(job), &ScoreTransform::Identity).unwrap(),
                borda
            );
        }
    }

    fn assign_unit(profile: PreferenceProfile) -> Instance {
        let times = vec![1; profile.m()];
        Instance::from_times(&times, profile).unwrap()
    }

    #[test]
    fn single_agent_schedule_is_reproduced() {
        let sigma = schedule(&[3, 0, 2, 1]);
        let profile = PreferenceProfile::from_schedules(4, vec![sigma.clone()]).unwrap();
        let instance = Instance::from_times(&[4, 1, 3, 2], profile).unwrap();
        for transform in [ScoreTransform::Identity, ScoreTransform::Square] {
            let out = psf_rule(&instance, &transform).unwrap();
            assert_eq!(out.order(), sigma.order(), "{transform:?}");
        }
    }

    #[test]
    fn single_job_scores_h_of_zero_per_agent() {
        let profile = PreferenceProfile::from_schedules(1, vec![schedule(&[0])]).unwrap();
        let instance = Instance::from_times(&[7], profile).unwrap();
        let table = ScoreTransform::Table((5..=12).collect());
        // One agent, nothing ever runs after the only job.
        assert_eq!(h_score(&instance, JobId(0), &table).unwrap(), 5);
        assert_eq!(psf_rule(&instance, &table).unwrap().order(), &[JobId(0)]);
    }

    #[test]
    fn table_validation() {
        let instance = long_vs_short();
        let too_short = ScoreTransform::Table(vec![0, 1, 2]);
        assert!(h_score(&instance, JobId(0), &too_short).is_err());
        let not_increasing = ScoreTransform::Table(vec![0; 30]);
        assert!(h_score(&instance, JobId(0), &not_increasing).is_err());
        let ok = ScoreTransform::Table((0..=21).map(|x| x * 3 + 1).collect());
        assert!(h_score(&instance, JobId(0), &ok).is_ok());
        assert!(h_score(&instance, JobId(9), &ok).is_err());
    }

    #[test]
    fn square_can_reorder_relative_to_identity() {
        // Job 0 earns steady small tails (2,2,0), job 1 one big tail
        // (0,0,4). Identity ties them at 4 and the shorter job 0 wins;
        // squaring favors the polarized job 1 (16 > 8).
        let weighted = vec![
            (schedule(&[2, 0, 1]), 2),
            (schedule(&[1, 2, 0]), 1),
        ];
        let profile = PreferenceProfile::from_weighted(3, weighted).unwrap();
        let instance = Instance::from_times(&[1, 2, 3], profile).unwrap();
        let by_id = psf_rule(&instance, &ScoreTransform::Identity).unwrap();
        let by_sq = psf_rule(&instance, &ScoreTransform::Square).unwrap();
        assert_eq!(by_id.order(), schedule(&[2, 0, 1]).order());
        assert_eq!(by_sq.order(), schedule(&[2, 1, 0]).order());
    }
}
