//! Seeded batch experiments.
//!
//! A spec names a profile culture, a job/agent scale and a rule list; the
//! runner solves every generated instance under every rule and reports
//! per-row objectives, majority paradox rates, tardiness Gini indices and
//! how far jobs move relative to a unit-length twin of the same profile.
//! Everything derives from the spec seed, so outputs are byte-identical
//! across runs and worker counts; instances are solved on the current
//! rayon pool.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::axioms::paradox_rate;
use crate::costs::{self, CostVector};
use crate::error::{Error, Result};
use crate::model::{CostKind, CostSpec, Instance, JobId, Rational, Schedule};
use crate::profiles::{assign_lengths, generate_impartial, generate_mallows, LengthSpec};
use crate::rng::derive_seed;
use crate::rules::Rule;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    /// Every agent an independent uniform random order.
    Impartial,
    /// Orders concentrated around a hidden reference; `phi` in (0, 1],
    /// smaller is more concentrated, 1 is the impartial culture.
    Mallows { phi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: ProfileSource,
    pub m: usize,
    pub n: u64,
    /// Lengths are drawn uniformly from 1..=p_max; 1 keeps all jobs unit.
    pub p_max: u64,
    pub instances: u64,
    pub rules: Vec<Rule>,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn default_rules() -> Vec<Rule> {
        vec![
            Rule::Cost(CostSpec::sum(CostKind::Tardiness)),
            Rule::Cost(CostSpec::max(CostKind::Tardiness)),
            Rule::PtaCopeland,
        ]
    }

    /// The stated scale with every other knob at its default.
    pub fn defaults(m: usize, n: u64) -> Self {
        ExperimentSpec {
            source: ProfileSource::Impartial,
            m,
            n,
            p_max: 10,
            instances: 100,
            rules: Self::default_rules(),
            seed: 0,
        }
    }

    /// Parses the flat `key=value` format (one pair per line, `#` starts a
    /// comment). `m` and `n` are required; everything else defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = None;
        let mut n = None;
        let mut spec = Self::defaults(0, 0);
        let mut phi: Option<f64> = None;
        let mut model_mallows = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected key=value, got `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Parse {
                line,
                message: format!("{what} `{value}`"),
            };
            match key {
                "model" => match value {
                    "impartial" => model_mallows = false,
                    "mallows" => model_mallows = true,
                    _ => {
                        return Err(bad("unknown model, expected impartial or mallows:"));
                    }
                },
                "m" => m = Some(value.parse().map_err(|_| bad("invalid job count"))?),
                "n" => n = Some(value.parse().map_err(|_| bad("invalid agent count"))?),
                "phi" => phi = Some(value.parse().map_err(|_| bad("invalid phi"))?),
                "p_max" => {
                    spec.p_max = value.parse().map_err(|_| bad("invalid p_max"))?;
                }
                "instances" => {
                    spec.instances = value.parse().map_err(|_| bad("invalid instance count"))?;
                }
                "seed" => spec.seed = value.parse().map_err(|_| bad("invalid seed"))?,
                "rules" => {
                    spec.rules = value
                        .split(',')
                        .map(|token| {
                            Rule::parse(token.trim()).map_err(|e| Error::Parse {
                                line,
                                message: e.to_string(),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                }
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key `{key}`"),
                    });
                }
            }
        }
        spec.m = m.ok_or_else(|| Error::InvalidSpec("experiment spec must set m=<jobs>".into()))?;
        spec.n = n.ok_or_else(|| Error::InvalidSpec("experiment spec must set n=<agents>".into()))?;
        spec.source = if model_mallows {
            ProfileSource::Mallows {
                phi: phi.unwrap_or(0.8),
            }
        } else {
            ProfileSource::Impartial
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidSpec("experiments need at least two jobs".into()));
        }
        if self.instances == 0 {
            return Err(Error::InvalidSpec("instances must be at least 1".into()));
        }
        if self.p_max == 0 {
            return Err(Error::InvalidSpec("p_max must be at least 1".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::InvalidSpec("at least one rule is required".into()));
        }
        if let ProfileSource::Mallows { phi } = self.source {
            if !(phi > 0.0 && phi <= 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "phi must be in (0, 1], got {phi}"
                )));
            }
        }
        Ok(())
    }

    /// The effective configuration in the same format `parse` reads, with
    /// every default spelled out.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        match self.source {
            ProfileSource::Impartial => out.push_str("model=impartial\n"),
            ProfileSource::Mallows { phi } => {
                out.push_str("model=mallows\n");
                out.push_str(&format!("phi={phi}\n"));
            }
        }
        out.push_str(&format!("m={}\n", self.m));
        out.push_str(&format!("n={}\n", self.n));
        out.push_str(&format!("p_max={}\n", self.p_max));
        out.push_str(&format!("instances={}\n", self.instances));
        let rules: Vec<String> = self.rules.iter().map(|r| r.to_string()).collect();
        out.push_str(&format!("rules={}\n", rules.join(",")));
        out.push_str(&format!("seed={}\n", self.seed));
        out
    }
}

/// Standard Gini coefficient of a vector of nonnegative values: the mean
/// absolute difference between pairs over twice the mean, 0 when all
/// values are zero. Exact.
pub fn gini(values: &[i64]) -> Result<Rational> {
    if values.is_empty() {
        return Err(Error::InvalidSpec("gini needs at least one value".into()));
    }
    if let Some(v) = values.iter().find(|&&v| v < 0) {
        return Err(Error::InvalidSpec(format!(
            "gini is defined for nonnegative values, got {v}"
        )));
    }
    let mut sorted: Vec<i64> = values.to_vec();
    sorted.sort_unstable();
    let total: i128 = sorted.iter().map(|&v| v as i128).sum();
    if total == 0 {
        return Ok(Rational::new(0, 1));
    }
    // sum over ordered pairs of |x_i - x_j| = 2 * sum_i (i*x_i - prefix_i)
    let mut pair_sum: i128 = 0;
    let mut prefix: i128 = 0;
    for (i, &v) in sorted.iter().enumerate() {
        pair_sum += i as i128 * v as i128 - prefix;
        prefix += v as i128;
    }
    Ok(Rational::new(pair_sum, sorted.len() as i128 * total))
}

/// One agent value per unit of multiplicity, for distribution statistics.
fn agent_values(vector: &CostVector) -> Vec<i64> {
    let mut values = Vec::with_capacity(vector.n() as usize);
    for &(cost, weight) in &vector.entries {
        values.extend(std::iter::repeat_n(cost, weight as usize));
    }
    values
}

/// Signed position move of every job between the rule's schedule on the
/// instance and on a unit-length twin of the same profile, as
/// (length, delta) pairs in job id order.
fn job_deltas(instance: &Instance, rule: &Rule) -> Result<Vec<(u64, i64)>> {
    let varied = rule.apply(instance)?;
    let unit = assign_lengths(instance.profile().clone(), &LengthSpec::Unit, 0)?;
    let unit_out = rule.apply(&unit)?;
    (0..instance.m())
        .map(|j| {
            let job = JobId(j as u32);
            let delta = varied.position(job)? as i64 - unit_out.position(job)? as i64;
            Ok((instance.processing_time(job), delta))
        })
        .collect()
}

/// Mean position move per distinct job length, ascending. Positive means
/// jobs of that length run later than in the unit-length twin.
pub fn position_change_profile(instance: &Instance, rule: &Rule) -> Result<Vec<(u64, f64)>> {
    let deltas = job_deltas(instance, rule)?;
    let lengths: BTreeSet<u64> = deltas.iter().map(|&(len, _)| len).collect();
    Ok(lengths
        .into_iter()
        .map(|len| {
            let moved: Vec<i64> = deltas
                .iter()
                .filter(|&&(l, _)| l == len)
                .map(|&(_, d)| d)
                .collect();
            let mean = moved.iter().sum::<i64>() as f64 / moved.len() as f64;
            (len, mean)
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub instance: u64,
    pub rule: Rule,
    pub schedule: Schedule,
    /// The schedule rendered with the instance's job labels.
    pub schedule_text: String,
    /// The rule's own objective value, for rules that optimize one.
    pub objective: Option<i128>,
    pub sum_tardiness: i128,
    pub max_tardiness: i128,
    pub paradox_rate: Rational,
    pub gini_tardiness: Rational,
    /// Mean position delta vs the unit twin per length 1..=p_max; None
    /// where the instance has no job of that length.
    pub position_delta: Vec<Option<f64>>,
}

/// Table-style aggregate over all solved instances. Fields are present
/// when the rule list contains what they compare: paradox rates need the
/// respective optimum, ratios compare the Copeland schedule against it,
/// and the Gini delta contrasts the two optima.
#[derive(Debug, Clone, Default)]
pub struct ExperimentSummary {
    pub instances: u64,
    pub paradox_sum_t: Option<f64>,
    pub paradox_max_t: Option<f64>,
    pub ratio_copeland_to_sum_t: Option<f64>,
    pub ratio_copeland_to_max_t: Option<f64>,
    pub delta_gini: Option<f64>,
}

/// Aggregated position moves per (rule, length) over all jobs of all
/// solved instances; `std` is the population standard deviation.
#[derive(Debug, Clone)]
pub struct PositionRow {
    pub rule: Rule,
    pub length: u64,
    pub mean: f64,
    pub std: f64,
    pub jobs: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub spec: ExperimentSpec,
    pub rows: Vec<ExperimentRow>,
    pub summary: ExperimentSummary,
    pub positions: Vec<PositionRow>,
    /// Instances that could not be solved (capacity and the like), with
    /// the reason; they do not fail the batch.
    pub failures: Vec<(u64, String)>,
}

struct InstanceResult {
    rows: Vec<ExperimentRow>,
    /// per rule, per length bucket: (delta sum, delta square sum, jobs)
    deltas: Vec<Vec<(i64, i64, u64)>>,
}

fn rational_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn run_one(spec: &ExperimentSpec, id: u64) -> Result<InstanceResult> {
    let seed = derive_seed(spec.seed, id);
    let profile = match spec.source {
        ProfileSource::Impartial => generate_impartial(spec.m, spec.n, seed)?,
        ProfileSource::Mallows { phi } => generate_mallows(spec.m, spec.n, phi, None, seed)?,
    };
    let unit = assign_lengths(profile.clone(), &LengthSpec::Unit, 0)?;
    let varied = assign_lengths(
        profile,
        &LengthSpec::UniformRandom { p_max: spec.p_max },
        derive_seed(seed, 1),
    )?;
    let mut rows = Vec::with_capacity(spec.rules.len());
    let mut deltas = vec![vec![(0i64, 0i64, 0u64); spec.p_max as usize]; spec.rules.len()];
    for (ri, rule) in spec.rules.iter().enumerate() {
        let schedule = rule.apply(&varied)?;
        let unit_schedule = rule.apply(&unit)?;
        let objective = match rule {
            Rule::Cost(cs) => Some(costs::aggregate(&varied, *cs, &schedule)?),
            _ => None,
        };
        let sum_t = costs::aggregate(&varied, CostSpec::sum(CostKind::Tardiness), &schedule)?;
        let max_t = costs::aggregate(&varied, CostSpec::max(CostKind::Tardiness), &schedule)?;
        let paradox = paradox_rate(&schedule, &varied)?;
        let tardiness = costs::cost_vector(&varied, CostKind::Tardiness, &schedule)?;
        let gini_t = gini(&agent_values(&tardiness))?;
        let mut per_len = vec![(0i64, 0u64); spec.p_max as usize];
        for j in 0..spec.m {
            let job = JobId(j as u32);
            let delta = schedule.position(job)? as i64 - unit_schedule.position(job)? as i64;
            let bucket = (varied.processing_time(job) - 1) as usize;
            per_len[bucket].0 += delta;
            per_len[bucket].1 += 1;
            let cell = &mut deltas[ri][bucket];
            cell.0 += delta;
            cell.1 += delta * delta;
            cell.2 += 1;
        }
        rows.push(ExperimentRow {
            instance: id,
            rule: rule.clone(),
            schedule_text: varied.format_schedule(&schedule),
            schedule,
            objective,
            sum_tardiness: sum_t,
            max_tardiness: max_t,
            paradox_rate: paradox,
            gini_tardiness: gini_t,
            position_delta: per_len
                .iter()
                .map(|&(sum, count)| (count > 0).then(|| sum as f64 / count as f64))
                .collect(),
        });
    }
    Ok(InstanceResult { rows, deltas })
}

fn build_summary(rows: &[ExperimentRow], done: u64) -> ExperimentSummary {
    let sum_rule = Rule::Cost(CostSpec::sum(CostKind::Tardiness));
    let max_rule = Rule::Cost(CostSpec::max(CostKind::Tardiness));
    let ids: BTreeSet<u64> = rows.iter().map(|r| r.instance).collect();
    let mut paradox_sum: Vec<f64> = Vec::new();
    let mut paradox_max: Vec<f64> = Vec::new();
    let mut ratio_sum: Vec<f64> = Vec::new();
    let mut ratio_max: Vec<f64> = Vec::new();
    let mut dgini: Vec<f64> = Vec::new();
    for id in ids {
        let of = |rule: &Rule| rows.iter().find(|r| r.instance == id && r.rule == *rule);
        let here: Vec<&ExperimentRow> = rows.iter().filter(|r| r.instance == id).collect();
        let opt_sum = of(&sum_rule);
        let opt_max = of(&max_rule);
        if let Some(opt) = opt_sum {
            paradox_sum.push(rational_f64(&opt.paradox_rate));
            for row in &here {
                assert!(
                    row.sum_tardiness >= opt.sum_tardiness,
                    "instance {id}: {} beat the exact sum optimum",
                    row.rule
                );
            }
        }
        if let Some(opt) = opt_max {
            paradox_max.push(rational_f64(&opt.paradox_rate));
            for row in &here {
                assert!(
                    row.max_tardiness >= opt.max_tardiness,
                    "instance {id}: {} beat the exact max optimum",
                    row.rule
                );
            }
        }
        if let Some(cop) = of(&Rule::PtaCopeland) {
            if let Some(opt) = opt_sum {
                if opt.sum_tardiness > 0 {
                    ratio_sum.push(cop.sum_tardiness as f64 / opt.sum_tardiness as f64);
                } else if cop.sum_tardiness == 0 {
                    ratio_sum.push(1.0);
                }
            }
            if let Some(opt) = opt_max {
                if opt.max_tardiness > 0 {
                    ratio_max.push(cop.max_tardiness as f64 / opt.max_tardiness as f64);
                } else if cop.max_tardiness == 0 {
                    ratio_max.push(1.0);
                }
            }
        }
        if let (Some(s), Some(x)) = (opt_sum, opt_max) {
            dgini.push(rational_f64(&x.gini_tardiness) - rational_f64(&s.gini_tardiness));
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    ExperimentSummary {
        instances: done,
        paradox_sum_t: mean(&paradox_sum),
        paradox_max_t: mean(&paradox_max),
        ratio_copeland_to_sum_t: mean(&ratio_sum),
        ratio_copeland_to_max_t: mean(&ratio_max),
        delta_gini: mean(&dgini),
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let results: Vec<Result<InstanceResult>> = (0..spec.instances)
        .into_par_iter()
        .map(|id| run_one(spec, id))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut agg = vec![vec![(0i64, 0i64, 0u64); spec.p_max as usize]; spec.rules.len()];
    let mut done = 0u64;
    for (id, result) in results.into_iter().enumerate() {
        match result {
            Ok(r) => {
                done += 1;
                rows.extend(r.rows);
                for (ri, lens) in r.deltas.into_iter().enumerate() {
                    for (li, (s, sq, c)) in lens.into_iter().enumerate() {
                        agg[ri][li].0 += s;
                        agg[ri][li].1 += sq;
                        agg[ri][li].2 += c;
                    }
                }
            }
            Err(e) => failures.push((id as u64, e.to_string())),
        }
    }
    let summary = build_summary(&rows, done);
    let mut positions = Vec::new();
    for (ri, lens) in agg.into_iter().enumerate() {
        for (li, (s, sq, c)) in lens.into_iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mean = s as f64 / c as f64;
            let variance = (sq as f64 / c as f64 - mean * mean).max(0.0);
            positions.push(PositionRow {
                rule: spec.rules[ri].clone(),
                length: li as u64 + 1,
                mean,
                std: variance.sqrt(),
                jobs: c,
            });
        }
    }
    Ok(ExperimentOutput {
        spec: spec.clone(),
        rows,
        summary,
        positions,
        failures,
    })
}

fn quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

fn opt_f64(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.6}")).unwrap_or_default()
}

impl ExperimentOutput {
    /// Per-instance, per-rule rows. Strings are quoted; rationals carry
    /// six decimals; absent values are empty fields.
    pub fn rows_csv(&self) -> String {
        let mut header = String::from(
            "instance,rule,schedule,objective,sum_tardiness,max_tardiness,paradox_rate,gini_tardiness",
        );
        for len in 1..=self.spec.p_max {
            header.push_str(&format!(",delta_len_{len}"));
        }
        let mut out = header;
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6},{:.6}",
                row.instance,
                quote(&row.rule.to_string()),
                quote(&row.schedule_text),
                row.objective.map(|v| v.to_string()).unwrap_or_default(),
                row.sum_tardiness,
                row.max_tardiness,
                rational_f64(&row.paradox_rate),
                rational_f64(&row.gini_tardiness),
            ));
            for delta in &row.position_delta {
                out.push(',');
                out.push_str(&opt_f64(*delta));
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let s = &self.summary;
        format!(
            "instances,paradox_sum_t,paradox_max_t,ratio_copeland_to_sum_t,ratio_copeland_to_max_t,delta_gini\n{},{},{},{},{},{}\n",
            s.instances,
            opt_f64(s.paradox_sum_t),
            opt_f64(s.paradox_max_t),
            opt_f64(s.ratio_copeland_to_sum_t),
            opt_f64(s.ratio_copeland_to_max_t),
            opt_f64(s.delta_gini),
        )
    }

    pub fn positions_csv(&self) -> String {
        let mut out = String::from("rule,length,mean_delta,std_delta,jobs\n");
        for row in &self.positions {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{}\n",
                quote(&row.rule.to_string()),
                row.length,
                row.mean,
                row.std,
                row.jobs
            ));
        }
        out
    }

    /// Sidecar recording the software version, the effective spec and any
    /// skipped instances; everything needed to reproduce the CSVs.
    pub fn metadata(&self) -> String {
        let mut out = format!("collsched={}\n", env!("CARGO_PKG_VERSION"));
        out.push_str(&self.spec.echo());
        out.push_str(&format!("instances_failed={}\n", self.failures.len()));
        for (id, reason) in &self.failures {
            out.push_str(&format!("failed_instance_{id}={reason}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PreferenceProfile;
    use crate::rng::Rng;

    #[test]
    fn gini_golden_values() {
        assert_eq!(gini(&[5, 5, 5, 5]).unwrap(), Rational::new(0, 1));
        assert_eq!(gini(&[0, 0, 0, 1]).unwrap(), Rational::new(3, 4));
        assert_eq!(gini(&[0, 0, 0, 0]).unwrap(), Rational::new(0, 1));
        assert_eq!(gini(&[7]).unwrap(), Rational::new(0, 1));
        assert!(gini(&[]).is_err());
        assert!(gini(&[3, -1]).is_err());
    }

    #[test]
    fn gini_stays_in_the_unit_interval() {
        let mut rng = Rng::new(5);
        for _ in 0..200 {
            let len = 1 + rng.next_below(30) as usize;
            let values: Vec<i64> = (0..len).map(|_| rng.next_below(50) as i64).collect();
            let g = gini(&values).unwrap();
            assert!(g >= Rational::new(0, 1) && g <= Rational::new(1, 1), "{values:?}");
        }
    }

    #[test]
    fn unit_instance_has_zero_position_deltas() {
        let profile = generate_impartial(5, 7, 3).unwrap();
        let instance = assign_lengths(profile, &LengthSpec::Unit, 0).unwrap();
        let rule = Rule::Cost(CostSpec::sum(CostKind::Tardiness));
        let changes = position_change_profile(&instance, &rule).unwrap();
        assert_eq!(changes, vec![(1, 0.0)]);
    }

    #[test]
    fn position_deltas_on_the_two_agent_example() {
        // optimum on (20,5,1) is (J2,J3,J1); the unit twin optimum is
        // (J1,J2,J3), so J1 moves +2 and the others -1 each
        let profile = PreferenceProfile::from_schedules(
            3,
            vec![
                Schedule::from_indices(&[0, 2, 1]).unwrap(),
                Schedule::from_indices(&[1, 0, 2]).unwrap(),
            ],
        )
        .unwrap();
        let instance = Instance::from_times(&[20, 5, 1], profile).unwrap();
        let rule = Rule::Cost(CostSpec::sum(CostKind::Tardiness));
        let changes = position_change_profile(&instance, &rule).unwrap();
        assert_eq!(changes, vec![(1, -1.0), (5, -1.0), (20, 2.0)]);
    }

    #[test]
    fn spec_parsing_applies_defaults_and_echoes_them() {
        let spec = ExperimentSpec::parse("m=6\nn=20\n").unwrap();
        assert_eq!(spec.source, ProfileSource::Impartial);
        assert_eq!(spec.p_max, 10);
        assert_eq!(spec.instances, 100);
        assert_eq!(spec.seed, 0);
        assert_eq!(spec.rules, ExperimentSpec::default_rules());
        let echo = spec.echo();
        assert!(echo.contains("model=impartial\n"));
        assert!(echo.contains("instances=100\n"));
        assert!(echo.contains("rules=sum-t,max-t,pta-copeland\n"));
        assert!(echo.contains("seed=0\n"));
        // the echo parses back to the same spec
        assert_eq!(ExperimentSpec::parse(&echo).unwrap(), spec);
    }

    #[test]
    fn spec_parsing_reads_every_key() {
        let text = "# scenario\nmodel = mallows\nphi = 0.5\nm = 8\nn = 40\np_max = 3\n\
                    instances = 7\nrules = sum-t , pta-minimax\nseed = 99\n";
        let spec = ExperimentSpec::parse(text).unwrap();
        assert_eq!(spec.source, ProfileSource::Mallows { phi: 0.5 });
        assert_eq!((spec.m, spec.n, spec.p_max), (8, 40, 3));
        assert_eq!(spec.instances, 7);
        assert_eq!(spec.seed, 99);
        assert_eq!(
            spec.rules,
            vec![
                Rule::Cost(CostSpec::sum(CostKind::Tardiness)),
                Rule::PtaIterativeMinimax
            ]
        );
        assert_eq!(ExperimentSpec::parse(&spec.echo()).unwrap(), spec);
    }

    #[test]
    fn spec_parsing_rejects_bad_input() {
        let err = ExperimentSpec::parse("m=6\nn=20\nwhat=1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = ExperimentSpec::parse("m=6\nn=twenty\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(ExperimentSpec::parse("n=20\n").is_err());
        assert!(ExperimentSpec::parse("m=6\nn=20\ninstances=0\n").is_err());
        assert!(ExperimentSpec::parse("m=6\nn=20\nmodel=mallows\nphi=0\n").is_err());
        let err = ExperimentSpec::parse("m=6\nn=20\nrules=sum-zz\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn small_batch_is_deterministic_and_consistent() {
        let mut spec = ExperimentSpec::defaults(6, 20);
        spec.p_max = 3;
        spec.instances = 4;
        spec.seed = 42;
        let output = run_experiment(&spec).unwrap();
        assert!(output.failures.is_empty());
        assert_eq!(output.rows.len(), 12);
        assert_eq!(output.summary.instances, 4);
        for field in [
            output.summary.paradox_sum_t,
            output.summary.paradox_max_t,
            output.summary.ratio_copeland_to_sum_t,
            output.summary.ratio_copeland_to_max_t,
            output.summary.delta_gini,
        ] {
            assert!(field.is_some());
        }
        assert!(output.summary.ratio_copeland_to_sum_t.unwrap() >= 1.0);
        assert!(output.summary.ratio_copeland_to_max_t.unwrap() >= 1.0);
        // byte-identical rerun
        let again = run_experiment(&spec).unwrap();
        assert_eq!(output.rows_csv(), again.rows_csv());
        assert_eq!(output.summary_csv(), again.summary_csv());
        assert_eq!(output.positions_csv(), again.positions_csv());
        assert_eq!(output.metadata(), again.metadata());
        let rows = output.rows_csv();
        let header = rows.lines().next().unwrap();
        assert!(header.ends_with("delta_len_1,delta_len_2,delta_len_3"));
        assert_eq!(rows.lines().count(), 13);
        assert!(rows.contains("\"pta-copeland\""));
    }

    #[test]
    fn single_rule_summary_is_partial() {
        let mut spec = ExperimentSpec::defaults(5, 10);
        spec.p_max = 2;
        spec.instances = 1;
        spec.rules = vec![Rule::Cost(CostSpec::sum(CostKind::Tardiness))];
        let output = run_experiment(&spec).unwrap();
        assert_eq!(output.rows.len(), 1);
        assert!(output.summary.paradox_sum_t.is_some());
        assert!(output.summary.paradox_max_t.is_none());
        assert!(output.summary.ratio_copeland_to_sum_t.is_none());
        assert!(output.summary.delta_gini.is_none());
        let row = &output.rows[0];
        assert_eq!(row.objective, Some(row.sum_tardiness));
    }

    #[test]
    fn capacity_failures_spare_the_batch() {
        let mut spec = ExperimentSpec::defaults(22, 4);
        spec.instances = 2;
        spec.rules = vec![Rule::Cost(CostSpec::max(CostKind::Tardiness))];
        let output = run_experiment(&spec).unwrap();
        assert_eq!(output.failures.len(), 2);
        assert!(output.rows.is_empty());
        assert_eq!(output.summary.instances, 0);
        assert!(output.metadata().contains("instances_failed=2\n"));
    }

    #[test]
    fn mallows_batch_runs() {
        let mut spec = ExperimentSpec::defaults(5, 12);
        spec.source = ProfileSource::Mallows { phi: 0.6 };
        spec.p_max = 2;
        spec.instances = 2;
        let output = run_experiment(&spec).unwrap();
        assert!(output.failures.is_empty());
        assert_eq!(output.rows.len(), 6);
    }
}
