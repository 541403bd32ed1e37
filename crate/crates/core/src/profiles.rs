//! Reading, writing and generating preference profiles.
//!
//! Two text formats are supported: PrefLib strict-order-complete files
//! (rankings only, lengths assigned separately) and a native instance
//! format that also carries processing times. Synthetic profiles come
//! from an impartial culture (uniform orders) or a Mallows model sampled
//! by repeated insertion; both are bit-reproducible from a seed.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Instance, Job, JobId, PreferenceProfile, Schedule};
use crate::rng::Rng;

/// How processing times are assigned to a profile's jobs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LengthSpec {
    /// Every job takes one time unit.
    Unit,
    /// Independent uniform draws from `1..=p_max`.
    UniformRandom { p_max: u64 },
    /// One explicit length per job, in id order.
    Explicit(Vec<u64>),
}

/// Attaches processing times to a bare ranking profile.
pub fn assign_lengths(
    profile: PreferenceProfile,
    lengths: &LengthSpec,
    seed: u64,
) -> Result<Instance> {
    let m = profile.m();
    let times = sample_lengths(m, lengths, seed)?;
    Instance::from_times(&times, profile)
}

fn sample_lengths(m: usize, lengths: &LengthSpec, seed: u64) -> Result<Vec<u64>> {
    match lengths {
        LengthSpec::Unit => Ok(vec![1; m]),
        LengthSpec::UniformRandom { p_max } => {
            if *p_max == 0 {
                return Err(Error::InvalidSpec("p_max must be positive".into()));
            }
            let mut rng = Rng::new(seed);
            Ok((0..m).map(|_| 1 + rng.next_below(*p_max)).collect())
        }
        LengthSpec::Explicit(times) => {
            if times.len() != m {
                return Err(Error::InvalidInstance(format!(
                    "{} explicit lengths for {} jobs",
                    times.len(),
                    m
                )));
            }
            Ok(times.clone())
        }
    }
}

/// Uniformly random strict orders, one per agent.
pub fn generate_impartial(m: usize, n: u64, seed: u64) -> Result<PreferenceProfile> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidSpec("need at least one job and one agent".into()));
    }
    let mut rng = Rng::new(seed);
    let mut schedules = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let mut order: Vec<u32> = (0..m as u32).collect();
        rng.shuffle(&mut order);
        schedules.push(Schedule::from_indices(&order)?);
    }
    PreferenceProfile::from_schedules(m, schedules)
}

/// Mallows model: an order at swap distance `k` from the reference has
/// probability proportional to `phi^k`, so the reference itself is drawn
/// with probability `prod_k 1 / (1 + phi + ... + phi^(k-1))`. Sampling is
/// by repeated insertion: the job in reference slot `i` (0-based) goes to
/// slot `j <= i` of the partial order with probability proportional to
/// `phi^(i-j)`, which adds exactly `i - j` swaps. `phi` must lie in
/// `(0, 1]`; `phi = 1` is the impartial culture.
pub fn generate_mallows(
    m: usize,
    n: u64,
    phi: f64,
    reference: Option<&Schedule>,
    seed: u64,
) -> Result<PreferenceProfile> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidSpec("need at least one job and one agent".into()));
    }
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "mallows dispersion must be in (0, 1], got {phi}"
        )));
    }
    let reference = match reference {
        Some(r) => {
            if r.m() != m {
                return Err(Error::InvalidSpec(format!(
                    "reference covers {} jobs, expected {m}",
                    r.m()
                )));
            }
            r.clone()
        }
        None => Schedule::new((0..m as u32).map(JobId).collect(), m)?,
    };
    // phi_pow[k] = phi^k.
    let mut phi_pow = vec![1.0f64; m];
    for k in 1..m {
        phi_pow[k] = phi_pow[k - 1] * phi;
    }
    let mut rng = Rng::new(seed);
    let mut schedules = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let mut order: Vec<JobId> = Vec::with_capacity(m);
        for (i, &job) in reference.order().iter().enumerate() {
            // Insertion weights phi^(i-j) for slots j = 0..=i.
            let total: f64 = phi_pow[..=i].iter().sum();
            let mut u = rng.next_f64() * total;
            let mut slot = i;
            for j in 0..=i {
                u -= phi_pow[i - j];
                if u < 0.0 {
                    slot = j;
                    break;
                }
            }
            order.insert(slot, job);
        }
        schedules.push(Schedule::new(order, m)?);
    }
    PreferenceProfile::from_schedules(m, schedules)
}

/// Parsed PrefLib data: rankings plus candidate display labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreflibProfile {
    pub profile: PreferenceProfile,
    pub labels: Vec<String>,
}

impl PreflibProfile {
    /// Builds a full instance by attaching processing times.
    pub fn assign_lengths(self, lengths: &LengthSpec, seed: u64) -> Result<Instance> {
        let m = self.profile.m();
        let times = sample_lengths(m, lengths, seed)?;
        let jobs = times
            .iter()
            .enumerate()
            .map(|(i, &p)| Job {
                id: JobId(i as u32),
                processing_time: p,
            })
            .collect();
        Instance::with_labels(jobs, self.profile, self.labels)
    }
}

/// Parses a PrefLib strict-order-complete file: `#` metadata lines
/// (`NUMBER ALTERNATIVES` and `ALTERNATIVE NAME i` are honored, the rest
/// are skipped) followed by ranking lines `count: c1,c2,...,cm` over
/// 1-based candidate ids. Every ranking must cover all candidates.
pub fn parse_preflib(text: &str) -> Result<PreflibProfile> {
    let mut m: Option<usize> = None;
    let mut names: Vec<(usize, String)> = Vec::new();
    let mut weighted: Vec<(Schedule, u64)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(rest) = meta.strip_prefix("NUMBER ALTERNATIVES:") {
                let count: usize = rest.trim().parse().map_err(|_| {
                    Error::parse(lineno, format!("bad alternative count `{}`", rest.trim()))
                })?;
                m = Some(count);
            } else if let Some(rest) = meta.strip_prefix("ALTERNATIVE NAME ") {
                if let Some((id_part, name)) = rest.split_once(':') {
                    let id: usize = id_part.trim().parse().map_err(|_| {
                        Error::parse(lineno, format!("bad alternative id `{}`", id_part.trim()))
                    })?;
                    names.push((id, name.trim().to_string()));
                }
            }
            continue;
        }
        let (schedule, count) = parse_ranking_line(line, lineno, &mut m)?;
        weighted.push((schedule, count));
    }

    let Some(m) = m else {
        return Err(Error::parse(text.lines().count(), "no rankings found"));
    };
    if weighted.is_empty() {
        return Err(Error::parse(text.lines().count(), "no rankings found"));
    }
    let mut labels: Vec<String> = (1..=m).map(|i| i.to_string()).collect();
    for (id, name) in names {
        if id == 0 || id > m {
            return Err(Error::InvalidInstance(format!(
                "alternative name for unknown candidate {id}"
            )));
        }
        labels[id - 1] = name;
    }
    Ok(PreflibProfile {
        profile: PreferenceProfile::from_weighted(m, weighted)?,
        labels,
    })
}

/// Parses `count: c1,c2,...` over 1-based ids. If `m` is not yet known it
/// is inferred from this line; otherwise the ranking must match it.
fn parse_ranking_line(
    line: &str,
    lineno: usize,
    m: &mut Option<usize>,
) -> Result<(Schedule, u64)> {
    let Some((count_part, rank_part)) = line.split_once(':') else {
        return Err(Error::parse(lineno, format!("expected `count: ranking`, got `{line}`")));
    };
    let count: u64 = count_part.trim().parse().map_err(|_| {
        Error::parse(lineno, format!("bad ranking count `{}`", count_part.trim()))
    })?;
    if count == 0 {
        return Err(Error::parse(lineno, "ranking count must be positive"));
    }
    let ids: Vec<&str> = rank_part.split(',').map(str::trim).collect();
    let m = *m.get_or_insert(ids.len());
    if ids.len() != m {
        return Err(Error::parse(
            lineno,
            format!("ranking lists {} of {m} candidates", ids.len()),
        ));
    }
    let mut order = Vec::with_capacity(m);
    let mut seen = vec![false; m];
    for token in ids {
        let id: usize = token
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad candidate id `{token}`")))?;
        if id == 0 || id > m {
            return Err(Error::parse(
                lineno,
                format!("candidate id {id} out of range 1..={m}"),
            ));
        }
        if seen[id - 1] {
            return Err(Error::parse(lineno, format!("candidate {id} listed twice")));
        }
        seen[id - 1] = true;
        order.push(JobId(id as u32 - 1));
    }
    Ok((Schedule::new(order, m)?, count))
}

/// Parses the native instance format:
///
/// ```text
/// jobs 3
/// 1 20
/// 2 5
/// 3 1 paint-shop
/// prefs
/// 1: 1,3,2
/// 1: 2,1,3
/// ```
///
/// Job ids are 1..=m, each once; the optional third column is a display
/// label. Blank lines and `#` comment lines are skipped anywhere.
pub fn parse_instance(text: &str) -> Result<Instance> {
    enum State {
        ExpectJobsHeader,
        Jobs { remaining: usize },
        Prefs,
    }
    let mut state = State::ExpectJobsHeader;
    let mut m = 0usize;
    let mut times: Vec<Option<u64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut weighted: Vec<(Schedule, u64)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match state {
            State::ExpectJobsHeader => {
                let Some(rest) = line.strip_prefix("jobs") else {
                    return Err(Error::parse(lineno, format!("expected `jobs <m>`, got `{line}`")));
                };
                m = rest.trim().parse().map_err(|_| {
                    Error::parse(lineno, format!("bad job count `{}`", rest.trim()))
                })?;
                if m == 0 {
                    return Err(Error::parse(lineno, "job count must be positive"));
                }
                times = vec![None; m];
                labels = (1..=m).map(|i| i.to_string()).collect();
                state = State::Jobs { remaining: m };
            }
            State::Jobs { remaining } => {
                let mut parts = line.split_whitespace();
                let id_tok = parts.next().unwrap();
                let id: usize = id_tok
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad job id `{id_tok}`")))?;
                if id == 0 || id > m {
                    return Err(Error::parse(
                        lineno,
                        format!("job id {id} out of range 1..={m}"),
                    ));
                }
                let Some(time_tok) = parts.next() else {
                    return Err(Error::parse(lineno, "job line needs `<id> <length>`"));
                };
                let time: u64 = time_tok.parse().map_err(|_| {
                    Error::parse(lineno, format!("bad processing time `{time_tok}`"))
                })?;
                if times[id - 1].is_some() {
                    return Err(Error::parse(lineno, format!("job {id} defined twice")));
                }
                times[id - 1] = Some(time);
                let label: Vec<&str> = parts.collect();
                if !label.is_empty() {
                    labels[id - 1] = label.join(" ");
                }
                state = if remaining == 1 {
                    State::Prefs
                } else {
                    State::Jobs {
                        remaining: remaining - 1,
                    }
                };
            }
            State::Prefs => {
                if line == "prefs" {
                    continue;
                }
                let mut known = Some(m);
                let (schedule, count) = parse_ranking_line(line, lineno, &mut known)?;
                weighted.push((schedule, count));
            }
        }
    }

    match state {
        State::ExpectJobsHeader => Err(Error::parse(last_line, "missing `jobs` section")),
        State::Jobs { .. } => Err(Error::parse(last_line, "job section ended early")),
        State::Prefs => {
            if weighted.is_empty() {
                return Err(Error::parse(last_line, "no rankings found"));
            }
            let jobs = times
                .into_iter()
                .enumerate()
                .map(|(i, t)| Job {
                    id: JobId(i as u32),
                    // All m job lines were seen, so every slot is filled.
                    processing_time: t.expect("job length"),
                })
                .collect();
            Instance::with_labels(jobs, PreferenceProfile::from_weighted(m, weighted)?, labels)
        }
    }
}

/// Serializes an instance in the native format; `parse_instance` of the
/// result reproduces the instance exactly.
pub fn write_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "jobs {}", instance.m());
    for job in instance.jobs() {
        let id = job.id.index() + 1;
        let label = &instance.labels()[job.id.index()];
        if label == &id.to_string() {
            let _ = writeln!(out, "{id} {}", job.processing_time);
        } else {
            let _ = writeln!(out, "{id} {} {label}", job.processing_time);
        }
    }
    let _ = writeln!(out, "prefs");
    for entry in instance.profile().entries() {
        let ids: Vec<String> = entry
            .schedule
            .order()
            .iter()
            .map(|j| (j.index() + 1).to_string())
            .collect();
        let _ = writeln!(out, "{}: {}", entry.weight, ids.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::kendall;
    use std::collections::HashMap;

    #[test]
    fn preflib_basics() {
        let text = "\
# FILE NAME: toy.soc
# NUMBER ALTERNATIVES: 2
# ALTERNATIVE NAME 1: Alpha
# ALTERNATIVE NAME 2: Beta
3: 1,2
1: 2,1
";
        let parsed = parse_preflib(text).unwrap();
        assert_eq!(parsed.profile.n(), 4);
        assert_eq!(parsed.profile.entries().len(), 2);
        assert_eq!(parsed.profile.entries()[0].weight, 3);
        assert_eq!(parsed.profile.entries()[1].weight, 1);
        assert_eq!(parsed.labels, vec!["Alpha", "Beta"]);

        // m can be inferred without metadata.
        let parsed = parse_preflib("2: 2,1,3\n1: 1,2,3\n").unwrap();
        assert_eq!(parsed.profile.m(), 3);
        assert_eq!(parsed.labels, vec!["1", "2", "3"]);
    }

    #[test]
    fn preflib_errors_carry_line_numbers() {
        let dup = parse_preflib("# NUMBER ALTERNATIVES: 3\n2: 1,1,3\n").unwrap_err();
        assert!(matches!(dup, Error::Parse { line: 2, .. }), "{dup}");

        let incomplete = parse_preflib("1: 1,2,3\n2: 1,2\n").unwrap_err();
        assert!(matches!(incomplete, Error::Parse { line: 2, .. }), "{incomplete}");

        let zero = parse_preflib("0: 1,2\n").unwrap_err();
        assert!(matches!(zero, Error::Parse { line: 1, .. }), "{zero}");

        let out_of_range = parse_preflib("# NUMBER ALTERNATIVES: 2\n1: 1,3\n").unwrap_err();
        assert!(matches!(out_of_range, Error::Parse { line: 2, .. }), "{out_of_range}");

        assert!(parse_preflib("# only metadata\n").is_err());
    }

    #[test]
    fn native_format_round_trips() {
        let text = "\
# two machines, three jobs
jobs 3
1 20
2 5
3 1 paint shop
prefs
1: 1,3,2
1: 2,1,3
";
        let instance = parse_instance(text).unwrap();
        assert_eq!(instance.m(), 3);
        assert_eq!(instance.n(), 2);
        assert_eq!(instance.processing_time(JobId(1)), 5);
        assert_eq!(instance.labels()[2], "paint shop");

        let rendered = write_instance(&instance);
        let again = parse_instance(&rendered).unwrap();
        assert_eq!(instance, again);
        assert_eq!(rendered, write_instance(&again));
    }

    #[test]
    fn native_format_errors() {
        assert!(matches!(
            parse_instance("jobs 2\n1 5\n1 6\nprefs\n1: 1,2\n").unwrap_err(),
            Error::Parse { line: 3, .. }
        ));
        assert!(matches!(
            parse_instance("jobs 2\n1 5\n2 0\nprefs\n1: 1,2\n").unwrap_err(),
            Error::InvalidInstance(_)
        ));
        assert!(parse_instance("jobs 2\n1 5\n").is_err());
        assert!(parse_instance("prefs\n1: 1,2\n").is_err());
        assert!(matches!(
            parse_instance("jobs 1\n1 5\nprefs\n1: 1\n2: 1,1\n").unwrap_err(),
            Error::Parse { line: 5, .. }
        ));
    }

    #[test]
    fn lengths_unit_uniform_explicit() {
        let profile = generate_impartial(4, 3, 11).unwrap();
        let unit = assign_lengths(profile.clone(), &LengthSpec::Unit, 0).unwrap();
        assert_eq!(unit.equal_length(), Some(1));

        let uni = assign_lengths(
            profile.clone(),
            &LengthSpec::UniformRandom { p_max: 10 },
            7,
        )
        .unwrap();
        assert!(uni.jobs().iter().all(|j| (1..=10).contains(&j.processing_time)));
        let uni_again = assign_lengths(
            profile.clone(),
            &LengthSpec::UniformRandom { p_max: 10 },
            7,
        )
        .unwrap();
        assert_eq!(uni, uni_again);
        // p_max = 1 degenerates to unit lengths.
        let ones = assign_lengths(profile.clone(), &LengthSpec::UniformRandom { p_max: 1 }, 3)
            .unwrap();
        assert_eq!(ones.equal_length(), Some(1));

        assert!(assign_lengths(profile.clone(), &LengthSpec::Explicit(vec![1, 2]), 0).is_err());
        assert!(
            assign_lengths(profile, &LengthSpec::UniformRandom { p_max: 0 }, 0).is_err()
        );
    }

    #[test]
    fn impartial_culture_is_uniform() {
        // Pool 10^4 samples; each of the 6 orders of 3 jobs should have
        // frequency 1/6 within 0.02.
        let profile = generate_impartial(3, 10_000, 42).unwrap();
        let mut freq: HashMap<Vec<JobId>, f64> = HashMap::new();
        for entry in profile.entries() {
            *freq.entry(entry.schedule.order().to_vec()).or_default() +=
                entry.weight as f64 / 10_000.0;
        }
        assert_eq!(freq.len(), 6);
        for (_, f) in freq {
            assert!((f - 1.0 / 6.0).abs() < 0.02, "frequency {f}");
        }
    }

    #[test]
    fn impartial_is_deterministic_per_seed() {
        let a = generate_impartial(6, 50, 9).unwrap();
        let b = generate_impartial(6, 50, 9).unwrap();
        assert_eq!(a, b);
        let c = generate_impartial(6, 50, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn mallows_parameter_validation() {
        assert!(generate_mallows(3, 2, 0.0, None, 1).is_err());
        assert!(generate_mallows(3, 2, 1.2, None, 1).is_err());
        assert!(generate_mallows(3, 2, f64::NAN, None, 1).is_err());
        let short = Schedule::from_indices(&[0, 1]).unwrap();
        assert!(generate_mallows(3, 2, 0.5, Some(&short), 1).is_err());
    }

    #[test]
    fn mallows_concentrates_near_the_reference() {
        // With phi = 0.01 the reference order has probability
        // prod_k 1/(1 + ... + phi^(k-1)) ~ 0.96, so out of 100 agents at
        // least 95 should hold it exactly at this seed.
        let m = 5;
        let phi = 0.01f64;
        let mut p_ref = 1.0;
        for k in 1..=m {
            let denom: f64 = (0..k).map(|t| phi.powi(t as i32)).sum();
            p_ref /= denom;
        }
        assert!(p_ref > 0.95, "reference probability {p_ref}");

        let profile = generate_mallows(m, 100, phi, None, 2024).unwrap();
        let reference: Vec<JobId> = (0..m as u32).map(JobId).collect();
        let exact: u64 = profile
            .entries()
            .iter()
            .filter(|e| e.schedule.order() == reference)
            .map(|e| e.weight)
            .sum();
        assert!(exact >= 95, "only {exact} of 100 agents hold the reference");
    }

    /// Total-variation distance between sampled and expected order
    /// frequencies, sampling in batches of 10^4 agents.
    fn sampled_tv(m: usize, phi: f64, seed: u64, expected: &HashMap<Vec<JobId>, f64>) -> f64 {
        let batches = 10;
        let per_batch = 10_000u64;
        let mut freq: HashMap<Vec<JobId>, f64> = HashMap::new();
        for b in 0..batches {
            let profile =
                generate_mallows(m, per_batch, phi, None, seed.wrapping_add(b)).unwrap();
            for entry in profile.entries() {
                *freq.entry(entry.schedule.order().to_vec()).or_default() +=
                    entry.weight as f64 / (batches * per_batch) as f64;
            }
        }
        let mut tv = 0.0;
        for (order, p) in expected {
            tv += (p - freq.get(order).copied().unwrap_or(0.0)).abs();
        }
        tv / 2.0
    }

    /// Exact Mallows distribution over all orders of m jobs.
    fn mallows_pmf(m: usize, phi: f64) -> HashMap<Vec<JobId>, f64> {
        use itertools::Itertools;
        let reference = Schedule::new((0..m as u32).map(JobId).collect(), m).unwrap();
        let mut weights: HashMap<Vec<JobId>, f64> = HashMap::new();
        let mut total = 0.0;
        for perm in (0..m as u32).permutations(m) {
            let schedule = Schedule::from_indices(&perm).unwrap();
            let d = kendall(&schedule, &reference).unwrap();
            let w = phi.powi(d as i32);
            total += w;
            weights.insert(schedule.order().to_vec(), w);
        }
        for w in weights.values_mut() {
            *w /= total;
        }
        weights
    }

    #[test]
    fn mallows_matches_its_exact_distribution() {
        let expected = mallows_pmf(4, 0.5);
        let tv = sampled_tv(4, 0.5, 7, &expected);
        assert!(tv <= 0.03, "total variation {tv}");
    }

    #[test]
    fn mallows_with_phi_one_is_impartial() {
        let uniform: HashMap<Vec<JobId>, f64> = mallows_pmf(4, 1.0);
        for p in uniform.values() {
            assert!((p - 1.0 / 24.0).abs() < 1e-12);
        }
        let tv = sampled_tv(4, 1.0, 13, &uniform);
        assert!(tv <= 0.03, "total variation {tv}");
    }

    #[test]
    fn mallows_respects_a_custom_reference() {
        let reference = Schedule::from_indices(&[2, 0, 1]).unwrap();
        let profile = generate_mallows(3, 200, 0.01, Some(&reference), 5).unwrap();
        let modal = profile
            .entries()
            .iter()
            .max_by_key(|e| e.weight)
            .unwrap();
        assert_eq!(modal.schedule.order(), reference.order());
    }
}
