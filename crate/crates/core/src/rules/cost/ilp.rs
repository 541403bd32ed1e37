//! Export of sum objectives as 0/1 linear programs in LP text format.
//!
//! The model uses one binary variable per ordered pair, prec_i_j = 1 when
//! job i runs before job j (1-based ids). Completion times are affine in
//! these variables, C_i = p_i + sum_j p_j prec_j_i, which linearizes the
//! summed tardiness, lateness, earliness and unit penalty objectives.
//! Pair and triple constraints make the relation a total order. The text
//! is accepted by CPLEX, Gurobi, SCIP and friends.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Aggregation, CostKind, CostSpec, Instance, JobId};

/// One objective or constraint term: coefficient times variable.
type Term = (i128, String);

fn prec(i: usize, j: usize) -> String {
    format!("prec_{}_{}", i + 1, j + 1)
}

fn write_terms(out: &mut String, terms: &[Term]) {
    for (idx, (coeff, var)) in terms.iter().enumerate() {
        if idx == 0 {
            let _ = write!(out, "{coeff} {var}");
        } else if *coeff < 0 {
            let _ = write!(out, " - {} {var}", -coeff);
        } else {
            let _ = write!(out, " + {coeff} {var}");
        }
    }
}

/// Formats the instance as a minimization over linear ordering variables.
/// Supports the sum aggregation of tardiness, lateness, earliness and the
/// unit penalty; the other kinds have no affine completion-time model.
pub fn export_ilp(instance: &Instance, spec: CostSpec) -> Result<String> {
    let spec = CostSpec::new(spec.kind, spec.agg)?;
    if spec.agg != Aggregation::Sum {
        return Err(Error::Unsupported(
            "only sum objectives export to a linear program".into(),
        ));
    }
    match spec.kind {
        CostKind::Tardiness
        | CostKind::Lateness
        | CostKind::Earliness
        | CostKind::Late => {}
        other => {
            return Err(Error::Unsupported(format!(
                "{other} does not linearize over precedence variables"
            )))
        }
    }
    let m = instance.m();
    let entries = instance.profile().entries();
    let n = instance.profile().n() as i128;
    let p: Vec<i128> = (0..m)
        .map(|j| instance.processing_time(JobId(j as u32)) as i128)
        .collect();
    let total: i128 = p.iter().sum();
    // preferred[e][i] = completion of job i in entry e's order.
    let preferred: Vec<Vec<i128>> = entries
        .iter()
        .map(|e| {
            instance
                .completion_times(&e.schedule)
                .expect("entry schedules match the instance")
                .into_iter()
                .map(|c| c as i128)
                .collect()
        })
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ {spec} over {m} jobs, {} preference classes, {} agents",
        entries.len(),
        instance.profile().n()
    );
    out.push_str("Minimize\n obj: ");
    let aux = |stem: &str, e: usize, i: usize| format!("{stem}_{}_{}", e + 1, i + 1);
    let mut objective: Vec<Term> = Vec::new();
    let mut constant: i128 = 0;
    match spec.kind {
        CostKind::Tardiness | CostKind::Earliness | CostKind::Late => {
            let stem = match spec.kind {
                CostKind::Tardiness => "t",
                CostKind::Earliness => "e",
                _ => "u",
            };
            for (e, entry) in entries.iter().enumerate() {
                for i in 0..m {
                    objective.push((entry.weight as i128, aux(stem, e, i)));
                }
            }
        }
        CostKind::Lateness => {
            // sum_e w_e sum_i (C_i - d_ei) expands to n p_j per ordered
            // pair plus a schedule-independent constant.
            for j in 0..m {
                for i in 0..m {
                    if i != j {
                        objective.push((n * p[j], prec(j, i)));
                    }
                }
            }
            constant = n * total
                - entries
                    .iter()
                    .zip(&preferred)
                    .map(|(e, d)| e.weight as i128 * d.iter().sum::<i128>())
                    .sum::<i128>();
        }
        _ => unreachable!(),
    }
    write_terms(&mut out, &objective);
    if constant > 0 {
        let _ = write!(out, " + {constant}");
    } else if constant < 0 {
        let _ = write!(out, " - {}", -constant);
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for i in 0..m {
        for j in i + 1..m {
            let _ = writeln!(
                out,
                " pair_{}_{}: 1 {} + 1 {} = 1",
                i + 1,
                j + 1,
                prec(i, j),
                prec(j, i)
            );
        }
    }
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                if i != j && j != k && i != k {
                    let _ = writeln!(
                        out,
                        " trans_{}_{}_{}: 1 {} + 1 {} - 1 {} <= 1",
                        i + 1,
                        j + 1,
                        k + 1,
                        prec(i, j),
                        prec(j, k),
                        prec(i, k)
                    );
                }
            }
        }
    }
    if spec.kind != CostKind::Lateness {
        for (e, d) in preferred.iter().enumerate() {
            for i in 0..m {
                let mut terms: Vec<Term> = Vec::new();
                let (name, head) = match spec.kind {
                    // t_e_i >= C_i - d becomes t - sum p_j prec_j_i >= p_i - d.
                    CostKind::Tardiness => ("tard", Some((1, aux("t", e, i)))),
                    // e_e_i >= d - C_i becomes e + sum p_j prec_j_i >= d - p_i.
                    CostKind::Earliness => ("early", Some((1, aux("e", e, i)))),
                    // C_i - d <= M u_e_i with M large enough for any order.
                    CostKind::Late => ("late", None),
                    _ => unreachable!(),
                };
                if let Some(head) = head {
                    terms.push((head.0, head.1));
                }
                let sign = if spec.kind == CostKind::Tardiness { -1 } else { 1 };
                for j in 0..m {
                    if j != i {
                        terms.push((sign * p[j], prec(j, i)));
                    }
                }
                let (relation, rhs) = match spec.kind {
                    CostKind::Tardiness => (">=", p[i] - d[i]),
                    CostKind::Earliness => (">=", d[i] - p[i]),
                    CostKind::Late => {
                        terms.push((-total, aux("u", e, i)));
                        ("<=", d[i] - p[i])
                    }
                    _ => unreachable!(),
                };
                let _ = write!(out, " {}_{}_{}: ", name, e + 1, i + 1);
                write_terms(&mut out, &terms);
                let _ = writeln!(out, " {relation} {rhs}");
            }
        }
    }

    out.push_str("Binary\n");
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let _ = writeln!(out, " {}", prec(i, j));
            }
        }
    }
    if spec.kind == CostKind::Late {
        for e in 0..entries.len() {
            for i in 0..m {
                let _ = writeln!(out, " {}", aux("u", e, i));
            }
        }
    }
    out.push_str("End\n");
    Ok(out)
}
