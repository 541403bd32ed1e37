//! Scheduling rules.

pub mod condorcet;
pub mod cost;
pub mod psf;

use crate::error::{Error, Result};
use crate::model::{CostSpec, Instance, Schedule};
use psf::ScoreTransform;

/// A named scheduling rule, the unit the axiom harnesses, experiments and
/// CLI operate on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// Minimize an aggregated disagreement cost exactly.
    Cost(CostSpec),
    /// Positional scoring with the given transform.
    Psf(ScoreTransform),
    /// Descending length-proportional pairwise win counts.
    PtaCopeland,
    /// Repeatedly schedule the job with the smallest worst defeat.
    PtaIterativeMinimax,
}

impl Rule {
    pub fn apply(&self, instance: &Instance) -> Result<Schedule> {
        match self {
            Rule::Cost(spec) => cost::solve(instance, *spec).map(|r| r.schedule),
            Rule::Psf(transform) => psf::psf_rule(instance, transform),
            Rule::PtaCopeland => Ok(condorcet::pta_copeland(instance)),
            Rule::PtaIterativeMinimax => Ok(condorcet::pta_iterative_minimax(instance)),
        }
    }

    /// Parses the display format: `pta-copeland`, `pta-minimax`, `psf`,
    /// `psf-square`, or a cost objective like `sum-t`, `max-t`, `l2-sd`.
    pub fn parse(token: &str) -> Result<Rule> {
        match token {
            "pta-copeland" => Ok(Rule::PtaCopeland),
            "pta-minimax" => Ok(Rule::PtaIterativeMinimax),
            "psf" => Ok(Rule::Psf(ScoreTransform::Identity)),
            "psf-square" => Ok(Rule::Psf(ScoreTransform::Square)),
            other => CostSpec::parse(other).map(Rule::Cost).map_err(|_| {
                Error::InvalidSpec(format!(
                    "unknown rule `{token}`, expected pta-copeland, pta-minimax, \
                     psf, psf-square or a cost objective like sum-t"
                ))
            }),
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rule::Cost(spec) => write!(f, "{spec}"),
            Rule::Psf(ScoreTransform::Identity) => write!(f, "psf"),
            Rule::Psf(ScoreTransform::Square) => write!(f, "psf-square"),
            Rule::Psf(ScoreTransform::Table(_)) => write!(f, "psf-table"),
            Rule::PtaCopeland => write!(f, "pta-copeland"),
            Rule::PtaIterativeMinimax => write!(f, "pta-minimax"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Aggregation, CostKind};

    #[test]
    fn rule_tokens_round_trip() {
        let rules = [
            Rule::Cost(CostSpec::sum(CostKind::Tardiness)),
            Rule::Cost(CostSpec::max(CostKind::Tardiness)),
            Rule::Cost(CostSpec::new(CostKind::SquaredDeviation, Aggregation::Lp(2)).unwrap()),
            Rule::Psf(ScoreTransform::Identity),
            Rule::Psf(ScoreTransform::Square),
            Rule::PtaCopeland,
            Rule::PtaIterativeMinimax,
        ];
        for rule in rules {
            assert_eq!(Rule::parse(&rule.to_string()).unwrap(), rule);
        }
        assert!(Rule::parse("nonsense").is_err());
        assert!(Rule::parse("sum-zz").is_err());
        // lateness rejects non-sum aggregation at spec level
        assert!(Rule::parse("max-l").is_err());
    }
}
