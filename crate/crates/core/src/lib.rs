//! Collective schedules: aggregate the preferred job orders of many agents
//! into a single shared schedule on one machine.
//!
//! Jobs have integer processing times and run back to back, so a schedule
//! is just a permutation of the job set. Agents each submit the order they
//! would like, and the library offers three families of aggregation rules:
//!
//! * positional scoring rules generalizing Borda ([`rules::psf`]),
//! * rules minimizing a disagreement cost such as total tardiness
//!   ([`rules::cost`]), with exact solvers and an ILP export,
//! * majority-based rules built on proportional-time approval between job
//!   pairs ([`rules::condorcet`]).
//!
//! [`axioms`] checks properties of rule outputs (Pareto efficiency,
//! majority consistency, reinforcement) and [`experiments`] runs seeded
//! batch comparisons to CSV.
//!
//! All objectives are computed in exact integer arithmetic. Accumulators
//! are sized for n <= 10^4 agents, m <= 32 jobs and processing times
//! <= 10^3; individual solvers carry tighter, documented limits.

#![forbid(unsafe_code)]

pub mod axioms;
pub mod costs;
pub mod error;
pub mod experiments;
pub mod model;
pub mod profiles;
pub mod rng;
pub mod rules;

pub use error::{Error, Result};
pub use model::{
    Aggregation, CostKind, CostSpec, Instance, Job, JobId, PreferenceProfile, ProfileEntry,
    Rational, Schedule,
};
