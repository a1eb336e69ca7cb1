//! Implicit descriptions of Pareto fronts of polynomial multi-objective
//! problems.
//!
//! The pipeline builds the PF system of a problem ([`problem`]), grows its
//! Macaulay matrix ([`macaulay`]) until the row space contains polynomials in
//! the objective values alone, and extracts them ([`eliminate`]). The
//! resulting eliminant system is queried for weights and decisions
//! ([`front`]) and validated against weighted-sum sampling ([`oracle`]).

pub mod eliminate;
pub mod error;
pub mod fixtures;
pub mod front;
pub mod linalg;
pub mod macaulay;
pub mod newton;
pub mod oracle;
pub mod polyring;
pub mod problem;
pub mod sysid;

pub use error::{Error, Result};
