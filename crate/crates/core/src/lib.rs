//! Equity compensation for teams whose members' efforts are complements.
//!
//! Agents sit on a weighted, undirected complementarity network. Each agent
//! holds an equity share of a project that succeeds with probability `P(Y)`,
//! where team performance `Y` is the sum of efforts plus a quadratic
//! spillover term scaled by `beta`. This crate
//!
//! - solves the unique Nash equilibrium of the effort game for any share
//!   vector ([`equilibrium`]),
//! - computes the optimal shares on a fixed set of active agents through
//!   equity centrality ([`intensive`]),
//! - searches for the optimal active set ([`extensive`]),
//! - optimizes the total share for the residual-profit and
//!   success-probability objectives ([`objective`]),
//! - evaluates comparative statics in link weights and `beta`
//!   ([`compstat`]),
//! - and carries closed-form cases used to certify the general solvers
//!   ([`oracles`]).

pub mod compstat;
pub mod equilibrium;
pub mod error;
pub mod extensive;
pub mod intensive;
pub mod linalg;
pub mod network;
pub mod objective;
pub mod oracles;
mod par;
pub mod random;
pub mod roots;
pub mod success;
pub mod sweep;
pub mod verify;

pub use equilibrium::{EquilibriumResult, EquityAllocation};
pub use error::{Error, Result};
pub use extensive::{SearchOptions, SearchReport};
pub use intensive::IntensiveSolution;
pub use network::{AgentSet, WeightedNetwork};
pub use objective::{Objective, OptimalContract};
pub use success::{SuccessFamily, SuccessModel};

/// Shares at or below this value count as zero when deciding who is active.
pub const EPS_ACTIVE: f64 = 1e-9;
