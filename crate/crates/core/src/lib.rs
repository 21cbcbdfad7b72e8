//! Occupancy statistics for the multinomial allocation model.
//!
//! `n` balls are thrown independently into `N` boxes, box `k` receiving
//! each ball with probability `q_k`. The crate computes, for the
//! proportion `q̂_r` of boxes holding exactly `r` balls:
//!
//! * exact means, variances and covariances ([`exact`]), with a
//!   brute-force enumeration oracle for small models;
//! * Poisson-type expansions to order `1/n` and the two-sided bounds on
//!   their `n⁻²` remainders ([`approx`]);
//! * reproducible Monte Carlo estimates ([`sim`]).
//!
//! All expectations over the random box load `ξ = n·q_X` live on
//! [`AllocationModel`].

pub mod approx;
pub mod corpus;
pub mod error;
pub mod exact;
pub mod model;
pub mod numeric;
pub mod report;
pub mod sim;
pub mod special;

pub use approx::{ApproxExpansion, BoundKind, BoundReport};
pub use error::{Error, Result};
pub use exact::{MomentKind, MomentSet};
pub use model::{AllocationModel, ProfileSpec, WeightProfile};
pub use sim::{OccupancyRow, SimConfig, SimulationSummary};
