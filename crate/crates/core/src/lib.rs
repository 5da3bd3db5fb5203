//! Exact and simulated probabilities that randomly produced stick pieces can
//! be assembled into a polygon.
//!
//! The crate is organised around four layers:
//!
//! - [`polygon`]: the k-gon inequality, the unique violating side, the
//!   diagonal interval used to glue two smaller polygons, and an explicit
//!   convex (cyclic) realization of any feasible list of side lengths.
//! - [`closed_form`]: exact rational values for the broken stick, broken
//!   brick, pick-up bricks and pick-up sticks problems, plus the gap between
//!   each discrete problem and its continuous limit.
//! - [`oracle`]: exhaustive enumeration of the discrete sample spaces, used as
//!   independent ground truth for every closed form and for the general
//!   discrete `Stick(λ)` problem.
//! - [`montecarlo`]: seeded, sharded, reproducible simulation of the
//!   continuous and discrete `Stick(λ)` problems with Wilson intervals.
//!
//! ```
//! use polygon_odds::closed_form::{broken_brick_prob, ProblemParams};
//! use polygon_odds::oracle::{broken_brick_oracle, Budget};
//!
//! let params = ProblemParams::new(10, 3);
//! let exact = broken_brick_prob(params).unwrap();
//! let counted = broken_brick_oracle(params, Budget::default()).unwrap();
//! assert_eq!(exact.to_string(), "1/6");
//! assert_eq!(counted.probability, exact);
//! ```

pub mod closed_form;
mod error;
pub mod montecarlo;
pub mod oracle;
pub mod polygon;

pub use closed_form::{ExactProb, ProblemParams};
pub use error::{Error, Result};
pub use montecarlo::{SimConfig, SimEstimate};
pub use oracle::{Budget, ExactCount, Partition};
pub use polygon::{Inventory, PolygonRealization};
