//! Approximation algorithms for restricted max-min fair allocation, together
//! with exact oracles and checkable infeasibility certificates.
//!
//! Two solvers share the same partial-allocation machinery:
//!
//! * [`approx`] grows a stack of layers of addable and blocking thin edges and
//!   collapses them through node-disjoint alternating paths; its output is
//!   within a factor `4 + δ` of the optimum.
//! * [`afs`] is the simpler alternating-tree local search with threshold
//!   `26/99`, not known to run in polynomial time.
//!
//! Both are driven by a bisection over targets ([`search`]). A rejected
//! target comes with a [`DualCertificate`] that [`oracle::check_dual`] can
//! verify on small instances.

pub mod afs;
pub mod alloc;
pub mod approx;
pub mod dual;
pub mod error;
pub mod generate;
pub mod graphs;
pub mod instance;
pub mod oracle;
pub mod search;
pub mod stats;
pub mod value;

pub use dual::DualCertificate;
pub use error::{AllocError, GraphError, InstanceError, OracleError, SolveError};
pub use instance::{allocation_value, load_instance, min_value, save_instance, Allocation, Instance};
pub use search::{AssertLevel, SolveOutcome};
pub use stats::Stats;
pub use value::Value;
