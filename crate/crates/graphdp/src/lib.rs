//! Node-differentially-private edge-density estimation for graphs whose
//! degrees concentrate around the average, plus the machinery to check the
//! claims: lower-bound witness pairs, a sensitivity probe, and a Monte Carlo
//! experiment harness.
//!
//! The crate is organized around five pieces:
//!
//! * [`graph`] — immutable simple graphs, degree statistics, Erdos-Renyi
//!   sampling, single-node rewiring;
//! * [`noise`] — seedable Laplace and Student-t samplers (see the module
//!   docs for the deployment entropy caveat);
//! * [`estimators`] — the naive Laplace release, the concentrated-degree
//!   estimator built on smooth sensitivity, and the two-stage Erdos-Renyi
//!   estimator;
//! * [`witness`] — graph pairs certifying how much error any node-private
//!   estimator must incur;
//! * [`harness`] — reproducible experiment grids with CSV output and the
//!   smoothness/witness audits.

pub mod edgelist;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod harness;
pub mod noise;
pub mod witness;

pub use error::{Error, Result};
pub use estimators::{
    estimate_concentrated, estimate_er, naive_estimate, BetaRule, CdParams, ErParams,
    EstimatorKind, PrivateEstimate,
};
pub use graph::{
    concentration_parameter, degree_summary, edge_density, pair_count, rewire_node, sample_er,
    Graph,
};
pub use noise::{sample_laplace, sample_student_t3, RandomStream};
pub use witness::{witness_large_k, witness_small_k, WitnessPair};
