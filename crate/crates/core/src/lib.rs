//! Streaming Max-DICUT estimation and the random-instance machinery used to
//! probe its limits.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: directed multigraphs, vertex biases, bias-class density
//!   matrices, the oblivious value estimate and an exhaustive Max-DICUT oracle.
//! - [`stream`]: edge streams in given or seeded-random order, reservoir
//!   sampling, logical space meters and the one/two-pass execution drivers.
//! - [`hashing`]: k-wise independent hashing over GF(2^r).
//! - [`algorithms`]: the random-order, two-pass and bounded-degree estimators
//!   written as streaming state machines.
//! - [`csp`]: Max-CSP instances over Z_q, brute-force values, the minimum
//!   value `rho_min`, and the randomized-mask-detection stream sampler.
//! - [`hypergraph`]: random k-hypergraphs, incidence-graph components,
//!   cycle-freeness and brute-force labelling counts.
//! - [`suites`]: the fixed-seed verification suites shared by the CLI and the
//!   acceptance tests.

pub mod algorithms;
pub mod csp;
pub mod graph;
pub mod hashing;
pub mod hypergraph;
pub mod seeding;
pub mod stream;
pub mod suites;
