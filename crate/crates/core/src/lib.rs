//! Simulator and verification harness for single-qubit delegated multiparty
//! computation of the pairwise AND.
//!
//! A server prepares one qubit in `|0>` and routes it through a chain of
//! clients. Each client holds an input bit `x_i` and a random padding bit
//! `r_i` and applies `V^r_i U^x_i` with `U = R_y(pi/2)` and `V = R_y(pi)`.
//! After a final `(U^dagger)^(x_1 ^ ... ^ x_n)`, computed with XOR-only
//! classical sharing, the server measures `r ^ f(x)` and the clients strip
//! the padding.
//!
//! Modules:
//!
//! * [`qubit`]: exact single-qubit states, rotations, measurement and density matrices.
//! * [`oracle`]: classical ground truth for the pairwise AND in two forms.
//! * [`protocol`]: party state machines, the XOR share routine, the qubit chain and transcripts.
//! * [`security`]: blinding, outcome flatness, share privacy and transcript leakage checks.
//! * [`photonic`]: half-wave-plate compilation and the Monte Carlo noise model.
//! * [`cli`]: the command line front end used by the `qmpc` binary.
//! * [`exec`]: sequential/parallel execution of independent work items.

pub mod cli;
pub mod error;
pub mod exec;
pub mod oracle;
pub mod photonic;
pub mod protocol;
pub mod qubit;
pub mod security;

pub use error::{Error, Result};
pub use oracle::BitVector;
