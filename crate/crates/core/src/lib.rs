//! Peer data exchange with null-based repairs.
//!
//! Peers own disjoint relational schemas and are linked by data exchange
//! constraints. Each peer computes its solutions by repairing the union of
//! its own data and its neighbors' cores, under a null-based or a
//! symmetric-difference preorder. Answers true in every solution are the
//! peer consistent answers. The crate also compiles the semantics into
//! disjunctive logic programs and solves them with a built-in stable-model
//! engine.

pub mod asp;
pub mod chase;
pub mod cli;
pub mod dec;
pub mod defs;
pub mod error;
pub mod import;
pub mod lexer;
pub mod nullquery;
pub mod pdes;
pub mod relational;
pub mod repair;

pub use error::{Error, Result};
