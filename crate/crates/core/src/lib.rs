//! Exact computations with properads, strong homotopy properads and homotopy transfer.

pub mod bimodule;
pub mod catalog;
pub mod config;
pub mod digraph;
pub mod error;
pub mod free;
pub mod graph;
pub mod instance;
pub mod linalg;
pub mod merkulov;
pub mod perm;
pub mod properad;
pub mod sample;
pub mod shape;
pub mod suite;
pub mod transfer;
pub mod trees;

pub use error::{Error, GraphViolation, Result};
