//! Fault-tolerant distance labels built on length-constrained expander hierarchies.

pub mod codec;
pub mod cover;
pub mod cuts;
pub mod decoder;
pub mod error;
pub mod flow;
pub mod graph;
pub mod harness;
pub mod hierarchy;
pub mod hitting;
pub mod labels;
pub mod oracle;
pub mod par;
pub mod rational;
pub mod tree;
pub mod tz;
pub mod weights;

pub use error::{Error, Result};
