//! Hash chains that reference each other's blocks, and the time order those
//! references imply.
//!
//! - [`chain`]: blocks, chains, network snapshots and verification.
//! - [`order`]: the happens-before DAG, admissible total orders and metrics.
//! - [`sim`]: a tick-based simulator producing snapshots and traces.
//! - [`io`]: file formats, reports and Graphviz export.
//! - [`cli`]: the `hashorder` command-line tool.

pub mod chain;
pub mod cli;
pub mod io;
pub mod order;
pub mod sim;
