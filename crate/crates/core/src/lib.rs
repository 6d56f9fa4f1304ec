//! Simulation and analysis of online oblivious RAMs under adversarial
//! workloads.
//!
//! Engines turn logical operations into server probes. The adversary sees
//! only the probed addresses, builds the access graph of the trace and
//! searches it for dense partitions, which either certify a lower bound on
//! the number of probes or tell two workloads apart.

pub mod adversary;
pub mod engine;
pub mod error;
pub mod graph;
pub mod model;
pub mod partition;
pub mod report;
pub mod seed;
pub mod server;
pub mod tracefile;
pub mod trials;
pub mod workload;

pub use engine::{run_sequence, run_sequence_with, Engine, EngineKind, RunOutcome};
pub use error::{Error, Result};
pub use graph::{build_access_graph, AccessGraph};
pub use model::{InputOp, InputSequence, OpKind, OramConfig, Word};
pub use partition::{greedy_dense_partition, Partition, Rational};
pub use server::{AccessSequence, Recording, Server, ServerState};
pub use tracefile::TraceFile;
pub use workload::{BlockLayout, WorkloadSpec};
