//! Event-driven serverless workflow orchestration on top of a deterministic
//! discrete-event model of a cloud platform.
//!
//! The control plane is built around one idea: every state change is a
//! committed row in the [`model::MetadataStore`], and the store's ordered
//! change log is the only source of control-plane events. Those records are
//! routed by [`events`] to the [`scheduler`] (through a single-shard FIFO
//! queue) and to the function and container [`executor`]s. The
//! [`platform`] module drives everything in virtual time and also models the
//! polling, worker-pool based baseline. [`workloads`], [`metrics`] and
//! [`cost`] cover DAG generation and analysis, run metrics and the monetary
//! cost model.

pub mod cost;
pub mod error;
pub mod events;
pub mod executor;
pub mod metrics;
pub mod model;
pub mod platform;
pub mod scheduler;
pub mod stats;
pub mod workloads;

pub use error::{Error, Result};
