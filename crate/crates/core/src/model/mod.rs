//! Domain types, the metadata store and its committed-change log.

mod cdc;
mod store;
mod types;

pub use cdc::{fold_log, CdcRecord, CdcSubscriber, Op, Row, RowKey, Table};
pub use store::{MetadataStore, StoreSnapshot};
pub use types::{
    DagDefinition, DagRun, EntityRef, ExecutorKind, RunState, TargetState, TaskInstance, TaskKey,
    TaskSpec, TaskState,
};
