use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::store::MetadataStore;
use crate::error::Error;

/// Column name to value. Before-images carry only the changed columns,
/// after-images the full committed row.
pub type Row = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Table {
    DagDefinition,
    DagRun,
    TaskInstance,
}

impl Table {
    pub const ALL: [Table; 3] = [Table::DagDefinition, Table::DagRun, Table::TaskInstance];

    pub fn as_str(self) -> &'static str {
        match self {
            Table::DagDefinition => "dag_definition",
            Table::DagRun => "dag_run",
            Table::TaskInstance => "task_instance",
        }
    }
}

impl FromStr for Table {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Table::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTable(s.to_string()))
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Insert,
    Update,
}

/// Primary key of a row: the table plus `dag_id`, `run_id` or `run_id/task_id`.
pub type RowKey = (Table, String);

/// One committed mutation of the metadata store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdcRecord {
    pub commit_seq: u64,
    pub table: Table,
    pub op: Op,
    pub before_image: Row,
    pub after_image: Row,
    pub commit_time: f64,
}

impl CdcRecord {
    pub fn key(&self) -> RowKey {
        (self.table, row_key(self.table, &self.after_image))
    }

    pub fn field(&self, name: &str) -> Option<&Value> {
        self.after_image.get(name)
    }

    pub fn str_field(&self, name: &str) -> Option<&str> {
        self.after_image.get(name).and_then(Value::as_str)
    }

    /// True if the record changed column `name` (inserts change everything).
    pub fn changed(&self, name: &str) -> bool {
        self.op == Op::Insert || self.before_image.contains_key(name)
    }
}

pub(crate) fn row_key(table: Table, row: &Row) -> String {
    let get = |k: &str| row.get(k).and_then(Value::as_str).unwrap_or_default();
    match table {
        Table::DagDefinition => get("dag_id").to_string(),
        Table::DagRun => get("run_id").to_string(),
        Table::TaskInstance => format!("{}/{}", get("run_id"), get("task_id")),
    }
}

/// Folds after-images in commit order into the latest row per key.
pub fn fold_log<'a, I>(records: I) -> BTreeMap<RowKey, Row>
where
    I: IntoIterator<Item = &'a CdcRecord>,
{
    let mut rows = BTreeMap::new();
    for record in records {
        rows.insert(record.key(), record.after_image.clone());
    }
    rows
}

/// Replayable reader over the change log.
///
/// `poll` hands out everything after the durable checkpoint; only `ack`
/// advances the checkpoint. A crash between the two loses nothing: the
/// restarted subscriber re-reads from the checkpoint and the consumer drops
/// records whose `commit_seq` it already applied.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CdcSubscriber {
    checkpoint: u64,
}

impl CdcSubscriber {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn resume_from(checkpoint: u64) -> Self {
        CdcSubscriber { checkpoint }
    }

    pub fn checkpoint(&self) -> u64 {
        self.checkpoint
    }

    pub fn poll<'a>(&self, store: &'a MetadataStore) -> &'a [CdcRecord] {
        store.drain_cdc(self.checkpoint)
    }

    pub fn ack(&mut self, commit_seq: u64) {
        self.checkpoint = self.checkpoint.max(commit_seq);
    }
}
