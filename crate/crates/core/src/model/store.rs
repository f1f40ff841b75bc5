use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::cdc::{CdcRecord, Op, Row, RowKey, Table};
use super::types::{
    DagDefinition, DagRun, EntityRef, RunState, TargetState, TaskInstance, TaskKey, TaskState,
};
use crate::error::{Error, Result};

/// The metadata database. All mutations go through one commit point that
/// appends exactly one [`CdcRecord`] per committed row change, under a single
/// gapless `commit_seq` counter.
#[derive(Debug, Default)]
pub struct MetadataStore {
    dags: BTreeMap<String, DagDefinition>,
    runs: BTreeMap<String, DagRun>,
    tasks: BTreeMap<TaskKey, TaskInstance>,
    running_runs: BTreeSet<String>,
    log: Vec<CdcRecord>,
    reads: Cell<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreSnapshot {
    pub dags: Vec<DagDefinition>,
    pub runs: Vec<DagRun>,
    pub tasks: Vec<TaskInstance>,
    pub last_commit_seq: u64,
}

impl MetadataStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_dag(&mut self, def: DagDefinition, now: f64) -> Result<CdcRecord> {
        def.validate()?;
        if self.dags.contains_key(&def.dag_id) {
            return Err(Error::DuplicateDagId(def.dag_id));
        }
        let after = dag_row(&def);
        self.dags.insert(def.dag_id.clone(), def);
        Ok(self.commit(Table::DagDefinition, Op::Insert, Row::new(), after, now))
    }

    /// Replaces an already registered definition (a re-parsed DAG file).
    pub fn update_dag(&mut self, def: DagDefinition, now: f64) -> Result<CdcRecord> {
        def.validate()?;
        let Some(old) = self.dags.get(&def.dag_id) else {
            return Err(Error::UnknownDag(def.dag_id));
        };
        let old_row = dag_row(old);
        let after = dag_row(&def);
        let before = diff(&old_row, &after);
        self.dags.insert(def.dag_id.clone(), def);
        Ok(self.commit(Table::DagDefinition, Op::Update, before, after, now))
    }

    /// Inserts a running DAG run and one `none` task instance per task.
    /// Returns the run's record followed by the task-instance records.
    pub fn create_dag_run(
        &mut self,
        dag_id: &str,
        run_id: &str,
        logical_time: f64,
        now: f64,
    ) -> Result<Vec<CdcRecord>> {
        let def = self
            .dags
            .get(dag_id)
            .ok_or_else(|| Error::UnknownDag(dag_id.to_string()))?
            .clone();
        if self.runs.contains_key(run_id) {
            return Err(Error::IllegalTransition {
                entity: format!("dag_run {run_id}"),
                from: "existing".into(),
                to: RunState::Running.to_string(),
            });
        }
        let run = DagRun {
            run_id: run_id.to_string(),
            dag_id: dag_id.to_string(),
            logical_time,
            state: RunState::Running,
            start_time: now,
            end_time: None,
        };
        let mut records = Vec::with_capacity(def.tasks.len() + 1);
        let after = run_row(&run);
        self.runs.insert(run_id.to_string(), run);
        self.running_runs.insert(run_id.to_string());
        records.push(self.commit(Table::DagRun, Op::Insert, Row::new(), after, now));
        for spec in &def.tasks {
            let ti = TaskInstance {
                run_id: run_id.to_string(),
                task_id: spec.task_id.clone(),
                dag_id: dag_id.to_string(),
                state: TaskState::None,
                executor: spec.executor_hint,
                duration_s: spec.duration_s,
                ready_time: None,
                start_time: None,
                completion_time: None,
                try_number: 0,
            };
            let after = task_row(&ti);
            self.tasks.insert(ti.key(), ti);
            records.push(self.commit(Table::TaskInstance, Op::Insert, Row::new(), after, now));
        }
        Ok(records)
    }

    /// Applies one state-machine step atomically and returns its record.
    pub fn apply_transition(
        &mut self,
        entity: &EntityRef,
        target: TargetState,
        now: f64,
    ) -> Result<CdcRecord> {
        match (entity, target) {
            (EntityRef::Task(key), TargetState::Task(next)) => self.transition_task(key, next, now),
            (EntityRef::DagRun { run_id }, TargetState::Run(next)) => {
                self.transition_run(run_id, next, now)
            }
            (entity, target) => Err(Error::IllegalTransition {
                entity: entity.to_string(),
                from: "-".into(),
                to: format!("{target:?}"),
            }),
        }
    }

    fn transition_task(&mut self, key: &TaskKey, next: TaskState, now: f64) -> Result<CdcRecord> {
        let ti = self
            .tasks
            .get_mut(key)
            .ok_or_else(|| Error::UnknownEntity(format!("task {key}")))?;
        if !ti.state.can_become(next) {
            return Err(Error::IllegalTransition {
                entity: format!("task {key}"),
                from: ti.state.to_string(),
                to: next.to_string(),
            });
        }
        let old_row = task_row(ti);
        let retry = ti.state == TaskState::Failed;
        ti.state = next;
        match next {
            TaskState::Scheduled => {
                if retry {
                    ti.start_time = None;
                    ti.completion_time = None;
                }
                if ti.ready_time.is_none() {
                    ti.ready_time = Some(now);
                }
            }
            TaskState::Running => {
                ti.start_time = Some(now);
                ti.try_number += 1;
            }
            TaskState::Success | TaskState::Failed => ti.completion_time = Some(now),
            TaskState::Queued | TaskState::None => {}
        }
        debug_assert!(timestamps_ordered(ti), "timestamps out of order for {key}");
        let after = task_row(ti);
        let before = diff(&old_row, &after);
        Ok(self.commit(Table::TaskInstance, Op::Update, before, after, now))
    }

    fn transition_run(&mut self, run_id: &str, next: RunState, now: f64) -> Result<CdcRecord> {
        let run = self
            .runs
            .get_mut(run_id)
            .ok_or_else(|| Error::UnknownEntity(format!("dag_run {run_id}")))?;
        if !run.state.can_become(next) {
            return Err(Error::IllegalTransition {
                entity: format!("dag_run {run_id}"),
                from: run.state.to_string(),
                to: next.to_string(),
            });
        }
        let old_row = run_row(run);
        run.state = next;
        run.end_time = Some(now);
        self.running_runs.remove(run_id);
        let after = run_row(&self.runs[run_id]);
        let before = diff(&old_row, &after);
        Ok(self.commit(Table::DagRun, Op::Update, before, after, now))
    }

    fn commit(&mut self, table: Table, op: Op, before: Row, after: Row, now: f64) -> CdcRecord {
        let record = CdcRecord {
            commit_seq: self.log.len() as u64 + 1,
            table,
            op,
            before_image: before,
            after_image: after,
            commit_time: now,
        };
        self.log.push(record.clone());
        record
    }

    /// Every record with `commit_seq > after_seq`, in commit order.
    pub fn drain_cdc(&self, after_seq: u64) -> &[CdcRecord] {
        let start = (after_seq as usize).min(self.log.len());
        &self.log[start..]
    }

    pub fn last_commit_seq(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn dag(&self, dag_id: &str) -> Option<&DagDefinition> {
        self.dags.get(dag_id)
    }

    pub fn dags(&self) -> impl Iterator<Item = &DagDefinition> {
        self.dags.values()
    }

    pub fn run(&self, run_id: &str) -> Option<&DagRun> {
        self.runs.get(run_id)
    }

    pub fn runs(&self) -> impl Iterator<Item = &DagRun> {
        self.runs.values()
    }

    pub fn running_runs(&self) -> impl Iterator<Item = &DagRun> {
        self.running_runs.iter().map(|id| &self.runs[id])
    }

    pub fn task(&self, key: &TaskKey) -> Option<&TaskInstance> {
        self.tasks.get(key)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &TaskInstance> {
        self.tasks.values()
    }

    pub fn run_tasks<'a>(&'a self, run_id: &'a str) -> impl Iterator<Item = &'a TaskInstance> + 'a {
        let start = TaskKey::new(run_id, "");
        self.tasks
            .range(start..)
            .take_while(move |(k, _)| k.run_id == run_id)
            .map(|(_, v)| v)
    }

    /// Counted read used by workers; lets tests bound store traffic per attempt.
    pub fn read_task(&self, key: &TaskKey) -> Option<&TaskInstance> {
        self.reads.set(self.reads.get() + 1);
        self.tasks.get(key)
    }

    /// Counted read of a DAG definition (the worker's "pull DAG files" step).
    pub fn read_dag(&self, dag_id: &str) -> Option<&DagDefinition> {
        self.reads.set(self.reads.get() + 1);
        self.dags.get(dag_id)
    }

    pub fn read_count(&self) -> u64 {
        self.reads.get()
    }

    /// Current rows keyed like [`fold_log`](super::fold_log) output.
    pub fn rows(&self) -> BTreeMap<RowKey, Row> {
        let mut out = BTreeMap::new();
        for d in self.dags.values() {
            out.insert((Table::DagDefinition, d.dag_id.clone()), dag_row(d));
        }
        for r in self.runs.values() {
            out.insert((Table::DagRun, r.run_id.clone()), run_row(r));
        }
        for t in self.tasks.values() {
            out.insert((Table::TaskInstance, t.key().to_string()), task_row(t));
        }
        out
    }

    pub fn snapshot(&self) -> StoreSnapshot {
        StoreSnapshot {
            dags: self.dags.values().cloned().collect(),
            runs: self.runs.values().cloned().collect(),
            tasks: self.tasks.values().cloned().collect(),
            last_commit_seq: self.last_commit_seq(),
        }
    }
}

fn timestamps_ordered(ti: &TaskInstance) -> bool {
    let le = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => a <= b,
        _ => true,
    };
    le(ti.ready_time, ti.start_time)
        && le(ti.start_time, ti.completion_time)
        && le(ti.ready_time, ti.completion_time)
}

fn as_row(value: Value) -> Row {
    match value {
        Value::Object(map) => map.into_iter().collect(),
        _ => Row::new(),
    }
}

fn dag_row(def: &DagDefinition) -> Row {
    as_row(json!({
        "dag_id": def.dag_id,
        "period_minutes": def.period_minutes,
        "run_count": def.run_count,
        "task_count": def.tasks.len(),
        "definition": serde_json::to_value(def).unwrap_or(Value::Null),
    }))
}

fn run_row(run: &DagRun) -> Row {
    as_row(serde_json::to_value(run).unwrap_or(Value::Null))
}

fn task_row(ti: &TaskInstance) -> Row {
    as_row(serde_json::to_value(ti).unwrap_or(Value::Null))
}

/// Columns of `old` whose value differs in `new`, with their old values.
fn diff(old: &Row, new: &Row) -> Row {
    old.iter()
        .filter(|(k, v)| new.get(*k) != Some(*v))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}
