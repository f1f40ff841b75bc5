//! The event plane: routing committed changes to consumers and delivering
//! them through latency-bearing queues.
//!
//! | change                                   | event            | destination          |
//! |------------------------------------------|------------------|----------------------|
//! | `dag_definition` insert/update           | `dag_parsed`     | schedule updater     |
//! | `dag_run` insert                         | `dag_run_created`| scheduler queue      |
//! | `task_instance` update, state → queued   | `task_queued`    | executor per hint    |
//! | `task_instance` update, state → success  | `task_finished`  | scheduler queue      |
//! | `task_instance` update, state → failed   | `task_failed`    | scheduler queue      |
//! | anything else                            | dropped          |                      |

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CdcRecord, ExecutorKind, MetadataStore, Op, Table, TaskState};
use crate::stats::Latency;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    DagParsed,
    PeriodicTrigger,
    DagRunCreated,
    TaskQueued,
    TaskFinished,
    TaskFailed,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::DagParsed => "dag_parsed",
            EventKind::PeriodicTrigger => "periodic_trigger",
            EventKind::DagRunCreated => "dag_run_created",
            EventKind::TaskQueued => "task_queued",
            EventKind::TaskFinished => "task_finished",
            EventKind::TaskFailed => "task_failed",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Destination {
    ScheduleUpdater,
    Scheduler,
    FunctionExecutor,
    ContainerExecutor,
}

impl Destination {
    pub fn for_executor(kind: ExecutorKind) -> Self {
        match kind {
            ExecutorKind::Function => Destination::FunctionExecutor,
            ExecutorKind::Container => Destination::ContainerExecutor,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Destination::ScheduleUpdater => "schedule_updater",
            Destination::Scheduler => "scheduler",
            Destination::FunctionExecutor => "function_executor",
            Destination::ContainerExecutor => "container_executor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedEvent {
    pub kind: EventKind,
    pub dag_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_id: Option<String>,
    /// Position of a periodic trigger in its schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_index: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commit_seq: Option<u64>,
    pub emit_time: f64,
    pub deliver_time: f64,
}

impl RoutedEvent {
    pub fn payload(&self) -> String {
        let mut parts = vec![self.dag_id.clone()];
        if let Some(r) = &self.run_id {
            parts.push(r.clone());
        }
        if let Some(t) = &self.task_id {
            parts.push(t.clone());
        }
        if let Some(i) = self.run_index {
            parts.push(format!("#{i}"));
        }
        parts.join("/")
    }
}

/// Maps one committed change to its routed events (zero or one).
pub fn route(record: &CdcRecord) -> Result<Vec<(RoutedEvent, Destination)>> {
    let malformed = |reason: &str| Error::MalformedRecord {
        seq: record.commit_seq,
        reason: reason.to_string(),
    };
    let dag_id = record
        .str_field("dag_id")
        .ok_or_else(|| malformed("missing dag_id"))?
        .to_string();
    let event = |kind: EventKind, run_id: Option<String>, task_id: Option<String>| RoutedEvent {
        kind,
        dag_id: dag_id.clone(),
        run_id,
        task_id,
        run_index: None,
        commit_seq: Some(record.commit_seq),
        emit_time: record.commit_time,
        deliver_time: record.commit_time,
    };
    let routed = match (record.table, record.op) {
        (Table::DagDefinition, _) => vec![(
            event(EventKind::DagParsed, None, None),
            Destination::ScheduleUpdater,
        )],
        (Table::DagRun, Op::Insert) => {
            let run_id = record.str_field("run_id").ok_or_else(|| malformed("missing run_id"))?;
            vec![(
                event(EventKind::DagRunCreated, Some(run_id.to_string()), None),
                Destination::Scheduler,
            )]
        }
        (Table::DagRun, Op::Update) | (Table::TaskInstance, Op::Insert) => Vec::new(),
        (Table::TaskInstance, Op::Update) => {
            if !record.changed("state") {
                return Ok(Vec::new());
            }
            let state = record
                .str_field("state")
                .and_then(TaskState::parse)
                .ok_or_else(|| malformed("missing or unknown state"))?;
            let run_id = record.str_field("run_id").ok_or_else(|| malformed("missing run_id"))?;
            let task_id = record.str_field("task_id").ok_or_else(|| malformed("missing task_id"))?;
            let ids = || (Some(run_id.to_string()), Some(task_id.to_string()));
            match state {
                TaskState::Queued => {
                    let executor: ExecutorKind = record
                        .field("executor")
                        .cloned()
                        .map(serde_json::from_value)
                        .transpose()
                        .map_err(|_| malformed("unknown executor"))?
                        .unwrap_or_default();
                    let (r, t) = ids();
                    vec![(
                        event(EventKind::TaskQueued, r, t),
                        Destination::for_executor(executor),
                    )]
                }
                TaskState::Success => {
                    let (r, t) = ids();
                    vec![(event(EventKind::TaskFinished, r, t), Destination::Scheduler)]
                }
                TaskState::Failed => {
                    let (r, t) = ids();
                    vec![(event(EventKind::TaskFailed, r, t), Destination::Scheduler)]
                }
                TaskState::None | TaskState::Scheduled | TaskState::Running => Vec::new(),
            }
        }
    };
    Ok(routed)
}

/// The change-data-capture path: an ordered stream from the store's log to
/// the router, followed by one queue hop.
#[derive(Debug, Clone)]
pub struct CdcForwarder {
    pub latency: Latency,
    pub queue_hop_s: f64,
    last_arrival: f64,
}

impl CdcForwarder {
    pub fn new(latency: Latency, queue_hop_s: f64) -> Self {
        CdcForwarder {
            latency,
            queue_hop_s,
            last_arrival: f64::NEG_INFINITY,
        }
    }

    /// Samples the capture latency for `record` (published at `visible_at`)
    /// and routes it. Arrivals at the router never overtake earlier records.
    pub fn forward<R: Rng + ?Sized>(
        &mut self,
        record: &CdcRecord,
        visible_at: f64,
        rng: &mut R,
    ) -> Result<Vec<(RoutedEvent, Destination)>> {
        let lag = self.latency.sample(rng);
        let arrival = round_ms((visible_at + lag).max(self.last_arrival));
        self.last_arrival = arrival;
        let mut routed = route(record)?;
        for (event, _) in &mut routed {
            event.emit_time = record.commit_time;
            event.deliver_time = round_ms(arrival + self.queue_hop_s);
        }
        Ok(routed)
    }
}

pub(crate) fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    FifoTotalOrder,
    Unordered,
}

#[derive(Debug, Clone)]
pub struct EventQueue {
    pub name: String,
    pub ordering: Ordering,
    pub batch_size: usize,
    items: VecDeque<RoutedEvent>,
    enqueued: u64,
    last_deliver: f64,
}

impl EventQueue {
    pub fn new(name: impl Into<String>, ordering: Ordering, batch_size: usize) -> Self {
        EventQueue {
            name: name.into(),
            ordering,
            batch_size: batch_size.max(1),
            items: VecDeque::new(),
            enqueued: 0,
            last_deliver: f64::NEG_INFINITY,
        }
    }

    /// Single-shard scheduler queue.
    pub fn scheduler(batch_size: usize) -> Self {
        Self::new("scheduler", Ordering::FifoTotalOrder, batch_size)
    }

    pub fn push(&mut self, mut event: RoutedEvent) {
        if self.ordering == Ordering::FifoTotalOrder {
            event.deliver_time = event.deliver_time.max(self.last_deliver);
            self.last_deliver = event.deliver_time;
        }
        self.enqueued += 1;
        self.items.push_back(event);
    }

    /// Up to `batch_size` events whose delivery time has passed. A FIFO
    /// queue stops at the first event that is not yet deliverable.
    pub fn deliver(&mut self, now: f64) -> Vec<RoutedEvent> {
        let mut batch = Vec::new();
        match self.ordering {
            Ordering::FifoTotalOrder => {
                while batch.len() < self.batch_size {
                    match self.items.front() {
                        Some(e) if e.deliver_time <= now => {
                            batch.extend(self.items.pop_front());
                        }
                        _ => break,
                    }
                }
            }
            Ordering::Unordered => {
                let mut ready: Vec<usize> = (0..self.items.len())
                    .filter(|&i| self.items[i].deliver_time <= now)
                    .collect();
                ready.sort_by(|&a, &b| {
                    self.items[a]
                        .deliver_time
                        .total_cmp(&self.items[b].deliver_time)
                        .then(a.cmp(&b))
                });
                ready.truncate(self.batch_size);
                ready.sort_unstable_by(|a, b| b.cmp(a));
                let mut picked: Vec<RoutedEvent> = ready
                    .into_iter()
                    .filter_map(|i| self.items.remove(i))
                    .collect();
                picked.sort_by(|a, b| a.deliver_time.total_cmp(&b.deliver_time));
                batch = picked;
            }
        }
        batch
    }

    pub fn next_ready_time(&self) -> Option<f64> {
        match self.ordering {
            Ordering::FifoTotalOrder => self.items.front().map(|e| e.deliver_time),
            Ordering::Unordered => self
                .items
                .iter()
                .map(|e| e.deliver_time)
                .min_by(f64::total_cmp),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn enqueued_total(&self) -> u64 {
        self.enqueued
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicTrigger {
    pub dag_id: String,
    pub run_index: u32,
    pub fire_time: f64,
    pub generation: u64,
}

impl PeriodicTrigger {
    pub fn to_event(&self, queue_hop_s: f64) -> RoutedEvent {
        RoutedEvent {
            kind: EventKind::PeriodicTrigger,
            dag_id: self.dag_id.clone(),
            run_id: None,
            task_id: None,
            run_index: Some(self.run_index),
            commit_seq: None,
            emit_time: self.fire_time,
            deliver_time: round_ms(self.fire_time + queue_hop_s),
        }
    }
}

/// The cron-like trigger registry fed by `dag_parsed` events.
#[derive(Debug, Clone, Default)]
pub struct ScheduleRegistry {
    schedules: BTreeMap<String, (u64, Vec<PeriodicTrigger>)>,
    next_generation: u64,
}

impl ScheduleRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers the schedule of the parsed DAG, firing first at `anchor`.
    /// Any previous schedule of the same DAG is replaced.
    pub fn schedule_update(
        &mut self,
        event: &RoutedEvent,
        store: &MetadataStore,
        anchor: f64,
    ) -> Result<Vec<PeriodicTrigger>> {
        let def = store
            .dag(&event.dag_id)
            .ok_or_else(|| Error::UnknownDag(event.dag_id.clone()))?;
        self.next_generation += 1;
        let generation = self.next_generation;
        let period_s = def.period_minutes * 60.0;
        let triggers: Vec<PeriodicTrigger> = (0..def.run_count)
            .map(|k| PeriodicTrigger {
                dag_id: def.dag_id.clone(),
                run_index: k,
                fire_time: round_ms(anchor + k as f64 * period_s),
                generation,
            })
            .collect();
        self.schedules
            .insert(def.dag_id.clone(), (generation, triggers.clone()));
        Ok(triggers)
    }

    /// False once the trigger's schedule has been replaced.
    pub fn is_current(&self, trigger: &PeriodicTrigger) -> bool {
        self.schedules
            .get(&trigger.dag_id)
            .is_some_and(|(g, _)| *g == trigger.generation)
    }

    pub fn triggers(&self, dag_id: &str) -> &[PeriodicTrigger] {
        self.schedules
            .get(dag_id)
            .map(|(_, t)| t.as_slice())
            .unwrap_or(&[])
    }
}
