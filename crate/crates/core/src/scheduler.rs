//! The event-triggered scheduling pass.
//!
//! One pass runs per delivered batch and goes through four stages: create
//! DAG runs for periodic triggers, schedule tasks whose predecessors all
//! succeeded (plus retries of failed tasks), queue every scheduled task, and
//! close runs that are complete or have exhausted their retries. Every action
//! is committed through [`MetadataStore`] so it shows up in the change log.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EventKind, RoutedEvent};
use crate::model::{EntityRef, MetadataStore, RunState, TargetState, TaskKey, TaskState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerConfig {
    /// Total attempts per task, first try included.
    pub max_tries: u32,
    /// Queue root tasks in the pass that creates the run instead of waiting
    /// for the run's own change event.
    pub queue_roots_on_create: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            max_tries: 2,
            queue_roots_on_create: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    CreateDagRun,
    MarkScheduled,
    MarkQueued,
    MarkRunComplete,
    MarkRunFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerAction {
    pub kind: ActionKind,
    pub target: EntityRef,
}

impl SchedulerAction {
    fn task(kind: ActionKind, key: TaskKey) -> Self {
        SchedulerAction {
            kind,
            target: EntityRef::Task(key),
        }
    }

    fn run(kind: ActionKind, run_id: &str) -> Self {
        SchedulerAction {
            kind,
            target: EntityRef::run(run_id),
        }
    }
}

/// Run ids are derived from the trigger so a replayed trigger is a no-op.
pub fn run_id_for(dag_id: &str, run_index: u32) -> String {
    format!("{dag_id}__run{run_index:04}")
}

#[derive(Debug, Clone, Default)]
pub struct Scheduler {
    pub config: SchedulerConfig,
}

impl Scheduler {
    pub fn new(config: SchedulerConfig) -> Self {
        Scheduler { config }
    }

    /// Executes one pass over `events` and returns the actions it applied,
    /// in application order.
    pub fn scheduling_pass(
        &self,
        events: &[RoutedEvent],
        store: &mut MetadataStore,
        now: f64,
    ) -> Vec<SchedulerAction> {
        let mut actions = Vec::new();

        // (1) DAG runs for periodic triggers.
        let mut created = BTreeSet::new();
        for event in events.iter().filter(|e| e.kind == EventKind::PeriodicTrigger) {
            let Some(index) = event.run_index else {
                log::warn!("periodic trigger for {} without run index", event.dag_id);
                continue;
            };
            if store.dag(&event.dag_id).is_none() {
                log::warn!("periodic trigger for unknown DAG {}", event.dag_id);
                continue;
            }
            let run_id = run_id_for(&event.dag_id, index);
            if store.run(&run_id).is_some() {
                continue;
            }
            match store.create_dag_run(&event.dag_id, &run_id, event.emit_time, now) {
                Ok(_) => {
                    actions.push(SchedulerAction::run(ActionKind::CreateDagRun, &run_id));
                    created.insert(run_id);
                }
                Err(err) => log::warn!("cannot create {run_id}: {err}"),
            }
        }

        // A run nobody has started yet is started by its creation event,
        // so replaying a trigger alone never starts it.
        let announced: BTreeSet<&str> = events
            .iter()
            .filter(|e| e.kind == EventKind::DagRunCreated)
            .filter_map(|e| e.run_id.as_deref())
            .collect();
        let eligible: Vec<String> = store
            .running_runs()
            .filter(|r| {
                if self.config.queue_roots_on_create {
                    return true;
                }
                !created.contains(&r.run_id)
                    && (announced.contains(r.run_id.as_str())
                        || store.run_tasks(&r.run_id).any(|t| t.state != TaskState::None))
            })
            .map(|r| r.run_id.clone())
            .collect();

        // (2) retries of failed tasks and newly ready tasks.
        let mut to_schedule: Vec<(f64, TaskKey)> = Vec::new();
        for event in events.iter().filter(|e| e.kind == EventKind::TaskFailed) {
            match self.handle_task_failure(event, store) {
                Ok(Some(SchedulerAction {
                    kind: ActionKind::MarkScheduled,
                    target: EntityRef::Task(key),
                })) => {
                    let v = store.task(&key).and_then(|t| t.ready_time).unwrap_or(now);
                    if !to_schedule.iter().any(|(_, k)| k == &key) {
                        to_schedule.push((v, key));
                    }
                }
                Ok(_) => {}
                Err(err) => log::warn!("skipping failure event: {err}"),
            }
        }
        for run_id in &eligible {
            to_schedule.extend(ready_tasks(store, run_id).into_iter().map(|k| (now, k)));
        }
        sort_by_ready_then_id(&mut to_schedule);
        for (_, key) in to_schedule {
            let entity = EntityRef::Task(key.clone());
            if store
                .apply_transition(&entity, TargetState::Task(TaskState::Scheduled), now)
                .is_ok()
            {
                actions.push(SchedulerAction::task(ActionKind::MarkScheduled, key));
            }
        }

        // (3) everything scheduled becomes queued.
        let mut to_queue: Vec<(f64, TaskKey)> = eligible
            .iter()
            .flat_map(|run_id| store.run_tasks(run_id))
            .filter(|t| t.state == TaskState::Scheduled)
            .map(|t| (t.ready_time.unwrap_or(now), t.key()))
            .collect();
        sort_by_ready_then_id(&mut to_queue);
        for (_, key) in to_queue {
            let entity = EntityRef::Task(key.clone());
            if store
                .apply_transition(&entity, TargetState::Task(TaskState::Queued), now)
                .is_ok()
            {
                actions.push(SchedulerAction::task(ActionKind::MarkQueued, key));
            }
        }

        // (4) run completion.
        let running: Vec<String> = store.running_runs().map(|r| r.run_id.clone()).collect();
        for run_id in running {
            let mut all_success = true;
            let mut exhausted = false;
            for t in store.run_tasks(&run_id) {
                all_success &= t.state == TaskState::Success;
                exhausted |= t.state == TaskState::Failed && t.try_number >= self.config.max_tries;
            }
            let (kind, next) = if all_success {
                (ActionKind::MarkRunComplete, RunState::Success)
            } else if exhausted {
                (ActionKind::MarkRunFailed, RunState::Failed)
            } else {
                continue;
            };
            if store
                .apply_transition(&EntityRef::run(&run_id), TargetState::Run(next), now)
                .is_ok()
            {
                actions.push(SchedulerAction::run(kind, &run_id));
            }
        }
        actions
    }

    /// Decides what a `task_failed` event leads to: a retry while tries
    /// remain, otherwise failing the run. Stale events yield nothing.
    pub fn handle_task_failure(
        &self,
        event: &RoutedEvent,
        store: &MetadataStore,
    ) -> Result<Option<SchedulerAction>> {
        let (Some(run_id), Some(task_id)) = (&event.run_id, &event.task_id) else {
            return Err(Error::UnknownTask(event.payload()));
        };
        let key = TaskKey::new(run_id.clone(), task_id.clone());
        let task = store
            .task(&key)
            .ok_or_else(|| Error::UnknownTask(key.to_string()))?;
        let run_state = store.run(run_id).map(|r| r.state);
        if run_state != Some(RunState::Running) || task.state != TaskState::Failed {
            return Ok(None);
        }
        if task.try_number < self.config.max_tries {
            Ok(Some(SchedulerAction::task(ActionKind::MarkScheduled, key)))
        } else {
            Ok(Some(SchedulerAction::run(ActionKind::MarkRunFailed, run_id)))
        }
    }
}

fn ready_tasks(store: &MetadataStore, run_id: &str) -> Vec<TaskKey> {
    let Some(run) = store.run(run_id) else {
        return Vec::new();
    };
    let Some(def) = store.dag(&run.dag_id) else {
        log::warn!("run {run_id} references unknown DAG {}", run.dag_id);
        return Vec::new();
    };
    def.tasks
        .iter()
        .filter(|spec| {
            let key = TaskKey::new(run_id, spec.task_id.clone());
            store.task(&key).is_some_and(|t| t.state == TaskState::None)
                && spec.predecessors.iter().all(|p| {
                    store
                        .task(&TaskKey::new(run_id, p.clone()))
                        .is_some_and(|t| t.state == TaskState::Success)
                })
        })
        .map(|spec| TaskKey::new(run_id, spec.task_id.clone()))
        .collect()
}

fn sort_by_ready_then_id(items: &mut [(f64, TaskKey)]) {
    items.sort_by(|(va, ka), (vb, kb)| {
        va.total_cmp(vb)
            .then_with(|| ka.task_id.cmp(&kb.task_id))
            .then_with(|| ka.run_id.cmp(&kb.run_id))
    });
}
