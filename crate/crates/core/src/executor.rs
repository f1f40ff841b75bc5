//! Function and container executors.
//!
//! Both follow the same worker steps: invoke, pull configuration, pull DAG
//! files, run the task, push logs. Nothing here polls: the worker commits the
//! task's terminal state itself, and that commit is what wakes the scheduler.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{round_ms, RoutedEvent};
use crate::model::{
    CdcRecord, EntityRef, ExecutorKind, MetadataStore, TargetState, TaskKey, TaskState,
};
use crate::platform::{sample_invocation, PlatformModel, PlatformState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutorConfig {
    pub kind: ExecutorKind,
    /// `None` means unbounded.
    pub max_duration_s: Option<f64>,
    pub worker_memory_mb: f64,
    pub worker_vcpu: f64,
}

impl ExecutorConfig {
    pub fn function(model: &PlatformModel) -> Self {
        ExecutorConfig {
            kind: ExecutorKind::Function,
            max_duration_s: Some(model.function_max_duration_s),
            worker_memory_mb: model.function_memory_mb,
            // one vCPU per 1769 MB of function memory
            worker_vcpu: model.function_memory_mb / 1769.0,
        }
    }

    pub fn container(model: &PlatformModel) -> Self {
        ExecutorConfig {
            kind: ExecutorKind::Container,
            max_duration_s: None,
            worker_memory_mb: model.container_memory_mb,
            worker_vcpu: model.container_vcpu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptOutcome {
    Pending,
    Success,
    Failed,
    TimedOut,
}

/// One try of one task instance on a worker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskAttempt {
    pub run_id: String,
    pub task_id: String,
    pub dag_id: String,
    pub try_number: u32,
    pub executor: ExecutorKind,
    pub duration_s: f64,
    pub invoke_time: f64,
    pub config_pulled_time: f64,
    pub dag_pulled_time: f64,
    pub exec_start_time: f64,
    pub exec_end_time: f64,
    pub logs_pushed_time: f64,
    pub warm: bool,
    pub env_id: Option<u64>,
    pub concurrent_starts: usize,
    pub inflation_s: f64,
    pub outcome: AttemptOutcome,
    pub logs_lost: bool,
    pub store_reads: u64,
}

impl TaskAttempt {
    pub fn key(&self) -> TaskKey {
        TaskKey::new(self.run_id.clone(), self.task_id.clone())
    }

    pub fn timestamps(&self) -> [f64; 6] {
        [
            self.invoke_time,
            self.config_pulled_time,
            self.dag_pulled_time,
            self.exec_start_time,
            self.exec_end_time,
            self.logs_pushed_time,
        ]
    }
}

/// Text pushed to log storage at the end of an attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub run_id: String,
    pub task_id: String,
    pub try_number: u32,
    pub time: f64,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Executor {
    pub config: ExecutorConfig,
}

impl Executor {
    pub fn new(config: ExecutorConfig) -> Self {
        Executor { config }
    }

    /// Steps 1 to 3 for a `task_queued` event: invoke the worker and pull
    /// config and DAG. The returned attempt has its start time planned;
    /// `start`, `finish` and `push_logs` complete it.
    pub fn dispatch(
        &self,
        event: &RoutedEvent,
        store: &MetadataStore,
        platform: &mut PlatformState,
        now: f64,
    ) -> Result<TaskAttempt> {
        let reads_before = store.read_count();
        let (Some(run_id), Some(task_id)) = (&event.run_id, &event.task_id) else {
            return Err(Error::UnknownTask(event.payload()));
        };
        let key = TaskKey::new(run_id.clone(), task_id.clone());
        let task = store
            .read_task(&key)
            .ok_or_else(|| Error::UnknownTask(key.to_string()))?;
        if task.state != TaskState::Queued {
            return Err(Error::IllegalTransition {
                entity: format!("task {key}"),
                from: task.state.to_string(),
                to: "dispatched".into(),
            });
        }
        let (dag_id, try_number) = (task.dag_id.clone(), task.try_number + 1);
        let duration_s = store
            .read_dag(&dag_id)
            .and_then(|d| d.task(task_id))
            .map(|t| t.duration_s)
            .ok_or_else(|| Error::UnknownDag(dag_id.clone()))?;
        if let Some(limit) = self.config.max_duration_s {
            if duration_s > limit {
                return Err(Error::DurationExceedsLimit {
                    task_id: task_id.clone(),
                    duration_s,
                    limit_s: limit,
                });
            }
        }

        let PlatformState {
            model, pool, rng, ..
        } = platform;
        let inv = sample_invocation(self.config.kind, pool, model, rng, now);
        let handler = round_ms(now + inv.latency_s);
        let config_pulled = round_ms(handler + inv.setup_s / 2.0);
        let dag_pulled = round_ms(handler + inv.setup_s);

        platform.in_flight += 1;
        if self.config.kind == ExecutorKind::Function {
            platform.in_flight_functions += 1;
            platform.peak_in_flight_functions = platform
                .peak_in_flight_functions
                .max(platform.in_flight_functions);
        }
        Ok(TaskAttempt {
            run_id: run_id.clone(),
            task_id: task_id.clone(),
            dag_id,
            try_number,
            executor: self.config.kind,
            duration_s,
            invoke_time: now,
            config_pulled_time: config_pulled,
            dag_pulled_time: dag_pulled,
            exec_start_time: dag_pulled,
            exec_end_time: dag_pulled,
            logs_pushed_time: dag_pulled,
            warm: inv.warm,
            env_id: inv.env_id,
            concurrent_starts: 0,
            inflation_s: 0.0,
            outcome: AttemptOutcome::Pending,
            logs_lost: false,
            store_reads: store.read_count() - reads_before,
        })
    }

    /// Step 4: the task starts (`s_i`). Execution time is the workload
    /// plus database contention from every attempt currently in flight.
    pub fn start(
        &self,
        attempt: &mut TaskAttempt,
        store: &mut MetadataStore,
        platform: &mut PlatformState,
        now: f64,
    ) -> Result<CdcRecord> {
        let record = store.apply_transition(
            &EntityRef::Task(attempt.key()),
            TargetState::Task(TaskState::Running),
            now,
        )?;
        attempt.exec_start_time = now;
        attempt.concurrent_starts = platform.in_flight;
        attempt.inflation_s = platform.model.contention_inflation(platform.in_flight);
        let failed = platform.rng.gen::<f64>() < platform.model.failure_probability;
        let mut end = round_ms(now + attempt.duration_s + attempt.inflation_s);
        attempt.outcome = if failed {
            AttemptOutcome::Failed
        } else {
            AttemptOutcome::Success
        };
        if let Some(limit) = self.config.max_duration_s {
            let deadline = round_ms(attempt.invoke_time + limit);
            if end > deadline {
                end = deadline;
                attempt.outcome = AttemptOutcome::TimedOut;
            }
        }
        attempt.exec_end_time = end;
        Ok(record)
    }

    /// The task body returned: commit its terminal state (`c_i`).
    pub fn finish(
        &self,
        attempt: &mut TaskAttempt,
        store: &mut MetadataStore,
        now: f64,
    ) -> Result<CdcRecord> {
        attempt.exec_end_time = now;
        match attempt.outcome {
            AttemptOutcome::Success => store.apply_transition(
                &EntityRef::Task(attempt.key()),
                TargetState::Task(TaskState::Success),
                now,
            ),
            AttemptOutcome::Failed | AttemptOutcome::TimedOut => handle_failure(attempt, store, now),
            AttemptOutcome::Pending => Err(Error::IllegalTransition {
                entity: format!("task {}", attempt.key()),
                from: "pending".into(),
                to: "finished".into(),
            }),
        }
    }

    /// Step 5: push logs and hand the environment back to the pool.
    /// Returns `None` if the push was lost.
    pub fn push_logs(
        &self,
        attempt: &mut TaskAttempt,
        platform: &mut PlatformState,
        now: f64,
    ) -> Option<LogRecord> {
        attempt.logs_pushed_time = now;
        platform.in_flight = platform.in_flight.saturating_sub(1);
        if attempt.executor == ExecutorKind::Function {
            platform.in_flight_functions = platform.in_flight_functions.saturating_sub(1);
        }
        if let Some(env) = attempt.env_id {
            platform.pool.release(env, now);
        }
        attempt.logs_lost =
            platform.rng.gen::<f64>() < platform.model.log_push_failure_probability;
        if attempt.logs_lost {
            return None;
        }
        Some(LogRecord {
            run_id: attempt.run_id.clone(),
            task_id: attempt.task_id.clone(),
            try_number: attempt.try_number,
            time: now,
            text: format!(
                "[{}] try {} on {} ({}): invoked {:.3}, started {:.3}, ended {:.3}, outcome {:?}",
                attempt.key(),
                attempt.try_number,
                attempt.executor,
                if attempt.warm { "warm" } else { "cold" },
                attempt.invoke_time,
                attempt.exec_start_time,
                attempt.exec_end_time,
                attempt.outcome,
            ),
        })
    }
}

/// Failure handler: commits `failed` for the attempt's task.
pub fn handle_failure(
    attempt: &TaskAttempt,
    store: &mut MetadataStore,
    now: f64,
) -> Result<CdcRecord> {
    store.apply_transition(
        &EntityRef::Task(attempt.key()),
        TargetState::Task(TaskState::Failed),
        now,
    )
}
