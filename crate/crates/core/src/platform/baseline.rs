//! The polling comparator: a scheduler loop every `poll_interval_s` and a
//! worker pool with slow scale-out.

use std::collections::{BTreeSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::engine::Agenda;
use super::model::BaselineModel;
use super::scenario::{Scenario, System};
use super::trace::{TraceCounters, TraceEvent, TraceLog, WorkerSpan};
use crate::error::{Error, Result};
use crate::events::{EventKind, RoutedEvent};
use crate::model::{EntityRef, MetadataStore, RunState, TargetState, TaskKey, TaskState};
use crate::scheduler::{Scheduler, SchedulerConfig};

#[derive(Debug)]
enum Ev {
    Tick,
    WorkerReady(usize),
    TaskStart(TaskKey, usize),
    TaskEnd(TaskKey, usize),
}

struct Worker {
    span: WorkerSpan,
    busy: usize,
}

impl Worker {
    fn up(&self, now: f64) -> bool {
        self.span.ready <= now && self.span.released.is_none()
    }
}

pub fn run_baseline(scenario: &Scenario, model: &BaselineModel, seed: u64) -> Result<TraceLog> {
    model.validate()?;
    scenario.validate(System::Baseline, &Default::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = MetadataStore::new();
    let mut events: Vec<TraceEvent> = Vec::new();
    let mut counters = TraceCounters::default();
    let trace = |events: &mut Vec<TraceEvent>, time: f64, kind: &str, payload: String| {
        events.push(TraceEvent {
            time,
            kind: kind.to_string(),
            payload,
        })
    };

    // Triggers fire on the period grid from time zero.
    let mut triggers: VecDeque<RoutedEvent> = VecDeque::new();
    {
        let mut all = Vec::new();
        for dag in scenario.dags_for(System::Baseline) {
            for k in 0..dag.run_count {
                let fire = k as f64 * dag.period_minutes * 60.0;
                all.push(RoutedEvent {
                    kind: EventKind::PeriodicTrigger,
                    dag_id: dag.dag_id.clone(),
                    run_id: None,
                    task_id: None,
                    run_index: Some(k),
                    commit_seq: None,
                    emit_time: fire,
                    deliver_time: fire,
                });
            }
            store.register_dag(dag, 0.0)?;
        }
        all.sort_by(|a, b| {
            a.emit_time
                .total_cmp(&b.emit_time)
                .then_with(|| a.dag_id.cmp(&b.dag_id))
        });
        triggers.extend(all);
    }

    let scheduler = Scheduler::new(SchedulerConfig {
        queue_roots_on_create: true,
        ..Default::default()
    });
    let mut workers: Vec<Worker> = (0..model.min_workers)
        .map(|id| Worker {
            span: WorkerSpan {
                worker_id: id,
                base: true,
                requested: 0.0,
                ready: 0.0,
                released: None,
            },
            busy: 0,
        })
        .collect();
    let mut assigned: BTreeSet<TaskKey> = BTreeSet::new();
    let mut running = 0usize;
    let mut agenda: Agenda<Ev> = Agenda::new();
    agenda.at(0.0, Ev::Tick);
    let poll = model.poll_interval_s;
    let mut now = 0.0;

    while let Some((t, ev)) = agenda.pop() {
        now = t;
        if t > model.max_sim_time_s || agenda.popped() > model.max_events {
            return Err(Error::NonTermination(format!(
                "guard hit at t={t:.3} after {} events",
                agenda.popped()
            )));
        }
        match ev {
            Ev::WorkerReady(w) => {
                trace(&mut events, now, "worker_ready", format!("worker-{w}"));
            }
            Ev::TaskStart(key, w) => {
                store.apply_transition(
                    &EntityRef::Task(key.clone()),
                    TargetState::Task(TaskState::Running),
                    now,
                )?;
                running += 1;
                counters.peak_running_tasks = counters.peak_running_tasks.max(running);
                let p = store.task(&key).map(|t| t.duration_s).unwrap_or(0.0);
                trace(&mut events, now, "exec_start", format!("{key} worker-{w}"));
                agenda.at(now + p, Ev::TaskEnd(key, w));
            }
            Ev::TaskEnd(key, w) => {
                store.apply_transition(
                    &EntityRef::Task(key.clone()),
                    TargetState::Task(TaskState::Success),
                    now,
                )?;
                running -= 1;
                workers[w].busy -= 1;
                assigned.remove(&key);
                trace(&mut events, now, "exec_end", format!("{key} success"));
            }
            Ev::Tick => {
                let mut batch = Vec::new();
                while triggers.front().is_some_and(|e| e.emit_time <= now) {
                    let e = triggers.pop_front().expect("checked");
                    trace(&mut events, now, "trigger", e.payload());
                    batch.push(e);
                }
                let actions = scheduler.scheduling_pass(&batch, &mut store, now);
                counters.scheduler_invocations += 1;
                if !actions.is_empty() || !batch.is_empty() {
                    trace(
                        &mut events,
                        now,
                        "pass",
                        format!("events={} actions={}", batch.len(), actions.len()),
                    );
                }

                // Hand queued tasks to free slots, oldest first.
                let mut queued: Vec<(f64, TaskKey)> = store
                    .tasks()
                    .filter(|t| t.state == TaskState::Queued && !assigned.contains(&t.key()))
                    .map(|t| (t.ready_time.unwrap_or(now), t.key()))
                    .collect();
                queued.sort_by(|(va, a), (vb, b)| {
                    va.total_cmp(vb)
                        .then_with(|| a.task_id.cmp(&b.task_id))
                        .then_with(|| a.run_id.cmp(&b.run_id))
                });
                let mut waiting = 0usize;
                for (_, key) in queued {
                    let slot = workers
                        .iter()
                        .position(|w| w.up(now) && w.busy < model.slots_per_worker);
                    match slot {
                        Some(w) => {
                            workers[w].busy += 1;
                            assigned.insert(key.clone());
                            agenda.at(now + model.per_task_launch_s, Ev::TaskStart(key, w));
                        }
                        None => waiting += 1,
                    }
                }

                // Scale out by the whole deficit in one wave.
                let pending_slots: usize = workers
                    .iter()
                    .filter(|w| w.span.ready > now && w.span.released.is_none())
                    .count()
                    * model.slots_per_worker;
                let active = workers.iter().filter(|w| w.span.released.is_none()).count();
                if waiting > pending_slots {
                    let wanted = (waiting - pending_slots).div_ceil(model.slots_per_worker);
                    let add = wanted.min(model.max_workers.saturating_sub(active));
                    for _ in 0..add {
                        let id = workers.len();
                        let ready = crate::events::round_ms(now + model.worker_provision_s.sample(&mut rng));
                        workers.push(Worker {
                            span: WorkerSpan {
                                worker_id: id,
                                base: false,
                                requested: now,
                                ready,
                                released: None,
                            },
                            busy: 0,
                        });
                        trace(&mut events, now, "worker_requested", format!("worker-{id}"));
                        agenda.at(ready, Ev::WorkerReady(id));
                    }
                }

                let idle = store.running_runs().next().is_none() && assigned.is_empty();
                if idle {
                    // Scale back in once nothing is left to do.
                    for w in workers.iter_mut().filter(|w| !w.span.base && w.span.released.is_none()) {
                        w.span.released = Some(now.max(w.span.ready));
                        trace(
                            &mut events,
                            now,
                            "worker_released",
                            format!("worker-{}", w.span.worker_id),
                        );
                    }
                    match triggers.front() {
                        Some(next) => {
                            let k = (next.emit_time / poll).ceil().max((now / poll).floor() + 1.0);
                            agenda.at(k * poll, Ev::Tick);
                        }
                        None => break,
                    }
                } else {
                    agenda.at(now + poll, Ev::Tick);
                }
            }
        }
    }
    counters.sim_events = agenda.popped();

    if let Some(run) = store.runs().find(|r| r.state == RunState::Running) {
        return Err(Error::NonTermination(format!("run {} never finished", run.run_id)));
    }
    Ok(TraceLog {
        system: System::Baseline,
        rng_seed: seed,
        config: serde_json::to_value(model)?,
        events,
        attempts: Vec::new(),
        logs: Vec::new(),
        workers: workers.into_iter().map(|w| w.span).collect(),
        counters,
        store: store.snapshot(),
        end_time: now,
    })
}
