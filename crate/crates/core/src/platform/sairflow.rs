//! The event-driven pipeline: store → CDC → router → queues → scheduler and
//! executors, all on one virtual clock.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::engine::Agenda;
use super::model::PlatformModel;
use super::scenario::{Scenario, System};
use super::state::PlatformState;
use super::trace::{TraceCounters, TraceEvent, TraceLog};
use crate::error::{Error, Result};
use crate::events::{
    CdcForwarder, Destination, EventQueue, Ordering, PeriodicTrigger, RoutedEvent,
    ScheduleRegistry,
};
use crate::executor::{AttemptOutcome, Executor, ExecutorConfig, LogRecord, TaskAttempt};
use crate::model::{ExecutorKind, MetadataStore};
use crate::scheduler::Scheduler;

#[derive(Debug)]
enum Ev {
    QueueReady(Destination),
    SchedulerRun,
    SchedulerDone,
    UpdaterRun(RoutedEvent),
    Trigger(PeriodicTrigger),
    ExecArrive(Destination, RoutedEvent),
    ExecStart(usize),
    ExecEnd(usize),
    LogsPushed(usize),
}

/// Function executor, tasks on their hinted executor.
pub fn run_sairflow(scenario: &Scenario, platform: &PlatformModel, seed: u64) -> Result<TraceLog> {
    run_sairflow_as(System::SairflowFaas, scenario, platform, seed)
}

pub(crate) fn run_sairflow_as(
    system: System,
    scenario: &Scenario,
    model: &PlatformModel,
    seed: u64,
) -> Result<TraceLog> {
    model.validate()?;
    scenario.validate(system, model)?;
    let mut sim = Sim::new(model, seed);
    for dag in scenario.dags_for(system) {
        sim.store.register_dag(dag, 0.0)?;
    }
    sim.pump(0.0)?;
    sim.run()?;
    Ok(TraceLog {
        system,
        rng_seed: seed,
        config: serde_json::to_value(model)?,
        end_time: sim.now,
        store: sim.store.snapshot(),
        events: sim.events,
        attempts: sim.attempts,
        logs: sim.logs,
        workers: Vec::new(),
        counters: sim.counters,
    })
}

struct Sim<'a> {
    model: &'a PlatformModel,
    now: f64,
    store: MetadataStore,
    platform: PlatformState,
    forwarder: CdcForwarder,
    pumped: u64,
    scheduler: Scheduler,
    registry: ScheduleRegistry,
    queues: BTreeMap<Destination, EventQueue>,
    seen: BTreeMap<Destination, BTreeSet<u64>>,
    scheduler_busy: bool,
    function: Executor,
    container: Executor,
    throttled: VecDeque<RoutedEvent>,
    attempts: Vec<TaskAttempt>,
    logs: Vec<LogRecord>,
    events: Vec<TraceEvent>,
    counters: TraceCounters,
    agenda: Agenda<Ev>,
}

impl<'a> Sim<'a> {
    fn new(model: &'a PlatformModel, seed: u64) -> Self {
        let mut queues = BTreeMap::new();
        queues.insert(
            Destination::Scheduler,
            EventQueue::scheduler(model.scheduler_batch_size),
        );
        for dest in [
            Destination::ScheduleUpdater,
            Destination::FunctionExecutor,
            Destination::ContainerExecutor,
        ] {
            queues.insert(dest, EventQueue::new(dest.as_str(), Ordering::Unordered, 1));
        }
        Sim {
            model,
            now: 0.0,
            store: MetadataStore::new(),
            platform: PlatformState::new(model.clone(), seed),
            forwarder: CdcForwarder::new(model.cdc_latency_s, model.queue_hop_s),
            pumped: 0,
            scheduler: Scheduler::new(model.scheduler.clone()),
            registry: ScheduleRegistry::new(),
            queues,
            seen: BTreeMap::new(),
            scheduler_busy: false,
            function: Executor::new(ExecutorConfig::function(model)),
            container: Executor::new(ExecutorConfig::container(model)),
            throttled: VecDeque::new(),
            attempts: Vec::new(),
            logs: Vec::new(),
            events: Vec::new(),
            counters: TraceCounters::default(),
            agenda: Agenda::new(),
        }
    }

    fn trace(&mut self, time: f64, kind: &str, payload: impl Into<String>) {
        self.events.push(TraceEvent {
            time,
            kind: kind.to_string(),
            payload: payload.into(),
        });
    }

    fn queue(&mut self, dest: Destination) -> &mut EventQueue {
        self.queues.get_mut(&dest).expect("every destination has a queue")
    }

    /// Forwards every record committed since the last pump; the records
    /// become visible to the capture stream at `visible_at`.
    fn pump(&mut self, visible_at: f64) -> Result<()> {
        let records = self.store.drain_cdc(self.pumped).to_vec();
        for rec in records {
            self.pumped = rec.commit_seq;
            self.counters.cdc_records += 1;
            let mut payload = format!("#{} {} {}", rec.commit_seq, rec.table, rec.key().1);
            if let Some(state) = rec.str_field("state") {
                payload.push(' ');
                payload.push_str(state);
            }
            self.trace(rec.commit_time, "commit", payload);
            let routed = self.forwarder.forward(&rec, visible_at, &mut self.platform.rng)?;
            if routed.is_empty() {
                self.counters.dropped_changes += 1;
            }
            for (event, dest) in routed {
                self.counters.routed_events += 1;
                self.enqueue(event, dest);
            }
        }
        Ok(())
    }

    fn enqueue(&mut self, event: RoutedEvent, dest: Destination) {
        self.trace(
            event.emit_time,
            "enqueue",
            format!("{} {} -> {}", event.kind, event.payload(), dest.as_str()),
        );
        let at = event.deliver_time;
        self.queue(dest).push(event);
        self.agenda.at(at, Ev::QueueReady(dest));
    }

    /// True the first time an event's commit is seen by `dest`.
    fn first_delivery(&mut self, dest: Destination, event: &RoutedEvent) -> bool {
        let Some(seq) = event.commit_seq else {
            return true;
        };
        let fresh = self.seen.entry(dest).or_default().insert(seq);
        if !fresh {
            self.counters.duplicate_deliveries += 1;
        }
        fresh
    }

    fn rearm(&mut self, dest: Destination) {
        let now = self.now;
        if let Some(t) = self.queue(dest).next_ready_time() {
            if t > now {
                self.agenda.at(t, Ev::QueueReady(dest));
            }
        }
    }

    fn wake_scheduler(&mut self) {
        let now = self.now;
        if self.scheduler_busy {
            return;
        }
        match self.queue(Destination::Scheduler).next_ready_time() {
            Some(t) if t <= now => {
                self.scheduler_busy = true;
                self.counters.scheduler_invocations += 1;
                self.agenda
                    .at(now + self.model.scheduler_invoke_s, Ev::SchedulerRun);
            }
            Some(_) => self.rearm(Destination::Scheduler),
            None => {}
        }
    }

    fn run(&mut self) -> Result<()> {
        while let Some((t, ev)) = self.agenda.pop() {
            self.now = t;
            if t > self.model.max_sim_time_s || self.agenda.popped() > self.model.max_events {
                return Err(Error::NonTermination(format!(
                    "guard hit at t={t:.3} after {} events",
                    self.agenda.popped()
                )));
            }
            self.step(ev)?;
        }
        self.counters.sim_events = self.agenda.popped();
        self.counters.peak_function_concurrency = self.platform.peak_in_flight_functions;
        if let Some(run) = self.store.running_runs().next() {
            return Err(Error::NonTermination(format!(
                "run {} still running when no events remain",
                run.run_id
            )));
        }
        Ok(())
    }

    fn step(&mut self, ev: Ev) -> Result<()> {
        let now = self.now;
        match ev {
            Ev::QueueReady(Destination::Scheduler) => self.wake_scheduler(),
            Ev::QueueReady(Destination::ScheduleUpdater) => {
                loop {
                    let batch = self.queue(Destination::ScheduleUpdater).deliver(now);
                    if batch.is_empty() {
                        break;
                    }
                    for event in batch {
                        if self.first_delivery(Destination::ScheduleUpdater, &event) {
                            self.trace(now, "deliver", format!("{} {}", event.kind, event.payload()));
                            self.agenda
                                .at(now + self.model.updater_invoke_s, Ev::UpdaterRun(event));
                        }
                    }
                }
                self.rearm(Destination::ScheduleUpdater);
            }
            Ev::QueueReady(dest) => {
                loop {
                    let batch = self.queue(dest).deliver(now);
                    if batch.is_empty() {
                        break;
                    }
                    for event in batch {
                        if self.first_delivery(dest, &event) {
                            self.trace(now, "deliver", format!("{} {}", event.kind, event.payload()));
                            self.agenda
                                .at(now + self.model.executor_hop_s, Ev::ExecArrive(dest, event));
                        }
                    }
                }
                self.rearm(dest);
            }
            Ev::SchedulerRun => {
                let delivered = self.queue(Destination::Scheduler).deliver(now);
                let mut batch = Vec::with_capacity(delivered.len());
                for event in delivered {
                    if self.first_delivery(Destination::Scheduler, &event) {
                        self.trace(now, "deliver", format!("{} {}", event.kind, event.payload()));
                        batch.push(event);
                    }
                }
                self.counters.scheduler_events += batch.len() as u64;
                let actions = self.scheduler.scheduling_pass(&batch, &mut self.store, now);
                self.trace(
                    now,
                    "pass",
                    format!("events={} actions={}", batch.len(), actions.len()),
                );
                let done = now + self.model.scheduler_pass_s;
                self.pump(done)?;
                self.agenda.at(done, Ev::SchedulerDone);
            }
            Ev::SchedulerDone => {
                self.scheduler_busy = false;
                self.wake_scheduler();
            }
            Ev::UpdaterRun(event) => {
                let triggers = self.registry.schedule_update(&event, &self.store, now)?;
                self.trace(
                    now,
                    "schedule_update",
                    format!("{} triggers={}", event.dag_id, triggers.len()),
                );
                for trig in triggers {
                    self.agenda.at(trig.fire_time, Ev::Trigger(trig));
                }
            }
            Ev::Trigger(trig) => {
                if self.registry.is_current(&trig) {
                    let event = trig.to_event(self.model.queue_hop_s);
                    self.trace(now, "trigger", event.payload());
                    self.enqueue(event, Destination::Scheduler);
                }
            }
            Ev::ExecArrive(dest, event) => {
                if dest == Destination::FunctionExecutor && !self.platform.has_function_capacity() {
                    self.trace(now, "throttled", event.payload());
                    self.throttled.push_back(event);
                } else {
                    self.dispatch(dest, &event)?;
                }
            }
            Ev::ExecStart(i) => {
                let exec = self.executor_for(self.attempts[i].executor).clone();
                exec.start(&mut self.attempts[i], &mut self.store, &mut self.platform, now)?;
                let a = &self.attempts[i];
                let (end, payload) = (a.exec_end_time, format!("{} in_flight={}", a.key(), a.concurrent_starts));
                self.trace(now, "exec_start", payload);
                self.pump(now)?;
                self.agenda.at(end, Ev::ExecEnd(i));
            }
            Ev::ExecEnd(i) => {
                let exec = self.executor_for(self.attempts[i].executor).clone();
                exec.finish(&mut self.attempts[i], &mut self.store, now)?;
                let a = &self.attempts[i];
                let payload = format!("{} {:?}", a.key(), a.outcome).to_lowercase();
                if a.outcome == AttemptOutcome::TimedOut {
                    self.trace(now, "timeout", a.key().to_string());
                }
                self.trace(now, "exec_end", payload);
                self.pump(now)?;
                self.agenda.at(now + self.model.log_push_s, Ev::LogsPushed(i));
            }
            Ev::LogsPushed(i) => {
                let exec = self.executor_for(self.attempts[i].executor).clone();
                let log = exec.push_logs(&mut self.attempts[i], &mut self.platform, now);
                let key = self.attempts[i].key().to_string();
                match log {
                    Some(log) => {
                        self.logs.push(log);
                        self.trace(now, "logs_pushed", key);
                    }
                    None => self.trace(now, "log_lost", key),
                }
                while self.platform.has_function_capacity() {
                    let Some(event) = self.throttled.pop_front() else { break };
                    self.dispatch(Destination::FunctionExecutor, &event)?;
                }
            }
        }
        Ok(())
    }

    fn executor_for(&self, kind: ExecutorKind) -> &Executor {
        match kind {
            ExecutorKind::Function => &self.function,
            ExecutorKind::Container => &self.container,
        }
    }

    fn dispatch(&mut self, dest: Destination, event: &RoutedEvent) -> Result<()> {
        let now = self.now;
        let exec = match dest {
            Destination::ContainerExecutor => &self.container,
            _ => &self.function,
        };
        let attempt = exec.dispatch(event, &self.store, &mut self.platform, now)?;
        match attempt.executor {
            ExecutorKind::Function => self.counters.function_invocations += 1,
            ExecutorKind::Container => self.counters.container_invocations += 1,
        }
        self.counters.executor_store_reads += attempt.store_reads;
        let payload = format!(
            "{} {} {}",
            attempt.key(),
            attempt.executor,
            if attempt.warm { "warm" } else { "cold" }
        );
        self.trace(now, "invoke", payload);
        let start = attempt.exec_start_time;
        self.attempts.push(attempt);
        self.agenda.at(start, Ev::ExecStart(self.attempts.len() - 1));
        Ok(())
    }
}
