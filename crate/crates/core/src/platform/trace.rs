use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::System;
use crate::error::Result;
use crate::executor::{LogRecord, TaskAttempt};
use crate::model::{StoreSnapshot, TaskKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: String,
    pub payload: String,
}

/// Lifetime of one baseline worker node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerSpan {
    pub worker_id: usize,
    /// Part of the always-on minimum pool.
    pub base: bool,
    pub requested: f64,
    pub ready: f64,
    pub released: Option<f64>,
}

impl WorkerSpan {
    /// Seconds between ready and release (or `end` if still up).
    pub fn up_s(&self, end: f64) -> f64 {
        (self.released.unwrap_or(end) - self.ready).max(0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceCounters {
    pub cdc_records: u64,
    pub routed_events: u64,
    pub dropped_changes: u64,
    pub scheduler_invocations: u64,
    pub scheduler_events: u64,
    pub duplicate_deliveries: u64,
    pub function_invocations: u64,
    pub container_invocations: u64,
    pub peak_function_concurrency: usize,
    pub peak_running_tasks: usize,
    pub executor_store_reads: u64,
    pub sim_events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLog {
    pub system: System,
    pub rng_seed: u64,
    /// The model the trace was produced with.
    pub config: serde_json::Value,
    pub events: Vec<TraceEvent>,
    #[serde(default)]
    pub attempts: Vec<TaskAttempt>,
    #[serde(default)]
    pub logs: Vec<LogRecord>,
    #[serde(default)]
    pub workers: Vec<WorkerSpan>,
    pub counters: TraceCounters,
    pub store: StoreSnapshot,
    pub end_time: f64,
}

fn opt3(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_default()
}

impl TraceLog {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Warm flag of the most recent attempt per task.
    fn warm_flags(&self) -> BTreeMap<TaskKey, bool> {
        self.attempts.iter().map(|a| (a.key(), a.warm)).collect()
    }

    /// `run_id,task_id,v_i,s_i,c_i,warm,executor`
    pub fn write_tasks_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["run_id", "task_id", "v_i", "s_i", "c_i", "warm", "executor"])?;
        let warm = self.warm_flags();
        let baseline = self.system == System::Baseline;
        for t in &self.store.tasks {
            let warm = if baseline {
                t.start_time.is_some()
            } else {
                warm.get(&t.key()).copied().unwrap_or(false)
            };
            let executor = if baseline { "worker" } else { t.executor.as_str() };
            w.write_record([
                t.run_id.as_str(),
                t.task_id.as_str(),
                &opt3(t.ready_time),
                &opt3(t.start_time),
                &opt3(t.completion_time),
                if warm { "true" } else { "false" },
                executor,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `time,kind,payload`
    pub fn write_events_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["time", "kind", "payload"])?;
        for e in &self.events {
            w.write_record([format!("{:.3}", e.time).as_str(), &e.kind, &e.payload])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `trace.json`, `tasks.csv` and `events.csv` into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("trace.json"), self.to_json()?)?;
        self.write_tasks_csv(fs::File::create(dir.join("tasks.csv"))?)?;
        self.write_events_csv(fs::File::create(dir.join("events.csv"))?)?;
        Ok(())
    }

    pub fn events_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a TraceEvent> + 'a {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}
