//! Per-run metrics: makespan, task durations and waits, and overheads.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RunState, TaskInstance};
use crate::platform::TraceLog;
use crate::stats::{mean, quantile};
use crate::workloads::{analyze, DagShapeStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run_id: String,
    pub dag_id: String,
    pub run_index: Option<u32>,
    pub state: RunState,
    /// max c_i − min v_i over the run's tasks.
    pub c_max: f64,
    pub stats: DagShapeStats,
    /// c_i − s_i per task, in task order.
    pub durations: Vec<f64>,
    /// s_i − v_i per task.
    pub waits: Vec<f64>,
    pub overhead: f64,
    pub normalized_overhead: f64,
}

/// `(C_max − p_d) · n_L / n_W`
pub fn normalized_overhead(c_max: f64, stats: &DagShapeStats) -> f64 {
    if stats.n_w == 0 {
        return 0.0;
    }
    (c_max - stats.p_d) * stats.n_l as f64 / stats.n_w as f64
}

fn run_index(run_id: &str) -> Option<u32> {
    run_id.rsplit_once("__run")?.1.parse().ok()
}

/// Metrics of one terminal run from its task instances.
pub fn run_metrics(
    run_id: &str,
    dag_id: &str,
    state: RunState,
    tasks: &[&TaskInstance],
    stats: DagShapeStats,
) -> Result<RunMetrics> {
    let incomplete = |why: String| Error::IncompleteTrace(format!("run {run_id}: {why}"));
    if state == RunState::Running {
        return Err(incomplete("still running".into()));
    }
    if tasks.is_empty() {
        return Err(incomplete("no task instances".into()));
    }
    let (mut durations, mut waits) = (Vec::new(), Vec::new());
    let mut first_ready = f64::INFINITY;
    let mut last_done = f64::NEG_INFINITY;
    for t in tasks {
        match (t.ready_time, t.start_time, t.completion_time) {
            (Some(v), Some(s), Some(c)) => {
                waits.push(s - v);
                durations.push(c - s);
                first_ready = first_ready.min(v);
                last_done = last_done.max(c);
            }
            _ if state == RunState::Success => {
                return Err(incomplete(format!("task {} lacks timestamps", t.task_id)));
            }
            (v, _, c) => {
                first_ready = first_ready.min(v.unwrap_or(f64::INFINITY));
                last_done = last_done.max(c.unwrap_or(f64::NEG_INFINITY));
            }
        }
    }
    if !first_ready.is_finite() || !last_done.is_finite() {
        return Err(incomplete("no task completed".into()));
    }
    let c_max = last_done - first_ready;
    Ok(RunMetrics {
        run_id: run_id.to_string(),
        dag_id: dag_id.to_string(),
        run_index: run_index(run_id),
        state,
        c_max,
        stats,
        durations,
        waits,
        overhead: c_max - stats.p_d,
        normalized_overhead: normalized_overhead(c_max, &stats),
    })
}

/// Metrics for every run in the trace, in run-id order.
pub fn compute_metrics(trace: &TraceLog) -> Result<Vec<RunMetrics>> {
    let mut shapes = BTreeMap::new();
    for dag in &trace.store.dags {
        shapes.insert(dag.dag_id.as_str(), analyze(dag)?);
    }
    let mut by_run: BTreeMap<&str, Vec<&TaskInstance>> = BTreeMap::new();
    for t in &trace.store.tasks {
        by_run.entry(t.run_id.as_str()).or_default().push(t);
    }
    trace
        .store
        .runs
        .iter()
        .map(|run| {
            let stats = *shapes
                .get(run.dag_id.as_str())
                .ok_or_else(|| Error::UnknownDag(run.dag_id.clone()))?;
            let tasks = by_run.get(run.run_id.as_str()).cloned().unwrap_or_default();
            run_metrics(&run.run_id, &run.dag_id, run.state, &tasks, stats)
        })
        .collect()
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub system: String,
    pub metric: String,
    pub count: usize,
    pub min: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
    pub mean: f64,
}

impl SummaryRow {
    pub fn of(system: &str, metric: &str, values: &[f64]) -> Option<Self> {
        Some(SummaryRow {
            system: system.to_string(),
            metric: metric.to_string(),
            count: values.len(),
            min: quantile(values, 0.0)?,
            p25: quantile(values, 0.25)?,
            median: quantile(values, 0.5)?,
            p75: quantile(values, 0.75)?,
            max: quantile(values, 1.0)?,
            mean: mean(values)?,
        })
    }
}

/// Distribution rows for makespan, task duration, wait and overheads.
pub fn summarize(system: &str, runs: &[RunMetrics]) -> Vec<SummaryRow> {
    let pick = |f: &dyn Fn(&RunMetrics) -> Vec<f64>| -> Vec<f64> { runs.iter().flat_map(f).collect() };
    let series: [(&str, Vec<f64>); 5] = [
        ("makespan", pick(&|r| vec![r.c_max])),
        ("duration", pick(&|r| r.durations.clone())),
        ("wait", pick(&|r| r.waits.clone())),
        ("overhead", pick(&|r| vec![r.overhead])),
        ("normalized_overhead", pick(&|r| vec![r.normalized_overhead])),
    ];
    series
        .iter()
        .filter_map(|(name, values)| SummaryRow::of(system, name, values))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExecutorKind, TaskState};

    fn ti(id: &str, v: f64, s: f64, c: f64) -> TaskInstance {
        TaskInstance {
            run_id: "d__run0000".into(),
            task_id: id.into(),
            dag_id: "d".into(),
            state: TaskState::Success,
            executor: ExecutorKind::Function,
            duration_s: c - s,
            ready_time: Some(v),
            start_time: Some(s),
            completion_time: Some(c),
            try_number: 1,
        }
    }

    fn stats(p_d: f64, n_l: usize, n_w: usize) -> DagShapeStats {
        DagShapeStats { n: 3, p_d, n_l, n_w }
    }

    #[test]
    fn single_task() {
        let t = ti("a", 0.0, 0.0, 10.0);
        let m = run_metrics("d__run0000", "d", RunState::Success, &[&t], stats(10.0, 1, 1)).unwrap();
        assert_eq!((m.c_max, m.waits[0], m.overhead, m.normalized_overhead), (10.0, 0.0, 0.0, 0.0));
        assert_eq!(m.run_index, Some(0));
    }

    /// a → {b, c} with a=2 s, b=5 s, c=3 s.
    #[test]
    fn diamond_by_hand() {
        let a = ti("a", 1.0, 3.0, 5.0);
        let b = ti("b", 7.0, 9.5, 14.5);
        let c = ti("c", 7.0, 8.0, 11.0);
        let m = run_metrics("r", "d", RunState::Success, &[&a, &b, &c], stats(7.0, 2, 2)).unwrap();
        assert_eq!(m.c_max, 13.5);
        assert_eq!(m.waits, vec![2.0, 2.5, 1.0]);
        assert_eq!(m.durations, vec![2.0, 5.0, 3.0]);
        assert_eq!(m.overhead, 6.5);
        assert_eq!(m.normalized_overhead, 6.5);
    }

    #[test]
    fn running_or_partial_runs_are_incomplete() {
        let a = ti("a", 0.0, 0.0, 1.0);
        assert!(matches!(
            run_metrics("r", "d", RunState::Running, &[&a], stats(1.0, 1, 1)),
            Err(Error::IncompleteTrace(_))
        ));
        let mut b = ti("b", 0.0, 0.0, 1.0);
        b.completion_time = None;
        assert!(run_metrics("r", "d", RunState::Success, &[&a, &b], stats(1.0, 1, 1)).is_err());
        assert!(run_metrics("r", "d", RunState::Failed, &[&a, &b], stats(1.0, 1, 1)).is_ok());
    }

    #[test]
    fn normalized_overhead_monotonicity() {
        let base = normalized_overhead(20.0, &stats(10.0, 2, 4));
        assert!(normalized_overhead(21.0, &stats(10.0, 2, 4)) > base);
        assert!(normalized_overhead(20.0, &stats(10.0, 3, 4)) > base);
        assert!(normalized_overhead(20.0, &stats(10.0, 2, 5)) < base);
    }

    #[test]
    fn summary_rows() {
        let a = ti("a", 0.0, 1.0, 2.0);
        let m = run_metrics("r", "d", RunState::Success, &[&a], stats(1.0, 1, 1)).unwrap();
        let rows = summarize("x", &[m]);
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].metric, "makespan");
        assert_eq!(rows[0].median, 2.0);
    }
}
