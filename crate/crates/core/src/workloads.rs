//! Workload generators, the trace-DAG file format and DAG shape analytics.
//!
//! Trace-DAG files are CSV with rows `task_name,duration_s`. A task name is
//! a letter prefix, a numeric id and the ids it depends on, joined by `_`:
//! `M3_1_2` is task 3, which waits for tasks 1 and 2. A header row is
//! optional. Durations above 60 s are clamped to 60 s.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DagDefinition, ExecutorKind, TaskSpec};

/// Longest task runtime kept from a trace.
pub const TRACE_MAX_DURATION_S: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Chain,
    Parallel,
    Forest,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSpec {
    pub shape: Shape,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default)]
    pub p: f64,
    /// Period in minutes. Trace workloads derive it from the critical path
    /// when unset.
    #[serde(default)]
    pub period_minutes: Option<f64>,
    /// Runs per DAG. Defaults to one hour's worth of periods.
    #[serde(default)]
    pub run_count: Option<u32>,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default)]
    pub trace_path: Option<PathBuf>,
    #[serde(default)]
    pub executor: ExecutorKind,
}

fn one() -> usize {
    1
}

impl WorkloadSpec {
    pub fn chain(n: usize, p: f64) -> Self {
        Self::synthetic(Shape::Chain, n, p)
    }

    pub fn parallel(n: usize, p: f64) -> Self {
        Self::synthetic(Shape::Parallel, n, p)
    }

    fn synthetic(shape: Shape, n: usize, p: f64) -> Self {
        WorkloadSpec {
            shape,
            n,
            p,
            period_minutes: None,
            run_count: None,
            k: 1,
            trace_path: None,
            executor: ExecutorKind::Function,
        }
    }

    pub fn with_schedule(mut self, period_minutes: f64, run_count: u32) -> Self {
        self.period_minutes = Some(period_minutes);
        self.run_count = Some(run_count);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.shape != Shape::Trace && self.n < 1 {
            return bad("workload n must be at least 1");
        }
        if !(self.p >= 0.0 && self.p.is_finite()) {
            return bad("workload p must be a non-negative number");
        }
        if self.k < 1 {
            return bad("workload k must be at least 1");
        }
        if let Some(t) = self.period_minutes {
            if !(t > 0.0 && t.is_finite()) {
                return bad("period_minutes must be positive");
            }
        }
        if self.shape == Shape::Trace && self.trace_path.is_none() {
            return bad("trace workloads need trace_path");
        }
        Ok(())
    }

    /// Builds the DAGs. Relative trace paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Vec<DagDefinition>> {
        self.validate()?;
        let mut dags = match self.shape {
            Shape::Chain => vec![gen_chain(self.n, self.p)],
            Shape::Parallel => vec![gen_parallel(self.n, self.p)],
            Shape::Forest => gen_forest(self.k, self.n, self.p),
            Shape::Trace => {
                let path = self.trace_path.as_ref().expect("validated");
                vec![parse_trace_dag(&base_dir.join(path))?]
            }
        };
        for dag in &mut dags {
            if let Some(t) = self.period_minutes {
                dag.period_minutes = t;
            }
            dag.run_count = self
                .run_count
                .unwrap_or_else(|| runs_per_hour(dag.period_minutes));
            for t in &mut dag.tasks {
                if self.shape != Shape::Trace {
                    t.executor_hint = self.executor;
                }
            }
        }
        Ok(dags)
    }
}

/// One hour of periods, but never fewer than three runs.
fn runs_per_hour(period_minutes: f64) -> u32 {
    ((60.0 / period_minutes).floor() as u32).max(3)
}

fn fmt_p(p: f64) -> String {
    format!("{p}").replace('.', "_")
}

fn numbered(i: usize, n: usize) -> String {
    let width = n.to_string().len();
    format!("task-{i:0width$}")
}

/// `n` tasks, each waiting for the previous one.
pub fn gen_chain(n: usize, p: f64) -> DagDefinition {
    let tasks = (1..=n)
        .map(|i| {
            let t = TaskSpec::new(numbered(i, n), p);
            if i > 1 {
                t.after([numbered(i - 1, n)])
            } else {
                t
            }
        })
        .collect();
    DagDefinition::new(format!("chain_n{n}_p{}", fmt_p(p)), tasks)
}

/// A zero-length `start` task followed by `n` independent tasks.
pub fn gen_parallel(n: usize, p: f64) -> DagDefinition {
    let mut tasks = vec![TaskSpec::new("start", 0.0)];
    tasks.extend((1..=n).map(|i| TaskSpec::new(numbered(i, n), p).after(["start"])));
    DagDefinition::new(format!("parallel_n{n}_p{}", fmt_p(p)), tasks)
}

/// `k` copies of the parallel DAG with distinct ids.
pub fn gen_forest(k: usize, n: usize, p: f64) -> Vec<DagDefinition> {
    let base = gen_parallel(n, p);
    (1..=k)
        .map(|j| DagDefinition {
            dag_id: format!("{}_copy{j}", base.dag_id),
            ..base.clone()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceDag {
    pub dag: DagDefinition,
    /// Tasks whose duration was cut to [`TRACE_MAX_DURATION_S`].
    pub clamped: usize,
}

/// Reads a trace-DAG file. The DAG id is the file stem; the period follows
/// [`suggested_period`] and the run count covers one hour.
pub fn parse_trace_dag(path: &Path) -> Result<DagDefinition> {
    let text = fs::read_to_string(path)?;
    let dag_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());
    Ok(parse_trace_str(&text, &dag_id)?.dag)
}

struct TraceName {
    prefix: String,
    id: u64,
    deps: Vec<u64>,
}

fn parse_name(name: &str) -> Option<TraceName> {
    let mut parts = name.split('_');
    let head = parts.next()?;
    let split = head.find(|c: char| c.is_ascii_digit())?;
    let (prefix, id) = head.split_at(split);
    if prefix.is_empty() || !prefix.chars().all(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    let id = id.parse().ok()?;
    let deps = parts.map(|d| d.parse().ok()).collect::<Option<Vec<u64>>>()?;
    Some(TraceName {
        prefix: prefix.to_string(),
        id,
        deps,
    })
}

pub fn parse_trace_str(text: &str, dag_id: &str) -> Result<TraceDag> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<(usize, TraceName, f64)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let malformed = |reason: String| Error::MalformedRow { line, reason };
        if rec.len() != 2 {
            return Err(malformed(format!("expected 2 fields, found {}", rec.len())));
        }
        let duration = rec[1].parse::<f64>();
        if rows.is_empty() && duration.is_err() && parse_name(&rec[0]).is_none() {
            continue; // header
        }
        let name = parse_name(&rec[0])
            .ok_or_else(|| malformed(format!("bad task name {:?}", &rec[0])))?;
        let duration = match duration {
            Ok(d) if d >= 0.0 && d.is_finite() => d,
            _ => return Err(malformed(format!("bad duration {:?}", &rec[1]))),
        };
        rows.push((line, name, duration));
    }
    if rows.is_empty() {
        return Err(Error::InvalidDag(format!("trace DAG {dag_id} has no tasks")));
    }

    let mut ids: BTreeMap<u64, String> = BTreeMap::new();
    for (_, name, _) in &rows {
        let task_id = format!("{}{}", name.prefix, name.id);
        if ids.insert(name.id, task_id.clone()).is_some() {
            return Err(Error::DuplicateTaskId {
                dag_id: dag_id.to_string(),
                task_id,
            });
        }
    }
    let mut clamped = 0;
    let mut tasks = Vec::with_capacity(rows.len());
    for (_, name, duration) in &rows {
        let task_id = ids[&name.id].clone();
        let mut deps = BTreeSet::new();
        for d in &name.deps {
            let dep = ids.get(d).ok_or_else(|| Error::DanglingDependency {
                task_id: task_id.clone(),
                dependency: d.to_string(),
            })?;
            deps.insert(dep.clone());
        }
        if *duration > TRACE_MAX_DURATION_S {
            clamped += 1;
        }
        tasks.push(TaskSpec {
            task_id,
            duration_s: duration.min(TRACE_MAX_DURATION_S),
            executor_hint: ExecutorKind::Function,
            predecessors: deps,
        });
    }
    let mut dag = DagDefinition::new(dag_id, tasks);
    dag.validate()?;
    let stats = analyze(&dag)?;
    dag.period_minutes = suggested_period(stats.p_d);
    dag.run_count = runs_per_hour(dag.period_minutes);
    Ok(TraceDag { dag, clamped })
}

/// Inverse of [`parse_trace_str`] for DAGs whose task ids follow the
/// `<letters><number>` convention.
pub fn serialize_trace_dag(dag: &DagDefinition) -> Result<String> {
    let number = |id: &str| -> Result<u64> {
        parse_name(id)
            .filter(|n| n.deps.is_empty())
            .map(|n| n.id)
            .ok_or_else(|| Error::InvalidDag(format!("task id {id:?} has no trace form")))
    };
    let mut out = String::from("task_name,duration_s\n");
    for t in &dag.tasks {
        let mut name = t.task_id.clone();
        number(&name)?;
        let mut deps = t
            .predecessors
            .iter()
            .map(|d| number(d))
            .collect::<Result<Vec<_>>>()?;
        deps.sort_unstable();
        for d in deps {
            name.push('_');
            name.push_str(&d.to_string());
        }
        out.push_str(&format!("{name},{}\n", t.duration_s));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DagShapeStats {
    pub n: usize,
    /// Critical path: the largest total duration along any path.
    pub p_d: f64,
    /// Most nodes on any path.
    pub n_l: usize,
    /// Peak concurrency with unlimited resources and no overhead.
    pub n_w: usize,
}

/// Point on the virtual clock of the zero-overhead schedule. Zero-length
/// tasks occupy one tick of `step` without advancing `t`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct Instant {
    t: f64,
    step: u32,
}

pub fn analyze(dag: &DagDefinition) -> Result<DagShapeStats> {
    let order = dag.topological_order()?;
    let index: BTreeMap<&str, usize> = dag
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.task_id.as_str(), i))
        .collect();
    let n = dag.tasks.len();
    let mut path_dur = vec![0.0f64; n];
    let mut path_len = vec![0usize; n];
    let mut start = vec![Instant { t: 0.0, step: 0 }; n];
    let mut finish = start.clone();
    for &i in &order {
        let task = &dag.tasks[i];
        let (mut dur, mut len, mut s) = (0.0f64, 0usize, Instant { t: 0.0, step: 0 });
        for dep in &task.predecessors {
            let j = index[dep.as_str()];
            dur = dur.max(path_dur[j]);
            len = len.max(path_len[j]);
            if finish[j] > s {
                s = finish[j];
            }
        }
        path_dur[i] = dur + task.duration_s;
        path_len[i] = len + 1;
        start[i] = s;
        finish[i] = if task.duration_s > 0.0 {
            Instant {
                t: s.t + task.duration_s,
                step: 0,
            }
        } else {
            Instant {
                t: s.t,
                step: s.step + 1,
            }
        };
    }
    // Sweep: at equal instants, finishes are processed before starts.
    let mut sweep: Vec<(Instant, i32)> = start
        .iter()
        .map(|&s| (s, 1))
        .chain(finish.iter().map(|&f| (f, -1)))
        .collect();
    sweep.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("durations are finite")
            .then(a.1.cmp(&b.1))
    });
    let (mut live, mut peak) = (0i32, 0i32);
    for (_, delta) in sweep {
        live += delta;
        peak = peak.max(live);
    }
    Ok(DagShapeStats {
        n,
        p_d: path_dur.iter().copied().fold(0.0, f64::max),
        n_l: path_len.iter().copied().max().unwrap_or(0),
        n_w: peak as usize,
    })
}

/// Period in minutes for a trace DAG with critical path `p_d`.
pub fn suggested_period(p_d: f64) -> f64 {
    if p_d <= 200.0 {
        5.0
    } else {
        10.0
    }
}
