use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutorKind {
    Function,
    Container,
}

impl ExecutorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExecutorKind::Function => "function",
            ExecutorKind::Container => "container",
        }
    }
}

impl Default for ExecutorKind {
    fn default() -> Self {
        ExecutorKind::Function
    }
}

impl fmt::Display for ExecutorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One node of a workflow graph. `duration_s` is the task workload: the
/// simulated task body sleeps for exactly this long.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    #[serde(rename = "id")]
    pub task_id: String,
    pub duration_s: f64,
    #[serde(rename = "executor", default)]
    pub executor_hint: ExecutorKind,
    #[serde(rename = "deps", default)]
    pub predecessors: BTreeSet<String>,
}

impl TaskSpec {
    pub fn new(task_id: impl Into<String>, duration_s: f64) -> Self {
        TaskSpec {
            task_id: task_id.into(),
            duration_s,
            executor_hint: ExecutorKind::Function,
            predecessors: BTreeSet::new(),
        }
    }

    pub fn after<I, S>(mut self, deps: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.predecessors.extend(deps.into_iter().map(Into::into));
        self
    }

    pub fn on(mut self, executor: ExecutorKind) -> Self {
        self.executor_hint = executor;
        self
    }
}

/// A static workflow: its tasks, the trigger period and how many runs the
/// schedule produces. The serde layout is the DAG definition file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagDefinition {
    pub dag_id: String,
    pub period_minutes: f64,
    pub run_count: u32,
    pub tasks: Vec<TaskSpec>,
}

impl DagDefinition {
    pub fn new(dag_id: impl Into<String>, tasks: Vec<TaskSpec>) -> Self {
        DagDefinition {
            dag_id: dag_id.into(),
            period_minutes: 5.0,
            run_count: 1,
            tasks,
        }
    }

    pub fn with_schedule(mut self, period_minutes: f64, run_count: u32) -> Self {
        self.period_minutes = period_minutes;
        self.run_count = run_count;
        self
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let def: DagDefinition = serde_json::from_str(&text)?;
        def.validate()?;
        Ok(def)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn task(&self, task_id: &str) -> Option<&TaskSpec> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }

    pub fn total_work_s(&self) -> f64 {
        self.tasks.iter().map(|t| t.duration_s).sum()
    }

    /// Checks ids, durations, schedule and acyclicity.
    pub fn validate(&self) -> Result<()> {
        if self.dag_id.is_empty() {
            return Err(Error::InvalidDag("empty dag_id".into()));
        }
        if !(self.period_minutes > 0.0) || !self.period_minutes.is_finite() {
            return Err(Error::InvalidDag(format!(
                "period_minutes must be positive, got {}",
                self.period_minutes
            )));
        }
        let mut ids = BTreeSet::new();
        for task in &self.tasks {
            if task.task_id.is_empty() {
                return Err(Error::InvalidDag("empty task id".into()));
            }
            if !ids.insert(task.task_id.as_str()) {
                return Err(Error::DuplicateTaskId {
                    dag_id: self.dag_id.clone(),
                    task_id: task.task_id.clone(),
                });
            }
            if !(task.duration_s >= 0.0) || !task.duration_s.is_finite() {
                return Err(Error::InvalidDag(format!(
                    "task `{}` has invalid duration {}",
                    task.task_id, task.duration_s
                )));
            }
        }
        for task in &self.tasks {
            for dep in &task.predecessors {
                if dep == &task.task_id {
                    return Err(Error::CycleDetected(self.dag_id.clone()));
                }
                if !ids.contains(dep.as_str()) {
                    return Err(Error::DanglingDependency {
                        task_id: task.task_id.clone(),
                        dependency: dep.clone(),
                    });
                }
            }
        }
        self.topological_order().map(|_| ())
    }

    /// Kahn's algorithm; ties resolve by declaration order so the result is
    /// deterministic. Indices refer to `self.tasks`.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let index: HashMap<&str, usize> = self
            .tasks
            .iter()
            .enumerate()
            .map(|(i, t)| (t.task_id.as_str(), i))
            .collect();
        let n = self.tasks.len();
        let mut indegree = vec![0usize; n];
        let mut successors = vec![Vec::new(); n];
        for (i, task) in self.tasks.iter().enumerate() {
            for dep in &task.predecessors {
                let Some(&j) = index.get(dep.as_str()) else {
                    return Err(Error::DanglingDependency {
                        task_id: task.task_id.clone(),
                        dependency: dep.clone(),
                    });
                };
                indegree[i] += 1;
                successors[j].push(i);
            }
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &s in &successors[i] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        if order.len() != n {
            return Err(Error::CycleDetected(self.dag_id.clone()));
        }
        Ok(order)
    }

    /// Direct successors keyed by task id.
    pub fn successors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = self
            .tasks
            .iter()
            .map(|t| (t.task_id.as_str(), Vec::new()))
            .collect();
        for task in &self.tasks {
            for dep in &task.predecessors {
                if let Some(v) = out.get_mut(dep.as_str()) {
                    v.push(task.task_id.as_str());
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.tasks.iter().map(|t| t.predecessors.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Running,
    Success,
    Failed,
}

impl RunState {
    pub fn as_str(self) -> &'static str {
        match self {
            RunState::Running => "running",
            RunState::Success => "success",
            RunState::Failed => "failed",
        }
    }

    pub fn is_terminal(self) -> bool {
        self != RunState::Running
    }

    pub fn can_become(self, next: RunState) -> bool {
        self == RunState::Running && next != RunState::Running
    }
}

impl fmt::Display for RunState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagRun {
    pub run_id: String,
    pub dag_id: String,
    pub logical_time: f64,
    pub state: RunState,
    pub start_time: f64,
    pub end_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskState {
    None,
    Scheduled,
    Queued,
    Running,
    Success,
    Failed,
}

impl TaskState {
    pub const ALL: [TaskState; 6] = [
        TaskState::None,
        TaskState::Scheduled,
        TaskState::Queued,
        TaskState::Running,
        TaskState::Success,
        TaskState::Failed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskState::None => "none",
            TaskState::Scheduled => "scheduled",
            TaskState::Queued => "queued",
            TaskState::Running => "running",
            TaskState::Success => "success",
            TaskState::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<TaskState> {
        TaskState::ALL.into_iter().find(|t| t.as_str() == s)
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, TaskState::Success | TaskState::Failed)
    }

    /// The task state machine. `Failed -> Scheduled` is the retry edge.
    pub fn can_become(self, next: TaskState) -> bool {
        use TaskState::*;
        matches!(
            (self, next),
            (None, Scheduled)
                | (Scheduled, Queued)
                | (Queued, Running)
                | (Running, Success)
                | (Running, Failed)
                | (Failed, Scheduled)
        )
    }
}

impl fmt::Display for TaskState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskKey {
    pub run_id: String,
    pub task_id: String,
}

impl TaskKey {
    pub fn new(run_id: impl Into<String>, task_id: impl Into<String>) -> Self {
        TaskKey {
            run_id: run_id.into(),
            task_id: task_id.into(),
        }
    }
}

impl fmt::Display for TaskKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.run_id, self.task_id)
    }
}

/// Execution record of one task within one DAG run.
///
/// `ready_time`, `start_time` and `completion_time` are the v/s/c timestamps
/// every metric is computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub run_id: String,
    pub task_id: String,
    pub dag_id: String,
    pub state: TaskState,
    pub executor: ExecutorKind,
    pub duration_s: f64,
    pub ready_time: Option<f64>,
    pub start_time: Option<f64>,
    pub completion_time: Option<f64>,
    pub try_number: u32,
}

impl TaskInstance {
    pub fn key(&self) -> TaskKey {
        TaskKey::new(self.run_id.clone(), self.task_id.clone())
    }

    pub fn wait_s(&self) -> Option<f64> {
        Some(self.start_time? - self.ready_time?)
    }

    pub fn elapsed_s(&self) -> Option<f64> {
        Some(self.completion_time? - self.start_time?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "entity", rename_all = "snake_case")]
pub enum EntityRef {
    DagRun { run_id: String },
    Task(TaskKey),
}

impl EntityRef {
    pub fn task(run_id: impl Into<String>, task_id: impl Into<String>) -> Self {
        EntityRef::Task(TaskKey::new(run_id, task_id))
    }

    pub fn run(run_id: impl Into<String>) -> Self {
        EntityRef::DagRun {
            run_id: run_id.into(),
        }
    }
}

impl fmt::Display for EntityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityRef::DagRun { run_id } => write!(f, "dag_run {run_id}"),
            EntityRef::Task(key) => write!(f, "task {key}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetState {
    Run(RunState),
    Task(TaskState),
}
