use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dependency cycle detected in DAG `{0}`")]
    CycleDetected(String),
    #[error("DAG `{0}` is already registered")]
    DuplicateDagId(String),
    #[error("task `{task_id}` appears more than once in DAG `{dag_id}`")]
    DuplicateTaskId { dag_id: String, task_id: String },
    #[error("task `{task_id}` depends on unknown task `{dependency}`")]
    DanglingDependency { task_id: String, dependency: String },
    #[error("invalid DAG definition: {0}")]
    InvalidDag(String),
    #[error("illegal transition of {entity}: {from} -> {to}")]
    IllegalTransition {
        entity: String,
        from: String,
        to: String,
    },
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("unknown DAG `{0}`")]
    UnknownDag(String),
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("malformed change record #{seq}: {reason}")]
    MalformedRecord { seq: u64, reason: String },
    #[error("task `{task_id}` runs {duration_s} s, above the {limit_s} s function limit")]
    DurationExceedsLimit {
        task_id: String,
        duration_s: f64,
        limit_s: f64,
    },
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("simulation did not terminate: {0}")]
    NonTermination(String),
    #[error("incomplete trace: {0}")]
    IncompleteTrace(String),
    #[error("no price configured for `{0}`")]
    MissingPrice(String),
    #[error("unknown cost scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
