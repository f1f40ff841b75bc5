#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use sflow_core::model::{
    DagDefinition, EntityRef, MetadataStore, RunState, TargetState, TaskKey, TaskSpec, TaskState,
};
use sflow_core::scheduler::run_id_for;

/// Random acyclic DAG: task `i` may depend on any earlier task. Task ids
/// are declared in shuffled order so declaration order is not topological.
pub fn arb_dag(max_n: usize, max_p: u32) -> impl Strategy<Value = DagDefinition> {
    (1..=max_n)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec(0..=max_p, n),
                prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.3), n), n),
                Just(n).prop_shuffle_indices(),
            )
        })
        .prop_map(|(durations, edges, order)| {
            let n = durations.len();
            let mut tasks: Vec<TaskSpec> = (0..n)
                .map(|i| {
                    let deps = (0..i).filter(|&j| edges[i][j]).map(|j| format!("t{j}"));
                    TaskSpec::new(format!("t{i}"), durations[i] as f64).after(deps)
                })
                .collect();
            tasks = order.into_iter().map(|i| tasks[i].clone()).collect();
            DagDefinition::new("rand", tasks)
        })
}

trait ShuffleIndices {
    fn prop_shuffle_indices(self) -> BoxedStrategy<Vec<usize>>;
}

impl ShuffleIndices for Just<usize> {
    fn prop_shuffle_indices(self) -> BoxedStrategy<Vec<usize>> {
        Just((0..self.0).collect::<Vec<_>>()).prop_shuffle().boxed()
    }
}

/// Every source-to-sink path as a list of task indices, by exhaustive DFS.
pub fn all_paths(dag: &DagDefinition) -> Vec<Vec<usize>> {
    let idx: BTreeMap<&str, usize> = dag
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.task_id.as_str(), i))
        .collect();
    let n = dag.tasks.len();
    let mut succ = vec![Vec::new(); n];
    for (i, t) in dag.tasks.iter().enumerate() {
        for d in &t.predecessors {
            succ[idx[d.as_str()]].push(i);
        }
    }
    let mut out = Vec::new();
    fn walk(at: usize, succ: &[Vec<usize>], path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        path.push(at);
        if succ[at].is_empty() {
            out.push(path.clone());
        }
        for &s in &succ[at] {
            walk(s, succ, path, out);
        }
        path.pop();
    }
    for (i, t) in dag.tasks.iter().enumerate() {
        if t.predecessors.is_empty() {
            walk(i, &succ, &mut Vec::new(), &mut out);
        }
    }
    out
}

/// Peak concurrency of the zero-overhead schedule, computed by fixed-point
/// relaxation of start times and counting live tasks at every start point.
/// A zero-length task occupies one step at its instant.
pub fn brute_force_width(dag: &DagDefinition) -> usize {
    let n = dag.tasks.len();
    let idx: BTreeMap<&str, usize> = dag
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.task_id.as_str(), i))
        .collect();
    let finish_of = |s: (f64, u32), p: f64| if p > 0.0 { (s.0 + p, 0) } else { (s.0, s.1 + 1) };
    let mut start = vec![(0.0f64, 0u32); n];
    loop {
        let mut changed = false;
        for (i, t) in dag.tasks.iter().enumerate() {
            for d in &t.predecessors {
                let j = idx[d.as_str()];
                let f = finish_of(start[j], dag.tasks[j].duration_s);
                if f.partial_cmp(&start[i]) == Some(std::cmp::Ordering::Greater) {
                    start[i] = f;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let finish: Vec<_> = (0..n).map(|i| finish_of(start[i], dag.tasks[i].duration_s)).collect();
    start
        .iter()
        .map(|&x| (0..n).filter(|&i| start[i] <= x && x < finish[i]).count())
        .max()
        .unwrap_or(0)
}

/// Registers `dag` with two runs, then applies one transition attempt per
/// op. Ops pick a task and a target state; illegal attempts are rejected
/// by the store and leave no record.
pub fn drive_store(dag: &DagDefinition, ops: &[(usize, usize)]) -> MetadataStore {
    let mut store = MetadataStore::new();
    store.register_dag(dag.clone(), 0.0).unwrap();
    let runs = [run_id_for(&dag.dag_id, 0), run_id_for(&dag.dag_id, 1)];
    for r in &runs {
        store.create_dag_run(&dag.dag_id, r, 0.0, 0.0).unwrap();
    }
    let mut now = 1.0;
    for &(pick, target) in ops {
        now += 0.5;
        let n = dag.tasks.len();
        let run = &runs[pick / n % 2];
        if target == TaskState::ALL.len() {
            let _ = store.apply_transition(
                &EntityRef::run(run),
                TargetState::Run(if pick % 2 == 0 { RunState::Success } else { RunState::Failed }),
                now,
            );
            continue;
        }
        let key = TaskKey::new(run.clone(), dag.tasks[pick % n].task_id.clone());
        let _ = store.apply_transition(
            &EntityRef::Task(key),
            TargetState::Task(TaskState::ALL[target]),
            now,
        );
    }
    store
}

pub fn arb_ops(len: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..64, 0..=TaskState::ALL.len()), 0..len)
}
