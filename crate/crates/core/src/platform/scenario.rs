use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::model::{BaselineModel, PlatformModel};
use super::trace::TraceLog;
use super::{baseline, sairflow};
use crate::error::{Error, Result};
use crate::model::{DagDefinition, ExecutorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    /// Event-driven orchestrator, tasks on their hinted executor.
    SairflowFaas,
    /// Event-driven orchestrator, every non-empty task on containers.
    SairflowCaas,
    /// Polling scheduler with an autoscaled worker pool.
    Baseline,
}

impl System {
    pub const ALL: [System; 3] = [System::SairflowFaas, System::SairflowCaas, System::Baseline];

    pub fn as_str(self) -> &'static str {
        match self {
            System::SairflowFaas => "sairflow_faas",
            System::SairflowCaas => "sairflow_caas",
            System::Baseline => "baseline",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        System::ALL
            .into_iter()
            .find(|sys| sys.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown system {s:?}")))
    }
}

/// The DAGs of one experiment, all registered at time zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub dags: Vec<DagDefinition>,
}

impl Scenario {
    pub fn new(dags: Vec<DagDefinition>) -> Self {
        Scenario { dags }
    }

    /// The DAGs as the given system runs them.
    pub fn dags_for(&self, system: System) -> Vec<DagDefinition> {
        let mut dags = self.dags.clone();
        if system == System::SairflowCaas {
            for t in dags.iter_mut().flat_map(|d| d.tasks.iter_mut()) {
                if t.duration_s > 0.0 {
                    t.executor_hint = ExecutorKind::Container;
                }
            }
        }
        dags
    }

    pub fn validate(&self, system: System, platform: &PlatformModel) -> Result<()> {
        for dag in self.dags_for(system) {
            dag.validate()?;
            if system == System::Baseline {
                continue;
            }
            for t in &dag.tasks {
                if t.executor_hint == ExecutorKind::Function
                    && t.duration_s > platform.function_max_duration_s
                {
                    return Err(Error::DurationExceedsLimit {
                        task_id: t.task_id.clone(),
                        duration_s: t.duration_s,
                        limit_s: platform.function_max_duration_s,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn task_count(&self) -> usize {
        self.dags.iter().map(|d| d.tasks.len() * d.run_count as usize).sum()
    }
}

/// Runs `scenario` on `system` with the matching model.
pub fn simulate(
    system: System,
    scenario: &Scenario,
    platform: &PlatformModel,
    baseline: &BaselineModel,
    seed: u64,
) -> Result<TraceLog> {
    match system {
        System::Baseline => baseline::run_baseline(scenario, baseline, seed),
        System::SairflowFaas | System::SairflowCaas => {
            sairflow::run_sairflow_as(system, scenario, platform, seed)
        }
    }
}
