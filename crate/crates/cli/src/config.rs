use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use sflow_core::model::DagDefinition;
use sflow_core::platform::{BaselineModel, PlatformModel, Scenario, System};
use sflow_core::workloads::WorkloadSpec;

/// One experiment: a workload, the systems to run it on and the seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub workload: Option<WorkloadSpec>,
    /// DAG definition files, used instead of `workload`.
    #[serde(default)]
    pub dag_files: Vec<PathBuf>,
    #[serde(default)]
    pub platform: PlatformModel,
    #[serde(default)]
    pub baseline: BaselineModel,
    pub seeds: Vec<u64>,
    pub systems: Vec<System>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Leave the first run of every DAG out of the metrics (warm setups).
    #[serde(default)]
    pub exclude_first_run: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.systems.is_empty() {
            bail!("config lists no systems");
        }
        if self.seeds.is_empty() {
            bail!("config lists no seeds");
        }
        match (&self.workload, self.dag_files.is_empty()) {
            (Some(_), false) => bail!("set either workload or dag_files, not both"),
            (None, true) => bail!("config has neither workload nor dag_files"),
            _ => {}
        }
        self.platform.validate()?;
        self.baseline.validate()?;
        Ok(())
    }

    /// Builds the DAGs; relative paths resolve against `base_dir`.
    pub fn scenario(&self, base_dir: &Path) -> Result<Scenario> {
        let dags = match &self.workload {
            Some(w) => w.build(base_dir)?,
            None => self
                .dag_files
                .iter()
                .map(|p| {
                    let path = base_dir.join(p);
                    DagDefinition::load(&path)
                        .with_context(|| format!("cannot load DAG {}", path.display()))
                })
                .collect::<Result<_>>()?,
        };
        let scenario = Scenario::new(dags);
        for &system in &self.systems {
            scenario.validate(system, &self.platform)?;
        }
        Ok(scenario)
    }
}

/// Parses `SFLOW_SEED`: one seed or a comma-separated list.
pub fn seeds_from_env(value: &str) -> Result<Vec<u64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed {s:?} in SFLOW_SEED"))
        })
        .collect()
}
