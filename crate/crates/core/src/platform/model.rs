use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduler::SchedulerConfig;
use crate::stats::Latency;

/// Latency, scaling and contention parameters of the simulated serverless
/// platform. Every field has a default, so a config only needs overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlatformModel {
    /// Cold start of a function environment, config and DAG pull included.
    pub faas_cold_penalty_s: Latency,
    pub faas_warm_invoke_s: f64,
    pub warm_keepalive_s: f64,
    pub faas_concurrency_limit: usize,
    pub function_max_duration_s: f64,
    pub function_memory_mb: f64,
    pub container_provision_s: Latency,
    pub container_startup_s: f64,
    pub container_vcpu: f64,
    pub container_memory_mb: f64,
    /// Commit to router delivery through the change-capture stream.
    pub cdc_latency_s: Latency,
    /// Router to consumer, also trigger to scheduler queue.
    pub queue_hop_s: f64,
    /// Queue to worker invocation (the orchestration forwarder).
    pub executor_hop_s: f64,
    /// Warm config pull plus DAG pull.
    pub setup_s: f64,
    pub log_push_s: f64,
    pub scheduler_invoke_s: f64,
    /// Time from the start of a scheduling pass until its commit is
    /// visible to change capture.
    pub scheduler_pass_s: f64,
    pub scheduler_batch_size: usize,
    pub updater_invoke_s: f64,
    pub contention_alpha: f64,
    pub contention_threshold: f64,
    pub failure_probability: f64,
    pub log_push_failure_probability: f64,
    pub scheduler: SchedulerConfig,
    /// Simulated-time guard against runaway simulations.
    pub max_sim_time_s: f64,
    pub max_events: u64,
}

impl Default for PlatformModel {
    fn default() -> Self {
        PlatformModel {
            faas_cold_penalty_s: Latency::uniform(8.0, 11.0),
            faas_warm_invoke_s: 0.1,
            warm_keepalive_s: 900.0,
            faas_concurrency_limit: 125,
            function_max_duration_s: 900.0,
            function_memory_mb: 340.0,
            container_provision_s: Latency::uniform(60.0, 90.0),
            container_startup_s: 30.0,
            container_vcpu: 0.25,
            container_memory_mb: 512.0,
            cdc_latency_s: Latency::uniform(1.0, 1.5),
            queue_hop_s: 0.1,
            executor_hop_s: 0.3,
            setup_s: 0.3,
            log_push_s: 0.2,
            scheduler_invoke_s: 0.1,
            scheduler_pass_s: 0.3,
            scheduler_batch_size: 10,
            updater_invoke_s: 0.1,
            contention_alpha: 5.0 / 61.0,
            contention_threshold: 40.0,
            failure_probability: 0.0,
            log_push_failure_probability: 0.0,
            scheduler: SchedulerConfig::default(),
            max_sim_time_s: 30.0 * 86_400.0,
            max_events: 50_000_000,
        }
    }
}

impl PlatformModel {
    /// Extra execution seconds when `concurrent_starts` attempts hit the
    /// metadata database at once: `alpha * max(0, starts - c0)`.
    pub fn contention_inflation(&self, concurrent_starts: usize) -> f64 {
        self.contention_alpha * (concurrent_starts as f64 - self.contention_threshold).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let latencies = [
            ("faas_cold_penalty_s", self.faas_cold_penalty_s),
            ("container_provision_s", self.container_provision_s),
            ("cdc_latency_s", self.cdc_latency_s),
        ];
        for (name, l) in latencies {
            if !l.is_valid() {
                return Err(Error::InvalidConfig(format!("{name} must be non-negative")));
            }
        }
        let scalars = [
            ("faas_warm_invoke_s", self.faas_warm_invoke_s),
            ("warm_keepalive_s", self.warm_keepalive_s),
            ("container_startup_s", self.container_startup_s),
            ("queue_hop_s", self.queue_hop_s),
            ("executor_hop_s", self.executor_hop_s),
            ("setup_s", self.setup_s),
            ("log_push_s", self.log_push_s),
            ("scheduler_invoke_s", self.scheduler_invoke_s),
            ("scheduler_pass_s", self.scheduler_pass_s),
            ("updater_invoke_s", self.updater_invoke_s),
            ("contention_alpha", self.contention_alpha),
            ("contention_threshold", self.contention_threshold),
        ];
        for (name, v) in scalars {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be non-negative")));
            }
        }
        for (name, p) in [
            ("failure_probability", self.failure_probability),
            ("log_push_failure_probability", self.log_push_failure_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1]")));
            }
        }
        if self.faas_concurrency_limit == 0 || self.scheduler_batch_size == 0 {
            return Err(Error::InvalidConfig(
                "concurrency limit and batch size must be positive".into(),
            ));
        }
        if self.scheduler.max_tries == 0 {
            return Err(Error::InvalidConfig("max_tries must be at least 1".into()));
        }
        Ok(())
    }
}

/// The managed, polling comparator: a worker pool with slow scale-out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineModel {
    pub min_workers: usize,
    pub max_workers: usize,
    pub slots_per_worker: usize,
    pub worker_provision_s: Latency,
    pub poll_interval_s: f64,
    pub per_task_launch_s: f64,
    pub max_sim_time_s: f64,
    pub max_events: u64,
}

impl Default for BaselineModel {
    fn default() -> Self {
        BaselineModel {
            min_workers: 1,
            max_workers: 25,
            slots_per_worker: 5,
            worker_provision_s: Latency::uniform(240.0, 300.0),
            poll_interval_s: 5.0,
            per_task_launch_s: 1.7,
            max_sim_time_s: 30.0 * 86_400.0,
            max_events: 50_000_000,
        }
    }
}

impl BaselineModel {
    /// All workers provisioned up front, as in the warm experiments.
    pub fn warm() -> Self {
        let base = Self::default();
        BaselineModel {
            min_workers: base.max_workers,
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_workers == 0 || self.min_workers > self.max_workers {
            return Err(Error::InvalidConfig(
                "need 1 <= min_workers <= max_workers".into(),
            ));
        }
        if self.slots_per_worker == 0 {
            return Err(Error::InvalidConfig("slots_per_worker must be positive".into()));
        }
        if !(self.poll_interval_s > 0.0) || !(self.per_task_launch_s >= 0.0) {
            return Err(Error::InvalidConfig(
                "poll interval must be positive and launch time non-negative".into(),
            ));
        }
        if !self.worker_provision_s.is_valid() {
            return Err(Error::InvalidConfig("worker_provision_s must be non-negative".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contention_below_threshold_is_free() {
        let m = PlatformModel::default();
        assert_eq!(m.contention_inflation(0), 0.0);
        assert_eq!(m.contention_inflation(10), 0.0);
        assert_eq!(m.contention_inflation(40), 0.0);
    }

    #[test]
    fn contention_matches_measured_points() {
        let m = PlatformModel::default();
        assert!((m.contention_inflation(64) - 2.0).abs() < 0.05);
        assert!((m.contention_inflation(125) - 7.0).abs() < 0.05);
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let m: PlatformModel = serde_json::from_str(r#"{"faas_concurrency_limit": 10}"#).unwrap();
        assert_eq!(m.faas_concurrency_limit, 10);
        assert_eq!(m.warm_keepalive_s, 900.0);
        let b: BaselineModel = serde_json::from_str(r#"{"min_workers": 25}"#).unwrap();
        assert_eq!(b, BaselineModel::warm());
    }

    #[test]
    fn rejects_bad_values() {
        let m = PlatformModel {
            failure_probability: 1.5,
            ..Default::default()
        };
        assert!(m.validate().is_err());
        let b = BaselineModel {
            min_workers: 30,
            ..Default::default()
        };
        assert!(b.validate().is_err());
    }
}
