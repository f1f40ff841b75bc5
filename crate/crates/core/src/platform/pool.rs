use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::PlatformModel;
use crate::model::ExecutorKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Environment {
    id: u64,
    busy: bool,
    last_used: f64,
}

/// Function execution environments. An idle environment stays warm for
/// `keepalive_s` after its last invocation finished; each environment
/// serves one invocation at a time.
#[derive(Debug, Clone, Default)]
pub struct WarmPool {
    envs: Vec<Environment>,
    next_id: u64,
    keepalive_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invocation {
    /// Time until the handler runs; for a cold start this includes the
    /// environment setup.
    pub latency_s: f64,
    /// Config and DAG pull time on top of `latency_s` (zero when cold).
    pub setup_s: f64,
    pub warm: bool,
    pub env_id: Option<u64>,
}

impl WarmPool {
    pub fn new(keepalive_s: f64) -> Self {
        WarmPool {
            envs: Vec::new(),
            next_id: 0,
            keepalive_s,
        }
    }

    fn evict_expired(&mut self, now: f64) {
        let keepalive = self.keepalive_s;
        self.envs
            .retain(|e| e.busy || now - e.last_used <= keepalive);
    }

    /// Takes the most recently used warm environment, if any.
    fn acquire_warm(&mut self, now: f64) -> Option<u64> {
        self.evict_expired(now);
        let env = self
            .envs
            .iter_mut()
            .filter(|e| !e.busy)
            .max_by(|a, b| a.last_used.total_cmp(&b.last_used).then(b.id.cmp(&a.id)))?;
        env.busy = true;
        Some(env.id)
    }

    fn spawn(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.envs.push(Environment {
            id,
            busy: true,
            last_used: f64::NEG_INFINITY,
        });
        id
    }

    pub fn release(&mut self, env_id: u64, now: f64) {
        if let Some(env) = self.envs.iter_mut().find(|e| e.id == env_id) {
            env.busy = false;
            env.last_used = now;
        }
    }

    pub fn size(&self) -> usize {
        self.envs.len()
    }

    pub fn idle_warm(&self, now: f64) -> usize {
        self.envs
            .iter()
            .filter(|e| !e.busy && now - e.last_used <= self.keepalive_s)
            .count()
    }
}

/// Invocation latency for one worker start. Functions reuse a warm
/// environment when one is idle; containers always provision from scratch.
pub fn sample_invocation<R: Rng + ?Sized>(
    kind: ExecutorKind,
    pool: &mut WarmPool,
    model: &PlatformModel,
    rng: &mut R,
    now: f64,
) -> Invocation {
    match kind {
        ExecutorKind::Function => match pool.acquire_warm(now) {
            Some(env) => Invocation {
                latency_s: model.faas_warm_invoke_s,
                setup_s: model.setup_s,
                warm: true,
                env_id: Some(env),
            },
            None => Invocation {
                latency_s: model.faas_cold_penalty_s.sample(rng),
                setup_s: 0.0,
                warm: false,
                env_id: Some(pool.spawn()),
            },
        },
        ExecutorKind::Container => Invocation {
            latency_s: model.container_provision_s.sample(rng) + model.container_startup_s,
            setup_s: 0.0,
            warm: false,
            env_id: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn invoke(pool: &mut WarmPool, now: f64) -> Invocation {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        sample_invocation(ExecutorKind::Function, pool, &PlatformModel::default(), &mut rng, now)
    }

    #[test]
    fn empty_pool_is_cold() {
        let mut pool = WarmPool::new(900.0);
        let inv = invoke(&mut pool, 0.0);
        assert!(!inv.warm);
        assert!((8.0..=11.0).contains(&inv.latency_s));
        assert_eq!(pool.size(), 1);
    }

    #[test]
    fn five_minute_period_reuses_environment() {
        let mut pool = WarmPool::new(900.0);
        let first = invoke(&mut pool, 0.0);
        pool.release(first.env_id.unwrap(), 25.0);
        let second = invoke(&mut pool, 300.0);
        assert!(second.warm);
        assert_eq!(second.env_id, first.env_id);
        assert_eq!(second.latency_s, 0.1);
    }

    #[test]
    fn thirty_minute_period_is_always_cold() {
        let mut pool = WarmPool::new(900.0);
        let mut t = 0.0;
        for _ in 0..3 {
            let inv = invoke(&mut pool, t);
            assert!(!inv.warm);
            pool.release(inv.env_id.unwrap(), t + 25.0);
            t += 1800.0;
        }
    }

    #[test]
    fn busy_environment_is_not_shared() {
        let mut pool = WarmPool::new(900.0);
        let a = invoke(&mut pool, 0.0);
        pool.release(a.env_id.unwrap(), 10.0);
        let b = invoke(&mut pool, 20.0);
        let c = invoke(&mut pool, 20.0);
        assert!(b.warm);
        assert!(!c.warm);
        assert_ne!(b.env_id, c.env_id);
    }

    #[test]
    fn containers_never_warm() {
        let mut pool = WarmPool::new(900.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = PlatformModel::default();
        for _ in 0..50 {
            let inv = sample_invocation(ExecutorKind::Container, &mut pool, &m, &mut rng, 0.0);
            assert!(!inv.warm);
            assert!((90.0..=120.0).contains(&inv.latency_s));
        }
        assert_eq!(pool.size(), 0);
    }
}
