use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::PlatformModel;
use super::pool::WarmPool;

/// Mutable platform state shared by the executors during one simulation.
#[derive(Debug, Clone)]
pub struct PlatformState {
    pub model: PlatformModel,
    pub pool: WarmPool,
    pub rng: ChaCha8Rng,
    /// Attempts between invocation and log push, any executor.
    pub in_flight: usize,
    pub in_flight_functions: usize,
    pub peak_in_flight_functions: usize,
}

impl PlatformState {
    pub fn new(model: PlatformModel, seed: u64) -> Self {
        PlatformState {
            pool: WarmPool::new(model.warm_keepalive_s),
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            in_flight: 0,
            in_flight_functions: 0,
            peak_in_flight_functions: 0,
        }
    }

    pub fn has_function_capacity(&self) -> bool {
        self.in_flight_functions < self.model.faas_concurrency_limit
    }
}
