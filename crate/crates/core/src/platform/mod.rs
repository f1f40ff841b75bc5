//! Simulated cloud platform: latency model, warm pools and the
//! discrete-event engines for both orchestrators.

mod baseline;
mod engine;
mod model;
mod pool;
mod sairflow;
mod scenario;
mod state;
mod trace;

pub use baseline::run_baseline;
pub use model::{BaselineModel, PlatformModel};
pub use pool::{sample_invocation, Invocation, WarmPool};
pub use sairflow::run_sairflow;
pub use scenario::{simulate, Scenario, System};
pub use state::PlatformState;
pub use trace::{TraceCounters, TraceEvent, TraceLog, WorkerSpan};
