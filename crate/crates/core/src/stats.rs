//! Latency distributions and small summary statistics.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A non-negative latency in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Latency {
    Fixed { s: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Latency {
    pub const ZERO: Latency = Latency::Fixed { s: 0.0 };

    pub fn fixed(s: f64) -> Self {
        Latency::Fixed { s }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        Latency::Uniform { lo, hi }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Latency::Fixed { s } => s,
            Latency::Uniform { lo, hi } if hi > lo => rng.gen_range(lo..=hi),
            Latency::Uniform { lo, .. } => lo,
        }
    }

    pub fn min(&self) -> f64 {
        match *self {
            Latency::Fixed { s } => s,
            Latency::Uniform { lo, .. } => lo,
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            Latency::Fixed { s } => s,
            Latency::Uniform { lo, hi } => hi.max(lo),
        }
    }

    pub fn mean(&self) -> f64 {
        (self.min() + self.max()) / 2.0
    }

    pub fn is_valid(&self) -> bool {
        self.min() >= 0.0 && self.max().is_finite()
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Linear-interpolated quantile (`q` in `[0, 1]`) of unsorted values.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}
