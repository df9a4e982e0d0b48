//! Threshold schedules for the peeling loop.
//!
//! Each iteration of recovery accepts coordinates whose median estimate
//! exceeds half the current threshold `nu`. Two schedules are provided:
//!
//! * `theory`: `nu_t = 4 sqrt(eps) mu 2^{T-(t+1)}` for `t < T = ceil(log2 R*)`,
//!   halving each step down to `4 sqrt(eps) mu`.
//! * `geometric`: starts from the largest bucket magnitude (or an explicit
//!   `nu0`) and divides by a fixed ratio until a floor is reached.

use std::fmt::Debug;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::registry::Registry;

/// Everything a schedule may look at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleInput {
    pub eps: f64,
    /// Noise level `mu`; zero for exactly sparse signals.
    pub mu: f64,
    /// Bound on `||x||_inf / (sqrt(eps) mu)`, when known.
    pub rstar: Option<f64>,
    /// `max_r max_j |u^r_j|`, an upper proxy for `||x||_inf`.
    pub peak_bucket: f64,
}

pub trait ThresholdSchedule: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// The thresholds `nu_0, nu_1, ...`, one per iteration.
    fn thresholds(&self, input: &ScheduleInput) -> Result<Vec<f64>>;
}

/// Halving schedule driven by the noise level and SNR bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct TheorySchedule;

impl ThresholdSchedule for TheorySchedule {
    fn name(&self) -> &'static str {
        "theory"
    }

    fn thresholds(&self, input: &ScheduleInput) -> Result<Vec<f64>> {
        if !(input.mu > 0.0) || !(input.eps > 0.0) {
            return Err(Error::param("theory schedule needs mu > 0 and eps > 0"));
        }
        let base = 4.0 * input.eps.sqrt() * input.mu;
        let rstar = input
            .rstar
            .unwrap_or(input.peak_bucket / (input.eps.sqrt() * input.mu));
        if !(rstar.is_finite()) || rstar < 0.0 {
            return Err(Error::param(format!("SNR bound R* = {rstar} is not usable")));
        }
        let iterations = rstar.max(2.0).log2().ceil() as i32;
        Ok((0..iterations)
            .map(|t| base * 2f64.powi(iterations - (t + 1)))
            .collect())
    }
}

/// Hard cap on the number of thresholds a geometric schedule may emit.
pub const MAX_GEOMETRIC_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct GeometricSchedule {
    pub ratio: f64,
    pub floor: f64,
    pub nu0: Option<f64>,
}

impl ThresholdSchedule for GeometricSchedule {
    fn name(&self) -> &'static str {
        "geometric"
    }

    fn thresholds(&self, input: &ScheduleInput) -> Result<Vec<f64>> {
        if !(self.ratio > 1.0) {
            return Err(Error::param(format!(
                "threshold ratio {} must exceed 1",
                self.ratio
            )));
        }
        let floor = self.floor.max(4.0 * input.eps.max(0.0).sqrt() * input.mu);
        if !(floor > 0.0) {
            return Err(Error::param(
                "geometric schedule needs a positive floor when mu = 0",
            ));
        }
        let mut nu = self.nu0.unwrap_or(input.peak_bucket);
        let mut out = Vec::new();
        while nu >= floor && out.len() < MAX_GEOMETRIC_STEPS {
            out.push(nu);
            nu /= self.ratio;
        }
        Ok(out)
    }
}

/// Knobs consumed by the registered schedule factories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleOptions {
    pub ratio: f64,
    pub floor: f64,
    pub nu0: Option<f64>,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions {
            ratio: 1.2,
            floor: DEFAULT_FLOOR,
            nu0: None,
        }
    }
}

/// Default stopping threshold for exactly sparse recovery.
pub const DEFAULT_FLOOR: f64 = 0.01;

pub fn schedules() -> &'static Registry<dyn ThresholdSchedule, ScheduleOptions> {
    static REGISTRY: OnceLock<Registry<dyn ThresholdSchedule, ScheduleOptions>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut r: Registry<dyn ThresholdSchedule, ScheduleOptions> =
            Registry::new("threshold schedule");
        r.register("theory", |_| Box::new(TheorySchedule));
        r.register("geometric", |o| {
            Box::new(GeometricSchedule {
                ratio: o.ratio,
                floor: o.floor,
                nu0: o.nu0,
            })
        });
        r
    })
}
