use serde::{Deserialize, Serialize};

use crate::bath::FieldStatistics;
use crate::error::{Error, Result};

/// Bath temperature as a function of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemperatureSchedule {
    Constant {
        theta: f64,
    },
    /// `theta0 * decay^(t / t_unit)`.
    Geometric {
        theta0: f64,
        decay: f64,
        t_unit: f64,
    },
}

impl TemperatureSchedule {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { theta } => theta,
            Self::Geometric { theta0, decay, t_unit } => theta0 * decay.powf(t / t_unit),
        }
    }

    pub fn is_cooling(&self) -> bool {
        matches!(self, Self::Geometric { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant { theta } if !(theta >= 0.0) => {
                Err(Error::Parameter(format!("temperature must be non-negative, got {theta}")))
            }
            Self::Geometric { theta0, decay, t_unit } => {
                if !(theta0 >= 0.0 && t_unit > 0.0) {
                    return Err(Error::Parameter("geometric schedule needs theta0 >= 0 and t_unit > 0".into()));
                }
                if !(decay > 0.0 && decay <= 1.0) {
                    return Err(Error::Parameter(format!(
                        "cooling schedule must be non-increasing, decay {decay} outside (0, 1]"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Time window, step sizes, bath statistics and ensemble size of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSchedule {
    pub t_start: f64,
    pub t_end: f64,
    /// Integration step.
    pub dt: f64,
    /// Slice length; results are sampled at slice boundaries.
    pub slice: f64,
    pub temperature: TemperatureSchedule,
    pub fields: FieldStatistics,
    pub trajectories: usize,
}

impl RelaxationSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > self.t_start) {
            return Err(Error::Parameter(format!("empty time window [{}, {}]", self.t_start, self.t_end)));
        }
        if !(self.dt > 0.0 && self.slice > 0.0) {
            return Err(Error::Parameter("dt and the slice length must be positive".into()));
        }
        if self.dt > self.slice * (1.0 + 1e-12) {
            return Err(Error::Parameter(format!("dt = {} exceeds the slice length {}", self.dt, self.slice)));
        }
        if self.trajectories == 0 {
            return Err(Error::Parameter("at least one trajectory is required".into()));
        }
        self.temperature.validate()?;
        self.fields.validate()
    }

    /// Slice boundaries from `t_start` to `t_end`; the last slice may be short.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = ((self.t_end - self.t_start) / self.slice - 1e-9).ceil().max(1.0) as usize;
        (0..=n).map(|k| (self.t_start + k as f64 * self.slice).min(self.t_end)).collect()
    }
}

/// Splits `[t0, t1]` into the fewest equal steps no longer than `dt`.
pub fn substeps(t0: f64, t1: f64, dt: f64) -> (usize, f64) {
    let n = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    (n, (t1 - t0) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule() -> RelaxationSchedule {
        RelaxationSchedule {
            t_start: 0.0,
            t_end: 1.0,
            dt: 0.01,
            slice: 0.3,
            temperature: TemperatureSchedule::Geometric { theta0: 2.0, decay: 0.5, t_unit: 1.0 },
            fields: FieldStatistics { sigma_b: 1.0, t_c: 0.5 },
            trajectories: 1,
        }
    }

    #[test]
    fn sample_times_clip_the_last_slice() {
        let t = schedule().sample_times();
        assert_eq!(t.len(), 5);
        assert!((t[3] - 0.9).abs() < 1e-12);
        assert_eq!(t[4], 1.0);
        let mut s = schedule();
        s.slice = 0.25;
        assert_eq!(s.sample_times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn validation() {
        assert!(schedule().validate().is_ok());
        let mut s = schedule();
        s.dt = 0.5;
        assert!(s.validate().is_err());
        let mut s = schedule();
        s.temperature = TemperatureSchedule::Geometric { theta0: 1.0, decay: 1.5, t_unit: 1.0 };
        assert!(s.validate().is_err());
        let mut s = schedule();
        s.trajectories = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn geometric_halves_per_unit() {
        let th = TemperatureSchedule::Geometric { theta0: 2.0, decay: 0.5, t_unit: 1.0 };
        assert_eq!(th.at(0.0), 2.0);
        assert!((th.at(3.0) - 0.25).abs() < 1e-15);
        assert_eq!(substeps(0.0, 1.0, 0.3), (4, 0.25));
        assert_eq!(substeps(0.0, 0.3, 0.1).0, 3);
    }
}
