//! Classical Gaussian bath fields.
//!
//! Each proton of each triode sees an independent Ornstein-Uhlenbeck process
//! per Cartesian component. The symmetric (actual) bath at a triode is the
//! average of its two proton fields.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStatistics {
    /// Stationary standard deviation of each proton-field component.
    pub sigma_b: f64,
    /// Correlation time.
    pub t_c: f64,
}

impl FieldStatistics {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_b > 0.0 && self.sigma_b.is_finite()) {
            return Err(Error::Parameter(format!("sigma_b must be positive, got {}", self.sigma_b)));
        }
        if !(self.t_c > 0.0 && self.t_c.is_finite()) {
            return Err(Error::Parameter(format!("t_c must be positive, got {}", self.t_c)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub points: usize,
}

impl TimeGrid {
    /// Grid covering `[start, end]` with spacing at most `max_step`.
    pub fn covering(start: f64, end: f64, max_step: f64) -> Self {
        let intervals = ((end - start) / max_step).ceil().max(1.0) as usize;
        Self { start, step: (end - start) / intervals as f64, points: intervals + 1 }
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.points - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }
}

pub type Vec3 = [f64; 3];

/// Sampled fields: `protons[tau][p][k]` and `averaged[tau][k]` at grid point `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathFieldSample {
    grid: TimeGrid,
    protons: Vec<[Vec<Vec3>; 2]>,
    averaged: Vec<Vec<Vec3>>,
}

fn average(a: Vec3, b: Vec3) -> Vec3 {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
}

impl BathFieldSample {
    /// Builds a sample from per-proton series; the triode averages are derived.
    pub fn from_protons(grid: TimeGrid, protons: Vec<[Vec<Vec3>; 2]>) -> Result<Self> {
        if grid.points < 2 || !(grid.step > 0.0) {
            return Err(Error::Parameter("field grid needs two or more points and a positive step".into()));
        }
        if protons.iter().any(|[a, b]| a.len() != grid.points || b.len() != grid.points) {
            return Err(Error::Parameter("field series length does not match grid".into()));
        }
        let averaged = protons.iter().map(|[a, b]| a.iter().zip(b).map(|(&x, &y)| average(x, y)).collect()).collect();
        Ok(Self { grid, protons, averaged })
    }

    /// Both protons of every triode see the same series.
    pub fn equal_fields(&self) -> Self {
        let protons = self.averaged.iter().map(|s| [s.clone(), s.clone()]).collect();
        Self::from_protons(self.grid, protons).expect("grid already validated")
    }

    pub fn zero(grid: TimeGrid, triodes: usize) -> Self {
        let z = vec![[0.0; 3]; grid.points];
        Self::from_protons(grid, vec![[z.clone(), z]; triodes]).expect("valid grid")
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn triode_count(&self) -> usize {
        self.protons.len()
    }

    pub fn proton_series(&self, tau: usize, p: usize) -> &[Vec3] {
        &self.protons[tau][p]
    }

    pub fn averaged_series(&self, tau: usize) -> &[Vec3] {
        &self.averaged[tau]
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let (start, end) = (self.grid.start, self.grid.end());
        let slack = 1e-9 * self.grid.step;
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutsideGrid { t, start, end });
        }
        let s = ((t - start) / self.grid.step).max(0.0);
        let k = (s.floor() as usize).min(self.grid.points - 2);
        Ok((k, (s - k as f64).clamp(0.0, 1.0)))
    }

    fn interpolate(series: &[Vec3], k: usize, f: f64) -> Vec3 {
        let (a, b) = (series[k], series[k + 1]);
        [0, 1, 2].map(|c| a[c] + f * (b[c] - a[c]))
    }

    /// Proton field `B_{tau,p}(t)`, linear between grid points.
    pub fn proton_at(&self, tau: usize, p: usize, t: f64) -> Result<Vec3> {
        let (k, f) = self.locate(t)?;
        Ok(Self::interpolate(&self.protons[tau][p], k, f))
    }

    /// Symmetric field `B_tau(t)`.
    pub fn averaged_at(&self, tau: usize, t: f64) -> Result<Vec3> {
        let (k, f) = self.locate(t)?;
        Ok(Self::interpolate(&self.averaged[tau], k, f))
    }

    /// Columnar text: `t tau proton bx by bz`, protons numbered 1 and 2.
    pub fn to_columnar(&self) -> String {
        let mut out = String::from("# t\ttau\tproton\tbx\tby\tbz\n");
        for k in 0..self.grid.points {
            for (tau, pair) in self.protons.iter().enumerate() {
                for (p, series) in pair.iter().enumerate() {
                    let b = series[k];
                    let _ = writeln!(
                        out,
                        "{:e}\t{}\t{}\t{:e}\t{:e}\t{:e}",
                        self.grid.time(k),
                        tau + 1,
                        p + 1,
                        b[0],
                        b[1],
                        b[2]
                    );
                }
            }
        }
        out
    }

    /// Reads the columnar form back. The grid is recovered from the times.
    pub fn from_columnar(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let bad = |m: &str| Error::Parse { line: i + 1, message: m.to_string() };
            if cols.len() != 6 {
                return Err(bad("expected 6 columns"));
            }
            let f = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
            let u = |s: &str| s.parse::<usize>().map_err(|_| bad("bad index"));
            rows.push((f(cols[0])?, u(cols[1])?, u(cols[2])?, [f(cols[3])?, f(cols[4])?, f(cols[5])?]));
        }
        let triodes = rows.iter().map(|r| r.1).max().unwrap_or(0);
        if triodes == 0 || rows.len() % (2 * triodes) != 0 {
            return Err(Error::Parse { line: 0, message: "incomplete field table".into() });
        }
        let points = rows.len() / (2 * triodes);
        if points < 2 {
            return Err(Error::Parse { line: 0, message: "field table needs two time points".into() });
        }
        let start = rows[0].0;
        let step = (rows[rows.len() - 1].0 - start) / (points - 1) as f64;
        let mut protons = vec![[vec![[0.0; 3]; points], vec![[0.0; 3]; points]]; triodes];
        for (n, (_, tau, p, b)) in rows.into_iter().enumerate() {
            if tau == 0 || p == 0 || p > 2 {
                return Err(Error::Parse { line: 0, message: "indices are 1-based".into() });
            }
            protons[tau - 1][p - 1][n / (2 * triodes)] = b;
        }
        Self::from_protons(TimeGrid { start, step, points }, protons)
    }
}

/// Samples independent stationary OU processes for every triode, proton and
/// component. Deterministic in `(seed, stream)`.
pub fn sample_bath_fields(
    seed: u64,
    stream: u64,
    grid: TimeGrid,
    stats: FieldStatistics,
    triodes: usize,
) -> Result<BathFieldSample> {
    stats.validate()?;
    let mut rng: ChaCha8Rng = seeding::rng(seed, stream);
    let a = (-grid.step / stats.t_c).exp();
    let kick = stats.sigma_b * (1.0 - a * a).sqrt();
    let mut protons = Vec::with_capacity(triodes);
    for _ in 0..triodes {
        let mut pair: [Vec<Vec3>; 2] = [Vec::with_capacity(grid.points), Vec::with_capacity(grid.points)];
        for series in pair.iter_mut() {
            let mut x: Vec3 = [0, 1, 2].map(|_| stats.sigma_b * rng.sample::<f64, _>(StandardNormal));
            series.push(x);
            for _ in 1..grid.points {
                for c in x.iter_mut() {
                    *c = a * *c + kick * rng.sample::<f64, _>(StandardNormal);
                }
                series.push(x);
            }
        }
        protons.push(pair);
    }
    BathFieldSample::from_protons(grid, protons)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats() -> FieldStatistics {
        FieldStatistics { sigma_b: 0.7, t_c: 0.5 }
    }

    #[test]
    fn deterministic_per_seed() {
        let grid = TimeGrid::covering(0.0, 2.0, 0.01);
        let a = sample_bath_fields(7, 3, grid, stats(), 2).unwrap();
        let b = sample_bath_fields(7, 3, grid, stats(), 2).unwrap();
        assert_eq!(a, b);
        let c = sample_bath_fields(7, 4, grid, stats(), 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn average_holds_exactly() {
        let grid = TimeGrid::covering(0.0, 1.0, 0.05);
        let s = sample_bath_fields(1, 0, grid, stats(), 3).unwrap();
        for tau in 0..3 {
            for k in 0..grid.points {
                let (a, b) = (s.proton_series(tau, 0)[k], s.proton_series(tau, 1)[k]);
                for c in 0..3 {
                    assert_eq!(s.averaged_series(tau)[k][c], (a[c] + b[c]) / 2.0);
                }
            }
        }
    }

    // Mean within 5 standard errors, with the OU autocorrelation folded into
    // the effective sample size.
    #[test]
    fn zero_mean() {
        let st = stats();
        let grid = TimeGrid::covering(0.0, 2000.0, 0.05);
        let s = sample_bath_fields(11, 0, grid, st, 1).unwrap();
        let a = (-grid.step / st.t_c).exp();
        let n_eff = grid.points as f64 * (1.0 - a) / (1.0 + a);
        for p in 0..2 {
            for c in 0..3 {
                let mean: f64 = s.proton_series(0, p).iter().map(|b| b[c]).sum::<f64>() / grid.points as f64;
                assert!(mean.abs() < 5.0 * st.sigma_b / n_eff.sqrt(), "mean {mean}");
            }
        }
    }

    #[test]
    fn averaged_variance_is_half() {
        let st = stats();
        let grid = TimeGrid::covering(0.0, 4000.0, 0.25);
        let s = sample_bath_fields(5, 0, grid, st, 1).unwrap();
        let var = |xs: &mut dyn Iterator<Item = f64>| {
            let v: Vec<f64> = xs.collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        let mut ratios = Vec::new();
        for c in 0..3 {
            let vp = var(&mut s.proton_series(0, 0).iter().map(|b| b[c]));
            let va = var(&mut s.averaged_series(0).iter().map(|b| b[c]));
            assert!((vp / (st.sigma_b * st.sigma_b) - 1.0).abs() < 0.1, "{vp}");
            ratios.push(va / (st.sigma_b * st.sigma_b));
        }
        let mean_ratio = ratios.iter().sum::<f64>() / 3.0;
        assert!((mean_ratio - 0.5).abs() < 0.05, "{ratios:?}");
    }

    #[test]
    fn interpolation_and_grid_errors() {
        let grid = TimeGrid { start: 0.0, step: 1.0, points: 3 };
        let protons = vec![[vec![[0.0; 3], [2.0; 3], [4.0; 3]], vec![[0.0; 3]; 3]]];
        let s = BathFieldSample::from_protons(grid, protons).unwrap();
        assert_eq!(s.proton_at(0, 0, 1.5).unwrap(), [3.0; 3]);
        assert_eq!(s.averaged_at(0, 0.5).unwrap(), [0.5; 3]);
        assert!(matches!(s.proton_at(0, 0, 2.5), Err(Error::OutsideGrid { .. })));
        assert!(s.proton_at(0, 0, 2.0).is_ok());
    }

    #[test]
    fn rejects_bad_statistics() {
        let grid = TimeGrid::covering(0.0, 1.0, 0.1);
        assert!(sample_bath_fields(0, 0, grid, FieldStatistics { sigma_b: 0.0, t_c: 1.0 }, 1).is_err());
        assert!(sample_bath_fields(0, 0, grid, FieldStatistics { sigma_b: 1.0, t_c: -1.0 }, 1).is_err());
    }

    #[test]
    fn columnar_replay() {
        let grid = TimeGrid::covering(0.0, 0.5, 0.1);
        let s = sample_bath_fields(3, 0, grid, stats(), 2).unwrap();
        let back = BathFieldSample::from_columnar(&s.to_columnar()).unwrap();
        for tau in 0..2 {
            for p in 0..2 {
                assert_eq!(back.proton_series(tau, p), s.proton_series(tau, p));
            }
        }
        assert!((back.grid().step - grid.step).abs() < 1e-12);
    }
}
