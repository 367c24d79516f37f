//! Finite-volume Lyapunov exponents and the diagnostics built on them.

mod avalanche;
mod continuity;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use avalanche::{ap_multiscale_l, avalanche_check, APEstimate, APReport};
pub use continuity::{continuity_probe, ContinuityReport, Perturbation};

use crate::error::{invalid, Error, Result};
use crate::operator::{Orbit, Potential, Span};
use crate::torus::{sample_phases, Frequency, Phase, SamplePlan};

/// `L_N(y, ω, E)` averaged over a phase plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapEstimate {
    pub n: usize,
    pub y: Vec<f64>,
    pub value: f64,
    pub stderr: f64,
    pub sample_count: usize,
}

/// Mean and standard error of the mean, summed in input order.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

pub(crate) fn plan_phases(plan: &SamplePlan, dim: usize) -> Result<Vec<Phase>> {
    if plan.dim != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: plan.dim,
        });
    }
    sample_phases(plan)
}

/// `(1/N) log ‖M_N(x + iy, ω, E)‖` at a single phase.
pub fn log_norm_per_site(
    v: &Potential,
    x: &Phase,
    w: &Frequency,
    energy: f64,
    n: usize,
    y: &[f64],
) -> Result<f64> {
    let span = Span::first(n);
    if y.iter().all(|&t| t == 0.0) {
        let orbit = Orbit::new(v, x, w, span)?;
        Ok(orbit.transfer(span, energy).log_norm() / n as f64)
    } else {
        let orbit = Orbit::complex(v, x, y, w, span)?;
        Ok(orbit.transfer(span, Complex64::new(energy, 0.0)).log_norm() / n as f64)
    }
}

/// `L_N(y, ω, E) = (1/N) ∫ log ‖M_N(x + iy, ω, E)‖ dx` by sampling.
///
/// An empty `y` means the real case.
pub fn lyapunov_finite(
    v: &Potential,
    w: &Frequency,
    energy: f64,
    n: usize,
    y: &[f64],
    plan: &SamplePlan,
) -> Result<LyapEstimate> {
    if n == 0 {
        return Err(invalid("n", "scale must be at least 1"));
    }
    let y: Vec<f64> = if y.is_empty() { vec![0.0; v.dim()] } else { y.to_vec() };
    if y.len() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: y.len(),
        });
    }
    let phases = plan_phases(plan, v.dim())?;
    let samples: Vec<f64> = phases
        .par_iter()
        .map(|x| log_norm_per_site(v, x, w, energy, n, &y))
        .collect::<Result<_>>()?;
    let (value, stderr) = mean_stderr(&samples);
    Ok(LyapEstimate {
        n,
        y,
        value,
        stderr,
        sample_count: samples.len(),
    })
}

/// Largest finite-difference slope of `y ↦ L_N(y, ω, E)` along each
/// coordinate axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub n: usize,
    pub max_slope: f64,
    /// `(axis, y, L_N)` for every grid point.
    pub profile: Vec<(usize, f64, f64)>,
}

/// Slopes of `L_N(y)` over `y_grid` (values of one coordinate, the others
/// held at 0). The grid must lie in `|y| < ρ/2`.
pub fn lipschitz_in_y(
    v: &Potential,
    w: &Frequency,
    energy: f64,
    n: usize,
    y_grid: &[f64],
    plan: &SamplePlan,
) -> Result<SlopeReport> {
    if let Some(&bad) = y_grid.iter().find(|t| t.abs() >= v.rho() / 2.0) {
        return Err(invalid("y_grid", format!("|y| = {bad} is not below ρ/2 = {}", v.rho() / 2.0)));
    }
    let mut grid = y_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut profile = Vec::new();
    let mut max_slope: f64 = 0.0;
    for axis in 0..v.dim() {
        let mut prev: Option<(f64, f64)> = None;
        for &t in &grid {
            let mut y = vec![0.0; v.dim()];
            y[axis] = t;
            let l = lyapunov_finite(v, w, energy, n, &y, plan)?.value;
            if let Some((t0, l0)) = prev {
                max_slope = max_slope.max(((l - l0) / (t - t0)).abs());
            }
            prev = Some((t, l));
            profile.push((axis, t, l));
        }
    }
    Ok(SlopeReport {
        n,
        max_slope,
        profile,
    })
}

/// `E ↦ L_N(ω, E)` tabulated on a uniform energy grid and linearly
/// interpolated.
///
/// The orbit buffer of every phase is computed once and reused for all
/// energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovTable {
    pub n: usize,
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
}

impl LyapunovTable {
    pub fn build(
        v: &Potential,
        w: &Frequency,
        n: usize,
        window: (f64, f64),
        points: usize,
        plan: &SamplePlan,
    ) -> Result<Self> {
        if points < 2 || !(window.1 > window.0) {
            return Err(invalid("window", "need at least two points on a nonempty window"));
        }
        let span = Span::first(n);
        let orbits: Vec<Orbit<f64>> = plan_phases(plan, v.dim())?
            .iter()
            .map(|x| Orbit::new(v, x, w, span))
            .collect::<Result<_>>()?;
        let energies: Vec<f64> = (0..points)
            .map(|i| window.0 + (window.1 - window.0) * i as f64 / (points - 1) as f64)
            .collect();
        let values = energies
            .par_iter()
            .map(|&e| {
                let logs: Vec<f64> = orbits
                    .iter()
                    .map(|o| o.transfer(span, e).log_norm() / n as f64)
                    .collect();
                mean_stderr(&logs).0
            })
            .collect();
        Ok(LyapunovTable {
            n,
            energies,
            values,
        })
    }

    /// Linear interpolation, clamped at the ends.
    pub fn at(&self, energy: f64) -> f64 {
        let (lo, hi) = (self.energies[0], self.energies[self.energies.len() - 1]);
        let t = ((energy - lo) / (hi - lo) * (self.energies.len() - 1) as f64)
            .clamp(0.0, (self.energies.len() - 1) as f64);
        let i = (t.floor() as usize).min(self.energies.len() - 2);
        let f = t - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
