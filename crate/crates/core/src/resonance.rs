//! Non-double-resonance scans, lacunary scale ladders and empirical
//! double-resonance statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lyapunov::{lyapunov_finite, plan_phases};
use crate::operator::{Orbit, Potential, Span};
use crate::torus::{Frequency, SamplePlan};

/// `log|f_{[n, n+ℓ−1]}(x, ω, E)|` for every `n` in `range`.
pub fn window_logdets(orbit: &Orbit<f64>, energy: f64, ell: usize, range: Span) -> Vec<f64> {
    (range.a..=range.b)
        .into_par_iter()
        .map(|n| orbit.det(Span::new(n, n + ell as i64 - 1), energy, false).log_mag)
        .collect()
}

/// Lengths of the maximal runs of `Λ ∖ under`, in order.
fn runs(span: Span, under: &[i64]) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let mut start = span.a;
    for &u in under {
        if u > start {
            out.push((start, u - 1));
        }
        start = u + 1;
    }
    if start <= span.b {
        out.push((start, span.b));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NDRReport {
    pub ell: usize,
    pub span: Span,
    /// `ℓ L_ℓ − C ℓ^{1−τ/3}`.
    pub threshold: f64,
    pub constant: f64,
    /// Sites where the window determinant is at or below the threshold.
    pub failures: Vec<i64>,
    /// `failures` together with the absorbed short runs.
    pub under: Vec<i64>,
    pub k_raw: usize,
    pub k: usize,
    /// Shortest component of `Λ ∖ failures`, before absorption.
    pub min_component_raw: Option<usize>,
    /// Shortest component of `Λ ∖ under`.
    pub min_component: Option<usize>,
    /// `ℓ^{2/σ}`.
    pub component_floor: f64,
    pub logdets: Vec<f64>,
}

impl NDRReport {
    /// `K ≤ K_target` with every component longer than `ℓ^{2/σ}`.
    pub fn is_ndr(&self, k_target: usize) -> bool {
        self.k <= k_target && self.min_component.map_or(true, |m| m as f64 > self.component_floor)
    }
}

/// Classifies every `n ∈ Λ` by `log|f_{[n,n+ℓ−1]}| > ℓ L_ℓ − C ℓ^{1−τ/3}`.
///
/// When failures exist, runs of passing sites no longer than `ℓ^{2/σ}` are
/// absorbed into the failure set.
pub fn ndr_scan(
    orbit: &Orbit<f64>,
    energy: f64,
    ell: usize,
    span: Span,
    constant: f64,
    l_ell: f64,
    sigma: f64,
    tau: f64,
) -> Result<NDRReport> {
    if ell < 2 {
        return Err(invalid("ell", "window length must be at least 2"));
    }
    if span.is_empty() {
        return Err(invalid("span", "Λ must be nonempty"));
    }
    let l = ell as f64;
    let threshold = l * l_ell - constant * l.powf(1.0 - tau / 3.0);
    let logdets = window_logdets(orbit, energy, ell, span);
    let failures: Vec<i64> = (span.a..=span.b)
        .zip(&logdets)
        .filter(|(_, &g)| !(g > threshold))
        .map(|(n, _)| n)
        .collect();
    let component_floor = l.powf(2.0 / sigma);
    let raw_runs = runs(span, &failures);
    let shortest = |r: &[(i64, i64)]| r.iter().map(|(a, b)| (b - a + 1) as usize).min();
    let mut under = failures.clone();
    if !failures.is_empty() {
        for &(a, b) in &raw_runs {
            if ((b - a + 1) as f64) <= component_floor {
                under.extend(a..=b);
            }
        }
        under.sort_unstable();
    }
    let min_component = shortest(&runs(span, &under));
    Ok(NDRReport {
        ell,
        span,
        threshold,
        constant,
        k_raw: failures.len(),
        k: under.len(),
        min_component_raw: shortest(&raw_runs),
        min_component,
        component_floor,
        failures,
        under,
        logdets,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderLevel {
    pub c_lo: f64,
    pub c_hi: f64,
    /// `ℓ̄_k = ⌊exp(C̄_k ℓ^{σ/2})⌋`.
    pub scale: f64,
    /// `K_k = ⌈exp(C̱_k ℓ^{σ/2})⌉`.
    pub size: f64,
    /// `K_k ≤ ℓ̄_k^{(1−τ)/10}`.
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LacunaryLadder {
    pub ell: usize,
    pub sigma: f64,
    pub tau: f64,
    pub levels: Vec<LadderLevel>,
    /// `ℓ̄_top < exp(c ℓ^σ)`.
    pub top_ok: bool,
}

impl LacunaryLadder {
    pub fn admissible(&self) -> bool {
        self.top_ok && self.levels.iter().all(|l| l.admissible)
    }
}

/// Scales and sizes for constants `(C̱_k, C̄_k)` with
/// `C̱_1 < C̄_1 < C̱_2 < …`.
pub fn ladder(ell: usize, sigma: f64, tau: f64, constants: &[(f64, f64)], c_top: f64) -> Result<LacunaryLadder> {
    let flat: Vec<f64> = constants.iter().flat_map(|&(a, b)| [a, b]).collect();
    if flat.is_empty() || flat.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("constants", "need C̱_1 < C̄_1 < C̱_2 < …"));
    }
    let base = (ell as f64).powf(sigma / 2.0);
    let levels: Vec<LadderLevel> = constants
        .iter()
        .map(|&(c_lo, c_hi)| {
            let scale = (c_hi * base).exp().floor();
            let size = (c_lo * base).exp().ceil();
            LadderLevel {
                c_lo,
                c_hi,
                scale,
                size,
                admissible: size <= scale.powf((1.0 - tau) / 10.0),
            }
        })
        .collect();
    let top = levels.last().map_or(0.0, |l| l.scale);
    Ok(LacunaryLadder {
        ell,
        sigma,
        tau,
        levels,
        top_ok: top < (c_top * (ell as f64).powf(sigma)).exp(),
    })
}

/// `(q − 1)²` with `q = 2^{2d+1}`, the number of ladder levels the
/// elimination argument asks for on `T^d`.
pub fn required_level_count(d: u32) -> u64 {
    let q = 1u64 << (2 * d + 1);
    (q - 1) * (q - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceScan {
    pub ell: usize,
    pub range: Span,
    /// `ℓ L_ℓ − ℓ^{1−τ/2}`.
    pub threshold: f64,
    pub logdets: Vec<f64>,
    /// Sorted sites whose window determinant falls below the threshold.
    pub positions: Vec<i64>,
    /// `(k, #{i<j : 2^k ≤ |m_i − m_j| < 2^{k+1}})` for nonempty bins.
    pub histogram: Vec<(u32, usize)>,
    /// `ℓ ≤ N^{σ/2}`.
    pub guard_ok: bool,
}

impl ResonanceScan {
    /// Largest distance between two resonant sites (0 with fewer than two).
    pub fn max_separation(&self) -> i64 {
        match (self.positions.first(), self.positions.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }
}

/// Windows `[m, m+ℓ−1]`, `m ∈ range`, with `log|f| < ℓ L_ℓ − ℓ^{1−τ/2}`.
pub fn double_resonance_scan(
    orbit: &Orbit<f64>,
    energy: f64,
    ell: usize,
    range: Span,
    l_ell: f64,
    sigma: f64,
    tau: f64,
) -> Result<ResonanceScan> {
    if ell < 2 || range.is_empty() {
        return Err(invalid("ell", "need ℓ ≥ 2 and a nonempty range"));
    }
    let l = ell as f64;
    let threshold = l * l_ell - l.powf(1.0 - tau / 2.0);
    let logdets = window_logdets(orbit, energy, ell, range);
    let positions: Vec<i64> = (range.a..=range.b)
        .zip(&logdets)
        .filter(|(_, &g)| g < threshold)
        .map(|(m, _)| m)
        .collect();
    let mut bins = std::collections::BTreeMap::new();
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            *bins.entry((b - a).ilog2()).or_insert(0usize) += 1;
        }
    }
    Ok(ResonanceScan {
        ell,
        range,
        threshold,
        logdets,
        positions,
        histogram: bins.into_iter().collect(),
        guard_ok: l <= (range.len() as f64).powf(sigma / 2.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceProfile {
    pub ell: usize,
    pub n: usize,
    /// Per sampled frequency, the largest resonant separation over phases.
    pub max_separation: Vec<i64>,
    pub frequencies: usize,
}

impl ResonanceProfile {
    /// Fraction of frequencies with a double resonance at separation `≥ t₀`.
    pub fn fraction(&self, t0: f64) -> f64 {
        let hits = self.max_separation.iter().filter(|&&s| s as f64 >= t0).count();
        hits as f64 / self.frequencies as f64
    }
}

/// Scans `[1, N]` for every sampled `(ω, x)`; each `ω` draws its
/// coordinates from `omega_plan` and uses `a`, `b` from `template`.
pub fn resonance_profile(
    v: &Potential,
    energy: f64,
    ell: usize,
    n: usize,
    template: &Frequency,
    omega_plan: &SamplePlan,
    x_plan: &SamplePlan,
    sigma: f64,
    tau: f64,
) -> Result<ResonanceProfile> {
    let omegas = plan_phases(omega_plan, v.dim())?;
    let phases = plan_phases(x_plan, v.dim())?;
    let range = Span::first(n);
    let max_separation = omegas
        .iter()
        .map(|o| {
            let w = template.with_coords(o.coords())?;
            let l_ell = lyapunov_finite(v, &w, energy, ell, &[], x_plan)?.value;
            phases
                .iter()
                .map(|x| {
                    let orbit = Orbit::new(v, x, &w, Span::new(1, (n + ell - 1) as i64))?;
                    Ok(double_resonance_scan(&orbit, energy, ell, range, l_ell, sigma, tau)?.max_separation())
                })
                .try_fold(0, |m, s: Result<i64>| s.map(|s| m.max(s)))
        })
        .collect::<Result<_>>()?;
    Ok(ResonanceProfile {
        ell,
        n,
        max_separation,
        frequencies: omegas.len(),
    })
}

/// Fraction of sampled frequencies with a double resonance at separation
/// `≥ t₀`.
pub fn resonant_frequency_fraction(
    v: &Potential,
    energy: f64,
    ell: usize,
    n: usize,
    template: &Frequency,
    omega_plan: &SamplePlan,
    x_plan: &SamplePlan,
    t0: f64,
    sigma: f64,
    tau: f64,
) -> Result<f64> {
    Ok(resonance_profile(v, energy, ell, n, template, omega_plan, x_plan, sigma, tau)?.fraction(t0))
}
