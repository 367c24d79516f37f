//! Interval-set algebra, restricted spectrum sets and spectral homogeneity.

mod intervals;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use intervals::{Endpoint, Interval, IntervalSet};

use crate::error::{invalid, Error, Result};
use crate::lyapunov::{plan_phases, LyapunovTable};
use crate::operator::{Orbit, Potential, Span};
use crate::torus::{Frequency, Phase, SamplePlan};

/// Largest scale a restricted spectrum may use.
pub const SCALE_CAP: usize = 4096;

/// `spec H_{[−N, N]}(x, ω)` as degenerate intervals.
pub fn finite_spectrum_set(v: &Potential, w: &Frequency, x: &Phase, n: usize) -> Result<IntervalSet<f64>> {
    let span = Span::centered(n);
    let orbit = Orbit::new(v, x, w, span)?;
    Ok(IntervalSet::from_points(&orbit.hamiltonian(span).eigenvalues()))
}

/// Parameters of `𝔖_{N,ω}(s, k₀, ρ) = ⋃_x ⋂_{k ≤ k₀} (spec H_{[−N⁽ᵏ⁾, N⁽ᵏ⁾]}(x, ω))^{(ρ_k)}`
/// with `N⁽ᵏ⁾ = N^{s^k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedSpectrumSpec {
    pub n: usize,
    pub s: f64,
    pub k0: usize,
    /// `ρ_0, …, ρ_{k₀}`.
    pub rho: Vec<f64>,
    pub plan: SamplePlan,
    /// Only energies in this window are resolved; `None` means the whole
    /// spectrum.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

fn default_cap() -> usize {
    SCALE_CAP
}

/// `ρ_0 = exp(−N^{1/4})`.
pub fn default_rho0(n: usize) -> f64 {
    (-(n as f64).powf(0.25)).exp()
}

impl RestrictedSpectrumSpec {
    /// `ρ_0 = exp(−N^{1/4})` (or `rho0`), `ρ_k = exp(−γN/10)` for `k ≥ 1`.
    pub fn with_decay(n: usize, s: f64, k0: usize, gamma: f64, rho0: Option<f64>, plan: SamplePlan) -> Self {
        let mut rho = vec![rho0.unwrap_or_else(|| default_rho0(n))];
        rho.extend(std::iter::repeat((-gamma * n as f64 / 10.0).exp()).take(k0));
        RestrictedSpectrumSpec {
            n,
            s,
            k0,
            rho,
            plan,
            window: None,
            cap: SCALE_CAP,
        }
    }

    /// Base scale `4N`, depth 1, `ρ = (10⁻⁸, 10⁻⁸)`.
    pub fn reference(n: usize, s: f64, plan: SamplePlan) -> Self {
        RestrictedSpectrumSpec {
            n: 4 * n,
            s,
            k0: 1,
            rho: vec![1e-8; 2],
            plan,
            window: None,
            cap: SCALE_CAP,
        }
    }

    pub fn with_window(mut self, window: (f64, f64)) -> Self {
        self.window = Some(window);
        self
    }

    /// `N⁽ᵏ⁾ = ⌊N^{s^k}⌋` for `k = 0..=k₀`.
    pub fn scales(&self) -> Result<Vec<usize>> {
        if self.n == 0 || !(self.s > 1.0) {
            return Err(invalid("s", "need N ≥ 1 and s > 1"));
        }
        if self.rho.len() != self.k0 + 1 || self.rho.iter().any(|r| !(*r > 0.0)) {
            return Err(invalid("rho", "need k₀ + 1 positive radii"));
        }
        if let Some((lo, hi)) = self.window {
            if !(hi >= lo) {
                return Err(invalid("window", "need E′ ≤ E″"));
            }
        }
        (0..=self.k0)
            .map(|k| {
                let t = (self.n as f64).powf(self.s.powi(k as i32));
                let r = t.round();
                let scale = if (t - r).abs() <= 1e-9 * t { r } else { t.floor() };
                if scale > self.cap as f64 {
                    Err(Error::ScaleCap {
                        scale: scale as u64,
                        cap: self.cap as u64,
                    })
                } else {
                    Ok(scale as usize)
                }
            })
            .collect()
    }
}

fn whole_window(v: &Potential) -> (f64, f64) {
    let s = v.sup_norm() + 2.0 + 1e-9;
    (-s, s)
}

/// The restricted set at one phase, resolved within `window`.
fn restricted_at(v: &Potential, w: &Frequency, x: &Phase, scales: &[usize], rho: &[f64], window: (f64, f64)) -> Result<IntervalSet<f64>> {
    let top = *scales.last().unwrap();
    let orbit = Orbit::new(v, x, w, Span::centered(top))?;
    let mut current = IntervalSet::from_closed(&[window])?;
    for (&n, &r) in scales.iter().zip(rho) {
        let h = orbit.hamiltonian(Span::centered(n));
        let mut points = Vec::new();
        for p in current.parts() {
            points.extend(h.eigenvalues_in(p.lo - r, p.hi + r));
        }
        current = current.intersect(&IntervalSet::from_points(&points).fatten(r));
        if current.is_empty() {
            break;
        }
    }
    Ok(current)
}

/// `𝔖_{N,ω}(s, k₀, ρ)` over the phases of `spec.plan`, intersected with the
/// window.
pub fn restricted_spectrum(spec: &RestrictedSpectrumSpec, v: &Potential, w: &Frequency) -> Result<IntervalSet<f64>> {
    let scales = spec.scales()?;
    let window = spec.window.unwrap_or_else(|| whole_window(v));
    let per_phase: Vec<IntervalSet<f64>> = plan_phases(&spec.plan, v.dim())?
        .par_iter()
        .map(|x| restricted_at(v, w, x, &scales, &spec.rho, window))
        .collect::<Result<_>>()?;
    Ok(IntervalSet::union_all(&per_phase))
}

/// Inclusion and excess of a restricted set against a reference for `S_ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    pub n: usize,
    pub window: (f64, f64),
    /// `mes((reference ∖ 𝔖) ∩ window)`.
    pub inclusion_defect: f64,
    /// `mes((𝔖 ∖ reference) ∩ window)`.
    pub excess: f64,
    pub measure: f64,
    pub reference_measure: f64,
    /// `exp(−γN/20)`.
    pub excess_bound: f64,
    pub gamma: f64,
    pub rho: Vec<f64>,
}

/// Compares two already computed sets on `window`.
pub fn compare_sets(set: &IntervalSet<f64>, reference: &IntervalSet<f64>, window: (f64, f64)) -> Result<(f64, f64)> {
    let win = IntervalSet::from_closed(&[window])?;
    let (s, r) = (set.intersect(&win), reference.intersect(&win));
    Ok((r.difference(&s).measure(), s.difference(&r).measure()))
}

/// `min γ` over the window from a Lyapunov table at scale 512.
pub fn window_gamma(v: &Potential, w: &Frequency, window: (f64, f64)) -> Result<f64> {
    let plan = SamplePlan::new(v.dim(), 32, crate::torus::Scheme::LowDiscrepancy);
    let (lo, hi) = if window.1 > window.0 { window } else { (window.0 - 1e-3, window.0 + 1e-3) };
    Ok(LyapunovTable::build(v, w, 512, (lo, hi), 16, &plan)?.min())
}

/// Builds `𝔖_{N,ω}` with the decaying radii and compares it with the
/// reference construction at base `4N`.
pub fn compare_with_reference(
    v: &Potential,
    w: &Frequency,
    n: usize,
    s: f64,
    k0: usize,
    rho0: Option<f64>,
    window: (f64, f64),
    plan: &SamplePlan,
    reference_plan: &SamplePlan,
) -> Result<ReferenceComparison> {
    let gamma = window_gamma(v, w, window)?;
    let spec = RestrictedSpectrumSpec::with_decay(n, s, k0, gamma, rho0, plan.clone()).with_window(window);
    let reference = RestrictedSpectrumSpec::reference(n, s, reference_plan.clone()).with_window(window);
    let set = restricted_spectrum(&spec, v, w)?;
    let refset = restricted_spectrum(&reference, v, w)?;
    let (inclusion_defect, excess) = compare_sets(&set, &refset, window)?;
    Ok(ReferenceComparison {
        n,
        window,
        inclusion_defect,
        excess,
        measure: set.measure(),
        reference_measure: refset.measure(),
        excess_bound: (-gamma * n as f64 / 20.0).exp(),
        gamma,
        rho: spec.rho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityRow {
    pub energy: f64,
    pub delta: f64,
    /// `mes(S ∩ (E − δ, E + δ)) / δ`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityProfile {
    pub rows: Vec<HomogeneityRow>,
    /// `(δ, min ratio)` per requested `δ`.
    pub min_ratio: Vec<(f64, f64)>,
    /// The floor the ratios are compared with.
    pub floor: f64,
}

impl HomogeneityProfile {
    pub fn holds(&self) -> bool {
        self.min_ratio.iter().all(|&(_, m)| m > self.floor)
    }
}

/// Ratios at up to `samples` energies of `S ∩ window`: the midpoints of
/// evenly spaced components.
pub fn homogeneity_profile(s: &IntervalSet<f64>, window: (f64, f64), deltas: &[f64], samples: usize) -> Result<HomogeneityProfile> {
    if deltas.iter().any(|d| !(*d > 0.0)) || samples == 0 {
        return Err(invalid("delta", "need positive δ and at least one sample"));
    }
    let inside = s.intersect(&IntervalSet::from_closed(&[window])?);
    let parts = inside.parts();
    let picks: Vec<usize> = if parts.len() <= samples {
        (0..parts.len()).collect()
    } else {
        (0..samples).map(|i| i * (parts.len() - 1) / (samples - 1).max(1)).collect()
    };
    let mut rows = Vec::new();
    let mut min_ratio = Vec::new();
    for &d in deltas {
        let mut m = f64::INFINITY;
        for &i in &picks {
            let e = 0.5 * (parts[i].lo + parts[i].hi);
            let ball = IntervalSet::from_parts(vec![Interval {
                lo: e - d,
                hi: e + d,
                lo_closed: false,
                hi_closed: false,
            }]);
            let ratio = s.intersect(&ball).measure() / d;
            m = m.min(ratio);
            rows.push(HomogeneityRow { energy: e, delta: d, ratio });
        }
        min_ratio.push((d, m));
    }
    Ok(HomogeneityProfile {
        rows,
        min_ratio,
        floor: 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_respect_cap() {
        let plan = SamplePlan::new(2, 1, crate::torus::Scheme::Grid);
        let spec = RestrictedSpectrumSpec::with_decay(40, 2.0, 1, 1.0, None, plan.clone());
        assert_eq!(spec.scales().unwrap(), vec![40, 1600]);
        let spec = RestrictedSpectrumSpec::with_decay(64, 2.0, 1, 1.0, None, plan.clone());
        assert_eq!(spec.scales().unwrap(), vec![64, 4096]);
        let spec = RestrictedSpectrumSpec::with_decay(80, 2.0, 1, 1.0, None, plan);
        assert!(matches!(spec.scales(), Err(Error::ScaleCap { .. })));
    }
}
