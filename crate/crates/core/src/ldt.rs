//! Empirical large deviations, the spectral form of the deviation bound,
//! Wegner fractions and eigenvalue-graph spreads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lyapunov::{mean_stderr, plan_phases};
use crate::operator::{Orbit, Potential, Span};
use crate::torus::{Frequency, Phase, SamplePlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// `log ‖M_N(x, ω, E)‖`.
    TransferNorm,
    /// `log |f_N(x, ω, E)|`.
    Determinant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// `L_N` averaged over the same phases as the deviations.
    SameSample,
    /// An externally supplied `L_N`.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LDTReport {
    pub n: usize,
    /// `p` in the threshold `N^p`.
    pub threshold_exponent: f64,
    pub l_n_ref: f64,
    pub l_n_stderr: f64,
    pub deviation_fraction: f64,
    pub target: Target,
    pub sample_count: usize,
}

/// Per-phase `(log target, log ‖M_N‖)` on `[1, N]`.
pub fn ldt_samples(
    v: &Potential,
    w: &Frequency,
    energy: f64,
    n: usize,
    plan: &SamplePlan,
    target: Target,
) -> Result<Vec<(f64, f64)>> {
    let span = Span::first(n);
    plan_phases(plan, v.dim())?
        .par_iter()
        .map(|x| {
            let orbit = Orbit::new(v, x, w, span)?;
            let norm = orbit.transfer(span, energy).log_norm();
            let t = match target {
                Target::TransferNorm => norm,
                Target::Determinant => orbit.det(span, energy, false).log_mag,
            };
            Ok((t, norm))
        })
        .collect()
}

/// Deviation fractions for several exponents `p` from one sample set.
pub fn ldt_fractions(samples: &[(f64, f64)], n: usize, ps: &[f64], reference: Reference) -> (f64, f64, Vec<f64>) {
    let per_site: Vec<f64> = samples.iter().map(|s| s.1 / n as f64).collect();
    let (mean, stderr) = mean_stderr(&per_site);
    let l_ref = match reference {
        Reference::SameSample => mean,
        Reference::Fixed(l) => l,
    };
    let center = n as f64 * l_ref;
    let fractions = ps
        .iter()
        .map(|&p| {
            let thr = (n as f64).powf(p);
            // −∞ (a zero determinant) always deviates
            let bad = samples.iter().filter(|s| !((s.0 - center).abs() <= thr)).count();
            bad as f64 / samples.len() as f64
        })
        .collect();
    (l_ref, stderr, fractions)
}

/// Fraction of phases with `|log target(x) − N·L_N| > N^p`.
pub fn ldt_measure(
    v: &Potential,
    w: &Frequency,
    energy: f64,
    n: usize,
    p: f64,
    plan: &SamplePlan,
    target: Target,
    reference: Reference,
) -> Result<LDTReport> {
    if n < 2 {
        return Err(invalid("n", "scale must be at least 2"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", "exponent must lie in (0, 1)"));
    }
    let samples = ldt_samples(v, w, energy, n, plan, target)?;
    let (l_n_ref, l_n_stderr, f) = ldt_fractions(&samples, n, &[p], reference);
    Ok(LDTReport {
        n,
        threshold_exponent: p,
        l_n_ref,
        l_n_stderr,
        deviation_fraction: f[0],
        target,
        sample_count: samples.len(),
    })
}

/// The implication "small resolvent ⇒ determinant not deviant" at one
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFormCheck {
    /// `log ‖(H_N − E)^{−1}‖ = −log dist(E, spec H_N)`.
    pub resolvent_log: f64,
    /// `log|f_N| − N·L_N`.
    pub det_gap: f64,
    /// `resolvent_log ≤ N^{σ/2}`.
    pub premise: bool,
    /// `det_gap > −N^{1−τ/2}`.
    pub conclusion: bool,
    pub consistent: bool,
}

/// Evaluates both sides of the spectral form on `[1, N]` with the given
/// `L_N`.
pub fn spectral_form_check(orbit: &Orbit<f64>, energy: f64, l_n: f64, sigma: f64, tau: f64) -> SpectralFormCheck {
    let span = orbit.span();
    let n = span.len() as f64;
    let h = orbit.hamiltonian(span);
    let dist = h.eigen(false).dist(energy);
    let resolvent_log = -dist.ln();
    let det_gap = orbit.det(span, energy, false).log_mag - n * l_n;
    let premise = resolvent_log <= n.powf(sigma / 2.0);
    let conclusion = det_gap > -n.powf(1.0 - tau / 2.0);
    SpectralFormCheck {
        resolvent_log,
        det_gap,
        premise,
        conclusion,
        consistent: !premise || conclusion,
    }
}

/// Largest `τ ∈ (0, 1]` for which every draw meeting the premise also meets
/// the conclusion, scaled by `safety`; `None` when even `τ → 0` fails.
pub fn fit_tau(checks: &[SpectralFormCheck], n: usize, safety: f64) -> Option<f64> {
    let ln = (n as f64).ln();
    let mut tau: f64 = 1.0;
    for c in checks.iter().filter(|c| c.premise && c.det_gap < 0.0) {
        // det_gap > −N^{1−τ/2}  ⇔  τ < 2(1 − log(−gap)/log N)
        let limit = 2.0 * (1.0 - (-c.det_gap).ln() / ln);
        if limit <= 0.0 {
            return None;
        }
        tau = tau.min(limit);
    }
    Some(tau * safety)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WegnerReport {
    pub n: usize,
    pub ell: usize,
    pub fraction: f64,
    pub sample_count: usize,
    /// `(2 log N)^{1/σ} ≤ ℓ ≤ N`.
    pub precondition: bool,
}

/// Fraction of phases with `dist(E, spec H_N(x, ω)) < exp(−ℓ)`.
pub fn wegner_fraction(
    v: &Potential,
    w: &Frequency,
    energy: f64,
    n: usize,
    ell: usize,
    sigma: f64,
    plan: &SamplePlan,
) -> Result<WegnerReport> {
    let span = Span::first(n);
    let delta = (-(ell as f64)).exp();
    let hits: Vec<bool> = plan_phases(plan, v.dim())?
        .par_iter()
        .map(|x| {
            let h = Orbit::new(v, x, w, span)?.hamiltonian(span);
            Ok(h.sturm_count(energy + delta) > h.sturm_count(energy - delta))
        })
        .collect::<Result<_>>()?;
    let lower = (2.0 * (n as f64).ln()).powf(1.0 / sigma);
    Ok(WegnerReport {
        n,
        ell,
        fraction: hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64,
        sample_count: hits.len(),
        precondition: lower <= ell as f64 && ell <= n,
    })
}

/// Straight segment `x(t) = from + t·delta`, `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub from: Phase,
    pub delta: Vec<f64>,
}

impl Segment {
    pub fn at(&self, t: f64) -> Phase {
        let d: Vec<f64> = self.delta.iter().map(|c| c * t).collect();
        self.from.translated(&d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadReport {
    pub j: usize,
    pub spread: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

/// Length of `{E_j^{(N)}(x(t), ω) : t ∈ [0,1]}` (`j` zero-based), sampled at
/// 2048 points and refined by doubling until it changes by less than 1%.
pub fn graph_spread(v: &Potential, w: &Frequency, n: usize, j: usize, path: &Segment) -> Result<SpreadReport> {
    if j >= n {
        return Err(invalid("j", format!("index must be below {n}")));
    }
    let span = Span::first(n);
    let eval = |t: f64| -> Result<f64> {
        Ok(Orbit::new(v, &path.at(t), w, span)?
            .hamiltonian(span)
            .kth_eigenvalue(j))
    };
    let mut samples = 2048usize;
    let mut values: Vec<f64> = (0..=samples)
        .into_par_iter()
        .map(|i| eval(i as f64 / samples as f64))
        .collect::<Result<_>>()?;
    let range = |vals: &[f64]| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (mut lo, mut hi) = range(&values);
    while samples < 1 << 16 {
        let mids: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|i| eval((2 * i + 1) as f64 / (2 * samples) as f64))
            .collect::<Result<_>>()?;
        values.extend(mids);
        samples *= 2;
        let (l2, h2) = range(&values);
        let (old, new) = (hi - lo, h2 - l2);
        lo = l2;
        hi = h2;
        if new - old <= 0.01 * new {
            break;
        }
    }
    Ok(SpreadReport {
        j,
        spread: hi - lo,
        min: lo,
        max: hi,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_tau_respects_draws() {
        let c = SpectralFormCheck {
            resolvent_log: 0.0,
            det_gap: -10.0,
            premise: true,
            conclusion: true,
            consistent: true,
        };
        let tau = fit_tau(&[c], 100, 1.0).unwrap();
        assert!((tau - 1.0).abs() < 1e-12);
    }
}
