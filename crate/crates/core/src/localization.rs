//! Localization of finite-volume eigenvectors, eigenvalue separation and
//! stabilization of eigenpairs across scales.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lyapunov::LyapunovTable;
use crate::operator::{EigenSystem, Orbit, Potential, Span, SymTridiagonal};
use crate::torus::{Frequency, Phase};

/// Interval and exterior decay of one normalized vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// Site of the largest `|ψ|` (first on ties).
    pub center: i64,
    pub interval: Span,
    pub mass_inside: f64,
    /// `None` when no site lies farther than the guard from the interval.
    pub decay_rate: Option<f64>,
}

/// `psi[0]` sits at `origin`. The interval is the smallest
/// `[m* − r, m* + r] ∩ volume` holding mass `1 − ε_mass`.
pub fn localize_eigenpair(psi: &[f64], origin: i64, eps_mass: f64, guard: usize) -> Localization {
    let n = psi.len();
    let c = (0..n).fold(0, |best, i| if psi[i].abs() > psi[best].abs() { i } else { best });
    let target = 1.0 - eps_mass;
    let (mut lo, mut hi) = (c, c);
    let mut mass = psi[c] * psi[c];
    while mass < target && (lo > 0 || hi + 1 < n) {
        if lo > 0 {
            lo -= 1;
            mass += psi[lo] * psi[lo];
        }
        if hi + 1 < n {
            hi += 1;
            mass += psi[hi] * psi[hi];
        }
    }
    let mut rate: Option<f64> = None;
    for (i, &p) in psi.iter().enumerate() {
        let d = if i < lo { lo - i } else { i.saturating_sub(hi) };
        if d > guard {
            let r = -p.abs().ln() / d as f64;
            rate = Some(rate.map_or(r, |q| q.min(r)));
        }
    }
    Localization {
        center: origin + c as i64,
        interval: Span::new(origin + lo as i64, origin + hi as i64),
        mass_inside: mass,
        decay_rate: rate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationProfile {
    pub j: usize,
    pub energy: f64,
    pub center: i64,
    pub interval: Span,
    pub mass_inside: f64,
    pub decay_rate: Option<f64>,
    /// `γ/4` with `γ` the Lyapunov estimate at `E_j`.
    pub rate_floor: f64,
}

impl LocalizationProfile {
    /// `decay_rate ≥ rate_floor`; an undefined rate does not meet it.
    pub fn decays(&self) -> bool {
        self.decay_rate.is_some_and(|r| r >= self.rate_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationRecord {
    pub min_gap: f64,
    /// `exp(−C_sep·|I|)`.
    pub bound: f64,
    pub ok: bool,
}

/// `min_{k≠j} |E_k − E_j| > exp(−C_sep·|I|)`.
pub fn separation_report(eigs: &EigenSystem, j: usize, interval_len: usize, c_sep: f64) -> SeparationRecord {
    let min_gap = eigs.gap(j);
    let bound = (-c_sep * interval_len as f64).exp();
    SeparationRecord {
        min_gap,
        bound,
        ok: min_gap > bound,
    }
}

/// Profiles and separation records for every eigenpair of `H_span(x, ω)`.
pub fn localization_batch(
    v: &Potential,
    x: &Phase,
    w: &Frequency,
    span: Span,
    eps_mass: f64,
    guard: usize,
    c_sep: f64,
    gamma: &LyapunovTable,
) -> Result<Vec<(LocalizationProfile, SeparationRecord)>> {
    if !(eps_mass > 0.0 && eps_mass < 1.0) {
        return Err(invalid("eps_mass", "must lie in (0, 1)"));
    }
    let orbit = Orbit::new(v, x, w, span)?;
    let eigs = orbit.hamiltonian(span).eigen(true);
    Ok((0..eigs.len())
        .into_par_iter()
        .map(|j| {
            let loc = localize_eigenpair(&eigs.vectors[j], span.a, eps_mass, guard);
            let sep = separation_report(&eigs, j, loc.interval.len(), c_sep);
            let profile = LocalizationProfile {
                j,
                energy: eigs.values[j],
                center: loc.center,
                interval: loc.interval,
                mass_inside: loc.mass_inside,
                decay_rate: loc.decay_rate,
                rate_floor: gamma.at(eigs.values[j]) / 4.0,
            };
            (profile, sep)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilizationRecord {
    /// `dist(E_{j₀}^{Λ₀}, spec H_Λ)`.
    pub lhs: f64,
    /// `|ψ_{j₀}^{Λ₀}(a₀)| + |ψ_{j₀}^{Λ₀}(b₀)|`.
    pub rhs: f64,
    pub ok: bool,
}

pub const STABILIZATION_TOL: f64 = 1e-8;

/// Compares an eigenvalue of `H_{Λ₀}` with the spectrum of `H_Λ ⊇ H_{Λ₀}`.
pub fn stabilization_bound(orbit: &Orbit<f64>, inner: Span, outer: Span, j0: usize) -> Result<StabilizationRecord> {
    if !outer.contains_span(&inner) || inner.is_empty() {
        return Err(invalid("inner", "need a nonempty Λ₀ ⊆ Λ"));
    }
    if j0 >= inner.len() {
        return Err(invalid("j0", format!("index must be below {}", inner.len())));
    }
    let small = orbit.hamiltonian(inner).eigen(true);
    let psi = &small.vectors[j0];
    let lhs = orbit.hamiltonian(outer).eigen(false).dist(small.values[j0]);
    let rhs = psi[0].abs() + psi[psi.len() - 1].abs();
    Ok(StabilizationRecord {
        lhs,
        rhs,
        ok: lhs <= rhs + STABILIZATION_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxEigenpair {
    /// `‖(A − E)φ‖`.
    pub residual: f64,
    /// Index of the eigenvalue in `(E − ε√2, E + ε√2)` with largest overlap.
    pub index: usize,
    pub eigenvalue: f64,
    pub overlap: f64,
    /// `overlap ≥ (2N)^{−1/2}`.
    pub overlap_ok: bool,
    /// Eigenvalues of `A` in `(E − η, E + η)`.
    pub multiplicity: Option<usize>,
    /// `‖φ − ψ‖` after sign alignment, when the multiplicity is one.
    pub distance: Option<f64>,
    /// `√2·ε/η`.
    pub distance_bound: Option<f64>,
}

impl ApproxEigenpair {
    pub fn ok(&self) -> bool {
        self.overlap_ok && self.distance.zip(self.distance_bound).map_or(true, |(d, b)| d < b)
    }
}

/// Locates an eigenpair of `a` near an approximate one `(E, φ)` with
/// `‖(A − E)φ‖ < ε`.
pub fn approx_eigenpair(a: &SymTridiagonal, phi: &[f64], energy: f64, eps: f64, eta: Option<f64>) -> Result<ApproxEigenpair> {
    let n = a.len();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phi.len(),
        });
    }
    let norm = phi.iter().map(|p| p * p).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(invalid("phi", "must be a unit vector"));
    }
    let ap = a.apply(phi);
    let residual = ap
        .iter()
        .zip(phi)
        .map(|(y, p)| (y - energy * p).powi(2))
        .sum::<f64>()
        .sqrt();
    if !(residual < eps) {
        return Err(invalid("eps", format!("residual {residual:e} is not below ε = {eps:e}")));
    }
    let eigs = a.eigen(true);
    let dot = |k: usize| eigs.vectors[k].iter().zip(phi).map(|(u, p)| u * p).sum::<f64>();
    let window = eps * 2f64.sqrt();
    let best = (0..n)
        .filter(|&k| (eigs.values[k] - energy).abs() < window)
        .map(|k| (k, dot(k).abs()))
        .max_by(|p, q| p.1.total_cmp(&q.1));
    let (index, overlap) = best.unwrap_or((eigs.nearest(energy).unwrap_or(0), 0.0));
    let mut out = ApproxEigenpair {
        residual,
        index,
        eigenvalue: eigs.values[index],
        overlap,
        overlap_ok: best.is_some() && overlap >= (2.0 * n as f64).powf(-0.5),
        multiplicity: None,
        distance: None,
        distance_bound: None,
    };
    if let Some(eta) = eta {
        let inside: Vec<usize> = (0..n).filter(|&k| (eigs.values[k] - energy).abs() < eta).collect();
        out.multiplicity = Some(inside.len());
        if inside.len() == 1 {
            let k = inside[0];
            let s = dot(k).signum();
            let d = eigs.vectors[k]
                .iter()
                .zip(phi)
                .map(|(u, p)| (p - s * u).powi(2))
                .sum::<f64>()
                .sqrt();
            out.distance = Some(d);
            out.distance_bound = Some(2f64.sqrt() * eps / eta);
        }
    }
    Ok(out)
}

/// Eigenpair `j` on `[−N, N]` matched to scale `N′` by overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleMatch {
    pub n: usize,
    pub j: usize,
    pub n_prime: usize,
    pub j_prime: usize,
    pub energy_gap: f64,
    /// `‖ψ_j − ψ′_{j′}‖` after zero extension and sign alignment.
    pub vector_distance: f64,
    pub overlap: f64,
    /// Runner-up overlap within `10⁻³` of the best.
    pub ambiguous: bool,
    /// `|ψ_j(−N)| + |ψ_j(N)|`.
    pub boundary_mass: f64,
}

pub const AMBIGUITY: f64 = 1e-3;

fn match_systems(n: usize, j: usize, small: &EigenSystem, n2: usize, big: &EigenSystem) -> ScaleMatch {
    let psi = &small.vectors[j];
    let off = n2 - n;
    let overlaps: Vec<f64> = big
        .vectors
        .iter()
        .map(|u| u[off..off + psi.len()].iter().zip(psi).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let mut order: Vec<usize> = (0..overlaps.len()).collect();
    order.sort_by(|&p, &q| overlaps[q].abs().total_cmp(&overlaps[p].abs()).then(p.cmp(&q)));
    let jp = order[0];
    let best = overlaps[jp].abs();
    let ambiguous = order.get(1).is_some_and(|&k| best - overlaps[k].abs() < AMBIGUITY);
    let s = overlaps[jp].signum();
    let u = &big.vectors[jp];
    let mut dist2 = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        let p = if i >= off && i < off + psi.len() { psi[i - off] } else { 0.0 };
        dist2 += (p - s * ui).powi(2);
    }
    ScaleMatch {
        n,
        j,
        n_prime: n2,
        j_prime: jp,
        energy_gap: (small.values[j] - big.values[jp]).abs(),
        vector_distance: dist2.sqrt(),
        overlap: best.min(1.0),
        ambiguous,
        boundary_mass: psi[0].abs() + psi[psi.len() - 1].abs(),
    }
}

/// Matches eigenpair `j` of `H_{[−N,N]}` with an eigenpair of `H_{[−N′,N′]}`.
pub fn match_scales(v: &Potential, x: &Phase, w: &Frequency, n: usize, j: usize, n_prime: usize) -> Result<ScaleMatch> {
    if n_prime < n {
        return Err(invalid("n_prime", "need N ≤ N′"));
    }
    if j > 2 * n {
        return Err(invalid("j", format!("index must be at most {}", 2 * n)));
    }
    let orbit = Orbit::new(v, x, w, Span::centered(n_prime))?;
    let small = orbit.hamiltonian(Span::centered(n)).eigen(true);
    let big = orbit.hamiltonian(Span::centered(n_prime)).eigen(true);
    Ok(match_systems(n, j, &small, n_prime, &big))
}

/// Scales `N, N², N⁴, …` up to `cap`, the last one clipped to `cap`.
pub fn stabilization_scales(n: usize, cap: usize) -> Vec<usize> {
    let mut out = vec![n];
    let mut s = n;
    while s < cap {
        s = s.saturating_mul(s).min(cap);
        if s <= *out.last().unwrap() {
            break;
        }
        out.push(s);
    }
    out
}

/// Follows eigenpair `j` through [`stabilization_scales`]`(n, cap)`.
pub fn stabilization_chain(v: &Potential, x: &Phase, w: &Frequency, n: usize, j: usize, cap: usize) -> Result<Vec<ScaleMatch>> {
    Ok(stabilization_chains(v, x, w, n, &[j], cap)?.remove(0))
}

/// [`stabilization_chain`] for several starting indices, sharing the
/// eigensystems.
pub fn stabilization_chains(
    v: &Potential,
    x: &Phase,
    w: &Frequency,
    n: usize,
    js: &[usize],
    cap: usize,
) -> Result<Vec<Vec<ScaleMatch>>> {
    let scales = stabilization_scales(n.max(1), cap);
    if let Some(&j) = js.iter().find(|&&j| j > 2 * scales[0]) {
        return Err(invalid("j", format!("index {j} exceeds 2N = {}", 2 * scales[0])));
    }
    let top = *scales.last().unwrap();
    let orbit = Orbit::new(v, x, w, Span::centered(top))?;
    let systems: Vec<EigenSystem> = scales
        .par_iter()
        .map(|&s| orbit.hamiltonian(Span::centered(s)).eigen(true))
        .collect();
    Ok(js
        .par_iter()
        .map(|&j| {
            let mut out = Vec::new();
            let mut jk = j;
            for k in 1..scales.len() {
                let m = match_systems(scales[k - 1], jk, &systems[k - 1], scales[k], &systems[k]);
                jk = m.j_prime;
                out.push(m);
            }
            out
        })
        .collect())
}

/// Generalized-eigenfunction diagnostic on `[−N, N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProbe {
    pub n: usize,
    pub energy: f64,
    /// Site where the left and right Dirichlet solutions are joined.
    pub glue_site: i64,
    /// `|sin|` of the angle between the two solutions at the glue site; zero
    /// exactly when the joined function solves the equation everywhere.
    pub mismatch: f64,
    pub is_solution: bool,
    /// Growth rate of the solution with the right-hand data at 0 and 1,
    /// continued to `−N`.
    pub left_growth: f64,
    /// `max_m [log|ψ(m)| − log(1+|m|)] − log max(|ψ(0)|, |ψ(1)|)`.
    pub poly_excess: f64,
    pub polynomially_bounded: bool,
    /// `min (log|ψ(m*)| − log|ψ(m)|)/|m − m*|` over `|m − m*| ≥ N/4`.
    pub decay_rate: f64,
}

pub const SOLUTION_TOL: f64 = 1e-6;

/// `log|u(m)|` for the solution of `u(m+1) + u(m−1) = (V(m) − E)u(m)`
/// started from zero just outside one end, renormalized as it grows.
fn dirichlet_log_solution(vals: &[f64], energy: f64, from_left: bool) -> (Vec<f64>, Vec<f64>) {
    let n = vals.len();
    let mut log = vec![0.0; n];
    let mut sign = vec![1.0; n];
    let (mut prev, mut cur, mut offset) = (0.0f64, 1.0f64, 0.0f64);
    for step in 0..n {
        let i = if from_left { step } else { n - 1 - step };
        log[i] = cur.abs().ln() + offset;
        sign[i] = cur.signum();
        let next = (vals[i] - energy) * cur - prev;
        prev = cur;
        cur = next;
        let s = prev.abs().max(cur.abs());
        if s > 1e100 || (s < 1e-100 && s > 0.0) {
            prev /= s;
            cur /= s;
            offset += s.ln();
        }
    }
    (log, sign)
}

/// Joins the left and right Dirichlet solutions at `E` where their product
/// peaks, then measures boundedness and decay of the result.
pub fn generalized_decay_probe(v: &Potential, x: &Phase, w: &Frequency, energy: f64, n: usize, poly_c: f64) -> Result<DecayProbe> {
    if n == 0 {
        return Err(invalid("n", "scale must be at least 1"));
    }
    let span = Span::centered(n);
    let orbit = Orbit::new(v, x, w, span)?;
    let vals = orbit.values();
    let (ll, ls) = dirichlet_log_solution(vals, energy, true);
    let (rl, rs) = dirichlet_log_solution(vals, energy, false);
    let len = vals.len();
    let c = (0..len).fold(0, |b, i| if ll[i] + rl[i] > ll[b] + rl[b] { i } else { b });
    // normalized Wronskian at (c, c+1), or (c−1, c) at the right end
    let (p, q) = if c + 1 < len { (c, c + 1) } else { (c - 1, c) };
    let unit = |l: &[f64], s: &[f64]| {
        let (a, b) = (s[p] * (l[p] - l[c]).exp(), s[q] * (l[q] - l[c]).exp());
        let r = a.hypot(b);
        (a / r, b / r)
    };
    let (la, lb) = unit(&ll, &ls);
    let (ra, rb) = unit(&rl, &rs);
    let mismatch = (la * rb - lb * ra).abs();
    let glued: Vec<f64> = (0..len)
        .map(|i| if i <= c { ll[i] - ll[c] } else { rl[i] - rl[c] })
        .collect();
    let zero = span.index(0);
    let at0 = glued[zero].max(glued[zero + 1]);
    let site = |i: usize| i as i64 + span.a;
    let poly_excess = (0..len)
        .map(|i| glued[i] - (1.0 + site(i).abs() as f64).ln())
        .fold(f64::NEG_INFINITY, f64::max)
        - at0;
    let r0 = rl[zero].max(rl[zero + 1]);
    let left_growth = (rl[0] - r0) / n as f64;
    let peak = (0..len).fold(0, |b, i| if glued[i] > glued[b] { i } else { b });
    let guard = (n / 4).max(1);
    let decay_rate = (0..len)
        .filter(|&i| i.abs_diff(peak) >= guard)
        .map(|i| (glued[peak] - glued[i]) / i.abs_diff(peak) as f64)
        .fold(f64::INFINITY, f64::min);
    let is_solution = mismatch <= SOLUTION_TOL;
    Ok(DecayProbe {
        n,
        energy,
        glue_site: site(c),
        mismatch,
        is_solution,
        left_growth,
        poly_excess,
        polynomially_bounded: is_solution && poly_excess <= poly_c.ln(),
        decay_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_vector() {
        let mut psi = vec![0.0; 9];
        psi[4] = 1.0;
        let l = localize_eigenpair(&psi, 1, 0.01, 1);
        assert_eq!(l.center, 5);
        assert_eq!(l.interval, Span::new(5, 5));
        assert_eq!(l.decay_rate, Some(f64::INFINITY));
    }

    #[test]
    fn uniform_vector_has_no_exterior() {
        let n = 100;
        let psi = vec![1.0 / (n as f64).sqrt(); n];
        let l = localize_eigenpair(&psi, 1, 0.05, 10);
        assert!(l.interval.len() >= 95);
        assert_eq!(l.decay_rate, None);
    }

    #[test]
    fn scale_chain() {
        assert_eq!(stabilization_scales(10, 2000), vec![10, 100, 2000]);
        assert_eq!(stabilization_scales(50, 2000), vec![50, 2000]);
        assert_eq!(stabilization_scales(3000, 2000), vec![3000]);
    }
}
