//! Green's functions by Cramer's rule, Poisson's formula and the covering
//! lemma.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::operator::{Orbit, Span};

/// `G_{[a,b]}(j, k) = ((H_{[a,b]} − E)^{−1})_{jk}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensEntry {
    pub span: Span,
    pub j: i64,
    pub k: i64,
    pub value: f64,
    /// `log|f_{[a, min(j,k)−1]}|`.
    pub log_left: f64,
    /// `log|f_{[max(j,k)+1, b]}|`.
    pub log_right: f64,
    /// `log|f_{[a,b]}|`.
    pub log_denominator: f64,
}

/// Relative distance below which `E` is treated as an eigenvalue.
pub const SINGULAR_RTOL: f64 = 1e-11;

/// Errors with [`Error::Singular`] when `H_span − E` has an eigenvalue
/// within `10⁻¹¹·(1 + ‖H‖_∞)` of `energy`.
pub fn check_regular(orbit: &Orbit<f64>, span: Span, energy: f64) -> Result<()> {
    let h = orbit.hamiltonian(span);
    let eta = SINGULAR_RTOL * (1.0 + h.norm_inf());
    if h.sturm_count(energy + eta) != h.sturm_count(energy - eta) {
        return Err(Error::Singular {
            a: span.a,
            b: span.b,
            energy,
        });
    }
    Ok(())
}

fn entry_unchecked(orbit: &Orbit<f64>, span: Span, energy: f64, j: i64, k: i64) -> Result<GreensEntry> {
    let (lo, hi) = (j.min(k), j.max(k));
    let left = orbit.det(Span::new(span.a, lo - 1), energy, false);
    let right = orbit.det(Span::new(hi + 1, span.b), energy, false);
    let den = orbit.det(span, energy, false);
    if den.is_zero() {
        return Err(Error::Singular {
            a: span.a,
            b: span.b,
            energy,
        });
    }
    let value = left.sign * right.sign * den.sign * (left.log_mag + right.log_mag - den.log_mag).exp();
    Ok(GreensEntry {
        span,
        j,
        k,
        value,
        log_left: left.log_mag,
        log_right: right.log_mag,
        log_denominator: den.log_mag,
    })
}

/// `G_{[a,b]}(x, ω, E; j, k) = f_{[a,j−1]} f_{[k+1,b]} / f_{[a,b]}` for
/// `j ≤ k` (symmetric otherwise).
pub fn greens_entry(orbit: &Orbit<f64>, span: Span, energy: f64, j: i64, k: i64) -> Result<GreensEntry> {
    if !span.contains(j) || !span.contains(k) {
        return Err(invalid("j, k", format!("sites {j}, {k} must lie in [{}, {}]", span.a, span.b)));
    }
    check_regular(orbit, span, energy)?;
    entry_unchecked(orbit, span, energy, j, k)
}

/// `|ψ(m) − G_{[a,b]}(m,a) ψ(a−1) − G_{[a,b]}(m,b) ψ(b+1)|` for an
/// eigenvector `ψ` of `H_{[A,B]}` (`psi[0]` is the value at `A`), with
/// `ψ(A−1) = ψ(B+1) = 0`.
pub fn poisson_residual(
    orbit: &Orbit<f64>,
    outer: Span,
    energy: f64,
    psi: &[f64],
    sub: Span,
    m: i64,
) -> Result<f64> {
    if psi.len() != outer.len() {
        return Err(Error::DimensionMismatch {
            expected: outer.len(),
            got: psi.len(),
        });
    }
    if !outer.contains_span(&sub) || !sub.contains(m) {
        return Err(invalid("sub", "need m ∈ [a,b] ⊆ [A,B]"));
    }
    check_regular(orbit, sub, energy)?;
    let at = |n: i64| if outer.contains(n) { psi[outer.index(n)] } else { 0.0 };
    let ga = entry_unchecked(orbit, sub, energy, m, sub.a)?.value;
    let gb = entry_unchecked(orbit, sub, energy, m, sub.b)?.value;
    Ok((at(m) - ga * at(sub.a - 1) - gb * at(sub.b + 1)).abs())
}

/// Outcome of the covering lemma test on `[a,b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringVerdict {
    /// The covering condition holds at every site.
    pub verdict: bool,
    /// Largest left-hand side of the condition and the site attaining it.
    pub worst: f64,
    pub worst_site: i64,
    /// `dist(E, spec H_{[a,b]})` from the eigensolver.
    pub spectrum_distance: f64,
}

impl CoveringVerdict {
    /// A true verdict must come with `E ∉ spec H_{[a,b]}`.
    pub fn sound(&self) -> bool {
        !self.verdict || self.spectrum_distance > 0.0
    }
}

/// `I_m` of length `len` centered at `m`, shifted to stay inside `span`.
pub fn windowed_cover(span: Span, len: usize) -> impl Fn(i64) -> Span {
    let len = (len.max(1) as i64).min(span.len() as i64);
    move |m| {
        let a = (m - len / 2).clamp(span.a, span.b - len + 1);
        Span::new(a, a + len - 1)
    }
}

/// Evaluates `(1 − δ_{a,a_m})|G_{I_m}(m, a_m)| + (1 − δ_{b,b_m})|G_{I_m}(m, b_m)| < 1`
/// for every `m ∈ [a,b]`.
pub fn covering_verdict(
    orbit: &Orbit<f64>,
    span: Span,
    energy: f64,
    cover: impl Fn(i64) -> Span,
) -> Result<CoveringVerdict> {
    let mut worst = 0.0f64;
    let mut worst_site = span.a;
    for m in span.a..=span.b {
        let im = cover(m);
        if !span.contains_span(&im) || !im.contains(m) {
            return Err(invalid("cover", format!("I_{m} = [{}, {}] must contain m inside [a,b]", im.a, im.b)));
        }
        let lhs = if check_regular(orbit, im, energy).is_err() {
            f64::INFINITY
        } else {
            let mut s = 0.0;
            if im.a != span.a {
                s += entry_unchecked(orbit, im, energy, m, im.a)?.value.abs();
            }
            if im.b != span.b {
                s += entry_unchecked(orbit, im, energy, m, im.b)?.value.abs();
            }
            s
        };
        if lhs > worst || m == span.a {
            worst = lhs;
            worst_site = m;
        }
    }
    let spectrum_distance = orbit.hamiltonian(span).eigen(false).dist(energy);
    Ok(CoveringVerdict {
        verdict: worst < 1.0,
        worst,
        worst_site,
        spectrum_distance,
    })
}
