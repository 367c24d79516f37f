//! Zero counting by the argument principle, Weierstrass preparation in the
//! energy variable, resultants and annulus gaps.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::operator::{det_recurrence, Orbit, Span};

/// Closed disk `D(center, radius)` with `nodes` trapezoid points on its
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskSpec {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl DiskSpec {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("radius", "must be positive"));
        }
        if nodes < 64 || !nodes.is_power_of_two() {
            return Err(invalid("nodes", "must be a power of two, at least 64"));
        }
        Ok(DiskSpec { center, radius, nodes })
    }

    pub fn real(center: f64, radius: f64) -> Result<Self> {
        DiskSpec::new(Complex64::new(center, 0.0), radius, 64)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// An analytic function given in logarithmic form.
pub trait Analytic: Sync {
    /// `(log f(z), f′(z)/f(z))` on any branch of the logarithm; at a zero the
    /// real part is `−∞`.
    fn log_eval(&self, z: Complex64) -> (Complex64, Complex64);
}

impl<F> Analytic for F
where
    F: Fn(Complex64) -> (Complex64, Complex64) + Sync,
{
    fn log_eval(&self, z: Complex64) -> (Complex64, Complex64) {
        self(z)
    }
}

/// `E ↦ f_{[a,b]}(x, ω, E)` for a real orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletDet {
    diag: Vec<Complex64>,
}

impl DirichletDet {
    pub fn new(orbit: &Orbit<f64>, span: Span) -> Self {
        DirichletDet {
            diag: orbit.slice(span).iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl Analytic for DirichletDet {
    fn log_eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let d = det_recurrence(&self.diag, z, true);
        let dlog = d.dlog.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        (Complex64::new(d.log_mag, d.sign.arg()), dlog)
    }
}

fn compensated_sum(terms: impl Iterator<Item = Complex64>) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    let mut c = Complex64::new(0.0, 0.0);
    for t in terms {
        let y = t - c;
        let u = s + y;
        c = (u - s) - y;
        s = u;
    }
    s
}

pub const MAX_NODES: usize = 1 << 14;

/// Contour data `t_j = e^{2πij/Q}` and `(z_j − c)·f′/f(z_j)`.
struct Contour {
    t: Vec<Complex64>,
    weighted: Vec<Complex64>,
    log_f: Vec<Complex64>,
    /// `min |f/f′|`, roughly the distance to the nearest zero.
    distance: f64,
}

impl Contour {
    fn near_zero(&self, radius: f64) -> bool {
        !(self.distance >= 1e-3 * radius)
    }
}

fn contour(f: &dyn Analytic, center: Complex64, radius: f64, q: usize) -> Contour {
    let t: Vec<Complex64> = (0..q).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / q as f64)).collect();
    let evals: Vec<(Complex64, Complex64)> = t.par_iter().map(|&tj| f.log_eval(center + tj * radius)).collect();
    let distance = evals
        .iter()
        .map(|(l, d)| if l.re.is_finite() && d.is_finite() { 1.0 / d.norm() } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    Contour {
        weighted: t.iter().zip(&evals).map(|(&tj, e)| tj * radius * e.1).collect(),
        log_f: evals.into_iter().map(|e| e.0).collect(),
        t,
        distance,
    }
}

/// `(1/2πi)∮ t^p f′/f dz` in the local variable `t = (z − c)/r`, `p = 0..=p_max`.
fn moments(c: &Contour, p_max: usize) -> Vec<Complex64> {
    let q = c.t.len() as f64;
    (0..=p_max)
        .map(|p| compensated_sum(c.t.iter().zip(&c.weighted).map(|(t, w)| t.powu(p as u32) * w)) / q)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub count: usize,
    /// Radius actually used, after retries around a contour near a zero.
    pub radius: f64,
    pub retries: usize,
    pub nodes: usize,
    /// Raw winding number before rounding.
    pub winding: f64,
}

const RETRY_STEPS: [f64; 8] = [0.03, -0.03, 0.06, -0.06, 0.09, -0.09, 0.12, -0.12];

/// Number of zeros of `f` in the disk, by trapezoid quadrature of
/// `(1/2πi)∮ f′/f` with doubling until the winding number settles.
pub fn count_zeros(f: &dyn Analytic, disk: &DiskSpec) -> Result<ZeroCount> {
    count_with_moments(f, disk, 0).map(|r| r.0)
}

fn count_with_moments(f: &dyn Analytic, disk: &DiskSpec, extra: usize) -> Result<(ZeroCount, Vec<Complex64>, Contour)> {
    let mut retries = 0;
    let mut radius = disk.radius;
    loop {
        match settle(f, disk.center, radius, disk.nodes, extra)? {
            Ok((q, winding, m, c)) => {
                return Ok((
                    ZeroCount {
                        count: winding.round().max(0.0) as usize,
                        radius,
                        retries,
                        nodes: q,
                        winding,
                    },
                    m,
                    c,
                ))
            }
            Err(_) if retries < RETRY_STEPS.len() => {
                radius = disk.radius * (1.0 + RETRY_STEPS[retries]);
                retries += 1;
            }
            Err(distance) => {
                return Err(Error::ContourNearZero {
                    radius: disk.radius,
                    distance,
                    attempts: retries,
                })
            }
        }
    }
}

type Settled = (usize, f64, Vec<Complex64>, Contour);

/// Inner `Err` carries the distance when the contour passes near a zero.
fn settle(
    f: &dyn Analytic,
    center: Complex64,
    radius: f64,
    q0: usize,
    extra: usize,
) -> Result<std::result::Result<Settled, f64>> {
    let mut q = q0;
    let mut prev: Option<Vec<Complex64>> = None;
    loop {
        let c = contour(f, center, radius, q);
        if c.near_zero(radius) {
            return Ok(Err(c.distance));
        }
        let m = moments(&c, extra);
        let w = m[0].re;
        let settled = prev.as_ref().is_some_and(|p| {
            p[0].re.round() == w.round()
                && (w - w.round()).abs() <= 0.1
                && p.iter().zip(&m).all(|(a, b)| (a - b).norm() < 1e-10)
        });
        if settled {
            return Ok(Ok((q, w, m, c)));
        }
        if q >= MAX_NODES {
            if (w - w.round()).abs() > 0.1 {
                return Err(Error::NonIntegerWinding { value: w });
            }
            return Ok(Ok((q, w, m, c)));
        }
        prev = Some(m);
        q *= 2;
    }
}

/// `P(z) = z^k + a_{k−1}z^{k−1} + … + a_0` with all roots in `origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonicLocal {
    /// `a_0, …, a_{k−1}`.
    pub coeffs: Vec<Complex64>,
    pub origin: DiskSpec,
}

fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    // ascending coefficients including the leading 1
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * r;
        }
        c = next;
    }
    c
}

/// Roots of the monic polynomial with ascending lower coefficients `a`.
fn companion_roots(a: &[Complex64]) -> Result<Vec<Complex64>> {
    let k = a.len();
    match k {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-a[0]]),
        _ => {}
    }
    let mut m = DMatrix::<Complex64>::zeros(k, k);
    for i in 1..k {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..k {
        m[(i, k - 1)] = -a[i];
    }
    let ev = m
        .eigenvalues()
        .ok_or_else(|| Error::Precondition("companion eigenvalues did not converge".into()))?;
    Ok(ev.iter().copied().collect())
}

impl MonicLocal {
    /// Validates that every root lies in `origin` (up to `10⁻⁹` relative).
    pub fn new(coeffs: Vec<Complex64>, origin: DiskSpec) -> Result<Self> {
        let p = MonicLocal { coeffs, origin };
        let slack = origin.radius * (1.0 + 1e-9);
        if p.roots()?.iter().any(|z| (z - origin.center).norm() > slack) {
            return Err(invalid("coeffs", "a root lies outside the origin disk"));
        }
        Ok(p)
    }

    pub fn from_roots(roots: &[Complex64], origin: DiskSpec) -> Result<Self> {
        let mut c = poly_from_roots(roots);
        c.pop();
        MonicLocal::new(c, origin)
    }

    pub fn one(origin: DiskSpec) -> Self {
        MonicLocal { coeffs: Vec::new(), origin }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(1.0, 0.0), |acc, &a| acc * z + a)
    }

    pub fn roots(&self) -> Result<Vec<Complex64>> {
        companion_roots(&self.coeffs)
    }

    /// `Σ ζ_i^p` for `p = 1..=p_max`.
    pub fn power_sums(&self, p_max: usize) -> Result<Vec<Complex64>> {
        let r = self.roots()?;
        Ok((1..=p_max).map(|p| r.iter().map(|z| z.powu(p as u32)).sum()).collect())
    }
}

pub const NEWTON_MAX_DEGREE: usize = 32;

/// Elementary symmetric functions from power sums `p_1..p_k`, with
/// `max_j Σ_i |e_{j−i} p_i|/j` over `max(1, max_j |e_j|)` as a condition
/// estimate.
pub fn newton_identities(p: &[Complex64]) -> (Vec<Complex64>, f64) {
    let k = p.len();
    let mut e = vec![Complex64::new(1.0, 0.0)];
    let mut worst: f64 = 0.0;
    for j in 1..=k {
        let mut s = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for i in 1..=j {
            let t = e[j - i] * p[i - 1];
            mag += t.norm();
            s += if i % 2 == 1 { t } else { -t };
        }
        worst = worst.max(mag / j as f64);
        e.push(s / j as f64);
    }
    let scale = e.iter().fold(1.0f64, |m, x| m.max(x.norm()));
    (e, worst / scale)
}

/// Monic coefficients (ascending, without the leading 1) of the polynomial
/// with elementary symmetric functions `e`.
fn coeffs_from_elementary(e: &[Complex64]) -> Vec<Complex64> {
    let k = e.len() - 1;
    (0..k)
        .map(|i| {
            let j = k - i;
            if j % 2 == 0 {
                e[j]
            } else {
                -e[j]
            }
        })
        .collect()
}

/// Roots from the moment Hankel pencil `(H₁, H₀)`.
fn hankel_roots(m: &[Complex64], k: usize) -> Result<Vec<Complex64>> {
    let h0 = DMatrix::from_fn(k, k, |i, j| m[i + j]);
    let h1 = DMatrix::from_fn(k, k, |i, j| m[i + j + 1]);
    let x = h0
        .lu()
        .solve(&h1)
        .ok_or_else(|| Error::Precondition("singular moment matrix".into()))?;
    x.eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Precondition("moment pencil eigenvalues did not converge".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preparation {
    pub poly: MonicLocal,
    pub zeros: ZeroCount,
    /// Local power sums `b_p = Σ ((ζ_i − c)/r)^p`.
    pub power_sums: Vec<Complex64>,
    pub condition: f64,
    /// The degree exceeded the Newton-identity cap and the roots came from
    /// the moment pencil instead.
    pub used_pencil: bool,
    /// `min log|g|` over the polar grid of radius `0.9r`.
    pub log_g_min: f64,
    /// `max |f − P·g| / max|f|` on the grid, with `g` rebuilt from contour
    /// values by Cauchy's formula.
    pub residual: f64,
}

/// `f = P·g` on the disk with `P` monic carrying the zeros of `f` in it and
/// `g` zero-free there.
pub fn weierstrass_prep(f: &dyn Analytic, disk: &DiskSpec) -> Result<Preparation> {
    let (zeros, _, _) = count_with_moments(f, disk, 0)?;
    let k = zeros.count;
    let disk_used = DiskSpec { radius: zeros.radius, ..*disk };
    let (zeros, m, _) = count_with_moments(f, &disk_used, 2 * k)?;
    let (c, r) = (disk.center, zeros.radius);
    let b: Vec<Complex64> = m[1..=k].to_vec();
    let used_pencil = k > NEWTON_MAX_DEGREE;
    let (local_roots, condition) = if used_pencil {
        (hankel_roots(&m, k)?, f64::INFINITY)
    } else {
        let (e, cond) = newton_identities(&b);
        (companion_roots(&coeffs_from_elementary(&e))?, cond)
    };
    let roots: Vec<Complex64> = local_roots.iter().map(|t| c + t * r).collect();
    let origin = DiskSpec { radius: r, ..*disk };
    let mut coeffs = poly_from_roots(&roots);
    coeffs.pop();
    let poly = MonicLocal { coeffs, origin };

    // g on the boundary, normalized by the largest |f| there
    let q = zeros.nodes.max(512);
    let ring = contour(f, c, r, q);
    let big = ring.log_f.iter().fold(f64::NEG_INFINITY, |a, l| a.max(l.re));
    let g_ring: Vec<Complex64> = ring
        .t
        .iter()
        .zip(&ring.log_f)
        .map(|(t, lf)| (lf - Complex64::new(big, 0.0)).exp() / poly.eval(c + t * r))
        .collect();
    let grid: Vec<Complex64> = (0..=8)
        .flat_map(|i| {
            let rho = 0.9 * r * i as f64 / 8.0;
            let n = if i == 0 { 1 } else { 32 };
            (0..n).map(move |j| c + Complex64::from_polar(rho, 2.0 * PI * j as f64 / n as f64))
        })
        .collect();
    let rows: Vec<(f64, Complex64, Complex64)> = grid
        .par_iter()
        .map(|&z| {
            let g = compensated_sum(ring.t.iter().zip(&g_ring).map(|(t, g)| g * t * r / (c + t * r - z))) / q as f64;
            let lf = f.log_eval(z).0;
            (g.norm().ln() + big, g * poly.eval(z), (lf - Complex64::new(big, 0.0)).exp())
        })
        .collect();
    let log_g_min = rows.iter().fold(f64::INFINITY, |a, r| a.min(r.0));
    let f_max = rows.iter().fold(0.0f64, |a, r| a.max(r.2.norm()));
    let residual = rows.iter().fold(0.0f64, |a, r| a.max((r.2 - r.1).norm())) / f_max;
    Ok(Preparation {
        poly,
        zeros,
        power_sums: b,
        condition,
        used_pencil,
        log_g_min,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resultant {
    pub via_sylvester: Complex64,
    pub via_roots: Complex64,
}

pub const RESULTANT_RTOL: f64 = 1e-8;
pub const RESULTANT_ATOL: f64 = 1e-12;

/// Sylvester matrix of two monic polynomials given by ascending lower
/// coefficients.
fn sylvester(a: &[Complex64], b: &[Complex64]) -> DMatrix<Complex64> {
    let (k, m) = (a.len(), b.len());
    let n = k + m;
    let one = Complex64::new(1.0, 0.0);
    let desc = |c: &[Complex64]| -> Vec<Complex64> { std::iter::once(one).chain(c.iter().rev().copied()).collect() };
    let (da, db) = (desc(a), desc(b));
    let mut s = DMatrix::zeros(n, n);
    for i in 0..m {
        for (j, &v) in da.iter().enumerate() {
            s[(i, i + j)] = v;
        }
    }
    for i in 0..k {
        for (j, &v) in db.iter().enumerate() {
            s[(m + i, i + j)] = v;
        }
    }
    s
}

/// `Res(P₀, P₁) = Π_{i,j}(ζ_i − η_j)` by the Sylvester determinant and by
/// companion-matrix roots; errors when the two disagree.
pub fn resultant(p0: &MonicLocal, p1: &MonicLocal) -> Result<Resultant> {
    let one = Complex64::new(1.0, 0.0);
    if p0.degree() == 0 || p1.degree() == 0 {
        return Ok(Resultant {
            via_sylvester: one,
            via_roots: one,
        });
    }
    let via_sylvester = sylvester(&p0.coeffs, &p1.coeffs).determinant();
    let (r0, r1) = (p0.roots()?, p1.roots()?);
    let via_roots = r0.iter().fold(one, |acc, z| r1.iter().fold(acc, |a, w| a * (z - w)));
    let diff = (via_sylvester - via_roots).norm();
    let scale = via_sylvester.norm().max(via_roots.norm());
    if diff > RESULTANT_RTOL * scale && diff > RESULTANT_ATOL {
        return Err(Error::ResultantDisagreement {
            sylvester: via_sylvester.to_string(),
            roots: via_roots.to_string(),
        });
    }
    Ok(Resultant {
        via_sylvester,
        via_roots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationFloor {
    pub applicable: bool,
    /// `|Res| > δ`.
    pub resultant_ok: bool,
    /// Every root in `D(0, 1/2)`.
    pub roots_ok: bool,
    /// `(δ/2)^s`, `s` the larger degree.
    pub floor: f64,
    /// `min_z max(|P₀(z)|, |P₁(z)|)` over the probes.
    pub min_max: f64,
    pub violations: usize,
}

impl SeparationFloor {
    pub fn holds(&self) -> bool {
        !self.applicable || self.violations == 0
    }
}

/// Checks `max(|P₀(z)|, |P₁(z)|) > (δ/2)^s` at every probe point.
pub fn separation_floor(p0: &MonicLocal, p1: &MonicLocal, delta: f64, probes: &[Complex64]) -> Result<SeparationFloor> {
    let res = resultant(p0, p1)?;
    let resultant_ok = res.via_sylvester.norm() > delta;
    let mut roots = p0.roots()?;
    roots.extend(p1.roots()?);
    let roots_ok = roots.iter().all(|z| z.norm() < 0.5);
    let s = p0.degree().max(p1.degree()) as i32;
    let floor = (delta / 2.0).powi(s);
    let values: Vec<f64> = probes.iter().map(|&z| p0.eval(z).norm().max(p1.eval(z).norm())).collect();
    let applicable = resultant_ok && roots_ok;
    Ok(SeparationFloor {
        applicable,
        resultant_ok,
        roots_ok,
        floor,
        min_max: values.iter().copied().fold(f64::INFINITY, f64::min),
        violations: if applicable { values.iter().filter(|&&v| !(v > floor)).count() } else { 0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusGap {
    pub r: f64,
    /// `r₀/(4(K+1))`.
    pub width: f64,
    /// Distance from the annulus to the nearest eigenvalue (`+∞` if none).
    pub margin: f64,
    /// Eigenvalues in `(E₀ − r₀, E₀ + r₀)`.
    pub count: usize,
    /// `count ≤ K`.
    pub precondition: bool,
}

/// A radius `r ∈ (r₀/2, r₀)` whose annulus `|ζ − E₀| ∈ [r − w/2, r + w/2]`,
/// `w = r₀/(4(K+1))`, holds no eigenvalue.
pub fn annulus_gap(eigenvalues: &[f64], e0: f64, r0: f64, k: usize) -> Result<AnnulusGap> {
    if !(r0 > 0.0) {
        return Err(invalid("r0", "must be positive"));
    }
    let width = r0 / (4.0 * (k + 1) as f64);
    let count = eigenvalues.iter().filter(|&&e| (e - e0).abs() < r0).count();
    let mut d: Vec<f64> = eigenvalues
        .iter()
        .map(|e| (e - e0).abs())
        .filter(|&t| t > r0 / 2.0 && t < r0)
        .collect();
    let r = if d.is_empty() {
        0.75 * r0
    } else {
        d.sort_by(f64::total_cmp);
        let mut cuts = vec![r0 / 2.0];
        cuts.extend(&d);
        cuts.push(r0);
        let (lo, hi) = cuts
            .windows(2)
            .map(|w| (w[0], w[1]))
            .fold((0.0, 0.0), |best, g| if g.1 - g.0 > best.1 - best.0 { g } else { best });
        0.5 * (lo + hi)
    };
    let margin = eigenvalues
        .iter()
        .map(|e| ((e - e0).abs() - r).abs() - width / 2.0)
        .fold(f64::INFINITY, f64::min);
    Ok(AnnulusGap {
        r,
        width,
        margin,
        count,
        precondition: count <= k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn newton_round_trip() {
        let roots = [c(0.1), Complex64::new(-0.2, 0.3), c(0.4)];
        let p: Vec<Complex64> = (1..=3).map(|k| roots.iter().map(|z| z.powu(k)).sum()).collect();
        let (e, _) = newton_identities(&p);
        let mut want = poly_from_roots(&roots);
        want.pop();
        for (a, b) in coeffs_from_elementary(&e).iter().zip(&want) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn sylvester_of_linear_factors() {
        let d = sylvester(&[c(-2.0)], &[c(-5.0)]).determinant();
        assert!((d - c(-3.0)).norm() < 1e-14);
    }
}
