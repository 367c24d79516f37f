//! Points and frequency vectors on the torus `T^d = R^d / Z^d`.
//!
//! Coordinates are always stored reduced to `[0, 1)`. Orbit points
//! `x + n·ω` are reduced lazily: the product `n·ω` is split into its
//! rounded value and the exact rounding error (via a fused multiply-add)
//! so that shifts with `|n|` up to `10^6` lose no more than a few ulps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Distance from `t` to the nearest integer, `‖t‖ ∈ [0, 1/2]`.
#[inline]
pub fn torus_norm(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// Fractional part in `[0, 1)`.
#[inline]
pub fn frac(t: f64) -> f64 {
    let r = t - t.floor();
    // t slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `frac(n·w)` with the rounding error of the product folded back in.
#[inline]
pub fn reduced_multiple(n: i64, w: f64) -> f64 {
    let nf = n as f64;
    let p = nf * w;
    let err = nf.mul_add(w, -p);
    frac(frac(p) + err)
}

/// A point of `T^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase(Vec<f64>);

impl Phase {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords: Vec<f64> = coords.into();
        if coords.is_empty() {
            return Err(invalid("phase", "dimension must be at least 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("phase", "coordinates must be finite"));
        }
        Ok(Phase(coords.into_iter().map(frac).collect()))
    }

    pub fn zero(dim: usize) -> Self {
        Phase(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// The orbit point `x + n·ω`, reduced.
    pub fn shifted(&self, w: &Frequency, n: i64) -> Phase {
        Phase(
            self.0
                .iter()
                .zip(w.coords())
                .map(|(&x, &wi)| frac(x + reduced_multiple(n, wi)))
                .collect(),
        )
    }

    /// Translation by an arbitrary real vector.
    pub fn translated(&self, delta: &[f64]) -> Phase {
        Phase(
            self.0
                .iter()
                .zip(delta)
                .map(|(&x, &d)| frac(x + d))
                .collect(),
        )
    }
}

/// A frequency vector together with the constants `(a, b)` of the
/// Diophantine condition `‖k·ω‖ ≥ a / |k|^b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    coords: Vec<f64>,
    a: f64,
    b: f64,
}

impl Frequency {
    pub fn new(coords: impl Into<Vec<f64>>, a: f64, b: f64) -> Result<Self> {
        let coords: Vec<f64> = coords.into();
        let d = coords.len();
        if d == 0 {
            return Err(invalid("frequency", "dimension must be at least 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("frequency", "coordinates must be finite"));
        }
        if !(a > 0.0) {
            return Err(invalid("a", format!("must be positive (got {a})")));
        }
        if !(b > d as f64) {
            return Err(invalid(
                "b",
                format!("must exceed the dimension d = {d} (got {b})"),
            ));
        }
        Ok(Frequency {
            coords: coords.into_iter().map(frac).collect(),
            a,
            b,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `-ω`, used by the reflection symmetry of finite-volume operators.
    pub fn negated(&self) -> Frequency {
        Frequency {
            coords: self.coords.iter().map(|&c| frac(-c)).collect(),
            a: self.a,
            b: self.b,
        }
    }

    /// A frequency with the same `(a, b)` but different coordinates.
    pub fn with_coords(&self, coords: &[f64]) -> Result<Frequency> {
        Frequency::new(coords.to_vec(), self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub ok: bool,
    /// Minimizer of `‖k·ω‖·|k|^b` (first in lexicographic order on ties).
    pub worst_k: Vec<i64>,
    pub worst_margin: f64,
}

/// Checks `‖k·ω‖ ≥ a/|k|^b` for all `0 < |k| ≤ n`, with `|k|` the sup-norm.
///
/// Only one of `±k` is visited since both give the same margin.
pub fn diophantine_check(w: &Frequency, n: u32) -> DiophantineReport {
    let d = w.dim();
    let n = n.max(1) as i64;
    let mut k = vec![-n; d];
    let mut best_margin = f64::INFINITY;
    let mut best_k = vec![0; d];
    loop {
        let first_nonzero = k.iter().find(|&&c| c != 0);
        if matches!(first_nonzero, Some(&c) if c > 0) {
            let dot = k
                .iter()
                .zip(w.coords())
                .fold(0.0, |acc, (&ki, &wi)| frac(acc + reduced_multiple(ki, wi)));
            let sup = k.iter().map(|c| c.abs()).max().unwrap_or(0) as f64;
            let margin = torus_norm(dot) * sup.powf(w.b);
            if margin < best_margin {
                best_margin = margin;
                best_k.clone_from(&k);
            }
        }
        // odometer over [-n, n]^d
        let mut i = d;
        loop {
            if i == 0 {
                return DiophantineReport {
                    ok: best_margin >= w.a,
                    worst_k: best_k,
                    worst_margin: best_margin,
                };
            }
            i -= 1;
            if k[i] < n {
                k[i] += 1;
                break;
            }
            k[i] = -n;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Rank-1 lattice `frac(j·z/M)`; in `d = 1` this is `{0, 1/M, …}`.
    Grid,
    UniformRandom,
    /// Additive recurrence with the generalized golden ratio, randomly
    /// shifted by the seed.
    LowDiscrepancy,
}

/// Deterministic description of a set of phases on `T^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    pub scheme: Scheme,
    /// Translation applied to every sample (empty = none).
    #[serde(default)]
    pub shift: Vec<f64>,
}

impl SamplePlan {
    pub fn new(dim: usize, count: usize, scheme: Scheme) -> Self {
        SamplePlan {
            dim,
            count,
            seed: 0,
            scheme,
            shift: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_shift(mut self, shift: Vec<f64>) -> Self {
        self.shift = shift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("plan.dim", "must be at least 1"));
        }
        if self.count == 0 {
            return Err(invalid("plan.count", "must be at least 1"));
        }
        if !self.shift.is_empty() && self.shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: self.shift.len(),
            });
        }
        Ok(())
    }
}

/// `1/φ_d^i` for the generalized golden ratio `φ_d^{d+1} = φ_d + 1`.
fn golden_alphas(d: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|i| frac(phi.powi(-(i as i32)))).collect()
}

pub fn sample_phases(plan: &SamplePlan) -> Result<Vec<Phase>> {
    plan.validate()?;
    let d = plan.dim;
    let m = plan.count;
    let mut out: Vec<Vec<f64>> = match plan.scheme {
        Scheme::Grid => {
            let alphas = golden_alphas(d);
            let gen: Vec<u64> = (0..d)
                .map(|i| {
                    if i == 0 {
                        1
                    } else {
                        let z = (alphas[i - 1] * m as f64).round() as u64 % m as u64;
                        z.max(1)
                    }
                })
                .collect();
            (0..m as u64)
                .map(|j| {
                    gen.iter()
                        .map(|&z| ((j * z) % m as u64) as f64 / m as f64)
                        .collect()
                })
                .collect()
        }
        Scheme::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            (0..m)
                .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
                .collect()
        }
        Scheme::LowDiscrepancy => {
            let alphas = golden_alphas(d);
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            let offset: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            (0..m)
                .map(|j| {
                    alphas
                        .iter()
                        .zip(&offset)
                        .map(|(&a, &s)| frac(s + reduced_multiple(j as i64 + 1, a)))
                        .collect()
                })
                .collect()
        }
    };
    if !plan.shift.is_empty() {
        for p in &mut out {
            for (c, s) in p.iter_mut().zip(&plan.shift) {
                *c = frac(*c + s);
            }
        }
    }
    Ok(out.into_iter().map(Phase).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn norm_examples() {
        assert_abs_diff_eq!(torus_norm(0.3), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(torus_norm(0.7), 0.3, epsilon = 1e-15);
        assert_eq!(torus_norm(1.25), 0.25);
        assert_eq!(torus_norm(-0.25), 0.25);
    }

    #[test]
    fn rational_frequency_fails() {
        let w = Frequency::new(vec![0.5], 0.1, 1.5).unwrap();
        let r = diophantine_check(&w, 2);
        assert!(!r.ok);
        assert_eq!(r.worst_k, vec![2]);
        assert_eq!(r.worst_margin, 0.0);
    }

    #[test]
    fn frequency_validation() {
        assert!(Frequency::new(vec![0.1, 0.2], 0.1, 2.0).is_err());
        assert!(Frequency::new(vec![0.1], 0.0, 2.0).is_err());
        let err = Frequency::new(vec![0.1, 0.2], 0.1, 1.5).unwrap_err();
        assert!(err.to_string().contains("`b`"));
    }

    #[test]
    fn grid_one_dimensional() {
        let plan = SamplePlan::new(1, 4, Scheme::Grid);
        let xs: Vec<f64> = sample_phases(&plan)
            .unwrap()
            .iter()
            .map(|p| p.coords()[0])
            .collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn plans_are_reproducible() {
        for scheme in [Scheme::Grid, Scheme::UniformRandom, Scheme::LowDiscrepancy] {
            let plan = SamplePlan::new(2, 50, scheme).with_seed(7);
            assert_eq!(sample_phases(&plan).unwrap(), sample_phases(&plan).unwrap());
        }
    }

    #[test]
    fn uniform_mean() {
        let plan = SamplePlan::new(1, 10_000, Scheme::UniformRandom).with_seed(3);
        let xs = sample_phases(&plan).unwrap();
        let mean = xs.iter().map(|p| p.coords()[0]).sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn compensated_shift_matches_exact_rational() {
        // ω = 3/8 is exact in binary, so n·ω mod 1 is known exactly.
        let w = Frequency::new(vec![0.375], 0.1, 1.5).unwrap();
        let x = Phase::new(vec![0.0]).unwrap();
        for n in [1i64, 7, 1_000_001, -999_999] {
            let expect = frac((n.rem_euclid(8) * 3 % 8) as f64 / 8.0);
            assert_eq!(x.shifted(&w, n).coords()[0], expect);
        }
    }

    #[test]
    fn dimension_mismatch_in_shift() {
        let plan = SamplePlan::new(2, 3, Scheme::Grid).with_shift(vec![0.1]);
        assert!(matches!(
            sample_phases(&plan),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
