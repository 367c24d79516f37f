use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One Fourier mode `c·exp(2πi k·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub k: Vec<i32>,
    pub re: f64,
    pub im: f64,
}

impl FourierTerm {
    pub fn new(k: Vec<i32>, c: Complex64) -> Self {
        FourierTerm {
            k,
            re: c.re,
            im: c.im,
        }
    }

    pub fn coefficient(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A real trigonometric polynomial on `T^d`, with its entire extension.
///
/// Coefficients must satisfy `c_{-k} = conj(c_k)`. Only the constant mode
/// and one representative of each pair `±k` are kept for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    dim: usize,
    constant: f64,
    /// Representatives `k > 0` (first nonzero coordinate positive).
    half: Vec<(Vec<i32>, Complex64)>,
    rho: f64,
}

fn is_positive(k: &[i32]) -> bool {
    matches!(k.iter().find(|&&c| c != 0), Some(&c) if c > 0)
}

impl Potential {
    pub fn new(dim: usize, terms: &[FourierTerm], rho: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("potential.dim", "must be at least 1"));
        }
        if !(rho > 0.0) {
            return Err(invalid("potential.rho", "analyticity width must be positive"));
        }
        let mut modes: BTreeMap<Vec<i32>, Complex64> = BTreeMap::new();
        for t in terms {
            if t.k.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.k.len(),
                });
            }
            *modes.entry(t.k.clone()).or_insert(Complex64::new(0.0, 0.0)) += t.coefficient();
        }
        let mut half = Vec::new();
        let mut constant = 0.0;
        for (k, &c) in &modes {
            if k.iter().all(|&v| v == 0) {
                if c.im.abs() > 1e-14 * c.norm().max(1.0) {
                    return Err(invalid("potential", "constant mode must be real"));
                }
                constant = c.re;
                continue;
            }
            let neg: Vec<i32> = k.iter().map(|v| -v).collect();
            let partner = modes.get(&neg).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > 1e-12 * c.norm().max(1.0) {
                return Err(invalid(
                    "potential",
                    format!("coefficients of {k:?} and {neg:?} are not conjugate"),
                ));
            }
            if is_positive(k) && c.norm() > 0.0 {
                half.push((k.clone(), c));
            }
        }
        Ok(Potential {
            dim,
            constant,
            half,
            rho,
        })
    }

    /// `V ≡ c` on `T^d`.
    pub fn constant(dim: usize, c: f64) -> Self {
        Potential {
            dim: dim.max(1),
            constant: c,
            half: Vec::new(),
            rho: 1.0,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, 0.0)
    }

    /// `2λ cos 2πx` on `T^1`.
    pub fn amo(lambda: f64) -> Self {
        Potential {
            dim: 1,
            constant: 0.0,
            half: vec![(vec![1], Complex64::new(lambda, 0.0))],
            rho: 1.0,
        }
    }

    /// `λ(2cos 2πx₁ + 2cos 2πx₂)` on `T^2`.
    pub fn two_cos(lambda: f64) -> Self {
        Potential {
            dim: 2,
            constant: 0.0,
            half: vec![
                (vec![0, 1], Complex64::new(lambda, 0.0)),
                (vec![1, 0], Complex64::new(lambda, 0.0)),
            ],
            rho: 1.0,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Largest sup-norm `|k|` among nonzero modes.
    pub fn degree(&self) -> u32 {
        self.half
            .iter()
            .map(|(k, _)| k.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// All modes including both members of each conjugate pair.
    pub fn terms(&self) -> Vec<FourierTerm> {
        let mut out = Vec::with_capacity(2 * self.half.len() + 1);
        if self.constant != 0.0 {
            out.push(FourierTerm::new(
                vec![0; self.dim],
                Complex64::new(self.constant, 0.0),
            ));
        }
        for (k, c) in &self.half {
            out.push(FourierTerm::new(k.clone(), *c));
            out.push(FourierTerm::new(k.iter().map(|v| -v).collect(), c.conj()));
        }
        out
    }

    /// `Σ|c_k|`, an upper bound for `sup |V|` on the real torus.
    pub fn sup_norm(&self) -> f64 {
        self.constant.abs() + 2.0 * self.half.iter().map(|(_, c)| c.norm()).sum::<f64>()
    }

    /// Upper bound for `sup |V|` on `T^d + iy` with `|y| ≤ y_max`.
    pub fn strip_sup_norm(&self, y_max: f64) -> f64 {
        self.constant.abs()
            + 2.0
                * self
                    .half
                    .iter()
                    .map(|(k, c)| {
                        let k2 = k.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
                        c.norm() * (TAU * k2 * y_max).cosh()
                    })
                    .sum::<f64>()
    }

    /// Lipschitz constant of `V` on the real torus with respect to the
    /// sup-norm on `x`: `2π Σ |k|₁ |c_k|`.
    pub fn lipschitz(&self) -> f64 {
        2.0 * TAU
            * self
                .half
                .iter()
                .map(|(k, c)| k.iter().map(|v| v.unsigned_abs() as f64).sum::<f64>() * c.norm())
                .sum::<f64>()
    }

    /// `Σ|c_k − c̃_k|`, an upper bound for `‖V − Ṽ‖_∞`.
    pub fn sup_distance(&self, other: &Potential) -> f64 {
        let mut modes: BTreeMap<Vec<i32>, Complex64> = BTreeMap::new();
        for t in self.terms() {
            *modes.entry(t.k.clone()).or_default() += t.coefficient();
        }
        for t in other.terms() {
            *modes.entry(t.k.clone()).or_default() -= t.coefficient();
        }
        modes.values().map(|c| c.norm()).sum()
    }

    /// `Σ c_k exp(2πi k·z)` for `z` in the strip `|Im z| < ρ`.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        let imag = z.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
        if imag >= self.rho {
            return Err(Error::OutsideStrip {
                imag,
                rho: self.rho,
            });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(self.constant, 0.0);
        for (k, c) in &self.half {
            let arg = k
                .iter()
                .zip(z)
                .fold(Complex64::new(0.0, 0.0), |s, (&ki, &zi)| s + zi * ki as f64);
            let plus = (Complex64::i() * TAU * arg).exp();
            let minus = (-Complex64::i() * TAU * arg).exp();
            acc += c * plus + c.conj() * minus;
        }
        acc
    }

    /// Evaluation on the real torus.
    pub fn eval_real(&self, x: &[f64]) -> f64 {
        let mut acc = self.constant;
        for (k, c) in &self.half {
            let theta = TAU * k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum::<f64>();
            let (s, co) = theta.sin_cos();
            acc += 2.0 * (c.re * co - c.im * s);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_cos_amo() -> Potential {
        Potential::new(
            1,
            &[
                FourierTerm::new(vec![1], Complex64::new(1.0, 0.0)),
                FourierTerm::new(vec![-1], Complex64::new(1.0, 0.0)),
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn cosine_values() {
        let v = two_cos_amo();
        assert_abs_diff_eq!(v.eval_real(&[0.0]), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.eval_real(&[0.25]), 0.0, epsilon = 1e-15);
        let y = 0.3;
        let z = v.eval(&[Complex64::new(0.0, y)]).unwrap();
        assert_abs_diff_eq!(z.re, 2.0 * (TAU * y).cosh(), epsilon = 1e-13);
        assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-13);
        assert_eq!(v, Potential::amo(1.0));
    }

    #[test]
    fn outside_strip_rejected() {
        let v = two_cos_amo();
        assert!(matches!(
            v.eval(&[Complex64::new(0.0, 1.5)]),
            Err(Error::OutsideStrip { .. })
        ));
    }

    #[test]
    fn non_hermitian_rejected() {
        let r = Potential::new(
            1,
            &[FourierTerm::new(vec![1], Complex64::new(1.0, 0.0))],
            1.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn real_and_complex_evaluation_agree() {
        let v = Potential::new(
            2,
            &[
                FourierTerm::new(vec![1, -2], Complex64::new(0.3, 0.7)),
                FourierTerm::new(vec![-1, 2], Complex64::new(0.3, -0.7)),
                FourierTerm::new(vec![0, 0], Complex64::new(-1.5, 0.0)),
            ],
            0.5,
        )
        .unwrap();
        let x = [0.123, 0.77];
        let z = [Complex64::new(x[0], 0.0), Complex64::new(x[1], 0.0)];
        assert_abs_diff_eq!(v.eval(&z).unwrap().re, v.eval_real(&x), epsilon = 1e-13);
        assert_eq!(v.degree(), 2);
        assert_abs_diff_eq!(v.sup_norm(), 1.5 + 2.0 * (0.58f64).sqrt(), epsilon = 1e-14);
    }
}
