use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::logdet::{det_recurrence, LogDet};
use super::scalar::Scalar;
use super::transfer::TransferProduct;
use super::tridiag::SymTridiagonal;
use super::Potential;
use crate::error::{Error, Result};
use crate::torus::{frac, reduced_multiple, Frequency, Phase};

/// A finite lattice interval `[a, b]`; empty when `b = a − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub a: i64,
    pub b: i64,
}

impl Span {
    pub fn new(a: i64, b: i64) -> Self {
        Span { a, b }
    }

    /// `[1, n]`.
    pub fn first(n: usize) -> Self {
        Span::new(1, n as i64)
    }

    /// `[−n, n]`.
    pub fn centered(n: usize) -> Self {
        Span::new(-(n as i64), n as i64)
    }

    pub fn len(&self) -> usize {
        (self.b - self.a + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.b < self.a
    }

    pub fn contains(&self, n: i64) -> bool {
        self.a <= n && n <= self.b
    }

    pub fn contains_span(&self, other: &Span) -> bool {
        other.is_empty() || (self.a <= other.a && other.b <= self.b)
    }

    /// Offset of site `n` within the span.
    pub fn index(&self, n: i64) -> usize {
        (n - self.a) as usize
    }
}

/// Potential values `V(x + nω)` along a stretch of the orbit.
///
/// Sub-windows of the buffer share the values, so determinants and transfer
/// matrices over many windows cost no extra potential evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<T> {
    span: Span,
    values: Vec<T>,
}

fn check_dims(v: &Potential, x: &Phase, w: &Frequency) -> Result<()> {
    for got in [x.dim(), w.dim()] {
        if got != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: v.dim(),
                got,
            });
        }
    }
    Ok(())
}

impl Orbit<f64> {
    pub fn new(v: &Potential, x: &Phase, w: &Frequency, span: Span) -> Result<Self> {
        check_dims(v, x, w)?;
        let mut point = vec![0.0; v.dim()];
        let values = (span.a..=span.b)
            .map(|n| {
                for ((p, &xi), &wi) in point.iter_mut().zip(x.coords()).zip(w.coords()) {
                    *p = frac(xi + reduced_multiple(n, wi));
                }
                v.eval_real(&point)
            })
            .collect();
        Ok(Orbit { span, values })
    }

    /// `H_{[a,b]}(x, ω)` restricted to `span ⊆ self.span()`.
    pub fn hamiltonian(&self, span: Span) -> SymTridiagonal {
        SymTridiagonal::schrodinger(self.slice(span).to_vec())
    }
}

impl Orbit<Complex64> {
    /// Orbit of the complexified phase `x + iy`.
    pub fn complex(v: &Potential, x: &Phase, y: &[f64], w: &Frequency, span: Span) -> Result<Self> {
        check_dims(v, x, w)?;
        if y.len() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: v.dim(),
                got: y.len(),
            });
        }
        let imag = y.iter().map(|t| t * t).sum::<f64>().sqrt();
        if imag >= v.rho() {
            return Err(Error::OutsideStrip {
                imag,
                rho: v.rho(),
            });
        }
        let mut point = vec![Complex64::new(0.0, 0.0); v.dim()];
        let values = (span.a..=span.b)
            .map(|n| {
                for (((p, &xi), &wi), &yi) in
                    point.iter_mut().zip(x.coords()).zip(w.coords()).zip(y)
                {
                    *p = Complex64::new(frac(xi + reduced_multiple(n, wi)), yi);
                }
                v.eval_unchecked(&point)
            })
            .collect();
        Ok(Orbit { span, values })
    }
}

impl<T: Scalar> Orbit<T> {
    pub fn from_values(start: i64, values: Vec<T>) -> Self {
        let span = Span::new(start, start + values.len() as i64 - 1);
        Orbit { span, values }
    }

    pub fn span(&self) -> Span {
        self.span
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Values on a sub-window; panics if `span` is not inside the buffer.
    pub fn slice(&self, span: Span) -> &[T] {
        if span.is_empty() {
            return &[];
        }
        assert!(
            self.span.contains_span(&span),
            "window {span:?} outside orbit buffer {:?}",
            self.span
        );
        let i = self.span.index(span.a);
        &self.values[i..i + span.len()]
    }

    /// `f_{[a,b]}(x, ω, E)` in log form.
    pub fn det(&self, span: Span, energy: T, with_derivative: bool) -> LogDet<T> {
        det_recurrence(self.slice(span), energy, with_derivative)
    }

    /// `M_{[a,b]}(x, ω, E)`.
    pub fn transfer(&self, span: Span, energy: T) -> TransferProduct<T> {
        TransferProduct::from_steps(self.slice(span), energy)
    }
}
