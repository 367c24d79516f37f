//! Potentials, finite-volume Hamiltonians, Dirichlet determinants, transfer
//! matrices and the tridiagonal eigensolver.

mod logdet;
mod orbit;
mod potential;
mod scalar;
mod transfer;
mod tridiag;

use num_complex::Complex64;

pub use logdet::{det_recurrence, LogDet};
pub use orbit::{Orbit, Span};
pub use potential::{FourierTerm, Potential};
pub use scalar::Scalar;
pub use transfer::TransferProduct;
pub use tridiag::{interlace_check, EigenSystem, SymTridiagonal};

use crate::error::Result;
use crate::torus::{Frequency, Phase};

/// `V(z)` for `z` in the analyticity strip.
pub fn eval_potential(v: &Potential, z: &[Complex64]) -> Result<Complex64> {
    v.eval(z)
}

/// `H_{[a,b]}(x, ω)`.
pub fn hamiltonian(v: &Potential, x: &Phase, w: &Frequency, span: Span) -> Result<SymTridiagonal> {
    Ok(Orbit::new(v, x, w, span)?.hamiltonian(span))
}

/// `f_{[a,b]}(x, ω, E)` with its logarithmic energy derivative.
pub fn dirichlet_det(
    v: &Potential,
    x: &Phase,
    w: &Frequency,
    energy: f64,
    span: Span,
) -> Result<LogDet<f64>> {
    Ok(Orbit::new(v, x, w, span)?.det(span, energy, true))
}

/// `f_{[a,b]}(x + iy, ω, E)` for complex energy.
pub fn dirichlet_det_complex(
    v: &Potential,
    x: &Phase,
    y: &[f64],
    w: &Frequency,
    energy: Complex64,
    span: Span,
) -> Result<LogDet<Complex64>> {
    Ok(Orbit::complex(v, x, y, w, span)?.det(span, energy, true))
}

/// `M_{[a,b]}(x, ω, E)`.
pub fn transfer(
    v: &Potential,
    x: &Phase,
    w: &Frequency,
    energy: f64,
    span: Span,
) -> Result<TransferProduct<f64>> {
    Ok(Orbit::new(v, x, w, span)?.transfer(span, energy))
}

/// Eigenpairs of `H_{[a,b]}(x, ω)`.
pub fn eigs(
    v: &Potential,
    x: &Phase,
    w: &Frequency,
    span: Span,
    want_vectors: bool,
) -> Result<EigenSystem> {
    Ok(hamiltonian(v, x, w, span)?.eigen(want_vectors))
}
