use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operator::{Orbit, Potential, Span, TransferProduct};
use crate::torus::{Frequency, Phase};

/// A single perturbation of the base point.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    /// Translation of the phase.
    Phase(Vec<f64>),
    /// Additive change of the frequency coordinates.
    Frequency(Vec<f64>),
    Energy(f64),
    /// Replacement potential.
    Potential(Potential),
}

/// Measured change of `log ‖M_N‖` (operator norm) against two upper bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub n: usize,
    pub measured: f64,
    /// `(C(V) + |E₁| + |E₂|)^N · δ` with `C(V) = 2(1 + ‖V‖_∞ + Lip V)` and
    /// `δ = |Δx| + N|Δω| + |ΔE| + ‖ΔV‖_∞`.
    pub rough_bound: f64,
    /// `2 Σ_n ‖M₂_{[n+1,N]}‖ |ΔA_n| ‖M₁_{[1,n−1]}‖ / ‖M₂_{[1,N]}‖`.
    pub sharp_bound: f64,
    pub rough_applicable: bool,
    pub sharp_applicable: bool,
    /// `measured ≤ bound` for every applicable bound.
    pub ok: bool,
    /// `(1/N) log Σ_n ‖M₂_{[n+1,N]}‖ ‖M₁_{[1,n−1]}‖`, to compare with `L`.
    pub log_growth: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, t| m.max(t.abs()))
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Compares `log ‖M_N(x, ω, E)‖` for the base point and the perturbed one.
pub fn continuity_probe(
    v: &Potential,
    x: &Phase,
    w: &Frequency,
    energy: f64,
    n: usize,
    perturbation: &Perturbation,
) -> Result<ContinuityReport> {
    if n == 0 {
        return Err(invalid("n", "scale must be at least 1"));
    }
    let (mut v2, mut x2, mut w2, mut e2) = (v.clone(), x.clone(), w.clone(), energy);
    let (mut dx, mut dw, mut de, mut dv) = (0.0, 0.0, 0.0, 0.0);
    match perturbation {
        Perturbation::Phase(d) => {
            x2 = x.translated(d);
            dx = sup(d);
        }
        Perturbation::Frequency(d) => {
            let c: Vec<f64> = w.coords().iter().zip(d).map(|(a, b)| a + b).collect();
            w2 = w.with_coords(&c)?;
            dw = sup(d);
        }
        Perturbation::Energy(d) => {
            e2 = energy + d;
            de = d.abs();
        }
        Perturbation::Potential(p) => {
            dv = v.sup_distance(p);
            v2 = p.clone();
        }
    }
    let span = Span::first(n);
    let o1 = Orbit::new(v, x, w, span)?;
    let o2 = Orbit::new(&v2, &x2, &w2, span)?;
    let m1 = o1.transfer(span, energy);
    let m2 = o2.transfer(span, e2);
    let measured = (m1.log_op_norm() - m2.log_op_norm()).abs();

    let c_v = 2.0 * (1.0 + v.sup_norm().max(v2.sup_norm()) + v.lipschitz().max(v2.lipschitz()));
    let delta = dx + n as f64 * dw + de + dv;
    let rough_bound = if delta == 0.0 {
        0.0
    } else {
        ((c_v + energy.abs() + e2.abs()).ln() * n as f64 + delta.ln()).exp()
    };

    // prefix[k] = M₁_{[1,k]}, suffix[k] = M₂_{[k+1,N]}
    let a = o1.values();
    let b = o2.values();
    let mut prefix = vec![TransferProduct::identity()];
    for k in 0..n {
        let next = TransferProduct::from_steps(&a[k..k + 1], energy).mul(&prefix[k]);
        prefix.push(next);
    }
    let mut suffix = vec![TransferProduct::identity(); n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1].mul(&TransferProduct::from_steps(&b[k..k + 1], e2));
    }
    let mut log_sum = f64::NEG_INFINITY;
    let mut log_growth_sum = f64::NEG_INFINITY;
    for k in 0..n {
        let da = ((a[k] - energy) - (b[k] - e2)).abs();
        let g = suffix[k + 1].log_op_norm() + prefix[k].log_op_norm();
        log_growth_sum = log_add(log_growth_sum, g);
        if da > 0.0 {
            log_sum = log_add(log_sum, g + da.ln());
        }
    }
    let ratio = (log_sum - m2.log_op_norm()).exp();
    let sharp_bound = 2.0 * ratio;
    let rough_applicable = rough_bound < 0.5;
    let sharp_applicable = ratio <= 0.5;
    let slack = 1e-12 * (1.0 + m1.log_op_norm().abs());
    let ok = (!rough_applicable || measured <= rough_bound + slack)
        && (!sharp_applicable || measured <= sharp_bound + slack);
    Ok(ContinuityReport {
        n,
        measured,
        rough_bound,
        sharp_bound,
        rough_applicable,
        sharp_applicable,
        ok,
        log_growth: log_growth_sum / n as f64,
    })
}
