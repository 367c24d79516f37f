#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qp_spectra::operator::{FourierTerm, Potential, SymTridiagonal};
use qp_spectra::torus::{Frequency, Phase};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real trigonometric polynomial of degree ≤ 2 on `T^dim`.
pub fn random_potential(r: &mut ChaCha8Rng, dim: usize, scale: f64) -> Potential {
    let mut terms = Vec::new();
    for _ in 0..3 {
        let k: Vec<i32> = (0..dim).map(|_| r.gen_range(-2..=2)).collect();
        if k.iter().all(|&v| v == 0) {
            continue;
        }
        let c = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * scale;
        terms.push(FourierTerm::new(k.clone(), c));
        terms.push(FourierTerm::new(k.iter().map(|v| -v).collect(), c.conj()));
    }
    terms.push(FourierTerm::new(vec![0; dim], Complex64::new(r.gen_range(-1.0..1.0), 0.0)));
    Potential::new(dim, &terms, 1.0).unwrap()
}

pub fn random_phase(r: &mut ChaCha8Rng, dim: usize) -> Phase {
    Phase::new((0..dim).map(|_| r.gen::<f64>()).collect::<Vec<_>>()).unwrap()
}

pub fn random_frequency(r: &mut ChaCha8Rng, dim: usize) -> Frequency {
    Frequency::new((0..dim).map(|_| r.gen::<f64>()).collect::<Vec<_>>(), 0.01, dim as f64 + 1.0)
        .unwrap()
}

pub fn diophantine_pair() -> Frequency {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    Frequency::new(vec![g, 2f64.sqrt() - 1.0], 0.01, 3.0).unwrap()
}

pub fn dense(t: &SymTridiagonal) -> DMatrix<f64> {
    let n = t.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = t.diag()[i];
        if i + 1 < n {
            m[(i, i + 1)] = t.off()[i];
            m[(i + 1, i)] = t.off()[i];
        }
    }
    m
}

/// Eigenvalues of the dense matrix by nalgebra's symmetric QR.
pub fn dense_eigenvalues(t: &SymTridiagonal) -> Vec<f64> {
    let mut v: Vec<f64> = dense(t).symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
