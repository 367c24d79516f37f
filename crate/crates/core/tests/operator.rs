mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qp_spectra::operator::*;
use qp_spectra::torus::{Frequency, Phase};
use rand::Rng;

#[test]
fn determinant_matches_eigenvalue_product() {
    let mut r = rng(11);
    for _ in 0..200 {
        let dim = r.gen_range(1..=2);
        let v = random_potential(&mut r, dim, 3.0);
        let x = random_phase(&mut r, dim);
        let w = random_frequency(&mut r, dim);
        let n = r.gen_range(1..=12);
        let e = r.gen_range(-6.0..6.0);
        let span = Span::first(n);
        let h = hamiltonian(&v, &x, &w, span).unwrap();
        let lam = dense_eigenvalues(&h);
        let log_prod: f64 = lam.iter().map(|l| (l - e).abs().ln()).sum();
        let neg = lam.iter().filter(|&&l| l < e).count();
        let sign = if neg % 2 == 0 { 1.0 } else { -1.0 };
        let d = dirichlet_det(&v, &x, &w, e, span).unwrap();
        assert_eq!(d.sign, sign);
        assert!(rel_close(d.log_mag, log_prod, 1e-9), "{} vs {}", d.log_mag, log_prod);
    }
}

#[test]
fn two_cos_determinant_example() {
    let mut r = rng(5);
    let v = Potential::two_cos(3.0);
    for _ in 0..20 {
        let x = random_phase(&mut r, 2);
        let w = random_frequency(&mut r, 2);
        let e = r.gen_range(-8.0..8.0);
        let h = hamiltonian(&v, &x, &w, Span::first(10)).unwrap();
        let log_prod: f64 = h.eigenvalues().iter().map(|l| (l - e).abs().ln()).sum();
        let d = dirichlet_det(&v, &x, &w, e, Span::first(10)).unwrap();
        assert!(rel_close(d.log_mag, log_prod, 1e-9));
    }
}

#[test]
fn transfer_entries_are_dirichlet_determinants() {
    let mut r = rng(12);
    for _ in 0..200 {
        let dim = r.gen_range(1..=2);
        let v = random_potential(&mut r, dim, 3.0);
        let x = random_phase(&mut r, dim);
        let w = random_frequency(&mut r, dim);
        let a: i64 = r.gen_range(-20..20);
        let n: i64 = r.gen_range(2..=60);
        let b = a + n - 1;
        let e = r.gen_range(-6.0..6.0);
        let orbit = Orbit::new(&v, &x, &w, Span::new(a, b)).unwrap();
        let m = orbit.transfer(Span::new(a, b), e);
        let cases = [
            ((0, 0), Span::new(a, b), 1.0),
            ((0, 1), Span::new(a + 1, b), -1.0),
            ((1, 0), Span::new(a, b - 1), 1.0),
            ((1, 1), Span::new(a + 1, b - 1), -1.0),
        ];
        for ((i, j), span, s) in cases {
            let (phase, log) = m.entry_log(i, j);
            let d = orbit.det(span, e, false);
            if d.is_zero() {
                continue;
            }
            assert_eq!(phase, s * d.sign);
            assert!(
                (log - d.log_mag).abs() <= 1e-10 * d.log_mag.abs().max(1.0),
                "entry ({i},{j}): {log} vs {}",
                d.log_mag
            );
        }
        assert!(m.det_defect() < 1e-10);
    }
}

#[test]
fn log_norm_bounds() {
    let mut r = rng(13);
    for _ in 0..100 {
        let v = random_potential(&mut r, 2, 2.0);
        let x = random_phase(&mut r, 2);
        let w = random_frequency(&mut r, 2);
        let e: f64 = r.gen_range(-5.0..5.0);
        let n = r.gen_range(1..400);
        let m = transfer(&v, &x, &w, e, Span::first(n)).unwrap();
        let c = (2.0 + v.sup_norm() + e.abs()).ln();
        assert!(m.log_norm() >= 0.0);
        assert!(m.log_norm() <= c * n as f64 + 1e-12);
    }
}

#[test]
fn eigensolver_matches_dense_and_trace() {
    let mut r = rng(14);
    for _ in 0..40 {
        let v = random_potential(&mut r, 2, 4.0);
        let x = random_phase(&mut r, 2);
        let w = random_frequency(&mut r, 2);
        let n = r.gen_range(1..=200);
        let h = hamiltonian(&v, &x, &w, Span::first(n)).unwrap();
        let es = h.eigen(true);
        let reference = dense_eigenvalues(&h);
        let tol = 1e-12 * (1.0 + v.sup_norm()) * 10.0;
        for (a, b) in es.values.iter().zip(&reference) {
            assert!((a - b).abs() < tol, "{a} vs {b}");
        }
        let trace: f64 = h.diag().iter().sum();
        assert!((es.values.iter().sum::<f64>() - trace).abs() < 1e-10 * (n as f64).max(1.0));
        let norm_h = h.norm_inf();
        for (j, vec) in es.vectors.iter().enumerate() {
            let hv = h.apply(vec);
            let res: f64 = hv
                .iter()
                .zip(vec)
                .map(|(p, q)| (p - es.values[j] * q).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-8 * norm_h);
            let big = vec.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let first = vec.iter().find(|c| c.abs() > 1e-12 * big).unwrap();
            assert!(*first > 0.0);
            for u in &es.vectors[..j] {
                let d: f64 = u.iter().zip(vec).map(|(p, q)| p * q).sum();
                assert!(d.abs() < 1e-8);
            }
        }
    }
}

#[test]
fn sturm_count_agrees_with_eigenvalues() {
    let mut r = rng(15);
    for _ in 0..50 {
        let v = random_potential(&mut r, 1, 3.0);
        let x = random_phase(&mut r, 1);
        let w = random_frequency(&mut r, 1);
        let n = r.gen_range(1..=200);
        let h = hamiltonian(&v, &x, &w, Span::first(n)).unwrap();
        let vals = dense_eigenvalues(&h);
        for _ in 0..10 {
            let e = r.gen_range(-8.0..8.0);
            if vals.iter().any(|l| (l - e).abs() < 1e-9) {
                continue;
            }
            let below = vals.iter().filter(|&&l| l < e).count();
            assert_eq!(h.sturm_count(e), below);
            // sign agreements of consecutive determinants
            let orbit = Orbit::new(&v, &x, &w, Span::first(n)).unwrap();
            let mut prev = 1.0;
            let mut changes = 0;
            for k in 1..=n {
                let s = orbit.det(Span::first(k), e, false).sign;
                if s != prev {
                    changes += 1;
                }
                prev = s;
            }
            assert_eq!(changes, below);
        }
    }
}

#[test]
fn free_examples() {
    let x = Phase::zero(1);
    let w = Frequency::new(vec![0.3], 0.1, 2.0).unwrap();
    let z = Potential::zero(1);
    let e = eigs(&z, &x, &w, Span::first(2), false).unwrap();
    assert!((e.values[0] + 1.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);
    let d = dirichlet_det(&z, &x, &w, 0.0, Span::first(2)).unwrap();
    assert_eq!((d.sign, d.log_mag), (-1.0, 0.0));
    let d = dirichlet_det(&z, &x, &w, 0.0, Span::first(3)).unwrap();
    assert_eq!(d.sign, 0.0);
    let d = dirichlet_det(&z, &x, &w, 0.0, Span::new(1, 0)).unwrap();
    assert_eq!(d.value(), 1.0);
    let m = transfer(&z, &x, &w, 0.0, Span::first(1)).unwrap();
    assert_eq!(m.matrix()[0][1].signum(), -1.0);
    assert!((m.det() - 1.0).abs() < 1e-15);
    let amo = Potential::new(
        1,
        &[
            FourierTerm::new(vec![1], Complex64::new(1.0, 0.0)),
            FourierTerm::new(vec![-1], Complex64::new(1.0, 0.0)),
        ],
        1.0,
    )
    .unwrap();
    let y = 0.2;
    let val = eval_potential(&amo, &[Complex64::new(0.0, y)]).unwrap();
    assert!((val.re - 2.0 * (std::f64::consts::TAU * y).cosh()).abs() < 1e-12);
}

#[test]
fn reflection_symmetry() {
    let mut r = rng(16);
    for _ in 0..30 {
        let v = random_potential(&mut r, 2, 3.0);
        let x = random_phase(&mut r, 2);
        let w = random_frequency(&mut r, 2);
        let (a, b) = (r.gen_range(-10..10), r.gen_range(10..40));
        let e = r.gen_range(-5.0..5.0);
        let xr = x.shifted(&w, a + b);
        let wr = w.negated();
        let d1 = dirichlet_det(&v, &x, &w, e, Span::new(a, b)).unwrap();
        let d2 = dirichlet_det(&v, &xr, &wr, e, Span::new(a, b)).unwrap();
        assert_eq!(d1.sign, d2.sign);
        assert!(rel_close(d1.log_mag, d2.log_mag, 1e-9));
        let e1 = eigs(&v, &x, &w, Span::new(a, b), true).unwrap();
        let e2 = eigs(&v, &xr, &wr, Span::new(a, b), true).unwrap();
        for (p, q) in e1.values.iter().zip(&e2.values) {
            assert!((p - q).abs() < 1e-10);
        }
        let n = e1.len();
        for (u, v) in e1.vectors.iter().zip(&e2.vectors) {
            if e1.values.windows(2).any(|p| p[1] - p[0] < 1e-6) {
                break;
            }
            let d: f64 = (0..n).map(|i| u[i] * v[n - 1 - i]).sum();
            assert!((d.abs() - 1.0).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn interlacing_after_deleting_a_site(
        diag in prop::collection::vec(-5.0f64..5.0, 2..40),
        seed in any::<u64>(),
    ) {
        let n = diag.len();
        let off: Vec<f64> = (0..n - 1).map(|i| ((seed >> (i % 60)) & 1) as f64 * 2.0 - 1.0).collect();
        let t = SymTridiagonal::new(diag, off);
        let drop = (seed as usize) % n;
        let keep: Vec<usize> = (0..n).filter(|&i| i != drop).collect();
        let sub = t.principal_submatrix(&keep);
        prop_assert!(interlace_check(&t.eigen(false), &sub.eigen(false)));
    }

    #[test]
    fn determinant_sign_counts_eigenvalues_below(
        diag in prop::collection::vec(-4.0f64..4.0, 1..30),
        e in -7.0f64..7.0,
    ) {
        let t = SymTridiagonal::schrodinger(diag.clone());
        let below = t.sturm_count(e);
        let d = det_recurrence(&diag, e, false);
        if !d.is_zero() {
            let expected = if below % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(d.sign, expected);
        }
    }
}
