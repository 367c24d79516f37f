mod common;

use common::*;
use qp_spectra::green::*;
use qp_spectra::ldt::*;
use qp_spectra::lyapunov::lyapunov_finite;
use qp_spectra::operator::{Orbit, Potential, Span};
use qp_spectra::torus::{Frequency, Phase, SamplePlan, Scheme};
use rand::Rng;

#[test]
fn cramer_entries_match_dense_inverse() {
    let mut r = rng(31);
    let mut done = 0;
    while done < 200 {
        let dim = r.gen_range(1..=2);
        let scale = r.gen_range(0.3..4.0);
        let v = random_potential(&mut r, dim, scale);
        let x = random_phase(&mut r, dim);
        let w = random_frequency(&mut r, dim);
        let n = r.gen_range(1..=200usize);
        let a = r.gen_range(-50..50i64);
        let span = Span::new(a, a + n as i64 - 1);
        let orbit = Orbit::new(&v, &x, &w, span).unwrap();
        let h = orbit.hamiltonian(span);
        let e = r.gen_range(-4.0..4.0);
        if h.eigen(false).dist(e) < 1e-3 {
            continue;
        }
        let mut m = dense(&h);
        for i in 0..n {
            m[(i, i)] -= e;
        }
        let inv = m.try_inverse().unwrap();
        for _ in 0..5 {
            let j = r.gen_range(0..n);
            let k = r.gen_range(0..n);
            let g = greens_entry(&orbit, span, e, a + j as i64, a + k as i64).unwrap();
            let want = inv[(j, k)];
            let scale = want.abs().max(1e-300);
            assert!((g.value - want).abs() <= 1e-6 * scale.max(1e-12 * inv.amax()), "{} vs {want}", g.value);
        }
        done += 1;
    }
}

#[test]
fn poisson_formula_reproduces_eigenvectors() {
    let v = Potential::two_cos(5.0);
    let mut r = rng(32);
    let outer = Span::new(1, 120);
    let mut checked = 0;
    for _ in 0..20 {
        let x = random_phase(&mut r, 2);
        let orbit = Orbit::new(&v, &x, &diophantine_pair(), outer).unwrap();
        let sys = orbit.hamiltonian(outer).eigen(true);
        let j = r.gen_range(0..outer.len());
        let e = sys.values[j];
        let psi = &sys.vectors[j];
        for _ in 0..10 {
            let a = r.gen_range(2..60);
            let b = r.gen_range(a..119);
            let m = r.gen_range(a..=b);
            if orbit.hamiltonian(Span::new(a, b)).eigen(false).dist(e) < 1e-3 {
                continue;
            }
            match poisson_residual(&orbit, outer, e, psi, Span::new(a, b), m) {
                Ok(res) => {
                    assert!(res <= 1e-8, "residual {res}");
                    checked += 1;
                }
                Err(qp_spectra::error::Error::Singular { .. }) => {}
                Err(err) => panic!("{err}"),
            }
        }
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn covering_verdict_is_sound() {
    let v = Potential::two_cos(5.0);
    let span = Span::first(300);
    let mut r = rng(33);
    let mut positive = 0;
    for _ in 0..10 {
        let x = random_phase(&mut r, 2);
        let orbit = Orbit::new(&v, &x, &diophantine_pair(), span).unwrap();
        let sys = orbit.hamiltonian(span).eigen(false);
        let e0 = sys.values[r.gen_range(0..300)];
        for e in [e0 + 1e-2, e0 - 1e-2, e0] {
            let verdict = covering_verdict(&orbit, span, e, windowed_cover(span, 40)).unwrap();
            assert!(verdict.sound(), "{verdict:?}");
            if e == e0 {
                assert!(!verdict.verdict);
            }
            positive += verdict.verdict as usize;
        }
    }
    assert!(positive > 0);
}

#[test]
fn deviation_fraction_is_monotone_in_p() {
    let v = Potential::two_cos(3.0);
    let plan = SamplePlan::new(2, 400, Scheme::LowDiscrepancy).with_seed(5);
    let samples = ldt_samples(&v, &diophantine_pair(), 0.5, 200, &plan, Target::Determinant).unwrap();
    let ps = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let (_, _, f) = ldt_fractions(&samples, 200, &ps, Reference::SameSample);
    assert!(f.windows(2).all(|w| w[1] <= w[0]), "{f:?}");
    assert!(f.iter().all(|&x| (0.0..=1.0).contains(&x)));
}

#[test]
fn deviation_fraction_decreases_with_scale() {
    let v = Potential::two_cos(3.0);
    let plan = SamplePlan::new(2, 500, Scheme::LowDiscrepancy).with_seed(6);
    let f: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| {
            ldt_measure(&v, &diophantine_pair(), 0.5, n, 0.6, &plan, Target::TransferNorm, Reference::SameSample)
                .unwrap()
                .deviation_fraction
        })
        .collect();
    let inversions = f.windows(2).filter(|w| w[1] > w[0]).count();
    let worst = f.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    assert!(inversions <= 1 && worst <= 1e-3, "{f:?}");
}

#[test]
fn ldt_rejects_bad_parameters() {
    let plan = SamplePlan::new(1, 4, Scheme::Grid);
    let w = Frequency::new(vec![0.618], 0.1, 2.0).unwrap();
    let v = Potential::amo(1.0);
    assert!(ldt_measure(&v, &w, 0.0, 1, 0.5, &plan, Target::Determinant, Reference::SameSample).is_err());
    assert!(ldt_measure(&v, &w, 0.0, 10, 1.5, &plan, Target::Determinant, Reference::SameSample).is_err());
}

#[test]
fn spectral_form_is_consistent_with_fitted_tau() {
    let v = Potential::two_cos(3.0);
    let w = diophantine_pair();
    let n = 200;
    let plan = SamplePlan::new(2, 200, Scheme::LowDiscrepancy).with_seed(7);
    let l_n = lyapunov_finite(&v, &w, 0.5, n, &[], &plan).unwrap().value;
    let mut r = rng(34);
    let checks: Vec<SpectralFormCheck> = (0..200)
        .map(|_| {
            let orbit = Orbit::new(&v, &random_phase(&mut r, 2), &w, Span::first(n)).unwrap();
            spectral_form_check(&orbit, 0.5, l_n, 0.25, 0.25)
        })
        .collect();
    let (train, test) = checks.split_at(100);
    let tau = fit_tau(train, n, 0.9).expect("no admissible τ");
    let violations = test
        .iter()
        .filter(|c| c.premise && c.det_gap <= -(n as f64).powf(1.0 - tau / 2.0))
        .count();
    assert!(violations <= 5, "τ = {tau}, {violations} violations");
    assert!(checks.iter().all(|c| c.consistent || c.premise));
}

#[test]
fn eigenvalue_makes_the_premise_fail() {
    let orbit = Orbit::from_values(1, vec![0.0, 0.0, 0.0]);
    let c = spectral_form_check(&orbit, 0.0, 0.0, 0.25, 0.25);
    assert!(c.resolvent_log > 20.0, "{c:?}");
    assert!(!c.premise && c.consistent);
}

#[test]
fn wegner_fraction_shrinks_with_ell() {
    let v = Potential::two_cos(3.0);
    let plan = SamplePlan::new(2, 2000, Scheme::LowDiscrepancy).with_seed(8);
    let f: Vec<WegnerReport> = [1, 3, 6, 10]
        .iter()
        .map(|&ell| wegner_fraction(&v, &diophantine_pair(), 0.5, 100, ell, 0.25, &plan).unwrap())
        .collect();
    assert!(f.windows(2).all(|w| w[1].fraction <= w[0].fraction));
    assert!(f[0].fraction > 0.0);
    assert!(f.iter().all(|r| !r.precondition));
}

#[test]
fn free_spread_covers_the_band() {
    let w = Frequency::new(vec![0.618], 0.1, 2.0).unwrap();
    let seg = Segment {
        from: Phase::zero(1),
        delta: vec![1.0],
    };
    let flat = graph_spread(&Potential::zero(1), &w, 10, 3, &seg).unwrap();
    assert!(flat.spread < 1e-12);
    let amo = graph_spread(&Potential::amo(1.0), &w, 10, 0, &seg).unwrap();
    assert!(amo.spread > 0.0 && amo.spread <= 4.0, "{amo:?}");
    assert!(graph_spread(&Potential::zero(1), &w, 10, 10, &seg).is_err());
}
