mod common;

use common::*;
use qp_spectra::lyapunov::*;
use qp_spectra::operator::{Orbit, Potential, Span, TransferProduct};
use qp_spectra::torus::{Frequency, Phase, SamplePlan, Scheme};
use rand::Rng;

fn golden() -> Frequency {
    Frequency::new(vec![(5f64.sqrt() - 1.0) / 2.0], 0.1, 1.5).unwrap()
}

#[test]
fn constant_potential_closed_form() {
    let v = Potential::constant(1, 1.0);
    let plan = SamplePlan::new(1, 4, Scheme::Grid);
    let est = lyapunov_finite(&v, &golden(), -2.0, 2048, &[], &plan).unwrap();
    let exact = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    assert!((est.value - exact).abs() < 0.01, "{} vs {exact}", est.value);
    assert!(est.value >= 0.0 && est.stderr >= 0.0);
}

#[test]
fn free_estimate_is_below_frobenius_slack() {
    let plan = SamplePlan::new(2, 64, Scheme::UniformRandom).with_seed(3);
    for n in [1, 10, 100, 1000] {
        let est = lyapunov_finite(&Potential::zero(2), &diophantine_pair(), 0.0, n, &[], &plan).unwrap();
        assert!(est.value <= 0.35 / n as f64);
    }
}

#[test]
fn subadditive_along_doubling_chain() {
    let v = Potential::two_cos(3.0);
    let plan = SamplePlan::new(2, 200, Scheme::LowDiscrepancy).with_seed(9);
    for e in [-2.0, 0.3, 4.0] {
        let mut prev = lyapunov_finite(&v, &diophantine_pair(), e, 32, &[], &plan).unwrap();
        let mut n = 64;
        while n <= 1024 {
            let cur = lyapunov_finite(&v, &diophantine_pair(), e, n, &[], &plan).unwrap();
            assert!(cur.value <= prev.value + 3.0 * prev.stderr, "E={e} N={n}");
            prev = cur;
            n *= 2;
        }
    }
}

#[test]
fn grid_estimate_is_translation_stable() {
    let v = Potential::two_cos(3.0);
    let plan = SamplePlan::new(2, 400, Scheme::Grid);
    let a = lyapunov_finite(&v, &diophantine_pair(), 0.5, 128, &[], &plan).unwrap();
    let shifted = plan.clone().with_shift(vec![0.123, 0.456]);
    let b = lyapunov_finite(&v, &diophantine_pair(), 0.5, 128, &[], &shifted).unwrap();
    assert!((a.value - b.value).abs() <= 3.0 * a.stderr.max(b.stderr));
}

#[test]
fn transfer_block_chains_obey_the_avalanche_bound() {
    let v = Potential::two_cos(1.5);
    let w = diophantine_pair();
    let plan = SamplePlan::new(2, 100, Scheme::UniformRandom).with_seed(4);
    let ell = 30usize;
    let mut r = rng(21);
    let mut tested = 0;
    for x in qp_spectra::torus::sample_phases(&plan).unwrap() {
        let e = r.gen_range(-3.0..3.0);
        let gamma = lyapunov_finite(&v, &w, e, ell, &[], &SamplePlan::new(2, 64, Scheme::Grid))
            .unwrap()
            .value;
        let mu = (ell as f64 * gamma / 2.0).exp();
        let orbit = Orbit::new(&v, &x, &w, Span::first(20 * ell)).unwrap();
        let mats: Vec<TransferProduct<f64>> = (0..20)
            .map(|j| {
                let a = (j * ell + 1) as i64;
                orbit.transfer(Span::new(a, a + ell as i64 - 1), e)
            })
            .collect();
        let rep = avalanche_check(&mats, mu).unwrap();
        if rep.hypotheses_ok {
            tested += 1;
            assert!(rep.lhs_residual <= 5.0 * rep.bound, "{rep:?}");
        }
    }
    assert!(tested > 0);
}

#[test]
fn multiscale_estimate_agrees_with_direct_average() {
    let v = Potential::amo(3.0);
    let w = golden();
    let plan = SamplePlan::new(1, 300, Scheme::Grid);
    let (ell, n) = (40, 10);
    for e in [-1.0, 0.0, 2.5] {
        let direct = lyapunov_finite(&v, &w, e, ell * n, &[], &plan).unwrap();
        let ap = ap_multiscale_l(&v, &w, e, ell, n, (ell as f64 * 3f64.ln() / 2.0).exp(), &plan)
            .unwrap();
        let joint = (direct.stderr.powi(2) + ap.stderr.powi(2)).sqrt();
        assert!(!ap.unreliable);
        assert!((direct.value - ap.value).abs() <= 3.0 * joint + 0.35 / (ell * n) as f64);
    }
    let free = ap_multiscale_l(&Potential::zero(1), &w, 0.0, 10, 5, 1.0, &plan).unwrap();
    assert!(free.value.abs() < 0.1);
    assert!(free.unreliable);
}

fn v_lambda(v: &Potential) -> f64 {
    v.sup_norm() / 4.0
}

#[test]
fn continuity_bounds_hold_when_applicable() {
    let mut r = rng(22);
    let mut applicable = 0;
    for i in 0..80 {
        let v = Potential::two_cos(r.gen_range(0.5..3.0));
        let x = random_phase(&mut r, 2);
        let w = random_frequency(&mut r, 2);
        let e = r.gen_range(-3.0..3.0);
        let n = r.gen_range(5..60);
        let d = 10f64.powf(r.gen_range(-14.0..-6.0));
        let lambda = v_lambda(&v);
        let p = match i % 4 {
            0 => Perturbation::Phase(vec![d, -d]),
            1 => Perturbation::Frequency(vec![d, 0.0]),
            2 => Perturbation::Energy(d),
            _ => Perturbation::Potential(Potential::two_cos(lambda + d)),
        };
        let rep = continuity_probe(&v, &x, &w, e, n, &p).unwrap();
        assert!(rep.ok, "{rep:?}");
        applicable += rep.sharp_applicable as usize;
    }
    assert!(applicable > 40);
}

#[test]
fn free_and_flat_slopes_in_y() {
    let plan = SamplePlan::new(1, 16, Scheme::Grid);
    let rep = lipschitz_in_y(&Potential::zero(1), &golden(), 0.0, 64, &[0.0, 0.1, 0.2], &plan).unwrap();
    assert!(rep.max_slope < 1e-12);
    let rep = lipschitz_in_y(&Potential::amo(1.0), &golden(), 0.0, 64, &[0.0, 0.0], &plan).unwrap();
    assert_eq!(rep.max_slope, 0.0);
    assert!(lipschitz_in_y(&Potential::amo(1.0), &golden(), 0.0, 64, &[0.6], &plan).is_err());
}

#[test]
fn slopes_in_y_are_uniform_in_n() {
    let v = Potential::two_cos(3.0);
    let plan = SamplePlan::new(2, 200, Scheme::LowDiscrepancy).with_seed(1);
    let grid = [-0.2, -0.1, 0.0, 0.1, 0.2];
    let slopes: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| lipschitz_in_y(&v, &diophantine_pair(), 0.7, n, &grid, &plan).unwrap().max_slope)
        .collect();
    let (lo, hi) = slopes.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
    assert!(hi <= 1.2 * lo, "{slopes:?}");
}

#[test]
fn complexified_average_uses_the_strip() {
    let v = Potential::amo(1.0);
    let plan = SamplePlan::new(1, 8, Scheme::Grid);
    assert!(lyapunov_finite(&v, &golden(), 0.0, 10, &[1.5], &plan).is_err());
    let x = Phase::zero(1);
    assert!(log_norm_per_site(&v, &x, &golden(), 0.0, 10, &[0.3]).unwrap() > 0.0);
}
