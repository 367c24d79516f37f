mod common;

use common::*;
use qp_spectra::localization::*;
use qp_spectra::lyapunov::LyapunovTable;
use qp_spectra::operator::{Orbit, Potential, Span, SymTridiagonal};
use qp_spectra::torus::{SamplePlan, Scheme};
use rand::Rng;

fn unit(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

#[test]
fn stabilization_bound_never_fails() {
    let mut r = rng(41);
    for _ in 0..50 {
        let dim = r.gen_range(1..=2);
        let scale = r.gen_range(0.2..5.0);
        let v = random_potential(&mut r, dim, scale);
        let x = random_phase(&mut r, dim);
        let w = random_frequency(&mut r, dim);
        let outer = Span::new(r.gen_range(-20..0), r.gen_range(1..80));
        let a0 = r.gen_range(outer.a..=outer.b);
        let inner = Span::new(a0, r.gen_range(a0..=outer.b));
        let orbit = Orbit::new(&v, &x, &w, outer).unwrap();
        let j0 = r.gen_range(0..inner.len());
        let rec = stabilization_bound(&orbit, inner, outer, j0).unwrap();
        assert!(rec.ok, "{rec:?}");
    }
    let orbit = Orbit::new(&Potential::two_cos(2.0), &random_phase(&mut r, 2), &diophantine_pair(), Span::first(30)).unwrap();
    let rec = stabilization_bound(&orbit, Span::first(30), Span::first(30), 7).unwrap();
    assert!(rec.lhs < 1e-12);
}

#[test]
fn localized_state_barely_moves() {
    let v = Potential::two_cos(5.0);
    let mut r = rng(42);
    let outer = Span::new(-100, 100);
    let orbit = Orbit::new(&v, &random_phase(&mut r, 2), &diophantine_pair(), outer).unwrap();
    let inner = Span::new(-50, 50);
    let small = orbit.hamiltonian(inner).eigen(true);
    let j = (0..small.len())
        .max_by(|&p, &q| small.vectors[p][50].abs().total_cmp(&small.vectors[q][50].abs()))
        .unwrap();
    let rec = stabilization_bound(&orbit, inner, outer, j).unwrap();
    assert!(rec.ok && rec.rhs < 1e-8 && rec.lhs < 1e-8, "{rec:?}");
}

#[test]
fn approximate_eigenpairs() {
    let mut r = rng(43);
    // exact eigenvector
    let h = SymTridiagonal::schrodinger((0..20).map(|_| r.gen_range(-3.0..3.0)).collect());
    let sys = h.eigen(true);
    let a = approx_eigenpair(&h, &sys.vectors[5], sys.values[5], 1e-9, Some(1e-3)).unwrap();
    assert_eq!(a.index, 5);
    assert!(a.ok() && a.distance.unwrap() < 1e-10);
    // equal mix of two neighbours
    let mut mix: Vec<f64> = sys.vectors[5].iter().zip(&sys.vectors[6]).map(|(p, q)| p + q).collect();
    unit(&mut mix);
    let e = (sys.values[5] + sys.values[6]) / 2.0;
    let gap = sys.values[6] - sys.values[5];
    let a = approx_eigenpair(&h, &mix, e, gap / 2.0 * (1.0 + 1e-9), None).unwrap();
    assert!(a.index == 5 || a.index == 6);
    assert!(a.overlap_ok);

    let mut tested_b = 0;
    for _ in 0..50 {
        // zero extension of a sub-box eigenvector
        let v = Potential::two_cos(5.0);
        let outer = Span::new(1, r.gen_range(40..120));
        let orbit = Orbit::new(&v, &random_phase(&mut r, 2), &diophantine_pair(), outer).unwrap();
        let a0 = r.gen_range(1..outer.b / 2);
        let inner = Span::new(a0, a0 + r.gen_range(10..outer.b - a0));
        let sub = orbit.hamiltonian(inner).eigen(true);
        let j = r.gen_range(0..inner.len());
        let mut phi = vec![0.0; outer.len()];
        phi[outer.index(inner.a)..=outer.index(inner.b)].copy_from_slice(&sub.vectors[j]);
        let big = orbit.hamiltonian(outer);
        let res = {
            let y = big.apply(&phi);
            y.iter().zip(&phi).map(|(p, q)| (p - sub.values[j] * q).powi(2)).sum::<f64>().sqrt()
        };
        let eps = res * (1.0 + 1e-6) + 1e-14;
        let eta = big.eigen(false).gap(big.eigen(false).nearest(sub.values[j]).unwrap()) / 2.0;
        let rep = approx_eigenpair(&big, &phi, sub.values[j], eps, Some(eta)).unwrap();
        assert!(rep.ok(), "{rep:?}");
        tested_b += rep.distance.is_some() as usize;

        // random unit vector at its Rayleigh quotient
        let n = 30;
        let h = SymTridiagonal::schrodinger((0..n).map(|_| r.gen_range(-4.0..4.0)).collect());
        let mut phi: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        unit(&mut phi);
        let e = h.apply(&phi).iter().zip(&phi).map(|(p, q)| p * q).sum::<f64>();
        let res = h.apply(&phi).iter().zip(&phi).map(|(p, q)| (p - e * q).powi(2)).sum::<f64>().sqrt();
        let rep = approx_eigenpair(&h, &phi, e, res * (1.0 + 1e-6), Some(r.gen_range(0.01..2.0))).unwrap();
        assert!(rep.ok(), "{rep:?}");
    }
    assert!(tested_b > 20);
}

#[test]
fn approx_rejects_large_residual() {
    let h = SymTridiagonal::schrodinger(vec![0.0; 4]);
    assert!(approx_eigenpair(&h, &[1.0, 0.0, 0.0, 0.0], 5.0, 0.1, None).is_err());
}

#[test]
fn separation_examples() {
    let h = SymTridiagonal::schrodinger(vec![0.0, 0.0]);
    let rec = separation_report(&h.eigen(false), 0, 2, 1.0);
    assert_eq!(rec.min_gap, 2.0);
    assert!(rec.ok);
    let free = SymTridiagonal::schrodinger(vec![0.0; 400]).eigen(false);
    assert!(separation_report(&free, 200, 400, 4.0).ok);
}

fn table(v: &Potential, w: &qp_spectra::torus::Frequency) -> LyapunovTable {
    let s = v.sup_norm() + 2.0;
    LyapunovTable::build(v, w, 512, (-s, s), 96, &SamplePlan::new(2, 48, Scheme::LowDiscrepancy).with_seed(1)).unwrap()
}

#[test]
fn batch_separation_is_monotone_in_c_sep() {
    let v = Potential::two_cos(5.0);
    let w = diophantine_pair();
    let g = table(&v, &w);
    let x = random_phase(&mut rng(44), 2);
    let frac: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&c| {
            let rows = localization_batch(&v, &x, &w, Span::first(300), 1e-6, 5, c, &g).unwrap();
            rows.iter().filter(|r| r.1.ok).count() as f64 / rows.len() as f64
        })
        .collect();
    assert!(frac.windows(2).all(|p| p[1] >= p[0]), "{frac:?}");
    let rows = localization_batch(&v, &x, &w, Span::first(300), 1e-6, 5, 4.0, &g).unwrap();
    let mass: f64 = rows.iter().map(|r| r.0.mass_inside).sum();
    assert!(mass >= 300.0 * (1.0 - 1e-6));
    // profiles sharing an interval belong to orthogonal vectors
    let sys = Orbit::new(&v, &x, &w, Span::first(300)).unwrap().hamiltonian(Span::first(300)).eigen(true);
    for p in &rows {
        for q in rows.iter().filter(|q| q.0.j > p.0.j && q.0.interval == p.0.interval) {
            let d: f64 = sys.vectors[p.0.j].iter().zip(&sys.vectors[q.0.j]).map(|(a, b)| a * b).sum();
            assert!(d.abs() < 1e-12);
        }
    }
}

#[test]
fn strong_coupling_eigenvectors_decay() {
    let v = Potential::two_cos(5.0);
    let mut r = rng(45);
    let (mut eligible, mut decaying) = (0, 0);
    for _ in 0..4 {
        let w = random_frequency(&mut r, 2);
        let g = table(&v, &w);
        let rows = localization_batch(&v, &random_phase(&mut r, 2), &w, Span::first(500), 1e-6, 5, 4.0, &g).unwrap();
        for (p, _) in rows.iter().filter(|p| 4.0 * p.0.rate_floor > 0.5) {
            eligible += 1;
            decaying += p.decays() as usize;
        }
    }
    assert!(decaying as f64 >= 0.8 * eligible as f64, "{decaying}/{eligible}");
}

#[test]
fn matching_across_scales() {
    let v = Potential::two_cos(5.0);
    let w = diophantine_pair();
    let x = random_phase(&mut rng(46), 2);
    let m = match_scales(&v, &x, &w, 40, 17, 40).unwrap();
    assert_eq!(m.j_prime, 17);
    assert!(m.energy_gap == 0.0 && m.vector_distance < 1e-12);

    let orbit = Orbit::new(&v, &x, &w, Span::centered(200)).unwrap();
    let sys = orbit.hamiltonian(Span::centered(200)).eigen(true);
    let j = (0..sys.len())
        .max_by(|&p, &q| sys.vectors[p][200].abs().total_cmp(&sys.vectors[q][200].abs()))
        .unwrap();
    let m = match_scales(&v, &x, &w, 200, j, 400).unwrap();
    assert!(!m.ambiguous);
    assert!(m.energy_gap <= m.boundary_mass + 1e-8, "{m:?}");
    assert!(m.energy_gap < 1e-12 && m.vector_distance < 1e-8);
}

#[test]
fn chain_gaps_shrink() {
    let v = Potential::two_cos(5.0);
    let w = diophantine_pair();
    let x = random_phase(&mut rng(47), 2);
    let orbit = Orbit::new(&v, &x, &w, Span::centered(10)).unwrap();
    let sys = orbit.hamiltonian(Span::centered(10)).eigen(true);
    let j = (0..sys.len())
        .max_by(|&p, &q| sys.vectors[p][10].abs().total_cmp(&sys.vectors[q][10].abs()))
        .unwrap();
    let chain = stabilization_chain(&v, &x, &w, 10, j, 2000).unwrap();
    assert_eq!(chain.len(), 2);
    assert!(chain[1].energy_gap <= chain[0].energy_gap + 1e-12, "{chain:?}");
    assert!(chain.iter().all(|m| m.energy_gap <= m.boundary_mass + 1e-8));
}

#[test]
fn decay_probe_examples() {
    let w = diophantine_pair();
    let x = random_phase(&mut rng(48), 2);
    let out = generalized_decay_probe(&Potential::two_cos(5.0), &x, &w, 30.0, 100, 10.0).unwrap();
    assert!(!out.is_solution && out.left_growth > 1.0, "{out:?}");

    let free = generalized_decay_probe(&Potential::zero(2), &x, &w, 0.0, 100, 10.0).unwrap();
    assert!(free.is_solution && free.polynomially_bounded, "{free:?}");
    assert!(free.decay_rate < 0.01);

    let v = Potential::two_cos(5.0);
    let n = 150;
    let sys = Orbit::new(&v, &x, &w, Span::centered(n)).unwrap().hamiltonian(Span::centered(n)).eigen(true);
    let j = (0..sys.len())
        .max_by(|&p, &q| sys.vectors[p][n].abs().total_cmp(&sys.vectors[q][n].abs()))
        .unwrap();
    let e = sys.values[j];
    let probe = generalized_decay_probe(&v, &x, &w, e, n, 10.0).unwrap();
    let gamma = table(&v, &w).at(e);
    assert!(probe.is_solution, "{probe:?}");
    assert!(probe.decay_rate >= gamma / 4.0, "{probe:?} γ={gamma}");
}
