mod common;

use common::*;
use num_rational::Ratio;
use proptest::prelude::*;
use qp_spectra::operator::Potential;
use qp_spectra::spectrum::*;
use qp_spectra::torus::{SamplePlan, Scheme};

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

fn set(pairs: &[(Q, Q)]) -> IntervalSet<Q> {
    IntervalSet::from_closed(pairs).unwrap()
}

fn window(lo: Q, hi: Q) -> Interval<Q> {
    Interval::closed(lo, hi)
}

#[test]
fn rational_fixtures() {
    let a = set(&[(q(0, 1), q(1, 1)), (q(2, 1), q(3, 1))]);
    assert_eq!(a.measure(), q(2, 1));

    let b = set(&[(q(1, 2), q(5, 2))]);
    assert_eq!(a.union(&b), set(&[(q(0, 1), q(3, 1))]));
    assert_eq!(a.intersect(&b), set(&[(q(1, 2), q(1, 1)), (q(2, 1), q(5, 2))]));
    assert_eq!(a.intersect(&b).measure(), q(1, 1));

    let l = set(&[(q(0, 1), q(1, 1))]).fatten(q(1, 2));
    let r = set(&[(q(2, 1), q(3, 1))]).fatten(q(1, 2));
    let touch = l.intersect(&r);
    assert_eq!(touch, set(&[(q(3, 2), q(3, 2))]));
    assert_eq!(touch.measure(), q(0, 1));

    let thirds = set(&[(q(1, 3), q(1, 3)), (q(2, 3), q(5, 6))]).fatten(q(1, 6));
    assert_eq!(thirds, set(&[(q(1, 6), q(1, 1))]));
    assert_eq!(thirds.measure(), q(5, 6));

    let w = window(q(-1, 1), q(4, 1));
    let c = a.complement_in(&w);
    assert_eq!(c.measure(), q(3, 1));
    assert!(a.intersect(&c).is_empty());
    assert_eq!(a.union(&c), set(&[(q(-1, 1), q(4, 1))]));

    assert_eq!(a.point_dist(q(3, 2)), Some(q(1, 2)));
    assert_eq!(a.point_dist(q(7, 4)), Some(q(1, 4)));
    assert_eq!(a.point_dist(q(1, 1)), Some(q(0, 1)));
    assert_eq!(IntervalSet::<Q>::empty().point_dist(q(0, 1)), None);
    assert!(IntervalSet::from_closed(&[(q(1, 1), q(0, 1))]).is_err());
}

#[test]
fn json_round_trip() {
    let a = IntervalSet::from_closed(&[(0.0, 1.0), (2.0, 3.5)]).unwrap();
    let text = serde_json::to_string(&a).unwrap();
    assert_eq!(text, "[[0.0,1.0],[2.0,3.5]]");
    assert_eq!(serde_json::from_str::<IntervalSet<f64>>(&text).unwrap(), a);
    let c = a.complement_in(&Interval::closed(-1.0, 4.0));
    let back: IntervalSet<f64> = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
}

fn arb_set() -> impl Strategy<Value = IntervalSet<Q>> {
    prop::collection::vec((-40i64..40, 0i64..10), 0..8).prop_map(|v| {
        let pairs: Vec<(Q, Q)> = v.iter().map(|&(l, w)| (q(l, 4), q(l + w, 4))).collect();
        IntervalSet::from_closed(&pairs).unwrap()
    })
}

proptest! {
    #[test]
    fn measure_is_additive(a in arb_set(), b in arb_set()) {
        prop_assert_eq!(a.union(&b).measure() + a.intersect(&b).measure(), a.measure() + b.measure());
        let w = window(q(-20, 1), q(20, 1));
        let c = a.complement_in(&w);
        prop_assert!(a.intersect(&c).is_empty());
        prop_assert_eq!(c.measure() + a.measure(), q(40, 1));
    }

    #[test]
    fn fatten_grows_by_at_most_two_rho_per_piece(a in arb_set(), n in 0i64..8) {
        let rho = q(n, 8);
        let f = a.fatten(rho);
        prop_assert!(f.measure() <= a.measure() + rho * 2 * a.len() as i64);
        prop_assert!(f.intersect(&a) == a);
    }

    #[test]
    fn operations_stay_canonical(a in arb_set(), b in arb_set()) {
        for s in [a.union(&b), a.intersect(&b), a.difference(&b)] {
            for w in s.parts().windows(2) {
                prop_assert!(w[0].hi < w[1].lo || (w[0].hi == w[1].lo && !w[0].hi_closed && !w[1].lo_closed));
            }
        }
    }
}

#[test]
fn finite_spectrum_examples() {
    let w = diophantine_pair();
    let x = random_phase(&mut rng(71), 2);
    let free = finite_spectrum_set(&Potential::zero(2), &w, &x, 1).unwrap();
    let pts: Vec<f64> = free.parts().iter().map(|p| p.lo).collect();
    let s = 2f64.sqrt();
    assert_eq!(pts.len(), 3);
    for (a, b) in pts.iter().zip([-s, 0.0, s]) {
        assert!((a - b).abs() < 1e-12);
    }
    let v = Potential::two_cos(2.0);
    let set = finite_spectrum_set(&v, &w, &x, 30).unwrap();
    assert_eq!(set.len(), 61);
    assert_eq!(set.measure(), 0.0);
    let bound = 2.0 + v.sup_norm();
    assert!(set.parts().iter().all(|p| p.lo.abs() <= bound));
    let again = finite_spectrum_set(&v, &w, &x, 30).unwrap();
    let oracle = {
        let orbit = qp_spectra::operator::Orbit::new(&v, &x, &w, qp_spectra::operator::Span::centered(30)).unwrap();
        dense_eigenvalues(&orbit.hamiltonian(qp_spectra::operator::Span::centered(30)))
    };
    for (p, e) in again.parts().iter().zip(&oracle) {
        assert!((p.lo - e).abs() < 1e-10);
    }
}

fn plan(count: usize) -> SamplePlan {
    SamplePlan::new(2, count, Scheme::LowDiscrepancy).with_seed(3)
}

#[test]
fn restricted_spectrum_monotonicity() {
    let v = Potential::two_cos(5.0);
    let w = diophantine_pair();
    let base = RestrictedSpectrumSpec {
        n: 40,
        s: 2.0,
        k0: 1,
        rho: vec![1e-2, 1e-4],
        plan: plan(200),
        window: Some((-1.0, 1.0)),
        cap: SCALE_CAP,
    };
    let small = restricted_spectrum(&base, &v, &w).unwrap();
    let large = restricted_spectrum(&RestrictedSpectrumSpec { rho: vec![2e-2, 1e-3], ..base.clone() }, &v, &w).unwrap();
    assert_eq!(small.intersect(&large), small);
    assert!(small.measure() < large.measure());

    let shallow = restricted_spectrum(&RestrictedSpectrumSpec { k0: 0, rho: vec![1e-2], ..base.clone() }, &v, &w).unwrap();
    assert_eq!(small.intersect(&shallow), small);

    let fewer = restricted_spectrum(&RestrictedSpectrumSpec { plan: plan(100), ..base.clone() }, &v, &w).unwrap();
    assert_eq!(fewer.intersect(&small), fewer);

    // depth 0 is the union of fattened finite spectra
    let direct = IntervalSet::union_all(
        &qp_spectra::torus::sample_phases(&plan(20))
            .unwrap()
            .iter()
            .map(|x| finite_spectrum_set(&v, &w, x, 40).unwrap().fatten(1e-2))
            .collect::<Vec<_>>(),
    )
    .intersect(&IntervalSet::from_closed(&[(-1.0, 1.0)]).unwrap());
    let collapsed = restricted_spectrum(&RestrictedSpectrumSpec { k0: 0, rho: vec![1e-2], plan: plan(20), ..base }, &v, &w).unwrap();
    assert_eq!(collapsed.len(), direct.len());
    assert!((collapsed.measure() - direct.measure()).abs() < 1e-12);
}

#[test]
fn windowed_construction_matches_full() {
    let v = Potential::two_cos(3.0);
    let w = diophantine_pair();
    let spec = RestrictedSpectrumSpec::with_decay(20, 1.5, 2, 1.0, None, plan(6));
    let full = restricted_spectrum(&spec, &v, &w).unwrap();
    let win = IntervalSet::from_closed(&[(-1.0, 1.0)]).unwrap();
    let part = restricted_spectrum(&spec.clone().with_window((-1.0, 1.0)), &v, &w).unwrap();
    assert_eq!(full.intersect(&win), part);
}

#[test]
fn set_against_itself() {
    let a = IntervalSet::from_closed(&[(0.0, 0.1), (0.5, 0.7)]).unwrap();
    assert_eq!(compare_sets(&a, &a, (-1.0, 1.0)).unwrap(), (0.0, 0.0));
}

#[test]
fn scale_cap_is_enforced() {
    let spec = RestrictedSpectrumSpec::reference(80, 2.0, plan(1));
    assert!(restricted_spectrum(&spec, &Potential::two_cos(5.0), &diophantine_pair()).is_err());
}

#[test]
fn homogeneity_examples() {
    let full = IntervalSet::from_closed(&[(-10.0, 10.0)]).unwrap();
    let p = homogeneity_profile(&full, (-1.0, 1.0), &[0.1, 0.01], 5).unwrap();
    assert!(p.min_ratio.iter().all(|&(_, m)| (m - 2.0).abs() < 1e-12));
    assert!(p.holds());
    let point = IntervalSet::from_points(&[0.3]);
    let p = homogeneity_profile(&point, (-1.0, 1.0), &[0.1], 5).unwrap();
    assert_eq!(p.min_ratio, vec![(0.1, 0.0)]);
    assert!(!p.holds());
}

#[test]
fn reference_comparison_is_consistent() {
    let v = Potential::two_cos(5.0);
    let w = diophantine_pair();
    let rep = compare_with_reference(&v, &w, 20, 1.25, 1, None, (-1.0, 1.0), &plan(50), &plan(200)).unwrap();
    assert!(rep.gamma > 1.0);
    assert!(rep.excess >= 0.0 && rep.inclusion_defect >= 0.0);
    assert!(rep.inclusion_defect <= rep.reference_measure);
}
