use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use thetaforge::cohomology::RingElement;
use thetaforge::exactmath::{Monomial, Rational, Rationals, TruncSeries, Truncation};
use thetaforge::geometry::{build_p1_bundle, load_builtin, CurveClass};
use thetaforge::mirror::{compute_g, g_negated, GSeries, MirrorMap};
use thetaforge::wdvv::{check_wdvv_identity, propagate_table, Mode, Seeds};

type Terms = Vec<((u32, u32), i64, i64)>;

fn q(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn terms(max_len: usize) -> impl Strategy<Value = Terms> {
    prop::collection::vec(((0u32..=4, 0u32..=4), -9i64..=9, 1i64..=5), 0..max_len)
}

fn series(t: &Terms, order: u32) -> TruncSeries<Rationals> {
    TruncSeries::from_terms(
        Rationals,
        Truncation::total_degree(2, order),
        t.iter().map(|((a, b), n, d)| (Monomial::novikov(vec![*a, *b]), q(*n, *d))),
    )
    .unwrap()
}

fn without_constant(t: &Terms) -> Terms {
    t.iter().filter(|((a, b), _, _)| a + b > 0).cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mul_commutes(a in terms(8), b in terms(8)) {
        let (a, b) = (series(&a, 4), series(&b, 4));
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
    }

    #[test]
    fn mul_associates(a in terms(6), b in terms(6), c in terms(6)) {
        let (a, b, c) = (series(&a, 4), series(&b, 4), series(&c, 4));
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn mul_distributes(a in terms(6), b in terms(6), c in terms(6)) {
        let (a, b, c) = (series(&a, 3), series(&b, 3), series(&c, 3));
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn inverse_of_unit(t in terms(8), lead in 1i64..=7) {
        let mut t = without_constant(&t);
        t.push(((0, 0), lead, 2));
        let a = series(&t, 4);
        let one = TruncSeries::one(Rationals, a.truncation().clone());
        prop_assert_eq!(a.inverse().unwrap().mul(&a).unwrap(), one);
    }

    #[test]
    fn truncation_commutes_with_mul(a in terms(8), b in terms(8), low in 0u32..4) {
        // truncating before or after multiplying gives the same low-order part
        let (a, b) = (series(&a, 4), series(&b, 4));
        let t = Truncation::total_degree(2, low);
        let after = a.mul(&b).unwrap().truncate_to(&t).unwrap();
        let before = a.truncate_to(&t).unwrap().mul(&b.truncate_to(&t).unwrap()).unwrap();
        prop_assert_eq!(after, before);
    }

    #[test]
    fn exp_is_a_homomorphism(a in terms(6), b in terms(6)) {
        let (a, b) = (series(&without_constant(&a), 4), series(&without_constant(&b), 4));
        let lhs = a.add(&b).unwrap().exp().unwrap();
        let rhs = a.exp().unwrap().mul(&b.exp().unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn mirror_map_round_trips(t in terms(6), w0 in 0i64..4, w1 in 0i64..4) {
        let c = series(&without_constant(&t), 4);
        let m = MirrorMap::from_correction(&c, &[w0, w1]).unwrap();
        prop_assert!(m.verify_round_trip().is_ok());
    }

    #[test]
    fn ring_products_commute(i in 0usize..6, j in 0usize..6, k in 0usize..6) {
        let x = Arc::new(load_builtin("p2").unwrap());
        let p = build_p1_bundle(&x).unwrap();
        let ring = p.ring().ring();
        let (a, b, c) = (RingElement::basis(ring, i), RingElement::basis(ring, j), RingElement::basis(ring, k));
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn strict_propagation_is_linear(seeds in prop::collection::vec((-20i64..=20, 1i64..=6), 4), lambda in -5i64..=5) {
        let x = load_builtin("p2").unwrap();
        let seeds: Seeds = seeds
            .iter()
            .enumerate()
            .map(|(d, (n, den))| (CurveClass::new(vec![d as i64 + 1]), q(*n, *den)))
            .collect();
        let l = q(lambda, 1);
        let scaled: Seeds = seeds.iter().map(|(b, v)| (b.clone(), v * &l)).collect();
        let t = propagate_table(&x, &seeds, 4, Mode::Strict).unwrap();
        let ts = propagate_table(&x, &scaled, 4, Mode::Strict).unwrap();
        prop_assert_eq!(ts, t.scaled(&l));
        prop_assert!(check_wdvv_identity(&t, &x, 4).passed());
    }

    #[test]
    fn formal_propagation_satisfies_its_equations(seeds in prop::collection::vec((-20i64..=20, 1i64..=6), 3)) {
        let x = load_builtin("p2").unwrap();
        let seeds: Seeds = seeds
            .iter()
            .enumerate()
            .map(|(d, (n, den))| (CurveClass::new(vec![d as i64 + 1]), q(*n, *den)))
            .collect();
        let t = propagate_table(&x, &seeds, 3, Mode::Formal).unwrap();
        prop_assert!(check_wdvv_identity(&t, &x, 3).passed());
    }
}

#[test]
fn g_negation_is_an_involution() {
    for name in ["p2", "p1xp1"] {
        let x = Arc::new(load_builtin(name).unwrap());
        let g = compute_g(&x, 4).unwrap();
        let once = GSeries { series: g_negated(&g), ..g.clone() };
        assert_eq!(g_negated(&once), g.series);
    }
}
