use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use spherecheck::areafeas::{area_of, feasible, reduced_basis_system, Row};
use spherecheck::config_search::{fano_incidence, reference_families};
use spherecheck::cyclotomic::{cos, sin, CycNumber};
use spherecheck::lattice::{adjunction_genus, canonical_tuple, dot, reflect_cremona, reflect_exceptional};
use spherecheck::HClass;

fn class(max_n: usize) -> impl Strategy<Value = HClass> {
    (1..=max_n).prop_flat_map(|n| (-12i64..=12, prop::collection::vec(-8i64..=8, n))).prop_map(|(a, b)| HClass::new(a, b))
}

fn class_pair() -> impl Strategy<Value = (HClass, HClass)> {
    (3usize..=12).prop_flat_map(|n| {
        let one = (-10i64..=10, prop::collection::vec(-6i64..=6, n)).prop_map(|(a, b)| HClass::new(a, b));
        (one.clone(), one)
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn triple(n: usize) -> impl Strategy<Value = (usize, usize, usize)> {
    Just((1..=n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| (v[0], v[1], v[2]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn exceptional_reflection_is_an_involutive_isometry((x, y) in class_pair(), k in 1usize..=12) {
        let k = (k - 1) % x.n() + 1;
        let rx = reflect_exceptional(&x, k).unwrap();
        let ry = reflect_exceptional(&y, k).unwrap();
        prop_assert_eq!(reflect_exceptional(&rx, k).unwrap(), x.clone());
        prop_assert_eq!(dot(&rx, &ry), dot(&x, &y));
        prop_assert_eq!(rx.k_dot() - x.k_dot(), 2 * rx.b[k - 1]);
    }

    #[test]
    fn cremona_reflection_is_an_involutive_isometry(((x, y), t) in class_pair().prop_flat_map(|p| { let n = p.0.n(); (Just(p), triple(n)) })) {
        let (i, j, k) = t;
        let rx = reflect_cremona(&x, i, j, k).unwrap();
        let ry = reflect_cremona(&y, i, j, k).unwrap();
        prop_assert_eq!(reflect_cremona(&rx, i, j, k).unwrap(), x.clone());
        prop_assert_eq!(dot(&rx, &ry), dot(&x, &y));
        prop_assert_eq!(rx.k_dot(), x.k_dot());
        prop_assert_eq!(adjunction_genus(&rx), adjunction_genus(&x));
    }

    #[test]
    fn genus_is_permutation_invariant((x, perm) in class(13).prop_flat_map(|x| { let n = x.n(); (Just(x), permutation(n)) })) {
        let y = x.permuted(&perm);
        prop_assert_eq!(y.square(), x.square());
        prop_assert_eq!(y.k_dot(), x.k_dot());
        prop_assert_eq!(adjunction_genus(&y), adjunction_genus(&x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn area_witnesses_are_sound_and_scale((n, classes) in (2usize..=8).prop_flat_map(|n| (Just(n), prop::collection::vec((-4i64..=4, prop::collection::vec(-3i64..=3, n)), 1..4))), num in 1i64..20, den in 1i64..20) {
        let classes: Vec<HClass> = classes.into_iter().map(|(a, b)| HClass::new(a, b)).collect();
        let rows: Vec<Row> = classes.iter().map(|c| Row::gt(area_of(c), "positive")).collect();
        let sys = reduced_basis_system(n).with(&rows);
        if let Some(w) = feasible(&sys).witness() {
            prop_assert!(sys.satisfied_by(w));
            let s = BigRational::new(BigInt::from(num), BigInt::from(den));
            let scaled = w.iter().map(|(v, x)| (*v, x * &s)).collect();
            prop_assert!(sys.satisfied_by(&scaled));
        }
        let c = &classes[0];
        let opposite = reduced_basis_system(n).with(&[Row::gt(area_of(c), "A"), Row::gt(area_of(&c.scale(-1)), "-A")]);
        prop_assert!(!feasible(&opposite).is_feasible());
    }

    #[test]
    fn fano_reading_survives_relabeling(perm in permutation(9), which in 0usize..2) {
        let fams = reference_families();
        let tuple = &fams[which].1;
        let moved: Vec<HClass> = tuple.iter().map(|c| c.permuted(&perm)).collect();
        prop_assert_eq!(canonical_tuple(&moved), canonical_tuple(tuple));
        let before = fano_incidence(tuple).map(|s| s.is_fano).unwrap_or(false);
        let after = fano_incidence(&moved).map(|s| s.is_fano).unwrap_or(false);
        prop_assert_eq!(before, after);
    }

    #[test]
    fn pythagoras_holds_exactly(k in -40i64..40, m in 1u32..=24) {
        let c = cos(k, m);
        let s = sin(k, m);
        prop_assert_eq!(&(&c * &c) + &(&s * &s), CycNumber::one());
    }
}
