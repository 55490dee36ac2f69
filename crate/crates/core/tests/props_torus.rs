use proptest::prelude::*;
use torusconj::freegroup::{fold, nielsen_generators, FreeAut, FreeGroup, Word};
use torusconj::torus::{MappingTorus, TorusElement};

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..rank, any::<bool>()), 0..=max_len).prop_map(|v| {
        Word::from_ints(&v.into_iter().map(|(g, s)| if s { -(g as i32 + 1) } else { g as i32 + 1 }).collect::<Vec<_>>())
    })
}

fn aut(rank: usize, max: usize) -> impl Strategy<Value = FreeAut> {
    let count = nielsen_generators(rank).len();
    prop::collection::vec(0..count, 0..=max).prop_map(move |v| {
        let gens = nielsen_generators(rank);
        v.into_iter().fold(FreeAut::identity(rank), |acc, i| gens[i].compose(&acc))
    })
}

fn element(rank: usize) -> impl Strategy<Value = TorusElement> {
    (-3i64..=3, word(rank, 5)).prop_map(|(k, w)| TorusElement::new(k, w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn multiplication_is_associative(a in aut(2, 4), x in element(2), y in element(2), z in element(2)) {
        let t = MappingTorus::new(FreeGroup::new(2), a).unwrap();
        prop_assert_eq!(t.multiply(&t.multiply(&x, &y), &z), t.multiply(&x, &t.multiply(&y, &z)));
        prop_assert_eq!(t.orientation_degree(&t.multiply(&x, &y)), t.orientation_degree(&x) + t.orientation_degree(&y));
        prop_assert!(t.multiply(&x, &t.inverse(&x)).is_identity());
    }

    #[test]
    fn stable_letter_conjugates_by_the_monodromy(a in aut(3, 5)) {
        let t = MappingTorus::new(FreeGroup::new(3), a.clone()).unwrap();
        for i in 0..3 {
            let x = TorusElement::fiber(Word::gen(i));
            prop_assert_eq!(t.conjugate(&x, &t.stable_letter()), TorusElement::fiber(a.apply(&Word::gen(i))));
        }
    }

    #[test]
    fn identity_monodromy_has_period_one(gens in prop::collection::vec(word(2, 5), 1..3)) {
        let t = MappingTorus::new(FreeGroup::new(2), FreeAut::identity(2)).unwrap();
        let h = fold(2, &gens).unwrap();
        let s = t.sub_mapping_torus(&h, 4).unwrap();
        prop_assert_eq!(s.period, 1);
        prop_assert!(s.corrector.is_identity());
    }

    #[test]
    fn product_form_center_is_central(g in word(3, 6)) {
        let t = MappingTorus::new(FreeGroup::new(3), FreeAut::inner(3, &g)).unwrap();
        let p = t.product_form().expect("inner monodromy");
        prop_assert_eq!(t.orientation_degree(&p.center), 1);
        for i in 0..3 {
            let x = TorusElement::fiber(Word::gen(i));
            prop_assert_eq!(t.multiply(&p.center, &x), t.multiply(&x, &p.center));
        }
    }
}
