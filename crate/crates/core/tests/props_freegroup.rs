use proptest::prelude::*;
use torusconj::freegroup::{congruence_kernel, fold, nielsen_generators, Ambient, FreeAut, SubgroupGraph, Word, DEFAULT_STATE_BUDGET};
use torusconj::whitehead::{minimize, same_orbit, Marking};

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..rank, any::<bool>()), 0..=max_len).prop_map(|v| {
        Word::from_ints(&v.into_iter().map(|(g, s)| if s { -(g as i32 + 1) } else { g as i32 + 1 }).collect::<Vec<_>>())
    })
}

fn nielsen_product(rank: usize, max: usize) -> impl Strategy<Value = FreeAut> {
    let count = nielsen_generators(rank).len();
    prop::collection::vec((0..count, any::<bool>()), 0..=max).prop_map(move |v| {
        let gens = nielsen_generators(rank);
        v.into_iter().fold(FreeAut::identity(rank), |acc, (i, inv)| {
            let g = if inv { gens[i].inverse() } else { gens[i].clone() };
            g.compose(&acc)
        })
    })
}

fn marking(rank: usize) -> impl Strategy<Value = Marking> {
    prop::collection::vec(prop::collection::vec(word(rank, 5), 1..=2), 1..=2).prop_map(move |t| Marking::new(rank, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reduction_is_idempotent(w in word(3, 20)) {
        prop_assert_eq!(Word::from_letters(w.letters().iter().copied()), w.clone());
        for pair in w.letters().windows(2) {
            prop_assert_ne!(pair[0], pair[1].inverse());
        }
    }

    #[test]
    fn conjugacy_witness(u in word(3, 10), g in word(3, 8)) {
        let v = u.conjugate_by(&g);
        let w = u.conjugator_to(&v).expect("conjugate");
        prop_assert_eq!(u.conjugate_by(&w), v);
    }

    #[test]
    fn fold_is_order_independent(gens in prop::collection::vec(word(2, 6), 1..4)) {
        let a = fold(2, &gens).unwrap();
        let mut rev = gens.clone();
        rev.reverse();
        let b = fold(2, &rev).unwrap();
        prop_assert!(a.same_subgroup(&b));
        for g in &gens {
            prop_assert!(a.contains(g));
        }
    }

    #[test]
    fn fold_generators_generate(gens in prop::collection::vec(word(3, 6), 1..4)) {
        let a = fold(3, &gens).unwrap();
        let basis = a.generators();
        if !basis.is_empty() {
            prop_assert!(fold(3, &basis).unwrap().same_subgroup(&a));
        }
    }

    #[test]
    fn aut_round_trip(phi in nielsen_product(3, 6)) {
        let rebuilt = FreeAut::from_images(phi.images().to_vec()).unwrap();
        for g in 0..3 {
            let x = Word::gen(g);
            prop_assert_eq!(rebuilt.apply_inverse(&rebuilt.apply(&x)), x.clone());
            prop_assert_eq!(rebuilt.apply(&rebuilt.apply_inverse(&x)), x);
        }
    }

    #[test]
    fn inner_test_is_exact(g in word(3, 8), phi in nielsen_product(3, 3)) {
        let ad = FreeAut::inner(3, &g);
        let found = ad.inner_conjugator().expect("inner");
        prop_assert_eq!(FreeAut::inner(3, &found), ad);
        let conj = phi.inverse().compose(&FreeAut::inner(3, &g).compose(&phi));
        prop_assert!(conj.is_inner());
    }

    #[test]
    fn subgroup_conjugator(gens in prop::collection::vec(word(2, 5), 1..3), a in word(2, 6)) {
        let h = fold(2, &gens).unwrap();
        let k = h.conjugate(&a);
        let c = h.conjugator_to(&k).expect("conjugate subgroups");
        prop_assert!(h.conjugate(&c).same_subgroup(&k));
    }

    #[test]
    fn minimize_descends(m in marking(2)) {
        let (min, moves) = minimize(&m);
        let mut cur = m.clone();
        for mv in &moves {
            let next = cur.apply(&mv.to_aut(2));
            prop_assert!(next.total_length() < cur.total_length());
            cur = next;
        }
        prop_assert_eq!(cur, min);
    }

    #[test]
    fn orbit_reflexive_and_witnessed(m in marking(2), phi in nielsen_product(2, 5)) {
        prop_assert!(same_orbit(&m, &m).is_some());
        let image = m.apply(&phi);
        let w = same_orbit(&m, &image).expect("same orbit");
        prop_assert_eq!(m.apply(&w), image.clone());
        let back = same_orbit(&image, &m).expect("symmetric");
        prop_assert_eq!(image.apply(&back), m);
    }

    #[test]
    fn orbit_rank_three(m in prop::collection::vec(word(3, 4), 1..=2), phi in nielsen_product(3, 4)) {
        let m = Marking::of_classes(3, &m);
        let image = m.apply(&phi);
        let w = same_orbit(&m, &image).expect("same orbit");
        prop_assert_eq!(m.apply(&w), image);
    }
}

fn surjection_kernels_contain(kernel: &SubgroupGraph, perms: &[Vec<Vec<usize>>]) -> bool {
    // every element of the kernel acts trivially in each permutation image
    perms.iter().all(|p| {
        kernel.generators().iter().all(|w| {
            let n = p[0].len();
            (0..n).all(|start| {
                w.letters().iter().fold(start, |s, l| if l.inv { p[l.gen].iter().position(|&t| t == s).unwrap() } else { p[l.gen][s] }) == start
            })
        })
    })
}

#[test]
fn congruence_kernel_in_small_quotients() {
    let z2 = vec![vec![1, 0]];
    let id2 = vec![0, 1];
    let z3 = vec![1, 2, 0];
    let id3 = vec![0, 1, 2];
    let s3_a = vec![1, 0, 2];
    let s3_b = vec![1, 2, 0];
    let k2 = congruence_kernel(Ambient::Free(2), 2, DEFAULT_STATE_BUDGET).unwrap();
    let k3 = congruence_kernel(Ambient::Free(2), 3, DEFAULT_STATE_BUDGET).unwrap();
    let z2_maps = vec![vec![z2[0].clone(), id2.clone()], vec![id2.clone(), z2[0].clone()], vec![z2[0].clone(), z2[0].clone()]];
    assert!(surjection_kernels_contain(&k2, &z2_maps));
    assert!(surjection_kernels_contain(&k3, &z2_maps));
    let z3_maps = vec![vec![z3.clone(), id3.clone()], vec![id3.clone(), z3.clone()], vec![z3.clone(), z3.clone()]];
    assert!(surjection_kernels_contain(&k3, &z3_maps));
    let s3_maps = vec![vec![s3_a.clone(), s3_b.clone()], vec![s3_b.clone(), s3_a.clone()]];
    assert!(surjection_kernels_contain(&k3, &s3_maps));
}
