mod common;

use std::collections::HashSet;

use common::{jsj, JSJ_NAMES};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torusconj::gog::{small_modular_generators, GoGMorphism};
use torusconj::pipeline::{assemble, decide, fiber_correct, Status, WhiteList, DEFAULT_MAX_EDGES};

/// Fixture pairs on which assembly runs; a cyclic black vertex has no
/// product splitting and is rejected.
fn pairs() -> Vec<(&'static str, &'static str)> {
    let mut out = Vec::new();
    for a in JSJ_NAMES {
        for b in JSJ_NAMES {
            let (x, y) = (jsj(a), jsj(b));
            if assemble(&x, &y, &WhiteList::identities(&x, &y), DEFAULT_MAX_EDGES).is_ok() {
                out.push((a, b));
            }
        }
    }
    out
}

#[test]
fn positive_verdicts_revalidate() {
    let mut positives = 0;
    for (x, y) in pairs() {
        let (a, b) = (jsj(x), jsj(y));
        let v = decide(&a, &b, &WhiteList::identities(&a, &b), DEFAULT_MAX_EDGES).unwrap();
        if v.status != Status::IsomorphicFop {
            continue;
        }
        positives += 1;
        let w = v.witness.unwrap();
        w.morphism.validate(&a.gog, &b.gog).unwrap();
        for (h, img) in a.fiber.iter().zip(&w.fiber_images) {
            assert_eq!(w.morphism.apply(&a.gog, &b.gog, h).unwrap().reduce(&b.gog), *img);
            assert_eq!(b.orientation.eval(&b.gog, img), 0, "{x} {y}");
        }
        if let (Some(s), Some(img)) = (&a.stable, &w.stable_image) {
            assert_eq!(w.morphism.apply(&a.gog, &b.gog, s).unwrap().reduce(&b.gog), *img);
            assert_eq!(b.orientation.eval(&b.gog, img), 1, "{x} {y}");
        }
    }
    assert!(positives >= JSJ_NAMES.len() - 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn candidate_order_does_not_change_assembly(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let all = pairs();
        let (x, y) = all[pick.index(all.len())];
        let (a, b) = (jsj(x), jsj(y));
        let wl = WhiteList::identities(&a, &b);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = wl.clone();
        for cs in &mut shuffled.candidates {
            let extra: Vec<_> = cs.iter().filter(|_| rng.gen()).cloned().collect();
            cs.extend(extra);
            cs.shuffle(&mut rng);
        }
        let before: HashSet<GoGMorphism> = assemble(&a, &b, &wl, DEFAULT_MAX_EDGES).unwrap().into_iter().collect();
        let after: HashSet<GoGMorphism> = assemble(&a, &b, &shuffled, DEFAULT_MAX_EDGES).unwrap().into_iter().collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn enlarging_candidates_keeps_positive_verdicts(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let all = pairs();
        let (x, y) = all[pick.index(all.len())];
        let (a, b) = (jsj(x), jsj(y));
        let o = assemble(&a, &b, &WhiteList::identities(&a, &b), DEFAULT_MAX_EDGES).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sub: Vec<GoGMorphism> = o.iter().filter(|_| rng.gen()).cloned().collect();
        let mut sup = o.clone();
        for s in small_modular_generators(&b.gog) {
            if let Some(m) = o.choose(&mut rng) {
                sup.push(s.to_morphism(&b.gog).compose(m, &a.gog).unwrap());
            }
        }
        sup.shuffle(&mut rng);
        let small = fiber_correct(&sub, &a, &b).unwrap().status;
        for bigger in [&o, &sup] {
            if small == Status::IsomorphicFop {
                prop_assert_eq!(fiber_correct(bigger, &a, &b).unwrap().status, Status::IsomorphicFop);
            }
        }
    }
}
