#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use torusconj::gog::{coset_reps_delta0, extend_identically, small_modular_generators, BassWord, Elem, GoGMorphism, GraphOfGroups, Slot};
use torusconj::pipeline::JsjInput;

pub const TRIANGLE: &str = "
[vertices]
u: F a1 b1
v: F a2 b2
w: F a3 b3
[edges]
e1: u -> v Z
e2: v -> w Z
e3: w -> u Z
[injections]
e1: a2
~e1: b1
e2: a3
~e2: b2
e3: a1
~e3: b3
";

pub const LOOP: &str = "
[vertices]
v: F a b
[edges]
e: v -> v Z
[injections]
e: a
~e: b a b'
";

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(rel)
}

pub fn jsj(name: &str) -> JsjInput {
    JsjInput::parse(&std::fs::read_to_string(data(&format!("jsj/{name}.txt"))).unwrap()).unwrap()
}

/// Names of the JSJ fixtures.
pub const JSJ_NAMES: [&str; 12] = ["id1", "inv1", "id2", "ad_a2", "ad_ab2", "ad_ba2", "tv2", "tv2_swapped", "swap2", "id3", "ad_abc3", "tv3"];

pub fn random_elem(rng: &mut impl Rng, slot: Slot, len: usize) -> Elem {
    let gens = slot.gens();
    let mut x = Elem::identity();
    if gens.is_empty() {
        return x;
    }
    for _ in 0..rng.gen_range(0..=len) {
        let g = &gens[rng.gen_range(0..gens.len())];
        x = x.mul(&if rng.gen() { g.clone() } else { g.inverse() });
    }
    x
}

/// A random closed Bass path at vertex 0.
pub fn random_loop(rng: &mut impl Rng, gog: &GraphOfGroups, steps: usize) -> BassWord {
    let g = &gog.graph;
    let mut w = BassWord::vertex_elem(0, random_elem(rng, gog.vertex_slot(0), 3));
    let mut v = 0;
    for _ in 0..rng.gen_range(0..=steps) {
        let star = g.star(v);
        if star.is_empty() {
            break;
        }
        let e = star[rng.gen_range(0..star.len())];
        v = g.term(e);
        w = w.mul(gog, &BassWord::edge(gog, e)).unwrap();
        w = w.mul(gog, &BassWord::vertex_elem(v, random_elem(rng, gog.vertex_slot(v), 3))).unwrap();
    }
    let back = tree_path(gog, v);
    w.mul(gog, &back).unwrap()
}

/// A tree path from `v` to vertex 0.
fn tree_path(gog: &GraphOfGroups, v: usize) -> BassWord {
    let paths = torusconj::fibercorrect::tree_paths(gog);
    let mut w = BassWord::trivial(0);
    for &e in &paths[v] {
        w = w.mul(gog, &BassWord::edge(gog, e)).unwrap();
    }
    w.inverse(gog)
}

/// Automorphisms to draw from: Dehn twists with their inverses and the
/// graph symmetries that extend identically.
pub fn generators(gog: &GraphOfGroups) -> Vec<GoGMorphism> {
    let mut out = Vec::new();
    for s in small_modular_generators(gog) {
        let m = s.to_morphism(gog);
        out.push(m.inverse(gog, gog).unwrap());
        out.push(m);
    }
    for (_, m) in coset_reps_delta0(gog, gog, 12, &mut |m| Ok(extend_identically(gog, gog, m))).unwrap() {
        out.push(m);
    }
    out
}

pub fn random_automorphism(rng: &mut impl Rng, gog: &GraphOfGroups, gens: &[GoGMorphism], len: usize) -> GoGMorphism {
    let mut m = GoGMorphism::identity(gog);
    for _ in 0..rng.gen_range(0..=len) {
        m = gens[rng.gen_range(0..gens.len())].compose(&m, gog).unwrap();
    }
    m
}

/// Whether `A x = b` has a solution with every `|x_i| ≤ bound`, splitting
/// the unknowns in two halves and matching partial sums.
pub fn box_solvable(a: &[Vec<i64>], b: &[i64], cols: usize, bound: i64) -> Option<Vec<i64>> {
    fn points(k: usize, bound: i64) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for _ in 0..k {
            out = out.into_iter().flat_map(|p| (-bound..=bound).map(move |x| [p.clone(), vec![x]].concat())).collect();
        }
        out
    }
    let half = cols / 2;
    let partial = |x: &[i64], off: usize| -> Vec<i64> { a.iter().map(|r| x.iter().enumerate().map(|(j, v)| r[off + j] * v).sum()).collect() };
    let mut left = std::collections::HashMap::new();
    for x in points(half, bound) {
        left.entry(partial(&x, 0)).or_insert(x);
    }
    for y in points(cols - half, bound) {
        let rest: Vec<i64> = b.iter().zip(partial(&y, half)).map(|(p, q)| p - q).collect();
        if let Some(x) = left.get(&rest) {
            return Some([x.clone(), y].concat());
        }
    }
    None
}

pub fn random_system(rng: &mut impl Rng) -> (Vec<Vec<i64>>, Vec<i64>, usize) {
    let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
    let a: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-4..=4)).collect()).collect();
    let b = if rng.gen() {
        let x: Vec<i64> = (0..c).map(|_| rng.gen_range(-3..=3)).collect();
        a.iter().map(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum()).collect()
    } else {
        (0..r).map(|_| rng.gen_range(-6..=6)).collect()
    };
    (a, b, c)
}
