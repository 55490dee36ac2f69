use std::path::PathBuf;
use std::time::{Duration, Instant};

use torusconj::pipeline::{conj_ung, verify_witness, Answer, ConjugacyVerdict, JsjInput, TorusInput, WitnessFile, DEFAULT_MAX_EDGES};

fn data(kind: &str, name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", kind, &format!("{name}.txt")].iter().collect();
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn instances() -> Vec<(String, String, String, Answer)> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/corpus.txt")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            let answer = match f[3] {
                "conjugate" => Answer::Conjugate,
                "not-conjugate" => Answer::NotConjugate,
                other => panic!("bad expectation {other}"),
            };
            (f[0].to_string(), f[1].to_string(), f[2].to_string(), answer)
        })
        .collect()
}

fn run(alpha: &str, beta: &str) -> (ConjugacyVerdict, Option<WitnessFile>) {
    let (ta, tb) = (TorusInput::parse(&data("tori", alpha)).unwrap(), TorusInput::parse(&data("tori", beta)).unwrap());
    let (ja, jb) = (JsjInput::parse(&data("jsj", alpha)).unwrap(), JsjInput::parse(&data("jsj", beta)).unwrap());
    let v = conj_ung(&ta, &tb, &ja, &jb, None, DEFAULT_MAX_EDGES).unwrap();
    let f = WitnessFile::for_conjugacy(&v, &ta, &tb, &ja, &jb);
    (v, f)
}

#[test]
fn corpus_is_decided_correctly_in_both_orders() {
    let list = instances();
    assert!(list.len() >= 10);
    for (name, alpha, beta, expected) in list {
        for (x, y) in [(&alpha, &beta), (&beta, &alpha)] {
            let start = Instant::now();
            let (v, f) = run(x, y);
            assert!(start.elapsed() < Duration::from_secs(60), "{name} too slow");
            assert_eq!(v.answer, expected, "{name} ({x} vs {y})");
            if expected == Answer::Conjugate {
                let f = f.expect("positive verdicts carry a witness");
                let back = WitnessFile::from_json(&f.to_json()).unwrap();
                let r = verify_witness(&back).unwrap();
                assert!(r.stable_checked, "{name}");
            } else {
                assert!(f.is_none());
            }
        }
    }
}

#[test]
fn single_vertex_instances_recover_theta() {
    for (alpha, beta) in [("id2", "ad_a2"), ("ad_ab2", "ad_ba2"), ("id3", "ad_abc3"), ("id1", "id1")] {
        let (v, f) = run(alpha, beta);
        assert!(v.theta.is_some(), "{alpha} vs {beta}");
        assert!(verify_witness(&f.unwrap()).unwrap().conjugacy_checked);
    }
}

#[test]
fn tampered_witness_is_rejected() {
    let (_, f) = run("tv2", "tv2_swapped");
    let mut f = f.unwrap();
    let first = f.morphism.conjugators.keys().next().unwrap().clone();
    f.morphism.conjugators.insert(first, "t".into());
    assert!(verify_witness(&f).is_err());
    let (_, g) = run("id2", "ad_a2");
    let mut g = g.unwrap();
    g.torus_b = Some(data("tori", "tv2"));
    assert!(verify_witness(&g).is_err());
}
