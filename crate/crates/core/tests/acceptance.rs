mod common;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{box_solvable, data, generators, jsj, random_automorphism, random_loop, random_system, JSJ_NAMES, TRIANGLE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torusconj::fibercorrect::{solve, transvection_matrix, DiophantineSystem};
use torusconj::freegroup::{congruence_kernel, fold, nielsen_generators, Ambient, FreeAut, SubgroupGraph, Word, DEFAULT_STATE_BUDGET};
use torusconj::gog::{pi1_presentation, small_modular_generators, GraphOfGroups, SmallModularElement};
use torusconj::intlin::Matrix;
use torusconj::minkowski::{certify, certify_free_abelian, culler_reps, Budgets, FiniteQuotient, RealizingGraph};
use torusconj::pipeline::{conj_ung, verify_witness, Answer, JsjInput, TorusInput, WitnessFile, DEFAULT_MAX_EDGES};
use torusconj::whitehead::{same_orbit, whitehead_moves, Marking};
use torusconj::BigInt;

const SEED: u64 = 20261018;
const WHITEHEAD_MAX_LENGTH: usize = 6;
const WHITEHEAD_MAX_MOVES: usize = 8;
const WHITEHEAD_TIME: Duration = Duration::from_secs(300);
const CLOSURE_TRIALS: usize = 1000;
const TRANSVECTION_TRIALS: usize = 200;
const SOLVER_TRIALS: usize = 1000;
const SOLVER_BOX: i64 = 10;
const GL2_ENTRY_BOUND: i64 = 3;
const CERTIFY_TIME: Duration = Duration::from_secs(600);
const INSTANCE_TIME: Duration = Duration::from_secs(60);

struct Report(Vec<(&'static str, bool, String)>);

impl Report {
    fn record(&mut self, name: &'static str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.0.push((name, ok, detail));
    }
}

// Whitehead orbits against breadth-first search.

fn reduced_words(rank: usize, max: usize) -> Vec<Word> {
    let mut layer = vec![Vec::<i32>::new()];
    let mut all = Vec::new();
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for g in 1..=rank as i32 {
                for l in [g, -g] {
                    if w.last() != Some(&-l) {
                        let mut v = w.clone();
                        v.push(l);
                        all.push(Word::from_ints(&v));
                        next.push(v);
                    }
                }
            }
        }
        layer = next;
    }
    all
}

/// Canonical markings of total length at most `max`: one class, two
/// classes, and one pair up to simultaneous conjugation.
fn marking_universe(max: usize) -> Vec<Marking> {
    let words = reduced_words(2, max);
    let mut out = BTreeSet::new();
    for w in &words {
        out.insert(Marking::of_classes(2, std::slice::from_ref(w)));
        for v in words.iter().filter(|v| v.len() + w.len() <= max) {
            out.insert(Marking::of_classes(2, &[w.clone(), v.clone()]));
            out.insert(Marking::new(2, vec![vec![w.clone(), v.clone()]]));
        }
    }
    out.into_iter().filter(|m| m.total_length() <= max).collect()
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; adj.len()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(x) = q.pop_front() {
        for &y in &adj[x] {
            if d[y] == usize::MAX {
                d[y] = d[x] + 1;
                q.push_back(y);
            }
        }
    }
    d
}

fn whitehead_oracle(r: &mut Report) {
    let start = Instant::now();
    let universe = marking_universe(WHITEHEAD_MAX_LENGTH);
    let index: HashMap<&Marking, usize> = universe.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let moves: Vec<FreeAut> = whitehead_moves(2).iter().map(|m| m.to_aut(2)).collect();
    let adj: Vec<Vec<usize>> = universe.iter().map(|m| moves.iter().filter_map(|a| index.get(&m.apply(a)).copied()).collect()).collect();

    // A center of each component: a vertex of least eccentricity.
    let mut center = vec![usize::MAX; universe.len()];
    let mut dist_to_center = vec![usize::MAX; universe.len()];
    let mut centers = Vec::new();
    for s in 0..universe.len() {
        if center[s] != usize::MAX {
            continue;
        }
        let comp: Vec<usize> = bfs(&adj, s).iter().enumerate().filter(|(_, &d)| d != usize::MAX).map(|(i, _)| i).collect();
        let (c, dc) = comp.iter().map(|&c| (c, bfs(&adj, c))).min_by_key(|(_, d)| comp.iter().map(|&i| d[i]).max()).unwrap();
        for &i in &comp {
            center[i] = c;
            dist_to_center[i] = dc[i];
        }
        centers.push(c);
    }

    let shape = |m: &Marking| m.tuples().iter().map(Vec::len).collect::<Vec<_>>();
    let (mut pairs, mut disagree, mut unsound) = (0usize, Vec::new(), 0usize);
    let mut check = |a: usize, b: usize, oracle: bool| {
        pairs += 1;
        let got = same_orbit(&universe[a], &universe[b]);
        if let Some(phi) = &got {
            if universe[a].apply(phi) != universe[b] {
                unsound += 1;
            }
        }
        if got.is_some() != oracle {
            disagree.push((a, b));
        }
    };
    for m in 0..universe.len() {
        let oracle = dist_to_center[m] <= WHITEHEAD_MAX_MOVES;
        check(m, center[m], oracle);
        check(center[m], m, oracle);
    }
    for (i, &c) in centers.iter().enumerate() {
        for &d in &centers[i + 1..] {
            if shape(&universe[c]) == shape(&universe[d]) {
                check(c, d, false);
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = disagree.is_empty() && unsound == 0 && elapsed < WHITEHEAD_TIME;
    let example = disagree.first().map_or(String::new(), |&(a, b)| format!(", first disagreement {} vs {}", universe[a], universe[b]));
    r.record(
        "whitehead oracle equivalence",
        ok,
        format!(
            "{} markings, {} orbits, {pairs} pairs, {} disagreements, {unsound} unsound witnesses, {:.1}s{example}",
            universe.len(),
            centers.len(),
            disagree.len(),
            elapsed.as_secs_f64()
        ),
    );
}

// Graph of groups automorphisms.

fn bass_closure(r: &mut Report) {
    let gog = GraphOfGroups::parse(TRIANGLE).unwrap();
    let gens = generators(&gog);
    let symmetries = gens.iter().filter(|m| !m.map.is_identity()).count();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = 0;
    for _ in 0..CLOSURE_TRIALS {
        let a = random_automorphism(&mut rng, &gog, &gens, 5);
        let b = random_automorphism(&mut rng, &gog, &gens, 5);
        let ok = a.validate(&gog, &gog).is_ok() && b.validate(&gog, &gog).is_ok() && a.compose(&b, &gog).is_ok_and(|c| c.validate(&gog, &gog).is_ok());
        failures += !ok as usize;
    }
    r.record(
        "bass diagram closure",
        failures == 0 && symmetries > 0,
        format!("{CLOSURE_TRIALS} compositions on the triangle ({} generators, {symmetries} graph symmetries), {failures} failures", gens.len()),
    );
}

fn transvection_faithfulness(r: &mut Report) {
    let fixtures: Vec<JsjInput> = JSJ_NAMES.iter().map(|n| jsj(n)).filter(|j| !small_modular_generators(&j.gog).is_empty()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let (mut failures, mut moved) = (0, 0);
    for _ in 0..TRANSVECTION_TRIALS {
        let j = &fixtures[rng.gen_range(0..fixtures.len())];
        let (gog, o) = (&j.gog, &j.orientation);
        let twists = small_modular_generators(gog);
        let (e, z) = twists[rng.gen_range(0..twists.len())].twist().unwrap();
        let z = z.pow(rng.gen_range(-3..=3));
        let twist = SmallModularElement::dehn_twist(gog, e, z.clone());
        let w = random_loop(&mut rng, gog, 6);
        let image = twist.to_morphism(gog).induced_on_pi1(gog, gog, 0, &w).unwrap();
        let linear = o.eval(gog, &w) + w.edge_exponent(gog, e) * o.elem(gog.graph.term(e), &z);

        let pres = pi1_presentation(gog, &gog.tree).unwrap();
        let n = pres.num_gens();
        let m = transvection_matrix(&twist, gog, &pres).unwrap();
        let v = pres.word_of(gog, &w).exponent_sums(n);
        let ov = o.on_presentation(gog, &pres);
        let through_matrix: BigInt = (0..n).map(|c| BigInt::from(ov[c]) * (0..n).map(|k| BigInt::from(v[k]) * &m.row(k)[c]).sum::<BigInt>()).sum();

        let got = o.eval(gog, &image);
        moved += (got != o.eval(gog, &w)) as usize;
        failures += (got != linear || BigInt::from(got) != through_matrix) as usize;
    }
    r.record(
        "transvection faithfulness",
        failures == 0 && moved > 0,
        format!("{TRANSVECTION_TRIALS} loops and twists over {} graphs, {moved} changed degree, {failures} mismatches", fixtures.len()),
    );
}

// Integer linear systems.

fn diophantine(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let (mut solvable, mut disagree, mut bad, mut outside) = (0, 0, 0, 0);
    for _ in 0..SOLVER_TRIALS {
        let (a, b, c) = random_system(&mut rng);
        let rows = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let sys = DiophantineSystem { a: Matrix::from_rows(rows, c).unwrap(), b: b.iter().map(|&x| BigInt::from(x)).collect() };
        let got = solve(&sys);
        let boxed = box_solvable(&a, &b, c, SOLVER_BOX);
        if let Some(x) = &got {
            solvable += 1;
            bad += (sys.a.mul_vec(x) != sys.b) as usize;
            if boxed.is_none() {
                outside += 1;
            }
        }
        disagree += (got.is_none() && boxed.is_some()) as usize;
    }
    r.record(
        "diophantine solver",
        disagree == 0 && bad == 0,
        format!(
            "{SOLVER_TRIALS} systems, {solvable} solvable, {disagree} missed box solutions, {bad} bad witnesses; {outside} solvable only outside the box (substituted solutions found)"
        ),
    );
}

// Minkowski certificates.

fn mat_order(m: &[[i64; 2]; 2], bound: usize) -> Option<usize> {
    let mut p = *m;
    for k in 1..=bound {
        if p == [[1, 0], [0, 1]] {
            return Some(k);
        }
        p = [[p[0][0] * m[0][0] + p[0][1] * m[1][0], p[0][0] * m[0][1] + p[0][1] * m[1][1]], [p[1][0] * m[0][0] + p[1][1] * m[1][0], p[1][0] * m[0][1] + p[1][1] * m[1][1]]];
    }
    None
}

/// Finite-order elements of `GL_2(Z)` with entries bounded by `b`.
fn gl2_torsion(b: i64) -> Vec<([[i64; 2]; 2], usize)> {
    let mut out = Vec::new();
    for x in -b..=b {
        for y in -b..=b {
            for z in -b..=b {
                for w in -b..=b {
                    let m = [[x, y], [z, w]];
                    if (x * w - y * z).abs() == 1 {
                        if let Some(k) = mat_order(&m, 12) {
                            out.push((m, k));
                        }
                    }
                }
            }
        }
    }
    out
}

fn rank_one_and_abelian(r: &mut Report) {
    let c = certify(1, &Budgets::default()).unwrap();
    let cube = fold(1, &[Word::from_ints(&[1, 1, 1])]).unwrap();
    let rank_one = c.kernel.same_subgroup(&cube) && c.verify().is_ok();
    let cert = certify_free_abelian(2);
    let torsion: Vec<_> = gl2_torsion(GL2_ENTRY_BOUND).into_iter().filter(|(_, k)| *k > 1).collect();
    let misses = torsion.iter().filter(|(m, _)| !cert.separates(&[m[0].to_vec(), m[1].to_vec()])).count();
    let orders: BTreeSet<usize> = torsion.iter().map(|(_, k)| *k).collect();
    r.record(
        "minkowski rank one and Z^2",
        rank_one && misses == 0 && orders == BTreeSet::from([2, 3, 4, 6]),
        format!(
            "rank one kernel {} of index {:?}; {}·Z^2 against {} torsion matrices of orders {orders:?}, {misses} misses",
            if rank_one { "<a^3>" } else { "wrong" },
            c.kernel.index(),
            cert.modulus,
            torsion.len()
        ),
    );
}

fn graph_kind(g: &RealizingGraph) -> &'static str {
    let loops = g.edges.iter().filter(|(a, b)| a == b).count();
    match (g.vertices, g.edges.len(), loops) {
        (1, 2, 2) => "rose",
        (2, 3, 0) => "theta",
        (2, 3, 2) if g.edges.iter().filter(|(a, b)| a == b).map(|e| e.0).collect::<BTreeSet<_>>().len() == 2 => "dumbbell",
        _ => "other",
    }
}

fn culler_coverage(r: &mut Report) {
    let list = culler_reps(2, &Budgets::default()).unwrap();
    let mut kinds: Vec<&str> = list.graphs.iter().map(graph_kind).collect();
    kinds.sort_unstable();
    let orders: BTreeSet<usize> = list.reps.iter().map(|t| t.order).collect();
    let oracle: BTreeSet<usize> = gl2_torsion(GL2_ENTRY_BOUND).into_iter().map(|(_, k)| k).collect();
    let claimed = list.reps.iter().all(|t| {
        let m: Vec<[i64; 2]> = t.aut.images().iter().map(|w| {
            let s = w.exponent_sums(2);
            [s[0], s[1]]
        }).collect();
        t.aut.pow(t.order as i64).is_inner() && mat_order(&[m[0], m[1]], 12) == Some(t.order)
    });
    r.record(
        "culler coverage at rank two",
        kinds == ["dumbbell", "rose", "theta"] && orders == oracle && claimed,
        format!("graphs {kinds:?}, {} representatives, orders {orders:?} against {oracle:?}, claimed orders {}", list.reps.len(), if claimed { "hold" } else { "fail" }),
    );
}

type Perm = Vec<usize>;

fn image(q: &FiniteQuotient, w: &Word) -> Perm {
    let inv = |p: &Perm| {
        let mut o = vec![0; p.len()];
        for (i, &j) in p.iter().enumerate() {
            o[j] = i;
        }
        o
    };
    w.letters().iter().fold((0..q.degree()).collect(), |p: Perm, l| {
        let g = if l.inv { inv(&q.perms[l.gen]) } else { q.perms[l.gen].clone() };
        p.iter().map(|&i| g[i]).collect()
    })
}

/// Whether `x` and `y` are conjugate in the group generated by `gens`.
fn conjugate_in(gens: &[Perm], x: &Perm, y: &Perm) -> bool {
    let id: Perm = (0..x.len()).collect();
    let mut seen = HashSet::from([id.clone()]);
    let mut stack = vec![id];
    while let Some(h) = stack.pop() {
        // h⁻¹ x h == y  iff  x h == h y
        let xh: Perm = x.iter().map(|&i| h[i]).collect();
        let hy: Perm = h.iter().map(|&i| y[i]).collect();
        if xh == hy {
            return true;
        }
        for g in gens {
            let n: Perm = h.iter().map(|&i| g[i]).collect();
            if seen.insert(n.clone()) {
                stack.push(n);
            }
        }
    }
    false
}

fn certify_rank_two(r: &mut Report) {
    let start = Instant::now();
    let result = certify(2, &Budgets::default());
    let elapsed = start.elapsed();
    let Ok(c) = result else {
        r.record("certify rank two", false, format!("{:?}", result.err()));
        return;
    };
    let gens = c.kernel.generators();
    let characteristic = nielsen_generators(2).iter().all(|nu| gens.iter().all(|w| c.kernel.contains(&nu.apply(w))));
    let sound = c.witnesses.iter().filter(|w| {
        let q = &w.separation.quotient;
        let x = image(q, &w.separation.witness);
        let y = image(q, &w.rep.aut.apply(&w.separation.witness));
        !conjugate_in(&q.perms, &x, &y) && gens.iter().all(|g| q.kills(g)) && q.degree() <= Budgets::default().max_degree
    });
    let sound = sound.count();
    let nontrivial = culler_reps(2, &Budgets::default()).unwrap().reps.iter().filter(|t| t.order > 1).count();
    r.record(
        "certify rank two",
        c.verify().is_ok() && characteristic && sound == c.witnesses.len() && sound == nontrivial && elapsed < CERTIFY_TIME,
        format!("kernel index {:?}, {sound}/{nontrivial} sound witnesses, characteristic {characteristic}, {:.2}s", c.kernel.index(), elapsed.as_secs_f64()),
    );
}

fn congruence_depth_two(r: &mut Report) {
    let k = congruence_kernel(Ambient::Free(2), 2, DEFAULT_STATE_BUDGET).unwrap();
    let klein = SubgroupGraph::from_action(&[vec![1, 0, 3, 2], vec![2, 3, 0, 1]]);
    r.record(
        "congruence kernel of depth two",
        k.index() == Some(4) && k.same_subgroup(&klein),
        format!("index {:?}, equals the kernel onto (Z/2)^2: {}", k.index(), k.same_subgroup(&klein)),
    );
}

// End to end.

fn corpus() -> Vec<(String, String, String, Answer)> {
    std::fs::read_to_string(data("corpus.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            let a = if f[3] == "conjugate" { Answer::Conjugate } else { Answer::NotConjugate };
            (f[0].into(), f[1].into(), f[2].into(), a)
        })
        .collect()
}

fn read(kind: &str, name: &str) -> String {
    std::fs::read_to_string(data(&format!("{kind}/{name}.txt"))).unwrap()
}

fn conj_ung_regression(r: &mut Report) {
    let list = corpus();
    let (mut wrong, mut slow, mut unverified, mut slowest) = (Vec::new(), 0, 0, Duration::ZERO);
    for (name, alpha, beta, expected) in &list {
        for (x, y) in [(alpha, beta), (beta, alpha)] {
            let start = Instant::now();
            let (ta, tb) = (TorusInput::parse(&read("tori", x)).unwrap(), TorusInput::parse(&read("tori", y)).unwrap());
            let (ja, jb) = (JsjInput::parse(&read("jsj", x)).unwrap(), JsjInput::parse(&read("jsj", y)).unwrap());
            let v = conj_ung(&ta, &tb, &ja, &jb, None, DEFAULT_MAX_EDGES);
            let t = start.elapsed();
            slowest = slowest.max(t);
            slow += (t > INSTANCE_TIME) as usize;
            match v {
                Ok(v) if v.answer == *expected => {
                    if *expected == Answer::Conjugate {
                        let ok = WitnessFile::for_conjugacy(&v, &ta, &tb, &ja, &jb)
                            .and_then(|f| WitnessFile::from_json(&f.to_json()).ok())
                            .is_some_and(|f| verify_witness(&f).is_ok());
                        unverified += !ok as usize;
                    }
                }
                _ => wrong.push(name.clone()),
            }
        }
    }
    let positives = list.iter().filter(|c| c.3 == Answer::Conjugate).count();
    r.record(
        "conj_ung regression corpus",
        list.len() >= 10 && wrong.is_empty() && slow == 0 && unverified == 0,
        format!(
            "{} instances ({positives} conjugate) in both orders, wrong {wrong:?}, {unverified} unverified witnesses, slowest {:.2}s",
            list.len(),
            slowest.as_secs_f64()
        ),
    );
}

fn verdict_audit(r: &mut Report) {
    let bin = env!("CARGO_BIN_EXE_torusconj");
    let dir = std::env::temp_dir().join(format!("torusconj-audit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = |k: &str, n: &str| data(&format!("{k}/{n}.txt"));
    let (mut checked, mut failed) = (0, Vec::new());
    for (name, alpha, beta, expected) in corpus().into_iter().filter(|c| c.3 == Answer::Conjugate) {
        let _ = expected;
        let file = dir.join(format!("{name}.json"));
        let out = Command::new(bin)
            .args(["conj-ung", "--alpha"])
            .arg(path("tori", &alpha))
            .arg("--beta")
            .arg(path("tori", &beta))
            .arg("--jsj-a")
            .arg(path("jsj", &alpha))
            .arg("--jsj-b")
            .arg(path("jsj", &beta))
            .arg("--witness")
            .arg(&file)
            .output()
            .unwrap();
        let answered = out.status.success() && String::from_utf8_lossy(&out.stdout).contains("answer: conjugate");
        let check = Command::new(bin).arg("verify-witness").arg(&file).output().unwrap();
        let valid = check.status.success() && String::from_utf8_lossy(&check.stdout).contains("witness: valid");
        checked += 1;
        if !(answered && valid) {
            failed.push(name);
        }
    }
    // A corrupted witness must be refused.
    let sample = dir.join("tv2-swapped.json");
    let mut f = WitnessFile::from_json(&std::fs::read_to_string(&sample).unwrap_or_default()).ok();
    let refused = match f.as_mut() {
        Some(f) => {
            let key = f.morphism.conjugators.keys().next().unwrap().clone();
            f.morphism.conjugators.insert(key, "t".into());
            let bad = dir.join("tampered.json");
            std::fs::write(&bad, f.to_json()).unwrap();
            Command::new(bin).arg("verify-witness").arg(&bad).status().unwrap().code() == Some(1)
        }
        None => false,
    };
    let _ = std::fs::remove_dir_all(&dir);
    r.record(
        "verdict soundness audit",
        checked > 0 && failed.is_empty() && refused,
        format!("{checked} positive verdicts rechecked from files alone, failures {failed:?}, tampered witness refused: {refused}"),
    );
}

fn main() {
    let mut r = Report(Vec::new());
    whitehead_oracle(&mut r);
    bass_closure(&mut r);
    transvection_faithfulness(&mut r);
    diophantine(&mut r);
    rank_one_and_abelian(&mut r);
    culler_coverage(&mut r);
    certify_rank_two(&mut r);
    congruence_depth_two(&mut r);
    conj_ung_regression(&mut r);
    verdict_audit(&mut r);
    let failed: Vec<&str> = r.0.iter().filter(|c| !c.1).map(|c| c.0).collect();
    println!("{}/{} criteria pass", r.0.len() - failed.len(), r.0.len());
    if !failed.is_empty() {
        eprintln!("failing: {failed:?}");
        std::process::exit(1);
    }
}
