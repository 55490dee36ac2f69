//! Orchestration: JSJ data and white vertex candidate lists in, a verdict on
//! fiber-and-orientation preserving isomorphy out.
//!
//! Completeness of a negative verdict is relative to the supplied white
//! lists; a graph of groups isomorphism whose fiber images cannot be
//! corrected is reported as `vertexwise-but-fiber-fails`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, format_err, Error, Result};
use crate::fibercorrect::{abelianize, build_system_with_targets, solve, twist_product, AbelianModule, Orientation};
use crate::freegroup::{fold, fold_tracked, FreeAut, FreeGroup, Word};
use crate::gog::{graph_isomorphisms, pi1_presentation, sections, small_modular_generators, tuple_conjugator, BassWord, Elem, GoGMorphism, GraphMap, GraphOfGroups, Names, SlotMap, SmallModularElement};
use crate::intlin::Matrix;
use crate::torus::{MappingTorus, DEFAULT_KMAX};
use crate::whitehead::{mwp_product, ProductAut, ProductMarking, ProductSplitting};

pub const DEFAULT_MAX_EDGES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    White,
    Black,
}

/// A JSJ description of a mapping torus: the graph of groups, vertex
/// colors, the orientation functional, loops at the first vertex generating
/// the fiber, and optionally a loop of degree 1.
#[derive(Clone, Debug)]
pub struct JsjInput {
    pub gog: GraphOfGroups,
    pub colors: Vec<Color>,
    pub orientation: Orientation,
    pub fiber: Vec<BassWord>,
    pub stable: Option<BassWord>,
    pub source: String,
}

impl JsjInput {
    /// The graph of groups sections plus
    ///
    /// ```text
    /// [colors]
    /// v: black
    /// [orientation]
    /// c: 1
    /// [fiber]
    /// a            # one Bass word per line, based at the first vertex
    /// [stable]
    /// c
    /// ```
    pub fn parse(text: &str) -> Result<JsjInput> {
        let sec = sections(text)?;
        let gog = GraphOfGroups::from_sections(&sec)?;
        let g = &gog.graph;
        let empty = Vec::new();
        let mut colors = vec![None; g.num_vertices()];
        for line in sec.get("colors").unwrap_or(&empty) {
            let (v, c) = crate::gog::key_value(line)?;
            let v = g.vertex(v).ok_or_else(|| Error::Format(format!("unknown vertex {v:?} in [colors]")))?;
            colors[v] = Some(match c {
                "white" => Color::White,
                "black" => Color::Black,
                _ => return format_err(format!("color must be white or black, got {c:?}")),
            });
        }
        let colors = colors
            .into_iter()
            .enumerate()
            .map(|(v, c)| c.ok_or_else(|| Error::Format(format!("vertex {} has no color", g.vertex_name(v)))))
            .collect::<Result<Vec<_>>>()?;
        let orientation = Orientation::parse(&gog, sec.get("orientation").unwrap_or(&empty))?;
        let fiber = sec.get("fiber").unwrap_or(&empty).iter().map(|l| BassWord::parse(&gog, 0, l)).collect::<Result<Vec<_>>>()?;
        let stable = match sec.get("stable").map(Vec::as_slice) {
            None | Some([]) => None,
            Some([l]) => Some(BassWord::parse(&gog, 0, l)?),
            Some(_) => return format_err("[stable] takes a single Bass word"),
        };
        let jsj = JsjInput { gog, colors, orientation, fiber, stable, source: text.to_string() };
        jsj.check()?;
        Ok(jsj)
    }

    fn check(&self) -> Result<()> {
        let g = &self.gog.graph;
        for e in (0..g.num_edges()).step_by(2) {
            if self.colors[g.init(e)] == self.colors[g.term(e)] {
                return domain_err(format!("edge {} joins two vertices of the same color", g.edge_name(e)));
            }
        }
        if self.fiber.is_empty() {
            return format_err("no fiber loops given");
        }
        for (i, h) in self.fiber.iter().enumerate() {
            if !h.is_loop_at(&self.gog, 0) {
                return domain_err(format!("fiber word {} is not a loop at the first vertex", i + 1));
            }
            if self.orientation.eval(&self.gog, h) != 0 {
                return domain_err(format!("fiber word {} has nonzero orientation", i + 1));
            }
        }
        if let Some(s) = &self.stable {
            if !s.is_loop_at(&self.gog, 0) || self.orientation.eval(&self.gog, s) != 1 {
                return domain_err("stable word must be a loop at the first vertex of orientation 1");
            }
        }
        Ok(())
    }

    /// Splitting data of a black vertex group `F_k × ⟨c⟩`.
    pub fn splitting(&self, v: usize) -> Result<ProductSplitting> {
        let slot = self.gog.vertex_slot(v);
        if !slot.has_center() {
            return domain_err(format!("black vertex {} must carry a product with a central factor", self.gog.graph.vertex_name(v)));
        }
        let vals = &self.orientation.vertex[v];
        let k = slot.rank();
        let split = ProductSplitting { fiber_rank: k, mu: vals[..k].to_vec(), nu: vals[k] };
        if split.nu == 0 || split.mu.iter().any(|m| m % split.nu != 0) {
            return domain_err(format!("orientation at {} does not split off the center", self.gog.graph.vertex_name(v)));
        }
        Ok(split)
    }

    pub fn abelianization(&self) -> Result<AbelianModule> {
        Ok(abelianize(&pi1_presentation(&self.gog, &self.gog.tree)?))
    }

    /// Single black vertex description of `F × ⟨tγ⁻¹⟩` for an inner monodromy.
    pub fn from_product_form(t: &MappingTorus) -> Result<JsjInput> {
        let p = t.product_form().ok_or_else(|| Error::Domain("monodromy is not inner".into()))?;
        let names = t.fiber().names();
        let center = ["c", "z", "c0", "z0"].into_iter().find(|c| !names.iter().any(|n| n == c)).unwrap_or("center");
        let kind = if t.rank() == 1 { "Z2" } else { "FxZ" };
        let gamma = t.fiber().format(&p.gamma);
        let stable = if p.gamma.is_identity() { center.to_string() } else { format!("{gamma} {center}") };
        let text = format!(
            "[vertices]\nv: {kind} {} {center}\n[colors]\nv: black\n[orientation]\n{center}: 1\n[fiber]\n{}\n[stable]\n{stable}\n",
            names.join(" "),
            names.join("\n")
        );
        JsjInput::parse(&text)
    }
}

/// One candidate isomorphism `G_v → G_{target}` for a white vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub target: usize,
    pub map: SlotMap,
}

/// Candidate lists indexed by the white vertices of the first input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhiteList {
    pub candidates: Vec<Vec<Candidate>>,
}

impl WhiteList {
    /// Sections `[v -> w]`, one candidate per line: `x -> word, y -> word`.
    pub fn parse(text: &str, a: &JsjInput, b: &JsjInput) -> Result<WhiteList> {
        let mut candidates = vec![Vec::new(); a.gog.graph.num_vertices()];
        for (head, lines) in sections(text)? {
            let (v, w) = head.split_once("->").ok_or_else(|| Error::Format(format!("section [{head}] must read [v -> w]")))?;
            let v = a.gog.graph.vertex(v.trim()).ok_or_else(|| Error::Format(format!("unknown vertex {:?}", v.trim())))?;
            let w = b.gog.graph.vertex(w.trim()).ok_or_else(|| Error::Format(format!("unknown vertex {:?}", w.trim())))?;
            if a.colors[v] != Color::White || b.colors[w] != Color::White {
                return domain_err(format!("[{head}] does not join white vertices"));
            }
            let (src, dst) = (&a.gog.vertex_groups[v], &b.gog.vertex_groups[w]);
            for line in lines {
                let mut images: Vec<Option<Elem>> = vec![None; src.names.len()];
                for part in line.split(',') {
                    let (x, y) = part.split_once("->").ok_or_else(|| Error::Format(format!("expected `x -> word` in {line:?}")))?;
                    let i = src.names.iter().position(|n| n == x.trim()).ok_or_else(|| Error::Format(format!("unknown generator {:?}", x.trim())))?;
                    images[i] = Some(dst.parse(y.trim())?);
                }
                let images = images.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| Error::Format(format!("candidate {line:?} misses a generator")))?;
                let c = Candidate { target: w, map: SlotMap { images } };
                check_candidate(a, b, v, &c)?;
                candidates[v].push(c);
            }
        }
        Ok(WhiteList { candidates })
    }

    /// Generator-wise identifications between white vertices of equal kind
    /// that respect the orientation.
    pub fn identities(a: &JsjInput, b: &JsjInput) -> WhiteList {
        let mut candidates = vec![Vec::new(); a.gog.graph.num_vertices()];
        for v in (0..a.colors.len()).filter(|&v| a.colors[v] == Color::White) {
            for w in (0..b.colors.len()).filter(|&w| b.colors[w] == Color::White) {
                let slot = a.gog.vertex_slot(v);
                if slot != b.gog.vertex_slot(w) {
                    continue;
                }
                let c = Candidate { target: w, map: SlotMap::identity(slot) };
                if check_candidate(a, b, v, &c).is_ok() {
                    candidates[v].push(c);
                }
            }
        }
        WhiteList { candidates }
    }

    pub fn to_text(&self, a: &JsjInput, b: &JsjInput) -> String {
        let mut s = String::new();
        for (v, cs) in self.candidates.iter().enumerate() {
            let mut by_target: BTreeMap<usize, Vec<&Candidate>> = BTreeMap::new();
            for c in cs {
                by_target.entry(c.target).or_default().push(c);
            }
            for (w, cs) in by_target {
                s += &format!("[{} -> {}]\n", a.gog.graph.vertex_name(v), b.gog.graph.vertex_name(w));
                let (src, dst) = (&a.gog.vertex_groups[v], &b.gog.vertex_groups[w]);
                for c in cs {
                    let parts: Vec<String> = src.names.iter().zip(&c.map.images).map(|(x, y)| format!("{x} -> {}", dst.format(y))).collect();
                    s += &format!("{}\n", parts.join(", "));
                }
            }
        }
        s
    }
}

fn check_candidate(a: &JsjInput, b: &JsjInput, v: usize, c: &Candidate) -> Result<()> {
    let (s, t) = (a.gog.vertex_slot(v), b.gog.vertex_slot(c.target));
    c.map.check_hom(s, t)?;
    if s != t || !c.map.is_iso(s) {
        return domain_err(format!("candidate at {} is not an isomorphism", a.gog.graph.vertex_name(v)));
    }
    for x in s.gens().iter() {
        if b.orientation.elem(c.target, &c.map.apply(x)) != a.orientation.elem(v, x) {
            return domain_err(format!("candidate at {} does not preserve the orientation", a.gog.graph.vertex_name(v)));
        }
    }
    Ok(())
}

fn to_product(x: &Elem) -> (Word, i64) {
    (x.h.clone(), x.c)
}

/// Matches a black vertex `v` of `a` onto `map(v)` given the edge maps of
/// its incident edges: returns `φ_v` and `γ_e` for the edges ending at `v`.
pub fn match_black(a: &JsjInput, b: &JsjInput, map: &GraphMap, v: usize, phi_e: &[Option<SlotMap>]) -> Result<Option<(SlotMap, Vec<(usize, Elem)>)>> {
    let g = &a.gog.graph;
    let w = map.vertices[v];
    let slot = a.gog.vertex_slot(v);
    let (sa, sb) = (a.splitting(v)?, b.splitting(w)?);
    if sa.nu.abs() != sb.nu.abs() {
        return Ok(None);
    }
    let k = slot.rank();
    // base isomorphism carrying the orientation of `a` to that of `b`
    let mut images: Vec<Elem> = (0..k).map(|i| Elem::new(Word::gen(i), (sa.mu[i] - sb.mu[i]) / sb.nu)).collect();
    images.push(Elem::central(sa.nu / sb.nu));
    let base = SlotMap { images };
    let incoming: Vec<usize> = g.star(v).into_iter().map(|e| g.bar(e)).collect();
    let mut m1 = Vec::new();
    let mut m2 = Vec::new();
    for &e in &incoming {
        let phi = phi_e[e].as_ref().ok_or_else(|| Error::Domain("edge map missing at a black vertex".into()))?;
        let gens = a.gog.edge_groups[e].gens();
        m1.push(gens.iter().map(|x| to_product(&base.apply(&a.gog.injections[e].apply(x)))).collect::<Vec<_>>());
        m2.push(gens.iter().map(|x| to_product(&b.gog.injections[map.edges[e]].apply(&phi.apply(x)))).collect::<Vec<_>>());
    }
    let phi_v = if incoming.is_empty() {
        base
    } else {
        let Some(aut) = mwp_product(&ProductMarking::new(k, m1), &ProductMarking::new(k, m2), &sb)? else {
            return Ok(None);
        };
        base.then(&product_slot_map(&aut))
    };
    let mut gammas = Vec::new();
    for &e in &incoming {
        let phi = phi_e[e].as_ref().unwrap();
        let gens = a.gog.edge_groups[e].gens();
        let xs: Vec<Elem> = gens.iter().map(|x| phi_v.apply(&a.gog.injections[e].apply(x))).collect();
        let ys: Vec<Elem> = gens.iter().map(|x| b.gog.injections[map.edges[e]].apply(&phi.apply(x))).collect();
        match tuple_conjugator(&xs, &ys) {
            Some(gamma) => gammas.push((e, gamma)),
            None => return Ok(None),
        }
    }
    Ok(Some((phi_v, gammas)))
}

fn product_slot_map(a: &ProductAut) -> SlotMap {
    let mut images: Vec<Elem> = a.h_images.iter().map(|(w, k)| Elem::new(w.clone(), *k)).collect();
    images.push(Elem::new(a.c_image.0.clone(), a.c_image.1));
    SlotMap { images }
}

/// Edge map and conjugator for an edge `e` ending at a white vertex.
fn match_white_edge(a: &JsjInput, b: &JsjInput, map: &GraphMap, e: usize, phi_w: &SlotMap) -> Option<(SlotMap, Elem)> {
    let f = map.edges[e];
    let es = a.gog.edge_groups[e];
    let target = b.gog.vertex_slot(b.gog.graph.term(f));
    let ys: Vec<Elem> = es.gens().iter().map(|x| phi_w.apply(&a.gog.injections[e].apply(x))).collect();
    let zs = b.gog.edge_image(f);
    let mut conjugators = vec![Elem::identity()];
    if !target.is_abelian() {
        let k = target.rank();
        let h1 = fold(k, &ys.iter().map(|y| y.h.clone()).collect::<Vec<_>>()).ok()?;
        let h2 = fold(k, &zs.iter().map(|z| z.h.clone()).collect::<Vec<_>>()).ok()?;
        let c = h1.conjugator_to(&h2)?;
        conjugators = vec![Elem::free(c.inverse()), Elem::free(c)];
    }
    for gamma in conjugators {
        let pre: Option<Vec<Elem>> = ys.iter().map(|y| b.gog.injections[f].preimage(es, &y.conjugate_by(&gamma.inverse()))).collect();
        if let Some(images) = pre {
            let m = SlotMap { images };
            if m.is_iso(es) {
                return Some((m, gamma));
            }
        }
    }
    None
}

fn build(a: &JsjInput, b: &JsjInput, map: &GraphMap, whites: &[(usize, &Candidate)]) -> Result<Option<GoGMorphism>> {
    let g = &a.gog.graph;
    let n = g.num_vertices();
    let mut phi_v: Vec<Option<SlotMap>> = vec![None; n];
    let mut phi_e: Vec<Option<SlotMap>> = vec![None; g.num_edges()];
    let mut gamma: Vec<Option<Elem>> = vec![None; g.num_edges()];
    for &(v, c) in whites {
        phi_v[v] = Some(c.map.clone());
        for e in g.star(v).into_iter().map(|e| g.bar(e)) {
            let Some((m, gm)) = match_white_edge(a, b, map, e, &c.map) else {
                return Ok(None);
            };
            phi_e[g.bar(e)] = Some(m.clone());
            phi_e[e] = Some(m);
            gamma[e] = Some(gm);
        }
    }
    for v in (0..n).filter(|&v| a.colors[v] == Color::Black) {
        let Some((m, gammas)) = match_black(a, b, map, v, &phi_e)? else {
            return Ok(None);
        };
        phi_v[v] = Some(m);
        for (e, gm) in gammas {
            gamma[e] = Some(gm);
        }
    }
    let m = GoGMorphism {
        map: map.clone(),
        phi_v: phi_v.into_iter().map(|x| x.expect("every vertex is colored")).collect(),
        phi_e: phi_e.into_iter().map(|x| x.expect("bipartite graph")).collect(),
        gamma: gamma.into_iter().map(|x| x.expect("bipartite graph")).collect(),
    };
    m.validate(&a.gog, &b.gog)?;
    Ok(Some(m))
}

/// All graph of groups isomorphisms obtained from a graph map, a choice of
/// white candidates, and black vertex matchings.
pub fn assemble(a: &JsjInput, b: &JsjInput, wl: &WhiteList, max_edges: usize) -> Result<Vec<GoGMorphism>> {
    let compatible = |v: usize, w: usize| a.colors[v] == b.colors[w] && (a.colors[v] == Color::Black || wl.candidates[v].iter().any(|c| c.target == w));
    let maps = graph_isomorphisms(&a.gog, &b.gog, max_edges, &compatible)?;
    let whites: Vec<usize> = (0..a.colors.len()).filter(|&v| a.colors[v] == Color::White).collect();
    let mut out: Vec<GoGMorphism> = Vec::new();
    for map in maps {
        let options: Vec<Vec<&Candidate>> = whites.iter().map(|&v| wl.candidates[v].iter().filter(|c| c.target == map.vertices[v]).collect()).collect();
        if options.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0; whites.len()];
        loop {
            let choice: Vec<(usize, &Candidate)> = whites.iter().zip(&idx).enumerate().map(|(j, (&v, &i))| (v, options[j][i])).collect();
            if let Some(m) = build(a, b, &map, &choice)? {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
            // odometer over the candidate tuples
            let mut j = whites.len();
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < options[j].len() {
                    break;
                }
                idx[j] = 0;
                if j == 0 {
                    j = usize::MAX;
                    break;
                }
            }
            if j == usize::MAX || whites.is_empty() {
                break;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    IsomorphicFop,
    NoVertexwiseIso,
    VertexwiseButFiberFails,
    Undecided,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::IsomorphicFop => "isomorphic-fop",
            Status::NoVertexwiseIso => "no-vertexwise-iso",
            Status::VertexwiseButFiberFails => "vertexwise-but-fiber-fails",
            Status::Undecided => "undecided",
        })
    }
}

/// A fiber corrected isomorphism `Ψ = η ∘ Φ` with `η = ∏ twist_t^{x_t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub base: GoGMorphism,
    pub twists: Vec<SmallModularElement>,
    pub multiplicities: Vec<BigInt>,
    pub morphism: GoGMorphism,
    pub fiber_images: Vec<BassWord>,
    pub stable_image: Option<BassWord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    /// Size of the assembled collection.
    pub candidates: usize,
    pub reason: Option<String>,
}

impl Verdict {
    fn undecided(reason: String) -> Verdict {
        Verdict { status: Status::Undecided, witness: None, candidates: 0, reason: Some(reason) }
    }
}

fn targets(a: &JsjInput) -> (Vec<BassWord>, Vec<i64>) {
    let mut loops = a.fiber.clone();
    let mut t = vec![0; loops.len()];
    if let Some(s) = &a.stable {
        loops.push(s.clone());
        t.push(1);
    }
    (loops, t)
}

/// Corrects each candidate by small modular twists so that the fiber loops
/// land in the fiber and the stable loop keeps degree 1.
pub fn fiber_correct(o: &[GoGMorphism], a: &JsjInput, b: &JsjInput) -> Result<Verdict> {
    if o.is_empty() {
        return Ok(Verdict { status: Status::NoVertexwiseIso, witness: None, candidates: 0, reason: None });
    }
    let (loops, tg) = targets(a);
    let twists = small_modular_generators(&b.gog);
    for phi in o {
        let images = loops.iter().map(|w| phi.apply(&a.gog, &b.gog, w)).collect::<Result<Vec<_>>>()?;
        let sys = build_system_with_targets(&images, &tg, &twists, &b.orientation, &b.gog)?;
        let Some(x) = solve(&sys) else { continue };
        let eta = twist_product(&twists, &x, &b.gog)?;
        let psi = eta.compose(phi, &a.gog)?;
        psi.validate(&a.gog, &b.gog)?;
        let fixed = loops.iter().map(|w| psi.apply(&a.gog, &b.gog, w).map(|x| x.reduce(&b.gog))).collect::<Result<Vec<_>>>()?;
        if fixed.iter().zip(&tg).any(|(w, &t)| b.orientation.eval(&b.gog, w) != t) {
            return domain_err("corrected images miss their orientation targets");
        }
        let stable_image = a.stable.as_ref().map(|_| fixed[a.fiber.len()].clone());
        let fiber_images = fixed[..a.fiber.len()].to_vec();
        let witness = Witness { base: phi.clone(), twists: twists.clone(), multiplicities: x, morphism: psi, fiber_images, stable_image };
        return Ok(Verdict { status: Status::IsomorphicFop, witness: Some(witness), candidates: o.len(), reason: None });
    }
    Ok(Verdict { status: Status::VertexwiseButFiberFails, witness: None, candidates: o.len(), reason: None })
}

/// `assemble` followed by `fiber_correct`; an oversized graph is undecided.
pub fn decide(a: &JsjInput, b: &JsjInput, wl: &WhiteList, max_edges: usize) -> Result<Verdict> {
    match assemble(a, b, wl, max_edges) {
        Ok(o) => fiber_correct(&o, a, b),
        Err(Error::Resource(m)) => Ok(Verdict::undecided(m)),
        Err(e) => Err(e),
    }
}

/// A monodromy with its peripheral subgroups `P` and optional `γ_P` such
/// that `ad_{γ_P} ∘ α` is the identity on `P`.
#[derive(Clone, Debug)]
pub struct TorusInput {
    pub torus: MappingTorus,
    pub peripheral: Vec<(Vec<Word>, Option<Word>)>,
    pub source: String,
}

impl TorusInput {
    /// The torus description plus lines `peripheral: p1, p2 | γ`.
    pub fn parse(text: &str) -> Result<TorusInput> {
        let torus = MappingTorus::parse(text)?;
        let mut peripheral = Vec::new();
        for line in text.lines().map(|l| l.split('#').next().unwrap().trim()) {
            let Some(rest) = line.strip_prefix("peripheral:") else { continue };
            let (gens, gamma) = match rest.split_once('|') {
                Some((g, c)) => (g, Some(torus.fiber().parse(c.trim())?)),
                None => (rest, None),
            };
            let gens = gens.split(',').map(|w| torus.fiber().parse(w.trim())).collect::<Result<Vec<_>>>()?;
            peripheral.push((gens, gamma));
        }
        Ok(TorusInput { torus, peripheral, source: text.to_string() })
    }

    /// Each peripheral sub-mapping torus is a product `P × Z` (class `C`).
    pub fn check_peripheral(&self) -> Result<()> {
        let t = &self.torus;
        let n = t.rank();
        let alpha = t.monodromy();
        for (gens, gamma) in &self.peripheral {
            let name = format!("⟨{}⟩", gens.iter().map(|w| t.fiber().format(w)).collect::<Vec<_>>().join(", "));
            let fail = |why: &str| Error::Domain(format!("peripheral subgroup {name} is not of class C: {why}"));
            if let Some(g) = gamma {
                if gens.iter().all(|p| alpha.apply(p).conjugate_by(g) == *p) {
                    continue;
                }
                return Err(fail("the supplied conjugator does not make the monodromy trivial on it"));
            }
            let sub = fold(n, gens)?;
            let s = t.sub_mapping_torus(&sub, DEFAULT_KMAX).map_err(|_| fail("not invariant up to conjugacy"))?;
            if s.period != 1 {
                return Err(fail("the monodromy permutes it with a nontrivial period"));
            }
            let tf = fold_tracked(n, gens)?;
            if tf.graph.subgroup_rank() != gens.len() {
                return Err(fail("generators are not a free basis"));
            }
            let images = gens
                .iter()
                .map(|p| tf.express(&alpha.apply(p).conjugate_by(&s.corrector.inverse())))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| fail("restriction does not preserve it"))?;
            let restricted = FreeAut::from_images(images).map_err(|_| fail("restriction is not an automorphism"))?;
            let sub_torus = MappingTorus::new(FreeGroup::new(gens.len()), restricted)?;
            if sub_torus.product_form().is_none() {
                return Err(fail("sub-mapping torus is not a product"));
            }
        }
        Ok(())
    }

    /// `Z^{n+1}` modulo the rows `α(x_i) - x_i`.
    pub fn abelianization(&self) -> AbelianModule {
        let t = &self.torus;
        let n = t.rank();
        let rows: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut r: Vec<BigInt> = t.monodromy().images()[i].exponent_sums(n).into_iter().map(BigInt::from).collect();
                r[i] -= 1;
                r.push(BigInt::from(0));
                r
            })
            .collect();
        let mut generators = t.fiber().names().to_vec();
        generators.push(t.stable_name().to_string());
        AbelianModule { generators, relations: Matrix::from_rows(rows, n + 1).expect("uniform rows") }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Conjugate,
    NotConjugate,
    Undecided,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Conjugate => "conjugate",
            Answer::NotConjugate => "not-conjugate",
            Answer::Undecided => "undecided",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ConjugacyVerdict {
    pub answer: Answer,
    pub verdict: Verdict,
    /// `θ` with `θ∘α∘θ⁻¹` equal to `β` in `Out(F)`, when recovered.
    pub theta: Option<FreeAut>,
}

/// Conjugacy in `Out(F)` of two monodromies through fiber-and-orientation
/// preserving isomorphy of their tori.
pub fn conj_ung(alpha: &TorusInput, beta: &TorusInput, a: &JsjInput, b: &JsjInput, wl: Option<&WhiteList>, max_edges: usize) -> Result<ConjugacyVerdict> {
    alpha.check_peripheral()?;
    beta.check_peripheral()?;
    let (ia, ib) = (alpha.abelianization().invariants(), beta.abelianization().invariants());
    for (jsj, inv, which) in [(a, &ia, "first"), (b, &ib, "second")] {
        if jsj.abelianization()?.invariants() != *inv {
            return domain_err(format!("the {which} JSJ data does not describe its mapping torus (abelianizations differ)"));
        }
    }
    if alpha.torus.rank() != beta.torus.rank() || ia != ib {
        let reason = format!("abelianized tori differ: {} vs {}", show_invariants(&ia), show_invariants(&ib));
        let verdict = Verdict { status: Status::NoVertexwiseIso, witness: None, candidates: 0, reason: Some(reason) };
        return Ok(ConjugacyVerdict { answer: Answer::NotConjugate, verdict, theta: None });
    }
    let default;
    let wl = match wl {
        Some(w) => w,
        None => {
            default = WhiteList::identities(a, b);
            &default
        }
    };
    let verdict = decide(a, b, wl, max_edges)?;
    let answer = match verdict.status {
        Status::IsomorphicFop => Answer::Conjugate,
        Status::NoVertexwiseIso | Status::VertexwiseButFiberFails => Answer::NotConjugate,
        Status::Undecided => Answer::Undecided,
    };
    let theta = match &verdict.witness {
        Some(w) => recover_theta(alpha, beta, b, w)?,
        None => None,
    };
    Ok(ConjugacyVerdict { answer, verdict, theta })
}

fn show_invariants(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(|d| if *d == BigInt::from(0) { "Z".to_string() } else { format!("Z/{d}") }).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// For single vertex descriptions, reads `θ : F_α → F_β` off the fiber
/// images and checks `β⁻¹ ∘ θαθ⁻¹` is inner.
fn recover_theta(alpha: &TorusInput, beta: &TorusInput, b: &JsjInput, w: &Witness) -> Result<Option<FreeAut>> {
    let n = alpha.torus.rank();
    if b.gog.graph.num_vertices() != 1 || w.fiber_images.len() != n || b.fiber.len() != beta.torus.rank() {
        return Ok(None);
    }
    let k = b.gog.vertex_slot(0).rank();
    let hb: Vec<Word> = b.fiber.iter().map(|h| h.reduce(&b.gog).elems[0].h.clone()).collect();
    let tf = fold_tracked(k, &hb)?;
    let Some(images) = w.fiber_images.iter().map(|x| tf.express(&x.elems[0].h)).collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };
    let theta = FreeAut::from_images(images).map_err(|_| Error::Domain("fiber images do not give an automorphism".into()))?;
    if !theta_conjugates(&theta, alpha.torus.monodromy(), beta.torus.monodromy()) {
        return domain_err("recovered fiber map does not conjugate the monodromies");
    }
    Ok(Some(theta))
}

fn theta_conjugates(theta: &FreeAut, alpha: &FreeAut, beta: &FreeAut) -> bool {
    theta.rank() == alpha.rank() && alpha.rank() == beta.rank() && beta.inverse().compose(&theta.compose(alpha).compose(&theta.inverse())).is_inner()
}

/// A morphism written with vertex, edge and generator names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismRecord {
    pub vertices: BTreeMap<String, String>,
    pub edges: BTreeMap<String, String>,
    /// Images of the generators, in the target vertex group.
    pub vertex_maps: BTreeMap<String, Vec<String>>,
    /// Per positive edge, on anonymous edge group generators `x1, z`.
    pub edge_maps: BTreeMap<String, Vec<String>>,
    pub conjugators: BTreeMap<String, String>,
}

impl MorphismRecord {
    pub fn new(m: &GoGMorphism, a: &GraphOfGroups, b: &GraphOfGroups) -> MorphismRecord {
        let (g, h) = (&a.graph, &b.graph);
        let mut r = MorphismRecord { vertices: BTreeMap::new(), edges: BTreeMap::new(), vertex_maps: BTreeMap::new(), edge_maps: BTreeMap::new(), conjugators: BTreeMap::new() };
        for v in 0..g.num_vertices() {
            let w = m.map.vertices[v];
            r.vertices.insert(g.vertex_name(v).into(), h.vertex_name(w).into());
            r.vertex_maps.insert(g.vertex_name(v).into(), m.phi_v[v].images.iter().map(|x| b.vertex_groups[w].format(x)).collect());
        }
        for e in 0..g.num_edges() {
            let f = m.map.edges[e];
            if g.is_positive(e) {
                r.edges.insert(g.edge_name(e).into(), h.edge_name(f).into());
                let names = Names::anonymous(a.edge_groups[e]);
                r.edge_maps.insert(g.edge_name(e).into(), m.phi_e[e].images.iter().map(|x| names.format(x)).collect());
            }
            r.conjugators.insert(g.edge_name(e).into(), b.vertex_groups[h.term(f)].format(&m.gamma[e]));
        }
        r
    }

    pub fn to_morphism(&self, a: &GraphOfGroups, b: &GraphOfGroups) -> Result<GoGMorphism> {
        let (g, h) = (&a.graph, &b.graph);
        let look = |m: &BTreeMap<String, String>, k: &str| m.get(k).cloned().ok_or_else(|| Error::Format(format!("record misses {k:?}")));
        let mut vertices = Vec::new();
        let mut phi_v = Vec::new();
        for v in 0..g.num_vertices() {
            let name = g.vertex_name(v);
            let w = h.vertex(&look(&self.vertices, name)?).ok_or_else(|| Error::Format(format!("unknown target of {name}")))?;
            let imgs = self.vertex_maps.get(name).ok_or_else(|| Error::Format(format!("record misses the map at {name}")))?;
            phi_v.push(SlotMap { images: imgs.iter().map(|s| b.vertex_groups[w].parse(s)).collect::<Result<_>>()? });
            vertices.push(w);
        }
        let mut edges = vec![0; g.num_edges()];
        let mut phi_e = vec![SlotMap { images: Vec::new() }; g.num_edges()];
        for e in (0..g.num_edges()).step_by(2) {
            let name = g.edge_name(e);
            let f = h.edge(&look(&self.edges, name)?).ok_or_else(|| Error::Format(format!("unknown target of {name}")))?;
            edges[e] = f;
            edges[e + 1] = h.bar(f);
            let names = Names::anonymous(a.edge_groups[e]);
            let imgs = self.edge_maps.get(name).ok_or_else(|| Error::Format(format!("record misses the map at {name}")))?;
            let m = SlotMap { images: imgs.iter().map(|s| names.parse(s)).collect::<Result<_>>()? };
            phi_e[e + 1] = m.clone();
            phi_e[e] = m;
        }
        let mut gamma = Vec::new();
        for (e, &f) in edges.iter().enumerate() {
            gamma.push(b.vertex_groups[h.term(f)].parse(&look(&self.conjugators, g.edge_name(e))?)?);
        }
        Ok(GoGMorphism { map: GraphMap { vertices, edges }, phi_v, phi_e, gamma })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistRecord {
    pub edge: String,
    pub element: String,
}

/// Self-contained, machine checkable record of a positive verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub status: String,
    pub jsj_a: String,
    pub jsj_b: String,
    pub base_morphism: MorphismRecord,
    pub twists: Vec<TwistRecord>,
    pub multiplicities: Vec<String>,
    pub morphism: MorphismRecord,
    pub fiber_images: Vec<String>,
    pub stable_image: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus_b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
}

impl WitnessFile {
    pub fn new(w: &Witness, a: &JsjInput, b: &JsjInput) -> WitnessFile {
        let twists = w
            .twists
            .iter()
            .map(|t| {
                let (e, z) = t.twist().expect("single twists");
                TwistRecord { edge: b.gog.graph.edge_name(e).into(), element: b.gog.vertex_groups[b.gog.graph.term(e)].format(z) }
            })
            .collect();
        WitnessFile {
            status: Status::IsomorphicFop.to_string(),
            jsj_a: a.source.clone(),
            jsj_b: b.source.clone(),
            base_morphism: MorphismRecord::new(&w.base, &a.gog, &b.gog),
            twists,
            multiplicities: w.multiplicities.iter().map(ToString::to_string).collect(),
            morphism: MorphismRecord::new(&w.morphism, &a.gog, &b.gog),
            fiber_images: w.fiber_images.iter().map(|x| x.format(&b.gog)).collect(),
            stable_image: w.stable_image.as_ref().map(|x| x.format(&b.gog)),
            torus_a: None,
            torus_b: None,
            theta: None,
        }
    }

    pub fn for_conjugacy(v: &ConjugacyVerdict, alpha: &TorusInput, beta: &TorusInput, a: &JsjInput, b: &JsjInput) -> Option<WitnessFile> {
        let mut f = WitnessFile::new(v.verdict.witness.as_ref()?, a, b);
        f.torus_a = Some(alpha.source.clone());
        f.torus_b = Some(beta.source.clone());
        f.theta = v.theta.as_ref().map(|t| t.format(alpha.torus.fiber()));
        Some(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<WitnessFile> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("bad witness file: {e}")))
    }
}

/// What [`verify_witness`] established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    pub fiber_loops: usize,
    pub stable_checked: bool,
    pub conjugacy_checked: bool,
}

/// Re-derives every claim of a witness from its own contents: the diagram
/// commutes, the twists are small modular and recompose to the corrected
/// map, the listed fiber images are correct and of degree 0, the stable
/// image has degree 1, and a supplied `θ` conjugates the monodromies.
pub fn verify_witness(f: &WitnessFile) -> Result<WitnessReport> {
    let a = JsjInput::parse(&f.jsj_a)?;
    let b = JsjInput::parse(&f.jsj_b)?;
    let base = f.base_morphism.to_morphism(&a.gog, &b.gog)?;
    base.validate(&a.gog, &b.gog)?;
    let psi = f.morphism.to_morphism(&a.gog, &b.gog)?;
    psi.validate(&a.gog, &b.gog)?;
    if f.twists.len() != f.multiplicities.len() {
        return format_err("twists and multiplicities differ in length");
    }
    let mut twists = Vec::new();
    for t in &f.twists {
        let e = b.gog.graph.edge(&t.edge).ok_or_else(|| Error::Format(format!("unknown edge {:?}", t.edge)))?;
        let z = b.gog.vertex_groups[b.gog.graph.term(e)].parse(&t.element)?;
        let s = SmallModularElement::dehn_twist(&b.gog, e, z);
        s.check(&b.gog)?;
        twists.push(s);
    }
    let x = f.multiplicities.iter().map(|s| s.parse::<BigInt>().map_err(|_| Error::Format(format!("bad multiplicity {s:?}")))).collect::<Result<Vec<_>>>()?;
    let eta = twist_product(&twists, &x, &b.gog)?;
    if eta.compose(&base, &a.gog)? != psi {
        return domain_err("corrected morphism is not the twisted base morphism");
    }
    if f.fiber_images.len() != a.fiber.len() {
        return domain_err("wrong number of fiber images");
    }
    let start = psi.map.vertices[0];
    for (h, listed) in a.fiber.iter().zip(&f.fiber_images) {
        let img = psi.apply(&a.gog, &b.gog, h)?.reduce(&b.gog);
        if img != BassWord::parse(&b.gog, start, listed)?.reduce(&b.gog) {
            return domain_err(format!("listed fiber image {listed:?} is wrong"));
        }
        if b.orientation.eval(&b.gog, &img) != 0 {
            return domain_err(format!("fiber image {listed:?} leaves the fiber"));
        }
    }
    let stable_checked = match (&a.stable, &f.stable_image) {
        (Some(s), Some(listed)) => {
            let img = psi.apply(&a.gog, &b.gog, s)?.reduce(&b.gog);
            if img != BassWord::parse(&b.gog, start, listed)?.reduce(&b.gog) || b.orientation.eval(&b.gog, &img) != 1 {
                return domain_err("stable image is wrong or not of degree 1");
            }
            true
        }
        (None, None) => false,
        _ => return domain_err("stable image does not match the data"),
    };
    let conjugacy_checked = match (&f.torus_a, &f.torus_b, &f.theta) {
        (Some(ta), Some(tb), Some(th)) => {
            let (ta, tb) = (TorusInput::parse(ta)?, TorusInput::parse(tb)?);
            let theta = FreeAut::parse(ta.torus.fiber(), th)?;
            if !theta_conjugates(&theta, ta.torus.monodromy(), tb.torus.monodromy()) {
                return domain_err("θ does not conjugate the monodromies");
            }
            true
        }
        _ => false,
    };
    Ok(WitnessReport { fiber_loops: a.fiber.len(), stable_checked, conjugacy_checked })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const HNN_A: &str = "
[vertices]
v: Z2 b t
w: Z y
[edges]
e1: w -> v Z
e2: w -> v Z
[injections]
e1: t
~e1: y
e2: t b'
~e2: y
[tree]
e1
[colors]
v: black
w: white
[orientation]
t: 1
y: 1
[fiber]
~e1 e2
b
[stable]
t
";

    const HNN_B: &str = "
[vertices]
v: Z2 a t
w: Z y
[edges]
e1: w -> v Z
e2: w -> v Z
[injections]
e1: t
~e1: y
e2: t a'
~e2: y
[tree]
e1
[colors]
v: black
w: white
[orientation]
t: 1
y: 1
[fiber]
a
~e1 e2
[stable]
t
";

    #[test]
    fn parses_and_checks() {
        let a = JsjInput::parse(HNN_A).unwrap();
        assert_eq!(a.fiber.len(), 2);
        assert_eq!(a.abelianization().unwrap().invariants(), vec![BigInt::from(0), BigInt::from(0)]);
        let bad = HNN_A.replace("y: 1", "y: 2");
        assert!(JsjInput::parse(&bad).is_err());
        let mono = HNN_A.replace("w: white", "w: black");
        assert!(matches!(JsjInput::parse(&mono), Err(Error::Domain(_))));
    }

    #[test]
    fn transvection_tori_are_isomorphic() {
        let a = JsjInput::parse(HNN_A).unwrap();
        let b = JsjInput::parse(HNN_B).unwrap();
        let wl = WhiteList::identities(&a, &b);
        let o = assemble(&a, &b, &wl, DEFAULT_MAX_EDGES).unwrap();
        assert!(!o.is_empty());
        let v = fiber_correct(&o, &a, &b).unwrap();
        assert_eq!(v.status, Status::IsomorphicFop);
        let f = WitnessFile::new(v.witness.as_ref().unwrap(), &a, &b);
        let back = WitnessFile::from_json(&f.to_json()).unwrap();
        assert!(verify_witness(&back).unwrap().stable_checked);
    }

    #[test]
    fn twists_repair_the_fiber() {
        let a = JsjInput::parse(HNN_A).unwrap();
        let t = a.gog.vertex_groups[0].parse("t").unwrap();
        let off = SmallModularElement::dehn_twist(&a.gog, 2, t).to_morphism(&a.gog);
        let img = off.apply(&a.gog, &a.gog, &a.fiber[0]).unwrap();
        assert_eq!(a.orientation.eval(&a.gog, &img), 1);
        let v = fiber_correct(&[off], &a, &a).unwrap();
        assert_eq!(v.status, Status::IsomorphicFop);
        let w = v.witness.unwrap();
        assert!(w.multiplicities.iter().any(|x| *x != BigInt::from(0)));
        for h in &w.fiber_images {
            assert_eq!(a.orientation.eval(&a.gog, h), 0);
        }
        assert_eq!(fiber_correct(&[], &a, &a).unwrap().status, Status::NoVertexwiseIso);
    }

    #[test]
    fn empty_white_list() {
        let a = JsjInput::parse(HNN_A).unwrap();
        let wl = WhiteList { candidates: vec![Vec::new(); 2] };
        assert!(assemble(&a, &a, &wl, DEFAULT_MAX_EDGES).unwrap().is_empty());
        let text = "[w -> w]\ny -> y\n";
        let wl = WhiteList::parse(text, &a, &a).unwrap();
        assert_eq!(wl, WhiteList::identities(&a, &a));
        assert_eq!(WhiteList::parse(&wl.to_text(&a, &a), &a, &a).unwrap(), wl);
        assert!(WhiteList::parse("[w -> w]\ny -> y'\n", &a, &a).is_err());
    }

    #[test]
    fn product_forms() {
        let t = TorusInput::parse("fiber rank: 2\nmonodromy: a -> b a b', b -> b\nconjugator: b'\n").unwrap();
        let j = JsjInput::from_product_form(&t.torus).unwrap();
        assert_eq!(j.gog.vertex_slot(0).rank(), 2);
        assert_eq!(j.abelianization().unwrap().invariants(), t.abelianization().invariants());
        let id = TorusInput::parse("fiber rank: 2\nmonodromy: a -> a, b -> b\n").unwrap();
        let ji = JsjInput::from_product_form(&id.torus).unwrap();
        let v = conj_ung(&id, &t, &ji, &j, None, DEFAULT_MAX_EDGES).unwrap();
        assert_eq!(v.answer, Answer::Conjugate);
        assert!(v.theta.is_some());
    }

    #[test]
    fn peripheral_classes() {
        let ok = TorusInput::parse("fiber rank: 2\nmonodromy: a -> a b, b -> b\nperipheral: b\n").unwrap();
        ok.check_peripheral().unwrap();
        let conj = TorusInput::parse("fiber rank: 2\nmonodromy: a -> a, b -> a b a'\nperipheral: b | a\n").unwrap();
        conj.check_peripheral().unwrap();
        let bad = TorusInput::parse("fiber rank: 2\nmonodromy: a -> a b, b -> b\nperipheral: a\n").unwrap();
        let e = bad.check_peripheral().unwrap_err();
        assert!(e.to_string().contains("⟨a⟩"));
        let flip = TorusInput::parse("fiber rank: 2\nmonodromy: a -> a, b -> b'\nperipheral: b\n").unwrap();
        assert!(flip.check_peripheral().is_err());
    }
}
