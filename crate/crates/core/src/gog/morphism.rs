use thiserror::Error;

use super::bass::BassWord;
use super::graph::GraphOfGroups;
use super::slot::{centralizer, Elem, SlotMap};
use crate::error::{domain_err, Error, Result};
use crate::freegroup::Word;
use crate::whitehead::canonical_tuple;

/// Failure report of [`GoGMorphism::validate`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("vertex {vertex}: {reason}")]
    Vertex { vertex: String, reason: String },
    #[error("Bass diagram fails on edge {edge} at edge generator {generator}")]
    Edge { edge: String, generator: usize },
}

impl From<DiagramError> for Error {
    fn from(e: DiagramError) -> Error {
        Error::Domain(e.to_string())
    }
}

/// A map of underlying graphs, on vertices and oriented edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphMap {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl GraphMap {
    pub fn identity(gog: &GraphOfGroups) -> GraphMap {
        GraphMap { vertices: (0..gog.graph.num_vertices()).collect(), edges: (0..gog.graph.num_edges()).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.vertices.iter().enumerate().all(|(i, &v)| i == v) && self.edges.iter().enumerate().all(|(i, &e)| i == e)
    }

    fn inverse(&self) -> GraphMap {
        let mut vertices = vec![0; self.vertices.len()];
        for (i, &v) in self.vertices.iter().enumerate() {
            vertices[v] = i;
        }
        let mut edges = vec![0; self.edges.len()];
        for (i, &e) in self.edges.iter().enumerate() {
            edges[e] = i;
        }
        GraphMap { vertices, edges }
    }
}

/// An isomorphism of graphs of groups `(φ_X, (φ_v), (φ_e), (γ_e))`.
///
/// On Bass generators it sends `g ∈ G_v` to `φ_v(g)` and `e` to
/// `γ_ē⁻¹ φ_X(e) γ_e`, and it must satisfy
/// `φ_{t(e)} ∘ i_e = ad_{γ_e} ∘ i_{φ_X(e)} ∘ φ_e` with `ad_g(x) = g⁻¹xg`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GoGMorphism {
    pub map: GraphMap,
    pub phi_v: Vec<SlotMap>,
    /// Per oriented edge, with `φ_ē = φ_e`.
    pub phi_e: Vec<SlotMap>,
    /// `γ_e ∈ G_{φ_X(t(e))}` per oriented edge.
    pub gamma: Vec<Elem>,
}

impl GoGMorphism {
    pub fn identity(gog: &GraphOfGroups) -> GoGMorphism {
        GoGMorphism {
            map: GraphMap::identity(gog),
            phi_v: gog.vertex_groups.iter().map(|n| SlotMap::identity(n.slot)).collect(),
            phi_e: gog.edge_groups.iter().map(|&s| SlotMap::identity(s)).collect(),
            gamma: vec![Elem::identity(); gog.graph.num_edges()],
        }
    }

    pub fn is_identity(&self, gog: &GraphOfGroups) -> bool {
        *self == GoGMorphism::identity(gog)
    }

    pub fn validate(&self, dom: &GraphOfGroups, cod: &GraphOfGroups) -> std::result::Result<(), DiagramError> {
        let (g, h) = (&dom.graph, &cod.graph);
        let shape = |m: &str| Err(DiagramError::Shape(m.to_string()));
        if self.map.vertices.len() != g.num_vertices() || self.map.edges.len() != g.num_edges() || g.num_vertices() != h.num_vertices() || g.num_edges() != h.num_edges() {
            return shape("graph sizes differ");
        }
        if self.phi_v.len() != g.num_vertices() || self.phi_e.len() != g.num_edges() || self.gamma.len() != g.num_edges() {
            return shape("tuple lengths do not match the graph");
        }
        let mut hit_v = vec![false; h.num_vertices()];
        for &v in &self.map.vertices {
            if v >= h.num_vertices() || std::mem::replace(&mut hit_v[v], true) {
                return shape("vertex map is not a bijection");
            }
        }
        let mut hit_e = vec![false; h.num_edges()];
        for (e, &f) in self.map.edges.iter().enumerate() {
            if f >= h.num_edges() || std::mem::replace(&mut hit_e[f], true) {
                return shape("edge map is not a bijection");
            }
            if self.map.edges[g.bar(e)] != h.bar(f) || h.init(f) != self.map.vertices[g.init(e)] || h.term(f) != self.map.vertices[g.term(e)] {
                return Err(DiagramError::Shape(format!("edge map is not a graph map at {}", g.edge_name(e))));
            }
        }
        for v in 0..g.num_vertices() {
            let (s, t) = (dom.vertex_slot(v), cod.vertex_slot(self.map.vertices[v]));
            let bad = |reason: String| Err(DiagramError::Vertex { vertex: g.vertex_name(v).to_string(), reason });
            if s != t {
                return bad(format!("{s} cannot map isomorphically onto {t}"));
            }
            if let Err(e) = self.phi_v[v].check_hom(s, t) {
                return bad(e.to_string());
            }
            if !self.phi_v[v].is_iso(s) {
                return bad("vertex map is not an isomorphism".into());
            }
        }
        for e in 0..g.num_edges() {
            let f = self.map.edges[e];
            let s = dom.edge_groups[e];
            let name = g.edge_name(e).to_string();
            if s != cod.edge_groups[f] || self.phi_e[e] != self.phi_e[g.bar(e)] || self.phi_e[e].check_hom(s, s).is_err() || !self.phi_e[e].is_iso(s) {
                return Err(DiagramError::Shape(format!("edge map at {name} is not an isomorphism of edge groups")));
            }
            let target = cod.vertex_slot(h.term(f));
            if !target.contains(&self.gamma[e]) {
                return Err(DiagramError::Shape(format!("γ of {name} does not lie in the target vertex group")));
            }
            for (i, x) in s.gens().iter().enumerate() {
                let left = self.phi_v[g.term(e)].apply(&dom.injections[e].apply(x));
                let right = cod.injections[f].apply(&self.phi_e[e].apply(x)).conjugate_by(&self.gamma[e]);
                if left != right {
                    return Err(DiagramError::Edge { edge: name, generator: i });
                }
            }
        }
        Ok(())
    }

    /// `self ∘ first`, where `first` is defined on `dom`.
    pub fn compose(&self, first: &GoGMorphism, dom: &GraphOfGroups) -> Result<GoGMorphism> {
        let b = first;
        if b.map.vertices.len() != dom.graph.num_vertices() || b.map.edges.len() != dom.graph.num_edges() {
            return domain_err("first map is not defined on the given graph of groups");
        }
        if b.map.vertices.iter().any(|&v| v >= self.map.vertices.len()) || b.map.edges.iter().any(|&e| e >= self.map.edges.len()) {
            return domain_err("codomain of the first map is not the domain of the second");
        }
        let vertices = b.map.vertices.iter().map(|&v| self.map.vertices[v]).collect();
        let edges = b.map.edges.iter().map(|&e| self.map.edges[e]).collect();
        let phi_v = (0..b.phi_v.len()).map(|v| b.phi_v[v].then(&self.phi_v[b.map.vertices[v]])).collect();
        let phi_e = (0..b.phi_e.len()).map(|e| b.phi_e[e].then(&self.phi_e[b.map.edges[e]])).collect();
        let gamma = (0..b.gamma.len())
            .map(|e| {
                let v = b.map.vertices[dom.graph.term(e)];
                self.gamma[b.map.edges[e]].mul(&self.phi_v[v].apply(&b.gamma[e]))
            })
            .collect();
        Ok(GoGMorphism { map: GraphMap { vertices, edges }, phi_v, phi_e, gamma })
    }

    pub fn inverse(&self, dom: &GraphOfGroups, cod: &GraphOfGroups) -> Result<GoGMorphism> {
        self.validate(dom, cod)?;
        let inv = self.map.inverse();
        let mut phi_v = Vec::new();
        for w in 0..cod.graph.num_vertices() {
            let v = inv.vertices[w];
            phi_v.push(self.phi_v[v].inverse(dom.vertex_slot(v)).expect("validated isomorphism"));
        }
        let phi_e: Vec<SlotMap> = (0..cod.graph.num_edges()).map(|f| self.phi_e[inv.edges[f]].inverse(cod.edge_groups[f]).expect("validated isomorphism")).collect();
        let gamma = (0..cod.graph.num_edges())
            .map(|f| {
                let e = inv.edges[f];
                phi_v[cod.graph.term(f)].apply(&self.gamma[e].inverse())
            })
            .collect();
        Ok(GoGMorphism { map: inv, phi_v, phi_e, gamma })
    }

    /// Image of a Bass path.
    pub fn apply(&self, dom: &GraphOfGroups, cod: &GraphOfGroups, w: &BassWord) -> Result<BassWord> {
        w.check(dom)?;
        let g = &dom.graph;
        let mut elems = vec![self.phi_v[w.start].apply(&w.elems[0])];
        let mut edges = Vec::new();
        for (j, &e) in w.edges.iter().enumerate() {
            let last = elems.pop().unwrap().mul(&self.gamma[g.bar(e)].inverse());
            elems.push(last);
            edges.push(self.map.edges[e]);
            elems.push(self.gamma[e].mul(&self.phi_v[g.term(e)].apply(&w.elems[j + 1])));
        }
        BassWord::new(cod, self.map.vertices[w.start], elems, edges)
    }

    /// Image of a loop based at `base`.
    pub fn induced_on_pi1(&self, dom: &GraphOfGroups, cod: &GraphOfGroups, base: usize, w: &BassWord) -> Result<BassWord> {
        if !w.is_loop_at(dom, base) {
            return domain_err("not a loop at the base vertex");
        }
        self.apply(dom, cod, w)
    }
}

/// An element of the small modular group: identity on the graph, `φ_v =
/// ad_{γ_v}`, `φ_e = id`, subject to `γ_v γ_e⁻¹` centralizing `i_e(G_e)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SmallModularElement {
    pub gamma_v: Vec<Elem>,
    pub gamma_e: Vec<Elem>,
}

impl SmallModularElement {
    /// The Dehn twist by `z` over `e`: `e ↦ e·z`, `ē ↦ z⁻¹·ē`.
    pub fn dehn_twist(gog: &GraphOfGroups, e: usize, z: Elem) -> SmallModularElement {
        let mut gamma_e = vec![Elem::identity(); gog.graph.num_edges()];
        gamma_e[e] = z;
        SmallModularElement { gamma_v: vec![Elem::identity(); gog.graph.num_vertices()], gamma_e }
    }

    /// `(e, z)` when this is a single Dehn twist.
    pub fn twist(&self) -> Option<(usize, &Elem)> {
        if self.gamma_v.iter().any(|g| !g.is_identity()) {
            return None;
        }
        let mut it = self.gamma_e.iter().enumerate().filter(|(_, g)| !g.is_identity());
        match (it.next(), it.next()) {
            (Some((e, z)), None) => Some((e, z)),
            _ => None,
        }
    }

    pub fn check(&self, gog: &GraphOfGroups) -> Result<()> {
        let g = &gog.graph;
        if self.gamma_v.len() != g.num_vertices() || self.gamma_e.len() != g.num_edges() {
            return domain_err("small modular element does not match the graph");
        }
        for e in 0..g.num_edges() {
            let v = g.term(e);
            let d = self.gamma_v[v].mul(&self.gamma_e[e].inverse());
            if gog.edge_image(e).iter().any(|x| !x.commutes_with(&d) || !gog.vertex_slot(v).contains(&d)) {
                return domain_err(format!("γ_v γ_e⁻¹ does not centralize the image of {}", g.edge_name(e)));
            }
        }
        Ok(())
    }

    pub fn to_morphism(&self, gog: &GraphOfGroups) -> GoGMorphism {
        let mut m = GoGMorphism::identity(gog);
        m.phi_v = gog.vertex_groups.iter().zip(&self.gamma_v).map(|(n, g)| SlotMap::inner(n.slot, g)).collect();
        m.gamma = self.gamma_e.clone();
        m
    }
}

/// One Dehn twist per oriented edge and per generator of the centralizer of
/// the edge group image.
pub fn small_modular_generators(gog: &GraphOfGroups) -> Vec<SmallModularElement> {
    let mut out = Vec::new();
    for e in 0..gog.graph.num_edges() {
        for z in centralizer(gog.vertex_slot(gog.graph.term(e)), gog.edge_image(e)) {
            out.push(SmallModularElement::dehn_twist(gog, e, z));
        }
    }
    out
}

/// Graph isomorphisms `a → b` respecting vertex and edge group kinds and the
/// extra vertex predicate `compatible`.
pub fn graph_isomorphisms(a: &GraphOfGroups, b: &GraphOfGroups, max_edges: usize, compatible: &dyn Fn(usize, usize) -> bool) -> Result<Vec<GraphMap>> {
    let (g, h) = (&a.graph, &b.graph);
    if g.num_edges() / 2 > max_edges || h.num_edges() / 2 > max_edges {
        return Err(Error::Resource(format!("graph map enumeration is capped at {max_edges} edges")));
    }
    let mut out = Vec::new();
    if g.num_vertices() != h.num_vertices() || g.num_edges() != h.num_edges() {
        return Ok(out);
    }
    let n = g.num_vertices();
    let mut vmap = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let ok = |v: usize, w: usize| a.vertex_slot(v) == b.vertex_slot(w) && g.star(v).len() == h.star(w).len() && compatible(v, w);
    fn vertices(i: usize, vmap: &mut Vec<usize>, used: &mut Vec<bool>, ok: &dyn Fn(usize, usize) -> bool, found: &mut dyn FnMut(&[usize])) {
        if i == vmap.len() {
            found(vmap);
            return;
        }
        for w in 0..vmap.len() {
            if !used[w] && ok(i, w) {
                used[w] = true;
                vmap[i] = w;
                vertices(i + 1, vmap, used, ok, found);
                used[w] = false;
            }
        }
    }
    let mut found = |vm: &[usize]| {
        let mut emap = vec![usize::MAX; g.num_edges()];
        let mut eused = vec![false; h.num_edges()];
        edges(a, b, vm, 0, &mut emap, &mut eused, &mut |em: &[usize]| out.push(GraphMap { vertices: vm.to_vec(), edges: em.to_vec() }));
    };
    vertices(0, &mut vmap, &mut used, &ok, &mut found);
    Ok(out)
}

fn edges(a: &GraphOfGroups, b: &GraphOfGroups, vm: &[usize], e: usize, emap: &mut Vec<usize>, used: &mut Vec<bool>, found: &mut dyn FnMut(&[usize])) {
    let (g, h) = (&a.graph, &b.graph);
    if e >= g.num_edges() {
        found(emap);
        return;
    }
    for f in 0..h.num_edges() {
        if used[f] || used[h.bar(f)] || a.edge_groups[e] != b.edge_groups[f] || h.init(f) != vm[g.init(e)] || h.term(f) != vm[g.term(e)] {
            continue;
        }
        used[f] = true;
        used[h.bar(f)] = true;
        emap[e] = f;
        emap[e + 1] = h.bar(f);
        edges(a, b, vm, e + 2, emap, used, found);
        used[f] = false;
        used[h.bar(f)] = false;
    }
}

/// `γ` with `xs = γ⁻¹·ys·γ` entrywise, when the tuples are simultaneously
/// conjugate.
pub(crate) fn tuple_conjugator(xs: &[Elem], ys: &[Elem]) -> Option<Elem> {
    if xs.len() != ys.len() || xs.iter().zip(ys).any(|(x, y)| x.c != y.c) {
        return None;
    }
    let hx: Vec<Word> = xs.iter().map(|x| x.h.clone()).collect();
    let hy: Vec<Word> = ys.iter().map(|y| y.h.clone()).collect();
    let (cx, gx) = canonical_tuple(&hx);
    let (cy, gy) = canonical_tuple(&hy);
    (cx == cy).then(|| Elem::free(&gy * &gx.inverse()))
}

/// Extends a graph map by identity vertex and edge maps, solving for the
/// conjugators `γ_e`; `None` when some edge admits no conjugator.
pub fn extend_identically(a: &GraphOfGroups, b: &GraphOfGroups, map: &GraphMap) -> Option<GoGMorphism> {
    let g = &a.graph;
    let mut gamma = Vec::new();
    for e in 0..g.num_edges() {
        let xs = a.edge_image(e);
        let f = map.edges[e];
        let ys = b.edge_image(f);
        gamma.push(tuple_conjugator(xs, ys)?);
    }
    let m = GoGMorphism {
        map: map.clone(),
        phi_v: a.vertex_groups.iter().map(|n| SlotMap::identity(n.slot)).collect(),
        phi_e: a.edge_groups.iter().map(|&s| SlotMap::identity(s)).collect(),
        gamma,
    };
    m.validate(a, b).ok().map(|_| m)
}

/// Graph isomorphisms that extend to isomorphisms of graphs of groups, each
/// with the witness extension produced by `extend`.
pub fn coset_reps_delta0(
    a: &GraphOfGroups,
    b: &GraphOfGroups,
    max_edges: usize,
    extend: &mut dyn FnMut(&GraphMap) -> Result<Option<GoGMorphism>>,
) -> Result<Vec<(GraphMap, GoGMorphism)>> {
    let mut out = Vec::new();
    for map in graph_isomorphisms(a, b, max_edges, &|_, _| true)? {
        if let Some(m) = extend(&map)? {
            m.validate(a, b)?;
            out.push((map, m));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOOP: &str = "
[vertices]
v: F a b
[edges]
e: v -> v Z
[injections]
e: a
~e: b a b'
";

    const TRIANGLE: &str = "
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

    fn el(gog: &GraphOfGroups, v: usize, s: &str) -> Elem {
        gog.vertex_groups[v].parse(s).unwrap()
    }

    #[test]
    fn validation_examples() {
        let g = GraphOfGroups::parse(LOOP).unwrap();
        let id = GoGMorphism::identity(&g);
        assert!(id.validate(&g, &g).is_ok());
        let twist = SmallModularElement::dehn_twist(&g, 0, el(&g, 0, "a^2"));
        twist.check(&g).unwrap();
        assert!(twist.to_morphism(&g).validate(&g, &g).is_ok());
        let mut bad = id.clone();
        bad.gamma[1] = el(&g, 0, "a");
        assert_eq!(bad.validate(&g, &g), Err(DiagramError::Edge { edge: "~e".into(), generator: 0 }));
    }

    #[test]
    fn composition_rule() {
        let g = GraphOfGroups::parse(LOOP).unwrap();
        let t = |s: &str| SmallModularElement::dehn_twist(&g, 0, el(&g, 0, s)).to_morphism(&g);
        let id = GoGMorphism::identity(&g);
        let x = t("a");
        assert_eq!(x.compose(&id, &g).unwrap(), x);
        assert_eq!(id.compose(&x, &g).unwrap(), x);
        assert_eq!(t("a^2").compose(&t("a^3"), &g).unwrap(), t("a^5"));
        let inv = x.inverse(&g, &g).unwrap();
        assert!(inv.validate(&g, &g).is_ok());
        assert!(x.compose(&inv, &g).unwrap().is_identity(&g));
        let conj = SmallModularElement { gamma_v: vec![el(&g, 0, "b")], gamma_e: vec![el(&g, 0, "b"), el(&g, 0, "b")] };
        conj.check(&g).unwrap();
        let c = conj.to_morphism(&g);
        let both = c.compose(&x, &g).unwrap();
        assert!(both.validate(&g, &g).is_ok());
        assert!(both.inverse(&g, &g).unwrap().compose(&both, &g).unwrap().is_identity(&g));
    }

    #[test]
    fn induced_maps() {
        let g = GraphOfGroups::parse(LOOP).unwrap();
        let w = BassWord::parse(&g, 0, "b e a").unwrap();
        let id = GoGMorphism::identity(&g);
        assert_eq!(id.induced_on_pi1(&g, &g, 0, &w).unwrap(), w);
        let x = SmallModularElement::dehn_twist(&g, 0, el(&g, 0, "a")).to_morphism(&g);
        assert_eq!(x.induced_on_pi1(&g, &g, 0, &w).unwrap(), BassWord::parse(&g, 0, "b e a a").unwrap());
        let back = BassWord::parse(&g, 0, "b e a ~e").unwrap();
        let img = x.induced_on_pi1(&g, &g, 0, &back).unwrap();
        assert_eq!(img, BassWord::parse(&g, 0, "b e a a a' ~e").unwrap());
        assert_eq!(img.edge_exponent(&g, 0), 0);
        assert!(x.induced_on_pi1(&g, &g, 0, &BassWord::edge(&g, 0)).is_ok());
    }

    #[test]
    fn small_modular_examples() {
        let g = GraphOfGroups::parse(LOOP).unwrap();
        let gens = small_modular_generators(&g);
        assert_eq!(gens.len(), 2);
        assert_eq!(gens[0].twist(), Some((0, &el(&g, 0, "a"))));
        assert_eq!(gens[1].twist(), Some((1, &el(&g, 0, "b a b'"))));
        let z2 = GraphOfGroups::parse("[vertices]\nv: Z2 a c\nw: Z2 x y\n[edges]\ne: v -> w Z2\n[injections]\ne: x, y\n~e: a, c\n").unwrap();
        let gens = small_modular_generators(&z2);
        assert_eq!(gens.len(), 4);
        for s in &gens {
            s.check(&z2).unwrap();
        }
        assert!(small_modular_generators(&GraphOfGroups::parse("[vertices]\nv: F a b\n").unwrap()).is_empty());
    }

    #[test]
    fn coset_representatives() {
        let tri = GraphOfGroups::parse(TRIANGLE).unwrap();
        let reps = coset_reps_delta0(&tri, &tri, 12, &mut |m| Ok(extend_identically(&tri, &tri, m))).unwrap();
        assert_eq!(reps.len(), 3);
        assert!(reps[0].0.is_identity());

        let pair = "[vertices]\nu: F a b\nv: F c d\n[edges]\ne: u -> v Z\n[injections]\ne: c\n~e: a\n";
        let g = GraphOfGroups::parse(pair).unwrap();
        let reps = coset_reps_delta0(&g, &g, 12, &mut |m| Ok(extend_identically(&g, &g, m))).unwrap();
        assert_eq!(reps.len(), 2);
        let g = GraphOfGroups::parse(&pair.replace("v: F c d", "v: F c d x")).unwrap();
        let reps = coset_reps_delta0(&g, &g, 12, &mut |m| Ok(extend_identically(&g, &g, m))).unwrap();
        assert_eq!(reps.len(), 1);
        let sym = "[vertices]\nu: F a b\nv: F c d\n[edges]\ne: u -> v Z\nf: v -> u Z\n[injections]\ne: c\n~e: a\nf: a\n~f: c\n";
        let g = GraphOfGroups::parse(sym).unwrap();
        let reps = coset_reps_delta0(&g, &g, 12, &mut |m| Ok(extend_identically(&g, &g, m))).unwrap();
        assert_eq!(reps.iter().filter(|(m, _)| m.vertices == vec![1, 0]).count(), 2);
        let uneven = sym.replace("v: F c d", "v: F c d x");
        let g = GraphOfGroups::parse(&uneven).unwrap();
        assert!(graph_isomorphisms(&g, &g, 12, &|_, _| true).unwrap().iter().all(|m| m.vertices == vec![0, 1]));
        assert!(graph_isomorphisms(&g, &g, 0, &|_, _| true).is_err());
    }
}
