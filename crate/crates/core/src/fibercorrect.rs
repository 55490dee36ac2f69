//! Abelianizations, orientation functionals and the integer linear system
//! deciding whether small modular twists can push fiber images back into
//! the fiber.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{domain_err, format_err, Error, Result};
use crate::gog::{key_value, BassWord, Elem, GoGMorphism, GraphOfGroups, Presentation, SmallModularElement};
use crate::intlin::{parse_rows, smith_invariants, solve as solve_linear, BigMatrix, Matrix};

/// `Z^gens / ⟨rows of relations⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianModule {
    pub generators: Vec<String>,
    pub relations: BigMatrix,
}

impl AbelianModule {
    /// Invariant factors of the relation lattice, padded by zeros for the
    /// free part; two modules are isomorphic iff these agree.
    pub fn invariants(&self) -> Vec<BigInt> {
        let mut d: Vec<BigInt> = smith_invariants(&self.relations).into_iter().filter(|x| *x != BigInt::from(1)).collect();
        let free = self.generators.len() - smith_invariants(&self.relations).len();
        d.extend(std::iter::repeat(BigInt::zero()).take(free));
        d
    }
}

pub fn abelianize(p: &Presentation) -> AbelianModule {
    let n = p.num_gens();
    let rows: Vec<Vec<BigInt>> = p.relators.iter().map(|r| r.exponent_sums(n).into_iter().map(BigInt::from).collect()).collect();
    AbelianModule { generators: p.names.clone(), relations: Matrix::from_rows(rows, n).expect("uniform rows") }
}

/// An integer valued homomorphism on the Bass group: values on vertex
/// generators and on oriented edges, with `o(ē) = -o(e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    pub vertex: Vec<Vec<i64>>,
    pub edge: Vec<i64>,
}

impl Orientation {
    pub fn zero(gog: &GraphOfGroups) -> Orientation {
        Orientation { vertex: gog.vertex_groups.iter().map(|n| vec![0; n.names.len()]).collect(), edge: vec![0; gog.graph.num_edges()] }
    }

    /// Lines `name: value` for generator or edge names; unlisted names are 0.
    pub fn parse(gog: &GraphOfGroups, lines: &[String]) -> Result<Orientation> {
        let mut o = Orientation::zero(gog);
        for line in lines {
            let (name, val) = key_value(line)?;
            let val: i64 = val.parse().map_err(|_| Error::Format(format!("bad orientation value in {line:?}")))?;
            if let Some(e) = gog.graph.edge(name) {
                o.edge[e] = val;
                o.edge[gog.graph.bar(e)] = -val;
                continue;
            }
            let hit = gog.vertex_groups.iter().enumerate().find_map(|(v, n)| n.names.iter().position(|x| x == name).map(|i| (v, i)));
            match hit {
                Some((v, i)) => o.vertex[v][i] = val,
                None => return format_err(format!("unknown name {name:?} in orientation")),
            }
        }
        o.check(gog)?;
        Ok(o)
    }

    pub fn to_lines(&self, gog: &GraphOfGroups) -> Vec<String> {
        let mut out = Vec::new();
        for (v, n) in gog.vertex_groups.iter().enumerate() {
            for (i, name) in n.names.iter().enumerate() {
                if self.vertex[v][i] != 0 {
                    out.push(format!("{name}: {}", self.vertex[v][i]));
                }
            }
        }
        for e in (0..gog.graph.num_edges()).step_by(2) {
            if self.edge[e] != 0 {
                out.push(format!("{}: {}", gog.graph.edge_name(e), self.edge[e]));
            }
        }
        out
    }

    /// Well defined on the Bass group: `o(ē) = -o(e)` and
    /// `o(i_ē(g)) = o(i_e(g))` for edge generators `g`.
    pub fn check(&self, gog: &GraphOfGroups) -> Result<()> {
        let g = &gog.graph;
        for e in 0..g.num_edges() {
            if self.edge[e] != -self.edge[g.bar(e)] {
                return domain_err(format!("orientation is not odd on edge {}", g.edge_name(e)));
            }
            for (i, x) in gog.edge_groups[e].gens().iter().enumerate() {
                let a = self.elem(g.term(e), &gog.injections[e].apply(x));
                let b = self.elem(g.init(e), &gog.injections[g.bar(e)].apply(x));
                if a != b {
                    return domain_err(format!("orientation disagrees across edge {} on generator {i}", g.edge_name(e)));
                }
            }
        }
        Ok(())
    }

    pub fn elem(&self, v: usize, x: &Elem) -> i64 {
        let vals = &self.vertex[v];
        let h: i64 = x.h.letters().iter().map(|l| l.sign() * vals[l.gen]).sum();
        let c = if x.c != 0 { x.c * vals[vals.len() - 1] } else { 0 };
        h + c
    }

    pub fn eval(&self, gog: &GraphOfGroups, w: &BassWord) -> i64 {
        let elems: i64 = w.elems.iter().enumerate().map(|(j, x)| self.elem(w.vertex_at(gog, j), x)).sum();
        elems + w.edges.iter().map(|&e| self.edge[e]).sum::<i64>()
    }

    /// Values on the generators of `pres` (vertex generators, then edges off
    /// the tree, each read as its standard loop).
    pub fn on_presentation(&self, gog: &GraphOfGroups, pres: &Presentation) -> Vec<i64> {
        let pot = potentials(gog, &self.edge);
        let mut out: Vec<i64> = self.vertex.iter().flatten().copied().collect();
        for e in (0..gog.graph.num_edges()).step_by(2) {
            if !gog.in_tree(e) {
                out.push(self.edge[e] + pot[gog.graph.init(e)] - pot[gog.graph.term(e)]);
            }
        }
        debug_assert_eq!(out.len(), pres.num_gens());
        out
    }
}

/// Sum of `values` along the tree path from vertex 0 to each vertex.
fn potentials(gog: &GraphOfGroups, values: &[i64]) -> Vec<i64> {
    let paths = tree_paths(gog);
    paths.iter().map(|p| p.iter().map(|&e| values[e]).sum()).collect()
}

/// Oriented tree edges from vertex 0 to each vertex.
pub fn tree_paths(gog: &GraphOfGroups) -> Vec<Vec<usize>> {
    let g = &gog.graph;
    let mut paths: Vec<Option<Vec<usize>>> = vec![None; g.num_vertices()];
    paths[0] = Some(Vec::new());
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for e in g.star(v) {
            let w = g.term(e);
            if gog.in_tree(e) && paths[w].is_none() {
                let mut p = paths[v].clone().unwrap();
                p.push(e);
                paths[w] = Some(p);
                stack.push(w);
            }
        }
    }
    paths.into_iter().map(|p| p.expect("spanning tree")).collect()
}

/// The loops at vertex 0 standing for the generators of `pres`.
pub fn generator_loops(gog: &GraphOfGroups) -> Vec<BassWord> {
    let g = &gog.graph;
    let paths = tree_paths(gog);
    let path_word = |v: usize| -> BassWord {
        let mut w = BassWord::trivial(0);
        for &e in &paths[v] {
            w = w.mul(gog, &BassWord::edge(gog, e)).unwrap();
        }
        w
    };
    let mut out = Vec::new();
    for (v, n) in gog.vertex_groups.iter().enumerate() {
        let p = path_word(v);
        for x in n.slot.gens() {
            let mid = p.mul(gog, &BassWord::vertex_elem(v, x)).unwrap();
            out.push(mid.mul(gog, &p.inverse(gog)).unwrap());
        }
    }
    for e in (0..g.num_edges()).step_by(2) {
        if !gog.in_tree(e) {
            let w = path_word(g.init(e)).mul(gog, &BassWord::edge(gog, e)).unwrap();
            out.push(w.mul(gog, &path_word(g.term(e)).inverse(gog)).unwrap());
        }
    }
    out
}

/// Row `j` is the abelianized image of generator `j` under `m`.
pub fn induced_matrix(m: &GoGMorphism, gog: &GraphOfGroups, pres: &Presentation) -> Result<BigMatrix> {
    let n = pres.num_gens();
    let mut rows = Vec::new();
    for l in generator_loops(gog) {
        let img = m.apply(gog, gog, &l)?;
        rows.push(pres.word_of(gog, &img).exponent_sums(n).into_iter().map(BigInt::from).collect());
    }
    Matrix::from_rows(rows, n)
}

/// The action of a small modular element on `Z^gens`, rows as images.
pub fn transvection_matrix(twist: &SmallModularElement, gog: &GraphOfGroups, pres: &Presentation) -> Result<BigMatrix> {
    twist.check(gog)?;
    induced_matrix(&twist.to_morphism(gog), gog, pres)
}

/// `A·x = b` over the integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiophantineSystem {
    pub a: BigMatrix,
    pub b: Vec<BigInt>,
}

impl DiophantineSystem {
    /// An `A:` line followed by matrix rows, then a `b:` line with the
    /// right hand side.
    pub fn parse(text: &str) -> Result<DiophantineSystem> {
        let t = text.trim_start();
        let Some(rest) = t.strip_prefix("A:") else {
            return format_err("system must start with `A:`");
        };
        let Some((a_text, b_text)) = rest.split_once("b:") else {
            return format_err("system is missing the `b:` line");
        };
        let rows = parse_rows(a_text)?;
        let b = parse_rows(b_text)?.into_iter().flatten().collect::<Vec<_>>();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.len() != b.len() {
            return format_err(format!("{} rows but {} right hand sides", rows.len(), b.len()));
        }
        Ok(DiophantineSystem { a: Matrix::from_rows(rows, cols)?, b })
    }

    pub fn to_text(&self) -> String {
        let b: Vec<String> = self.b.iter().map(ToString::to_string).collect();
        format!("A:\n{}b: {}\n", self.a, b.join(" "))
    }
}

pub fn solve(sys: &DiophantineSystem) -> Option<Vec<BigInt>> {
    if sys.a.cols() == 0 {
        return sys.b.iter().all(Zero::is_zero).then(Vec::new);
    }
    solve_linear(&sys.a, &sys.b).map(|(x, _)| x)
}

/// Rows `Σ_t n_{e_t}(w_i)·o(z_t)·x_t = target_i − o(w_i)` over single Dehn
/// twists `(e_t, z_t)`.
pub fn build_system_with_targets(loops: &[BassWord], targets: &[i64], twists: &[SmallModularElement], o: &Orientation, gog: &GraphOfGroups) -> Result<DiophantineSystem> {
    let mut data = Vec::new();
    for t in twists {
        let Some((e, z)) = t.twist() else {
            return domain_err("only single Dehn twists enter the system");
        };
        data.push((e, o.elem(gog.graph.term(e), z)));
    }
    let rows: Vec<Vec<BigInt>> = loops.iter().map(|w| data.iter().map(|&(e, oz)| BigInt::from(w.edge_exponent(gog, e) * oz)).collect()).collect();
    let b = loops.iter().zip(targets).map(|(w, &t)| BigInt::from(t - o.eval(gog, w))).collect();
    Ok(DiophantineSystem { a: Matrix::from_rows(rows, twists.len())?, b })
}

/// The fiber system: every `w_i` must land in `ker o`.
pub fn build_system(loops: &[BassWord], twists: &[SmallModularElement], o: &Orientation, gog: &GraphOfGroups) -> Result<DiophantineSystem> {
    build_system_with_targets(loops, &vec![0; loops.len()], twists, o, gog)
}

/// The small modular element `∏ twist_t^{x_t}` as a morphism.
pub fn twist_product(twists: &[SmallModularElement], x: &[BigInt], gog: &GraphOfGroups) -> Result<GoGMorphism> {
    let mut m = GoGMorphism::identity(gog);
    for (t, k) in twists.iter().zip(x) {
        let Some((e, z)) = t.twist() else {
            return domain_err("only single Dehn twists can be raised to powers");
        };
        let k = k.to_i64().ok_or_else(|| Error::Resource("twist multiplicity out of range".into()))?;
        let step = SmallModularElement::dehn_twist(gog, e, z.pow(k)).to_morphism(gog);
        m = step.compose(&m, gog)?;
    }
    Ok(m)
}
