use super::graph::GraphOfGroups;
use super::slot::Elem;
use crate::error::{domain_err, format_err, Result};

/// A path `g₀ e₁ g₁ … e_n g_n` in the Bass group: `g_j` lies in the vertex
/// group at the end of `e_j` (at `start` for `g₀`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BassWord {
    pub start: usize,
    pub elems: Vec<Elem>,
    pub edges: Vec<usize>,
}

impl BassWord {
    pub fn new(gog: &GraphOfGroups, start: usize, elems: Vec<Elem>, edges: Vec<usize>) -> Result<BassWord> {
        let w = BassWord { start, elems, edges };
        w.check(gog)?;
        Ok(w)
    }

    pub fn trivial(start: usize) -> BassWord {
        BassWord { start, elems: vec![Elem::identity()], edges: Vec::new() }
    }

    pub fn vertex_elem(start: usize, g: Elem) -> BassWord {
        BassWord { start, elems: vec![g], edges: Vec::new() }
    }

    /// The single edge `e` as a path from `i(e)` to `t(e)`.
    pub fn edge(gog: &GraphOfGroups, e: usize) -> BassWord {
        BassWord { start: gog.graph.init(e), elems: vec![Elem::identity(); 2], edges: vec![e] }
    }

    pub fn check(&self, gog: &GraphOfGroups) -> Result<()> {
        let g = &gog.graph;
        if self.elems.len() != self.edges.len() + 1 || self.start >= g.num_vertices() || self.edges.iter().any(|&e| e >= g.num_edges()) {
            return domain_err("malformed Bass word");
        }
        let mut v = self.start;
        for (j, x) in self.elems.iter().enumerate() {
            if j > 0 {
                let e = self.edges[j - 1];
                if g.init(e) != v {
                    return domain_err(format!("edge {} does not start at {}", g.edge_name(e), g.vertex_name(v)));
                }
                v = g.term(e);
            }
            if !gog.vertex_slot(v).contains(x) {
                return domain_err(format!("element does not lie in the group of {}", g.vertex_name(v)));
            }
        }
        Ok(())
    }

    /// Vertex carrying `elems[j]`.
    pub fn vertex_at(&self, gog: &GraphOfGroups, j: usize) -> usize {
        if j == 0 {
            self.start
        } else {
            gog.graph.term(self.edges[j - 1])
        }
    }

    pub fn end(&self, gog: &GraphOfGroups) -> usize {
        self.vertex_at(gog, self.edges.len())
    }

    pub fn is_loop_at(&self, gog: &GraphOfGroups, v: usize) -> bool {
        self.start == v && self.end(gog) == v
    }

    pub fn mul(&self, gog: &GraphOfGroups, other: &BassWord) -> Result<BassWord> {
        if self.end(gog) != other.start {
            return domain_err("paths do not concatenate");
        }
        let mut elems = self.elems.clone();
        let last = elems.pop().unwrap().mul(&other.elems[0]);
        elems.push(last);
        elems.extend(other.elems[1..].iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(&other.edges);
        Ok(BassWord { start: self.start, elems, edges })
    }

    pub fn inverse(&self, gog: &GraphOfGroups) -> BassWord {
        BassWord {
            start: self.end(gog),
            elems: self.elems.iter().rev().map(Elem::inverse).collect(),
            edges: self.edges.iter().rev().map(|&e| gog.graph.bar(e)).collect(),
        }
    }

    pub fn pow(&self, gog: &GraphOfGroups, n: i64) -> Result<BassWord> {
        let base = if n < 0 { self.inverse(gog) } else { self.clone() };
        let mut out = BassWord::trivial(base.start);
        for _ in 0..n.unsigned_abs() {
            out = out.mul(gog, &base)?;
        }
        Ok(out)
    }

    /// Rewrites `ē·i_ē(g)·e → i_e(g)` eagerly from the left.
    pub fn reduce(&self, gog: &GraphOfGroups) -> BassWord {
        let mut elems = vec![self.elems[0].clone()];
        let mut edges: Vec<usize> = Vec::new();
        for (&e, y) in self.edges.iter().zip(&self.elems[1..]) {
            if let Some(&f) = edges.last() {
                if e == gog.graph.bar(f) {
                    let x = elems.last().unwrap();
                    if let Some(p) = gog.injections[f].preimage(gog.edge_groups[f], x) {
                        elems.pop();
                        edges.pop();
                        let merged = elems.pop().unwrap().mul(&gog.injections[e].apply(&p)).mul(y);
                        elems.push(merged);
                        continue;
                    }
                }
            }
            edges.push(e);
            elems.push(y.clone());
        }
        BassWord { start: self.start, elems, edges }
    }

    /// Crossings of `e` minus crossings of `ē`.
    pub fn edge_exponent(&self, gog: &GraphOfGroups, e: usize) -> i64 {
        let b = gog.graph.bar(e);
        self.edges.iter().map(|&f| (f == e) as i64 - (f == b) as i64).sum()
    }

    /// Whitespace separated tokens; tokens naming edges are edges, the rest
    /// are words in the current vertex group.
    pub fn parse(gog: &GraphOfGroups, start: usize, text: &str) -> Result<BassWord> {
        let g = &gog.graph;
        let mut elems = Vec::new();
        let mut edges = Vec::new();
        let mut chunk: Vec<&str> = Vec::new();
        let mut v = start;
        let flush = |chunk: &mut Vec<&str>, v: usize| -> Result<Elem> {
            let s = chunk.join(" ");
            chunk.clear();
            if s.is_empty() {
                Ok(Elem::identity())
            } else {
                gog.vertex_groups[v].parse(&s)
            }
        };
        for tok in text.split_whitespace() {
            match g.edge(tok) {
                Some(e) => {
                    elems.push(flush(&mut chunk, v)?);
                    if g.init(e) != v {
                        return format_err(format!("edge {tok} does not start at {}", g.vertex_name(v)));
                    }
                    edges.push(e);
                    v = g.term(e);
                }
                None => chunk.push(tok),
            }
        }
        elems.push(flush(&mut chunk, v)?);
        BassWord::new(gog, start, elems, edges)
    }

    pub fn format(&self, gog: &GraphOfGroups) -> String {
        let mut parts = Vec::new();
        for (j, x) in self.elems.iter().enumerate() {
            if j > 0 {
                parts.push(gog.graph.edge_name(self.edges[j - 1]).to_string());
            }
            if !x.is_identity() {
                parts.push(gog.vertex_groups[self.vertex_at(gog, j)].format(x));
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}
