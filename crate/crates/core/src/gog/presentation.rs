use super::bass::BassWord;
use super::graph::GraphOfGroups;
use super::slot::Elem;
use crate::error::{domain_err, Result};
use crate::freegroup::{Letter, Word};

/// A finite presentation of the fundamental group of a graph of groups:
/// vertex generators followed by one generator per edge outside the tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub names: Vec<String>,
    pub relators: Vec<Word>,
    offsets: Vec<usize>,
    edge_gen: Vec<Option<usize>>,
}

impl Presentation {
    pub fn num_gens(&self) -> usize {
        self.names.len()
    }

    fn elem_word(&self, v: usize, x: &Elem) -> Word {
        let o = self.offsets[v];
        let rank = self.offsets[v + 1] - o;
        let mut letters: Vec<Letter> = x.h.letters().iter().map(|l| Letter { gen: l.gen + o, inv: l.inv }).collect();
        let c = Letter::pos(o + rank - 1);
        let cl = if x.c < 0 { c.inverse() } else { c };
        letters.extend(std::iter::repeat(cl).take(x.c.unsigned_abs() as usize));
        Word::from_letters(letters)
    }

    fn edge_word(&self, e: usize) -> Word {
        match self.edge_gen[e & !1] {
            None => Word::identity(),
            Some(g) if e % 2 == 0 => Word::gen(g),
            Some(g) => Word::gen(g).inverse(),
        }
    }

    /// The word of a Bass path after collapsing the tree.
    pub fn word_of(&self, gog: &GraphOfGroups, w: &BassWord) -> Word {
        let mut out = self.elem_word(w.start, &w.elems[0]);
        for (j, &e) in w.edges.iter().enumerate() {
            out = out * self.edge_word(e);
            out = out * self.elem_word(gog.graph.term(e), &w.elems[j + 1]);
        }
        out
    }
}

pub fn pi1_presentation(gog: &GraphOfGroups, tree: &[usize]) -> Result<Presentation> {
    let g = &gog.graph;
    if tree.iter().any(|&e| !g.is_positive(e)) || !g.is_spanning_tree(tree) {
        return domain_err("not a spanning tree");
    }
    let mut names = Vec::new();
    let mut offsets = vec![0];
    for v in &gog.vertex_groups {
        names.extend(v.names.iter().cloned());
        offsets.push(names.len());
    }
    let mut edge_gen = vec![None; g.num_edges()];
    for e in (0..g.num_edges()).step_by(2) {
        if !tree.contains(&e) {
            edge_gen[e] = Some(names.len());
            names.push(g.edge_name(e).to_string());
        }
    }
    let mut p = Presentation { names, relators: Vec::new(), offsets, edge_gen };
    for (v, n) in gog.vertex_groups.iter().enumerate() {
        if n.slot.has_center() {
            let z = n.slot.gen(n.slot.rank());
            for i in 0..n.slot.rank() {
                let x = p.elem_word(v, &n.slot.gen(i));
                let zw = p.elem_word(v, &z);
                p.relators.push(&(&(&x * &zw) * &x.inverse()) * &zw.inverse());
            }
        }
    }
    for e in (0..g.num_edges()).step_by(2) {
        let b = g.bar(e);
        let ew = p.edge_word(e);
        for x in gog.edge_groups[e].gens() {
            let left = p.elem_word(g.term(b), &gog.injections[b].apply(&x));
            let right = p.elem_word(g.term(e), &gog.injections[e].apply(&x));
            let rel = &(&(&ew.inverse() * &left) * &ew) * &right.inverse();
            if !rel.is_identity() {
                p.relators.push(rel);
            }
        }
    }
    Ok(p)
}
