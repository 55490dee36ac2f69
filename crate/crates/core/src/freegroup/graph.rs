use std::collections::{HashMap, VecDeque};
use std::fmt;

use super::{Letter, Word};
use crate::error::{format_err, Error, Result};

/// A folded, connected, based graph labelled by the generators of a free
/// group. Transitions are stored in both directions; `out[s][g] = Some(t)`
/// iff `inn[t][g] = Some(s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubgroupGraph {
    rank: usize,
    base: usize,
    out: Vec<Vec<Option<usize>>>,
    inn: Vec<Vec<Option<usize>>>,
}

#[derive(Clone, Debug)]
struct RawEdge {
    from: usize,
    to: usize,
    gen: usize,
    tag: Word,
}

/// Stallings folding with optional Nielsen tracking. When tracking, every
/// edge carries a word `u` in the formal input generators `y_j` such that
/// `φ(u) = ℓ(from)·gen·ℓ(to)⁻¹` for some vertex potential `ℓ` with `ℓ(base) = 1`
/// (`φ` sends `y_j` to the j-th input word). Any base loop then reads a word
/// whose tag product maps to it under `φ`.
struct Folder {
    rank: usize,
    base: usize,
    edges: Vec<Option<RawEdge>>,
    incident: Vec<Vec<usize>>,
    alive: Vec<bool>,
    track: bool,
}

impl Folder {
    fn new(rank: usize, track: bool) -> Self {
        Folder { rank, base: 0, edges: Vec::new(), incident: vec![Vec::new()], alive: vec![true], track }
    }

    fn add_state(&mut self) -> usize {
        self.incident.push(Vec::new());
        self.alive.push(true);
        self.incident.len() - 1
    }

    fn add_edge(&mut self, from: usize, to: usize, gen: usize, tag: Word) {
        let id = self.edges.len();
        self.edges.push(Some(RawEdge { from, to, gen, tag }));
        self.incident[from].push(id);
        if to != from {
            self.incident[to].push(id);
        }
    }

    /// Adds a petal at the base reading `w`, tagged by formal generator `j`.
    fn add_petal(&mut self, w: &Word, j: usize) {
        let n = w.len();
        if n == 0 {
            return;
        }
        let mut cur = self.base;
        for (k, l) in w.letters().iter().enumerate() {
            let next = if k + 1 == n { self.base } else { self.add_state() };
            let tag = if k == 0 && self.track { Word::gen(j) } else { Word::identity() };
            if l.inv {
                self.add_edge(next, cur, l.gen, tag.inverse());
            } else {
                self.add_edge(cur, next, l.gen, tag);
            }
            cur = next;
        }
    }

    /// Half-edges leaving `s`: (edge id, signed label, far end, traversal tag).
    fn half_edges(&self, s: usize) -> Vec<(usize, Letter, usize)> {
        let mut v = Vec::new();
        for &id in &self.incident[s] {
            let e = self.edges[id].as_ref().unwrap();
            if e.from == s {
                v.push((id, Letter::pos(e.gen), e.to));
            }
            if e.to == s {
                v.push((id, Letter::neg(e.gen), e.from));
            }
        }
        v
    }

    fn traversal_tag(&self, id: usize, l: Letter) -> Word {
        let t = &self.edges[id].as_ref().unwrap().tag;
        if l.inv {
            t.inverse()
        } else {
            t.clone()
        }
    }

    /// Merges state `q2` into `q1` after conjugating its incident tags by `c`.
    fn merge(&mut self, q1: usize, q2: usize, c: &Word) {
        let inc = std::mem::take(&mut self.incident[q2]);
        for id in inc {
            let e = self.edges[id].as_mut().unwrap();
            if self.track && !c.is_identity() {
                if e.from == q2 {
                    e.tag = c * &e.tag;
                }
                if e.to == q2 {
                    e.tag = &e.tag * &c.inverse();
                }
            }
            let was_loop_at_q1 = e.from == q1 || e.to == q1;
            if e.from == q2 {
                e.from = q1;
            }
            if e.to == q2 {
                e.to = q1;
            }
            if !was_loop_at_q1 {
                self.incident[q1].push(id);
            }
        }
        self.alive[q2] = false;
    }

    fn remove_edge(&mut self, id: usize) {
        let e = self.edges[id].take().unwrap();
        self.incident[e.from].retain(|&x| x != id);
        if e.to != e.from {
            self.incident[e.to].retain(|&x| x != id);
        }
    }

    fn fold_all(&mut self) {
        let mut queue: VecDeque<usize> = (0..self.incident.len()).collect();
        while let Some(p) = queue.pop_front() {
            if !self.alive[p] {
                continue;
            }
            let mut seen: HashMap<Letter, (usize, usize)> = HashMap::new();
            for (id, l, q) in self.half_edges(p) {
                if let Some(&(id1, q1)) = seen.get(&l) {
                    if id1 == id {
                        continue;
                    }
                    let (keep_q, drop_q, keep_id, drop_id) = if q == self.base { (q, q1, id, id1) } else { (q1, q, id1, id) };
                    if keep_q != drop_q {
                        // conjugator making the dropped edge's tag match the kept one
                        let c = if self.track {
                            let u_keep = self.traversal_tag(keep_id, l);
                            let u_drop = self.traversal_tag(drop_id, l);
                            &u_keep.inverse() * &u_drop
                        } else {
                            Word::identity()
                        };
                        self.merge(keep_q, drop_q, &c);
                    }
                    self.remove_edge(drop_id);
                    queue.push_back(p);
                    queue.push_back(keep_q);
                    break;
                }
                seen.insert(l, (id, q));
            }
        }
    }

    fn prune(&mut self) {
        let mut queue: VecDeque<usize> = (0..self.incident.len()).collect();
        while let Some(s) = queue.pop_front() {
            if s == self.base || !self.alive[s] {
                continue;
            }
            let deg: usize = self.incident[s]
                .iter()
                .map(|&id| {
                    let e = self.edges[id].as_ref().unwrap();
                    if e.from == e.to {
                        2
                    } else {
                        1
                    }
                })
                .sum();
            if deg <= 1 {
                for id in self.incident[s].clone() {
                    let e = self.edges[id].as_ref().unwrap();
                    let other = if e.from == s { e.to } else { e.from };
                    self.remove_edge(id);
                    queue.push_back(other);
                }
                self.alive[s] = false;
            }
        }
    }

    fn finish(self) -> (SubgroupGraph, Vec<Vec<Option<Word>>>) {
        let mut map = vec![usize::MAX; self.alive.len()];
        let mut n = 0;
        // base first so that it gets index 0
        map[self.base] = 0;
        n += 1;
        for (s, &a) in self.alive.iter().enumerate() {
            if a && s != self.base {
                map[s] = n;
                n += 1;
            }
        }
        let mut out = vec![vec![None; self.rank]; n];
        let mut inn = vec![vec![None; self.rank]; n];
        let mut tags = vec![vec![None; self.rank]; n];
        for e in self.edges.into_iter().flatten() {
            let (a, b) = (map[e.from], map[e.to]);
            out[a][e.gen] = Some(b);
            inn[b][e.gen] = Some(a);
            tags[a][e.gen] = Some(e.tag);
        }
        (SubgroupGraph { rank: self.rank, base: 0, out, inn }, tags)
    }
}

/// Result of a tracked fold: the core graph plus, for each out-transition, a
/// word in the formal input generators (see [`fold_tracked`]).
#[derive(Clone, Debug)]
pub struct TrackedFold {
    pub graph: SubgroupGraph,
    pub tags: Vec<Vec<Option<Word>>>,
}

impl TrackedFold {
    /// Expresses a member `w` as a word in the input generators `y_j`.
    pub fn express(&self, w: &Word) -> Option<Word> {
        let mut s = self.graph.base;
        let mut acc = Word::identity();
        for l in w.letters() {
            if l.inv {
                let t = self.graph.inn[s][l.gen]?;
                acc = &acc * &self.tags[t][l.gen].as_ref().unwrap().inverse();
                s = t;
            } else {
                let t = self.graph.out[s][l.gen]?;
                acc = &acc * self.tags[s][l.gen].as_ref().unwrap();
                s = t;
            }
        }
        (s == self.graph.base).then_some(acc)
    }
}

fn fold_inner(rank: usize, gens: &[Word], track: bool) -> Folder {
    let mut f = Folder::new(rank, track);
    for (j, w) in gens.iter().enumerate() {
        f.add_petal(w, j);
    }
    f.fold_all();
    f.prune();
    f
}

/// Folds the subgroup generated by `gens`. The empty generating set is
/// rejected: pass the identity word explicitly for the trivial subgroup.
pub fn fold(rank: usize, gens: &[Word]) -> Result<SubgroupGraph> {
    if gens.is_empty() {
        return Err(Error::Domain("fold needs at least one generator".into()));
    }
    check_rank(rank, gens)?;
    Ok(fold_inner(rank, gens, false).finish().0)
}

/// Folds while tracking how each transition is expressed in the generators.
pub fn fold_tracked(rank: usize, gens: &[Word]) -> Result<TrackedFold> {
    check_rank(rank, gens)?;
    let (graph, tags) = fold_inner(rank, gens, true).finish();
    Ok(TrackedFold { graph, tags })
}

fn check_rank(rank: usize, gens: &[Word]) -> Result<()> {
    if let Some(w) = gens.iter().find(|w| w.support_rank() > rank) {
        return Err(Error::Domain(format!("word {w} uses a generator beyond rank {rank}")));
    }
    Ok(())
}

impl SubgroupGraph {
    /// The whole free group: a rose with one petal per generator.
    pub fn whole(rank: usize) -> Self {
        SubgroupGraph { rank, base: 0, out: vec![(0..rank).map(|_| Some(0)).collect()], inn: vec![(0..rank).map(|_| Some(0)).collect()] }
    }

    pub fn trivial(rank: usize) -> Self {
        SubgroupGraph { rank, base: 0, out: vec![vec![None; rank]], inn: vec![vec![None; rank]] }
    }

    /// Builds the graph of a permutation action (`perms[g][p]` is the image of
    /// point `p` under generator `g`, acting on the right), based at point 0.
    /// Only the orbit of 0 is kept.
    pub fn from_action(perms: &[Vec<usize>]) -> Self {
        let rank = perms.len();
        let d = perms.first().map_or(1, |p| p.len());
        let mut out = vec![vec![None; rank]; d];
        let mut inn = vec![vec![None; rank]; d];
        for (g, p) in perms.iter().enumerate() {
            for (s, &t) in p.iter().enumerate() {
                out[s][g] = Some(t);
                inn[t][g] = Some(s);
            }
        }
        SubgroupGraph { rank, base: 0, out, inn }.restricted_to_base_component()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn num_states(&self) -> usize {
        self.out.len()
    }

    pub fn out(&self, s: usize, g: usize) -> Option<usize> {
        self.out[s][g]
    }

    pub fn inn(&self, s: usize, g: usize) -> Option<usize> {
        self.inn[s][g]
    }

    pub fn step(&self, s: usize, l: Letter) -> Option<usize> {
        if l.inv {
            self.inn[s][l.gen]
        } else {
            self.out[s][l.gen]
        }
    }

    pub fn read(&self, start: usize, w: &Word) -> Option<usize> {
        w.letters().iter().try_fold(start, |s, &l| self.step(s, l))
    }

    /// True iff `w` labels a loop at the base.
    pub fn contains(&self, w: &Word) -> bool {
        self.read(self.base, w) == Some(self.base)
    }

    pub fn num_edges(&self) -> usize {
        self.out.iter().map(|r| r.iter().filter(|x| x.is_some()).count()).sum()
    }

    /// Rank of the represented subgroup (first Betti number of the graph).
    pub fn subgroup_rank(&self) -> usize {
        self.num_edges() + 1 - self.num_states()
    }

    pub fn is_complete(&self) -> bool {
        self.out.iter().all(|r| r.iter().all(Option::is_some))
    }

    /// Index in the ambient free group, when finite.
    pub fn index(&self) -> Option<usize> {
        self.is_complete().then_some(self.num_states())
    }

    pub fn is_whole(&self) -> bool {
        self.index() == Some(1)
    }

    /// BFS spanning tree from the base: `paths[s]` reads from base to `s`.
    pub fn tree_paths(&self) -> Vec<Word> {
        let mut paths: Vec<Option<Word>> = vec![None; self.num_states()];
        paths[self.base] = Some(Word::identity());
        let mut queue = VecDeque::from([self.base]);
        while let Some(s) = queue.pop_front() {
            let ps = paths[s].clone().unwrap();
            for g in 0..self.rank {
                for l in [Letter::pos(g), Letter::neg(g)] {
                    if let Some(t) = self.step(s, l) {
                        if paths[t].is_none() {
                            paths[t] = Some(&ps * &Word::letter(l));
                            queue.push_back(t);
                        }
                    }
                }
            }
        }
        paths.into_iter().map(|p| p.expect("graph is connected")).collect()
    }

    /// A free basis of the subgroup, one word per non-tree edge.
    pub fn generators(&self) -> Vec<Word> {
        let paths = self.tree_paths();
        let mut tree_edge = vec![vec![false; self.rank]; self.num_states()];
        for t in 0..self.num_states() {
            if t == self.base {
                continue;
            }
            if let Some(l) = paths[t].last() {
                let prev = self.step(t, l.inverse()).unwrap();
                if l.inv {
                    tree_edge[t][l.gen] = true;
                } else {
                    tree_edge[prev][l.gen] = true;
                }
            }
        }
        let mut gens = Vec::new();
        for s in 0..self.num_states() {
            for g in 0..self.rank {
                if let Some(t) = self.out[s][g] {
                    if !tree_edge[s][g] {
                        gens.push(&(&paths[s] * &Word::gen(g)) * &paths[t].inverse());
                    }
                }
            }
        }
        gens
    }

    fn restricted_to_base_component(&self) -> Self {
        let paths_reach = {
            let mut seen = vec![false; self.num_states()];
            seen[self.base] = true;
            let mut q = VecDeque::from([self.base]);
            while let Some(s) = q.pop_front() {
                for g in 0..self.rank {
                    for t in [self.out[s][g], self.inn[s][g]].into_iter().flatten() {
                        if !seen[t] {
                            seen[t] = true;
                            q.push_back(t);
                        }
                    }
                }
            }
            seen
        };
        let mut map = vec![usize::MAX; self.num_states()];
        let mut order = vec![self.base];
        order.extend((0..self.num_states()).filter(|&s| s != self.base && paths_reach[s]));
        for (i, &s) in order.iter().enumerate() {
            map[s] = i;
        }
        let remap = |row: &Vec<Option<usize>>| row.iter().map(|x| x.map(|t| map[t])).collect::<Vec<_>>();
        SubgroupGraph {
            rank: self.rank,
            base: 0,
            out: order.iter().map(|&s| remap(&self.out[s])).collect(),
            inn: order.iter().map(|&s| remap(&self.inn[s])).collect(),
        }
    }

    /// Renumbers states in BFS order from the base (generator order, outgoing
    /// before incoming). Two based folded graphs are isomorphic iff their
    /// canonical forms are equal.
    pub fn canonical(&self) -> Self {
        self.canonical_from(self.base)
    }

    fn canonical_from(&self, start: usize) -> Self {
        let n = self.num_states();
        let mut map = vec![usize::MAX; n];
        let mut order = vec![start];
        map[start] = 0;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            i += 1;
            for g in 0..self.rank {
                for t in [self.out[s][g], self.inn[s][g]].into_iter().flatten() {
                    if map[t] == usize::MAX {
                        map[t] = order.len();
                        order.push(t);
                    }
                }
            }
        }
        let remap = |row: &Vec<Option<usize>>| row.iter().map(|x| x.map(|t| map[t])).collect::<Vec<_>>();
        SubgroupGraph {
            rank: self.rank,
            base: 0,
            out: order.iter().map(|&s| remap(&self.out[s])).collect(),
            inn: order.iter().map(|&s| remap(&self.inn[s])).collect(),
        }
    }

    /// Same subgroup (as based graphs up to relabelling).
    pub fn same_subgroup(&self, other: &SubgroupGraph) -> bool {
        self.rank == other.rank && self.canonical() == other.canonical()
    }

    /// Graph of the intersection (fiber product, base component only), with
    /// a bound on the number of product states explored.
    pub fn intersect_with_budget(&self, other: &SubgroupGraph, budget: usize) -> Result<SubgroupGraph> {
        assert_eq!(self.rank, other.rank);
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut states = vec![(self.base, other.base)];
        index.insert((self.base, other.base), 0);
        let mut out: Vec<Vec<Option<usize>>> = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let (a, b) = states[i];
            let mut row = vec![None; self.rank];
            for g in 0..self.rank {
                for l in [Letter::pos(g), Letter::neg(g)] {
                    if let (Some(a2), Some(b2)) = (self.step(a, l), other.step(b, l)) {
                        let next = match index.get(&(a2, b2)) {
                            Some(&k) => k,
                            None => {
                                if states.len() >= budget {
                                    return Err(Error::Resource(format!("fiber product exceeds the state budget of {budget}")));
                                }
                                states.push((a2, b2));
                                index.insert((a2, b2), states.len() - 1);
                                states.len() - 1
                            }
                        };
                        if !l.inv {
                            row[g] = Some(next);
                        }
                    }
                }
            }
            out.push(row);
            i += 1;
        }
        let mut inn = vec![vec![None; self.rank]; out.len()];
        for (s, row) in out.iter().enumerate() {
            for (g, t) in row.iter().enumerate() {
                if let Some(t) = t {
                    inn[*t][g] = Some(s);
                }
            }
        }
        Ok(SubgroupGraph { rank: self.rank, base: 0, out, inn }.pruned())
    }

    pub fn intersect(&self, other: &SubgroupGraph) -> SubgroupGraph {
        self.intersect_with_budget(other, usize::MAX).unwrap()
    }

    /// Removes hanging trees away from the base.
    pub fn pruned(&self) -> SubgroupGraph {
        let mut g = self.clone();
        let n = g.num_states();
        let mut alive = vec![true; n];
        let deg = |g: &SubgroupGraph, s: usize| -> usize {
            (0..g.rank).map(|k| g.out[s][k].is_some() as usize + g.inn[s][k].is_some() as usize).sum()
        };
        let mut queue: VecDeque<usize> = (0..n).collect();
        while let Some(s) = queue.pop_front() {
            if s == g.base || !alive[s] || deg(&g, s) > 1 {
                continue;
            }
            for k in 0..g.rank {
                if let Some(t) = g.out[s][k].take() {
                    g.inn[t][k] = None;
                    queue.push_back(t);
                }
                if let Some(t) = g.inn[s][k].take() {
                    g.out[t][k] = None;
                    queue.push_back(t);
                }
            }
            alive[s] = false;
        }
        g.restricted_to_base_component()
    }

    /// Image of the subgroup under a substitution of generator images.
    pub fn image(&self, images: &[Word]) -> SubgroupGraph {
        let gens: Vec<Word> = self.generators().iter().map(|w| w.substitute(images)).collect();
        fold_inner(self.rank, &gens, false).finish().0
    }

    /// The graph of `ad_g(H) = g⁻¹ H g`.
    pub fn conjugate(&self, g: &Word) -> SubgroupGraph {
        let gens: Vec<Word> = self.generators().iter().map(|w| w.conjugate_by(g)).collect();
        fold_inner(self.rank, &gens, false).finish().0
    }

    /// Strips the stem at the base: returns `(s, core)` with
    /// `H = s · core · s⁻¹` and the core's base of degree ≠ 1.
    fn stem(&self) -> (Word, usize) {
        let mut s = self.base;
        let mut acc = Word::identity();
        loop {
            let nbrs: Vec<(Letter, usize)> = (0..self.rank)
                .flat_map(|g| [Letter::pos(g), Letter::neg(g)])
                .filter_map(|l| self.step(s, l).map(|t| (l, t)))
                .collect();
            let back = acc.last().map(|l| l.inverse());
            let forward: Vec<(Letter, usize)> = nbrs.into_iter().filter(|(l, _)| Some(*l) != back).collect();
            if forward.len() != 1 {
                return (acc, s);
            }
            let (l, t) = forward[0];
            acc = &acc * &Word::letter(l);
            s = t;
        }
    }

    /// Decides whether `other = ad_a(self) = a⁻¹ self a` for some `a`, and
    /// returns such an `a`.
    pub fn conjugator_to(&self, other: &SubgroupGraph) -> Option<Word> {
        let h_trivial = self.num_edges() == 0;
        let k_trivial = other.num_edges() == 0;
        if h_trivial || k_trivial {
            return (h_trivial && k_trivial).then(Word::identity);
        }
        let (s_h, c_h) = self.stem();
        let (s_k, c_k) = other.stem();
        let core_h = self.core_without_stem(c_h);
        let core_k = other.core_without_stem(c_k).canonical();
        if core_h.num_states() != core_k.num_states() {
            return None;
        }
        let paths = core_h.tree_paths();
        for v in 0..core_h.num_states() {
            if core_h.canonical_from(v) == core_k {
                let a = &(&s_h * &paths[v]) * &s_k.inverse();
                return Some(a);
            }
        }
        None
    }

    /// Re-bases at `c` and prunes what becomes a hanging tree.
    fn core_without_stem(&self, c: usize) -> SubgroupGraph {
        let mut g = self.clone();
        g.base = c;
        g.pruned()
    }

    pub fn to_text(&self, names: &[String]) -> String {
        let mut s = format!("base: {}\n", self.base);
        for (a, row) in self.out.iter().enumerate() {
            for (g, t) in row.iter().enumerate() {
                if let Some(t) = t {
                    s.push_str(&format!("{a} --{}--> {t}\n", names[g]));
                }
            }
        }
        s
    }

    /// Parses the line format produced by [`to_text`](Self::to_text).
    pub fn from_text(names: &[String], text: &str) -> Result<SubgroupGraph> {
        let rank = names.len();
        let mut base = None;
        let mut edges = Vec::new();
        let mut n = 0;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(b) = line.strip_prefix("base:") {
                base = Some(b.trim().parse::<usize>().map_err(|_| Error::Format(format!("bad base line {line:?}")))?);
                continue;
            }
            let (a, rest) = line.split_once("--").ok_or_else(|| Error::Format(format!("bad edge line {line:?}")))?;
            let (g, t) = rest.split_once("-->").ok_or_else(|| Error::Format(format!("bad edge line {line:?}")))?;
            let a: usize = a.trim().parse().map_err(|_| Error::Format(format!("bad state in {line:?}")))?;
            let t: usize = t.trim().parse().map_err(|_| Error::Format(format!("bad state in {line:?}")))?;
            let g = names.iter().position(|x| x == g.trim()).ok_or_else(|| Error::Format(format!("unknown generator in {line:?}")))?;
            n = n.max(a + 1).max(t + 1);
            edges.push((a, g, t));
        }
        let base = match base {
            Some(b) => b,
            None => return format_err("missing base: header"),
        };
        n = n.max(base + 1);
        let mut out = vec![vec![None; rank]; n];
        let mut inn = vec![vec![None; rank]; n];
        for (a, g, t) in edges {
            if out[a][g].is_some_and(|x| x != t) || inn[t][g].is_some_and(|x| x != a) {
                return format_err(format!("graph is not folded at state {a}, generator {}", names[g]));
            }
            out[a][g] = Some(t);
            inn[t][g] = Some(a);
        }
        let g = SubgroupGraph { rank, base, out, inn };
        let c = g.restricted_to_base_component();
        if c.num_states() != n {
            return format_err("graph is not connected");
        }
        Ok(c)
    }
}

impl fmt::Display for SubgroupGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.rank).map(|i| format!("x{i}")).collect();
        write!(f, "{}", self.to_text(&names))
    }
}
