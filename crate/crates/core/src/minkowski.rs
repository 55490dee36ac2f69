//! Effective Minkowski certificates: finite-order outer classes realized by
//! graph symmetries, separated in finite quotients, and a characteristic
//! finite-index kernel through which all separating quotients factor.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{domain_err, Error, Result};
use crate::freegroup::{is_characteristic, nielsen_generators, transitive_actions, FreeAut, FreeGroup, Letter, SubgroupGraph, Word, DEFAULT_STATE_BUDGET};
use crate::whitehead::ProductAut;

/// Ranks handled by [`culler_reps`] and [`certify`] unless asked otherwise.
pub const DEFAULT_MAX_RANK: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    /// Largest permutation degree of a separating quotient.
    pub max_degree: usize,
    /// Longest witness word.
    pub max_witness_len: usize,
    /// Cap on states while intersecting kernels.
    pub state_budget: usize,
    /// Largest outer order accepted for a graph symmetry.
    pub max_order: usize,
    pub max_rank: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { max_degree: 5, max_witness_len: 6, state_budget: DEFAULT_STATE_BUDGET, max_order: 24, max_rank: DEFAULT_MAX_RANK }
    }
}

/// A permutation is stored as the list of images of `0..d`; words act on
/// the right, letter by letter.
pub type Perm = Vec<usize>;

fn compose(a: &Perm, b: &Perm) -> Perm {
    a.iter().map(|&i| b[i]).collect()
}

fn invert(a: &Perm) -> Perm {
    let mut out = vec![0; a.len()];
    for (i, &j) in a.iter().enumerate() {
        out[j] = i;
    }
    out
}

/// Sorted cycle lengths.
pub fn cycle_type(p: &Perm) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = p[i];
            len += 1;
        }
        if len > 0 {
            out.push(len);
        }
    }
    out.sort_unstable();
    out
}

/// A finite quotient of a free group, given by one permutation per generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteQuotient {
    pub perms: Vec<Perm>,
}

impl FiniteQuotient {
    pub fn degree(&self) -> usize {
        self.perms.first().map_or(0, Vec::len)
    }

    pub fn image(&self, w: &Word) -> Perm {
        let mut p: Perm = (0..self.degree()).collect();
        for l in w.letters() {
            let g = if l.inv { invert(&self.perms[l.gen]) } else { self.perms[l.gen].clone() };
            p = compose(&p, &g);
        }
        p
    }

    /// All elements of the image group.
    pub fn elements(&self) -> Vec<Perm> {
        let id: Perm = (0..self.degree()).collect();
        let mut seen: HashSet<Perm> = HashSet::from([id.clone()]);
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            for g in &self.perms {
                let n = compose(&out[i], g);
                if seen.insert(n.clone()) {
                    out.push(n);
                }
            }
            i += 1;
        }
        out
    }

    /// Conjugacy inside the image group.
    pub fn conjugate_in_image(&self, x: &Perm, y: &Perm, elements: &[Perm]) -> bool {
        cycle_type(x) == cycle_type(y) && elements.iter().any(|h| compose(&compose(&invert(h), x), h) == *y)
    }

    /// Kernel of the map onto the image group, via the regular action.
    pub fn kernel(&self) -> SubgroupGraph {
        let elements = self.elements();
        let index: std::collections::HashMap<&Perm, usize> = elements.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let perms: Vec<Vec<usize>> = self.perms.iter().map(|g| elements.iter().map(|x| index[&compose(x, g)]).collect()).collect();
        SubgroupGraph::from_action(&perms)
    }

    pub fn kills(&self, w: &Word) -> bool {
        self.image(w).iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// A finite connected multigraph; edge `k` joins `edges[k].0` to `edges[k].1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealizingGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RealizingGraph {
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn describe(&self) -> String {
        self.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(" ")
    }

    fn init(&self, f: usize) -> usize {
        let (a, b) = self.edges[f / 2];
        if f % 2 == 0 {
            a
        } else {
            b
        }
    }

    fn term(&self, f: usize) -> usize {
        self.init(f ^ 1)
    }

    /// Oriented tree edges from vertex 0 to each vertex, and the tree edges.
    fn tree(&self) -> (Vec<Vec<usize>>, Vec<bool>) {
        let mut paths: Vec<Option<Vec<usize>>> = vec![None; self.vertices];
        let mut in_tree = vec![false; self.edges.len()];
        paths[0] = Some(Vec::new());
        let mut queue = std::collections::VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for f in 0..2 * self.edges.len() {
                let w = self.term(f);
                if self.init(f) == v && paths[w].is_none() {
                    let mut p = paths[v].clone().unwrap();
                    p.push(f);
                    paths[w] = Some(p);
                    in_tree[f / 2] = true;
                    queue.push_back(w);
                }
            }
        }
        (paths.into_iter().map(Option::unwrap).collect(), in_tree)
    }

    /// Symmetries as (vertex permutation, oriented edge permutation).
    pub fn symmetries(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut out = Vec::new();
        for sigma in permutations(self.vertices) {
            let mut emap = vec![usize::MAX; 2 * self.edges.len()];
            let mut used = vec![false; 2 * self.edges.len()];
            self.assign(&sigma, 0, &mut emap, &mut used, &mut out);
        }
        out
    }

    fn assign(&self, sigma: &[usize], k: usize, emap: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, Vec<usize>)>) {
        if k == self.edges.len() {
            out.push((sigma.to_vec(), emap.clone()));
            return;
        }
        let f0 = 2 * k;
        for f in 0..2 * self.edges.len() {
            if used[f] || used[f ^ 1] || self.init(f) != sigma[self.init(f0)] || self.term(f) != sigma[self.term(f0)] {
                continue;
            }
            used[f] = true;
            used[f ^ 1] = true;
            emap[f0] = f;
            emap[f0 + 1] = f ^ 1;
            self.assign(sigma, k + 1, emap, used, out);
            used[f] = false;
            used[f ^ 1] = false;
        }
    }

    /// The automorphism of `π₁` (free on the edges off a spanning tree)
    /// induced by a symmetry, based via the tree path to the image base point.
    pub fn induced_aut(&self, sigma: &[usize], emap: &[usize]) -> FreeAut {
        let (paths, in_tree) = self.tree();
        let basis: Vec<usize> = (0..self.edges.len()).filter(|&k| !in_tree[k]).collect();
        let letter = |f: usize| -> Option<Letter> {
            basis.iter().position(|&k| k == f / 2).map(|i| if f % 2 == 0 { Letter::pos(i) } else { Letter::neg(i) })
        };
        let back = |p: &[usize]| -> Vec<usize> { p.iter().rev().map(|&f| f ^ 1).collect() };
        let images = basis
            .iter()
            .map(|&k| {
                let e = 2 * k;
                let mut path: Vec<usize> = paths[self.init(e)].clone();
                path.push(e);
                path.extend(back(&paths[self.term(e)]));
                let mut image: Vec<usize> = paths[sigma[0]].clone();
                image.extend(path.iter().map(|&f| emap[f]));
                image.extend(back(&paths[sigma[0]]));
                Word::from_letters(image.into_iter().filter_map(letter))
            })
            .collect();
        FreeAut::from_images(images).expect("graph symmetries induce automorphisms")
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Connected multigraphs of first Betti number `n` with every vertex of
/// degree at least 3, up to isomorphism; for `n = 1` the circle.
pub fn realizing_graphs(n: usize, max_rank: usize) -> Result<Vec<RealizingGraph>> {
    if n > max_rank {
        return Err(Error::Resource(format!("rank {n} exceeds the configured bound {max_rank}")));
    }
    if n == 0 {
        return domain_err("rank must be positive");
    }
    if n == 1 {
        return Ok(vec![RealizingGraph { vertices: 1, edges: vec![(0, 0)] }]);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v in 1..=2 * n - 2 {
        let e = n - 1 + v;
        let pairs: Vec<(usize, usize)> = (0..v).flat_map(|a| (a..v).map(move |b| (a, b))).collect();
        let mut pick = Vec::new();
        multisets(&pairs, e, 0, &mut pick, &mut |edges| {
            let g = RealizingGraph { vertices: v, edges: edges.to_vec() };
            if g.degrees().iter().all(|&d| d >= 3) && connected(&g) {
                let key = canonical_edges(&g);
                if seen.insert(key.clone()) {
                    out.push(RealizingGraph { vertices: v, edges: key });
                }
            }
        });
    }
    Ok(out)
}

fn connected(g: &RealizingGraph) -> bool {
    let mut seen = vec![false; g.vertices];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in &g.edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn canonical_edges(g: &RealizingGraph) -> Vec<(usize, usize)> {
    permutations(g.vertices)
        .into_iter()
        .map(|p| {
            let mut e: Vec<(usize, usize)> = g.edges.iter().map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b]))).collect();
            e.sort_unstable();
            e
        })
        .min()
        .unwrap()
}

fn multisets(pairs: &[(usize, usize)], k: usize, from: usize, pick: &mut Vec<(usize, usize)>, f: &mut dyn FnMut(&[(usize, usize)])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in from..pairs.len() {
        pick.push(pairs[i]);
        multisets(pairs, k, i, pick, f);
        pick.pop();
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionRep {
    pub aut: FreeAut,
    pub order: usize,
    /// Index into the realizing graph list.
    pub graph: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionRepList {
    pub graphs: Vec<RealizingGraph>,
    pub reps: Vec<TorsionRep>,
}

/// One automorphism per outer class among the symmetries of the realizing
/// graphs of rank `n`.
pub fn culler_reps(n: usize, budgets: &Budgets) -> Result<TorsionRepList> {
    let graphs = realizing_graphs(n, budgets.max_rank)?;
    let mut reps: Vec<TorsionRep> = Vec::new();
    for (gi, g) in graphs.iter().enumerate() {
        for (sigma, emap) in g.symmetries() {
            let aut = g.induced_aut(&sigma, &emap);
            if reps.iter().any(|r| aut.compose(&r.aut.inverse()).is_inner()) {
                continue;
            }
            let order = aut.outer_order(budgets.max_order).ok_or_else(|| Error::Resource("symmetry order beyond the configured bound".into()))?;
            reps.push(TorsionRep { aut, order, graph: gi });
        }
    }
    Ok(TorsionRepList { graphs, reps })
}

/// A witness that `α` is not inner modulo the kernel of `quotient`: the
/// images of `witness` and `α(witness)` are not conjugate there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation {
    pub witness: Word,
    pub quotient: FiniteQuotient,
}

impl Separation {
    pub fn holds(&self, alpha: &FreeAut) -> bool {
        let x = self.quotient.image(&self.witness);
        let y = self.quotient.image(&alpha.apply(&self.witness));
        !self.quotient.conjugate_in_image(&x, &y, &self.quotient.elements())
    }
}

fn words_of_length(rank: usize, len: usize) -> Vec<Word> {
    let mut out = vec![Vec::<Letter>::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &out {
            for i in 0..2 * rank {
                let l = Letter::from_index(i);
                if w.last().is_some_and(|&p| p == l.inverse()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().map(Word::from_letters).collect()
}

struct QuotientCache {
    quotients: Vec<(FiniteQuotient, Vec<Perm>)>,
}

impl QuotientCache {
    fn new(rank: usize, max_degree: usize) -> Self {
        let mut actions = transitive_actions(rank, max_degree);
        actions.sort_by_key(|a| a.first().map_or(0, Vec::len));
        let quotients = actions
            .into_iter()
            .filter(|a| a.first().is_some_and(|p| p.len() > 1))
            .map(|perms| {
                let q = FiniteQuotient { perms };
                let els = q.elements();
                (q, els)
            })
            .collect();
        QuotientCache { quotients }
    }
}

/// Searches witnesses by increasing length, then quotients by increasing
/// degree; `accept` filters the quotients considered.
pub fn separate_filtered(alpha: &FreeAut, budgets: &Budgets, accept: &dyn Fn(&FiniteQuotient) -> bool) -> Option<Separation> {
    let cache = QuotientCache::new(alpha.rank(), budgets.max_degree);
    separate_cached(alpha, budgets, &cache, accept)
}

fn separate_cached(alpha: &FreeAut, budgets: &Budgets, cache: &QuotientCache, accept: &dyn Fn(&FiniteQuotient) -> bool) -> Option<Separation> {
    for len in 1..=budgets.max_witness_len {
        let words: Vec<(Word, Word)> = words_of_length(alpha.rank(), len).into_iter().map(|w| (alpha.apply(&w), w)).collect();
        for (q, els) in &cache.quotients {
            if !accept(q) {
                continue;
            }
            for (aw, w) in &words {
                if !q.conjugate_in_image(&q.image(w), &q.image(aw), els) {
                    return Some(Separation { witness: w.clone(), quotient: q.clone() });
                }
            }
        }
    }
    None
}

/// First separating pair for `α`, or `None` (undecided) within the budget.
pub fn separate(alpha: &FreeAut, budgets: &Budgets) -> Option<Separation> {
    separate_filtered(alpha, budgets, &|_| true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessRecord {
    pub rep: TorsionRep,
    pub separation: Separation,
}

/// A characteristic finite-index kernel with one separation per nontrivial
/// torsion representative, each through a quotient containing the kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceCertificate {
    pub rank: usize,
    pub kernel: SubgroupGraph,
    pub witnesses: Vec<WitnessRecord>,
}

#[derive(Serialize)]
struct WitnessJson {
    automorphism: String,
    outer_order: usize,
    witness: String,
    image_of_witness: String,
    permutations: Vec<Perm>,
    cycle_types: [Vec<usize>; 2],
}

#[derive(Serialize)]
struct CertificateJson {
    rank: usize,
    kernel_index: Option<usize>,
    kernel_generators: Vec<String>,
    kernel_graph: String,
    witnesses: Vec<WitnessJson>,
}

impl CongruenceCertificate {
    /// Rechecks every claim: characteristic kernel of finite index, sound
    /// separations, and each separating quotient killing the kernel.
    pub fn verify(&self) -> Result<()> {
        if !self.kernel.is_complete() {
            return domain_err("kernel has infinite index");
        }
        if !is_characteristic(&self.kernel, &nielsen_generators(self.rank))? {
            return domain_err("kernel is not characteristic");
        }
        let gens = self.kernel.generators();
        for w in &self.witnesses {
            if !w.separation.holds(&w.rep.aut) {
                return domain_err(format!("witness {} does not separate", w.separation.witness));
            }
            if !gens.iter().all(|g| w.separation.quotient.kills(g)) {
                return domain_err("separating quotient does not factor through the kernel");
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let g = FreeGroup::new(self.rank);
        let witnesses = self
            .witnesses
            .iter()
            .map(|w| {
                let q = &w.separation.quotient;
                let x = &w.separation.witness;
                let ax = w.rep.aut.apply(x);
                WitnessJson {
                    automorphism: w.rep.aut.format(&g),
                    outer_order: w.rep.order,
                    witness: g.format(x),
                    image_of_witness: g.format(&ax),
                    permutations: q.perms.clone(),
                    cycle_types: [cycle_type(&q.image(x)), cycle_type(&q.image(&ax))],
                }
            })
            .collect();
        let c = CertificateJson {
            rank: self.rank,
            kernel_index: self.kernel.index(),
            kernel_generators: self.kernel.generators().iter().map(|w| g.format(w)).collect(),
            kernel_graph: self.kernel.to_text(g.names()),
            witnesses,
        };
        serde_json::to_value(c).expect("serializable")
    }
}

/// Intersection of the `Aut(F_n)`-orbit of a finite-index subgroup.
pub fn characteristic_core(h: &SubgroupGraph, budget: usize) -> Result<SubgroupGraph> {
    let gens = nielsen_generators(h.rank());
    let mut orbit = vec![h.canonical()];
    let mut seen: HashSet<SubgroupGraph> = orbit.iter().cloned().collect();
    let mut i = 0;
    while i < orbit.len() {
        for nu in &gens {
            let k = orbit[i].image(nu.images()).canonical();
            if seen.insert(k.clone()) {
                orbit.push(k);
            }
        }
        i += 1;
        if orbit.len() > budget {
            return Err(Error::Resource("automorphism orbit of the kernel is too large".into()));
        }
    }
    let mut core = orbit[0].clone();
    for k in &orbit[1..] {
        core = core.intersect_with_budget(k, budget)?;
    }
    Ok(core.canonical())
}

/// Certificate that `F_n` is effectively Minkowskian.
pub fn certify(n: usize, budgets: &Budgets) -> Result<CongruenceCertificate> {
    let reps = culler_reps(n, budgets)?;
    let cache = QuotientCache::new(n, budgets.max_degree);
    let mut witnesses = Vec::new();
    for rep in reps.reps.into_iter().filter(|r| r.order > 1) {
        let sep = separate_cached(&rep.aut, budgets, &cache, &|_| true)
            .ok_or_else(|| Error::Resource(format!("no separating quotient found for {}", rep.aut.format(&FreeGroup::new(n)))))?;
        witnesses.push(WitnessRecord { rep, separation: sep });
    }
    let mut kernels: Vec<SubgroupGraph> = Vec::new();
    for w in &witnesses {
        let k = w.separation.quotient.kernel().canonical();
        if !kernels.contains(&k) {
            kernels.push(k);
        }
    }
    let mut kernel = SubgroupGraph::whole(n);
    let mut cores: Vec<SubgroupGraph> = Vec::new();
    for k in &kernels {
        if kernel.generators().iter().all(|g| k.contains(g)) {
            continue;
        }
        let core = characteristic_core(k, budgets.state_budget)?;
        if !cores.contains(&core) {
            kernel = kernel.intersect_with_budget(&core, budgets.state_budget)?.canonical();
            cores.push(core);
        }
    }
    let cert = CongruenceCertificate { rank: n, kernel, witnesses };
    cert.verify()?;
    Ok(cert)
}

/// `n·Z^k`-style certificate: finite-order matrices of `GL_k(Z)` other than
/// the identity stay nontrivial modulo `modulus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AbelianCertificate {
    pub rank: usize,
    pub modulus: i64,
}

impl AbelianCertificate {
    /// Whether `m` survives modulo the certificate's modulus.
    pub fn separates(&self, m: &[Vec<i64>]) -> bool {
        m.iter().enumerate().any(|(i, row)| row.iter().enumerate().any(|(j, &x)| (x - (i == j) as i64).rem_euclid(self.modulus) != 0))
    }
}

/// The congruence kernel `3·Z^k`.
pub fn certify_free_abelian(rank: usize) -> AbelianCertificate {
    AbelianCertificate { rank, modulus: 3 }
}

/// Certificate for `F_k × Z`: the fiber certificate together with the
/// center taken modulo 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCertificate {
    pub fiber: CongruenceCertificate,
    pub center_modulus: i64,
}

impl ProductCertificate {
    /// Whether `a` survives as a non-inner automorphism of the quotient,
    /// either by its action on the center or through a fiber separation.
    pub fn maps_nontrivially(&self, a: &ProductAut, budgets: &Budgets) -> bool {
        if (a.c_image.1 - 1).rem_euclid(self.center_modulus) != 0 {
            return true;
        }
        let psi = match FreeAut::from_images(a.h_images.iter().map(|x| x.0.clone()).collect()) {
            Ok(p) => p,
            Err(_) => return false,
        };
        if psi.is_inner() {
            return false;
        }
        let gens = self.fiber.kernel.generators();
        separate_filtered(&psi, budgets, &|q| gens.iter().all(|g| q.kills(g))).is_some()
    }
}

pub fn certify_product(k: usize, budgets: &Budgets) -> Result<ProductCertificate> {
    if k < 2 {
        return domain_err("use the abelian certificate for Z^2");
    }
    Ok(ProductCertificate { fiber: certify(k, budgets)?, center_modulus: 3 })
}

fn compose_product(a: &ProductAut, b: &ProductAut) -> ProductAut {
    ProductAut { h_images: b.h_images.iter().map(|x| a.apply(x)).collect(), c_image: a.apply(&b.c_image) }
}

/// Outer order of an automorphism of `F_k × Z`, if at most `bound`.
pub fn product_outer_order(a: &ProductAut, bound: usize) -> Option<usize> {
    let is_inner = |p: &ProductAut| -> bool {
        let unit: (Word, i64) = (Word::identity(), 1);
        if p.c_image != unit || p.h_images.iter().any(|x| x.1 != 0) {
            return false;
        }
        FreeAut::from_images(p.h_images.iter().map(|x| x.0.clone()).collect()).is_ok_and(|f| f.is_inner())
    };
    let mut p = a.clone();
    for k in 1..=bound {
        if is_inner(&p) {
            return Some(k);
        }
        p = compose_product(a, &p);
    }
    None
}
