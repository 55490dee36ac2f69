//! Whitehead's algorithm for tuples of conjugacy classes of tuples of
//! elements, and its fiber-and-orientation preserving variant on `F × Z`.

mod product;

pub use product::{mwp_product, ProductAut, ProductMarking, ProductSplitting};

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{format_err, Result};
use crate::freegroup::{FreeAut, FreeGroup, Letter, Word};

/// Canonical representative of a tuple up to simultaneous conjugation, and
/// the conjugator `g` with `canon[i] = g⁻¹ tuple[i] g`.
///
/// Total length is a convex function of the conjugator on the Cayley tree,
/// so single-letter descent reaches the minimum; the minimal conjugates are
/// then connected through equal-length single-letter steps.
pub fn canonical_tuple(tuple: &[Word]) -> (Vec<Word>, Word) {
    let cost = |t: &[Word]| t.iter().map(Word::len).sum::<usize>();
    let conj = |t: &[Word], x: &Word| t.iter().map(|w| w.conjugate_by(x)).collect::<Vec<_>>();
    let rank = tuple.iter().map(Word::support_rank).max().unwrap_or(0);
    let letters: Vec<Word> = (0..rank).flat_map(|g| [Word::letter(Letter::pos(g)), Word::letter(Letter::neg(g))]).collect();
    let mut cur = tuple.to_vec();
    let mut g = Word::identity();
    loop {
        let c = cost(&cur);
        let step = letters.iter().map(|x| (conj(&cur, x), x)).find(|(t, _)| cost(t) < c);
        match step {
            Some((t, x)) => {
                cur = t;
                g = &g * x;
            }
            None => break,
        }
    }
    let level = cost(&cur);
    let mut best = (cur.clone(), g.clone());
    let mut seen: HashSet<Vec<Word>> = HashSet::from([cur.clone()]);
    let mut queue = VecDeque::from([(cur, g)]);
    while let Some((t, h)) = queue.pop_front() {
        if t < best.0 {
            best = (t.clone(), h.clone());
        }
        for x in &letters {
            let next = conj(&t, x);
            if cost(&next) == level && seen.insert(next.clone()) {
                queue.push_back((next, &h * x));
            }
        }
    }
    best
}

/// An ordered list of tuples, each tuple taken up to simultaneous
/// conjugation and stored in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking {
    rank: usize,
    tuples: Vec<Vec<Word>>,
}

impl Marking {
    pub fn new(rank: usize, tuples: Vec<Vec<Word>>) -> Self {
        let tuples = tuples.iter().map(|t| canonical_tuple(t).0).collect();
        Marking { rank, tuples }
    }

    /// A marking of single conjugacy classes.
    pub fn of_classes(rank: usize, words: &[Word]) -> Self {
        Self::new(rank, words.iter().map(|w| vec![w.clone()]).collect())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tuples(&self) -> &[Vec<Word>] {
        &self.tuples
    }

    /// Sum over entries of the lengths of the shortest simultaneous
    /// conjugate; for one-element tuples this is the cyclic length.
    pub fn total_length(&self) -> usize {
        self.tuples.iter().flatten().map(Word::len).sum()
    }

    pub fn apply(&self, a: &FreeAut) -> Marking {
        Marking::new(self.rank, self.tuples.iter().map(|t| t.iter().map(|w| a.apply(w)).collect()).collect())
    }

    /// Parses `[ w1 , w2 ] ; [ w3 ]`; a bare word is a one-element tuple.
    pub fn parse(group: &FreeGroup, s: &str) -> Result<Self> {
        let tuples = split_marking(s)?.into_iter().map(|t| t.iter().map(|w| group.parse(w)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        Ok(Marking::new(group.rank(), tuples))
    }

    pub fn format(&self, group: &FreeGroup) -> String {
        self.tuples
            .iter()
            .map(|t| format!("[{}]", t.iter().map(|w| group.format(w)).collect::<Vec<_>>().join(", ")))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format(&FreeGroup::new(self.rank)))
    }
}

pub(crate) fn split_marking(s: &str) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    for entry in s.split(';').map(str::trim) {
        if entry.is_empty() {
            continue;
        }
        let body = match (entry.strip_prefix('['), entry.ends_with(']')) {
            (Some(rest), true) => &rest[..rest.len() - 1],
            (None, false) => entry,
            _ => return format_err(format!("unbalanced brackets in {entry:?}")),
        };
        let parts: Vec<String> = body.split(',').map(|p| p.trim().to_string()).collect();
        if parts.iter().any(String::is_empty) {
            return format_err(format!("empty tuple member in {entry:?}"));
        }
        out.push(parts);
    }
    Ok(out)
}

/// A Whitehead automorphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WhiteheadMove {
    /// Generator `i` goes to generator `perm[i]`, inverted when `inv[i]`.
    Permutation { perm: Vec<usize>, inv: Vec<bool> },
    /// Every generator `y ≠ x^±` goes to `(x⁻¹ if y⁻¹ ∈ set) y (x if y ∈ set)`;
    /// `x` is fixed.
    TypeII { multiplier: Letter, set: Vec<Letter> },
}

impl WhiteheadMove {
    pub fn to_aut(&self, rank: usize) -> FreeAut {
        match self {
            WhiteheadMove::Permutation { perm, inv } => FreeAut::signed_permutation(perm, inv),
            WhiteheadMove::TypeII { multiplier, set } => {
                let x = Word::letter(*multiplier);
                let images = (0..rank)
                    .map(|g| {
                        let y = Word::gen(g);
                        if g == multiplier.gen {
                            return y;
                        }
                        let pre = if set.contains(&Letter::neg(g)) { x.inverse() } else { Word::identity() };
                        let post = if set.contains(&Letter::pos(g)) { x.clone() } else { Word::identity() };
                        &(&pre * &y) * &post
                    })
                    .collect();
                FreeAut::from_images(images).expect("Whitehead moves are automorphisms")
            }
        }
    }
}

impl fmt::Display for WhiteheadMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhiteheadMove::Permutation { perm, inv } => {
                let parts: Vec<String> = perm.iter().zip(inv).map(|(p, i)| format!("x{p}{}", if *i { "'" } else { "" })).collect();
                write!(f, "perm({})", parts.join(" "))
            }
            WhiteheadMove::TypeII { multiplier, set } => {
                let l = |l: &Letter| format!("x{}{}", l.gen, if l.inv { "'" } else { "" });
                write!(f, "({{{}}}, {})", set.iter().map(l).collect::<Vec<_>>().join(" "), l(multiplier))
            }
        }
    }
}

/// The full Whitehead alphabet in a fixed order: nontrivial signed
/// permutations, then type II moves by multiplier and subset.
pub fn whitehead_moves(rank: usize) -> Vec<WhiteheadMove> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..rank).collect();
    let mut perms = Vec::new();
    permutations(&mut perm, 0, &mut perms);
    perms.sort();
    for p in perms {
        for mask in 0..(1u32 << rank) {
            let inv: Vec<bool> = (0..rank).map(|i| mask >> i & 1 == 1).collect();
            if mask == 0 && p.iter().enumerate().all(|(i, &j)| i == j) {
                continue;
            }
            out.push(WhiteheadMove::Permutation { perm: p.clone(), inv });
        }
    }
    for xi in 0..2 * rank {
        let x = Letter::from_index(xi);
        let others: Vec<Letter> = (0..2 * rank).map(Letter::from_index).filter(|l| l.gen != x.gen).collect();
        for mask in 1..(1u64 << others.len()) {
            let set = others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &l)| l).collect();
            out.push(WhiteheadMove::TypeII { multiplier: x, set });
        }
    }
    out
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

fn compose_moves(rank: usize, moves: &[WhiteheadMove]) -> FreeAut {
    moves.iter().fold(FreeAut::identity(rank), |acc, m| m.to_aut(rank).compose(&acc))
}

/// Greedy descent: repeatedly applies the first strictly shortening move.
/// Returns the minimal marking and the moves, in application order.
pub fn minimize(m: &Marking) -> (Marking, Vec<WhiteheadMove>) {
    let moves = whitehead_moves(m.rank);
    let auts: Vec<FreeAut> = moves.iter().map(|mv| mv.to_aut(m.rank)).collect();
    let mut cur = m.clone();
    let mut used = Vec::new();
    'outer: loop {
        let len = cur.total_length();
        for (mv, a) in moves.iter().zip(&auts) {
            let next = cur.apply(a);
            if next.total_length() < len {
                cur = next;
                used.push(mv.clone());
                continue 'outer;
            }
        }
        return (cur, used);
    }
}

/// Decides whether `m2 = φ(m1)` for some automorphism `φ`, returning one.
pub fn same_orbit(m1: &Marking, m2: &Marking) -> Option<FreeAut> {
    if m1.rank != m2.rank || m1.tuples.len() != m2.tuples.len() || m1.tuples.iter().zip(&m2.tuples).any(|(a, b)| a.len() != b.len()) {
        return None;
    }
    let rank = m1.rank;
    let (min1, mv1) = minimize(m1);
    let (min2, mv2) = minimize(m2);
    if min1.total_length() != min2.total_length() {
        return None;
    }
    let path = connect(&min1, &min2)?;
    let phi1 = compose_moves(rank, &mv1);
    let phi2 = compose_moves(rank, &mv2);
    let witness = phi2.inverse().compose(&compose_moves(rank, &path).compose(&phi1));
    debug_assert_eq!(&m1.apply(&witness), m2);
    Some(witness)
}

/// Breadth-first search through equal-length moves between two minimal markings.
fn connect(from: &Marking, to: &Marking) -> Option<Vec<WhiteheadMove>> {
    if from == to {
        return Some(Vec::new());
    }
    let moves = whitehead_moves(from.rank);
    let auts: Vec<FreeAut> = moves.iter().map(|mv| mv.to_aut(from.rank)).collect();
    let level = from.total_length();
    let mut parent: HashMap<Marking, (Marking, usize)> = HashMap::new();
    let mut queue = VecDeque::from([from.clone()]);
    let mut seen: HashSet<Marking> = HashSet::from([from.clone()]);
    while let Some(cur) = queue.pop_front() {
        for (i, a) in auts.iter().enumerate() {
            let next = cur.apply(a);
            if next.total_length() != level || !seen.insert(next.clone()) {
                continue;
            }
            parent.insert(next.clone(), (cur.clone(), i));
            if &next == to {
                let mut path = Vec::new();
                let mut at = next;
                while let Some((prev, i)) = parent.get(&at) {
                    path.push(moves[*i].clone());
                    at = prev.clone();
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(next);
        }
    }
    None
}
