use std::fmt;

use super::{fold_tracked, FreeGroup, SubgroupGraph, Word};
use crate::error::{Error, Result};

/// Rejection of a candidate automorphism: the images generate the proper
/// subgroup whose folded graph is attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotAutomorphism {
    pub certificate: SubgroupGraph,
}

impl fmt::Display for NotAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "images generate a proper subgroup ({} states, rank {})", self.certificate.num_states(), self.certificate.subgroup_rank())
    }
}

impl std::error::Error for NotAutomorphism {}

/// An automorphism of a free group given by generator images, with the
/// inverse images computed at construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreeAut {
    images: Vec<Word>,
    inverse_images: Vec<Word>,
}

impl FreeAut {
    pub fn identity(rank: usize) -> Self {
        let images: Vec<Word> = (0..rank).map(Word::gen).collect();
        FreeAut { inverse_images: images.clone(), images }
    }

    /// Accepts `images` iff they generate the whole group; for a finite rank
    /// free group a surjective endomorphism is an automorphism. The inverse
    /// is read off a Nielsen-tracked fold of the images.
    pub fn from_images(images: Vec<Word>) -> std::result::Result<Self, NotAutomorphism> {
        let rank = images.len();
        if images.iter().any(|w| w.support_rank() > rank) {
            return Err(NotAutomorphism { certificate: SubgroupGraph::trivial(rank) });
        }
        let tracked = fold_tracked(rank, &images).expect("ranks checked");
        if !tracked.graph.is_whole() {
            return Err(NotAutomorphism { certificate: tracked.graph });
        }
        let inverse_images = (0..rank).map(|g| tracked.express(&Word::gen(g)).expect("whole group")).collect();
        Ok(FreeAut { images, inverse_images })
    }

    /// Parses `a -> ab, b -> b` (every generator must be mapped exactly once).
    pub fn parse(group: &FreeGroup, s: &str) -> Result<Self> {
        let mut images: Vec<Option<Word>> = vec![None; group.rank()];
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (lhs, rhs) = part.split_once("->").ok_or_else(|| Error::Format(format!("expected `x -> w`, got {part:?}")))?;
            let g = group.generator(lhs.trim()).ok_or_else(|| Error::Format(format!("unknown generator {:?}", lhs.trim())))?;
            if images[g].is_some() {
                return Err(Error::Format(format!("generator {} mapped twice", lhs.trim())));
            }
            images[g] = Some(group.parse(rhs)?);
        }
        let images: Vec<Word> = images
            .into_iter()
            .enumerate()
            .map(|(i, w)| w.ok_or_else(|| Error::Format(format!("no image for generator {}", group.names()[i]))))
            .collect::<Result<_>>()?;
        FreeAut::from_images(images).map_err(|e| Error::Domain(format!("not an automorphism: {e}")))
    }

    pub fn format(&self, group: &FreeGroup) -> String {
        self.images
            .iter()
            .enumerate()
            .map(|(i, w)| format!("{} -> {}", group.names()[i], group.format(w)))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// `ad_g : x ↦ g⁻¹ x g`.
    pub fn inner(rank: usize, g: &Word) -> Self {
        let images = (0..rank).map(|i| Word::gen(i).conjugate_by(g)).collect();
        let inverse_images = (0..rank).map(|i| Word::gen(i).conjugate_by(&g.inverse())).collect();
        FreeAut { images, inverse_images }
    }

    /// Sends generator `i` to `perm[i]`, inverted when `inv[i]`.
    pub fn signed_permutation(perm: &[usize], inv: &[bool]) -> Self {
        let images: Vec<Word> = perm.iter().zip(inv).map(|(&p, &s)| if s { Word::gen(p).inverse() } else { Word::gen(p) }).collect();
        FreeAut::from_images(images).expect("signed permutations are automorphisms")
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn inverse_images(&self) -> &[Word] {
        &self.inverse_images
    }

    pub fn apply(&self, w: &Word) -> Word {
        w.substitute(&self.images)
    }

    pub fn apply_inverse(&self, w: &Word) -> Word {
        w.substitute(&self.inverse_images)
    }

    pub fn inverse(&self) -> FreeAut {
        FreeAut { images: self.inverse_images.clone(), inverse_images: self.images.clone() }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &FreeAut) -> FreeAut {
        FreeAut {
            images: other.images.iter().map(|w| self.apply(w)).collect(),
            inverse_images: self.inverse_images.iter().map(|w| other.apply_inverse(w)).collect(),
        }
    }

    pub fn pow(&self, n: i64) -> FreeAut {
        let step = if n < 0 { self.inverse() } else { self.clone() };
        (0..n.unsigned_abs()).fold(FreeAut::identity(self.rank()), |acc, _| step.compose(&acc))
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, w)| *w == Word::gen(i))
    }

    /// Returns `γ` with `self = ad_γ` when the automorphism is inner.
    ///
    /// Exact: the first generator determines `γ` up to its centralizer
    /// `⟨x₀⟩`, and the reduced length of `x₀⁻ʲ x₁ x₀ʲ` pins down `|j|`.
    pub fn inner_conjugator(&self) -> Option<Word> {
        let n = self.rank();
        if n == 0 || self.is_identity() {
            return Some(Word::identity());
        }
        if n == 1 {
            return None;
        }
        let x0 = Word::gen(0);
        // abelianization pre-filter
        for (i, w) in self.images.iter().enumerate() {
            let sums = w.exponent_sums(n);
            if sums.iter().enumerate().any(|(j, &s)| s != (i == j) as i64) {
                return None;
            }
        }
        let c = x0.conjugator_to(&self.images[0])?;
        let target = self.images[1].conjugate_by(&c.inverse());
        if target.len() % 2 == 0 {
            return None;
        }
        let j = (target.len() as i64 - 1) / 2;
        for jj in [j, -j] {
            let gamma = &x0.pow(jj) * &c;
            if (0..n).all(|i| Word::gen(i).conjugate_by(&gamma) == self.images[i]) {
                return Some(gamma);
            }
        }
        None
    }

    pub fn is_inner(&self) -> bool {
        self.inner_conjugator().is_some()
    }

    /// Integer matrix of the induced map on the abelianization; row `i` is the
    /// exponent-sum vector of the image of generator `i`.
    pub fn abelianization(&self) -> Vec<Vec<i64>> {
        self.images.iter().map(|w| w.exponent_sums(self.rank())).collect()
    }

    /// Order in the outer automorphism group if it is at most `bound`.
    pub fn outer_order(&self, bound: usize) -> Option<usize> {
        let mut p = self.clone();
        for k in 1..=bound {
            if p.is_inner() {
                return Some(k);
            }
            p = self.compose(&p);
        }
        None
    }
}

/// A generating set of `Aut(F_n)`: a transposition, a cyclic shift (rank ≥ 3),
/// one inversion and the two elementary transvections `x₀ ↦ x₀x₁`, `x₀ ↦ x₁x₀`.
pub fn nielsen_generators(rank: usize) -> Vec<FreeAut> {
    let mut out = Vec::new();
    let id_inv = vec![false; rank];
    if rank >= 2 {
        let mut swap: Vec<usize> = (0..rank).collect();
        swap.swap(0, 1);
        out.push(FreeAut::signed_permutation(&swap, &id_inv));
    }
    if rank >= 3 {
        let shift: Vec<usize> = (0..rank).map(|i| (i + 1) % rank).collect();
        out.push(FreeAut::signed_permutation(&shift, &id_inv));
    }
    let mut inv = id_inv.clone();
    inv[0] = true;
    out.push(FreeAut::signed_permutation(&(0..rank).collect::<Vec<_>>(), &inv));
    if rank >= 2 {
        let mut right: Vec<Word> = (0..rank).map(Word::gen).collect();
        right[0] = Word::from_letters([super::Letter::pos(0), super::Letter::pos(1)]);
        out.push(FreeAut::from_images(right).unwrap());
        let mut left: Vec<Word> = (0..rank).map(Word::gen).collect();
        left[0] = Word::from_letters([super::Letter::pos(1), super::Letter::pos(0)]);
        out.push(FreeAut::from_images(left).unwrap());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &[i32]) -> Word {
        Word::from_ints(s)
    }

    #[test]
    fn nielsen_move_accepted() {
        let a = FreeAut::from_images(vec![w(&[1, 2]), w(&[2])]).unwrap();
        for g in 0..2 {
            assert_eq!(a.apply_inverse(&a.apply(&Word::gen(g))), Word::gen(g));
        }
        assert_eq!(a.inverse().images()[0], w(&[1, -2]));
    }

    #[test]
    fn square_rejected_with_certificate() {
        let err = FreeAut::from_images(vec![w(&[1, 1]), w(&[2])]).unwrap_err();
        assert!(!err.certificate.contains(&w(&[1])));
        assert!(err.certificate.contains(&w(&[1, 1])));
    }

    #[test]
    fn swap_is_self_inverse() {
        let s = FreeAut::from_images(vec![w(&[2]), w(&[1])]).unwrap();
        assert_eq!(s.compose(&s), FreeAut::identity(2));
        assert_eq!(s.inverse(), s);
    }

    #[test]
    fn inner_detection() {
        let g = w(&[1, 2, 2, -1, 2]);
        let ad = FreeAut::inner(3, &g);
        let found = ad.inner_conjugator().unwrap();
        assert_eq!(FreeAut::inner(3, &found), ad);
        let twist = FreeAut::from_images(vec![w(&[1]), w(&[2, 1])]).unwrap();
        assert!(!twist.is_inner());
        let swap = FreeAut::from_images(vec![w(&[2]), w(&[1])]).unwrap();
        assert!(!swap.is_inner());
        assert_eq!(swap.outer_order(12), Some(2));
    }

    #[test]
    fn parse_format() {
        let f = FreeGroup::new(2);
        let a = FreeAut::parse(&f, "a -> ab, b -> b").unwrap();
        assert_eq!(a.format(&f), "a -> ab, b -> b");
        assert!(FreeAut::parse(&f, "a -> a^2, b -> b").is_err());
        assert!(FreeAut::parse(&f, "a -> b").is_err());
    }
}
