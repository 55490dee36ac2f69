use std::fmt;

use super::{canonical_tuple, same_orbit, split_marking, Marking};
use crate::error::{domain_err, format_err, Result};
use crate::freegroup::{FreeAut, FreeGroup, Word};
use crate::intlin::{solve, Matrix};

/// Designates how `G = H × ⟨c⟩` sits in a mapping torus: the orientation
/// functional is `o(w, k) = μ·(exponent sums of w) + ν·k` and the fiber is its
/// kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSplitting {
    pub fiber_rank: usize,
    pub mu: Vec<i64>,
    pub nu: i64,
}

impl ProductSplitting {
    /// `H` is the fiber and `c` has degree 1.
    pub fn standard(fiber_rank: usize) -> Self {
        ProductSplitting { fiber_rank, mu: vec![0; fiber_rank], nu: 1 }
    }

    fn check(&self) -> Result<()> {
        if self.nu == 0 {
            return domain_err("the center lies in the fiber; not a product splitting of a torus");
        }
        if self.mu.len() != self.fiber_rank || self.mu.iter().any(|m| m % self.nu != 0) {
            return domain_err("orientation functional does not split off the center");
        }
        Ok(())
    }

    fn shift(&self, w: &Word) -> i64 {
        w.exponent_sums(self.fiber_rank).iter().zip(&self.mu).map(|(e, m)| e * m).sum::<i64>() / self.nu
    }
}

/// Element `(w, k)` of `H × ⟨c⟩` denoting `w·c^k`.
pub type ProductElement = (Word, i64);

/// A marking over `H × ⟨c⟩`; each tuple is up to simultaneous conjugation,
/// which only acts on the `H`-parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductMarking {
    rank: usize,
    tuples: Vec<Vec<ProductElement>>,
}

impl ProductMarking {
    pub fn new(rank: usize, tuples: Vec<Vec<ProductElement>>) -> Self {
        let tuples = tuples
            .into_iter()
            .map(|t| {
                let words: Vec<Word> = t.iter().map(|(w, _)| w.clone()).collect();
                let (canon, _) = canonical_tuple(&words);
                canon.into_iter().zip(t.into_iter().map(|(_, k)| k)).collect()
            })
            .collect();
        ProductMarking { rank, tuples }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tuples(&self) -> &[Vec<ProductElement>] {
        &self.tuples
    }

    pub fn apply(&self, a: &ProductAut) -> ProductMarking {
        ProductMarking::new(self.rank, self.tuples.iter().map(|t| t.iter().map(|x| a.apply(x)).collect()).collect())
    }

    /// Parses `[ w * c^k , ... ] ; [ ... ]` with `center` naming `c`.
    pub fn parse(group: &FreeGroup, center: &str, s: &str) -> Result<Self> {
        if group.generator(center).is_some() {
            return format_err(format!("center name {center:?} clashes with a fiber generator"));
        }
        let ext = FreeGroup::with_names(group.names().iter().cloned().chain([center.to_string()]))?;
        let c = group.rank();
        let tuples = split_marking(s)?
            .into_iter()
            .map(|t| {
                t.iter()
                    .map(|m| {
                        let w = ext.parse(m)?;
                        let k = w.exponent_sums(c + 1)[c];
                        let h = Word::from_letters(w.letters().iter().copied().filter(|l| l.gen != c));
                        Ok((h, k))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductMarking::new(group.rank(), tuples))
    }

    pub fn format(&self, group: &FreeGroup, center: &str) -> String {
        self.tuples
            .iter()
            .map(|t| format!("[{}]", t.iter().map(|x| format_element(group, center, x)).collect::<Vec<_>>().join(", ")))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

pub fn format_element(group: &FreeGroup, center: &str, (w, k): &ProductElement) -> String {
    match (w.is_identity(), *k) {
        (_, 0) => group.format(w),
        (true, 1) => center.to_string(),
        (true, k) => format!("{center}^{k}"),
        (false, 1) => format!("{} * {center}", group.format(w)),
        (false, k) => format!("{} * {center}^{k}", group.format(w)),
    }
}

/// An automorphism of `H × ⟨c⟩` by images of the generators of `H` and of `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductAut {
    pub h_images: Vec<ProductElement>,
    pub c_image: ProductElement,
}

impl ProductAut {
    pub fn apply(&self, (w, k): &ProductElement) -> ProductElement {
        let words: Vec<Word> = self.h_images.iter().map(|(x, _)| x.clone()).collect();
        let shift: i64 = w.letters().iter().map(|l| l.sign() * self.h_images[l.gen].1).sum();
        let h = &w.substitute(&words) * &self.c_image.0.pow(*k);
        (h, shift + k * self.c_image.1)
    }
}

impl fmt::Display for ProductAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = FreeGroup::new(self.h_images.len());
        let mut parts: Vec<String> = self.h_images.iter().enumerate().map(|(i, x)| format!("{} -> {}", g.names()[i], format_element(&g, "c", x))).collect();
        parts.push(format!("c -> {}", format_element(&g, "c", &self.c_image)));
        write!(f, "{}", parts.join(", "))
    }
}

/// Orbit problem for markings of `H × ⟨c⟩` under automorphisms preserving
/// the fiber and the orientation of `split`.
///
/// Such an automorphism fixes `c` modulo the center of `H` and restricts to
/// an automorphism `ψ` of the fiber. For rank at least 2 the fiber has trivial
/// center, so after rewriting in fiber coordinates the center coordinates must
/// agree entrywise and the fiber parts must be Whitehead equivalent. For
/// rank 1 the maps are `(p, k) ↦ (εp + jk, k)`, found by solving for `j`.
pub fn mwp_product(m1: &ProductMarking, m2: &ProductMarking, split: &ProductSplitting) -> Result<Option<ProductAut>> {
    split.check()?;
    let n = split.fiber_rank;
    if m1.rank != n || m2.rank != n {
        return domain_err("marking rank differs from the splitting");
    }
    let shape = |m: &ProductMarking| m.tuples.iter().map(Vec::len).collect::<Vec<_>>();
    if shape(m1) != shape(m2) {
        return Ok(None);
    }
    let adjusted = |m: &ProductMarking| -> Vec<Vec<ProductElement>> { m.tuples.iter().map(|t| t.iter().map(|(w, k)| (w.clone(), k + split.shift(w))).collect()).collect() };
    let (a1, a2) = (adjusted(m1), adjusted(m2));
    let ks = |a: &Vec<Vec<ProductElement>>| a.iter().flatten().map(|x| x.1).collect::<Vec<_>>();
    if ks(&a1) != ks(&a2) {
        return Ok(None);
    }
    let found = if n == 1 {
        rank_one(&a1, &a2)
    } else {
        let strip = |a: &Vec<Vec<ProductElement>>| Marking::new(n, a.iter().map(|t| t.iter().map(|x| x.0.clone()).collect()).collect());
        same_orbit(&strip(&a1), &strip(&a2)).map(|psi| (psi, Word::identity()))
    };
    let Some((psi, z)) = found else { return Ok(None) };
    // back to the original coordinates
    let back = |w: Word, k: i64| {
        let s = split.shift(&w);
        (w, k - s)
    };
    let h_images = (0..n)
        .map(|i| {
            let k = split.mu[i] / split.nu;
            back(&psi.images()[i] * &z.pow(k), k)
        })
        .collect();
    let aut = ProductAut { h_images, c_image: back(z, 1) };
    debug_assert_eq!(&m1.apply(&aut), m2);
    Ok(Some(aut))
}

fn rank_one(a1: &[Vec<ProductElement>], a2: &[Vec<ProductElement>]) -> Option<(FreeAut, Word)> {
    let p = |x: &ProductElement| x.0.exponent_sums(1)[0];
    let xs: Vec<&ProductElement> = a1.iter().flatten().collect();
    let ys: Vec<&ProductElement> = a2.iter().flatten().collect();
    for eps in [1i64, -1] {
        let a = Matrix::from_fn(xs.len(), 1, |i, _| xs[i].1);
        let b: Vec<i64> = xs.iter().zip(&ys).map(|(x, y)| p(y) - eps * p(x)).collect();
        if let Some((j, _)) = solve(&a, &b) {
            let psi = FreeAut::from_images(vec![Word::gen(0).pow(eps)]).unwrap();
            return Some((psi, Word::gen(0).pow(j[0])));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(rank: usize, s: &str) -> ProductMarking {
        ProductMarking::parse(&FreeGroup::new(rank), "c", s).unwrap()
    }

    #[test]
    fn examples() {
        let split = ProductSplitting::standard(2);
        assert!(mwp_product(&pm(2, "[a]"), &pm(2, "[b]"), &split).unwrap().is_some());
        assert!(mwp_product(&pm(2, "[a * c]"), &pm(2, "[a * c^2]"), &split).unwrap().is_none());
        assert!(mwp_product(&pm(2, "[c]"), &pm(2, "[c]"), &split).unwrap().is_some());
    }

    #[test]
    fn rank_one_shear() {
        let split = ProductSplitting::standard(1);
        let m1 = pm(1, "[a * c^2, a]");
        let m2 = pm(1, "[a^7 * c^2, a]");
        let aut = mwp_product(&m1, &m2, &split).unwrap().unwrap();
        assert_eq!(m1.apply(&aut), m2);
        assert!(mwp_product(&m1, &pm(1, "[a^6 * c^2, a]"), &split).unwrap().is_none());
        let inv = mwp_product(&pm(1, "[a^3]"), &pm(1, "[a^-3]"), &split).unwrap();
        assert!(inv.is_some());
    }

    #[test]
    fn tilted_fiber() {
        let split = ProductSplitting { fiber_rank: 2, mu: vec![2, 0], nu: 2 };
        let m1 = pm(2, "[a]");
        let m2 = pm(2, "[b * c]");
        let aut = mwp_product(&m1, &m2, &split).unwrap().unwrap();
        assert_eq!(m1.apply(&aut), m2);
        let bad = ProductSplitting { fiber_rank: 2, mu: vec![1, 0], nu: 2 };
        assert!(mwp_product(&m1, &m2, &bad).is_err());
    }
}
