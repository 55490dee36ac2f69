use std::fmt;
use std::str::FromStr;

use crate::error::{format_err, Error, Result};
use crate::freegroup::{fold, fold_tracked, FreeAut, FreeGroup, Word};

/// The group kinds a vertex or edge may carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Z,
    Z2,
    Free(usize),
    FreeZ(usize),
}

impl Slot {
    pub fn new(rank: usize, center: bool) -> Slot {
        match (rank, center) {
            (1, false) => Slot::Z,
            (1, true) => Slot::Z2,
            (k, false) => Slot::Free(k),
            (k, true) => Slot::FreeZ(k),
        }
    }

    /// Rank of the free factor.
    pub fn rank(self) -> usize {
        match self {
            Slot::Z | Slot::Z2 => 1,
            Slot::Free(k) | Slot::FreeZ(k) => k,
        }
    }

    pub fn has_center(self) -> bool {
        matches!(self, Slot::Z2 | Slot::FreeZ(_))
    }

    pub fn num_gens(self) -> usize {
        self.rank() + self.has_center() as usize
    }

    pub fn is_abelian(self) -> bool {
        self.rank() <= 1
    }

    pub fn gen(self, i: usize) -> Elem {
        if i < self.rank() {
            Elem::free(Word::gen(i))
        } else {
            Elem::central(1)
        }
    }

    pub fn gens(self) -> Vec<Elem> {
        (0..self.num_gens()).map(|i| self.gen(i)).collect()
    }

    pub fn contains(self, x: &Elem) -> bool {
        x.h.support_rank() <= self.rank() && (self.has_center() || x.c == 0)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Z => write!(f, "Z"),
            Slot::Z2 => write!(f, "Z2"),
            Slot::Free(k) => write!(f, "F {k}"),
            Slot::FreeZ(k) => write!(f, "FxZ {k}"),
        }
    }
}

impl FromStr for Slot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Slot> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let rank = |p: Option<&&str>| -> Result<usize> {
            match p.map(|r| r.parse::<usize>()) {
                Some(Ok(k)) if k > 0 => Ok(k),
                _ => format_err(format!("slot {s:?} needs a positive rank")),
            }
        };
        match parts.first().copied() {
            Some("Z") if parts.len() == 1 => Ok(Slot::Z),
            Some("Z2") if parts.len() == 1 => Ok(Slot::Z2),
            Some("F") if parts.len() == 2 => Ok(Slot::new(rank(parts.get(1))?, false)),
            Some("FxZ") if parts.len() == 2 => Ok(Slot::new(rank(parts.get(1))?, true)),
            _ => format_err(format!("unknown group kind {s:?}")),
        }
    }
}

/// Element `h·c^k` of `F_k × ⟨c⟩`; for slots without center `c` is always 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    pub h: Word,
    pub c: i64,
}

impl Elem {
    pub fn new(h: Word, c: i64) -> Elem {
        Elem { h, c }
    }

    pub fn identity() -> Elem {
        Elem::default()
    }

    pub fn free(h: Word) -> Elem {
        Elem { h, c: 0 }
    }

    pub fn central(c: i64) -> Elem {
        Elem { h: Word::identity(), c }
    }

    pub fn is_identity(&self) -> bool {
        self.h.is_identity() && self.c == 0
    }

    pub fn mul(&self, other: &Elem) -> Elem {
        Elem { h: &self.h * &other.h, c: self.c + other.c }
    }

    pub fn inverse(&self) -> Elem {
        Elem { h: self.h.inverse(), c: -self.c }
    }

    pub fn pow(&self, n: i64) -> Elem {
        Elem { h: self.h.pow(n), c: self.c * n }
    }

    /// `g⁻¹·self·g`.
    pub fn conjugate_by(&self, g: &Elem) -> Elem {
        Elem { h: self.h.conjugate_by(&g.h), c: self.c }
    }

    pub fn commutes_with(&self, other: &Elem) -> bool {
        self.h.commutes_with(&other.h)
    }
}

/// Generator names of a vertex group; the center, if any, is named last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Names {
    pub slot: Slot,
    pub names: Vec<String>,
}

impl Names {
    pub fn new(slot: Slot, names: Vec<String>) -> Result<Names> {
        if names.len() != slot.num_gens() {
            return format_err(format!("{slot} needs {} generator names, got {}", slot.num_gens(), names.len()));
        }
        FreeGroup::with_names(names.iter().cloned())?;
        Ok(Names { slot, names })
    }

    /// Default names `x1, x2, ...` with center `z`.
    pub fn anonymous(slot: Slot) -> Names {
        let mut names: Vec<String> = (1..=slot.rank()).map(|i| format!("x{i}")).collect();
        if slot.has_center() {
            names.push("z".into());
        }
        Names { slot, names }
    }

    pub fn parse(&self, s: &str) -> Result<Elem> {
        let w = FreeGroup::with_names(self.names.iter().cloned())?.parse(s)?;
        let k = self.slot.rank();
        let c = if self.slot.has_center() { w.exponent_sums(k + 1)[k] } else { 0 };
        Ok(Elem::new(Word::from_letters(w.letters().iter().copied().filter(|l| l.gen < k)), c))
    }

    pub fn format(&self, x: &Elem) -> String {
        let k = self.slot.rank();
        let fiber = FreeGroup::with_names(self.names[..k].iter().cloned()).expect("validated names");
        let h = fiber.format(&x.h);
        if x.c == 0 {
            return h;
        }
        let z = &self.names[k];
        let zc = if x.c == 1 { z.clone() } else { format!("{z}^{}", x.c) };
        if x.h.is_identity() {
            zc
        } else {
            format!("{h} {zc}")
        }
    }
}

/// A homomorphism out of a slot, by images of its generators (center last).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlotMap {
    pub images: Vec<Elem>,
}

impl SlotMap {
    pub fn identity(slot: Slot) -> SlotMap {
        SlotMap { images: slot.gens() }
    }

    /// Conjugation `x ↦ g⁻¹xg` of a slot.
    pub fn inner(slot: Slot, g: &Elem) -> SlotMap {
        SlotMap { images: slot.gens().iter().map(|x| x.conjugate_by(g)).collect() }
    }

    pub fn apply(&self, x: &Elem) -> Elem {
        let mut out = Elem::identity();
        for l in x.h.letters() {
            let y = &self.images[l.gen];
            out = out.mul(&if l.inv { y.inverse() } else { y.clone() });
        }
        if x.c != 0 {
            out = out.mul(&self.images[self.images.len() - 1].pow(x.c));
        }
        out
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SlotMap) -> SlotMap {
        SlotMap { images: self.images.iter().map(|x| other.apply(x)).collect() }
    }

    /// Checks that the images define a homomorphism `source → target`.
    pub fn check_hom(&self, source: Slot, target: Slot) -> Result<()> {
        if self.images.len() != source.num_gens() {
            return format_err(format!("expected {} images, got {}", source.num_gens(), self.images.len()));
        }
        if let Some(x) = self.images.iter().find(|x| !target.contains(x)) {
            return format_err(format!("image {x:?} does not lie in {target}"));
        }
        if source.has_center() {
            let z = &self.images[source.rank()];
            if self.images[..source.rank()].iter().any(|x| !x.commutes_with(z)) {
                return format_err("image of the center is not central in the image");
            }
        }
        Ok(())
    }

    /// Injectivity on the slot kind, decided from the images.
    pub fn is_injective(&self, source: Slot) -> bool {
        let k = source.rank();
        let hs: Vec<Word> = self.images[..k].iter().map(|x| x.h.clone()).collect();
        match source {
            Slot::Z => !self.images[0].is_identity(),
            Slot::Z2 => {
                let (a, z) = (&self.images[0], &self.images[1]);
                if !a.h.commutes_with(&z.h) {
                    return false;
                }
                let r = if a.h.is_identity() { z.h.root() } else { a.h.root() };
                match (power_of(&a.h, &r), power_of(&z.h, &r)) {
                    (Some(s), Some(t)) => s * z.c - t * a.c != 0,
                    _ => false,
                }
            }
            Slot::Free(_) => basis_rank(&hs) == Some(k),
            Slot::FreeZ(_) => {
                let z = &self.images[k];
                z.h.is_identity() && z.c != 0 && basis_rank(&hs) == Some(k)
            }
        }
    }

    /// Bijectivity when source and target carry the same kind.
    pub fn is_iso(&self, slot: Slot) -> bool {
        self.inverse(slot).is_some()
    }

    /// Inverse of an automorphism-shaped map `slot → slot'` with `slot' = slot`.
    pub fn inverse(&self, slot: Slot) -> Option<SlotMap> {
        let k = slot.rank();
        match slot {
            Slot::Z2 => {
                let (a, z) = (&self.images[0], &self.images[1]);
                let s = power_of(&a.h, &Word::gen(0))?;
                let t = power_of(&z.h, &Word::gen(0))?;
                let (p, q) = (a.c, z.c);
                let det = s * q - t * p;
                if det.abs() != 1 {
                    return None;
                }
                let inv = [[q * det, -t * det], [-p * det, s * det]];
                Some(SlotMap {
                    images: vec![Elem::new(Word::gen(0).pow(inv[0][0]), inv[1][0]), Elem::new(Word::gen(0).pow(inv[0][1]), inv[1][1])],
                })
            }
            _ => {
                if self.images[..k].iter().any(|x| x.h.support_rank() > k) {
                    return None;
                }
                let psi = FreeAut::from_images(self.images[..k].iter().map(|x| x.h.clone()).collect()).ok()?;
                if !slot.has_center() {
                    if self.images.iter().any(|x| x.c != 0) {
                        return None;
                    }
                    return Some(SlotMap { images: psi.inverse_images().iter().cloned().map(Elem::free).collect() });
                }
                let z = &self.images[k];
                if !z.h.is_identity() || z.c.abs() != 1 {
                    return None;
                }
                let eps = z.c;
                let lambda = |w: &Word| -> i64 { w.letters().iter().map(|l| l.sign() * self.images[l.gen].c).sum() };
                let mut images: Vec<Elem> = psi.inverse_images().iter().map(|w| Elem::new(w.clone(), -eps * lambda(w))).collect();
                images.push(Elem::central(eps));
                Some(SlotMap { images })
            }
        }
    }

    /// Preimage of `x` under this injective map out of `source`.
    pub fn preimage(&self, source: Slot, x: &Elem) -> Option<Elem> {
        let k = source.rank();
        let found = match source {
            Slot::Z => {
                let a = &self.images[0];
                let y = if a.h.is_identity() {
                    if !x.h.is_identity() || a.c == 0 || x.c % a.c != 0 {
                        return None;
                    }
                    x.c / a.c
                } else {
                    let r = a.h.root();
                    let (s, j) = (power_of(&a.h, &r)?, power_of(&x.h, &r)?);
                    if j % s != 0 {
                        return None;
                    }
                    j / s
                };
                Elem::free(Word::gen(0).pow(y))
            }
            Slot::Z2 => {
                let (a, z) = (&self.images[0], &self.images[1]);
                let r = if a.h.is_identity() { z.h.root() } else { a.h.root() };
                let (s, t) = (power_of(&a.h, &r)?, power_of(&z.h, &r)?);
                let j = power_of(&x.h, &r)?;
                let (p, q, m) = (a.c, z.c, x.c);
                let det = s * q - t * p;
                if det == 0 {
                    return None;
                }
                let (n1, n2) = (j * q - t * m, s * m - p * j);
                if n1 % det != 0 || n2 % det != 0 {
                    return None;
                }
                Elem::new(Word::gen(0).pow(n1 / det), n2 / det)
            }
            Slot::Free(_) | Slot::FreeZ(_) => {
                let hs: Vec<Word> = self.images[..k].iter().map(|y| y.h.clone()).collect();
                let rank = hs.iter().map(Word::support_rank).max().unwrap_or(0).max(x.h.support_rank()).max(1);
                let w = fold_tracked(rank, &hs).ok()?.express(&x.h)?;
                let lambda: i64 = w.letters().iter().map(|l| l.sign() * self.images[l.gen].c).sum();
                let rest = x.c - lambda;
                if source.has_center() {
                    let zc = self.images[k].c;
                    if zc == 0 || rest % zc != 0 {
                        return None;
                    }
                    Elem::new(w, rest / zc)
                } else if rest != 0 {
                    return None;
                } else {
                    Elem::free(w)
                }
            }
        };
        (self.apply(&found) == *x).then_some(found)
    }
}

/// `j` with `u = r^j`, for `r` a root; `None` if `u ∉ ⟨r⟩`.
pub fn power_of(u: &Word, r: &Word) -> Option<i64> {
    if u.is_identity() {
        return Some(0);
    }
    let ru = u.root();
    let e = u.root_exponent() as i64;
    if ru == *r {
        Some(e)
    } else if ru == r.inverse() {
        Some(-e)
    } else {
        None
    }
}

fn basis_rank(hs: &[Word]) -> Option<usize> {
    if hs.iter().any(Word::is_identity) {
        return None;
    }
    let rank = hs.iter().map(Word::support_rank).max().unwrap_or(1).max(1);
    let g = fold(rank, hs).ok()?;
    Some(g.subgroup_rank())
}

/// Generators of the centralizer of `ys` inside `slot`.
pub fn centralizer(slot: Slot, ys: &[Elem]) -> Vec<Elem> {
    if slot.is_abelian() {
        return slot.gens();
    }
    let nontrivial: Vec<&Word> = ys.iter().map(|y| &y.h).filter(|h| !h.is_identity()).collect();
    let Some(first) = nontrivial.first() else {
        return slot.gens();
    };
    let mut out = Vec::new();
    if nontrivial.iter().all(|h| h.commutes_with(first)) {
        out.push(Elem::free(first.root()));
    }
    if slot.has_center() {
        out.push(Elem::central(1));
    }
    out
}
