use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

/// A generator or its formal inverse. Generator indices are 0-based and the
/// sign is carried separately from the index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub inv: bool,
}

impl Letter {
    pub fn pos(gen: usize) -> Self {
        Letter { gen, inv: false }
    }

    pub fn neg(gen: usize) -> Self {
        Letter { gen, inv: true }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }

    pub fn sign(self) -> i64 {
        if self.inv {
            -1
        } else {
            1
        }
    }

    /// Dense index in `0..2*rank`: `a, a', b, b', ...`.
    pub fn index(self) -> usize {
        2 * self.gen + self.inv as usize
    }

    pub fn from_index(i: usize) -> Self {
        Letter { gen: i / 2, inv: i % 2 == 1 }
    }
}

/// A freely reduced word. Ordering is shortlex with `a < a' < b < b' < ...`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

fn push_reduced(buf: &mut Vec<Letter>, l: Letter) {
    if buf.last() == Some(&l.inverse()) {
        buf.pop();
    } else {
        buf.push(l);
    }
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn gen(i: usize) -> Self {
        Word(vec![Letter::pos(i)])
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut buf = Vec::new();
        for l in letters {
            push_reduced(&mut buf, l);
        }
        Word(buf)
    }

    /// Builds a word from signed 1-based integers (`1` = a, `-1` = a', `2` = b, ...).
    pub fn from_ints(ints: &[i32]) -> Self {
        Self::from_letters(ints.iter().filter(|&&x| x != 0).map(|&x| Letter {
            gen: x.unsigned_abs() as usize - 1,
            inv: x < 0,
        }))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Largest generator index used, plus one.
    pub fn support_rank(&self) -> usize {
        self.0.iter().map(|l| l.gen + 1).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// `ad_g(w) = g⁻¹ w g`.
    pub fn conjugate_by(&self, g: &Word) -> Word {
        &(&g.inverse() * self) * g
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// Returns `(u, c)` with `self = u c u⁻¹` and `c` cyclically reduced.
    pub fn cyclic_reduction(&self) -> (Word, Word) {
        let n = self.0.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.0[k] == self.0[n - 1 - k].inverse() {
            k += 1;
        }
        (Word(self.0[..k].to_vec()), Word(self.0[k..n - k].to_vec()))
    }

    pub fn cyclic_length(&self) -> usize {
        self.cyclic_reduction().1.len()
    }

    /// Rotation moving the first `i` letters to the end.
    pub fn rotate(&self, i: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let i = i % self.0.len();
        let mut v = self.0[i..].to_vec();
        v.extend_from_slice(&self.0[..i]);
        Word(v)
    }

    /// Least rotation of the cyclic reduction (the canonical cyclic word).
    pub fn least_rotation(&self) -> Word {
        let (_, c) = self.cyclic_reduction();
        (0..c.len().max(1)).map(|i| c.rotate(i)).min().unwrap_or_default()
    }

    /// The primitive root `r` with `self = r^p`, `p > 0`. The identity is its own root.
    pub fn root(&self) -> Word {
        let (u, c) = self.cyclic_reduction();
        let n = c.len();
        if n == 0 {
            return Word::identity();
        }
        for d in 1..=n {
            if n % d == 0 && (d..n).all(|i| c.0[i] == c.0[i - d]) {
                let s = Word(c.0[..d].to_vec());
                return &(&u * &s) * &u.inverse();
            }
        }
        unreachable!()
    }

    /// Exponent `p` with `self = self.root()^p`.
    pub fn root_exponent(&self) -> usize {
        let r = self.root();
        if r.is_empty() {
            0
        } else {
            self.cyclic_length() / r.cyclic_length()
        }
    }

    pub fn exponent_sums(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0; rank.max(self.support_rank())];
        for l in &self.0 {
            v[l.gen] += l.sign();
        }
        v
    }

    /// Decides conjugacy. On success returns `w` with `w⁻¹ self w = other`;
    /// among rotations the one with the least starting index is used.
    pub fn conjugator_to(&self, other: &Word) -> Option<Word> {
        let (p, cu) = self.cyclic_reduction();
        let (q, cv) = other.cyclic_reduction();
        if cu.len() != cv.len() {
            return None;
        }
        if cu.is_empty() {
            return Some(&p * &q.inverse());
        }
        (0..cu.len()).find(|&i| cu.rotate(i) == cv).map(|i| {
            let s = Word(cu.0[..i].to_vec());
            &(&p * &s) * &q.inverse()
        })
    }

    pub fn is_conjugate(&self, other: &Word) -> bool {
        self.conjugator_to(other).is_some()
    }

    pub fn commutes_with(&self, other: &Word) -> bool {
        &(self * other) == &(other * self)
    }

    /// Substitutes `images[i]` for generator `i`.
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut buf = Vec::new();
        for l in &self.0 {
            let img = &images[l.gen];
            if l.inv {
                for x in img.0.iter().rev() {
                    push_reduced(&mut buf, x.inverse());
                }
            } else {
                for &x in &img.0 {
                    push_reduced(&mut buf, x);
                }
            }
        }
        Word(buf)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul<&Word> for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        let mut buf = self.0.clone();
        for &l in &rhs.0 {
            push_reduced(&mut buf, l);
        }
        Word(buf)
    }
}

impl Mul<Word> for Word {
    type Output = Word;

    fn mul(self, rhs: Word) -> Word {
        &self * &rhs
    }
}

impl Mul<&Word> for Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        &self * rhs
    }
}

impl fmt::Display for Word {
    /// Generator-name-free rendering using `x0, x1, ...`; see
    /// [`FreeGroup::format`](super::FreeGroup::format) for named output.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "x{}{}", l.gen, if l.inv { "'" } else { "" })?;
        }
        Ok(())
    }
}
