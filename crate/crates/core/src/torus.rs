//! Mapping tori `F ⋊_α ⟨t⟩` with the relation `t⁻¹ a t = α(a)`.

use std::fmt;

use crate::error::{domain_err, format_err, Error, Result};
use crate::freegroup::{FreeAut, FreeGroup, SubgroupGraph, Word};

pub const DEFAULT_KMAX: usize = 12;

/// The element `t^power · tail`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusElement {
    pub power: i64,
    pub tail: Word,
}

impl TorusElement {
    pub fn new(power: i64, tail: Word) -> Self {
        TorusElement { power, tail }
    }

    pub fn identity() -> Self {
        TorusElement { power: 0, tail: Word::identity() }
    }

    pub fn fiber(w: Word) -> Self {
        TorusElement { power: 0, tail: w }
    }

    pub fn is_identity(&self) -> bool {
        self.power == 0 && self.tail.is_identity()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingTorus {
    fiber: FreeGroup,
    monodromy: FreeAut,
    stable: String,
    conjugator: Option<Word>,
}

/// `Sub(H) = ⟨H, t^k a⁻¹⟩` where `α^k(H) = a⁻¹ H a` and `k > 0` is minimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubMappingTorus {
    pub base: SubgroupGraph,
    pub period: usize,
    pub corrector: Word,
}

impl SubMappingTorus {
    /// `t^k a⁻¹`, which normalizes `H`.
    pub fn stable_generator(&self) -> TorusElement {
        TorusElement::new(self.period as i64, self.corrector.inverse())
    }
}

/// Splitting `T = F × ⟨tγ⁻¹⟩` available when `α = ad_γ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductForm {
    pub free_rank: usize,
    pub gamma: Word,
    pub center: TorusElement,
}

impl MappingTorus {
    pub fn new(fiber: FreeGroup, monodromy: FreeAut) -> Result<Self> {
        if monodromy.rank() != fiber.rank() {
            return domain_err("monodromy rank differs from the fiber rank");
        }
        let stable = if fiber.generator("t").is_none() { "t".to_string() } else { "T".to_string() };
        Ok(MappingTorus { fiber, monodromy, stable, conjugator: None })
    }

    pub fn fiber(&self) -> &FreeGroup {
        &self.fiber
    }

    pub fn monodromy(&self) -> &FreeAut {
        &self.monodromy
    }

    pub fn rank(&self) -> usize {
        self.fiber.rank()
    }

    pub fn stable_name(&self) -> &str {
        &self.stable
    }

    /// Conjugator supplied with the description, if any.
    pub fn supplied_conjugator(&self) -> Option<&Word> {
        self.conjugator.as_ref()
    }

    /// Parses a torus description:
    /// `fiber rank: n`, optional `fiber names: x y ..`,
    /// `monodromy: a -> w_a, b -> w_b, ..` and optional `conjugator: w`.
    /// Other `key: value` lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rank = None;
        let mut names = None;
        let mut mono = None;
        let mut conj = None;
        for line in text.lines().map(|l| l.split('#').next().unwrap().trim()).filter(|l| !l.is_empty()) {
            let (key, value) = line.split_once(':').ok_or_else(|| Error::Format(format!("expected `key: value`, got {line:?}")))?;
            match key.trim() {
                "fiber rank" => rank = Some(value.trim().parse::<usize>().map_err(|_| Error::Format(format!("bad rank {:?}", value.trim())))?),
                "fiber names" => names = Some(value.split_whitespace().map(String::from).collect::<Vec<_>>()),
                "monodromy" => mono = Some(value.to_string()),
                "conjugator" => conj = Some(value.to_string()),
                _ => {}
            }
        }
        let rank = rank.ok_or_else(|| Error::Format("missing `fiber rank`".into()))?;
        if rank == 0 {
            return format_err("fiber rank must be positive");
        }
        let fiber = match names {
            Some(n) if n.len() != rank => return format_err("fiber names do not match the rank"),
            Some(n) => FreeGroup::with_names(n)?,
            None => FreeGroup::new(rank),
        };
        let mono = FreeAut::parse(&fiber, &mono.ok_or_else(|| Error::Format("missing `monodromy`".into()))?)?;
        let mut t = MappingTorus::new(fiber, mono)?;
        if let Some(c) = conj {
            t.conjugator = Some(t.fiber.parse(&c)?);
        }
        Ok(t)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("fiber rank: {}\n", self.rank());
        if self.fiber != FreeGroup::new(self.rank()) {
            s += &format!("fiber names: {}\n", self.fiber.names().join(" "));
        }
        s += &format!("monodromy: {}\n", self.monodromy.format(&self.fiber));
        if let Some(c) = &self.conjugator {
            s += &format!("conjugator: {}\n", self.fiber.format(c));
        }
        s
    }

    /// `α^m(w)` for any integer `m`.
    pub fn alpha_pow(&self, w: &Word, m: i64) -> Word {
        let mut out = w.clone();
        for _ in 0..m.unsigned_abs() {
            out = if m > 0 { self.monodromy.apply(&out) } else { self.monodromy.apply_inverse(&out) };
        }
        out
    }

    /// `(t^k w)(t^m v) = t^{k+m} α^m(w) v`.
    pub fn multiply(&self, x: &TorusElement, y: &TorusElement) -> TorusElement {
        TorusElement::new(x.power + y.power, &self.alpha_pow(&x.tail, y.power) * &y.tail)
    }

    /// `(t^k w)⁻¹ = t^{-k} α^{-k}(w⁻¹)`.
    pub fn inverse(&self, x: &TorusElement) -> TorusElement {
        TorusElement::new(-x.power, self.alpha_pow(&x.tail.inverse(), -x.power))
    }

    pub fn pow(&self, x: &TorusElement, n: i64) -> TorusElement {
        let base = if n < 0 { self.inverse(x) } else { x.clone() };
        (0..n.unsigned_abs()).fold(TorusElement::identity(), |acc, _| self.multiply(&acc, &base))
    }

    /// `g⁻¹ x g`.
    pub fn conjugate(&self, x: &TorusElement, g: &TorusElement) -> TorusElement {
        self.multiply(&self.multiply(&self.inverse(g), x), g)
    }

    pub fn orientation_degree(&self, x: &TorusElement) -> i64 {
        x.power
    }

    pub fn stable_letter(&self) -> TorusElement {
        TorusElement::new(1, Word::identity())
    }

    /// Parses `t^k * w`, `t`, `w` or `t^k w`; the stable letter must come first.
    pub fn parse_element(&self, s: &str) -> Result<TorusElement> {
        let s = s.trim();
        let Some(rest) = s.strip_prefix(self.stable.as_str()) else {
            return Ok(TorusElement::fiber(self.fiber.parse(s)?));
        };
        let (k, tail) = match rest.strip_prefix('^') {
            Some(r) => {
                let end = r.char_indices().find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && (c == '-' || c == '+')))).map_or(r.len(), |(i, _)| i);
                let k = r[..end].parse::<i64>().map_err(|_| Error::Format(format!("bad exponent in {s:?}")))?;
                (k, &r[end..])
            }
            None => (1, rest),
        };
        let tail = tail.trim_start().trim_start_matches('*');
        Ok(TorusElement::new(k, self.fiber.parse(tail)?))
    }

    pub fn format_element(&self, x: &TorusElement) -> String {
        let t = match x.power {
            0 => String::new(),
            1 => self.stable.clone(),
            k => format!("{}^{k}", self.stable),
        };
        match (t.is_empty(), x.tail.is_identity()) {
            (true, _) => self.fiber.format(&x.tail),
            (false, true) => t,
            (false, false) => format!("{t} * {}", self.fiber.format(&x.tail)),
        }
    }

    /// Smallest `k ≤ kmax` with `α^k(H)` conjugate to `H`, and the corrector.
    /// Each `k` is decided exactly; exhausting `kmax` is reported as a
    /// resource error since a larger period cannot be ruled out.
    pub fn sub_mapping_torus(&self, h: &SubgroupGraph, kmax: usize) -> Result<SubMappingTorus> {
        if h.rank() != self.rank() {
            return domain_err("subgroup lives in a free group of different rank");
        }
        let mut image = h.clone();
        for k in 1..=kmax {
            image = image.image(self.monodromy.images());
            if let Some(a) = h.conjugator_to(&image) {
                return Ok(SubMappingTorus { base: h.clone(), period: k, corrector: a });
            }
        }
        Err(Error::Resource(format!("no period k ≤ {kmax} found for the sub-mapping torus")))
    }

    /// Product splitting when the monodromy is inner. A supplied conjugator
    /// is checked; otherwise the exact innerness test is used.
    pub fn product_form(&self) -> Option<ProductForm> {
        let gamma = match &self.conjugator {
            Some(g) if FreeAut::inner(self.rank(), g) == self.monodromy => g.clone(),
            _ => self.monodromy.inner_conjugator()?,
        };
        Some(ProductForm { free_rank: self.rank(), center: TorusElement::new(1, gamma.inverse()), gamma })
    }
}

impl fmt::Display for MappingTorus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{} ⋊ <{}>, {}", self.rank(), self.stable, self.monodromy.format(&self.fiber))
    }
}

/// Fiber-and-orientation preserving isomorphy of two tori in product form:
/// the free factors must have equal rank.
pub fn fop_isomorphic_class_c(t1: &MappingTorus, t2: &MappingTorus) -> Result<bool> {
    match (t1.product_form(), t2.product_form()) {
        (Some(p), Some(q)) => Ok(p.free_rank == q.free_rank),
        _ => domain_err("torus is not in product form (monodromy is not inner)"),
    }
}
