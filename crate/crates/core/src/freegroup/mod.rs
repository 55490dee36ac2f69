//! Finite-rank free groups: reduced words, automorphisms, and finitely
//! generated subgroups represented by folded graphs.

mod aut;
mod graph;
mod kernel;
mod parse;
mod word;

pub use aut::{nielsen_generators, FreeAut, NotAutomorphism};
pub use graph::{fold, fold_tracked, SubgroupGraph, TrackedFold};
pub use kernel::{congruence_kernel, is_characteristic, transitive_actions, Ambient, DEFAULT_STATE_BUDGET};
pub use parse::{parse_letters, write_word};
pub use word::{Letter, Word};

use crate::error::{format_err, Result};

/// A free group of finite rank with named generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreeGroup {
    names: Vec<String>,
}

impl FreeGroup {
    /// Generators named `a, b, c, ...` (`x1, x2, ...` beyond 26).
    pub fn new(rank: usize) -> Self {
        let names = (0..rank)
            .map(|i| {
                if rank <= 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("x{}", i + 1)
                }
            })
            .collect();
        FreeGroup { names }
    }

    pub fn with_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return format_err("a free group needs at least one generator");
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || !n.chars().all(|c| c.is_alphanumeric() || c == '_') || n == "1" {
                return format_err(format!("invalid generator name {n:?}"));
            }
            if n.chars().next().unwrap().is_ascii_digit() {
                return format_err(format!("generator name {n:?} starts with a digit"));
            }
            if names[..i].contains(n) {
                return format_err(format!("duplicate generator name {n:?}"));
            }
        }
        Ok(FreeGroup { names })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn generator(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Parses the textual word syntax: generator names juxtaposed, `'` for
    /// inverses, optional `^k` exponents and parentheses, `1` for the identity.
    pub fn parse(&self, s: &str) -> Result<Word> {
        Ok(Word::from_letters(parse_letters(&self.names, s)?))
    }

    pub fn format(&self, w: &Word) -> String {
        write_word(&self.names, w)
    }

    pub fn contains(&self, w: &Word) -> bool {
        w.support_rank() <= self.rank()
    }
}
