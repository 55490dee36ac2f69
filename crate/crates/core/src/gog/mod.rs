//! Graphs of groups over a closed family of vertex group kinds, words in
//! the Bass group, and automorphisms checked against the Bass diagram.

mod bass;
mod graph;
mod morphism;
mod presentation;
mod slot;

pub use bass::BassWord;
pub use graph::{key_value, sections, Graph, GraphOfGroups};
pub(crate) use morphism::tuple_conjugator;
pub use morphism::{coset_reps_delta0, extend_identically, graph_isomorphisms, small_modular_generators, DiagramError, GoGMorphism, GraphMap, SmallModularElement};
pub use presentation::{pi1_presentation, Presentation};
pub use slot::{centralizer, power_of, Elem, Names, Slot, SlotMap};
