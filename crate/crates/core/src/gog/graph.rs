use std::collections::BTreeMap;

use super::slot::{Elem, Names, Slot, SlotMap};
use crate::error::{domain_err, format_err, Result};

/// Splits `[section]` headed text into named blocks of non-empty lines.
/// `#` starts a comment.
pub fn sections(text: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if out.contains_key(&name) {
                return format_err(format!("section [{name}] appears twice"));
            }
            out.insert(name.clone(), Vec::new());
            current = Some(name);
            continue;
        }
        match &current {
            Some(name) => out.get_mut(name).unwrap().push(line.to_string()),
            None => return format_err(format!("line {line:?} outside any section")),
        }
    }
    Ok(out)
}

/// Splits `key: value`.
pub fn key_value(line: &str) -> Result<(&str, &str)> {
    match line.split_once(':') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim(), v.trim())),
        _ => format_err(format!("expected `name: ...`, got {line:?}")),
    }
}

/// A finite graph in the sense of Serre: oriented edges come in pairs
/// `e, ē` with `i(ē) = t(e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<String>,
    init: Vec<usize>,
    term: Vec<usize>,
}

impl Graph {
    pub fn new(vertices: Vec<String>) -> Graph {
        Graph { vertices, edges: Vec::new(), init: Vec::new(), term: Vec::new() }
    }

    /// Adds `e: u → v` and its reverse `~e`; returns the index of `e`.
    /// Edge `2j` and `2j + 1` are always a pair.
    pub fn add_edge(&mut self, name: &str, u: usize, v: usize) -> usize {
        let e = self.edges.len();
        self.edges.push(name.to_string());
        self.edges.push(format!("~{name}"));
        self.init.extend([u, v]);
        self.term.extend([v, u]);
        e
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of oriented edges.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn edge_name(&self, e: usize) -> &str {
        &self.edges[e]
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edge(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e == name)
    }

    pub fn bar(&self, e: usize) -> usize {
        e ^ 1
    }

    pub fn init(&self, e: usize) -> usize {
        self.init[e]
    }

    pub fn term(&self, e: usize) -> usize {
        self.term[e]
    }

    /// Whether `e` is the declared orientation of its pair.
    pub fn is_positive(&self, e: usize) -> bool {
        e % 2 == 0
    }

    /// Oriented edges leaving `v`.
    pub fn star(&self, v: usize) -> Vec<usize> {
        (0..self.num_edges()).filter(|&e| self.init[e] == v).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.spans(&(0..self.num_edges()).step_by(2).collect::<Vec<_>>())
    }

    /// Whether the positive edges `tree` form a spanning tree.
    pub fn is_spanning_tree(&self, tree: &[usize]) -> bool {
        tree.len() + 1 == self.num_vertices() && self.spans(tree)
    }

    fn spans(&self, edges: &[usize]) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &e in edges {
                for (a, b) in [(self.init[e], self.term[e]), (self.term[e], self.init[e])] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// A breadth-first spanning tree (positive edge indices).
    pub fn default_tree(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_vertices()];
        let mut tree = Vec::new();
        if self.num_vertices() == 0 {
            return tree;
        }
        seen[0] = true;
        let mut queue = std::collections::VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for e in self.star(v) {
                let w = self.term[e];
                if !seen[w] {
                    seen[w] = true;
                    tree.push(e & !1);
                    queue.push_back(w);
                }
            }
        }
        tree
    }
}

/// A graph of groups whose vertex and edge groups are drawn from [`Slot`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphOfGroups {
    pub graph: Graph,
    pub vertex_groups: Vec<Names>,
    /// Indexed by oriented edge; `ē` carries the same slot as `e`.
    pub edge_groups: Vec<Slot>,
    /// `i_e : G_e → G_{t(e)}` per oriented edge.
    pub injections: Vec<SlotMap>,
    /// Positive edges of the chosen spanning tree.
    pub tree: Vec<usize>,
}

impl GraphOfGroups {
    pub fn new(graph: Graph, vertex_groups: Vec<Names>, edge_groups: Vec<Slot>, injections: Vec<SlotMap>, tree: Option<Vec<usize>>) -> Result<Self> {
        if vertex_groups.len() != graph.num_vertices() || edge_groups.len() != graph.num_edges() || injections.len() != graph.num_edges() {
            return domain_err("group data does not match the graph");
        }
        if !graph.is_connected() {
            return domain_err("graph is not connected");
        }
        let tree = tree.unwrap_or_else(|| graph.default_tree());
        if !graph.is_spanning_tree(&tree) {
            return domain_err("tree is not a spanning tree");
        }
        let mut names: Vec<&String> = vertex_groups.iter().flat_map(|v| &v.names).collect();
        names.extend(graph.edges.iter());
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return format_err(format!("name {:?} is used twice", w[0]));
        }
        for e in 0..graph.num_edges() {
            if edge_groups[e] != edge_groups[graph.bar(e)] {
                return domain_err(format!("edge {} and its reverse carry different groups", graph.edge_name(e)));
            }
            let target = vertex_groups[graph.term(e)].slot;
            injections[e].check_hom(edge_groups[e], target)?;
            if !injections[e].is_injective(edge_groups[e]) {
                return domain_err(format!("injection of edge {} is not injective", graph.edge_name(e)));
            }
        }
        Ok(GraphOfGroups { graph, vertex_groups, edge_groups, injections, tree })
    }

    /// Parses the `[vertices]`, `[edges]`, `[injections]` and optional
    /// `[tree]` sections; other sections are ignored.
    ///
    /// ```text
    /// [vertices]
    /// v: FxZ a b c      # F_2 x <c>, center named last
    /// w: Z x
    /// [edges]
    /// e: v -> w Z
    /// [injections]
    /// e: x^2
    /// ~e: a b a' b'
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_sections(&sections(text)?)
    }

    pub fn from_sections(sec: &BTreeMap<String, Vec<String>>) -> Result<Self> {
        let empty = Vec::new();
        let get = |name: &str| sec.get(name).unwrap_or(&empty);
        let mut vnames = Vec::new();
        let mut groups = Vec::new();
        for line in get("vertices") {
            let (v, rest) = key_value(line)?;
            let mut parts = rest.split_whitespace();
            let kind = parts.next().unwrap_or("");
            let gens: Vec<String> = parts.map(String::from).collect();
            let slot = match kind {
                "Z" => Slot::Z,
                "Z2" => Slot::Z2,
                "F" => Slot::new(gens.len(), false),
                "FxZ" if gens.len() >= 2 => Slot::new(gens.len() - 1, true),
                _ => return format_err(format!("bad vertex declaration {line:?}")),
            };
            vnames.push(v.to_string());
            groups.push(Names::new(slot, gens)?);
        }
        if vnames.is_empty() {
            return format_err("no vertices declared");
        }
        let mut graph = Graph::new(vnames);
        let mut edge_groups = Vec::new();
        for line in get("edges") {
            let (e, rest) = key_value(line)?;
            let (u, rest) = rest.split_once("->").ok_or_else(|| crate::Error::Format(format!("bad edge {line:?}")))?;
            let mut parts = rest.split_whitespace();
            let v = parts.next().unwrap_or("");
            let slot: Slot = parts.collect::<Vec<_>>().join(" ").parse()?;
            let lookup = |x: &str| graph.vertex(x.trim()).ok_or_else(|| crate::Error::Format(format!("unknown vertex {x:?}")));
            let (u, v) = (lookup(u)?, lookup(v)?);
            if e.starts_with('~') || graph.edge(e).is_some() {
                return format_err(format!("bad or duplicate edge name {e:?}"));
            }
            graph.add_edge(e, u, v);
            edge_groups.extend([slot, slot]);
        }
        let mut injections: Vec<Option<SlotMap>> = vec![None; graph.num_edges()];
        for line in get("injections") {
            let (e, rest) = key_value(line)?;
            let e = graph.edge(e).ok_or_else(|| crate::Error::Format(format!("unknown edge {e:?}")))?;
            let target = &groups[graph.term(e)];
            let images = rest.split(',').map(|w| target.parse(w.trim())).collect::<Result<Vec<Elem>>>()?;
            injections[e] = Some(SlotMap { images });
        }
        let injections = injections
            .into_iter()
            .enumerate()
            .map(|(e, i)| i.ok_or_else(|| crate::Error::Format(format!("missing injection for edge {}", graph.edge_name(e)))))
            .collect::<Result<Vec<_>>>()?;
        let tree = match sec.get("tree") {
            None => None,
            Some(lines) => Some(
                lines
                    .iter()
                    .flat_map(|l| l.split([',', ' ']))
                    .filter(|t| !t.is_empty())
                    .map(|t| match graph.edge(t) {
                        Some(e) if graph.is_positive(e) => Ok(e),
                        _ => format_err(format!("bad tree edge {t:?}")),
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        GraphOfGroups::new(graph, groups, edge_groups, injections, tree)
    }

    pub fn to_text(&self) -> String {
        let g = &self.graph;
        let mut s = String::from("[vertices]\n");
        for v in 0..g.num_vertices() {
            let n = &self.vertex_groups[v];
            let kind = match n.slot {
                Slot::Z => "Z",
                Slot::Z2 => "Z2",
                Slot::Free(_) => "F",
                Slot::FreeZ(_) => "FxZ",
            };
            s += &format!("{}: {kind} {}\n", g.vertex_name(v), n.names.join(" "));
        }
        s += "[edges]\n";
        for e in (0..g.num_edges()).step_by(2) {
            s += &format!("{}: {} -> {} {}\n", g.edge_name(e), g.vertex_name(g.init(e)), g.vertex_name(g.term(e)), self.edge_groups[e]);
        }
        s += "[injections]\n";
        for e in 0..g.num_edges() {
            let n = &self.vertex_groups[g.term(e)];
            s += &format!("{}: {}\n", g.edge_name(e), self.injections[e].images.iter().map(|x| n.format(x)).collect::<Vec<_>>().join(", "));
        }
        if !self.tree.is_empty() {
            s += &format!("[tree]\n{}\n", self.tree.iter().map(|&e| g.edge_name(e)).collect::<Vec<_>>().join(" "));
        }
        s
    }

    pub fn vertex_slot(&self, v: usize) -> Slot {
        self.vertex_groups[v].slot
    }

    pub fn in_tree(&self, e: usize) -> bool {
        self.tree.contains(&(e & !1))
    }

    /// Images `i_e(G_e)` of the edge group generators.
    pub fn edge_image(&self, e: usize) -> &[Elem] {
        &self.injections[e].images
    }
}
