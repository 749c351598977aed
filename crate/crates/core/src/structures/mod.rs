//! Graphs, incidence structures and boundaried colored structures.
//!
//! A [`Structure`] is the finite relational structure everything else works
//! on: a universe of element ids, each labelled vertex or edge, a symmetric
//! irreflexive incidence relation, `m` color sets and an ordered boundary.

mod bits;
mod io;
mod td;

pub use bits::{unmask, BitView};
pub use io::{parse_dimacs, parse_td_file};
pub use td::{
    eta, exact_td, heuristic_td, lift_td_to_incidence, NodeKind, TdNode, TreeDecomposition, Violation, EXACT_TD_CAP,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Element id. Vertex ids of an input graph are reused as element ids.
pub type Elem = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("structures are not compatible")]
    IncompatibleStructures,
    #[error("boundary already holds {0} elements")]
    BoundaryFull(usize),
    #[error("position {pos} out of range for boundary of length {len}")]
    BadPosition { pos: usize, len: usize },
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("{size} elements exceed the exact-search cap of {cap}")]
    TooLarge { size: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElemKind {
    Vertex,
    Edge,
}

/// Simple undirected graph with natural-number vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Graph {
    vertices: Vec<u32>,
    edges: BTreeSet<(u32, u32)>,
}

impl Graph {
    pub fn new(
        vertices: impl IntoIterator<Item = u32>,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, StructureError> {
        let vertices: BTreeSet<u32> = vertices.into_iter().collect();
        let mut norm = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(StructureError::Invalid(format!("self-loop at {u}")));
            }
            if !vertices.contains(&u) || !vertices.contains(&v) {
                return Err(StructureError::Invalid(format!("edge {u}-{v} has unknown endpoint")));
            }
            norm.insert((u.min(v), u.max(v)));
        }
        Ok(Self { vertices: vertices.into_iter().collect(), edges: norm })
    }

    /// Path on vertices `1..=n`.
    pub fn path(n: u32) -> Self {
        Self::new(1..=n, (1..n).map(|i| (i, i + 1))).unwrap()
    }

    /// Cycle on vertices `1..=n`, `n >= 3`.
    pub fn cycle(n: u32) -> Self {
        Self::new(1..=n, (1..n).map(|i| (i, i + 1)).chain([(1, n)])).unwrap()
    }

    pub fn complete(n: u32) -> Self {
        let edges = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v)));
        Self::new(1..=n, edges).unwrap()
    }

    /// Star with center 1 and `leaves` leaves.
    pub fn star(leaves: u32) -> Self {
        Self::new(1..=leaves + 1, (2..=leaves + 1).map(|v| (1, v))).unwrap()
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// The incidence structure I(G): one element per vertex (same id) and one
    /// fresh element per edge, numbered after the largest vertex id in edge
    /// order. Returns the structure and the edge → element map.
    pub fn incidence_structure(&self) -> (Structure, BTreeMap<(u32, u32), Elem>) {
        let first = self.vertices.last().map_or(0, |&v| v + 1);
        let mut elems: Vec<(Elem, ElemKind)> = self.vertices.iter().map(|&v| (v, ElemKind::Vertex)).collect();
        let mut inc = BTreeSet::new();
        let mut edge_map = BTreeMap::new();
        for (&(u, v), e) in self.edges.iter().zip(first..) {
            elems.push((e, ElemKind::Edge));
            inc.insert((u.min(e), u.max(e)));
            inc.insert((v.min(e), v.max(e)));
            edge_map.insert((u, v), e);
        }
        let s = Structure::from_parts(elems, inc, Vec::new(), Vec::new()).expect("incidence structure is well formed");
        (s, edge_map)
    }
}

/// Finite structure over the incidence vocabulary with `m` color sets and a
/// boundary tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Structure {
    elems: Vec<Elem>,
    kinds: Vec<ElemKind>,
    inc: BTreeSet<(Elem, Elem)>,
    colors: Vec<BTreeSet<Elem>>,
    boundary: Vec<Elem>,
}

impl Structure {
    /// The empty structure with `m` (empty) colors and empty boundary.
    pub fn empty(m: usize) -> Self {
        Self {
            elems: Vec::new(),
            kinds: Vec::new(),
            inc: BTreeSet::new(),
            colors: vec![BTreeSet::new(); m],
            boundary: Vec::new(),
        }
    }

    pub fn from_parts(
        elems: impl IntoIterator<Item = (Elem, ElemKind)>,
        inc: impl IntoIterator<Item = (Elem, Elem)>,
        colors: Vec<BTreeSet<Elem>>,
        boundary: Vec<Elem>,
    ) -> Result<Self, StructureError> {
        let map: BTreeMap<Elem, ElemKind> = elems.into_iter().collect();
        let (elems, kinds): (Vec<_>, Vec<_>) = map.into_iter().unzip();
        let mut s = Self { elems, kinds, inc: BTreeSet::new(), colors, boundary };
        for (a, b) in inc {
            if a == b {
                return Err(StructureError::Invalid(format!("reflexive incidence at {a}")));
            }
            if !s.contains(a) || !s.contains(b) {
                return Err(StructureError::Invalid(format!("incidence {a}-{b} outside universe")));
            }
            s.inc.insert((a.min(b), a.max(b)));
        }
        for (j, c) in s.colors.iter().enumerate() {
            if let Some(e) = c.iter().find(|e| !s.contains(**e)) {
                return Err(StructureError::Invalid(format!("color {j} holds unknown element {e}")));
            }
        }
        let distinct: BTreeSet<_> = s.boundary.iter().collect();
        if distinct.len() != s.boundary.len() {
            return Err(StructureError::Invalid("boundary repeats an element".into()));
        }
        if let Some(e) = s.boundary.iter().find(|e| !s.contains(**e)) {
            return Err(StructureError::Invalid(format!("boundary element {e} outside universe")));
        }
        Ok(s)
    }

    pub fn universe(&self) -> &[Elem] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn index_of(&self, e: Elem) -> Option<usize> {
        self.elems.binary_search(&e).ok()
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.index_of(e).is_some()
    }

    pub fn kind(&self, e: Elem) -> Option<ElemKind> {
        self.index_of(e).map(|i| self.kinds[i])
    }

    pub fn is_vertex(&self, e: Elem) -> bool {
        self.kind(e) == Some(ElemKind::Vertex)
    }

    pub fn kinds(&self) -> impl Iterator<Item = (Elem, ElemKind)> + '_ {
        self.elems.iter().copied().zip(self.kinds.iter().copied())
    }

    pub fn vertex_elems(&self) -> impl Iterator<Item = Elem> + '_ {
        self.kinds().filter(|(_, k)| *k == ElemKind::Vertex).map(|(e, _)| e)
    }

    pub fn inc_pairs(&self) -> &BTreeSet<(Elem, Elem)> {
        &self.inc
    }

    pub fn incident(&self, a: Elem, b: Elem) -> bool {
        self.inc.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, e: Elem) -> BTreeSet<Elem> {
        self.inc
            .iter()
            .filter_map(|&(a, b)| {
                if a == e {
                    Some(b)
                } else if b == e {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn colors(&self) -> &[BTreeSet<Elem>] {
        &self.colors
    }

    pub fn num_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn boundary(&self) -> &[Elem] {
        &self.boundary
    }

    pub fn max_elem(&self) -> Option<Elem> {
        self.elems.last().copied()
    }

    fn fresh(&self) -> Elem {
        self.max_elem().map_or(0, |e| e + 1)
    }

    /// Replaces the color sets. Every set must be a subset of the universe.
    pub fn with_colors(mut self, colors: Vec<BTreeSet<Elem>>) -> Result<Self, StructureError> {
        for c in &colors {
            if let Some(e) = c.iter().find(|e| !self.contains(**e)) {
                return Err(StructureError::Invalid(format!("color holds unknown element {e}")));
            }
        }
        self.colors = colors;
        Ok(self)
    }

    /// Replaces the boundary tuple.
    pub fn with_boundary(mut self, boundary: Vec<Elem>) -> Result<Self, StructureError> {
        let distinct: BTreeSet<_> = boundary.iter().collect();
        if distinct.len() != boundary.len() || boundary.iter().any(|e| !self.contains(*e)) {
            return Err(StructureError::Invalid("bad boundary".into()));
        }
        self.boundary = boundary;
        Ok(self)
    }

    /// True iff the position map `p_i -> q_i` is an isomorphism of the
    /// boundary-induced substructures that also preserves color membership.
    pub fn compatible(&self, other: &Structure) -> bool {
        if self.boundary.len() != other.boundary.len() || self.colors.len() != other.colors.len() {
            return false;
        }
        let (p, q) = (&self.boundary, &other.boundary);
        for i in 0..p.len() {
            if self.kind(p[i]) != other.kind(q[i]) {
                return false;
            }
            for j in 0..self.colors.len() {
                if self.colors[j].contains(&p[i]) != other.colors[j].contains(&q[i]) {
                    return false;
                }
            }
            for k in i + 1..p.len() {
                if self.incident(p[i], p[k]) != other.incident(q[i], q[k]) {
                    return false;
                }
            }
        }
        true
    }

    /// Disjoint union with positionwise boundary identification. Element ids
    /// of `self` are kept; non-boundary elements of `other` are renumbered
    /// after `self`'s largest id, in ascending order.
    pub fn join(&self, other: &Structure) -> Result<Structure, StructureError> {
        if !self.compatible(other) {
            return Err(StructureError::IncompatibleStructures);
        }
        let mut rename: BTreeMap<Elem, Elem> =
            other.boundary.iter().copied().zip(self.boundary.iter().copied()).collect();
        let mut next = self.fresh();
        for &e in &other.elems {
            rename.entry(e).or_insert_with(|| {
                next += 1;
                next - 1
            });
        }
        let mut elems: Vec<(Elem, ElemKind)> = self.kinds().collect();
        elems.extend(other.kinds().filter(|(e, _)| !other.boundary.contains(e)).map(|(e, k)| (rename[&e], k)));
        let inc = self.inc.iter().copied().chain(other.inc.iter().map(|&(a, b)| (rename[&a], rename[&b])));
        let colors = self
            .colors
            .iter()
            .zip(&other.colors)
            .map(|(u, w)| u.iter().copied().chain(w.iter().map(|e| rename[e])).collect())
            .collect();
        Structure::from_parts(elems, inc, colors, self.boundary.clone())
    }

    /// Restriction of every relation, color and the boundary to `keep`.
    pub fn induced(&self, keep: &BTreeSet<Elem>) -> Structure {
        let elems = self.kinds().filter(|(e, _)| keep.contains(e));
        let inc = self.inc.iter().copied().filter(|(a, b)| keep.contains(a) && keep.contains(b));
        let colors = self.colors.iter().map(|c| c.intersection(keep).copied().collect()).collect();
        let boundary = self.boundary.iter().copied().filter(|e| keep.contains(e)).collect();
        Structure::from_parts(elems, inc, colors, boundary).expect("restriction stays well formed")
    }

    /// Adds a fresh element attached only to the boundary positions in
    /// `adj_positions`, inserts it into the boundary at `pos` and into the
    /// colors listed in `color_membership`. `capacity` bounds the boundary
    /// length after insertion.
    pub fn introduce_extend(
        &self,
        pos: usize,
        adj_positions: &[usize],
        kind: ElemKind,
        color_membership: &[usize],
        capacity: usize,
    ) -> Result<Structure, StructureError> {
        let len = self.boundary.len();
        if len >= capacity {
            return Err(StructureError::BoundaryFull(len));
        }
        if pos > len {
            return Err(StructureError::BadPosition { pos, len });
        }
        if let Some(&p) = adj_positions.iter().find(|&&p| p >= len) {
            return Err(StructureError::BadPosition { pos: p, len });
        }
        if let Some(&j) = color_membership.iter().find(|&&j| j >= self.colors.len()) {
            return Err(StructureError::BadPosition { pos: j, len: self.colors.len() });
        }
        let v = self.fresh();
        let mut out = self.clone();
        out.elems.push(v);
        out.kinds.push(kind);
        for &p in adj_positions {
            let u = self.boundary[p];
            out.inc.insert((u.min(v), u.max(v)));
        }
        for &j in color_membership {
            out.colors[j].insert(v);
        }
        out.boundary.insert(pos, v);
        Ok(out)
    }

    /// Removes boundary position `d`; the element stays in the universe.
    pub fn drop_boundary_at(&self, d: usize) -> Result<Structure, StructureError> {
        if d >= self.boundary.len() {
            return Err(StructureError::BadPosition { pos: d, len: self.boundary.len() });
        }
        let mut out = self.clone();
        out.boundary.remove(d);
        Ok(out)
    }
}
