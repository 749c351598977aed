use serde::{Deserialize, Serialize};

use super::TypeError;
use crate::logic::subsets;
use crate::structures::{BitView, Structure};

/// Default cap on the number of leaves of the signature recursion.
pub const DEFAULT_SIGNATURE_BUDGET: u128 = 1 << 34;

/// Atoms per term row before the pairwise block.
const OWN_BITS: usize = 5;

/// One quantified set: its atom row against the terms before it, and the
/// deduplicated set of its extensions one rank down.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Node {
    pub row: u64,
    pub children: Vec<Node>,
}

/// Canonical type of a boundaried colored structure.
///
/// Terms are the boundary singletons in order, then the color sets, then the
/// quantified sets. Each term `x` gets a row: bits `empty x`, `sing x`,
/// `isV x`, `isE x`, `inc x x`, then for every earlier term `t` the triple
/// `sub x t`, `sub t x`, `inc x t`. `atoms` holds the rows of the boundary
/// and color terms, `children` the extensions by one more set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeSignature {
    pub rank: usize,
    pub atoms: Vec<u64>,
    pub children: Vec<Node>,
}

impl TypeSignature {
    pub fn base_terms(&self) -> usize {
        self.atoms.len()
    }

    fn pair_bit(&self, term: usize, with: usize, offset: usize) -> bool {
        self.atoms[term] >> (OWN_BITS + 3 * with + offset) & 1 == 1
    }

    /// Whether base term `a` is a subset of base term `b`.
    pub fn sub(&self, a: usize, b: usize) -> bool {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => true,
            std::cmp::Ordering::Greater => self.pair_bit(a, b, 0),
            std::cmp::Ordering::Less => self.pair_bit(b, a, 1),
        }
    }
}

pub(crate) fn row(view: &BitView, terms: &[u64], x: u64) -> u64 {
    let nx = view.nbr(x);
    let mut r = (x == 0) as u64
        | ((x.count_ones() == 1) as u64) << 1
        | (view.is_v(x) as u64) << 2
        | (view.is_e(x) as u64) << 3
        | ((nx & x != 0) as u64) << 4;
    for (j, &t) in terms.iter().enumerate() {
        let b = OWN_BITS + 3 * j;
        r |= ((x & !t == 0) as u64) << b | ((t & !x == 0) as u64) << (b + 1) | ((nx & t != 0) as u64) << (b + 2);
    }
    r
}

fn node_for(view: &BitView, terms: &mut Vec<u64>, depth: usize, x: u64) -> Node {
    let r = row(view, terms, x);
    terms.push(x);
    let children = set_for(view, terms, depth - 1);
    terms.pop();
    Node { row: r, children }
}

fn set_for(view: &BitView, terms: &mut Vec<u64>, depth: usize) -> Vec<Node> {
    if depth == 0 {
        return Vec::new();
    }
    let mut out: Vec<Node> = subsets(view.full()).map(|x| node_for(view, terms, depth, x)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(feature = "parallel")]
fn top_set(view: &BitView, terms: &[u64], depth: usize) -> Vec<Node> {
    use rayon::prelude::*;
    if depth == 0 {
        return Vec::new();
    }
    let xs: Vec<u64> = subsets(view.full()).collect();
    let mut out: Vec<Node> = xs.par_iter().map(|&x| node_for(view, &mut terms.to_vec(), depth, x)).collect();
    out.par_sort_unstable();
    out.dedup();
    out
}

#[cfg(not(feature = "parallel"))]
fn top_set(view: &BitView, terms: &[u64], depth: usize) -> Vec<Node> {
    set_for(view, &mut terms.to_vec(), depth)
}

/// Leaves of the recursion, `(2^n)^rank` per quantifier, saturating.
pub fn signature_cost(n: usize, rank: usize) -> u128 {
    1u128.checked_shl((n * rank) as u32).unwrap_or(u128::MAX)
}

/// Full rank-`k` signature.
pub fn signature(s: &Structure, k: usize) -> Result<TypeSignature, TypeError> {
    signature_with_budget(s, k, DEFAULT_SIGNATURE_BUDGET)
}

pub fn signature_with_budget(s: &Structure, rank: usize, budget: u128) -> Result<TypeSignature, TypeError> {
    if signature_cost(s.len(), rank) > budget {
        return Err(TypeError::BudgetExceeded { size: s.len(), rank });
    }
    let terms_needed = s.boundary().len() + s.num_colors() + rank;
    if OWN_BITS + 3 * terms_needed.saturating_sub(1) > 64 {
        return Err(TypeError::TooManyTerms(terms_needed));
    }
    let view = BitView::new(s).ok_or(TypeError::BudgetExceeded { size: s.len(), rank })?;
    let mut terms: Vec<u64> = Vec::with_capacity(terms_needed);
    let mut atoms = Vec::new();
    let base = s
        .boundary()
        .iter()
        .map(|&p| 1u64 << s.index_of(p).expect("boundary in universe"))
        .chain(s.colors().iter().map(|c| view.mask(s, c)));
    for t in base {
        atoms.push(row(&view, &terms, t));
        terms.push(t);
    }
    let children = top_set(&view, &terms, rank);
    Ok(TypeSignature { rank, atoms, children })
}

/// Rank-`k` equivalence of two structures with equal color count and
/// boundary length.
pub fn equivalent(a: &Structure, b: &Structure, k: usize) -> Result<bool, TypeError> {
    Ok(signature(a, k)? == signature(b, k)?)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::structures::{ElemKind, Graph};

    #[test]
    fn empty_structure_rank_one() {
        let s = Structure::empty(0);
        let sig = signature(&s, 1).unwrap();
        assert_eq!(sig.children.len(), 1);
        assert!(sig.children[0].children.is_empty());
        assert!(sig.atoms.is_empty());
    }

    #[test]
    fn color_bit_differs() {
        let plain = Structure::from_parts([(0, ElemKind::Vertex)], [], vec![BTreeSet::new()], vec![0]).unwrap();
        let colored = plain.clone().with_colors(vec![BTreeSet::from([0])]).unwrap();
        let (a, b) = (signature(&plain, 0).unwrap(), signature(&colored, 0).unwrap());
        assert_ne!(a.atoms, b.atoms);
        assert!(b.sub(0, 1) && !a.sub(0, 1));
    }

    #[test]
    fn isomorphic_copies_agree() {
        let (a, _) = Graph::path(3).incidence_structure();
        let (b, _) = Graph::new([7, 8, 9], [(8, 9), (7, 8)]).unwrap().incidence_structure();
        assert!(equivalent(&a, &b, 2).unwrap());
    }

    #[test]
    fn edge_versus_two_vertices() {
        let (a, _) = Graph::path(2).incidence_structure();
        let (b, _) = Graph::new([1, 2], []).unwrap().incidence_structure();
        assert!(!equivalent(&a, &b, 1).unwrap());
        assert!(equivalent(&b, &b, 1).unwrap());
    }

    #[test]
    fn rank_refines() {
        let two = Graph::new([1, 2], []).unwrap().incidence_structure().0;
        let three = Graph::new([1, 2, 3], []).unwrap().incidence_structure().0;
        assert!(equivalent(&two, &three, 1).unwrap());
        assert!(!equivalent(&two, &three, 2).unwrap());
    }

    #[test]
    fn budget_and_terms() {
        let (s, _) = Graph::path(10).incidence_structure();
        assert!(matches!(signature_with_budget(&s, 2, 1 << 20), Err(TypeError::BudgetExceeded { .. })));
        let many = Structure::empty(20);
        assert!(matches!(signature(&many, 1), Err(TypeError::TooManyTerms(21))));
    }
}
