use std::collections::BTreeSet;

use super::{Elem, ElemKind, Structure};

/// Bitmask view of a structure with at most 64 elements. Bit `i` stands for
/// the `i`-th element of the sorted universe.
#[derive(Debug, Clone)]
pub struct BitView {
    n: usize,
    vertex: u64,
    edge: u64,
    nbr: Vec<u64>,
}

impl BitView {
    /// `None` when the universe has more than 64 elements.
    pub fn new(s: &Structure) -> Option<Self> {
        let n = s.len();
        if n > 64 {
            return None;
        }
        let mut vertex = 0;
        let mut edge = 0;
        for (i, (_, k)) in s.kinds().enumerate() {
            match k {
                ElemKind::Vertex => vertex |= 1 << i,
                ElemKind::Edge => edge |= 1 << i,
            }
        }
        let mut nbr = vec![0u64; n];
        for &(a, b) in s.inc_pairs() {
            let (i, j) = (s.index_of(a).unwrap(), s.index_of(b).unwrap());
            nbr[i] |= 1 << j;
            nbr[j] |= 1 << i;
        }
        Some(Self { n, vertex, edge, nbr })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Mask of the whole universe.
    pub fn full(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn vertices(&self) -> u64 {
        self.vertex
    }

    pub fn edges(&self) -> u64 {
        self.edge
    }

    pub fn mask(&self, s: &Structure, set: &BTreeSet<Elem>) -> u64 {
        set.iter().fold(0, |m, e| m | 1 << s.index_of(*e).expect("element in universe"))
    }

    /// Elements incident to some member of `x`.
    pub fn nbr(&self, mut x: u64) -> u64 {
        let mut out = 0;
        while x != 0 {
            out |= self.nbr[x.trailing_zeros() as usize];
            x &= x - 1;
        }
        out
    }

    pub fn inc(&self, x: u64, y: u64) -> bool {
        self.nbr(x) & y != 0
    }

    pub fn is_v(&self, x: u64) -> bool {
        x != 0 && x & !self.vertex == 0
    }

    pub fn is_e(&self, x: u64) -> bool {
        x != 0 && x & !self.edge == 0
    }
}

/// Elements of `s` selected by `mask`.
pub fn unmask(s: &Structure, mut mask: u64) -> BTreeSet<Elem> {
    let mut out = BTreeSet::new();
    while mask != 0 {
        out.insert(s.universe()[mask.trailing_zeros() as usize]);
        mask &= mask - 1;
    }
    out
}
