//! Local polytopes, their simplex lifts, and the glued system over a nice
//! tree decomposition.
//!
//! The assembled [`SparseSystem`] has one block per decomposition node: the
//! node's own `t` columns, its `f` columns (one per vertex of the local
//! polytope) and the rows of the simplex lift. A child's `t` block is shared
//! with its parent's `d`, `l` or `r` coordinates.

mod system;

pub use system::{
    add_projection, apply_face, assemble, gaifman_graph, glued_system, simplex_lift, size_bound, system_decomposition,
    GlueNode, Row, SparseSystem, SystemDecomposition, SystemVar,
};

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::structures::NodeKind;
use crate::types::{FeasibleSets, TypeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("polytope has no vertices")]
    EmptyPolytope,
    #[error("vertex of length {got} over {want} coordinates")]
    BadVertex { got: usize, want: usize },
    #[error("glue index lists differ: {0} versus {1}")]
    GlueMismatch(usize, usize),
    #[error("invalid system decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("node {0} is not part of a nice decomposition")]
    NotNice(usize),
}

/// Convex hull of a set of 0/1 vectors over named coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexPolytope {
    coords: Vec<String>,
    vertices: BTreeSet<Vec<u8>>,
}

impl VertexPolytope {
    pub fn new(coords: Vec<String>, vertices: impl IntoIterator<Item = Vec<u8>>) -> Result<Self, PolytopeError> {
        let mut set = BTreeSet::new();
        for v in vertices {
            if v.len() != coords.len() || v.iter().any(|&x| x > 1) {
                return Err(PolytopeError::BadVertex { got: v.len(), want: coords.len() });
            }
            set.insert(v);
        }
        Ok(Self { coords, vertices: set })
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn vertices(&self) -> &BTreeSet<Vec<u8>> {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// The local polytope `P_b` of a node, over coordinates `t_b` followed by
/// the child blocks (`d_b`, or `l_b` and `r_b`).
pub fn local_polytope(
    b: usize,
    kind: NodeKind,
    children: &[usize],
    fs: &FeasibleSets,
) -> Result<VertexPolytope, PolytopeError> {
    let here: Vec<TypeId> = fs.types(b).iter().copied().collect();
    let mut coords: Vec<String> = here.iter().map(|t| format!("t_{b}_{t}")).collect();
    let pos = |list: &[TypeId], t: TypeId| list.binary_search(&t).expect("feasible type");
    match kind {
        NodeKind::Leaf => {
            let mut v = vec![0u8; here.len()];
            v[pos(&here, TypeId::EMPTY)] = 1;
            VertexPolytope::new(coords, [v])
        }
        NodeKind::Introduce(_) | NodeKind::Forget(_) => {
            let &[a] = children else { return Err(PolytopeError::NotNice(b)) };
            let below: Vec<TypeId> = fs.types(a).iter().copied().collect();
            coords.extend(below.iter().map(|t| format!("d_{b}_{t}")));
            let verts = fs.node(b).pairs.iter().map(|&(alpha, beta)| {
                let mut v = vec![0u8; here.len() + below.len()];
                v[pos(&here, beta)] = 1;
                v[here.len() + pos(&below, alpha)] = 1;
                v
            });
            VertexPolytope::new(coords, verts.collect::<Vec<_>>())
        }
        NodeKind::Join => {
            let &[l, r] = children else { return Err(PolytopeError::NotNice(b)) };
            let left: Vec<TypeId> = fs.types(l).iter().copied().collect();
            let right: Vec<TypeId> = fs.types(r).iter().copied().collect();
            coords.extend(left.iter().map(|t| format!("l_{b}_{t}")));
            coords.extend(right.iter().map(|t| format!("r_{b}_{t}")));
            let verts = fs.node(b).triples.iter().map(|&(x, y, z)| {
                let mut v = vec![0u8; here.len() + left.len() + right.len()];
                v[pos(&here, z)] = 1;
                v[here.len() + pos(&left, x)] = 1;
                v[here.len() + left.len() + pos(&right, y)] = 1;
                v
            });
            VertexPolytope::new(coords, verts.collect::<Vec<_>>())
        }
    }
}

/// Vertices `(x|rest, y)` over pairs of vertices that agree on the glue
/// coordinates. Coordinates of `p` outside `ip` come first, then all of `q`.
pub fn glued_product_vertices(
    p: &VertexPolytope,
    q: &VertexPolytope,
    ip: &[usize],
    iq: &[usize],
) -> Result<VertexPolytope, PolytopeError> {
    if ip.len() != iq.len() {
        return Err(PolytopeError::GlueMismatch(ip.len(), iq.len()));
    }
    let keep: Vec<usize> = (0..p.dim()).filter(|i| !ip.contains(i)).collect();
    let coords = keep.iter().map(|&i| p.coords[i].clone()).chain(q.coords.iter().cloned()).collect();
    let mut out = Vec::new();
    for x in &p.vertices {
        for y in &q.vertices {
            if ip.iter().zip(iq).all(|(&i, &j)| x[i] == y[j]) {
                out.push(keep.iter().map(|&i| x[i]).chain(y.iter().copied()).collect());
            }
        }
    }
    VertexPolytope::new(coords, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(names: &[&str], vs: &[&[u8]]) -> VertexPolytope {
        VertexPolytope::new(names.iter().map(|s| s.to_string()).collect(), vs.iter().map(|v| v.to_vec())).unwrap()
    }

    #[test]
    fn worked_glued_product() {
        let p = poly(&["x", "z1", "z2"], &[&[0, 1, 0], &[1, 0, 1]]);
        let q = poly(&["y", "w1", "w2"], &[&[0, 0, 1], &[1, 1, 0], &[1, 0, 1]]);
        let g = glued_product_vertices(&p, &q, &[1, 2], &[1, 2]).unwrap();
        let want: BTreeSet<Vec<u8>> = [vec![0, 1, 1, 0], vec![1, 0, 0, 1], vec![1, 1, 0, 1]].into();
        assert_eq!(g.vertices(), &want);
    }

    #[test]
    fn empty_glue_is_cartesian() {
        let p = poly(&["a"], &[&[0], &[1]]);
        let q = poly(&["b", "c"], &[&[1, 0], &[0, 1], &[1, 1]]);
        assert_eq!(glued_product_vertices(&p, &q, &[], &[]).unwrap().len(), 6);
        assert!(matches!(glued_product_vertices(&p, &q, &[0], &[]), Err(PolytopeError::GlueMismatch(1, 0))));
    }

    #[test]
    fn single_glue_vertex_selects() {
        let p = poly(&["a", "z"], &[&[0, 0], &[1, 1], &[0, 1]]);
        let q = poly(&["w"], &[&[1]]);
        let g = glued_product_vertices(&p, &q, &[1], &[0]).unwrap();
        assert_eq!(g.vertices(), &BTreeSet::from([vec![0, 1], vec![1, 1]]));
    }

    #[test]
    fn rejects_non_binary() {
        assert!(VertexPolytope::new(vec!["a".into()], [vec![2]]).is_err());
        assert!(VertexPolytope::new(vec!["a".into()], [vec![0, 1]]).is_err());
    }
}
