//! Splitting an integer point of `rP` into `r` integer points of `P`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::polytope::{SparseSystem, VertexPolytope};

/// Integer point over a system's columns.
pub type Point = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("point is not in the dilate: {0}")]
    NotInDilate(String),
    #[error("coordinates disagree with the multipliers: {0}")]
    InconsistentPoint(String),
    #[error("no matching part while pairing at block {0}")]
    PairingFailed(usize),
    #[error("point is not a sum of vertices")]
    NotDecomposable,
}

impl DecomposeError {
    pub fn class(&self) -> &'static str {
        match self {
            DecomposeError::NotInDilate(_) => "NotInDilate",
            DecomposeError::InconsistentPoint(_) => "InconsistentPoint",
            DecomposeError::PairingFailed(_) => "PairingFailed",
            DecomposeError::NotDecomposable => "NotDecomposable",
        }
    }
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn rational(p: &[i64]) -> Vec<BigRational> {
    p.iter().map(|&x| q(x)).collect()
}

/// `x_j` copies of `e_j`, in coordinate order.
pub fn decompose_simplex(x: &[i64], r: usize) -> Result<Vec<Point>, DecomposeError> {
    if let Some(j) = x.iter().position(|&v| v < 0) {
        return Err(DecomposeError::NotInDilate(format!("coordinate {j} is negative")));
    }
    let total: i64 = x.iter().sum();
    if total != r as i64 {
        return Err(DecomposeError::NotInDilate(format!("coordinates sum to {total}, not {r}")));
    }
    let mut out = Vec::with_capacity(r);
    for (j, &v) in x.iter().enumerate() {
        for _ in 0..v {
            let mut e = vec![0; x.len()];
            e[j] = 1;
            out.push(e);
        }
    }
    Ok(out)
}

/// Point laid out as a simplex lift of `p`: coordinates, then one
/// multiplier per vertex.
pub fn decompose_lifted(pt: &[i64], r: usize, p: &VertexPolytope) -> Result<Vec<Point>, DecomposeError> {
    let (n, m) = (p.dim(), p.len());
    if pt.len() != n + m {
        return Err(DecomposeError::NotInDilate(format!("length {} for {} columns", pt.len(), n + m)));
    }
    let (x, lam) = pt.split_at(n);
    let units = decompose_simplex(lam, r)?;
    let verts: Vec<&Vec<u8>> = p.vertices().iter().collect();
    let projected: Vec<i64> = (0..n).map(|c| lam.iter().zip(&verts).map(|(l, v)| l * v[c] as i64).sum()).collect();
    if projected != x {
        return Err(DecomposeError::InconsistentPoint(format!("{x:?} versus {projected:?}")));
    }
    Ok(units
        .into_iter()
        .map(|e| {
            let q = e.iter().position(|&v| v == 1).expect("unit vector");
            verts[q].iter().map(|&v| v as i64).chain(e).collect()
        })
        .collect())
}

/// Point over the columns of `glued_system(p, q, ip, iq)`.
pub fn decompose_glued(
    pt: &[i64],
    r: usize,
    p: &VertexPolytope,
    q: &VertexPolytope,
    ip: &[usize],
    iq: &[usize],
) -> Result<Vec<Point>, DecomposeError> {
    let p_len = p.dim() + p.len();
    let q_free: Vec<usize> = (0..q.dim()).filter(|i| !iq.contains(i)).collect();
    if pt.len() != p_len + q_free.len() + q.len() {
        return Err(DecomposeError::NotInDilate(format!("length {}", pt.len())));
    }
    let left = decompose_lifted(&pt[..p_len], r, p)?;
    // q's coordinates in q order, glue ones read from p's columns.
    let mut q_pt = vec![0; q.dim()];
    for (k, &i) in q_free.iter().enumerate() {
        q_pt[i] = pt[p_len + k];
    }
    for (&i, &j) in ip.iter().zip(iq) {
        q_pt[j] = pt[i];
    }
    q_pt.extend_from_slice(&pt[p_len + q_free.len()..]);
    let mut right: Vec<Option<Point>> = decompose_lifted(&q_pt, r, q)?.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(r);
    for part in left {
        let glue: Vec<i64> = ip.iter().map(|&i| part[i]).collect();
        let slot = right
            .iter_mut()
            .find(|o| o.as_ref().is_some_and(|w| iq.iter().map(|&j| w[j]).eq(glue.iter().copied())))
            .ok_or(DecomposeError::PairingFailed(1))?;
        let w = slot.take().expect("unused part");
        let mut merged = part;
        merged.extend(q_free.iter().map(|&i| w[i]));
        merged.extend_from_slice(&w[q.dim()..]);
        out.push(merged);
    }
    out.sort();
    Ok(out)
}

/// Decomposes a point of `r·P` for a system built by `assemble`,
/// `apply_face` and `add_projection`.
pub fn decompose_system(pt: &[i64], r: usize, sys: &SparseSystem) -> Result<Vec<Point>, DecomposeError> {
    if pt.len() != sys.num_cols() {
        return Err(DecomposeError::NotInDilate(format!("length {} for {} columns", pt.len(), sys.num_cols())));
    }
    if !sys.satisfies_scaled(&rational(pt), &q(r as i64)) {
        return Err(DecomposeError::NotInDilate("a scaled row is violated".into()));
    }
    let glue = sys.glue();
    let root = sys.root().ok_or(DecomposeError::NotInDilate("system has no decomposition tree".into()))?;
    // Per node, the multiset of local vertices, as indices into `vertices`.
    let mut pools: Vec<Vec<Option<usize>>> = Vec::with_capacity(glue.len());
    for g in glue {
        let lam = &pt[g.f_cols.clone()];
        let units = decompose_simplex(lam, r)?;
        pools.push(units.iter().map(|e| e.iter().position(|&v| v == 1)).collect());
    }
    let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); glue.len()];
    chosen[root] = pools[root].iter_mut().map(|s| s.take().expect("fresh pool")).collect();
    let mut stack = vec![root];
    while let Some(b) = stack.pop() {
        for (j, &c) in glue[b].children.iter().enumerate() {
            let mut picks = Vec::with_capacity(r);
            for &qv in &chosen[b] {
                let want = glue[b].vertices[qv].0[j];
                let slot = pools[c]
                    .iter_mut()
                    .find(|s| s.is_some_and(|k| glue[c].vertices[k].1 == want))
                    .ok_or(DecomposeError::PairingFailed(c))?;
                picks.push(slot.take().expect("unused"));
            }
            chosen[c] = picks;
            stack.push(c);
        }
    }
    let mut parts = Vec::with_capacity(r);
    for k in 0..r {
        let mut x = vec![0i64; sys.num_cols()];
        for (g, picks) in glue.iter().zip(&chosen) {
            let qv = picks[k];
            x[g.f_cols.start + qv] = 1;
            let t = g.vertices[qv].1;
            let i = g.types.binary_search(&t).expect("node type");
            x[g.t_cols.start + i] = 1;
        }
        for &(y, _, row) in sys.projection() {
            let row = &sys.rows()[row];
            let mut acc = BigRational::from_integer(BigInt::from(0));
            let mut coef = None;
            for (c, a) in &row.terms {
                if *c == y {
                    coef = Some(a.clone());
                } else {
                    acc += a * q(x[*c]);
                }
            }
            let v = (&row.rhs - acc) / coef.expect("projection row holds y");
            x[y] = v.to_integer().try_into().map_err(|_| DecomposeError::InconsistentPoint("y overflow".into()))?;
        }
        if !sys.satisfies(&rational(&x)) {
            return Err(DecomposeError::InconsistentPoint(format!("part {k} violates a row")));
        }
        parts.push(x);
    }
    let sum: Vec<i64> = (0..pt.len()).map(|c| parts.iter().map(|p| p[c]).sum()).collect();
    if sum != pt {
        return Err(DecomposeError::InconsistentPoint("parts do not sum to the point".into()));
    }
    parts.sort();
    Ok(parts)
}

/// Exhaustive search for `r` vertices of `p` summing to `x`. Meant for tiny
/// inputs only.
pub fn decompose_raw(x: &[i64], r: usize, p: &VertexPolytope) -> Result<Vec<Point>, DecomposeError> {
    if x.len() != p.dim() {
        return Err(DecomposeError::NotInDilate(format!("length {} for {} coordinates", x.len(), p.dim())));
    }
    let verts: Vec<Point> = p.vertices().iter().map(|v| v.iter().map(|&b| b as i64).collect()).collect();
    fn go(rest: &mut Vec<i64>, left: usize, from: usize, verts: &[Point], acc: &mut Vec<usize>) -> bool {
        if left == 0 {
            return rest.iter().all(|&v| v == 0);
        }
        for q in from..verts.len() {
            if verts[q].iter().zip(rest.iter()).all(|(&a, &b)| a <= b) {
                rest.iter_mut().zip(&verts[q]).for_each(|(b, a)| *b -= a);
                acc.push(q);
                if go(rest, left - 1, q, verts, acc) {
                    return true;
                }
                acc.pop();
                rest.iter_mut().zip(&verts[q]).for_each(|(b, a)| *b += a);
            }
        }
        false
    }
    let mut acc = Vec::new();
    if go(&mut x.to_vec(), r, 0, &verts, &mut acc) {
        Ok(acc.into_iter().map(|q| verts[q].clone()).collect())
    } else {
        Err(DecomposeError::NotDecomposable)
    }
}

/// Reads a `name → value` map; absent columns are zero.
pub fn point_from_map(sys: &SparseSystem, map: &BTreeMap<String, i64>) -> Result<Point, DecomposeError> {
    let index: BTreeMap<String, usize> = sys.vars().iter().enumerate().map(|(c, v)| (v.to_string(), c)).collect();
    let mut pt = vec![0; sys.num_cols()];
    for (name, &v) in map {
        let &c = index.get(name).ok_or_else(|| DecomposeError::NotInDilate(format!("unknown variable {name}")))?;
        pt[c] = v;
    }
    Ok(pt)
}

/// Nonzero entries by column name.
pub fn point_to_map(sys: &SparseSystem, pt: &[i64]) -> BTreeMap<String, i64> {
    sys.vars().iter().zip(pt).filter(|(_, &v)| v != 0).map(|(n, &v)| (n.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{glued_system, simplex_lift};

    fn poly(n: usize, vs: &[&[u8]]) -> VertexPolytope {
        VertexPolytope::new((0..n).map(|i| format!("c{i}")).collect(), vs.iter().map(|v| v.to_vec())).unwrap()
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(decompose_simplex(&[2, 1, 0], 3).unwrap(), vec![vec![1, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]);
        assert!(decompose_simplex(&[0, 0, 0], 0).unwrap().is_empty());
        assert!(matches!(decompose_simplex(&[1, 1], 3), Err(DecomposeError::NotInDilate(_))));
        assert!(matches!(decompose_simplex(&[-1, 2], 1), Err(DecomposeError::NotInDilate(_))));
    }

    #[test]
    fn lifted_parts_are_vertices() {
        let p = poly(3, &[&[1, 0, 1], &[0, 1, 1], &[1, 1, 0]]);
        // vertices sorted: 011, 101, 110
        let pt = [1, 1, 2, 1, 1, 0];
        let parts = decompose_lifted(&pt, 2, &p).unwrap();
        assert_eq!(parts, vec![vec![0, 1, 1, 1, 0, 0], vec![1, 0, 1, 0, 1, 0]]);
        let bad = [1, 1, 1, 1, 1, 0];
        assert!(matches!(decompose_lifted(&bad, 2, &p), Err(DecomposeError::InconsistentPoint(_))));
        let lift = simplex_lift(&p).unwrap();
        for part in decompose_lifted(&[1, 0, 1, 0, 1, 0], 1, &p).unwrap() {
            assert!(lift.satisfies(&rational(&part)));
        }
    }

    #[test]
    fn glued_pairs_by_glue_value() {
        let p = poly(3, &[&[0, 1, 0], &[1, 0, 1]]);
        let w = poly(3, &[&[0, 0, 1], &[1, 1, 0], &[1, 0, 1]]);
        let sys = glued_system(&p, &w, &[1, 2], &[1, 2]).unwrap();
        // p vertex 101 with q vertices 001 and 101, p vertex 010 with q vertex 110.
        let a = [1, 0, 1, 0, 1, 0, 1, 0, 0];
        let b = [1, 0, 1, 0, 1, 1, 0, 1, 0];
        let c = [0, 1, 0, 1, 0, 1, 0, 0, 1];
        let sum: Vec<i64> = (0..9).map(|i| a[i] + b[i] + c[i]).collect();
        assert!(sys.satisfies_scaled(&rational(&sum), &q(3)));
        let parts = decompose_glued(&sum, 3, &p, &w, &[1, 2], &[1, 2]).unwrap();
        assert_eq!(parts.len(), 3);
        for part in &parts {
            assert!(sys.satisfies(&rational(part)));
        }
    }

    #[test]
    fn parity_point_is_rejected() {
        let parity = poly(3, &[&[0, 0, 0], &[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]);
        assert_eq!(decompose_raw(&[1, 1, 1], 2, &parity), Err(DecomposeError::NotDecomposable));
        assert_eq!(decompose_raw(&[2, 1, 1], 2, &parity).unwrap().len(), 2);
    }
}
