use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::json;

use super::{local_polytope, PolytopeError, VertexPolytope};
use crate::structures::{Elem, Graph, NodeKind, Structure, TreeDecomposition};
use crate::types::{mu, FeasibleSets, TypeId, TypeRegistry};

/// Column tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SystemVar {
    /// Projection variable of vertex element `v` and free variable `i`.
    Y { v: Elem, i: usize },
    /// Indicator of type `t` at node `b`.
    T { b: usize, t: TypeId },
    /// Multiplier of the `q`-th local vertex of block `b`.
    F { b: usize, q: usize },
    /// Plain named coordinate of a lifted vertex polytope.
    X(String),
}

impl fmt::Display for SystemVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemVar::Y { v, i } => write!(f, "y_{v}_{i}"),
            SystemVar::T { b, t } => write!(f, "t_{b}_{t}"),
            SystemVar::F { b, q } => write!(f, "f_{b}_{q}"),
            SystemVar::X(name) => write!(f, "{name}"),
        }
    }
}

/// `Σ coef·x = rhs`, terms sorted by column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub terms: Vec<(usize, BigRational)>,
    pub rhs: BigRational,
}

impl Row {
    fn unit(cols: impl IntoIterator<Item = (usize, i64)>, rhs: i64) -> Self {
        let mut terms: Vec<(usize, BigRational)> =
            cols.into_iter().map(|(c, a)| (c, BigRational::from_integer(BigInt::from(a)))).collect();
        terms.sort_by_key(|t| t.0);
        Self { terms, rhs: BigRational::from_integer(BigInt::from(rhs)) }
    }

    pub fn value(&self, x: &[BigRational]) -> BigRational {
        self.terms.iter().fold(BigRational::zero(), |acc, (c, a)| acc + a * &x[*c])
    }
}

/// One decomposition node's slice of the system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlueNode {
    pub kind: NodeKind,
    pub children: Vec<usize>,
    pub rows: Range<usize>,
    pub f_cols: Range<usize>,
    pub t_cols: Range<usize>,
    /// Node types in column order.
    pub types: Vec<TypeId>,
    /// Per `f` column: the child types and the node type of that vertex.
    pub vertices: Vec<(Vec<TypeId>, TypeId)>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SparseSystem {
    vars: Vec<SystemVar>,
    #[serde(skip)]
    index: HashMap<SystemVar, usize>,
    rows: Vec<Row>,
    nonneg: Vec<bool>,
    glue: Vec<GlueNode>,
    root: Option<usize>,
    face_row: Option<usize>,
    /// `(y column, node top(v), row)` per projection variable.
    projection: Vec<(usize, usize, usize)>,
}

impl SparseSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, v: SystemVar, nonneg: bool) -> usize {
        let c = self.vars.len();
        let prev = self.index.insert(v.clone(), c);
        assert!(prev.is_none(), "duplicate column {v}");
        self.vars.push(v);
        self.nonneg.push(nonneg);
        c
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        assert!(row.terms.iter().all(|(c, _)| *c < self.vars.len()));
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn vars(&self) -> &[SystemVar] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.vars.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    pub fn col(&self, v: &SystemVar) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn is_nonneg(&self, c: usize) -> bool {
        self.nonneg[c]
    }

    /// Per-node blocks, indexed by decomposition node; empty unless built by
    /// [`assemble`].
    pub fn glue(&self) -> &[GlueNode] {
        &self.glue
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn face_row(&self) -> Option<usize> {
        self.face_row
    }

    pub fn projection(&self) -> &[(usize, usize, usize)] {
        &self.projection
    }

    /// Columns `y[v][i]`, in column order.
    pub fn y_cols(&self) -> impl Iterator<Item = (usize, Elem, usize)> + '_ {
        self.projection.iter().map(|&(c, _, _)| match self.vars[c] {
            SystemVar::Y { v, i } => (c, v, i),
            _ => unreachable!("projection rows start with y"),
        })
    }

    /// Whether `x` satisfies every row scaled by `r` and the sign constraints.
    pub fn satisfies_scaled(&self, x: &[BigRational], r: &BigRational) -> bool {
        x.len() == self.vars.len()
            && x.iter().zip(&self.nonneg).all(|(v, &nn)| !nn || !v.is_negative_rational())
            && self.rows.iter().all(|row| row.value(x) == &row.rhs * r)
    }

    pub fn satisfies(&self, x: &[BigRational]) -> bool {
        self.satisfies_scaled(x, &BigRational::one())
    }

    pub fn stats(&self) -> serde_json::Value {
        json!({"rows": self.num_rows(), "cols": self.num_cols(), "nnz": self.nnz()})
    }
}

trait Sign {
    fn is_negative_rational(&self) -> bool;
}

impl Sign for BigRational {
    fn is_negative_rational(&self) -> bool {
        self < &BigRational::zero()
    }
}

/// Columns `x` (one per coordinate) then `λ` (one per vertex, as `f_0_q`),
/// with rows `Σλ = 1` and `Σ_{v_c = 1} λ − x_c = 0`.
pub fn simplex_lift(p: &VertexPolytope) -> Result<SparseSystem, PolytopeError> {
    let mut sys = SparseSystem::new();
    lift_into(&mut sys, p, 0, &mut |_, name| Slot::Fresh(SystemVar::X(name.to_string())))?;
    Ok(sys)
}

enum Slot {
    Fresh(SystemVar),
    Shared(usize),
}

/// Adds the lift of `p` as block `block`; `coord` tags each coordinate or
/// hands back an existing column to share.
fn lift_into(
    sys: &mut SparseSystem,
    p: &VertexPolytope,
    block: usize,
    coord: &mut dyn FnMut(usize, &str) -> Slot,
) -> Result<Vec<usize>, PolytopeError> {
    if p.is_empty() {
        return Err(PolytopeError::EmptyPolytope);
    }
    let xs: Vec<usize> = p
        .coords()
        .iter()
        .enumerate()
        .map(|(i, name)| match coord(i, name) {
            Slot::Shared(c) => c,
            Slot::Fresh(v) => sys.add_var(v, true),
        })
        .collect();
    let lam: Vec<usize> = (0..p.len()).map(|q| sys.add_var(SystemVar::F { b: block, q }, true)).collect();
    sys.add_row(Row::unit(lam.iter().map(|&c| (c, 1)), 1));
    for (i, &x) in xs.iter().enumerate() {
        let ones = p.vertices().iter().zip(&lam).filter(|(v, _)| v[i] == 1).map(|(_, &c)| (c, 1));
        sys.add_row(Row::unit(ones.chain([(x, -1)]), 0));
    }
    Ok(xs)
}

/// The stacked system of two lifts sharing the glue columns: `q`'s glue
/// coordinates reuse `p`'s columns.
pub fn glued_system(
    p: &VertexPolytope,
    q: &VertexPolytope,
    ip: &[usize],
    iq: &[usize],
) -> Result<SparseSystem, PolytopeError> {
    if ip.len() != iq.len() {
        return Err(super::PolytopeError::GlueMismatch(ip.len(), iq.len()));
    }
    let mut sys = SparseSystem::new();
    let px = lift_into(&mut sys, p, 0, &mut |_, name| Slot::Fresh(SystemVar::X(format!("p.{name}"))))?;
    lift_into(&mut sys, q, 1, &mut |i, name| match iq.iter().position(|&j| j == i) {
        Some(k) => Slot::Shared(px[ip[k]]),
        None => Slot::Fresh(SystemVar::X(format!("q.{name}"))),
    })?;
    Ok(sys)
}

/// Glues the simplex lifts of all local polytopes bottom-up. A child's `t`
/// block is the parent's `d`, `l` or `r` block.
pub fn assemble(td: &TreeDecomposition, fs: &FeasibleSets) -> Result<SparseSystem, PolytopeError> {
    let mut sys = SparseSystem::new();
    let mut glue: Vec<Option<GlueNode>> = vec![None; td.len()];
    for b in td.postorder() {
        let node = td.node(b);
        let kind = node.kind.ok_or(PolytopeError::NotNice(b))?;
        let local = local_polytope(b, kind, &node.children, fs)?;
        let types: Vec<TypeId> = fs.types(b).iter().copied().collect();
        let mut blocks = vec![types.clone()];
        for &c in &node.children {
            blocks.push(fs.types(c).iter().copied().collect());
        }
        let vertices: Vec<(Vec<TypeId>, TypeId)> = local.vertices().iter().map(|v| decode(v, &blocks)).collect();
        let row_start = sys.num_rows();
        let mut child_cols = Vec::new();
        for &c in &node.children {
            let g = glue[c].as_ref().ok_or(PolytopeError::NotNice(c))?;
            child_cols.extend(g.t_cols.clone());
        }
        let t_start = sys.num_cols();
        lift_into(&mut sys, &local, b, &mut |i, _| match types.get(i) {
            Some(&t) => Slot::Fresh(SystemVar::T { b, t }),
            None => Slot::Shared(child_cols[i - types.len()]),
        })?;
        let t_cols = t_start..t_start + types.len();
        let f_cols = t_cols.end..sys.num_cols();
        glue[b] = Some(GlueNode {
            kind,
            children: node.children.clone(),
            rows: row_start..sys.num_rows(),
            f_cols,
            t_cols,
            types,
            vertices,
        });
    }
    sys.glue = glue.into_iter().map(|g| g.expect("postorder covers every node")).collect();
    sys.root = Some(td.root());
    Ok(sys)
}

/// Reads the one-hot blocks of a local vertex back as types.
fn decode(v: &[u8], blocks: &[Vec<TypeId>]) -> (Vec<TypeId>, TypeId) {
    let mut at = 0;
    let mut hot = Vec::new();
    for block in blocks {
        let i = v[at..at + block.len()].iter().position(|&x| x == 1).expect("one-hot block");
        hot.push(block[i]);
        at += block.len();
    }
    let node = hot.remove(0);
    (hot, node)
}

/// Appends `Σ ρ(α)·t_root[α] = 1`.
pub fn apply_face(sys: &mut SparseSystem, rho: impl Fn(TypeId) -> bool) {
    let root = sys.root.expect("assembled system");
    let g = &sys.glue[root];
    let terms: Vec<(usize, i64)> =
        g.t_cols.clone().zip(&g.types).filter(|(_, &t)| rho(t)).map(|(c, _)| (c, 1)).collect();
    let r = sys.add_row(Row::unit(terms, 1));
    sys.face_row = Some(r);
}

/// Adds `y[v][i] = Σ μ(α, v, i)·t_top(v)[α]` for every vertex element.
pub fn add_projection(sys: &mut SparseSystem, fs: &FeasibleSets, top: &BTreeMap<Elem, usize>, s: &Structure, m: usize) {
    for v in s.vertex_elems() {
        let Some(&b) = top.get(&v) else { continue };
        for i in 0..m {
            let y = sys.add_var(SystemVar::Y { v, i }, false);
            let g = &sys.glue[b];
            let terms: Vec<(usize, i64)> = g
                .t_cols
                .clone()
                .zip(&g.types)
                .filter(|(_, &t)| mu(fs, top, t, v, i))
                .map(|(c, _)| (c, 1))
                .chain([(y, -1)])
                .collect();
            let r = sys.add_row(Row::unit(terms, 0));
            sys.projection.push((y, b, r));
        }
    }
}

/// Columns as vertices, joined when they share a row.
pub fn gaifman_graph(sys: &SparseSystem) -> Graph {
    let mut edges = BTreeSet::new();
    for row in &sys.rows {
        for (i, (a, _)) in row.terms.iter().enumerate() {
            for (b, _) in &row.terms[i + 1..] {
                edges.insert((*a as u32, *b as u32));
            }
        }
    }
    Graph::new(0..sys.num_cols() as u32, edges).expect("columns are vertices")
}

/// Tree decomposition of the system's Gaifman graph over the decomposition
/// tree; bags are column sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SystemDecomposition {
    pub parent: Vec<Option<usize>>,
    pub bags: Vec<BTreeSet<usize>>,
}

impl SystemDecomposition {
    pub fn width(&self) -> usize {
        self.bags.iter().map(BTreeSet::len).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn bag_names(&self, sys: &SparseSystem, b: usize) -> Vec<String> {
        self.bags[b].iter().map(|&c| sys.vars[c].to_string()).collect()
    }

    fn check(&self, sys: &SparseSystem) -> Result<(), String> {
        let n = self.bags.len();
        let mut holders: Vec<Vec<usize>> = vec![Vec::new(); sys.num_cols()];
        for (b, bag) in self.bags.iter().enumerate() {
            for &c in bag {
                holders[c].push(b);
            }
        }
        for (c, hs) in holders.iter().enumerate() {
            if hs.is_empty() {
                return Err(format!("column {} in no bag", sys.vars[c]));
            }
            let links = hs.iter().filter(|&&b| self.parent[b].is_some_and(|p| self.bags[p].contains(&c))).count();
            if links + 1 != hs.len() {
                return Err(format!("bags holding {} are disconnected", sys.vars[c]));
            }
        }
        for (i, row) in sys.rows.iter().enumerate() {
            let Some(&(first, _)) = row.terms.first() else { continue };
            if !holders[first].iter().any(|&b| row.terms.iter().all(|(c, _)| self.bags[b].contains(c))) {
                return Err(format!("row {i} fits in no bag"));
            }
        }
        for (b, g) in sys.glue.iter().enumerate() {
            let near = |a: usize| a == b || self.parent[a] == Some(b) || self.parent[b] == Some(a);
            for c in g.t_cols.clone() {
                if !self.bags[b].contains(&c) {
                    return Err(format!("t block of node {b} not in its bag"));
                }
                if let Some(&a) = holders[c].iter().find(|&&a| !near(a)) {
                    return Err(format!("t block of node {b} reaches node {a}"));
                }
            }
        }
        debug_assert_eq!(n, sys.glue.len());
        Ok(())
    }
}

/// `B*(b)`: the node's `t` and `f` columns, its children's `t` blocks and the
/// `y` columns of elements whose top node is `b`. Validated before return.
pub fn system_decomposition(sys: &SparseSystem, td: &TreeDecomposition) -> Result<SystemDecomposition, PolytopeError> {
    if sys.glue.len() != td.len() {
        return Err(PolytopeError::InvalidDecomposition("system not built over this decomposition".into()));
    }
    let mut bags: Vec<BTreeSet<usize>> = sys
        .glue
        .iter()
        .map(|g| {
            let mut bag: BTreeSet<usize> = g.t_cols.clone().chain(g.f_cols.clone()).collect();
            for &c in &g.children {
                bag.extend(sys.glue[c].t_cols.clone());
            }
            bag
        })
        .collect();
    for &(y, b, _) in &sys.projection {
        bags[b].insert(y);
    }
    let dec = SystemDecomposition { parent: td.nodes().iter().map(|n| n.parent).collect(), bags };
    dec.check(sys).map_err(PolytopeError::InvalidDecomposition)?;
    Ok(dec)
}

/// Row and column bound for a system over `nodes` nodes.
pub fn size_bound(reg: &TypeRegistry, nodes: usize, projected: usize) -> usize {
    (3 * reg.len() + 2) * nodes + projected + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{desugar, parse_formula, INDEPENDENT_SET};
    use crate::structures::heuristic_td;
    use crate::types::{compute_feasible, TypeConfig};

    fn ri(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn build(g: &Graph) -> (TreeDecomposition, FeasibleSets, TypeRegistry, SparseSystem) {
        let f = desugar(&parse_formula(INDEPENDENT_SET).unwrap());
        let (s, _) = g.incidence_structure();
        let td = heuristic_td(&s).nicify();
        let (fs, reg) = compute_feasible(&td, &s, TypeConfig::new(&f)).unwrap();
        let mut sys = assemble(&td, &fs).unwrap();
        apply_face(&mut sys, |t| reg.accepts(t).unwrap());
        add_projection(&mut sys, &fs, &td.top_map(), &s, 1);
        (td, fs, reg, sys)
    }

    #[test]
    fn lift_of_single_vertex_pins_coordinates() {
        let p = VertexPolytope::new(vec!["a".into(), "b".into()], [vec![1, 0]]).unwrap();
        let sys = simplex_lift(&p).unwrap();
        assert_eq!(sys.num_rows(), 3);
        assert!(sys.satisfies(&[ri(1), ri(0), ri(1)]));
        assert!(!sys.satisfies(&[ri(0), ri(0), ri(1)]));
        let empty = VertexPolytope::new(vec!["a".into()], []).unwrap();
        assert_eq!(simplex_lift(&empty).unwrap_err(), PolytopeError::EmptyPolytope);
    }

    #[test]
    fn glued_system_shares_columns() {
        let p = VertexPolytope::new(vec!["x".into(), "z".into()], [vec![0, 1], vec![1, 0]]).unwrap();
        let q = VertexPolytope::new(vec!["y".into(), "w".into()], [vec![1, 1]]).unwrap();
        let sys = glued_system(&p, &q, &[1], &[1]).unwrap();
        assert_eq!(sys.num_cols(), 2 + 2 + 1 + 1);
        assert!(sys.col(&SystemVar::X("q.w".into())).is_none());
    }

    #[test]
    fn gaifman_of_small_rows() {
        let mut sys = SparseSystem::new();
        let c: Vec<usize> = (0..3).map(|i| sys.add_var(SystemVar::X(format!("x{i}")), true)).collect();
        sys.add_row(Row::unit([(c[0], 1), (c[1], 1)], 1));
        sys.add_row(Row::unit([(c[1], 1), (c[2], 1)], 1));
        let g = gaifman_graph(&sys);
        assert_eq!(g.edges(), &BTreeSet::from([(0, 1), (1, 2)]));
        let mut diag = SparseSystem::new();
        for i in 0..3 {
            let x = diag.add_var(SystemVar::X(format!("x{i}")), true);
            diag.add_row(Row::unit([(x, 1)], 1));
        }
        assert!(gaifman_graph(&diag).edges().is_empty());
        let mut dense = SparseSystem::new();
        let cs: Vec<usize> = (0..4).map(|i| dense.add_var(SystemVar::X(format!("x{i}")), true)).collect();
        dense.add_row(Row::unit(cs.iter().map(|&c| (c, 1)), 1));
        assert_eq!(gaifman_graph(&dense).edges().len(), 6);
    }

    #[test]
    fn assembled_path_is_within_bounds() {
        let (td, fs, reg, sys) = build(&Graph::path(3));
        assert!(sys.num_rows() <= size_bound(&reg, td.len(), 3));
        assert!(sys.num_cols() <= size_bound(&reg, td.len(), 3));
        assert_eq!(sys.projection().len(), 3);
        for (b, g) in sys.glue().iter().enumerate() {
            assert_eq!(g.types.len(), fs.types(b).len());
            for (c, &t) in g.t_cols.clone().zip(&g.types) {
                assert_eq!(sys.vars()[c], SystemVar::T { b, t });
            }
        }
        let dec = system_decomposition(&sys, &td).unwrap();
        assert_eq!(dec.bags.len(), td.len());
    }

    #[test]
    fn local_polytope_shapes() {
        let (td, fs, _, _) = build(&Graph::path(3));
        for b in 0..td.len() {
            let n = td.node(b);
            let p = local_polytope(b, n.kind.unwrap(), &n.children, &fs).unwrap();
            let ones = match n.kind.unwrap() {
                NodeKind::Leaf => 1,
                NodeKind::Join => 3,
                _ => 2,
            };
            assert!(p.vertices().iter().all(|v| v.iter().filter(|&&x| x == 1).count() == ones));
            if n.kind == Some(NodeKind::Leaf) {
                assert_eq!(p.len(), 1);
            }
        }
    }

    #[test]
    fn face_with_no_accepting_type_is_empty_row() {
        let (s, _) = Graph::path(2).incidence_structure();
        let f = desugar(&parse_formula(crate::logic::FALSE).unwrap());
        let td = heuristic_td(&s).nicify();
        let (fs, reg) = compute_feasible(&td, &s, TypeConfig::new(&f)).unwrap();
        let mut sys = assemble(&td, &fs).unwrap();
        apply_face(&mut sys, |t| reg.accepts(t).unwrap());
        let face = &sys.rows()[sys.face_row().unwrap()];
        assert!(face.terms.is_empty() && face.rhs == ri(1));
    }
}
