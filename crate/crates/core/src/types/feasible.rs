use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::json;

use super::{TypeConfig, TypeError, TypeId, TypeRegistry};
use crate::structures::{eta, Elem, NodeKind, Structure, TreeDecomposition};

/// `(type, node, element, color)` with ν = 1.
pub type NuEntry = (TypeId, usize, Elem, usize);

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NodeTypes {
    pub types: BTreeSet<TypeId>,
    /// `(child type, node type)` for introduce and forget nodes.
    pub pairs: BTreeSet<(TypeId, TypeId)>,
    /// `(left type, right type, node type)` for join nodes.
    pub triples: BTreeSet<(TypeId, TypeId, TypeId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibleSets {
    nodes: Vec<NodeTypes>,
    nu: BTreeSet<NuEntry>,
}

impl FeasibleSets {
    pub fn node(&self, b: usize) -> &NodeTypes {
        &self.nodes[b]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn types(&self, b: usize) -> &BTreeSet<TypeId> {
        &self.nodes[b].types
    }

    pub fn nu(&self, t: TypeId, b: usize, v: Elem, i: usize) -> bool {
        self.nu.contains(&(t, b, v, i))
    }

    pub fn nu_entries(&self) -> &BTreeSet<NuEntry> {
        &self.nu
    }

    /// Write access to ν, for fault-injection checks.
    #[doc(hidden)]
    pub fn nu_entries_mut(&mut self) -> &mut BTreeSet<NuEntry> {
        &mut self.nu
    }

    /// Sizes for the diagnostic dump.
    pub fn diagnostics(&self, reg: &TypeRegistry) -> serde_json::Value {
        let nodes: Vec<_> = self
            .nodes
            .iter()
            .enumerate()
            .map(
                |(b, n)| json!({"node": b, "types": n.types.len(), "pairs": n.pairs.len(), "triples": n.triples.len()}),
            )
            .collect();
        let witnesses: Vec<usize> = reg.ids().map(|t| reg.witness(t).len()).collect();
        json!({
            "registry_size": reg.len(),
            "k": reg.k(),
            "m": reg.m(),
            "max_witness": reg.max_witness(),
            "witness_sizes": witnesses,
            "nu_entries": self.nu.len(),
            "nodes": nodes,
        })
    }
}

/// μ(β, v, i) = ν(β, top(v), v, i).
pub fn mu(fs: &FeasibleSets, top: &BTreeMap<Elem, usize>, t: TypeId, v: Elem, i: usize) -> bool {
    top.get(&v).is_some_and(|&b| fs.nu(t, b, v, i))
}

fn color_subsets(m: usize) -> Vec<Vec<usize>> {
    (0..1usize << m).map(|bits| (0..m).filter(|j| bits >> j & 1 == 1).collect()).collect()
}

/// Bottom-up discovery of the feasible types of every node of a nice
/// decomposition of `s`.
pub fn compute_feasible(
    td: &TreeDecomposition,
    s: &Structure,
    config: TypeConfig,
) -> Result<(FeasibleSets, TypeRegistry), TypeError> {
    let mut reg = TypeRegistry::new(config)?;
    let colorings = color_subsets(reg.m());
    let mut nodes = vec![NodeTypes::default(); td.len()];
    let mut nu = BTreeSet::new();
    for b in td.postorder() {
        let node = td.node(b);
        let kind = node.kind.ok_or(TypeError::NotNice(b))?;
        let mut here = NodeTypes::default();
        match kind {
            NodeKind::Leaf => {
                here.types.insert(TypeId::EMPTY);
            }
            NodeKind::Introduce(v) => {
                let &[a] = node.children.as_slice() else { return Err(TypeError::NotNice(b)) };
                let child_bag = eta(&td.node(a).bag);
                let pos = eta(&node.bag).iter().position(|&e| e == v).ok_or(TypeError::NotNice(b))?;
                let adj: Vec<usize> =
                    child_bag.iter().enumerate().filter(|(_, &u)| s.incident(u, v)).map(|(i, _)| i).collect();
                let kind = s.kind(v).ok_or(TypeError::NotNice(b))?;
                for &alpha in &nodes[a].types {
                    for cols in &colorings {
                        let beta = reg.introduce(alpha, pos, &adj, kind, cols, Some(b))?;
                        here.types.insert(beta);
                        here.pairs.insert((alpha, beta));
                    }
                }
            }
            NodeKind::Forget(v) => {
                let &[a] = node.children.as_slice() else { return Err(TypeError::NotNice(b)) };
                let d = eta(&td.node(a).bag).iter().position(|&e| e == v).ok_or(TypeError::NotNice(b))?;
                for &alpha in &nodes[a].types {
                    let beta = reg.forget(alpha, d, Some(b))?;
                    here.types.insert(beta);
                    here.pairs.insert((alpha, beta));
                }
            }
            NodeKind::Join => {
                let &[l, r] = node.children.as_slice() else { return Err(TypeError::NotNice(b)) };
                for &alpha in &nodes[l].types {
                    for &beta in &nodes[r].types {
                        if let Some(gamma) = reg.join(alpha, beta, Some(b))? {
                            here.types.insert(gamma);
                            here.triples.insert((alpha, beta, gamma));
                        }
                    }
                }
            }
        }
        let bag = eta(&node.bag);
        for &t in &here.types {
            for (p, &u) in bag.iter().enumerate() {
                for i in 0..reg.m() {
                    if reg.colored(t, p, i) {
                        nu.insert((t, b, u, i));
                    }
                }
            }
        }
        nodes[b] = here;
    }
    Ok((FeasibleSets { nodes, nu }, reg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{desugar, parse_formula, CoreFormula, INDEPENDENT_SET, VERTEX_COVER};
    use crate::structures::{heuristic_td, Graph};

    fn core(t: &str) -> CoreFormula {
        desugar(&parse_formula(t).unwrap())
    }

    fn setup(g: &Graph, f: &str) -> (TreeDecomposition, Structure, FeasibleSets, TypeRegistry) {
        let (s, _) = g.incidence_structure();
        let td = heuristic_td(&s).nicify();
        let (fs, reg) = compute_feasible(&td, &s, TypeConfig::new(&core(f))).unwrap();
        (td, s, fs, reg)
    }

    #[test]
    fn single_vertex() {
        let g = Graph::new([1], []).unwrap();
        let (td, _, fs, reg) = setup(&g, INDEPENDENT_SET);
        let top = td.top_map();
        for (b, n) in td.nodes().iter().enumerate() {
            if n.kind == Some(NodeKind::Leaf) {
                assert_eq!(fs.types(b), &BTreeSet::from([TypeId::EMPTY]));
            }
            if n.bag.contains(&1) {
                assert_eq!(fs.types(b).len(), 2);
            }
        }
        assert_eq!(fs.types(td.root()).len(), 2);
        let colored: Vec<_> = fs.types(top[&1]).iter().filter(|&&t| mu(&fs, &top, t, 1, 0)).collect();
        assert_eq!(colored.len(), 1);
        assert_eq!(reg.witness(*colored[0]).colors()[0].len(), 1);
    }

    #[test]
    fn root_types_count_independent_sets() {
        let (td, _, fs, reg) = setup(&Graph::path(3), INDEPENDENT_SET);
        let f = core(INDEPENDENT_SET);
        let good = fs.types(td.root()).iter().filter(|&&t| reg.rho(&f, t).unwrap()).count();
        assert!(fs.types(td.root()).iter().all(|&t| reg.accepts(t) == Some(reg.rho(&f, t).unwrap())));
        assert!(good >= 1);
        assert!(fs.types(td.root()).iter().all(|&t| reg.boundary_len(t) == 0));
    }

    #[test]
    fn pairs_and_triples_use_feasible_types() {
        let (td, _, fs, _) = setup(&Graph::star(3), VERTEX_COVER);
        for b in 0..td.len() {
            let n = td.node(b);
            for &(a, t) in &fs.node(b).pairs {
                assert!(fs.types(n.children[0]).contains(&a) && fs.types(b).contains(&t));
            }
            for &(l, r, t) in &fs.node(b).triples {
                assert!(fs.types(n.children[0]).contains(&l));
                assert!(fs.types(n.children[1]).contains(&r));
                assert!(fs.types(b).contains(&t));
            }
        }
        for &(t, b, v, _) in fs.nu_entries() {
            assert!(td.node(b).bag.contains(&v) && fs.types(b).contains(&t));
        }
    }

    #[test]
    fn deterministic() {
        let (_, _, a, ra) = setup(&Graph::cycle(4), INDEPENDENT_SET);
        let (_, _, b, rb) = setup(&Graph::cycle(4), INDEPENDENT_SET);
        assert_eq!(a, b);
        assert_eq!(ra.len(), rb.len());
    }
}
