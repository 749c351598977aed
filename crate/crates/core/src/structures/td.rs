use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Elem, Graph, Structure, StructureError};

/// Largest universe `exact_td` will search.
pub const EXACT_TD_CAP: usize = 24;

/// Ascending tuple of a set of element ids.
pub fn eta(set: &BTreeSet<Elem>) -> Vec<Elem> {
    set.iter().copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Leaf,
    Introduce(Elem),
    Forget(Elem),
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdNode {
    pub bag: BTreeSet<Elem>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Set on nice decompositions only.
    pub kind: Option<NodeKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    NotATree(String),
    UnknownElement(Elem),
    ElementUncovered(Elem),
    EdgeUncovered(Elem, Elem),
    ConnectivityBroken(Elem),
    BadNiceNode { node: usize, reason: String },
}

/// Rooted tree decomposition. Node ids are indices into `nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    nodes: Vec<TdNode>,
    root: usize,
}

impl TreeDecomposition {
    /// Builds a decomposition from bags and undirected tree edges, rooted at
    /// `root`.
    pub fn from_edges(
        bags: Vec<BTreeSet<Elem>>,
        edges: &[(usize, usize)],
        root: usize,
    ) -> Result<Self, StructureError> {
        let n = bags.len();
        if n == 0 || root >= n {
            return Err(StructureError::Invalid("decomposition needs a root bag".into()));
        }
        if edges.len() != n - 1 {
            return Err(StructureError::Invalid(format!("{} edges for {n} bags is not a tree", edges.len())));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(StructureError::Invalid(format!("bad tree edge {a}-{b}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut nodes: Vec<TdNode> =
            bags.into_iter().map(|bag| TdNode { bag, parent: None, children: Vec::new(), kind: None }).collect();
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            let mut next: Vec<usize> = adj[a].iter().copied().filter(|&b| !seen[b]).collect();
            next.sort_unstable();
            for b in next {
                seen[b] = true;
                nodes[b].parent = Some(a);
                nodes[a].children.push(b);
                queue.push_back(b);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(StructureError::Invalid("tree edges are disconnected".into()));
        }
        Ok(Self { nodes, root })
    }

    pub fn nodes(&self) -> &[TdNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TdNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_bag_size(&self) -> usize {
        self.nodes.iter().map(|n| n.bag.len()).max().unwrap_or(0)
    }

    /// Largest bag size minus one (zero for decompositions with only empty
    /// bags).
    pub fn width(&self) -> usize {
        self.max_bag_size().saturating_sub(1)
    }

    pub fn is_nice(&self) -> bool {
        self.nodes.iter().all(|n| n.kind.is_some())
    }

    /// Node ids, children before parents.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((a, expanded)) = stack.pop() {
            if expanded {
                out.push(a);
            } else {
                stack.push((a, true));
                for &c in self.nodes[a].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Union of the bags in the subtree rooted at `a`.
    pub fn subtree_elems(&self, a: usize) -> BTreeSet<Elem> {
        let mut out = BTreeSet::new();
        let mut stack = vec![a];
        while let Some(b) = stack.pop() {
            out.extend(self.nodes[b].bag.iter().copied());
            stack.extend(self.nodes[b].children.iter().copied());
        }
        out
    }

    /// For each element, the node closest to the root whose bag holds it.
    pub fn top_map(&self) -> BTreeMap<Elem, usize> {
        let mut top = BTreeMap::new();
        for (id, node) in self.nodes.iter().enumerate() {
            for &e in &node.bag {
                let parent_has = node.parent.is_some_and(|p| self.nodes[p].bag.contains(&e));
                if !parent_has {
                    top.entry(e).or_insert(id);
                }
            }
        }
        top
    }

    /// Checks tree shape, coverage, edge coverage, connectivity and, when
    /// node kinds are present, the nice-node bag equations.
    pub fn validate(&self, s: &Structure) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.nodes.len();
        if self.root >= n {
            out.push(Violation::NotATree("root out of range".into()));
            return out;
        }
        if self.nodes[self.root].parent.is_some() {
            out.push(Violation::NotATree("root has a parent".into()));
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(a) = stack.pop() {
            if std::mem::replace(&mut seen[a], true) {
                out.push(Violation::NotATree(format!("node {a} reached twice")));
                continue;
            }
            for &c in &self.nodes[a].children {
                if c >= n || self.nodes[c].parent != Some(a) {
                    out.push(Violation::NotATree(format!("child link {a}->{c} inconsistent")));
                } else {
                    stack.push(c);
                }
            }
        }
        if let Some(a) = seen.iter().position(|s| !s) {
            out.push(Violation::NotATree(format!("node {a} unreachable from root")));
        }
        if !out.is_empty() {
            return out;
        }

        let mut holders: BTreeMap<Elem, Vec<usize>> = BTreeMap::new();
        for (id, node) in self.nodes.iter().enumerate() {
            for &e in &node.bag {
                holders.entry(e).or_default().push(id);
            }
        }
        for &e in holders.keys() {
            if !s.contains(e) {
                out.push(Violation::UnknownElement(e));
            }
        }
        for &e in s.universe() {
            match holders.get(&e) {
                None => out.push(Violation::ElementUncovered(e)),
                Some(ids) => {
                    let tops = ids
                        .iter()
                        .filter(|&&id| self.nodes[id].parent.is_none_or(|p| !self.nodes[p].bag.contains(&e)))
                        .count();
                    if tops != 1 {
                        out.push(Violation::ConnectivityBroken(e));
                    }
                }
            }
        }
        for &(a, b) in s.inc_pairs() {
            if !self.nodes.iter().any(|nd| nd.bag.contains(&a) && nd.bag.contains(&b)) {
                out.push(Violation::EdgeUncovered(a, b));
            }
        }

        if self.nodes.iter().any(|nd| nd.kind.is_some()) {
            for (id, node) in self.nodes.iter().enumerate() {
                if let Some(reason) = self.nice_violation(node) {
                    out.push(Violation::BadNiceNode { node: id, reason });
                }
            }
        }
        out
    }

    fn nice_violation(&self, node: &TdNode) -> Option<String> {
        let kids: Vec<&BTreeSet<Elem>> = node.children.iter().map(|&c| &self.nodes[c].bag).collect();
        match node.kind {
            None => Some("missing node kind".into()),
            Some(NodeKind::Leaf) => {
                (!kids.is_empty() || !node.bag.is_empty()).then(|| "leaf must be childless and empty".into())
            }
            Some(NodeKind::Introduce(v)) => {
                if kids.len() != 1 {
                    return Some("introduce needs one child".into());
                }
                let mut expect = kids[0].clone();
                let fresh = expect.insert(v);
                (!fresh || expect != node.bag).then(|| format!("introduce {v} bag mismatch"))
            }
            Some(NodeKind::Forget(v)) => {
                if kids.len() != 1 {
                    return Some("forget needs one child".into());
                }
                let mut expect = kids[0].clone();
                let had = expect.remove(&v);
                (!had || expect != node.bag).then(|| format!("forget {v} bag mismatch"))
            }
            Some(NodeKind::Join) => (kids.len() != 2 || kids.iter().any(|k| **k != node.bag))
                .then(|| "join needs two children with equal bags".into()),
        }
    }

    /// Contracts tree edges whose bags are nested.
    fn compress(&self) -> TreeDecomposition {
        let n = self.nodes.len();
        // union-find style representative per node, merged into the larger bag
        let mut rep: Vec<usize> = (0..n).collect();
        fn find(rep: &mut [usize], mut a: usize) -> usize {
            while rep[a] != a {
                rep[a] = rep[rep[a]];
                a = rep[a];
            }
            a
        }
        let mut bags: Vec<BTreeSet<Elem>> = self.nodes.iter().map(|n| n.bag.clone()).collect();
        for a in self.postorder() {
            if let Some(p) = self.nodes[a].parent {
                let (ra, rp) = (find(&mut rep, a), find(&mut rep, p));
                if bags[ra].is_subset(&bags[rp]) {
                    rep[ra] = rp;
                } else if bags[rp].is_subset(&bags[ra]) {
                    bags[rp] = bags[ra].clone();
                    rep[ra] = rp;
                }
            }
        }
        let mut index = BTreeMap::new();
        let mut new_bags = Vec::new();
        for a in 0..n {
            let r = find(&mut rep, a);
            if let std::collections::btree_map::Entry::Vacant(slot) = index.entry(r) {
                slot.insert(new_bags.len());
                new_bags.push(bags[r].clone());
            }
        }
        let mut edges = Vec::new();
        for a in 0..n {
            if let Some(p) = self.nodes[a].parent {
                let (x, y) = (index[&find(&mut rep, a)], index[&find(&mut rep, p)]);
                if x != y {
                    edges.push((x, y));
                }
            }
        }
        let root = index[&find(&mut rep, self.root)];
        TreeDecomposition::from_edges(new_bags, &edges, root).expect("contraction keeps a tree")
    }

    /// Nice decomposition of the same width: empty leaves, introduce and
    /// forget chains between original bags, binary joins, and a forget
    /// chain above the root so that the root bag is empty.
    pub fn nicify(&self) -> TreeDecomposition {
        let base = self.compress();
        let mut out: Vec<TdNode> = Vec::new();
        let top = base.build_nice(base.root, &mut out);
        let top_bag = out[top].bag.clone();
        let root = chain(&mut out, top, &top_bag, &BTreeSet::new());
        TreeDecomposition { nodes: out, root }
    }

    fn build_nice(&self, a: usize, out: &mut Vec<TdNode>) -> usize {
        let bag = &self.nodes[a].bag;
        let mut heads = Vec::new();
        for &c in &self.nodes[a].children {
            let h = self.build_nice(c, out);
            heads.push(chain(out, h, &self.nodes[c].bag, bag));
        }
        if heads.is_empty() {
            let leaf = push(out, BTreeSet::new(), NodeKind::Leaf, &[]);
            heads.push(chain(out, leaf, &BTreeSet::new(), bag));
        }
        let mut acc = heads[0];
        for &h in &heads[1..] {
            acc = push(out, bag.clone(), NodeKind::Join, &[acc, h]);
        }
        acc
    }
}

fn push(out: &mut Vec<TdNode>, bag: BTreeSet<Elem>, kind: NodeKind, children: &[usize]) -> usize {
    let id = out.len();
    for &c in children {
        out[c].parent = Some(id);
    }
    out.push(TdNode { bag, parent: None, children: children.to_vec(), kind: Some(kind) });
    id
}

/// Forgets `from \ to` then introduces `to \ from`, ascending, on top of
/// node `head`. Returns the new top node.
fn chain(out: &mut Vec<TdNode>, mut head: usize, from: &BTreeSet<Elem>, to: &BTreeSet<Elem>) -> usize {
    let mut bag = from.clone();
    for &e in from.difference(to) {
        bag.remove(&e);
        head = push(out, bag.clone(), NodeKind::Forget(e), &[head]);
    }
    for &e in to.difference(from) {
        bag.insert(e);
        head = push(out, bag.clone(), NodeKind::Introduce(e), &[head]);
    }
    head
}

fn gaifman_adjacency(s: &Structure) -> BTreeMap<Elem, BTreeSet<Elem>> {
    let mut adj: BTreeMap<Elem, BTreeSet<Elem>> = s.universe().iter().map(|&e| (e, BTreeSet::new())).collect();
    for &(a, b) in s.inc_pairs() {
        adj.get_mut(&a).unwrap().insert(b);
        adj.get_mut(&b).unwrap().insert(a);
    }
    adj
}

/// Decomposition induced by an elimination ordering: one bag per eliminated
/// element holding it and its neighbors at elimination time.
fn td_from_ordering(mut adj: BTreeMap<Elem, BTreeSet<Elem>>, order: &[Elem]) -> TreeDecomposition {
    if order.is_empty() {
        return TreeDecomposition::from_edges(vec![BTreeSet::new()], &[], 0).unwrap();
    }
    let pos: BTreeMap<Elem, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut bags = Vec::with_capacity(order.len());
    let mut edges = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        let nbrs = adj.remove(&v).unwrap_or_default();
        for &a in &nbrs {
            let set = adj.get_mut(&a).unwrap();
            set.remove(&v);
            set.extend(nbrs.iter().copied().filter(|&b| b != a));
        }
        let parent = nbrs.iter().map(|u| pos[u]).min();
        match parent {
            Some(p) => edges.push((i, p)),
            None if i + 1 < order.len() => edges.push((i, i + 1)),
            None => {}
        }
        let mut bag = nbrs;
        bag.insert(v);
        bags.push(bag);
    }
    let root = order.len() - 1;
    TreeDecomposition::from_edges(bags, &edges, root).expect("elimination tree is a tree").compress()
}

/// Min-fill elimination heuristic on the Gaifman graph of `s`.
pub fn heuristic_td(s: &Structure) -> TreeDecomposition {
    let mut adj = gaifman_adjacency(s);
    let original = adj.clone();
    let mut order = Vec::with_capacity(adj.len());
    while !adj.is_empty() {
        let (&v, _) = adj
            .iter()
            .min_by_key(|(&v, nbrs)| {
                let ns: Vec<Elem> = nbrs.iter().copied().collect();
                let mut fill = 0usize;
                for i in 0..ns.len() {
                    for j in i + 1..ns.len() {
                        if !adj[&ns[i]].contains(&ns[j]) {
                            fill += 1;
                        }
                    }
                }
                (fill, ns.len(), v)
            })
            .unwrap();
        let nbrs = adj.remove(&v).unwrap();
        for &a in &nbrs {
            let set = adj.get_mut(&a).unwrap();
            set.remove(&v);
            set.extend(nbrs.iter().copied().filter(|&b| b != a));
        }
        order.push(v);
    }
    td_from_ordering(original, &order)
}

/// Exact search for a decomposition of width at most `w`. Searches over
/// sets of eliminated elements (the elimination graph depends only on the
/// set), so each set is expanded at most once.
pub fn exact_td(s: &Structure, w: usize) -> Result<Option<TreeDecomposition>, StructureError> {
    let n = s.len();
    if n > EXACT_TD_CAP {
        return Err(StructureError::TooLarge { size: n, cap: EXACT_TD_CAP });
    }
    let elems = s.universe();
    let mut adj = vec![0u64; n];
    for &(a, b) in s.inc_pairs() {
        let (i, j) = (s.index_of(a).unwrap(), s.index_of(b).unwrap());
        adj[i] |= 1 << j;
        adj[j] |= 1 << i;
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut failed = HashSet::new();
    let mut order = Vec::new();
    if !search(&adj, full, 0, w, &mut failed, &mut order) {
        return Ok(None);
    }
    // the search stops early once few enough elements remain
    let mut rest = full;
    for &i in &order {
        rest &= !(1 << i);
    }
    order.extend((0..n).filter(|i| rest & (1 << i) != 0));
    let order: Vec<Elem> = order.into_iter().map(|i| elems[i]).collect();
    Ok(Some(td_from_ordering(gaifman_adjacency(s), &order)))
}

fn elimination_neighbors(adj: &[u64], eliminated: u64, v: usize) -> u64 {
    let mut seen = 1u64 << v;
    let mut todo = adj[v];
    let mut result = 0;
    while todo != 0 {
        let u = todo.trailing_zeros() as usize;
        todo &= todo - 1;
        if seen & (1 << u) != 0 {
            continue;
        }
        seen |= 1 << u;
        if eliminated & (1 << u) != 0 {
            todo |= adj[u] & !seen;
        } else {
            result |= 1 << u;
        }
    }
    result
}

fn search(
    adj: &[u64],
    full: u64,
    eliminated: u64,
    w: usize,
    failed: &mut HashSet<u64>,
    order: &mut Vec<usize>,
) -> bool {
    let remaining = full & !eliminated;
    if remaining.count_ones() as usize <= w + 1 {
        return true;
    }
    if failed.contains(&eliminated) {
        return false;
    }
    let mut todo = remaining;
    while todo != 0 {
        let v = todo.trailing_zeros() as usize;
        todo &= todo - 1;
        if elimination_neighbors(adj, eliminated, v).count_ones() as usize <= w {
            order.push(v);
            if search(adj, full, eliminated | (1 << v), w, failed, order) {
                return true;
            }
            order.pop();
        }
    }
    failed.insert(eliminated);
    false
}

/// Turns a decomposition of `g` into one of I(g): each edge element joins a
/// new child of the smallest-id node whose bag holds both endpoints.
pub fn lift_td_to_incidence(
    td: &TreeDecomposition,
    g: &Graph,
    edge_map: &BTreeMap<(u32, u32), Elem>,
) -> Result<TreeDecomposition, StructureError> {
    let mut bags: Vec<BTreeSet<Elem>> = td.nodes.iter().map(|n| n.bag.clone()).collect();
    let mut edges: Vec<(usize, usize)> =
        td.nodes.iter().enumerate().filter_map(|(i, n)| n.parent.map(|p| (i, p))).collect();
    for &(u, v) in g.edges() {
        let e = *edge_map
            .get(&(u, v))
            .ok_or_else(|| StructureError::Invalid(format!("edge {u}-{v} missing from edge map")))?;
        let host = td
            .nodes
            .iter()
            .position(|n| n.bag.contains(&u) && n.bag.contains(&v))
            .ok_or_else(|| StructureError::Invalid(format!("edge {u}-{v} not covered")))?;
        let mut bag = td.nodes[host].bag.clone();
        bag.insert(e);
        edges.push((bags.len(), host));
        bags.push(bag);
    }
    TreeDecomposition::from_edges(bags, &edges, td.root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_structure(g: &Graph) -> Structure {
        // the graph itself viewed as a structure: vertices only, edges as incidences
        Structure::from_parts(
            g.vertices().iter().map(|&v| (v, super::super::ElemKind::Vertex)),
            g.edges().iter().copied(),
            Vec::new(),
            Vec::new(),
        )
        .unwrap()
    }

    /// Brute force over all elimination orderings.
    fn treewidth_by_permutations(s: &Structure) -> usize {
        fn rec(adj: &BTreeMap<Elem, BTreeSet<Elem>>, best: &mut usize, cur: usize) {
            if adj.is_empty() {
                *best = (*best).min(cur);
                return;
            }
            for (&v, nbrs) in adj {
                let w = cur.max(nbrs.len());
                if w >= *best {
                    continue;
                }
                let mut next = adj.clone();
                next.remove(&v);
                for &a in nbrs {
                    let set = next.get_mut(&a).unwrap();
                    set.remove(&v);
                    set.extend(nbrs.iter().copied().filter(|&b| b != a));
                }
                rec(&next, best, w);
            }
        }
        let mut best = usize::MAX;
        rec(&gaifman_adjacency(s), &mut best, 0);
        best
    }

    #[test]
    fn eta_sorts() {
        assert_eq!(eta(&[5, 2, 9].into_iter().collect()), vec![2, 5, 9]);
        assert_eq!(eta(&BTreeSet::new()), Vec::<Elem>::new());
        assert_eq!(eta(&[7].into_iter().collect()), vec![7]);
    }

    #[test]
    fn heuristic_widths() {
        let tree = graph_structure(&Graph::star(4));
        let td = heuristic_td(&tree);
        assert!(td.validate(&tree).is_empty());
        assert_eq!(td.width(), 1);
        let k4 = graph_structure(&Graph::complete(4));
        let td = heuristic_td(&k4);
        assert!(td.validate(&k4).is_empty());
        assert_eq!(td.width(), 3);
        let (ip3, _) = Graph::path(3).incidence_structure();
        let td = heuristic_td(&ip3);
        assert!(td.validate(&ip3).is_empty());
        assert!(td.width() <= 2);
    }

    #[test]
    fn exact_search() {
        let p3 = graph_structure(&Graph::path(3));
        let td = exact_td(&p3, 1).unwrap().unwrap();
        assert!(td.validate(&p3).is_empty());
        assert_eq!(td.width(), 1);
        let bags: BTreeSet<Vec<Elem>> = td.nodes().iter().map(|n| eta(&n.bag)).collect();
        assert_eq!(bags, [vec![1, 2], vec![2, 3]].into_iter().collect());

        let k4 = graph_structure(&Graph::complete(4));
        assert!(exact_td(&k4, 2).unwrap().is_none());
        assert_eq!(exact_td(&k4, 3).unwrap().unwrap().width(), 3);
    }

    #[test]
    fn exact_search_on_incidence_p3_matches_permutation_oracle() {
        let (ip3, _) = Graph::path(3).incidence_structure();
        // I(P3) is the path v1 - e12 - v2 - e23 - v3
        assert_eq!(treewidth_by_permutations(&ip3), 1);
        assert!(exact_td(&ip3, 0).unwrap().is_none());
        let td = exact_td(&ip3, 1).unwrap().unwrap();
        assert!(td.validate(&ip3).is_empty());
        assert_eq!(td.width(), 1);
        assert!(exact_td(&ip3, 2).unwrap().is_some());
    }

    #[test]
    fn exact_search_agrees_with_permutations() {
        let graphs = [Graph::cycle(4), Graph::cycle(5), Graph::complete(3), Graph::star(3)];
        for g in graphs {
            let (s, _) = g.incidence_structure();
            let tw = treewidth_by_permutations(&s);
            assert!(exact_td(&s, tw).unwrap().is_some());
            if tw > 0 {
                assert!(exact_td(&s, tw - 1).unwrap().is_none());
            }
        }
    }

    #[test]
    fn exact_search_cap() {
        let (s, _) = Graph::path(20).incidence_structure();
        assert!(matches!(exact_td(&s, 1), Err(StructureError::TooLarge { .. })));
    }

    #[test]
    fn lift_path() {
        let g = Graph::path(3);
        let gs = graph_structure(&g);
        let td = exact_td(&gs, 1).unwrap().unwrap();
        let (s, map) = g.incidence_structure();
        let lifted = lift_td_to_incidence(&td, &g, &map).unwrap();
        assert!(lifted.validate(&s).is_empty());
        assert_eq!(lifted.width(), 2);

        let edgeless = Graph::new([1, 2], []).unwrap();
        let gs = graph_structure(&edgeless);
        let td = heuristic_td(&gs);
        let (s, map) = edgeless.incidence_structure();
        let lifted = lift_td_to_incidence(&td, &edgeless, &map).unwrap();
        assert!(lifted.validate(&s).is_empty());
        assert_eq!(lifted.width(), td.width());
    }

    #[test]
    fn nicify_single_element() {
        let s = graph_structure(&Graph::new([1], []).unwrap());
        let td = TreeDecomposition::from_edges(vec![[1].into_iter().collect()], &[], 0).unwrap();
        let nice = td.nicify();
        assert!(nice.validate(&s).is_empty());
        assert!(nice.len() <= 8);
        assert_eq!(nice.len(), 3);
        assert!(nice.node(nice.root()).bag.is_empty());
    }

    #[test]
    fn nicify_incidence_p3() {
        let (s, _) = Graph::path(3).incidence_structure();
        let nice = heuristic_td(&s).nicify();
        assert!(nice.validate(&s).is_empty());
        assert!(nice.is_nice());
        for node in nice.nodes() {
            if node.kind == Some(NodeKind::Join) {
                for &c in &node.children {
                    assert_eq!(nice.node(c).bag, node.bag);
                }
            }
            if node.kind == Some(NodeKind::Leaf) {
                assert!(node.bag.is_empty());
            }
        }
        assert!(nice.len() <= 8 * s.len());
    }

    #[test]
    fn nicify_builds_joins() {
        let (s, _) = Graph::star(3).incidence_structure();
        let center: BTreeSet<Elem> = [1].into_iter().collect();
        let mut bags = vec![center.clone()];
        let mut edges = Vec::new();
        for (i, &e) in s.universe().iter().filter(|&&e| e > 4).enumerate() {
            let leaf = 2 + i as Elem;
            bags.push([1, e].into_iter().collect());
            bags.push([leaf, e].into_iter().collect());
            edges.push((bags.len() - 2, 0));
            edges.push((bags.len() - 1, bags.len() - 2));
        }
        let td = TreeDecomposition::from_edges(bags, &edges, 0).unwrap();
        assert!(td.validate(&s).is_empty());
        let nice = td.nicify();
        assert!(nice.validate(&s).is_empty());
        assert_eq!(nice.nodes().iter().filter(|n| n.kind == Some(NodeKind::Join)).count(), 2);
    }

    #[test]
    fn validate_reports_violations() {
        let (s, map) = Graph::path(2).incidence_structure();
        let e = map[&(1, 2)];
        let ok = TreeDecomposition::from_edges(vec![[1, 2, e].into_iter().collect()], &[], 0).unwrap();
        assert!(ok.validate(&s).is_empty());

        let missing =
            TreeDecomposition::from_edges(vec![[1, e].into_iter().collect(), [2].into_iter().collect()], &[(0, 1)], 0)
                .unwrap();
        assert!(missing.validate(&s).contains(&Violation::EdgeUncovered(2, e)));

        let broken = TreeDecomposition::from_edges(
            vec![[1, e].into_iter().collect(), [2].into_iter().collect(), [2, e].into_iter().collect()],
            &[(0, 1), (1, 2)],
            0,
        )
        .unwrap();
        assert!(broken.validate(&s).contains(&Violation::ConnectivityBroken(e)));
    }

    #[test]
    fn top_map_is_topmost() {
        let (s, _) = Graph::path(4).incidence_structure();
        let nice = heuristic_td(&s).nicify();
        let top = nice.top_map();
        assert_eq!(top.len(), s.len());
        for (id, node) in nice.nodes().iter().enumerate() {
            for &v in &node.bag {
                let mut cur = id;
                loop {
                    assert!(nice.node(cur).bag.contains(&v));
                    if cur == top[&v] {
                        break;
                    }
                    cur = nice.node(cur).parent.expect("top lies above every holder");
                }
            }
        }
        // the root bag is empty, so each top is the child of v's forget node
        for (&v, &t) in &top {
            let p = nice.node(t).parent.unwrap();
            assert_eq!(nice.node(p).kind, Some(NodeKind::Forget(v)));
        }
    }
}
