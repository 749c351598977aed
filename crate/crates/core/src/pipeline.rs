//! End-to-end construction from a graph and a formula, plus the oracle
//! battery run by `check`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::decompose::{decompose_system, Point};
use crate::error::Error;
use crate::logic::{Assignment, CoreFormula, DEFAULT_EVAL_BUDGET};
use crate::oracle::{brute_type, enumerate_satisfying, integer_points, DEFAULT_ORACLE_BUDGET, DEFAULT_POINT_BUDGET};
use crate::polytope::{add_projection, apply_face, assemble, size_bound, system_decomposition, SparseSystem};
use crate::structures::{eta, heuristic_td, lift_td_to_incidence, Elem, Graph, Structure, TreeDecomposition};
use crate::types::{compute_feasible, FeasibleSets, TypeConfig, TypeId, TypeRegistry, DEFAULT_STATE_BUDGET};

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub max_k: usize,
    pub max_witness: usize,
    pub eval_budget: u128,
    pub state_budget: u128,
    /// Cap on the entries of all dense local vertex tables.
    pub max_local: u64,
    /// Decomposition of the graph itself; lifted to I(G) before use.
    pub td: Option<TreeDecomposition>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            max_k: 4,
            max_witness: 24,
            eval_budget: DEFAULT_EVAL_BUDGET,
            state_budget: DEFAULT_STATE_BUDGET,
            max_local: 1 << 27,
            td: None,
        }
    }
}

/// Everything produced for one (graph, formula) instance.
#[derive(Debug, Clone)]
pub struct Build {
    pub graph: Graph,
    pub structure: Structure,
    pub formula: CoreFormula,
    pub td: TreeDecomposition,
    pub top: BTreeMap<Elem, usize>,
    pub fs: FeasibleSets,
    pub reg: TypeRegistry,
    pub sys: SparseSystem,
}

fn first_violation(td: &TreeDecomposition, s: &Structure) -> Result<(), Error> {
    match td.validate(s).first() {
        Some(v) => Err(Error::InvalidDecomposition(format!("{v:?}"))),
        None => Ok(()),
    }
}

pub fn build(graph: &Graph, formula: &CoreFormula, opts: &BuildOptions) -> Result<Build, Error> {
    if formula.qr() > opts.max_k {
        return Err(Error::Budget(format!("quantifier rank {} exceeds max-k {}", formula.qr(), opts.max_k)));
    }
    let (structure, edge_map) = graph.incidence_structure();
    let raw = match &opts.td {
        Some(td) => lift_td_to_incidence(td, graph, &edge_map)?,
        None => heuristic_td(&structure),
    };
    first_violation(&raw, &structure)?;
    let td = raw.nicify();
    first_violation(&td, &structure)?;
    let config = TypeConfig {
        formula: formula.clone(),
        witness_cap: opts.max_witness,
        state_budget: opts.state_budget,
        eval_budget: opts.eval_budget,
    };
    let (fs, reg) = compute_feasible(&td, &structure, config)?;
    let local = local_size(&td, &fs);
    if local > opts.max_local {
        return Err(Error::Budget(format!(
            "{} types give local tables of {local} entries, over the cap of {}",
            reg.len(),
            opts.max_local
        )));
    }
    let mut accepting = BTreeSet::new();
    for &t in fs.types(td.root()) {
        let ok = match reg.accepts(t) {
            Some(ok) => ok,
            None => reg.rho(formula, t)?,
        };
        if ok {
            accepting.insert(t);
        }
    }
    let top = td.top_map();
    let mut sys = assemble(&td, &fs)?;
    apply_face(&mut sys, |t| accepting.contains(&t));
    add_projection(&mut sys, &fs, &top, &structure, reg.m());
    Ok(Build { graph: graph.clone(), structure, formula: formula.clone(), td, top, fs, reg, sys })
}

/// Entries of the dense 0/1 vertex tables of all local polytopes.
fn local_size(td: &TreeDecomposition, fs: &FeasibleSets) -> u64 {
    (0..td.len())
        .map(|b| {
            let node = fs.node(b);
            let dim = node.types.len() + td.node(b).children.iter().map(|&c| fs.types(c).len()).sum::<usize>();
            let verts = node.pairs.len().max(node.triples.len()).max(1);
            (dim * verts) as u64
        })
        .sum()
}

impl Build {
    /// Deterministic size report.
    pub fn stats(&self) -> Result<serde_json::Value, Error> {
        let dec = system_decomposition(&self.sys, &self.td)?;
        let widths: Vec<usize> = dec.bags.iter().map(BTreeSet::len).collect();
        let projected = self.sys.projection().len();
        Ok(json!({
            "rows": self.sys.num_rows(),
            "cols": self.sys.num_cols(),
            "nnz": self.sys.nnz(),
            "nodes": self.td.len(),
            "td_width": self.td.width(),
            "types": self.reg.len(),
            "max_feasible": (0..self.td.len()).map(|b| self.fs.types(b).len()).max().unwrap_or(0),
            "system_width": dec.width(),
            "widths": widths,
            "size_bound": size_bound(&self.reg, self.td.len(), projected),
        }))
    }

    /// The 0/1 `y` vector of an assignment, in `y_cols` order.
    pub fn y_of(&self, a: &Assignment) -> Vec<i64> {
        self.sys.y_cols().map(|(_, v, i)| a.sets()[i].contains(&v) as i64).collect()
    }

    pub fn y_of_point(&self, pt: &[i64]) -> Vec<i64> {
        self.sys.y_cols().map(|(c, _, _)| pt[c]).collect()
    }

    /// Types of `(G_b, X⃗|G_b, η(B(b)))` for every node, looked up in the
    /// registry. `None` at a node whose type was never discovered.
    pub fn type_path(&self, a: &Assignment) -> Result<Vec<Option<TypeId>>, Error> {
        (0..self.td.len())
            .map(|b| {
                let sub = self.td.subtree_elems(b);
                let colors = a.sets().iter().map(|x| x.intersection(&sub).copied().collect()).collect();
                let gb = self.structure.induced(&sub).with_colors(colors)?.with_boundary(eta(&self.td.node(b).bag))?;
                Ok(self.reg.lookup(&gb)?)
            })
            .collect()
    }

    /// The point an assignment walks through the system: one type and one
    /// local vertex per node. `None` if some step is missing from the system.
    pub fn point_of(&self, a: &Assignment) -> Result<Option<Point>, Error> {
        let path = self.type_path(a)?;
        let Some(path) = path.into_iter().collect::<Option<Vec<TypeId>>>() else { return Ok(None) };
        let mut pt = vec![0; self.sys.num_cols()];
        for (b, g) in self.sys.glue().iter().enumerate() {
            let Some(ti) = g.types.iter().position(|&t| t == path[b]) else { return Ok(None) };
            pt[g.t_cols.start + ti] = 1;
            let kids: Vec<TypeId> = g.children.iter().map(|&c| path[c]).collect();
            let Some(q) = g.vertices.iter().position(|(ch, t)| *ch == kids && *t == path[b]) else { return Ok(None) };
            pt[g.f_cols.start + q] = 1;
        }
        for (c, v, i) in self.sys.y_cols() {
            pt[c] = a.sets()[i].contains(&v) as i64;
        }
        Ok(Some(pt))
    }
}

fn satisfies(sys: &SparseSystem, pt: &[i64], skip: Option<usize>) -> bool {
    sys.rows().iter().enumerate().filter(|(r, _)| Some(*r) != skip).all(|(_, row)| {
        let lhs: num_rational::BigRational =
            row.terms.iter().map(|(c, a)| a * num_rational::BigRational::from_integer(pt[*c].into())).sum();
        lhs == row.rhs
    })
}

/// Inserts `ν(α, b, v, 0)` for every uncolored bag vertex below its top
/// node. The system is untouched, so only the ν/y check can notice.
#[doc(hidden)]
pub fn corrupt_nu(b: &mut Build) -> usize {
    let mut added = 0;
    for node in 0..b.td.len() {
        let bag = eta(&b.td.node(node).bag);
        for &t in &b.fs.types(node).clone() {
            for (p, &v) in bag.iter().enumerate() {
                if b.structure.is_vertex(v) && b.top.get(&v) != Some(&node) && !b.reg.colored(t, p, 0) {
                    added += b.fs.nu_entries_mut().insert((t, node, v, 0)) as usize;
                }
            }
        }
    }
    added
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub seed: u64,
    pub samples: usize,
    pub max_r: usize,
    pub oracle_budget: u128,
    pub point_budget: u64,
    /// Largest universe for the exhaustive F(b) audit.
    pub audit_limit: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 20,
            max_r: 5,
            oracle_budget: DEFAULT_ORACLE_BUDGET,
            point_budget: DEFAULT_POINT_BUDGET,
            audit_limit: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckItem {
    fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name, pass, detail: detail.into() }
    }
}

/// Runs every oracle comparison on one build.
pub fn run_checks(b: &Build, opts: &CheckOptions) -> Result<Vec<CheckItem>, Error> {
    let sats = enumerate_satisfying(&b.formula, &b.structure, opts.oracle_budget)?;
    let pts = integer_points(&b.sys, opts.point_budget)?;
    let mut out = vec![
        check_projection(b, &sats, &pts),
        check_nu(b, &pts),
        check_paths(b, &sats)?,
        check_decomposition(b),
        check_decomposable(b, &pts, opts),
    ];
    out.push(if b.structure.len() <= opts.audit_limit {
        check_audit(b, opts)?
    } else {
        CheckItem::new("feasible_audit", true, format!("skipped: {} elements", b.structure.len()))
    });
    Ok(out)
}

fn check_projection(b: &Build, sats: &[Assignment], pts: &[Point]) -> CheckItem {
    let want: BTreeSet<Vec<i64>> = sats.iter().map(|a| b.y_of(a)).collect();
    let got: BTreeSet<Vec<i64>> = pts.iter().map(|p| b.y_of_point(p)).collect();
    let detail = format!("{} points, {} projections, {} oracle projections", pts.len(), got.len(), want.len());
    CheckItem::new("projection", want == got, detail)
}

fn check_nu(b: &Build, pts: &[Point]) -> CheckItem {
    let ys: HashMap<(Elem, usize), usize> = b.sys.y_cols().map(|(c, v, i)| ((v, i), c)).collect();
    let mut by_node: HashMap<(TypeId, usize), Vec<(Elem, usize)>> = HashMap::new();
    for &(t, node, v, i) in b.fs.nu_entries() {
        by_node.entry((t, node)).or_default().push((v, i));
    }
    let mut bad = 0usize;
    let mut first = String::new();
    for pt in pts {
        for (node, g) in b.sys.glue().iter().enumerate() {
            for (c, &t) in g.t_cols.clone().zip(&g.types) {
                if pt[c] != 1 {
                    continue;
                }
                for &(v, i) in by_node.get(&(t, node)).map_or(&[][..], Vec::as_slice) {
                    if ys.get(&(v, i)).is_some_and(|&y| pt[y] != 1) {
                        if bad == 0 {
                            first = format!("; first at node {node}, type {t}, y_{v}_{i} = 0");
                        }
                        bad += 1;
                    }
                }
            }
        }
    }
    CheckItem::new("nu_implication", bad == 0, format!("{} points, {bad} violations{first}", pts.len()))
}

fn check_paths(b: &Build, sats: &[Assignment]) -> Result<CheckItem, Error> {
    let mut bad = 0;
    for a in sats {
        match b.point_of(a)? {
            Some(pt) if satisfies(&b.sys, &pt, None) => {}
            _ => bad += 1,
        }
    }
    Ok(CheckItem::new("type_paths", bad == 0, format!("{} assignments, {bad} without a point", sats.len())))
}

fn check_decomposition(b: &Build) -> CheckItem {
    match system_decomposition(&b.sys, &b.td) {
        Ok(dec) => {
            let same_tree = dec.parent.iter().enumerate().all(|(i, p)| *p == b.td.node(i).parent);
            CheckItem::new("system_decomposition", same_tree, format!("width {}", dec.width()))
        }
        Err(e) => CheckItem::new("system_decomposition", false, e.to_string()),
    }
}

fn check_decomposable(b: &Build, pts: &[Point], opts: &CheckOptions) -> CheckItem {
    if pts.is_empty() {
        return CheckItem::new("decomposable", true, "no integer points");
    }
    let members: BTreeSet<&Point> = pts.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut runs, mut bad) = (0, 0);
    let mut first = String::new();
    for r in 1..=opts.max_r {
        for _ in 0..opts.samples {
            let mut sum = vec![0i64; b.sys.num_cols()];
            for _ in 0..r {
                let p = &pts[rng.gen_range(0..pts.len())];
                sum.iter_mut().zip(p).for_each(|(s, x)| *s += x);
            }
            runs += 1;
            let ok = match decompose_system(&sum, r, &b.sys) {
                Ok(parts) => {
                    let mut back = vec![0i64; sum.len()];
                    for p in &parts {
                        back.iter_mut().zip(p).for_each(|(s, x)| *s += x);
                    }
                    parts.len() == r && back == sum && parts.iter().all(|p| members.contains(p))
                }
                Err(e) => {
                    if first.is_empty() {
                        first = format!("; {e}");
                    }
                    false
                }
            };
            bad += !ok as usize;
        }
    }
    CheckItem::new("decomposable", bad == 0, format!("{runs} sums, {bad} failures{first}"))
}

/// Every coloring of every `G_b`: its type must be in F(b), every type of
/// F(b) must occur, and equal full signatures must give equal types.
fn check_audit(b: &Build, opts: &CheckOptions) -> Result<CheckItem, Error> {
    let m = b.reg.m();
    let k = b.formula.qr();
    let mut problems = Vec::new();
    let mut colorings = 0usize;
    for node in 0..b.td.len() {
        let sub: Vec<Elem> = b.td.subtree_elems(node).into_iter().collect();
        let keep: BTreeSet<Elem> = sub.iter().copied().collect();
        let base = b.structure.induced(&keep);
        let boundary = eta(&b.td.node(node).bag);
        let mut found = BTreeSet::new();
        let mut by_sig = HashMap::new();
        let bits = sub.len() * m;
        for mask in 0u64..1 << bits {
            let colors: Vec<BTreeSet<Elem>> = (0..m)
                .map(|i| {
                    sub.iter()
                        .enumerate()
                        .filter(|(j, _)| mask >> (i * sub.len() + j) & 1 == 1)
                        .map(|(_, &e)| e)
                        .collect()
                })
                .collect();
            let gb = base.clone().with_colors(colors)?.with_boundary(boundary.clone())?;
            colorings += 1;
            let Some(t) = b.reg.lookup(&gb)? else {
                problems.push(format!("node {node}: coloring {mask:b} has an unknown type"));
                continue;
            };
            if !b.fs.types(node).contains(&t) {
                problems.push(format!("node {node}: type {t} not in F(b)"));
            }
            found.insert(t);
            let sig = brute_type(&gb, k, opts.oracle_budget)?;
            if let Some(prev) = by_sig.insert(sig, t) {
                if prev != t {
                    problems.push(format!("node {node}: equal signatures, types {prev} and {t}"));
                }
            }
        }
        if &found != b.fs.types(node) {
            problems.push(format!("node {node}: {} types realized, {} feasible", found.len(), b.fs.types(node).len()));
        }
    }
    let detail = match problems.first() {
        Some(p) => format!("{colorings} colorings, {} problems; {p}", problems.len()),
        None => format!("{colorings} colorings over {} nodes", b.td.len()),
    };
    Ok(CheckItem::new("feasible_audit", problems.is_empty(), detail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{desugar, parse_formula, FALSE, INDEPENDENT_SET};

    fn core(t: &str) -> CoreFormula {
        desugar(&parse_formula(t).unwrap())
    }

    #[test]
    fn path_battery_passes() {
        let b = build(&Graph::path(3), &core(INDEPENDENT_SET), &BuildOptions::default()).unwrap();
        for item in run_checks(&b, &CheckOptions::default()).unwrap() {
            assert!(item.pass, "{}: {}", item.name, item.detail);
        }
    }

    #[test]
    fn corrupted_nu_is_caught() {
        let mut b = build(&Graph::path(3), &core(INDEPENDENT_SET), &BuildOptions::default()).unwrap();
        assert!(corrupt_nu(&mut b) > 0);
        let items = run_checks(&b, &CheckOptions::default()).unwrap();
        let nu = items.iter().find(|i| i.name == "nu_implication").unwrap();
        assert!(!nu.pass);
        assert!(items.iter().filter(|i| i.name != "nu_implication").all(|i| i.pass));
    }

    #[test]
    fn rank_over_max_k_is_a_budget_error() {
        let opts = BuildOptions { max_k: 0, ..Default::default() };
        let err = build(&Graph::path(2), &core(INDEPENDENT_SET), &opts).unwrap_err();
        assert_eq!(err.class(), "BudgetExceeded");
    }

    #[test]
    fn false_has_no_points() {
        let b = build(&Graph::path(2), &core(FALSE), &BuildOptions::default()).unwrap();
        assert!(integer_points(&b.sys, 1 << 20).unwrap().is_empty());
        let stats = b.stats().unwrap();
        assert_eq!(stats["rows"], b.sys.num_rows());
    }

    #[test]
    fn graph_decomposition_is_lifted() {
        let g = Graph::path(3);
        let bags = vec![BTreeSet::from([1, 2]), BTreeSet::from([2, 3])];
        let td = TreeDecomposition::from_edges(bags, &[(0, 1)], 0).unwrap();
        let opts = BuildOptions { td: Some(td), ..Default::default() };
        let b = build(&g, &core(INDEPENDENT_SET), &opts).unwrap();
        assert!(b.td.is_nice());
        let bad =
            TreeDecomposition::from_edges(vec![BTreeSet::from([1, 2]), BTreeSet::from([3])], &[(0, 1)], 0).unwrap();
        let opts = BuildOptions { td: Some(bad), ..Default::default() };
        assert!(build(&g, &core(INDEPENDENT_SET), &opts).is_err());
    }
}
