//! Brute-force ground truth, written without any of the type or polytope
//! machinery: a separate formula evaluator, assignment enumeration, direct
//! signatures and a 0/1 point search over linear systems.

mod points;

pub use points::{integer_points, DEFAULT_POINT_BUDGET};

use std::collections::BTreeSet;

use num_rational::BigRational;
use thiserror::Error;

use crate::logic::{Assignment, Atom, CoreFormula, Formula, Quant, Sort, SurfaceFormula};
use crate::solve::{Objective, Sense};
use crate::structures::{Elem, Structure};
use crate::types::{Node, TypeSignature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search exceeds the budget ({0})")]
    BudgetExceeded(String),
}

/// Default cap on `2^(n·m) · (2^n)^depth`.
pub const DEFAULT_ORACLE_BUDGET: u128 = 1 << 36;

/// Plain model of a structure: elements `0..n` in universe order.
struct Model {
    n: usize,
    vertex: u64,
    edge: u64,
    nbr: Vec<u64>,
}

impl Model {
    fn new(s: &Structure) -> Result<Self, OracleError> {
        let n = s.len();
        if n > 62 {
            return Err(OracleError::BudgetExceeded(format!("{n} elements")));
        }
        let idx = |e: Elem| s.universe().iter().position(|&u| u == e).expect("element of the universe");
        let mut vertex = 0u64;
        let mut nbr = vec![0u64; n];
        for (i, &e) in s.universe().iter().enumerate() {
            if s.is_vertex(e) {
                vertex |= 1 << i;
            }
        }
        for &(a, b) in s.inc_pairs() {
            let (i, j) = (idx(a), idx(b));
            nbr[i] |= 1 << j;
            nbr[j] |= 1 << i;
        }
        Ok(Self { n, vertex, edge: ((1u64 << n) - 1) & !vertex, nbr })
    }

    fn all(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    fn mask(&self, s: &Structure, set: &BTreeSet<Elem>) -> u64 {
        s.universe().iter().enumerate().filter(|(_, e)| set.contains(e)).fold(0, |m, (i, _)| m | 1 << i)
    }

    fn touches(&self, x: u64, y: u64) -> bool {
        (0..self.n).any(|i| x >> i & 1 == 1 && self.nbr[i] & y != 0)
    }

    /// Values a variable of this sort ranges over.
    fn candidates(&self, sort: Sort) -> Box<dyn Iterator<Item = u64> + '_> {
        let singles = move |kind: u64| (0..self.n).filter(move |i| kind >> i & 1 == 1).map(|i| 1u64 << i);
        match sort {
            Sort::Set => Box::new(0..=self.all()),
            Sort::Vertex => Box::new(singles(self.vertex)),
            Sort::Edge => Box::new(singles(self.edge)),
        }
    }
}

struct Env<'a> {
    model: &'a Model,
    vars: Vec<(&'a str, u64)>,
}

impl<'a> Env<'a> {
    fn get(&self, name: &str) -> u64 {
        self.vars.iter().rev().find(|(n, _)| *n == name).map(|(_, v)| *v).expect("bound variable")
    }

    fn atom(&self, a: &Atom) -> bool {
        let m = self.model;
        match a {
            Atom::Sub(x, y) | Atom::In(x, y) => self.get(x) & !self.get(y) == 0,
            Atom::Eq(x, y) => self.get(x) == self.get(y),
            Atom::Sing(x) => self.get(x).count_ones() == 1,
            Atom::Inc(x, y) => m.touches(self.get(x), self.get(y)),
            Atom::IsV(x) => {
                let v = self.get(x);
                v != 0 && v & !m.vertex == 0
            }
            Atom::IsE(x) => {
                let v = self.get(x);
                v != 0 && v & !m.edge == 0
            }
            Atom::Adj(x, y) => {
                let (a, b) = (self.get(x), self.get(y));
                (0..m.n).any(|e| m.edge >> e & 1 == 1 && m.nbr[e] & a != 0 && m.nbr[e] & b != 0)
            }
        }
    }

    fn eval(&mut self, f: &'a Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => self.atom(a),
            Formula::Not(g) => !self.eval(g),
            Formula::And(gs) => gs.iter().all(|g| self.eval(g)),
            Formula::Or(gs) => gs.iter().any(|g| self.eval(g)),
            Formula::Imp(a, b) => !self.eval(a) || self.eval(b),
            Formula::Iff(a, b) => self.eval(a) == self.eval(b),
            Formula::Quant { quant, sort, var, body } => {
                let model = self.model;
                let mut cands = model.candidates(*sort);
                let hit = |env: &mut Self, x: u64| {
                    env.vars.push((var, x));
                    let r = env.eval(body);
                    env.vars.pop();
                    r
                };
                match quant {
                    Quant::Exists => cands.any(|x| hit(self, x)),
                    Quant::Forall => cands.all(|x| hit(self, x)),
                }
            }
        }
    }
}

fn depth(f: &Formula) -> usize {
    match f {
        Formula::Not(g) => depth(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().map(depth).max().unwrap_or(0),
        Formula::Imp(a, b) | Formula::Iff(a, b) => depth(a).max(depth(b)),
        Formula::Quant { body, .. } => 1 + depth(body),
        _ => 0,
    }
}

fn check_budget(n: usize, m: usize, d: usize, budget: u128) -> Result<(), OracleError> {
    let bits = n * (m + d.max(1));
    if bits >= 127 || 1u128 << bits > budget {
        return Err(OracleError::BudgetExceeded(format!("{n} elements, {m} free, depth {d}")));
    }
    Ok(())
}

/// Evaluates a surface formula, sugar included, under an assignment.
pub fn eval_surface(f: &SurfaceFormula, s: &Structure, a: &Assignment) -> Result<bool, OracleError> {
    check_budget(s.len(), 0, depth(f.body()), DEFAULT_ORACLE_BUDGET)?;
    let model = Model::new(s)?;
    let vars = f.free().iter().map(String::as_str).zip(a.sets().iter().map(|x| model.mask(s, x))).collect();
    Ok(Env { model: &model, vars }.eval(f.body()))
}

fn unmask(s: &Structure, x: u64) -> BTreeSet<Elem> {
    s.universe().iter().enumerate().filter(|(i, _)| x >> i & 1 == 1).map(|(_, &e)| e).collect()
}

/// Every assignment of universe subsets satisfying `f`, sorted.
pub fn enumerate_satisfying(f: &CoreFormula, s: &Structure, budget: u128) -> Result<Vec<Assignment>, OracleError> {
    let surface = f.to_surface();
    enumerate_surface(&surface, s, budget)
}

pub fn enumerate_surface(f: &SurfaceFormula, s: &Structure, budget: u128) -> Result<Vec<Assignment>, OracleError> {
    let m = f.free().len();
    check_budget(s.len(), m, depth(f.body()), budget)?;
    let model = Model::new(s)?;
    let n = s.len();
    let total: u128 = 1u128 << (n * m);
    let test = |code: u128| -> Option<Assignment> {
        let masks: Vec<u64> = (0..m).map(|i| ((code >> (i * n)) as u64) & model.all()).collect();
        let vars = f.free().iter().map(String::as_str).zip(masks.iter().copied()).collect();
        let ok = Env { model: &model, vars }.eval(f.body());
        ok.then(|| Assignment::new(masks.iter().map(|&x| unmask(s, x)).collect()))
    };
    #[cfg(feature = "parallel")]
    let mut out: Vec<Assignment> = {
        use rayon::prelude::*;
        (0..total as u64).into_par_iter().filter_map(|c| test(c as u128)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut out: Vec<Assignment> = (0..total).filter_map(test).collect();
    out.sort();
    Ok(out)
}

/// Weight of an assignment: `Σ w[v][i]` over vertices `v ∈ X_i`.
pub fn assignment_value(obj: &Objective, a: &Assignment) -> BigRational {
    obj.eval(|v, i| a.sets().get(i).is_some_and(|x| x.contains(&v)))
}

/// Best satisfying assignment; the first in sorted order wins ties.
pub fn brute_optimum(
    f: &CoreFormula,
    s: &Structure,
    obj: &Objective,
    budget: u128,
) -> Result<Option<(BigRational, Assignment)>, OracleError> {
    let mut best: Option<(BigRational, Assignment)> = None;
    for a in enumerate_satisfying(f, s, budget)? {
        let v = assignment_value(obj, &a);
        let better = match &best {
            None => true,
            Some((b, _)) => match obj.sense {
                Sense::Max => v > *b,
                Sense::Min => v < *b,
            },
        };
        if better {
            best = Some((v, a));
        }
    }
    Ok(best)
}

/// Full rank-`k` signature of `s`, computed directly on `s`.
pub fn brute_type(s: &Structure, k: usize, budget: u128) -> Result<TypeSignature, OracleError> {
    let n = s.len();
    if n * k.max(1) >= 127 || 1u128 << (n * k) > budget {
        return Err(OracleError::BudgetExceeded(format!("{n} elements at rank {k}")));
    }
    let model = Model::new(s)?;
    let base: Vec<u64> = s
        .boundary()
        .iter()
        .map(|b| model.mask(s, &BTreeSet::from([*b])))
        .chain(s.colors().iter().map(|c| model.mask(s, c)))
        .collect();
    let mut terms = Vec::new();
    let mut atoms = Vec::new();
    for &t in &base {
        atoms.push(describe(&model, &terms, t));
        terms.push(t);
    }
    let children = extensions(&model, &mut terms, k);
    Ok(TypeSignature { rank: k, atoms, children })
}

/// Atom bits of `x` against the earlier terms.
fn describe(m: &Model, terms: &[u64], x: u64) -> u64 {
    let flag = |b: bool, at: usize| (b as u64) << at;
    let is_v = x != 0 && x & !m.vertex == 0;
    let is_e = x != 0 && x & !m.edge == 0;
    let mut bits =
        flag(x == 0, 0) | flag(x.count_ones() == 1, 1) | flag(is_v, 2) | flag(is_e, 3) | flag(m.touches(x, x), 4);
    for (j, &t) in terms.iter().enumerate() {
        let at = 5 + 3 * j;
        bits |= flag(x & t == x, at) | flag(x & t == t, at + 1) | flag(m.touches(x, t), at + 2);
    }
    bits
}

fn extensions(m: &Model, terms: &mut Vec<u64>, k: usize) -> Vec<Node> {
    if k == 0 {
        return Vec::new();
    }
    let mut set = BTreeSet::new();
    for x in 0..=m.all() {
        let row = describe(m, terms, x);
        terms.push(x);
        let children = extensions(m, terms, k - 1);
        terms.pop();
        set.insert(Node { row, children });
    }
    set.into_iter().collect()
}
