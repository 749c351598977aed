//! Types of boundaried colored structures, the witness registry and the
//! feasible type sets of a nice tree decomposition.
//!
//! [`signature`] computes full rank-k types. The registry interns the
//! coarser [`PhiState`]s of one formula, which stay few along a
//! decomposition while still deciding the formula.

mod feasible;
mod phi;
mod signature;

pub use feasible::{compute_feasible, mu, FeasibleSets, NodeTypes, NuEntry};
pub use phi::{state_cost, Entry, Level, Part, PhiState, Plan, Var, VarInfo, MAX_BOUNDARY};
pub use signature::{
    equivalent, signature, signature_cost, signature_with_budget, Node, TypeSignature, DEFAULT_SIGNATURE_BUDGET,
};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{evaluate_with_budget, Assignment, CoreFormula, LogicError, DEFAULT_EVAL_BUDGET};
use crate::structures::{ElemKind, Structure, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("signature of a {size}-element structure at rank {rank} exceeds the budget")]
    BudgetExceeded { size: usize, rank: usize },
    #[error("{0} terms do not fit the type encoding")]
    TooManyTerms(usize),
    #[error("witness with {size} elements exceeds the cap of {cap}{}", node.map(|n| format!(" at node {n}")).unwrap_or_default())]
    WitnessTooLarge { size: usize, cap: usize, node: Option<usize> },
    #[error("structure has {got} colors, registry expects {want}")]
    ColorMismatch { got: usize, want: usize },
    #[error("formula needs rank {need}, registry has rank {have}")]
    RankTooLow { need: usize, have: usize },
    #[error("node {0} of the decomposition is not nice")]
    NotNice(usize),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

impl TypeError {
    pub fn class(&self) -> &'static str {
        match self {
            TypeError::BudgetExceeded { .. } | TypeError::TooManyTerms(_) | TypeError::RankTooLow { .. } => {
                "BudgetExceeded"
            }
            TypeError::WitnessTooLarge { .. } => "WitnessTooLarge",
            TypeError::ColorMismatch { .. } => "InputError",
            TypeError::NotNice(_) => "InvalidDecomposition",
            TypeError::Structure(_) => "InvalidStructure",
            TypeError::Logic(e) => e.class(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeId(pub u32);

impl TypeId {
    /// Type of the empty structure.
    pub const EMPTY: TypeId = TypeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Default cap on the subsets visited when a state is computed directly.
pub const DEFAULT_STATE_BUDGET: u128 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeConfig {
    pub formula: CoreFormula,
    pub witness_cap: usize,
    pub state_budget: u128,
    pub eval_budget: u128,
}

impl TypeConfig {
    pub fn new(f: &CoreFormula) -> Self {
        Self {
            formula: f.clone(),
            witness_cap: 24,
            state_budget: DEFAULT_STATE_BUDGET,
            eval_budget: DEFAULT_EVAL_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct IntroKey {
    from: TypeId,
    pos: usize,
    adj: u32,
    kind: ElemKind,
    colors: u64,
}

/// Interned types with their witnesses and memoized node transitions.
#[derive(Debug, Clone)]
pub struct TypeRegistry {
    config: TypeConfig,
    plan: Plan,
    ids: HashMap<PhiState, TypeId>,
    states: Vec<PhiState>,
    witnesses: Vec<Structure>,
    intro: HashMap<IntroKey, TypeId>,
    forget: HashMap<(TypeId, usize), TypeId>,
    join: HashMap<(TypeId, TypeId), Option<TypeId>>,
}

impl TypeRegistry {
    /// New registry; the empty structure is interned first and gets
    /// [`TypeId::EMPTY`].
    pub fn new(config: TypeConfig) -> Result<Self, TypeError> {
        let plan = Plan::new(&config.formula);
        let mut reg = Self {
            config,
            plan,
            ids: HashMap::new(),
            states: Vec::new(),
            witnesses: Vec::new(),
            intro: HashMap::new(),
            forget: HashMap::new(),
            join: HashMap::new(),
        };
        reg.intern(&Structure::empty(reg.m()))?;
        Ok(reg)
    }

    pub fn config(&self) -> &TypeConfig {
        &self.config
    }

    pub fn plan(&self) -> &Plan {
        &self.plan
    }

    /// Rank of the formula the registry decides.
    pub fn k(&self) -> usize {
        self.config.formula.qr()
    }

    pub fn m(&self) -> usize {
        self.config.formula.arity()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = TypeId> {
        (0..self.states.len() as u32).map(TypeId)
    }

    pub fn witness(&self, t: TypeId) -> &Structure {
        &self.witnesses[t.index()]
    }

    pub fn state(&self, t: TypeId) -> &PhiState {
        &self.states[t.index()]
    }

    pub fn boundary_len(&self, t: TypeId) -> usize {
        self.state(t).len
    }

    /// The state of `s` computed on `s` itself.
    pub fn state_of(&self, s: &Structure) -> Result<PhiState, TypeError> {
        PhiState::of(s, &self.plan, self.config.state_budget)
    }

    /// The id of `s`'s type if it is already registered.
    pub fn lookup(&self, s: &Structure) -> Result<Option<TypeId>, TypeError> {
        Ok(self.ids.get(&self.state_of(s)?).copied())
    }

    pub fn intern(&mut self, s: &Structure) -> Result<TypeId, TypeError> {
        let state = self.state_of(s)?;
        self.insert(state, None, |_| Ok(s.clone()))
    }

    fn insert(
        &mut self,
        state: PhiState,
        node: Option<usize>,
        witness: impl FnOnce(&[Structure]) -> Result<Structure, TypeError>,
    ) -> Result<TypeId, TypeError> {
        if let Some(&t) = self.ids.get(&state) {
            return Ok(t);
        }
        let w = witness(&self.witnesses)?;
        if w.len() > self.config.witness_cap {
            return Err(TypeError::WitnessTooLarge { size: w.len(), cap: self.config.witness_cap, node });
        }
        let t = TypeId(self.states.len() as u32);
        self.ids.insert(state.clone(), t);
        self.states.push(state);
        self.witnesses.push(w);
        Ok(t)
    }

    /// Type after adding one element to a structure of type `from`, as in
    /// [`Structure::introduce_extend`].
    pub fn introduce(
        &mut self,
        from: TypeId,
        pos: usize,
        adj: &[usize],
        kind: ElemKind,
        colors: &[usize],
        node: Option<usize>,
    ) -> Result<TypeId, TypeError> {
        let len = self.boundary_len(from);
        if pos > len || adj.iter().any(|&p| p >= len) || colors.iter().any(|&c| c >= self.m()) {
            return Err(StructureError::BadPosition { pos, len }.into());
        }
        let key = IntroKey {
            from,
            pos,
            adj: adj.iter().fold(0, |m, p| m | 1 << p),
            kind,
            colors: colors.iter().fold(0, |m, c| m | 1 << c),
        };
        if let Some(&t) = self.intro.get(&key) {
            return Ok(t);
        }
        let state = self.state(from).introduce(&self.plan, pos, key.adj, kind, key.colors)?;
        let t = self
            .insert(state, node, |ws| Ok(ws[from.index()].introduce_extend(pos, adj, kind, colors, usize::MAX)?))?;
        self.intro.insert(key, t);
        Ok(t)
    }

    /// Type after removing boundary position `d`.
    pub fn forget(&mut self, from: TypeId, d: usize, node: Option<usize>) -> Result<TypeId, TypeError> {
        if let Some(&t) = self.forget.get(&(from, d)) {
            return Ok(t);
        }
        let len = self.boundary_len(from);
        if d >= len {
            return Err(StructureError::BadPosition { pos: d, len }.into());
        }
        let state = self.state(from).forget(&self.plan, d);
        let t = self.insert(state, node, |ws| Ok(ws[from.index()].drop_boundary_at(d)?))?;
        self.forget.insert((from, d), t);
        Ok(t)
    }

    /// Type of the join, `None` if the types are not compatible.
    pub fn join(&mut self, a: TypeId, b: TypeId, node: Option<usize>) -> Result<Option<TypeId>, TypeError> {
        if let Some(&t) = self.join.get(&(a, b)) {
            return Ok(t);
        }
        let t = match self.state(a).join(&self.plan, self.state(b)) {
            Some(state) => Some(self.insert(state, node, |ws| Ok(ws[a.index()].join(&ws[b.index()])?))?),
            None => None,
        };
        self.join.insert((a, b), t);
        Ok(t)
    }

    pub fn compatible(&self, a: TypeId, b: TypeId) -> bool {
        self.state(a).compatible(self.state(b))
    }

    /// Whether boundary position `p` of type `t` lies in color `i`.
    pub fn colored(&self, t: TypeId, p: usize, i: usize) -> bool {
        self.state(t).colored(p, i)
    }

    /// ρ of the registry's formula, read off the state. `None` while the
    /// boundary is not empty.
    pub fn accepts(&self, t: TypeId) -> Option<bool> {
        self.state(t).accepts(&self.plan)
    }

    /// Whether the witness of `t` satisfies `f` with the free variables bound
    /// to its colors.
    pub fn rho(&self, f: &CoreFormula, t: TypeId) -> Result<bool, TypeError> {
        if f.qr() > self.k() {
            return Err(TypeError::RankTooLow { need: f.qr(), have: self.k() });
        }
        if f.arity() != self.m() {
            return Err(TypeError::ColorMismatch { got: f.arity(), want: self.m() });
        }
        let w = self.witness(t);
        Ok(evaluate_with_budget(f, w, &Assignment::from_colors(w), self.config.eval_budget)?)
    }

    /// Largest witness universe.
    pub fn max_witness(&self) -> usize {
        self.witnesses.iter().map(Structure::len).max().unwrap_or(0)
    }
}

/// Whether two registered types have compatible boundaries.
pub fn types_compatible(a: TypeId, b: TypeId, reg: &TypeRegistry) -> bool {
    reg.compatible(a, b)
}

/// ρ_φ of a registered type.
pub fn rho(f: &CoreFormula, t: TypeId, reg: &TypeRegistry) -> Result<bool, TypeError> {
    reg.rho(f, t)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::logic::{desugar, parse_formula, INDEPENDENT_SET};
    use crate::structures::Graph;

    fn core(t: &str) -> CoreFormula {
        desugar(&parse_formula(t).unwrap())
    }

    fn is_registry() -> TypeRegistry {
        TypeRegistry::new(TypeConfig::new(&core(INDEPENDENT_SET))).unwrap()
    }

    #[test]
    fn empty_type_comes_first() {
        let mut reg = is_registry();
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.intern(&Structure::empty(1)).unwrap(), TypeId::EMPTY);
        assert_eq!(reg.k(), 2);
        assert_eq!(reg.m(), 1);
    }

    #[test]
    fn interning_is_stable() {
        let mut reg = is_registry();
        let color = |s: Structure| s.with_colors(vec![BTreeSet::new()]).unwrap();
        let a = color(Graph::path(3).incidence_structure().0);
        let b = color(Graph::new([4, 5, 6], [(5, 6), (4, 5)]).unwrap().incidence_structure().0);
        let ta = reg.intern(&a).unwrap();
        assert_eq!(reg.intern(&a).unwrap(), ta);
        assert_eq!(reg.intern(&b).unwrap(), ta);
        assert_eq!(reg.witness(ta), &a);
        assert_eq!(reg.lookup(&b).unwrap(), Some(ta));
    }

    #[test]
    fn witness_cap() {
        let mut cfg = TypeConfig::new(&core(INDEPENDENT_SET));
        cfg.witness_cap = 3;
        let mut reg = TypeRegistry::new(cfg).unwrap();
        let (s, _) = Graph::path(3).incidence_structure();
        let s = s.with_colors(vec![BTreeSet::from([1, 2])]).unwrap();
        assert!(matches!(reg.intern(&s), Err(TypeError::WitnessTooLarge { size: 5, cap: 3, node: None })));
    }

    #[test]
    fn rho_values() {
        let mut reg = is_registry();
        let (s, _) = Graph::complete(3).incidence_structure();
        let two = s.clone().with_colors(vec![BTreeSet::from([1, 2])]).unwrap();
        let one = s.with_colors(vec![BTreeSet::from([1])]).unwrap();
        let (t2, t1) = (reg.intern(&two).unwrap(), reg.intern(&one).unwrap());
        let is = core(INDEPENDENT_SET);
        assert!(!reg.rho(&is, t2).unwrap());
        assert!(reg.rho(&is, t1).unwrap());
        assert_eq!(reg.accepts(t2), Some(false));
        assert_eq!(reg.accepts(t1), Some(true));
        for t in reg.ids() {
            assert!(reg.rho(&core("(free X) (sub X X)"), t).unwrap());
            assert!(!reg.rho(&core("(free X) (not (sub X X))"), t).unwrap());
        }
        assert!(matches!(
            reg.rho(&core("(free X) (existsSet A (existsSet B (existsSet C (sub A X))))"), t1),
            Err(TypeError::RankTooLow { need: 3, have: 2 })
        ));
    }

    #[test]
    fn compatibility_follows_boundary() {
        let mut reg = is_registry();
        let v = |colored: bool| {
            let c = if colored { BTreeSet::from([0]) } else { BTreeSet::new() };
            Structure::from_parts([(0, ElemKind::Vertex)], [], vec![c], vec![0]).unwrap()
        };
        let (a, b) = (reg.intern(&v(false)).unwrap(), reg.intern(&v(true)).unwrap());
        assert!(types_compatible(a, a, &reg));
        assert!(!types_compatible(a, b, &reg));
        assert!(reg.colored(b, 0, 0) && !reg.colored(a, 0, 0));
        assert_eq!(reg.join(a, b, None).unwrap(), None);
        assert_eq!(reg.join(a, a, None).unwrap(), Some(a));
    }

    #[test]
    fn transitions_agree_with_direct_states() {
        let mut reg = is_registry();
        let a = reg.introduce(TypeId::EMPTY, 0, &[], ElemKind::Vertex, &[0], None).unwrap();
        let b = reg.introduce(a, 1, &[0], ElemKind::Edge, &[], None).unwrap();
        let c = reg.forget(b, 0, None).unwrap();
        for t in [a, b, c] {
            assert_eq!(reg.lookup(&reg.witness(t).clone()).unwrap(), Some(t));
        }
    }
}
