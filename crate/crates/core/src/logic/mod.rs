//! MSO formulas over incidence structures.
//!
//! The core logic quantifies over sets only and has five atoms, all taking
//! set variables:
//!
//! | atom        | holds iff                                         |
//! |-------------|---------------------------------------------------|
//! | `sub X Y`   | X ⊆ Y                                             |
//! | `sing X`    | \|X\| = 1                                         |
//! | `inc X Y`   | some element of X is incident to some element of Y |
//! | `isV X`     | X is nonempty and holds only vertex elements      |
//! | `isE X`     | X is nonempty and holds only edge elements        |
//!
//! Quantifiers range over all subsets of the universe. The surface syntax
//! adds vertex and edge element quantifiers and the atoms `in`, `eq`, `adj`,
//! which [`translate_mso2`] rewrites into the core.

mod eval;
mod parse;
mod translate;

pub(crate) use eval::subsets;
pub use eval::{evaluate, evaluate_with_budget, Assignment, DEFAULT_EVAL_BUDGET};
pub use parse::parse_formula;
pub use translate::{desugar, translate_mso2};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("free variable `{0}` declared twice")]
    DuplicateFree(String),
    #[error("variable `{0}` is bound while already in scope")]
    ShadowedVariable(String),
    #[error("`{name}` must be an element variable in `{atom}`")]
    SortMismatch { name: String, atom: &'static str },
    #[error("universe of {size} elements exceeds the evaluation budget")]
    UniverseTooLarge { size: usize },
    #[error("assignment does not match the free variables: {0}")]
    BadAssignment(String),
}

impl LogicError {
    pub fn class(&self) -> &'static str {
        match self {
            LogicError::Syntax(_) => "SyntaxError",
            LogicError::UnboundVariable(_) => "UnboundVariable",
            LogicError::DuplicateFree(_) => "DuplicateFree",
            LogicError::ShadowedVariable(_) => "ShadowedVariable",
            LogicError::SortMismatch { .. } => "SortMismatch",
            LogicError::UniverseTooLarge { .. } => "UniverseTooLarge",
            LogicError::BadAssignment(_) => "BadAssignment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quant {
    Forall,
    Exists,
}

/// What a quantified variable ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sort {
    Set,
    Vertex,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Atom {
    Sub(String, String),
    Sing(String),
    Inc(String, String),
    IsV(String),
    IsE(String),
    In(String, String),
    Eq(String, String),
    Adj(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant { quant: Quant, sort: Sort, var: String, body: Box<Formula> },
}

/// Formula with its declared free set variables. Construction checks
/// scoping and sorts, so every value is well formed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurfaceFormula {
    free: Vec<String>,
    body: Formula,
}

impl SurfaceFormula {
    pub fn new(free: Vec<String>, body: Formula) -> Result<Self, LogicError> {
        parse::check_scopes(&free, &body)?;
        Ok(Self { free, body })
    }

    pub fn free(&self) -> &[String] {
        &self.free
    }

    pub fn body(&self) -> &Formula {
        &self.body
    }
}

impl Formula {
    /// Maximum quantifier nesting depth.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::quantifier_depth).max().unwrap_or(0),
            Formula::Imp(a, b) | Formula::Iff(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            Formula::Quant { body, .. } => 1 + body.quantifier_depth(),
        }
    }

    /// True iff the formula uses element quantifiers or `in`/`eq`/`adj`.
    pub fn has_sugar(&self) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Atom(a) => matches!(a, Atom::In(..) | Atom::Eq(..) | Atom::Adj(..)),
            Formula::Not(f) => f.has_sugar(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::has_sugar),
            Formula::Imp(a, b) | Formula::Iff(a, b) => a.has_sugar() || b.has_sugar(),
            Formula::Quant { sort, body, .. } => *sort != Sort::Set || body.has_sugar(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Sub(a, b) => write!(f, "(sub {a} {b})"),
            Atom::Sing(a) => write!(f, "(sing {a})"),
            Atom::Inc(a, b) => write!(f, "(inc {a} {b})"),
            Atom::IsV(a) => write!(f, "(isV {a})"),
            Atom::IsE(a) => write!(f, "(isE {a})"),
            Atom::In(a, b) => write!(f, "(in {a} {b})"),
            Atom::Eq(a, b) => write!(f, "(eq {a} {b})"),
            Atom::Adj(a, b) => write!(f, "(adj {a} {b})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, op: &str, fs: &[&Formula]| {
            write!(f, "({op}")?;
            for x in fs {
                write!(f, " {x}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => list(f, "not", &[x]),
            Formula::And(xs) => list(f, "and", &xs.iter().collect::<Vec<_>>()),
            Formula::Or(xs) => list(f, "or", &xs.iter().collect::<Vec<_>>()),
            Formula::Imp(a, b) => list(f, "imp", &[a, b]),
            Formula::Iff(a, b) => list(f, "iff", &[a, b]),
            Formula::Quant { quant, sort, var, body } => {
                let q = match quant {
                    Quant::Forall => "forall",
                    Quant::Exists => "exists",
                };
                let s = match sort {
                    Sort::Set => "Set",
                    Sort::Vertex => "V",
                    Sort::Edge => "E",
                };
                write!(f, "({q}{s} {var} {body})")
            }
        }
    }
}

impl fmt::Display for SurfaceFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(free")?;
        for v in &self.free {
            write!(f, " {v}")?;
        }
        write!(f, ") {}", self.body)
    }
}

/// Set-only formula over the five core atoms. Variables are slots: free
/// variables take slots `0..m`, a quantifier at nesting depth `d` binds slot
/// `m + d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Core {
    True,
    False,
    Not(Box<Core>),
    And(Vec<Core>),
    Or(Vec<Core>),
    Imp(Box<Core>, Box<Core>),
    Iff(Box<Core>, Box<Core>),
    Exists(usize, Box<Core>),
    Forall(usize, Box<Core>),
    Sub(usize, usize),
    Sing(usize),
    Inc(usize, usize),
    IsV(usize),
    IsE(usize),
}

impl Core {
    fn depth(&self) -> usize {
        match self {
            Core::True | Core::False => 0,
            Core::Sub(..) | Core::Sing(_) | Core::Inc(..) | Core::IsV(_) | Core::IsE(_) => 0,
            Core::Not(f) => f.depth(),
            Core::And(fs) | Core::Or(fs) => fs.iter().map(Core::depth).max().unwrap_or(0),
            Core::Imp(a, b) | Core::Iff(a, b) => a.depth().max(b.depth()),
            Core::Exists(_, f) | Core::Forall(_, f) => 1 + f.depth(),
        }
    }

    /// Number of nodes, used for evaluation cost estimates.
    pub fn size(&self) -> usize {
        match self {
            Core::Not(f) | Core::Exists(_, f) | Core::Forall(_, f) => 1 + f.size(),
            Core::And(fs) | Core::Or(fs) => 1 + fs.iter().map(Core::size).sum::<usize>(),
            Core::Imp(a, b) | Core::Iff(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoreFormula {
    free: Vec<String>,
    body: Core,
    qr: usize,
}

impl CoreFormula {
    pub(crate) fn new(free: Vec<String>, body: Core) -> Self {
        let qr = body.depth();
        Self { free, body, qr }
    }

    pub fn free_vars(&self) -> &[String] {
        &self.free
    }

    /// Number of free variables (`m`).
    pub fn arity(&self) -> usize {
        self.free.len()
    }

    pub fn body(&self) -> &Core {
        &self.body
    }

    /// Quantifier rank, taken as the quantifier nesting depth.
    pub fn qr(&self) -> usize {
        self.qr
    }

    /// Back to surface syntax, naming bound slots `_q<slot>`.
    pub fn to_surface(&self) -> SurfaceFormula {
        let name = |i: usize| -> String {
            if i < self.free.len() {
                self.free[i].clone()
            } else {
                format!("_q{i}")
            }
        };
        fn go(c: &Core, name: &dyn Fn(usize) -> String) -> Formula {
            let b = |c: &Core| Box::new(go(c, name));
            match c {
                Core::True => Formula::True,
                Core::False => Formula::False,
                Core::Not(f) => Formula::Not(b(f)),
                Core::And(fs) => Formula::And(fs.iter().map(|f| go(f, name)).collect()),
                Core::Or(fs) => Formula::Or(fs.iter().map(|f| go(f, name)).collect()),
                Core::Imp(x, y) => Formula::Imp(b(x), b(y)),
                Core::Iff(x, y) => Formula::Iff(b(x), b(y)),
                Core::Exists(v, f) => {
                    Formula::Quant { quant: Quant::Exists, sort: Sort::Set, var: name(*v), body: b(f) }
                }
                Core::Forall(v, f) => {
                    Formula::Quant { quant: Quant::Forall, sort: Sort::Set, var: name(*v), body: b(f) }
                }
                Core::Sub(x, y) => Formula::Atom(Atom::Sub(name(*x), name(*y))),
                Core::Sing(x) => Formula::Atom(Atom::Sing(name(*x))),
                Core::Inc(x, y) => Formula::Atom(Atom::Inc(name(*x), name(*y))),
                Core::IsV(x) => Formula::Atom(Atom::IsV(name(*x))),
                Core::IsE(x) => Formula::Atom(Atom::IsE(name(*x))),
            }
        }
        SurfaceFormula { free: self.free.clone(), body: go(&self.body, &name) }
    }
}

impl fmt::Display for CoreFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_surface())
    }
}

/// The independent-set formula: X holds only vertices and no edge element
/// has all of its incident elements inside X.
pub const INDEPENDENT_SET: &str = "(free X) (and (forallSet Z (imp (and (sing Z) (sub Z X)) (isV Z))) \
     (not (existsSet Y (and (isE Y) (forallSet Z (imp (and (sing Z) (inc Z Y)) (sub Z X)))))))";

/// Every edge element touches X, X holds only vertices.
pub const VERTEX_COVER: &str = "(free X) (and (forallSet Z (imp (and (sing Z) (sub Z X)) (isV Z))) \
     (forallSet Y (imp (and (sing Y) (isE Y)) (inc Y X))))";

/// Every vertex outside X shares an edge element with a member of X.
pub const DOMINATING_SET: &str = "(free X) (and (forallSet Z (imp (and (sing Z) (sub Z X)) (isV Z))) \
     (forallSet Z (imp (and (sing Z) (isV Z) (not (sub Z X))) \
       (existsSet Y (and (sing Y) (isE Y) (inc Z Y) (inc Y X))))))";

/// X is exactly the set of vertex elements.
pub const ALL_VERTICES: &str = "(free X) (forallSet Z (imp (sing Z) (iff (isV Z) (sub Z X))))";

/// Unsatisfiable.
pub const FALSE: &str = "(free X) (not (sub X X))";

/// Proper 3-coloring: the three sets partition the vertices and no edge
/// element has both ends in one class.
pub const THREE_COLORING: &str = "(free A B C) (and \
     (forallSet Z (imp (sing Z) (iff (isV Z) (or (sub Z A) (sub Z B) (sub Z C))))) \
     (forallSet Z (imp (sing Z) (and (not (and (sub Z A) (sub Z B))) (not (and (sub Z A) (sub Z C))) (not (and (sub Z B) (sub Z C)))))) \
     (forallSet Y (imp (and (sing Y) (isE Y)) (and \
       (not (forallSet Z (imp (and (sing Z) (inc Z Y)) (sub Z A)))) \
       (not (forallSet Z (imp (and (sing Z) (inc Z Y)) (sub Z B)))) \
       (not (forallSet Z (imp (and (sing Z) (inc Z Y)) (sub Z C))))))))";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        let qrs: Vec<usize> = [INDEPENDENT_SET, VERTEX_COVER, DOMINATING_SET, ALL_VERTICES, FALSE, THREE_COLORING]
            .iter()
            .map(|t| desugar(&parse_formula(t).unwrap()).qr())
            .collect();
        assert_eq!(qrs, vec![2, 1, 2, 1, 0, 2]);
    }

    #[test]
    fn display_round_trips() {
        let f = parse_formula(INDEPENDENT_SET).unwrap();
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        let c = desugar(&f);
        let back = desugar(&parse_formula(&c.to_string()).unwrap());
        assert_eq!(back.qr(), c.qr());
    }
}
