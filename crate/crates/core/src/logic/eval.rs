use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Core, CoreFormula, LogicError};
use crate::structures::{BitView, Elem, Structure};

/// Budget on `(2^n)^qr * |formula|` used by [`evaluate`].
pub const DEFAULT_EVAL_BUDGET: u128 = 1 << 40;

/// Values of the free variables, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment(pub Vec<BTreeSet<Elem>>);

impl Assignment {
    pub fn new(sets: Vec<BTreeSet<Elem>>) -> Self {
        Self(sets)
    }

    /// Binds the free variables to the structure's colors.
    pub fn from_colors(s: &Structure) -> Self {
        Self(s.colors().to_vec())
    }

    pub fn sets(&self) -> &[BTreeSet<Elem>] {
        &self.0
    }
}

fn cost(n: usize, qr: usize, size: usize) -> Option<u128> {
    let per = 1u128.checked_shl(n as u32)?;
    per.checked_pow(qr.max(1) as u32)?.checked_mul(size as u128)
}

pub fn evaluate(f: &CoreFormula, s: &Structure, a: &Assignment) -> Result<bool, LogicError> {
    evaluate_with_budget(f, s, a, DEFAULT_EVAL_BUDGET)
}

/// Brute-force evaluation; quantifiers range over every subset of the
/// universe.
pub fn evaluate_with_budget(f: &CoreFormula, s: &Structure, a: &Assignment, budget: u128) -> Result<bool, LogicError> {
    if a.0.len() != f.arity() {
        return Err(LogicError::BadAssignment(format!("{} sets for {} free variables", a.0.len(), f.arity())));
    }
    let too_large = || LogicError::UniverseTooLarge { size: s.len() };
    match cost(s.len(), f.qr(), f.body().size()) {
        Some(c) if c <= budget => {}
        _ => return Err(too_large()),
    }
    let view = BitView::new(s).ok_or_else(too_large)?;
    let mut env = Vec::with_capacity(f.arity() + f.qr());
    for set in &a.0 {
        if let Some(e) = set.iter().find(|e| !s.contains(**e)) {
            return Err(LogicError::BadAssignment(format!("element {e} outside the universe")));
        }
        env.push(view.mask(s, set));
    }
    env.resize(f.arity() + f.qr(), 0);
    Ok(eval(f.body(), &view, &mut env))
}

pub(crate) fn eval(f: &Core, v: &BitView, env: &mut [u64]) -> bool {
    match f {
        Core::True => true,
        Core::False => false,
        Core::Not(g) => !eval(g, v, env),
        Core::And(gs) => gs.iter().all(|g| eval(g, v, env)),
        Core::Or(gs) => gs.iter().any(|g| eval(g, v, env)),
        Core::Imp(a, b) => !eval(a, v, env) || eval(b, v, env),
        Core::Iff(a, b) => eval(a, v, env) == eval(b, v, env),
        Core::Exists(slot, g) => subsets(v.full()).any(|x| {
            env[*slot] = x;
            eval(g, v, env)
        }),
        Core::Forall(slot, g) => subsets(v.full()).all(|x| {
            env[*slot] = x;
            eval(g, v, env)
        }),
        Core::Sub(x, y) => env[*x] & !env[*y] == 0,
        Core::Sing(x) => env[*x].count_ones() == 1,
        Core::Inc(x, y) => v.inc(env[*x], env[*y]),
        Core::IsV(x) => v.is_v(env[*x]),
        Core::IsE(x) => v.is_e(env[*x]),
    }
}

/// All submasks of `full`, starting with the empty set.
pub(crate) fn subsets(full: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == full { None } else { Some(cur.wrapping_sub(full) & full) };
        Some(cur)
    })
}
