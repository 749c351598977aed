//! Exact linear optimization over a [`SparseSystem`] and LP-file export.

mod simplex;

pub use simplex::{solve as solve_raw, Lp, LpOutcome};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::SyntaxError;
use crate::polytope::{SparseSystem, SystemVar};
use crate::structures::Elem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Sense {
    #[default]
    Min,
    Max,
}

impl FromStr for Sense {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(Sense::Min),
            "max" => Ok(Sense::Max),
            _ => Err(format!("unknown sense {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("weight on y[{0}][{1}], which is not a variable of the system")]
    UnknownWeight(Elem, usize),
}

/// Weights `w[v][i]` on the projection variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Objective {
    pub weights: BTreeMap<(Elem, usize), BigRational>,
    pub sense: Sense,
}

impl Objective {
    pub fn new(sense: Sense) -> Self {
        Self { weights: BTreeMap::new(), sense }
    }

    /// Weight one on every `y` column of `sys`.
    pub fn unit(sys: &SparseSystem, sense: Sense) -> Self {
        let weights = sys.y_cols().map(|(_, v, i)| ((v, i), BigRational::one())).collect();
        Self { weights, sense }
    }

    pub fn with_weights(weights: BTreeMap<(Elem, usize), BigRational>, sense: Sense) -> Self {
        Self { weights, sense }
    }

    /// Objective value of a 0/1 `y` assignment.
    pub fn eval(&self, chosen: impl Fn(Elem, usize) -> bool) -> BigRational {
        self.weights.iter().filter(|((v, i), _)| chosen(*v, *i)).fold(BigRational::zero(), |acc, (_, w)| acc + w)
    }

    fn costs(&self, sys: &SparseSystem) -> Result<Vec<BigRational>, SolveError> {
        let mut c = vec![BigRational::zero(); sys.num_cols()];
        for (&(v, i), w) in &self.weights {
            let col = sys.col(&SystemVar::Y { v, i }).ok_or(SolveError::UnknownWeight(v, i))?;
            c[col] = w.clone();
        }
        Ok(c)
    }
}

/// Parses `p/q`, an integer or a decimal into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (BigInt::from_str(p).ok()?, BigInt::from_str(q).ok()?);
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = BigInt::from_str(&format!("{int}{frac}")).ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, scale);
    Some(if neg { -r } else { r })
}

/// Weights file: lines `w <vertex-id> <free-var-index> <rational>`; blank
/// lines and `c` comment lines are skipped.
pub fn parse_weights(text: &str) -> Result<BTreeMap<(Elem, usize), BigRational>, SyntaxError> {
    let mut out = BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        let err = |col: usize, expected: &str| SyntaxError { line: ln + 1, col, expected: expected.into() };
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first() {
            None | Some(&"c") => continue,
            Some(&"w") => {}
            Some(_) => return Err(err(1, "'w' or 'c'")),
        }
        let col_of = |k: usize| line.find(toks[k]).map_or(1, |p| p + 1);
        if toks.len() != 4 {
            return Err(err(line.len() + 1, "w <vertex-id> <free-var-index> <rational>"));
        }
        let v: Elem = toks[1].parse().map_err(|_| err(col_of(1), "vertex id"))?;
        let i: usize = toks[2].parse().map_err(|_| err(col_of(2), "free variable index"))?;
        let w = parse_rational(toks[3]).ok_or_else(|| err(col_of(3), "rational p/q or decimal"))?;
        out.insert((v, i), w);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptResult {
    pub status: Status,
    /// Objective value; zero unless optimal.
    pub value: BigRational,
    /// One value per column; empty unless optimal.
    pub primal: Vec<BigRational>,
    pub pivots: usize,
}

impl OptResult {
    /// The `y` part of an optimal solution, as `(v, i) → value`.
    pub fn y_values(&self, sys: &SparseSystem) -> BTreeMap<(Elem, usize), BigRational> {
        if self.primal.is_empty() {
            return BTreeMap::new();
        }
        sys.y_cols().map(|(c, v, i)| ((v, i), self.primal[c].clone())).collect()
    }

    /// Whether every coordinate is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.primal.iter().all(|x| x.is_zero() || x.is_one())
    }
}

/// Optimizes the objective over the system with exact arithmetic.
pub fn solve_lp(sys: &SparseSystem, obj: &Objective) -> Result<OptResult, SolveError> {
    let mut cost = obj.costs(sys)?;
    if obj.sense == Sense::Max {
        cost.iter_mut().for_each(|c| *c = -c.clone());
    }
    let lp = Lp {
        rows: sys.rows().iter().map(|r| (r.terms.clone(), r.rhs.clone())).collect(),
        cost,
        nonneg: (0..sys.num_cols()).map(|c| sys.is_nonneg(c)).collect(),
    };
    let out = solve_raw(&lp);
    let value = if obj.sense == Sense::Max { -out.value } else { out.value };
    Ok(OptResult { status: out.status, value, primal: out.x, pivots: out.pivots })
}

fn decimal(q: &BigRational) -> Option<String> {
    let mut d = q.denom().clone();
    let mut places = 0usize;
    for p in [2u32, 5] {
        while d.is_multiple_of(&BigInt::from(p)) {
            d /= p;
        }
    }
    if !d.is_one() {
        return None;
    }
    let mut n = q.clone();
    while !n.is_integer() {
        n *= BigInt::from(10);
        places += 1;
    }
    let digits = n.to_integer().abs().to_string();
    let s = if places == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (a, b) = padded.split_at(padded.len() - places);
        format!("{a}.{b}")
    };
    Some(if q.is_negative() { format!("-{s}") } else { s })
}

fn push_terms(out: &mut String, terms: &[(String, BigRational)]) {
    for (k, (name, a)) in terms.iter().enumerate() {
        let mag = decimal(&a.abs()).expect("scaled to decimals");
        let sign = if a.is_negative() {
            "-"
        } else if k > 0 {
            "+"
        } else {
            ""
        };
        let sep = if k > 0 { " " } else { "" };
        let coef = if mag == "1" { String::new() } else { format!("{mag} ") };
        let _ = write!(out, "{sep}{sign}{}{coef}{name}", if sign.is_empty() { "" } else { " " });
    }
}

/// CPLEX LP text. Objective coefficients without a finite decimal expansion
/// are scaled by the lcm of their denominators, noted in a comment line.
pub fn export_lp(sys: &SparseSystem, obj: &Objective) -> Result<String, SolveError> {
    let names: Vec<String> = sys.vars().iter().map(ToString::to_string).collect();
    let cost = obj.costs(sys)?;
    let mut scale = BigInt::one();
    if cost.iter().any(|c| decimal(c).is_none()) {
        for c in &cost {
            scale = scale.lcm(c.denom());
        }
    }
    let mut out = String::new();
    if !scale.is_one() {
        let _ = writeln!(out, "\\ objective scaled by {scale}");
    }
    out.push_str(if obj.sense == Sense::Max { "Maximize\n" } else { "Minimize\n" });
    let terms: Vec<(String, BigRational)> = cost
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (names[j].clone(), c * BigRational::from_integer(scale.clone())))
        .collect();
    out.push_str(" obj: ");
    if terms.is_empty() {
        out.push('0');
    } else {
        push_terms(&mut out, &terms);
    }
    out.push_str("\nSubject To\n");
    for (i, row) in sys.rows().iter().enumerate() {
        let _ = write!(out, " c{i}: ");
        let mut terms: Vec<(String, BigRational)> =
            row.terms.iter().map(|(c, a)| (names[*c].clone(), a.clone())).collect();
        let lcm = terms.iter().fold(row.rhs.denom().clone(), |l, (_, a)| l.lcm(a.denom()));
        let mult = BigRational::from_integer(lcm);
        terms.iter_mut().for_each(|(_, a)| *a = &*a * &mult);
        if terms.is_empty() {
            let _ = write!(out, "0 {}", names.first().map_or("obj_dummy", String::as_str));
        } else {
            push_terms(&mut out, &terms);
        }
        let _ = writeln!(out, " = {}", decimal(&(&row.rhs * &mult)).expect("integral"));
    }
    out.push_str("Bounds\n");
    for (c, name) in names.iter().enumerate() {
        if !sys.is_nonneg(c) {
            let _ = writeln!(out, " {name} free");
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Row;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("3/4"), Some(q(3, 4)));
        assert_eq!(parse_rational("-0.25"), Some(q(-1, 4)));
        assert_eq!(parse_rational("2"), Some(q(2, 1)));
        assert_eq!(parse_rational("007.50"), Some(q(15, 2)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn weights_file() {
        let w = parse_weights("c test\nw 1 0 1/2\n\nw 3 0 -2.5\n").unwrap();
        assert_eq!(w[&(1, 0)], q(1, 2));
        assert_eq!(w[&(3, 0)], q(-5, 2));
        let e = parse_weights("w 1 zero 1\n").unwrap_err();
        assert_eq!((e.line, e.col), (1, 5));
        assert!(parse_weights("v 1 0 1").is_err());
    }

    #[test]
    fn decimals_render() {
        assert_eq!(decimal(&q(-1, 4)).unwrap(), "-0.25");
        assert_eq!(decimal(&q(3, 1)).unwrap(), "3");
        assert!(decimal(&q(1, 3)).is_none());
    }

    fn tiny() -> SparseSystem {
        let mut sys = SparseSystem::new();
        let y = sys.add_var(SystemVar::Y { v: 1, i: 0 }, false);
        let x = sys.add_var(SystemVar::X("x".into()), true);
        sys.add_row(Row { terms: vec![(y, q(1, 1)), (x, q(-1, 1))], rhs: q(0, 1) });
        sys
    }

    #[test]
    fn empty_objective_header() {
        let lp = export_lp(&tiny(), &Objective::new(Sense::Min)).unwrap();
        assert!(lp.starts_with("Minimize\n obj: 0\nSubject To\n c0: y_1_0 - x = 0\n"));
        assert!(lp.contains("Bounds\n y_1_0 free\nEnd\n"));
    }

    #[test]
    fn thirds_are_scaled() {
        let mut obj = Objective::new(Sense::Max);
        obj.weights.insert((1, 0), q(1, 3));
        let lp = export_lp(&tiny(), &obj).unwrap();
        assert!(lp.starts_with("\\ objective scaled by 3\nMaximize\n obj: y_1_0\n"));
        assert!(matches!(
            export_lp(&tiny(), &Objective::with_weights([((9, 0), q(1, 1))].into(), Sense::Min)),
            Err(SolveError::UnknownWeight(9, 0))
        ));
    }

    #[test]
    fn unbounded_free_column() {
        let obj = Objective::with_weights([((1, 0), q(1, 1))].into(), Sense::Max);
        let out = solve_lp(&tiny(), &obj).unwrap();
        assert_eq!(out.status, Status::Unbounded);
    }
}
