use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Status;

type Q = BigRational;

/// `Σ a_j x_j = rhs` over working columns.
#[derive(Debug, Clone)]
struct WRow {
    terms: BTreeMap<usize, Q>,
    rhs: Q,
}

/// How an eliminated column gets its value back.
#[derive(Debug, Clone)]
enum Gone {
    Fixed(Q),
    /// `x = (rhs − Σ a_j x_j) / a`.
    Solved {
        a: Q,
        terms: Vec<(usize, Q)>,
        rhs: Q,
    },
}

/// Minimize `c·x` subject to `A x = b`, `x_j ≥ 0` where `nonneg[j]`.
#[derive(Debug, Clone)]
pub struct Lp {
    pub rows: Vec<(Vec<(usize, Q)>, Q)>,
    pub cost: Vec<Q>,
    pub nonneg: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: Status,
    pub value: Q,
    pub x: Vec<Q>,
    pub pivots: usize,
}

struct Presolved {
    rows: Vec<Option<WRow>>,
    cols: Vec<BTreeSet<usize>>,
    cost: Vec<Q>,
    offset: Q,
    nonneg: Vec<bool>,
    gone: Vec<Option<Gone>>,
    order: Vec<usize>,
}

impl Presolved {
    fn new(lp: &Lp) -> Self {
        let n = lp.cost.len();
        let mut cols = vec![BTreeSet::new(); n];
        let mut rows = Vec::with_capacity(lp.rows.len());
        for (i, (terms, rhs)) in lp.rows.iter().enumerate() {
            let mut map: BTreeMap<usize, Q> = BTreeMap::new();
            for (c, a) in terms {
                *map.entry(*c).or_insert_with(Q::zero) += a;
            }
            map.retain(|_, a| !a.is_zero());
            for &c in map.keys() {
                cols[c].insert(i);
            }
            rows.push(Some(WRow { terms: map, rhs: rhs.clone() }));
        }
        Self {
            rows,
            cols,
            cost: lp.cost.clone(),
            offset: Q::zero(),
            nonneg: lp.nonneg.clone(),
            gone: vec![None; n],
            order: Vec::new(),
        }
    }

    fn drop_row(&mut self, r: usize) -> WRow {
        let row = self.rows[r].take().expect("live row");
        for c in row.terms.keys() {
            self.cols[*c].remove(&r);
        }
        row
    }

    fn fix(&mut self, x: usize, v: Q) {
        for r in std::mem::take(&mut self.cols[x]) {
            let row = self.rows[r].as_mut().expect("live row");
            let a = row.terms.remove(&x).expect("column in row");
            row.rhs -= a * &v;
        }
        self.offset += &self.cost[x] * &v;
        self.cost[x] = Q::zero();
        self.gone[x] = Some(Gone::Fixed(v));
        self.order.push(x);
    }

    /// Removes `x` using row `r`, substituting it everywhere else.
    fn eliminate(&mut self, x: usize, r: usize) {
        let row = self.drop_row(r);
        let a = row.terms[&x].clone();
        let rest: Vec<(usize, Q)> = row.terms.iter().filter(|(c, _)| **c != x).map(|(c, v)| (*c, v.clone())).collect();
        for other in std::mem::take(&mut self.cols[x]) {
            let target = self.rows[other].as_mut().expect("live row");
            let k = target.terms.remove(&x).expect("column in row") / &a;
            target.rhs -= &k * &row.rhs;
            for (c, v) in &rest {
                let e = target.terms.entry(*c).or_insert_with(Q::zero);
                *e -= &k * v;
                if e.is_zero() {
                    target.terms.remove(c);
                    self.cols[*c].remove(&other);
                } else {
                    self.cols[*c].insert(other);
                }
            }
        }
        if !self.cost[x].is_zero() {
            let k = &self.cost[x] / &a;
            self.offset += &k * &row.rhs;
            for (c, v) in &rest {
                self.cost[*c] -= &k * v;
            }
            self.cost[x] = Q::zero();
        }
        self.gone[x] = Some(Gone::Solved { a, terms: rest, rhs: row.rhs });
        self.order.push(x);
    }

    /// Whether `x ≥ 0` follows from row `r` and the other columns' signs.
    fn implied_nonneg(&self, x: usize, r: usize) -> bool {
        let row = self.rows[r].as_ref().expect("live row");
        let a = &row.terms[&x];
        let ok_rhs = !(&row.rhs / a).is_negative();
        ok_rhs && row.terms.iter().all(|(c, v)| *c == x || (self.nonneg[*c] && !(v / a).is_positive()))
    }

    /// Returns false when the system is found infeasible.
    fn run(&mut self) -> bool {
        let mut changed = true;
        while changed {
            changed = false;
            for r in 0..self.rows.len() {
                let Some(row) = &self.rows[r] else { continue };
                match row.terms.len() {
                    0 => {
                        if !row.rhs.is_zero() {
                            return false;
                        }
                        self.rows[r] = None;
                        changed = true;
                    }
                    1 => {
                        let (&x, a) = row.terms.iter().next().expect("one term");
                        let v = &row.rhs / a;
                        if self.nonneg[x] && v.is_negative() {
                            return false;
                        }
                        self.drop_row(r);
                        self.fix(x, v);
                        changed = true;
                    }
                    _ => {
                        let all_nonneg = row.terms.keys().all(|c| self.nonneg[*c]);
                        let pos = row.terms.values().all(Signed::is_positive);
                        let neg = row.terms.values().all(Signed::is_negative);
                        if all_nonneg && (pos || neg) {
                            let sign_ok = if pos { !row.rhs.is_negative() } else { !row.rhs.is_positive() };
                            if !sign_ok {
                                return false;
                            }
                            if row.rhs.is_zero() {
                                let cols: Vec<usize> = row.terms.keys().copied().collect();
                                self.drop_row(r);
                                for c in cols {
                                    self.fix(c, Q::zero());
                                }
                                changed = true;
                            }
                        }
                    }
                }
            }
            for x in 0..self.cols.len() {
                if self.gone[x].is_some() || self.cols[x].is_empty() {
                    continue;
                }
                let pick = if !self.nonneg[x] {
                    (self.cols[x].len() == 1).then(|| *self.cols[x].iter().next().expect("one row"))
                } else {
                    self.cols[x].iter().copied().find(|&r| self.implied_nonneg(x, r))
                };
                if let Some(r) = pick {
                    self.eliminate(x, r);
                    changed = true;
                }
            }
        }
        true
    }

    fn recover(&self, kept: &[Q]) -> Vec<Q> {
        let mut x = kept.to_vec();
        for &c in self.order.iter().rev() {
            x[c] = match self.gone[c].as_ref().expect("eliminated") {
                Gone::Fixed(v) => v.clone(),
                Gone::Solved { a, terms, rhs } => {
                    let s = terms.iter().fold(rhs.clone(), |acc, (j, v)| acc - v * &x[*j]);
                    s / a
                }
            };
        }
        x
    }
}

/// Sparse-row tableau with one basic column per row.
struct Tableau {
    rows: Vec<Vec<(usize, Q)>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    /// Reduced costs, dense over columns.
    d: Vec<Q>,
    z: Q,
    pivots: usize,
}

fn axpy(row: &[(usize, Q)], k: &Q, piv: &[(usize, Q)]) -> Vec<(usize, Q)> {
    // row − k·piv
    let mut out = Vec::with_capacity(row.len() + piv.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < piv.len() {
        let take_row = j >= piv.len() || (i < row.len() && row[i].0 < piv[j].0);
        let take_piv = i >= row.len() || (j < piv.len() && piv[j].0 < row[i].0);
        if take_row {
            out.push(row[i].clone());
            i += 1;
        } else if take_piv {
            out.push((piv[j].0, -(k * &piv[j].1)));
            j += 1;
        } else {
            let v = &row[i].1 - k * &piv[j].1;
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn entry(row: &[(usize, Q)], c: usize) -> Option<&Q> {
    row.binary_search_by_key(&c, |t| t.0).ok().map(|i| &row[i].1)
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let a = entry(&self.rows[r], c).expect("pivot entry").clone();
        let prow: Vec<(usize, Q)> = self.rows[r].iter().map(|(j, v)| (*j, v / &a)).collect();
        let prhs = &self.rhs[r] / &a;
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(k) = entry(&self.rows[i], c).cloned() {
                self.rows[i] = axpy(&self.rows[i], &k, &prow);
                self.rhs[i] -= &k * &prhs;
            }
        }
        let k = self.d[c].clone();
        if !k.is_zero() {
            for (j, v) in &prow {
                self.d[*j] -= &k * v;
            }
            self.z -= &k * &prhs;
        }
        self.rows[r] = prow;
        self.rhs[r] = prhs;
        self.basis[r] = c;
    }

    /// Bland's rule over columns `< limit`. Returns false when unbounded.
    fn optimize(&mut self, limit: usize) -> bool {
        loop {
            let Some(c) = (0..limit).find(|&j| self.d[j].is_negative()) else { return true };
            let mut best: Option<(Q, usize, usize)> = None;
            for i in 0..self.rows.len() {
                let Some(a) = entry(&self.rows[i], c) else { continue };
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((q, _, bj)) => ratio < *q || (ratio == *q && self.basis[i] < *bj),
                };
                if better {
                    best = Some((ratio, i, self.basis[i]));
                }
            }
            let Some((_, r, _)) = best else { return false };
            self.pivot(r, c);
        }
    }
}

fn solve_standard(rows: Vec<WRow>, cost: &[Q], n: usize) -> (Status, Vec<Q>, usize) {
    let m = rows.len();
    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        d: vec![Q::zero(); n + m],
        z: Q::zero(),
        pivots: 0,
    };
    for (i, row) in rows.into_iter().enumerate() {
        let flip = row.rhs.is_negative();
        let mut terms: Vec<(usize, Q)> = row.terms.into_iter().map(|(c, a)| (c, if flip { -a } else { a })).collect();
        terms.push((n + i, Q::one()));
        t.rows.push(terms);
        t.rhs.push(if flip { -row.rhs } else { row.rhs });
        t.basis.push(n + i);
    }
    // Phase one: minimize the artificial sum.
    for i in 0..m {
        for (j, a) in &t.rows[i] {
            if *j < n {
                t.d[*j] -= a;
            }
        }
        t.z -= &t.rhs[i];
    }
    t.optimize(n);
    if !t.z.is_zero() {
        return (Status::Infeasible, Vec::new(), t.pivots);
    }
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            if let Some(&(c, _)) = t.rows[i].iter().find(|(j, _)| *j < n) {
                t.pivot(i, c);
            } else {
                t.rows.remove(i);
                t.rhs.remove(i);
                t.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    for row in &mut t.rows {
        row.retain(|(j, _)| *j < n);
    }
    t.d = cost.to_vec();
    t.d.resize(n + m, Q::zero());
    t.z = Q::zero();
    for i in 0..t.rows.len() {
        let cb = cost[t.basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        for (j, a) in &t.rows[i] {
            t.d[*j] -= &cb * a;
        }
        t.z -= &cb * &t.rhs[i];
    }
    if !t.optimize(n) {
        return (Status::Unbounded, Vec::new(), t.pivots);
    }
    let mut x = vec![Q::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        x[b] = t.rhs[i].clone();
    }
    (Status::Optimal, x, t.pivots)
}

/// Exact two-phase primal simplex with Bland's rule, after an exact presolve
/// that fixes forced columns and substitutes out columns whose sign is
/// implied by a row. Free columns left over are split in two.
pub fn solve(lp: &Lp) -> LpOutcome {
    let n = lp.cost.len();
    let infeasible = |pivots| LpOutcome { status: Status::Infeasible, value: Q::zero(), x: Vec::new(), pivots };
    let mut pre = Presolved::new(lp);
    if !pre.run() {
        return infeasible(0);
    }
    let live: Vec<usize> = (0..n).filter(|&c| pre.gone[c].is_none()).collect();
    let mut map = vec![usize::MAX; n];
    let mut width = 0;
    for &c in &live {
        map[c] = width;
        width += if pre.nonneg[c] { 1 } else { 2 };
    }
    let mut cost = vec![Q::zero(); width];
    for &c in &live {
        cost[map[c]] = pre.cost[c].clone();
        if !pre.nonneg[c] {
            cost[map[c] + 1] = -pre.cost[c].clone();
        }
    }
    let rows: Vec<WRow> = pre
        .rows
        .iter()
        .flatten()
        .map(|row| {
            let mut terms = BTreeMap::new();
            for (c, a) in &row.terms {
                terms.insert(map[*c], a.clone());
                if !pre.nonneg[*c] {
                    terms.insert(map[*c] + 1, -a.clone());
                }
            }
            WRow { terms, rhs: row.rhs.clone() }
        })
        .collect();
    let (status, xs, pivots) = solve_standard(rows, &cost, width);
    match status {
        Status::Optimal => {
            let mut kept = vec![Q::zero(); n];
            for &c in &live {
                kept[c] = xs[map[c]].clone();
                if !pre.nonneg[c] {
                    kept[c] -= &xs[map[c] + 1];
                }
            }
            let x = pre.recover(&kept);
            let value = x.iter().zip(&lp.cost).fold(Q::zero(), |acc, (v, c)| acc + v * c);
            LpOutcome { status, value, x, pivots }
        }
        _ => LpOutcome { status, value: Q::zero(), x: Vec::new(), pivots },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> Q {
        Q::from_integer(BigInt::from(n))
    }

    fn lp(rows: &[(&[(usize, i64)], i64)], cost: &[i64], nonneg: &[bool]) -> Lp {
        Lp {
            rows: rows.iter().map(|(t, r)| (t.iter().map(|&(c, a)| (c, q(a))).collect(), q(*r))).collect(),
            cost: cost.iter().map(|&c| q(c)).collect(),
            nonneg: nonneg.to_vec(),
        }
    }

    #[test]
    fn small_optimum() {
        // min -x0 - x1, x0 + x1 + s = 4, x0 + 3 x1 + u = 6
        let p = lp(&[(&[(0, 1), (1, 1), (2, 1)], 4), (&[(0, 1), (1, 3), (3, 1)], 6)], &[-1, -2, 0, 0], &[true; 4]);
        let out = solve(&p);
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.value, q(-5));
        assert_eq!(out.x[..2], [q(3), q(1)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(&[(&[(0, 1), (1, 1)], -1)], &[0, 0], &[true, true]);
        assert_eq!(solve(&p).status, Status::Infeasible);
        let p = lp(&[(&[(0, 1), (1, -1)], 1)], &[0, -1], &[true, true]);
        assert_eq!(solve(&p).status, Status::Unbounded);
        let p = lp(&[(&[], 1)], &[], &[]);
        assert_eq!(solve(&p).status, Status::Infeasible);
    }

    #[test]
    fn free_columns() {
        // min y, y - x0 = 0, x0 + x1 = 1, x0 - x2 = 0 with x2 kept through a second row
        let p = lp(&[(&[(0, 1), (1, -1)], 0), (&[(1, 1), (2, 1)], 1)], &[-1, 0, 0], &[false, true, true]);
        let out = solve(&p);
        assert_eq!(out.value, q(-1));
        assert_eq!(out.x, vec![q(1), q(1), q(0)]);
        // A free column in two rows has to be split.
        let p = lp(&[(&[(0, 1), (1, 1)], 2), (&[(0, 1), (1, -1)], 0)], &[0, 1], &[false, true]);
        let out = solve(&p);
        assert_eq!(out.x, vec![q(1), q(1)]);
    }

    #[test]
    fn degenerate_cycle_example_terminates() {
        // Beale's example in equality form.
        let r = |a: i64, b: i64| Q::new(BigInt::from(a), BigInt::from(b));
        let p = Lp {
            rows: vec![
                (vec![(0, r(1, 4)), (1, q(-60)), (2, r(-1, 25)), (3, q(9)), (4, q(1))], q(0)),
                (vec![(0, r(1, 2)), (1, q(-90)), (2, r(-1, 50)), (3, q(3)), (5, q(1))], q(0)),
                (vec![(2, q(1)), (6, q(1))], q(1)),
            ],
            cost: vec![r(-3, 4), q(150), r(-1, 50), q(6), q(0), q(0), q(0)],
            nonneg: vec![true; 7],
        };
        let out = solve(&p);
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.value, r(-1, 20));
    }
}
