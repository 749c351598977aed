use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::OracleError;
use crate::polytope::SparseSystem;

/// Default cap on search nodes.
pub const DEFAULT_POINT_BUDGET: u64 = 50_000_000;

type IntRow = (Vec<(usize, i64)>, i64);

struct Search {
    rows: Vec<IntRow>,
    by_col: Vec<Vec<(usize, i64)>>,
    val: Vec<i8>,
    sum: Vec<i64>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    trail: Vec<usize>,
}

impl Search {
    fn set(&mut self, c: usize, v: i8) {
        self.val[c] = v;
        self.trail.push(c);
        for &(r, a) in &self.by_col[c] {
            self.sum[r] += a * v as i64;
            if a > 0 {
                self.hi[r] -= a;
            } else {
                self.lo[r] -= a;
            }
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let c = self.trail.pop().expect("trail entry");
            let v = self.val[c] as i64;
            self.val[c] = -1;
            for &(r, a) in &self.by_col[c] {
                self.sum[r] -= a * v;
                if a > 0 {
                    self.hi[r] += a;
                } else {
                    self.lo[r] += a;
                }
            }
        }
    }

    /// Bound propagation from the rows of `c`; false on a conflict.
    fn propagate(&mut self, start: usize) -> bool {
        let mut queue = vec![start];
        while let Some(c) = queue.pop() {
            for k in 0..self.by_col[c].len() {
                let r = self.by_col[c][k].0;
                let need = self.rows[r].1 - self.sum[r];
                if need < self.lo[r] || need > self.hi[r] {
                    return false;
                }
                for j in 0..self.rows[r].0.len() {
                    let (x, a) = self.rows[r].0[j];
                    if self.val[x] >= 0 {
                        continue;
                    }
                    let need = self.rows[r].1 - self.sum[r];
                    let (lo, hi) = (self.lo[r], self.hi[r]);
                    // Range of the rest of the row for x = 0 and x = 1.
                    let (lo0, hi0) = if a > 0 { (lo, hi - a) } else { (lo - a, hi) };
                    let (lo1, hi1) = (lo0 + a, hi0 + a);
                    let ok0 = lo0 <= need && need <= hi0;
                    let ok1 = lo1 <= need && need <= hi1;
                    match (ok0, ok1) {
                        (false, false) => return false,
                        (true, false) => self.set(x, 0),
                        (false, true) => self.set(x, 1),
                        (true, true) => continue,
                    }
                    queue.push(x);
                }
            }
        }
        true
    }
}

fn integer_rows(sys: &SparseSystem) -> Result<Vec<IntRow>, OracleError> {
    let too_big = || OracleError::BudgetExceeded("coefficient out of range".into());
    sys.rows()
        .iter()
        .map(|row| {
            let l = row.terms.iter().fold(row.rhs.denom().clone(), |l, (_, a)| l.lcm(a.denom()));
            let scale = |q: &num_rational::BigRational| -> Result<i64, OracleError> {
                let v: BigInt = (q * num_rational::BigRational::from_integer(l.clone())).to_integer();
                v.to_i64().filter(|x| x.abs() < 1 << 40).ok_or_else(too_big)
            };
            let terms = row.terms.iter().map(|(c, a)| Ok((*c, scale(a)?))).collect::<Result<Vec<_>, _>>()?;
            debug_assert!(l >= BigInt::one());
            Ok((terms, scale(&row.rhs)?))
        })
        .collect()
}

/// Column order for the search: a system built over a decomposition is
/// walked from the root down, each node's `t` block before its `f` block,
/// projection columns right after their node.
fn column_order(sys: &SparseSystem) -> Vec<usize> {
    let n = sys.num_cols();
    let Some(root) = sys.root() else { return (0..n).collect() };
    let glue = sys.glue();
    let mut ys: Vec<Vec<usize>> = vec![Vec::new(); glue.len()];
    for &(y, b, _) in sys.projection() {
        ys[b].push(y);
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    while let Some(b) = stack.pop() {
        for c in glue[b].t_cols.clone().chain(glue[b].f_cols.clone()).chain(ys[b].iter().copied()) {
            if !seen[c] {
                seen[c] = true;
                order.push(c);
            }
        }
        stack.extend(glue[b].children.iter().rev());
    }
    order.extend((0..n).filter(|&c| !seen[c]));
    order
}

/// Every 0/1 vector satisfying all rows, sorted. `budget` caps the search
/// nodes.
pub fn integer_points(sys: &SparseSystem, budget: u64) -> Result<Vec<Vec<i64>>, OracleError> {
    let rows = integer_rows(sys)?;
    let n = sys.num_cols();
    let mut by_col = vec![Vec::new(); n];
    let mut lo = vec![0; rows.len()];
    let mut hi = vec![0; rows.len()];
    for (r, (terms, _)) in rows.iter().enumerate() {
        for &(c, a) in terms {
            by_col[c].push((r, a));
            if a > 0 {
                hi[r] += a;
            } else {
                lo[r] += a;
            }
        }
    }
    let mut s = Search { sum: vec![0; rows.len()], rows, by_col, val: vec![-1; n], lo, hi, trail: Vec::new() };
    if s.rows.iter().enumerate().any(|(r, (_, rhs))| *rhs < s.lo[r] || *rhs > s.hi[r]) {
        return Ok(Vec::new());
    }
    if !(0..n).all(|c| s.propagate(c)) {
        return Ok(Vec::new());
    }
    let order = column_order(sys);
    let mut out = Vec::new();
    let mut nodes = 0u64;
    // Explicit stack of (depth in order, trail mark, value to try).
    let mut stack: Vec<(usize, usize, i8)> = vec![(0, s.trail.len(), 0)];
    while let Some((d, mark, v)) = stack.pop() {
        s.undo(mark);
        let mut d = d;
        while d < n && s.val[order[d]] >= 0 {
            d += 1;
        }
        if v == 0 && d == n {
            out.push(s.val.iter().map(|&x| x as i64).collect());
            continue;
        }
        if v > 1 || d == n {
            continue;
        }
        nodes += 1;
        if nodes > budget {
            return Err(OracleError::BudgetExceeded(format!("{budget} search nodes")));
        }
        stack.push((d, mark, v + 1));
        let c = order[d];
        s.set(c, v);
        if s.propagate(c) {
            stack.push((d, s.trail.len(), 0));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}
