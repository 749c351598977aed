//! Plain-text graph and decomposition files.
//!
//! Graph files are DIMACS-like: `c` comments, one `p edge <n> <m>` line and
//! `m` lines `e <u> <v>` with `1 <= u < v <= n`. Decomposition files follow
//! the `s td <#bags> <width+1> <n>` / `b <id> <elem>*` / `<id> <id>` layout.

use std::collections::BTreeSet;

use super::{Elem, Graph, TreeDecomposition};
use crate::error::SyntaxError;

fn err(line: usize, col: usize, expected: impl Into<String>) -> SyntaxError {
    SyntaxError { line, col, expected: expected.into() }
}

fn number<T: std::str::FromStr>(tok: Option<(usize, &str)>, line: usize, what: &str) -> Result<T, SyntaxError> {
    match tok {
        Some((col, t)) => t.parse().map_err(|_| err(line, col, what)),
        None => Err(err(line, 0, what)),
    }
}

/// Splits a line into (1-based column, token) pairs.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |t| (t.as_ptr() as usize - line.as_ptr() as usize + 1, t))
}

pub fn parse_dimacs(text: &str) -> Result<Graph, SyntaxError> {
    let mut header: Option<(u32, usize)> = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut toks = tokens(raw);
        let Some((col, first)) = toks.next() else { continue };
        match first {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(err(line, col, "a single problem line"));
                }
                match toks.next() {
                    Some((_, "edge")) => {}
                    Some((c, _)) => return Err(err(line, c, "`edge`")),
                    None => return Err(err(line, 0, "`edge`")),
                }
                let n = number(toks.next(), line, "vertex count")?;
                let m = number(toks.next(), line, "edge count")?;
                header = Some((n, m));
            }
            "e" => {
                let Some((n, _)) = header else {
                    return Err(err(line, col, "problem line before edges"));
                };
                let (ut, vt) = (toks.next(), toks.next());
                let u: u32 = number(ut, line, "edge endpoint")?;
                let v: u32 = number(vt, line, "edge endpoint")?;
                let (ucol, vcol) = (ut.map_or(0, |t| t.0), vt.map_or(0, |t| t.0));
                if u == 0 || u > n {
                    return Err(err(line, ucol, format!("vertex in 1..={n}")));
                }
                if v == 0 || v > n || v == u {
                    return Err(err(line, vcol, format!("distinct vertex in 1..={n}")));
                }
                edges.push((u, v));
            }
            _ => return Err(err(line, col, "`c`, `p` or `e`")),
        }
        if let Some((c, _)) = toks.next() {
            return Err(err(line, c, "end of line"));
        }
    }
    let (n, m) = header.ok_or_else(|| err(text.lines().count() + 1, 0, "problem line `p edge <n> <m>`"))?;
    if edges.len() != m {
        return Err(err(text.lines().count() + 1, 0, format!("{m} edge lines, found {}", edges.len())));
    }
    Graph::new(1..=n, edges).map_err(|e| err(0, 0, e.to_string()))
}

/// Parses a decomposition file. The bag with the smallest id becomes the root.
pub fn parse_td_file(text: &str) -> Result<TreeDecomposition, SyntaxError> {
    let mut header: Option<usize> = None;
    let mut bags: Vec<Option<BTreeSet<Elem>>> = Vec::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut toks = tokens(raw).peekable();
        let Some(&(col, first)) = toks.peek() else { continue };
        match first {
            "c" => continue,
            "s" => {
                toks.next();
                match toks.next() {
                    Some((_, "td")) => {}
                    Some((c, _)) => return Err(err(line, c, "`td`")),
                    None => return Err(err(line, 0, "`td`")),
                }
                let nb: usize = number(toks.next(), line, "bag count")?;
                let _width: usize = number(toks.next(), line, "largest bag size")?;
                let _n: usize = number(toks.next(), line, "vertex count")?;
                header = Some(nb);
                bags = vec![None; nb];
            }
            "b" => {
                toks.next();
                let nb = header.ok_or_else(|| err(line, col, "solution line before bags"))?;
                let id: usize = number(toks.next(), line, "bag id")?;
                if id == 0 || id > nb {
                    return Err(err(line, col + 2, format!("bag id in 1..={nb}")));
                }
                let mut bag = BTreeSet::new();
                for tok in toks.by_ref() {
                    bag.insert(number(Some(tok), line, "vertex id")?);
                }
                bags[id - 1] = Some(bag);
            }
            _ => {
                let nb = header.ok_or_else(|| err(line, col, "solution line before edges"))?;
                let a: usize = number(toks.next(), line, "bag id")?;
                let b: usize = number(toks.next(), line, "bag id")?;
                if a == 0 || b == 0 || a > nb || b > nb {
                    return Err(err(line, col, format!("bag ids in 1..={nb}")));
                }
                edges.push((a - 1, b - 1));
            }
        }
        if let Some((c, _)) = toks.next() {
            return Err(err(line, c, "end of line"));
        }
    }
    let end = text.lines().count() + 1;
    header.ok_or_else(|| err(end, 0, "solution line `s td ...`"))?;
    let bags: Vec<BTreeSet<Elem>> = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| err(end, 0, format!("bag {}", i + 1))))
        .collect::<Result<_, _>>()?;
    TreeDecomposition::from_edges(bags, &edges, 0).map_err(|e| err(end, 0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_path() {
        let g = parse_dimacs("c path\np edge 3 2\ne 1 2\ne 2 3\n").unwrap();
        assert_eq!(g, Graph::path(3));
    }

    #[test]
    fn dimacs_errors() {
        let e = parse_dimacs("p edge 3 1\ne 1 x\n").unwrap_err();
        assert_eq!((e.line, e.col), (2, 5));
        assert!(parse_dimacs("p edge 3 2\ne 1 2\n").is_err());
        assert!(parse_dimacs("e 1 2\n").is_err());
        assert!(parse_dimacs("p edge 2 1\ne 1 3\n").is_err());
        assert!(parse_dimacs("q\n").is_err());
    }

    #[test]
    fn td_file() {
        let td = parse_td_file("c x\ns td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n").unwrap();
        assert_eq!(td.len(), 2);
        assert_eq!(td.root(), 0);
        assert_eq!(td.width(), 1);
        assert!(parse_td_file("s td 2 2 3\nb 1 1 2\n").is_err());
        assert!(parse_td_file("s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 3\n").is_err());
    }
}
