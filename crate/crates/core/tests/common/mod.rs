#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use msopoly::logic::{desugar, parse_formula, CoreFormula};
use msopoly::structures::{Elem, ElemKind, Graph, Structure};
use msopoly::types::{signature, TypeSignature};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn core(text: &str) -> CoreFormula {
    desugar(&parse_formula(text).unwrap())
}

pub fn paw() -> Graph {
    Graph::new(1..=4, [(1, 2), (2, 3), (1, 3), (3, 4)]).unwrap()
}

/// The graphs of the shipped corpus.
pub fn corpus_graphs() -> Vec<(&'static str, Graph)> {
    vec![
        ("P2", Graph::path(2)),
        ("P3", Graph::path(3)),
        ("P4", Graph::path(4)),
        ("K3", Graph::complete(3)),
        ("K4", Graph::complete(4)),
        ("S3", Graph::star(3)),
        ("C4", Graph::cycle(4)),
        ("paw", paw()),
    ]
}

pub fn corpus_formulas() -> Vec<(&'static str, &'static str)> {
    use msopoly::logic::{ALL_VERTICES, DOMINATING_SET, FALSE, INDEPENDENT_SET, VERTEX_COVER};
    vec![("IS", INDEPENDENT_SET), ("VC", VERTEX_COVER), ("DS", DOMINATING_SET), ("X=V", ALL_VERTICES), ("false", FALSE)]
}

fn random_subset(rng: &mut Rng8, n: usize, p: f64) -> Vec<usize> {
    (0..n).filter(|_| rng.gen_bool(p)).collect()
}

/// Adds a random element at a random boundary position.
pub fn random_intro(rng: &mut Rng8, s: &Structure) -> Structure {
    let len = s.boundary().len();
    let pos = rng.gen_range(0..=len);
    let adj = random_subset(rng, len, 0.4);
    let kind = if rng.gen_bool(0.5) { ElemKind::Vertex } else { ElemKind::Edge };
    let colors = random_subset(rng, s.num_colors(), 0.4);
    s.introduce_extend(pos, &adj, kind, &colors, usize::MAX).unwrap()
}

/// A structure grown by random introduce and forget steps, with at most
/// `max` elements and at most `width` boundary positions.
pub fn random_structure(rng: &mut Rng8, m: usize, max: usize, width: usize) -> Structure {
    let mut s = Structure::empty(m);
    let steps = rng.gen_range(0..=max);
    while s.len() < steps {
        let len = s.boundary().len();
        if len > 0 && (len >= width || rng.gen_bool(0.3)) {
            s = s.drop_boundary_at(rng.gen_range(0..len)).unwrap();
        } else {
            s = random_intro(rng, &s);
        }
    }
    s
}

/// A structure compatible with `s`: its boundary plus a few private
/// elements attached to it.
pub fn random_partner(rng: &mut Rng8, s: &Structure, extra: usize) -> Structure {
    let keep: BTreeSet<Elem> = s.boundary().iter().copied().collect();
    let mut t = s.induced(&keep);
    let len = t.boundary().len();
    let k = rng.gen_range(0..=extra);
    for _ in 0..k {
        let adj = random_subset(rng, t.boundary().len(), 0.4);
        let kind = if rng.gen_bool(0.5) { ElemKind::Vertex } else { ElemKind::Edge };
        let colors = random_subset(rng, t.num_colors(), 0.4);
        let at = t.boundary().len();
        t = t.introduce_extend(at, &adj, kind, &colors, usize::MAX).unwrap();
    }
    while t.boundary().len() > len {
        t = t.drop_boundary_at(len).unwrap();
    }
    t
}

/// `s`'s boundary plus `copies` identical private elements.
pub fn with_copies(s: &Structure, adj: &[usize], kind: ElemKind, colors: &[usize], copies: usize) -> Structure {
    let keep: BTreeSet<Elem> = s.boundary().iter().copied().collect();
    let mut t = s.induced(&keep);
    let len = t.boundary().len();
    for _ in 0..copies {
        t = t.introduce_extend(len, adj, kind, colors, usize::MAX).unwrap();
        t = t.drop_boundary_at(len).unwrap();
    }
    t
}

/// Same structure with the non-boundary elements renumbered.
pub fn relabel(rng: &mut Rng8, s: &Structure) -> Structure {
    let base = s.max_elem().map_or(0, |e| e + 1) + 10;
    let mut ids: Vec<Elem> = (0..s.len() as Elem).map(|i| base + i).collect();
    ids.shuffle(rng);
    let map: std::collections::BTreeMap<Elem, Elem> = s.universe().iter().copied().zip(ids).collect();
    let elems = s.kinds().map(|(e, k)| (map[&e], k));
    let inc = s.inc_pairs().iter().map(|&(a, b)| (map[&a], map[&b]));
    let colors = s.colors().iter().map(|c| c.iter().map(|e| map[e]).collect()).collect();
    let boundary = s.boundary().iter().map(|e| map[e]).collect();
    Structure::from_parts(elems, inc, colors, boundary).unwrap()
}

/// Random formula text over free variables `X0..` with quantifier nesting
/// at most `depth`.
pub fn random_formula(rng: &mut Rng8, m: usize, depth: usize) -> String {
    let free: Vec<String> = (0..m).map(|i| format!("X{i}")).collect();
    let body = gen(rng, &mut free.clone(), depth, 3);
    format!("(free {}) {}", free.join(" "), body)
}

fn gen(rng: &mut Rng8, scope: &mut Vec<String>, depth: usize, size: usize) -> String {
    let pick = |rng: &mut Rng8, scope: &Vec<String>| scope.choose(rng).unwrap().clone();
    let choice = if size == 0 { 0 } else { rng.gen_range(0..10) };
    match choice {
        0..=3 => {
            let a = pick(rng, scope);
            let b = pick(rng, scope);
            match rng.gen_range(0..5) {
                0 => format!("(sub {a} {b})"),
                1 => format!("(sing {a})"),
                2 => format!("(inc {a} {b})"),
                3 => format!("(isV {a})"),
                _ => format!("(isE {a})"),
            }
        }
        4 => format!("(not {})", gen(rng, scope, depth, size - 1)),
        5 | 6 => {
            let op = ["and", "or", "imp", "iff"][rng.gen_range(0..4)];
            format!("({op} {} {})", gen(rng, scope, depth, size - 1), gen(rng, scope, depth, size - 1))
        }
        _ if depth > 0 => {
            let name = format!("Q{}", scope.len());
            let q = if rng.gen_bool(0.5) { "existsSet" } else { "forallSet" };
            scope.push(name.clone());
            let body = gen(rng, scope, depth - 1, size);
            scope.pop();
            format!("({q} {name} {body})")
        }
        _ => format!("(not {})", gen(rng, scope, depth, size - 1)),
    }
}

/// Two structures with equal rank-`k` signatures, preferring distinct ones:
/// partners of a common boundary bucketed by signature.
pub fn equal_pair(rng: &mut Rng8, seed: &Structure, k: usize) -> (Structure, Structure) {
    let mut buckets: BTreeMap<TypeSignature, Vec<Structure>> = BTreeMap::new();
    let len = seed.boundary().len();
    let adj: Vec<usize> = (0..len).filter(|_| rng.gen_bool(0.5)).collect();
    let colors: Vec<usize> = (0..seed.num_colors()).filter(|_| rng.gen_bool(0.5)).collect();
    let kind = if rng.gen_bool(0.5) { ElemKind::Vertex } else { ElemKind::Edge };
    let candidates = (1..=4)
        .map(|c| with_copies(seed, &adj, kind, &colors, c))
        .chain((0..4).map(|_| random_partner(rng, seed, 2)))
        .collect::<Vec<_>>();
    for t in candidates {
        buckets.entry(signature(&t, k).unwrap()).or_default().push(t);
    }
    for group in buckets.values() {
        if let Some(other) = group.iter().skip(1).find(|t| t.len() != group[0].len()) {
            return (group[0].clone(), other.clone());
        }
    }
    let one = buckets.into_values().next().unwrap().remove(0);
    let copy = relabel(rng, &one);
    (one, copy)
}

pub fn seed_structure(rng: &mut Rng8) -> (Structure, usize) {
    let m = rng.gen_range(0..=2);
    let k = rng.gen_range(0..=2);
    let mut s = random_structure(rng, m, 3, 2);
    if s.boundary().is_empty() {
        s = random_intro(rng, &s);
    }
    (s, k)
}
