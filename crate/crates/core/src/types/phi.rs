//! Types specialised to one formula.
//!
//! A state summarises a boundaried colored structure by what the formula can
//! still observe about it. For every variable it keeps the boundary
//! positions inside the set, how many elements lie off the boundary (capped),
//! whether those include vertices or edges, and one flag per atom the
//! formula applies to the variable and an earlier one. Each quantifier holds
//! the summaries of all extensions of its variable, minus those that can no
//! longer matter, or a constant once the quantifier is settled for every
//! larger structure. The same summary is reached by stepping through
//! introduce, forget and join and by computing it on the structure directly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TypeError;
use crate::logic::{subsets, Core, CoreFormula};
use crate::structures::{BitView, ElemKind, Structure};

const FWD: u8 = 1;
const BACK: u8 = 2;
const INC: u8 = 4;

/// Longest boundary a state can describe.
pub const MAX_BOUNDARY: usize = 32;

/// What the summary of one variable records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarInfo {
    pub slot: usize,
    /// Earlier slots sharing an atom with this one: bit 1 for `sub s t`,
    /// 2 for `sub t s`, 4 for `inc`.
    pub pairs: Vec<(usize, u8)>,
    pub self_inc: bool,
    /// Off-boundary elements are counted up to this.
    pub cap: u8,
    pub vertex: bool,
    pub edge: bool,
}

impl VarInfo {
    fn pair(&self, t: usize) -> usize {
        self.pairs.iter().position(|p| p.0 == t).expect("atom was planned")
    }

    fn note(&mut self, other: usize, bit: u8) {
        match self.pairs.iter_mut().find(|p| p.0 == other) {
            Some(p) => p.1 |= bit,
            None => self.pairs.push((other, bit)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Level {
    pub var: VarInfo,
    pub exists: bool,
    pub body: Core,
    pub children: Vec<Level>,
}

/// The quantifier tree of a formula with the atoms each variable needs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Plan {
    formula: CoreFormula,
    free: Vec<VarInfo>,
    levels: Vec<Level>,
}

impl Plan {
    pub fn new(f: &CoreFormula) -> Self {
        let mut plan = Self {
            formula: f.clone(),
            free: (0..f.arity()).map(|slot| VarInfo { slot, ..VarInfo::default() }).collect(),
            levels: Vec::new(),
        };
        let mut open = Vec::new();
        plan.walk(f.body(), &mut open);
        for v in &mut plan.free {
            v.pairs.sort_unstable();
        }
        fn sort(ls: &mut [Level]) {
            for l in ls {
                l.var.pairs.sort_unstable();
                sort(&mut l.children);
            }
        }
        sort(&mut plan.levels);
        plan
    }

    pub fn formula(&self) -> &CoreFormula {
        &self.formula
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn free(&self) -> &[VarInfo] {
        &self.free
    }

    fn slots(&self) -> usize {
        self.formula.arity() + self.formula.qr()
    }

    fn level_mut(&mut self, path: &[usize]) -> &mut Level {
        let mut l = &mut self.levels[path[0]];
        for &i in &path[1..] {
            l = &mut l.children[i];
        }
        l
    }

    fn info_mut(&mut self, open: &[(usize, Vec<usize>)], slot: usize) -> &mut VarInfo {
        if slot < self.free.len() {
            return &mut self.free[slot];
        }
        let path = open.iter().rev().find(|(s, _)| *s == slot).map(|(_, p)| p.clone()).expect("bound slot");
        &mut self.level_mut(&path).var
    }

    fn walk(&mut self, f: &Core, open: &mut Vec<(usize, Vec<usize>)>) {
        match f {
            Core::True | Core::False => {}
            Core::Sing(x) => self.info_mut(open, *x).cap = 2,
            Core::IsV(x) => {
                let s = self.info_mut(open, *x);
                s.cap = s.cap.max(1);
                s.edge = true;
            }
            Core::IsE(x) => {
                let s = self.info_mut(open, *x);
                s.cap = s.cap.max(1);
                s.vertex = true;
            }
            Core::Sub(a, b) if a == b => {}
            Core::Sub(a, b) => {
                let (hi, lo) = (*a.max(b), *a.min(b));
                self.info_mut(open, hi).note(lo, if hi == *a { FWD } else { BACK });
            }
            Core::Inc(a, b) if a == b => self.info_mut(open, *a).self_inc = true,
            Core::Inc(a, b) => {
                let (hi, lo) = (*a.max(b), *a.min(b));
                self.info_mut(open, hi).note(lo, INC);
            }
            Core::Not(g) => self.walk(g, open),
            Core::And(gs) | Core::Or(gs) => gs.iter().for_each(|g| self.walk(g, open)),
            Core::Imp(a, b) | Core::Iff(a, b) => {
                self.walk(a, open);
                self.walk(b, open);
            }
            Core::Exists(slot, g) | Core::Forall(slot, g) => {
                let level = Level {
                    var: VarInfo { slot: *slot, ..VarInfo::default() },
                    exists: matches!(f, Core::Exists(..)),
                    body: (**g).clone(),
                    children: Vec::new(),
                };
                let path = match open.last() {
                    None => {
                        self.levels.push(level);
                        vec![self.levels.len() - 1]
                    }
                    Some((_, parent)) => {
                        let parent = parent.clone();
                        let p = self.level_mut(&parent);
                        p.children.push(level);
                        let mut path = parent;
                        path.push(p.children.len() - 1);
                        path
                    }
                };
                open.push((*slot, path));
                self.walk(g, open);
                open.pop();
            }
        }
    }
}

/// Summary of one set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    /// Boundary positions in the set.
    pub mask: u32,
    /// Elements off the boundary, capped.
    pub count: u8,
    pub vertex: bool,
    pub edge: bool,
    /// Bit 0: `inc` with itself. Then three bits per planned pair: `sub`
    /// fails, the reverse `sub` fails, `inc` holds.
    pub flags: u64,
}

impl Var {
    fn total(&self) -> u32 {
        self.count as u32 + self.mask.count_ones()
    }

    fn has_edge(&self, kinds: u32) -> bool {
        self.edge || self.mask & kinds != 0
    }

    fn has_vertex(&self, kinds: u32) -> bool {
        self.vertex || self.mask & !kinds != 0
    }

    fn flag(&self, pair: usize, bit: u8) -> bool {
        self.flags >> (1 + 3 * pair) & bit as u64 != 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub var: Var,
    pub parts: Vec<Part>,
}

/// The extensions of one quantifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Part {
    Const(bool),
    Set(Vec<Entry>),
}

/// Formula-directed type of a boundaried colored structure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhiState {
    pub len: usize,
    /// Boundary positions holding edge elements.
    pub kinds: u32,
    /// Incidences among boundary positions, one mask per position.
    pub adj: Vec<u32>,
    pub free: Vec<Var>,
    pub parts: Vec<Part>,
}

fn insert_bit(mask: u32, pos: usize, bit: bool) -> u32 {
    let low = mask & ((1u32 << pos) - 1);
    let high = (mask >> pos) << (pos + 1);
    low | high | (bit as u32) << pos
}

fn remove_bit(mask: u32, d: usize) -> u32 {
    let low = mask & ((1u32 << d) - 1);
    let high = mask.checked_shr(d as u32 + 1).unwrap_or(0) << d;
    low | high
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Decides,
    Irrelevant,
    Open,
}

/// Three-valued reading of a level's body for one extension. With `exact`
/// the variable is held at its current value, otherwise it may still grow.
fn kleene(f: &Core, info: &VarInfo, e: &Entry, kinds: u32, exact: bool, q: &mut usize) -> Option<bool> {
    let s = info.slot;
    let v = &e.var;
    let only = |known: bool, value: bool| known.then_some(value);
    match f {
        Core::True => Some(true),
        Core::False => Some(false),
        Core::Not(g) => kleene(g, info, e, kinds, exact, q).map(|b| !b),
        Core::And(gs) | Core::Or(gs) => {
            let unit = matches!(f, Core::And(_));
            let mut acc = Some(unit);
            for g in gs {
                match kleene(g, info, e, kinds, exact, q) {
                    Some(b) if b != unit => acc = Some(b),
                    None if acc == Some(unit) => acc = None,
                    _ => {}
                }
            }
            acc
        }
        Core::Imp(a, b) => {
            let (a, b) = (kleene(a, info, e, kinds, exact, q), kleene(b, info, e, kinds, exact, q));
            match (a, b) {
                (Some(false), _) | (_, Some(true)) => Some(true),
                (Some(true), Some(false)) => Some(false),
                _ => None,
            }
        }
        Core::Iff(a, b) => {
            let (a, b) = (kleene(a, info, e, kinds, exact, q), kleene(b, info, e, kinds, exact, q));
            Some(a? == b?)
        }
        Core::Exists(..) | Core::Forall(..) => {
            let part = &e.parts[*q];
            *q += 1;
            match part {
                Part::Const(b) => Some(*b),
                Part::Set(_) => None,
            }
        }
        Core::Sing(x) if *x == s => {
            if exact {
                Some(v.total() == 1)
            } else {
                only(v.total() >= 2, false)
            }
        }
        Core::IsV(x) if *x == s => {
            if exact {
                Some(v.total() >= 1 && !v.has_edge(kinds))
            } else {
                only(v.has_edge(kinds), false)
            }
        }
        Core::IsE(x) if *x == s => {
            if exact {
                Some(v.total() >= 1 && !v.has_vertex(kinds))
            } else {
                only(v.has_vertex(kinds), false)
            }
        }
        Core::Sub(a, b) if a == b => Some(true),
        Core::Sub(a, t) if *a == s => {
            let fails = v.flag(info.pair(*t), FWD);
            if exact {
                Some(!fails)
            } else {
                only(fails, false)
            }
        }
        Core::Sub(t, b) if *b == s => only(v.flag(info.pair(*t), BACK), false),
        Core::Inc(a, b) if *a == s && *b == s => {
            if exact {
                Some(v.flags & 1 == 1)
            } else {
                only(v.flags & 1 == 1, true)
            }
        }
        Core::Inc(a, t) | Core::Inc(t, a) if *a == s => {
            if v.flag(info.pair(*t), INC) {
                Some(true)
            } else {
                only(exact && v.mask == 0, false)
            }
        }
        _ => None,
    }
}

fn judge(level: &Level, e: &Entry, kinds: u32) -> Verdict {
    if kleene(&level.body, &level.var, e, kinds, true, &mut 0) == Some(level.exists) {
        return Verdict::Decides;
    }
    match kleene(&level.body, &level.var, e, kinds, false, &mut 0) {
        Some(b) if b != level.exists => Verdict::Irrelevant,
        _ => Verdict::Open,
    }
}

fn reduce(entries: Vec<Entry>, level: &Level, kinds: u32) -> Part {
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        match judge(level, &e, kinds) {
            Verdict::Decides => return Part::Const(level.exists),
            Verdict::Irrelevant => {}
            Verdict::Open => out.push(e),
        }
    }
    if out.is_empty() {
        return Part::Const(!level.exists);
    }
    out.sort_unstable();
    out.dedup();
    Part::Set(out)
}

/// Old masks and memberships of the new element for every slot in scope.
struct Intro {
    pos: usize,
    adj: u32,
    masks: Vec<u32>,
    bits: u64,
}

fn intro_var(v: &Var, info: &VarInfo, me: bool, cx: &Intro) -> Var {
    let mut flags = v.flags;
    if info.self_inc && me && cx.adj & v.mask != 0 {
        flags |= 1;
    }
    for (j, &(t, used)) in info.pairs.iter().enumerate() {
        let theirs = cx.bits >> t & 1 == 1;
        let mut set = 0;
        if used & FWD != 0 && me && !theirs {
            set |= FWD;
        }
        if used & BACK != 0 && theirs && !me {
            set |= BACK;
        }
        if used & INC != 0 && ((me && cx.adj & cx.masks[t] != 0) || (theirs && cx.adj & v.mask != 0)) {
            set |= INC;
        }
        flags |= (set as u64) << (1 + 3 * j);
    }
    Var { mask: insert_bit(v.mask, cx.pos, me), flags, ..*v }
}

fn intro_part(p: &Part, level: &Level, cx: &mut Intro, kinds: u32) -> Part {
    let Part::Set(es) = p else { return p.clone() };
    let slot = level.var.slot;
    let mut out = Vec::with_capacity(2 * es.len());
    for e in es {
        for me in [false, true] {
            let var = intro_var(&e.var, &level.var, me, cx);
            cx.masks[slot] = e.var.mask;
            cx.bits = cx.bits & !(1 << slot) | (me as u64) << slot;
            let parts = level.children.iter().zip(&e.parts).map(|(l, p)| intro_part(p, l, cx, kinds)).collect();
            out.push(Entry { var, parts });
        }
    }
    cx.bits &= !(1 << slot);
    reduce(out, level, kinds)
}

fn forget_var(v: &Var, info: &VarInfo, d: usize, kinds: u32) -> Var {
    let mut out = *v;
    if v.mask >> d & 1 == 1 {
        out.count = (v.count + 1).min(info.cap);
        if kinds >> d & 1 == 1 {
            out.edge |= info.edge;
        } else {
            out.vertex |= info.vertex;
        }
    }
    out.mask = remove_bit(v.mask, d);
    out
}

fn forget_part(p: &Part, level: &Level, d: usize, old: u32, new: u32) -> Part {
    let Part::Set(es) = p else { return p.clone() };
    let out = es
        .iter()
        .map(|e| Entry {
            var: forget_var(&e.var, &level.var, d, old),
            parts: level.children.iter().zip(&e.parts).map(|(l, p)| forget_part(p, l, d, old, new)).collect(),
        })
        .collect();
    reduce(out, level, new)
}

fn join_var(a: &Var, b: &Var, info: &VarInfo) -> Var {
    Var {
        mask: a.mask,
        count: (a.count + b.count).min(info.cap),
        vertex: a.vertex | b.vertex,
        edge: a.edge | b.edge,
        flags: a.flags | b.flags,
    }
}

fn join_part(p: &Part, q: &Part, level: &Level, kinds: u32) -> Part {
    let (a, b) = match (p, q) {
        (Part::Const(x), _) | (_, Part::Const(x)) if *x == level.exists => return Part::Const(*x),
        (Part::Const(x), _) | (_, Part::Const(x)) => return Part::Const(*x),
        (Part::Set(a), Part::Set(b)) => (a, b),
    };
    let mut by_mask: BTreeMap<u32, Vec<&Entry>> = BTreeMap::new();
    for e in b {
        by_mask.entry(e.var.mask).or_default().push(e);
    }
    let mut out = Vec::new();
    for x in a {
        for y in by_mask.get(&x.var.mask).into_iter().flatten() {
            out.push(Entry {
                var: join_var(&x.var, &y.var, &level.var),
                parts: level
                    .children
                    .iter()
                    .zip(x.parts.iter().zip(&y.parts))
                    .map(|(l, (p, q))| join_part(p, q, l, kinds))
                    .collect(),
            });
        }
    }
    reduce(out, level, kinds)
}

/// Direct computation on a structure.
struct Direct<'a> {
    view: &'a BitView,
    /// Universe bit of each boundary position.
    bpos: Vec<u64>,
    on_boundary: u64,
    kinds: u32,
}

impl Direct<'_> {
    fn summarize(&self, x: u64, info: &VarInfo, env: &[u64]) -> Var {
        let mask = self.bpos.iter().enumerate().filter(|(_, &b)| x & b != 0).fold(0u32, |m, (p, _)| m | 1 << p);
        let off = x & !self.on_boundary;
        let mut flags = (info.self_inc && self.view.inc(x, x)) as u64;
        for (j, &(t, used)) in info.pairs.iter().enumerate() {
            let y = env[t];
            let mut set = 0;
            if used & FWD != 0 && x & !y != 0 {
                set |= FWD;
            }
            if used & BACK != 0 && y & !x != 0 {
                set |= BACK;
            }
            if used & INC != 0 && self.view.inc(x, y) {
                set |= INC;
            }
            flags |= (set as u64) << (1 + 3 * j);
        }
        Var {
            mask,
            count: (off.count_ones().min(info.cap as u32)) as u8,
            vertex: info.vertex && off & self.view.vertices() != 0,
            edge: info.edge && off & self.view.edges() != 0,
            flags,
        }
    }

    fn entry(&self, level: &Level, env: &mut [u64], x: u64) -> Entry {
        env[level.var.slot] = x;
        let var = self.summarize(x, &level.var, env);
        let parts = level.children.iter().map(|l| self.part(l, env)).collect();
        Entry { var, parts }
    }

    fn part(&self, level: &Level, env: &mut [u64]) -> Part {
        let mut out = Vec::new();
        for x in subsets(self.view.full()) {
            let e = self.entry(level, env, x);
            match judge(level, &e, self.kinds) {
                Verdict::Decides => return Part::Const(level.exists),
                Verdict::Irrelevant => {}
                Verdict::Open => out.push(e),
            }
        }
        reduce(out, level, self.kinds)
    }

    #[cfg(feature = "parallel")]
    fn top_part(&self, level: &Level, env: &[u64]) -> Part {
        use rayon::prelude::*;
        let xs: Vec<u64> = subsets(self.view.full()).collect();
        let entries: Vec<Entry> = xs.par_iter().map(|&x| self.entry(level, &mut env.to_vec(), x)).collect();
        reduce(entries, level, self.kinds)
    }

    #[cfg(not(feature = "parallel"))]
    fn top_part(&self, level: &Level, env: &[u64]) -> Part {
        self.part(level, &mut env.to_vec())
    }
}

fn depth(ls: &[Level]) -> usize {
    ls.iter().map(|l| 1 + depth(&l.children)).max().unwrap_or(0)
}

/// Subsets visited by a direct computation, saturating.
pub fn state_cost(n: usize, plan: &Plan) -> u128 {
    1u128.checked_shl((n * depth(&plan.levels)) as u32).unwrap_or(u128::MAX)
}

impl PhiState {
    /// Type of the empty structure.
    pub fn empty(plan: &Plan) -> Self {
        Self::of(&Structure::empty(plan.free.len()), plan, u128::MAX).expect("empty structure")
    }

    /// Computes the state of `s` by enumerating the extensions of every
    /// quantifier.
    pub fn of(s: &Structure, plan: &Plan, budget: u128) -> Result<Self, TypeError> {
        if s.num_colors() != plan.free.len() {
            return Err(TypeError::ColorMismatch { got: s.num_colors(), want: plan.free.len() });
        }
        let rank = plan.formula.qr();
        if state_cost(s.len(), plan) > budget {
            return Err(TypeError::BudgetExceeded { size: s.len(), rank });
        }
        let len = s.boundary().len();
        if len > MAX_BOUNDARY {
            return Err(TypeError::TooManyTerms(len));
        }
        let view = BitView::new(s).ok_or(TypeError::BudgetExceeded { size: s.len(), rank })?;
        let bpos: Vec<u64> = s.boundary().iter().map(|&e| 1u64 << s.index_of(e).expect("boundary element")).collect();
        let kinds = bpos.iter().enumerate().filter(|(_, &b)| view.edges() & b != 0).fold(0, |m, (p, _)| m | 1 << p);
        let adj = bpos
            .iter()
            .map(|&a| bpos.iter().enumerate().filter(|(_, &b)| view.inc(a, b)).fold(0u32, |m, (p, _)| m | 1 << p))
            .collect();
        let cx = Direct { view: &view, on_boundary: bpos.iter().fold(0, |m, b| m | b), bpos, kinds };
        let mut env = vec![0u64; plan.slots()];
        for (i, c) in s.colors().iter().enumerate() {
            env[i] = view.mask(s, c);
        }
        let free = plan.free.iter().map(|info| cx.summarize(env[info.slot], info, &env)).collect();
        let parts = plan.levels.iter().map(|l| cx.top_part(l, &env)).collect();
        Ok(Self { len, kinds, adj, free, parts })
    }

    /// State after adding an element at boundary position `pos`, incident
    /// to the old positions in `adj` and inside the colors in `colors`.
    pub fn introduce(&self, plan: &Plan, pos: usize, adj: u32, kind: ElemKind, colors: u64) -> Result<Self, TypeError> {
        if self.len + 1 > MAX_BOUNDARY {
            return Err(TypeError::TooManyTerms(self.len + 1));
        }
        let mut cx = Intro { pos, adj, masks: vec![0; plan.slots()], bits: colors };
        for (info, v) in plan.free.iter().zip(&self.free) {
            cx.masks[info.slot] = v.mask;
        }
        let free = plan
            .free
            .iter()
            .zip(&self.free)
            .map(|(info, v)| intro_var(v, info, colors >> info.slot & 1 == 1, &cx))
            .collect();
        let kinds = insert_bit(self.kinds, pos, kind == ElemKind::Edge);
        let parts = plan.levels.iter().zip(&self.parts).map(|(l, p)| intro_part(p, l, &mut cx, kinds)).collect();
        let row = insert_bit(adj, pos, false);
        let mut rows: Vec<u32> = self.adj.to_vec();
        rows.insert(pos, 0);
        let rows = rows
            .iter()
            .enumerate()
            .map(|(q, &r)| if q == pos { row } else { insert_bit(r, pos, row >> q & 1 == 1) })
            .collect();
        Ok(Self { len: self.len + 1, kinds, adj: rows, free, parts })
    }

    /// State after dropping boundary position `d`.
    pub fn forget(&self, plan: &Plan, d: usize) -> Self {
        let kinds = remove_bit(self.kinds, d);
        let free = plan.free.iter().zip(&self.free).map(|(info, v)| forget_var(v, info, d, self.kinds)).collect();
        let parts = plan.levels.iter().zip(&self.parts).map(|(l, p)| forget_part(p, l, d, self.kinds, kinds)).collect();
        let mut adj = self.adj.clone();
        adj.remove(d);
        let adj = adj.into_iter().map(|r| remove_bit(r, d)).collect();
        Self { len: self.len - 1, kinds, adj, free, parts }
    }

    /// Same boundary: kinds, incidences and color memberships agree.
    pub fn compatible(&self, other: &Self) -> bool {
        self.len == other.len
            && self.kinds == other.kinds
            && self.adj == other.adj
            && self.free.iter().zip(&other.free).all(|(a, b)| a.mask == b.mask)
    }

    pub fn join(&self, plan: &Plan, other: &Self) -> Option<Self> {
        if !self.compatible(other) {
            return None;
        }
        let free = plan
            .free
            .iter()
            .zip(self.free.iter().zip(&other.free))
            .map(|(info, (a, b))| join_var(a, b, info))
            .collect();
        let parts = plan
            .levels
            .iter()
            .zip(self.parts.iter().zip(&other.parts))
            .map(|(l, (p, q))| join_part(p, q, l, self.kinds))
            .collect();
        Some(Self { len: self.len, kinds: self.kinds, adj: self.adj.clone(), free, parts })
    }

    /// Whether boundary position `p` lies in color `i`.
    pub fn colored(&self, p: usize, i: usize) -> bool {
        self.free[i].mask >> p & 1 == 1
    }

    /// The formula's value, defined once the boundary is empty.
    pub fn accepts(&self, plan: &Plan) -> Option<bool> {
        if self.len != 0 {
            return None;
        }
        let mut env: Vec<Option<(&VarInfo, Var)>> = vec![None; plan.slots()];
        for (info, v) in plan.free.iter().zip(&self.free) {
            env[info.slot] = Some((info, *v));
        }
        Some(settle(plan.formula.body(), &plan.levels, &self.parts, &mut env, &mut 0))
    }

    /// Number of entries over all nesting levels.
    pub fn size(&self) -> usize {
        fn count(p: &Part) -> usize {
            match p {
                Part::Const(_) => 1,
                Part::Set(es) => es.iter().map(|e| 1 + e.parts.iter().map(count).sum::<usize>()).sum(),
            }
        }
        self.parts.iter().map(count).sum()
    }
}

/// Exact evaluation on a boundary-free state.
fn settle<'a>(
    f: &Core,
    levels: &'a [Level],
    parts: &'a [Part],
    env: &mut Vec<Option<(&'a VarInfo, Var)>>,
    q: &mut usize,
) -> bool {
    let get = |env: &Vec<Option<(&'a VarInfo, Var)>>, x: usize| env[x].expect("slot in scope");
    let pair = |env: &Vec<Option<(&'a VarInfo, Var)>>, a: usize, b: usize, bit: u8| {
        let (info, v) = get(env, a.max(b));
        v.flag(info.pair(a.min(b)), bit)
    };
    match f {
        Core::True => true,
        Core::False => false,
        Core::Not(g) => !settle(g, levels, parts, env, q),
        Core::And(gs) => gs.iter().map(|g| settle(g, levels, parts, env, q)).fold(true, |a, b| a & b),
        Core::Or(gs) => gs.iter().map(|g| settle(g, levels, parts, env, q)).fold(false, |a, b| a | b),
        Core::Imp(a, b) => {
            let a = settle(a, levels, parts, env, q);
            !a | settle(b, levels, parts, env, q)
        }
        Core::Iff(a, b) => settle(a, levels, parts, env, q) == settle(b, levels, parts, env, q),
        Core::Exists(..) | Core::Forall(..) => {
            let (level, part) = (&levels[*q], &parts[*q]);
            *q += 1;
            match part {
                Part::Const(b) => *b,
                Part::Set(es) => {
                    let slot = level.var.slot;
                    let mut hits = es.iter().map(|e| {
                        env[slot] = Some((&level.var, e.var));
                        settle(&level.body, &level.children, &e.parts, env, &mut 0)
                    });
                    let out = if level.exists { hits.any(|b| b) } else { hits.all(|b| b) };
                    env[slot] = None;
                    out
                }
            }
        }
        Core::Sing(x) => get(env, *x).1.count == 1,
        Core::IsV(x) => {
            let v = get(env, *x).1;
            v.count >= 1 && !v.edge
        }
        Core::IsE(x) => {
            let v = get(env, *x).1;
            v.count >= 1 && !v.vertex
        }
        Core::Sub(a, b) if a == b => true,
        Core::Sub(a, b) => !pair(env, *a, *b, if a > b { FWD } else { BACK }),
        Core::Inc(a, b) if a == b => get(env, *a).1.flags & 1 == 1,
        Core::Inc(a, b) => pair(env, *a, *b, INC),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::logic::{desugar, evaluate, parse_formula, Assignment, DOMINATING_SET, INDEPENDENT_SET};
    use crate::structures::Graph;

    fn plan(t: &str) -> Plan {
        Plan::new(&desugar(&parse_formula(t).unwrap()))
    }

    #[test]
    fn bit_helpers() {
        assert_eq!(insert_bit(0b101, 1, true), 0b1011);
        assert_eq!(insert_bit(0b101, 3, false), 0b0101);
        assert_eq!(remove_bit(0b1011, 1), 0b101);
        assert_eq!(remove_bit(1 << 31, 31), 0);
    }

    #[test]
    fn plan_of_independent_set() {
        let p = plan(INDEPENDENT_SET);
        assert_eq!(p.levels().len(), 2);
        let z = &p.levels()[0].var;
        assert_eq!((z.slot, z.cap, z.edge, z.pairs.clone()), (1, 2, true, vec![(0, FWD)]));
        let y = &p.levels()[1];
        assert!(y.exists && y.var.vertex && y.var.pairs.is_empty());
        assert_eq!(y.children[0].var.pairs, vec![(0, FWD), (1, INC)]);
        assert_eq!(p.free()[0], VarInfo { slot: 0, ..VarInfo::default() });
    }

    #[test]
    fn accepts_matches_evaluation() {
        for text in [INDEPENDENT_SET, DOMINATING_SET] {
            let f = desugar(&parse_formula(text).unwrap());
            let p = Plan::new(&f);
            let (s, _) = Graph::path(3).incidence_structure();
            let full = s.universe().to_vec();
            for bits in 0u32..1 << full.len() {
                let x: BTreeSet<_> =
                    full.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &e)| e).collect();
                let c = s.clone().with_colors(vec![x.clone()]).unwrap();
                let st = PhiState::of(&c, &p, u128::MAX).unwrap();
                assert_eq!(st.accepts(&p), Some(evaluate(&f, &c, &Assignment::new(vec![x])).unwrap()));
            }
        }
    }

    #[test]
    fn settled_states_collapse() {
        let p = plan(INDEPENDENT_SET);
        let (s, _) = Graph::path(2).incidence_structure();
        let edge = *s.universe().iter().find(|&&e| !s.is_vertex(e)).unwrap();
        let bad = s.with_colors(vec![BTreeSet::from([edge])]).unwrap();
        let st = PhiState::of(&bad, &p, u128::MAX).unwrap();
        assert_eq!(st.parts[0], Part::Const(false));
    }
}
