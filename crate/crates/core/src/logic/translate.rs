use std::collections::BTreeSet;

use super::{Atom, Core, CoreFormula, Formula, Quant, Sort, SurfaceFormula};

fn names<'a>(f: &'a Formula, out: &mut BTreeSet<&'a str>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(a) => match a {
            Atom::Sing(x) | Atom::IsV(x) | Atom::IsE(x) => {
                out.insert(x);
            }
            Atom::Sub(x, y) | Atom::Inc(x, y) | Atom::In(x, y) | Atom::Eq(x, y) | Atom::Adj(x, y) => {
                out.insert(x);
                out.insert(y);
            }
        },
        Formula::Not(g) => names(g, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| names(g, out)),
        Formula::Imp(a, b) | Formula::Iff(a, b) => {
            names(a, out);
            names(b, out);
        }
        Formula::Quant { var, body, .. } => {
            out.insert(var);
            names(body, out);
        }
    }
}

struct Fresh {
    taken: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    fn name(&mut self) -> String {
        loop {
            let n = format!("_e{}", self.next);
            self.next += 1;
            if !self.taken.contains(&n) {
                return n;
            }
        }
    }
}

fn atom(a: &Atom, fresh: &mut Fresh) -> Formula {
    let at = |a: Atom| Formula::Atom(a);
    match a {
        Atom::In(x, y) => at(Atom::Sub(x.clone(), y.clone())),
        Atom::Eq(x, y) => Formula::And(vec![at(Atom::Sub(x.clone(), y.clone())), at(Atom::Sub(y.clone(), x.clone()))]),
        Atom::Adj(x, y) => {
            let z = fresh.name();
            let body = Formula::And(vec![at(Atom::Inc(x.clone(), z.clone())), at(Atom::Inc(y.clone(), z.clone()))]);
            element_quant(Quant::Exists, Sort::Edge, z, body)
        }
        other => at(other.clone()),
    }
}

fn element_quant(quant: Quant, sort: Sort, var: String, body: Formula) -> Formula {
    let guard = |v: &String| match sort {
        Sort::Vertex => Formula::Atom(Atom::IsV(v.clone())),
        _ => Formula::Atom(Atom::IsE(v.clone())),
    };
    let sing = Formula::Atom(Atom::Sing(var.clone()));
    let body = match quant {
        Quant::Exists => Formula::And(vec![sing, guard(&var), body]),
        Quant::Forall => Formula::Imp(Box::new(Formula::And(vec![sing, guard(&var)])), Box::new(body)),
    };
    Formula::Quant { quant, sort: Sort::Set, var, body: Box::new(body) }
}

fn go(f: &Formula, fresh: &mut Fresh) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom(a) => atom(a, fresh),
        Formula::Not(g) => Formula::Not(Box::new(go(g, fresh))),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| go(g, fresh)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| go(g, fresh)).collect()),
        Formula::Imp(a, b) => Formula::Imp(Box::new(go(a, fresh)), Box::new(go(b, fresh))),
        Formula::Iff(a, b) => Formula::Iff(Box::new(go(a, fresh)), Box::new(go(b, fresh))),
        Formula::Quant { quant, sort, var, body } => {
            let body = go(body, fresh);
            match sort {
                Sort::Set => Formula::Quant { quant: *quant, sort: Sort::Set, var: var.clone(), body: Box::new(body) },
                _ => element_quant(*quant, *sort, var.clone(), body),
            }
        }
    }
}

/// Rewrites element quantifiers and the `in`/`eq`/`adj` atoms into
/// singleton set quantifiers over the core atoms. Formulas without sugar
/// come back unchanged.
pub fn translate_mso2(f: &SurfaceFormula) -> SurfaceFormula {
    if !f.body().has_sugar() {
        return f.clone();
    }
    let mut taken = BTreeSet::new();
    names(f.body(), &mut taken);
    taken.extend(f.free().iter().map(String::as_str));
    let mut fresh = Fresh { taken: taken.into_iter().map(str::to_string).collect(), next: 0 };
    let body = go(f.body(), &mut fresh);
    SurfaceFormula::new(f.free().to_vec(), body).expect("translation keeps scoping intact")
}

/// Translates sugar away and resolves variables to slots.
pub fn desugar(f: &SurfaceFormula) -> CoreFormula {
    let t = translate_mso2(f);
    let mut env: Vec<String> = t.free().to_vec();
    let body = core(t.body(), &mut env);
    CoreFormula::new(t.free().to_vec(), body)
}

fn core(f: &Formula, env: &mut Vec<String>) -> Core {
    let slot = |env: &Vec<String>, v: &String| env.iter().rposition(|n| n == v).expect("scopes were checked");
    match f {
        Formula::True => Core::True,
        Formula::False => Core::False,
        Formula::Not(g) => Core::Not(Box::new(core(g, env))),
        Formula::And(gs) => Core::And(gs.iter().map(|g| core(g, env)).collect()),
        Formula::Or(gs) => Core::Or(gs.iter().map(|g| core(g, env)).collect()),
        Formula::Imp(a, b) => Core::Imp(Box::new(core(a, env)), Box::new(core(b, env))),
        Formula::Iff(a, b) => Core::Iff(Box::new(core(a, env)), Box::new(core(b, env))),
        Formula::Quant { quant, var, body, .. } => {
            let s = env.len();
            env.push(var.clone());
            let b = Box::new(core(body, env));
            env.pop();
            match quant {
                Quant::Exists => Core::Exists(s, b),
                Quant::Forall => Core::Forall(s, b),
            }
        }
        Formula::Atom(a) => match a {
            Atom::Sub(x, y) => Core::Sub(slot(env, x), slot(env, y)),
            Atom::Inc(x, y) => Core::Inc(slot(env, x), slot(env, y)),
            Atom::Sing(x) => Core::Sing(slot(env, x)),
            Atom::IsV(x) => Core::IsV(slot(env, x)),
            Atom::IsE(x) => Core::IsE(slot(env, x)),
            Atom::In(..) | Atom::Eq(..) | Atom::Adj(..) => unreachable!("translated away"),
        },
    }
}
