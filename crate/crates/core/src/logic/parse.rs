use std::collections::HashMap;

use super::{Atom, Formula, LogicError, Quant, Sort, SurfaceFormula};
use crate::error::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Word(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> (Vec<Token>, (usize, usize)) {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' | ')' => {
                chars.next();
                let tok = if c == '(' { Tok::Open } else { Tok::Close };
                out.push(Token { tok, line, col });
                col += 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            _ => {
                let start = col;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    col += 1;
                }
                out.push(Token { tok: Tok::Word(word), line, col: start });
            }
        }
    }
    (out, (line, col))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn err(&self, expected: &str) -> SyntaxError {
        let (line, col) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self.end,
        };
        SyntaxError { line, col, expected: expected.to_string() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn open(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(Tok::Open) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err("'('")),
        }
    }

    fn close(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(Tok::Close) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err("')'")),
        }
    }

    fn name(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Word(w)) if !is_reserved(w) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err("variable name")),
        }
    }

    fn header(&mut self) -> Result<Vec<String>, SyntaxError> {
        self.open()?;
        match self.peek() {
            Some(Tok::Word(w)) if w == "free" => self.pos += 1,
            _ => return Err(self.err("'free'")),
        }
        let mut names = Vec::new();
        while let Some(Tok::Word(_)) = self.peek() {
            names.push(self.name()?);
        }
        self.close()?;
        Ok(names)
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek() {
            Some(Tok::Word(w)) if w == "true" => {
                self.pos += 1;
                return Ok(Formula::True);
            }
            Some(Tok::Word(w)) if w == "false" => {
                self.pos += 1;
                return Ok(Formula::False);
            }
            Some(Tok::Open) => self.pos += 1,
            _ => return Err(self.err("formula")),
        }
        let op = match self.peek() {
            Some(Tok::Word(w)) => w.clone(),
            _ => return Err(self.err("connective, quantifier or atom")),
        };
        let op_at = self.pos;
        self.pos += 1;
        let f = match op.as_str() {
            "and" | "or" => {
                let mut args = vec![self.formula()?, self.formula()?];
                while self.peek() != Some(&Tok::Close) && self.peek().is_some() {
                    args.push(self.formula()?);
                }
                if op == "and" {
                    Formula::And(args)
                } else {
                    Formula::Or(args)
                }
            }
            "not" => Formula::Not(Box::new(self.formula()?)),
            "imp" | "iff" => {
                let a = Box::new(self.formula()?);
                let b = Box::new(self.formula()?);
                if op == "imp" {
                    Formula::Imp(a, b)
                } else {
                    Formula::Iff(a, b)
                }
            }
            "sub" => Formula::Atom(Atom::Sub(self.name()?, self.name()?)),
            "inc" => Formula::Atom(Atom::Inc(self.name()?, self.name()?)),
            "in" => Formula::Atom(Atom::In(self.name()?, self.name()?)),
            "eq" => Formula::Atom(Atom::Eq(self.name()?, self.name()?)),
            "adj" => Formula::Atom(Atom::Adj(self.name()?, self.name()?)),
            "sing" => Formula::Atom(Atom::Sing(self.name()?)),
            "isV" => Formula::Atom(Atom::IsV(self.name()?)),
            "isE" => Formula::Atom(Atom::IsE(self.name()?)),
            q => {
                let Some((quant, sort)) = quantifier(q) else {
                    self.pos = op_at;
                    return Err(self.err("connective, quantifier or atom"));
                };
                let var = self.name()?;
                let body = Box::new(self.formula()?);
                Formula::Quant { quant, sort, var, body }
            }
        };
        self.close()?;
        Ok(f)
    }
}

fn quantifier(word: &str) -> Option<(Quant, Sort)> {
    Some(match word {
        "forallSet" => (Quant::Forall, Sort::Set),
        "existsSet" => (Quant::Exists, Sort::Set),
        "forallV" => (Quant::Forall, Sort::Vertex),
        "existsV" => (Quant::Exists, Sort::Vertex),
        "forallE" => (Quant::Forall, Sort::Edge),
        "existsE" => (Quant::Exists, Sort::Edge),
        _ => return None,
    })
}

fn is_reserved(w: &str) -> bool {
    matches!(w, "true" | "false" | "free")
}

/// Parses a formula file: a `(free ...)` header followed by one formula.
pub fn parse_formula(text: &str) -> Result<SurfaceFormula, LogicError> {
    let (toks, end) = lex(text);
    let mut p = Parser { toks, pos: 0, end };
    let free = p.header()?;
    let body = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.err("end of input").into());
    }
    SurfaceFormula::new(free, body)
}

pub(super) fn check_scopes(free: &[String], body: &Formula) -> Result<(), LogicError> {
    let mut env: HashMap<&str, Sort> = HashMap::new();
    for v in free {
        if env.insert(v, Sort::Set).is_some() {
            return Err(LogicError::DuplicateFree(v.clone()));
        }
    }
    walk(body, &mut env)
}

fn walk<'a>(f: &'a Formula, env: &mut HashMap<&'a str, Sort>) -> Result<(), LogicError> {
    match f {
        Formula::True | Formula::False => Ok(()),
        Formula::Atom(a) => atom(a, env),
        Formula::Not(g) => walk(g, env),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(|g| walk(g, env)),
        Formula::Imp(a, b) | Formula::Iff(a, b) => {
            walk(a, env)?;
            walk(b, env)
        }
        Formula::Quant { sort, var, body, .. } => {
            if env.contains_key(var.as_str()) {
                return Err(LogicError::ShadowedVariable(var.clone()));
            }
            env.insert(var, *sort);
            let r = walk(body, env);
            env.remove(var.as_str());
            r
        }
    }
}

fn atom(a: &Atom, env: &HashMap<&str, Sort>) -> Result<(), LogicError> {
    let sort = |v: &String| env.get(v.as_str()).copied().ok_or_else(|| LogicError::UnboundVariable(v.clone()));
    let element = |v: &String, name: &'static str| match sort(v)? {
        Sort::Set => Err(LogicError::SortMismatch { name: v.clone(), atom: name }),
        _ => Ok(()),
    };
    match a {
        Atom::Sub(x, y) | Atom::Inc(x, y) => sort(x).and(sort(y)).map(drop),
        Atom::Sing(x) | Atom::IsV(x) | Atom::IsE(x) => sort(x).map(drop),
        Atom::In(x, y) => {
            element(x, "in")?;
            sort(y).map(drop)
        }
        Atom::Eq(x, y) => element(x, "eq").and(element(y, "eq")),
        Atom::Adj(x, y) => element(x, "adj").and(element(y, "adj")),
    }
}
