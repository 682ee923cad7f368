//! Propositional formulas over `p1, p2, ...`: syntax, printing and Kripke
//! evaluation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::nodeset::NodeSet;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Bot,
    /// 1-based variable index.
    Var(usize),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Imp(Arc<Formula>, Arc<Formula>),
}

use Formula::*;

impl Formula {
    pub fn var(i: usize) -> Formula {
        Var(i)
    }

    pub fn top() -> Formula {
        Imp(Arc::new(Bot), Arc::new(Bot))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Or(Arc::new(a), Arc::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Imp(Arc::new(a), Arc::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Imp(Arc::new(a), Arc::new(Bot))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        let (a, b) = (Arc::new(a), Arc::new(b));
        And(Arc::new(Imp(a.clone(), b.clone())), Arc::new(Imp(b, a)))
    }

    /// `⊥` for an empty list, the element itself for one, else a left fold.
    pub fn disj(items: Vec<Arc<Formula>>) -> Arc<Formula> {
        fold(items, Bot, Or)
    }

    /// `⊤` for an empty list, the element itself for one, else a left fold.
    pub fn conj(items: Vec<Arc<Formula>>) -> Arc<Formula> {
        fold(items, Formula::top(), And)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Imp(a, b) if **a == Bot && **b == Bot)
    }

    /// Implication nesting depth; `¬` and `⊤` count as implications.
    pub fn impl_depth(&self) -> usize {
        let mut memo = HashMap::new();
        depth_rec(self, &mut memo)
    }

    /// Variables occurring in the formula.
    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut seen = std::collections::HashSet::new();
        vars_rec(self, &mut out, &mut seen);
        out
    }

    pub fn max_var(&self) -> usize {
        self.vars().last().copied().unwrap_or(0)
    }

    /// Renames variables through `map` (old index to new index).
    pub fn rename(&self, map: &HashMap<usize, usize>) -> Formula {
        match self {
            Bot => Bot,
            Var(i) => Var(*map.get(i).unwrap_or(i)),
            And(a, b) => And(Arc::new(a.rename(map)), Arc::new(b.rename(map))),
            Or(a, b) => Or(Arc::new(a.rename(map)), Arc::new(b.rename(map))),
            Imp(a, b) => Imp(Arc::new(a.rename(map)), Arc::new(b.rename(map))),
        }
    }

    /// Removes `⊥` disjuncts and `⊤` conjuncts.
    pub fn simplify(&self) -> Formula {
        match self {
            Bot | Var(_) => self.clone(),
            And(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if a.is_top() {
                    b
                } else if b.is_top() {
                    a
                } else {
                    Formula::and(a, b)
                }
            }
            Or(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if a == Bot {
                    b
                } else if b == Bot {
                    a
                } else {
                    Formula::or(a, b)
                }
            }
            Imp(a, b) => Formula::imp(a.simplify(), b.simplify()),
        }
    }

    /// Number of nodes of the formula tree, shared subterms counted once.
    pub fn dag_size(&self) -> usize {
        fn rec(f: &Formula, seen: &mut std::collections::HashSet<usize>) -> usize {
            match f {
                Bot | Var(_) => 1,
                And(a, b) | Or(a, b) | Imp(a, b) => {
                    let mut s = 1;
                    for c in [a, b] {
                        if seen.insert(Arc::as_ptr(c) as usize) {
                            s += rec(c, seen);
                        }
                    }
                    s
                }
            }
        }
        rec(self, &mut Default::default())
    }
}

fn fold(
    items: Vec<Arc<Formula>>,
    empty: Formula,
    op: fn(Arc<Formula>, Arc<Formula>) -> Formula,
) -> Arc<Formula> {
    let mut it = items.into_iter();
    match it.next() {
        None => Arc::new(empty),
        Some(first) => it.fold(first, |acc, x| Arc::new(op(acc, x))),
    }
}

fn depth_rec(f: &Formula, memo: &mut HashMap<usize, usize>) -> usize {
    match f {
        Bot | Var(_) => 0,
        And(a, b) | Or(a, b) => child_depth(a, memo).max(child_depth(b, memo)),
        Imp(a, b) => 1 + child_depth(a, memo).max(child_depth(b, memo)),
    }
}

fn child_depth(c: &Arc<Formula>, memo: &mut HashMap<usize, usize>) -> usize {
    let key = Arc::as_ptr(c) as usize;
    if let Some(&d) = memo.get(&key) {
        return d;
    }
    let d = depth_rec(c, memo);
    memo.insert(key, d);
    d
}

fn vars_rec(f: &Formula, out: &mut BTreeSet<usize>, seen: &mut std::collections::HashSet<usize>) {
    match f {
        Bot => {}
        Var(i) => {
            out.insert(*i);
        }
        And(a, b) | Or(a, b) | Imp(a, b) => {
            for c in [a, b] {
                if seen.insert(Arc::as_ptr(c) as usize) {
                    vars_rec(c, out, seen);
                }
            }
        }
    }
}

// ---- printing ----

const P_IMP: u8 = 1;
const P_OR: u8 = 2;
const P_AND: u8 = 3;
const P_NOT: u8 = 4;

/// Recognizes `(a -> b) & (b -> a)`.
fn as_iff(f: &Formula) -> Option<(&Formula, &Formula)> {
    if let And(l, r) = f {
        if let (Imp(a, b), Imp(c, d)) = (&**l, &**r) {
            if a == d && b == c {
                return Some((a, b));
            }
        }
    }
    None
}

fn prec(f: &Formula) -> u8 {
    if as_iff(f).is_some() {
        return P_IMP;
    }
    match f {
        Bot | Var(_) => 5,
        _ if f.is_top() => 5,
        Imp(_, b) if **b == Bot => P_NOT,
        And(..) => P_AND,
        Or(..) => P_OR,
        Imp(..) => P_IMP,
    }
}

fn write_at(f: &Formula, min: u8, out: &mut String) {
    if prec(f) < min {
        out.push('(');
        write_at(f, 0, out);
        out.push(')');
        return;
    }
    if let Some((a, b)) = as_iff(f) {
        write_at(a, P_IMP + 1, out);
        out.push_str(" <-> ");
        write_at(b, P_IMP, out);
        return;
    }
    match f {
        Bot => out.push_str("false"),
        Var(i) => {
            out.push('p');
            out.push_str(&i.to_string());
        }
        _ if f.is_top() => out.push_str("true"),
        Imp(a, b) if **b == Bot => {
            out.push('~');
            write_at(a, P_NOT, out);
        }
        And(a, b) => {
            write_at(a, P_AND, out);
            out.push_str(" & ");
            write_at(b, P_AND + 1, out);
        }
        Or(a, b) => {
            write_at(a, P_OR, out);
            out.push_str(" | ");
            write_at(b, P_OR + 1, out);
        }
        Imp(a, b) => {
            write_at(a, P_IMP + 1, out);
            out.push_str(" -> ");
            write_at(b, P_IMP, out);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_at(self, 0, &mut s);
        f.write_str(&s)
    }
}

// ---- parsing ----

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Var(usize),
    False,
    True,
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| Error::Parse {
        pos,
        msg: msg.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '~' | '¬' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Imp,
            '↔' => Tok::Iff,
            '⊥' => Tok::False,
            '⊤' => Tok::True,
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    i += 1;
                    Tok::Imp
                } else {
                    return Err(err(i, "expected '->'"));
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    i += 2;
                    Tok::Iff
                } else {
                    return Err(err(i, "expected '<->'"));
                }
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                i = j - 1;
                match word.as_str() {
                    "false" => Tok::False,
                    "true" => Tok::True,
                    w if w.starts_with('p')
                        && w.len() > 1
                        && w[1..].bytes().all(|b| b.is_ascii_digit()) =>
                    {
                        let idx: usize = w[1..]
                            .parse()
                            .map_err(|_| err(start, "variable index too large"))?;
                        if idx == 0 {
                            return Err(err(start, "variables are numbered from p1"));
                        }
                        Tok::Var(idx)
                    }
                    _ => return Err(err(start, &format!("unknown identifier '{word}'"))),
                }
            }
            other => return Err(err(i, &format!("unexpected character '{other}'"))),
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((chars.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn imp(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        match self.peek() {
            Tok::Imp => {
                self.bump();
                Ok(Formula::imp(lhs, self.imp()?))
            }
            Tok::Iff => {
                self.bump();
                Ok(Formula::iff(lhs, self.imp()?))
            }
            _ => Ok(lhs),
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        let pos = self.pos();
        match self.bump() {
            Tok::Not => Ok(Formula::not(self.unary()?)),
            Tok::Var(i) => Ok(Var(i)),
            Tok::False => Ok(Bot),
            Tok::True => Ok(Formula::top()),
            Tok::LParen => {
                let f = self.imp()?;
                if self.bump() != Tok::RParen {
                    return Err(Error::Parse {
                        pos: self.toks[self.at.saturating_sub(1)].0,
                        msg: "expected ')'".into(),
                    });
                }
                Ok(f)
            }
            Tok::End => Err(Error::Parse {
                pos,
                msg: "unexpected end of input".into(),
            }),
            t => Err(Error::Parse {
                pos,
                msg: format!("unexpected {t:?}"),
            }),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.imp()?;
    if *p.peek() != Tok::End {
        return Err(Error::Parse {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Formula> {
        parse_formula(s)
    }
}

// ---- evaluation ----

/// Evaluates formulas on a frame, caching shared subterms by address.
pub struct Evaluator<'a, F: Frame + ?Sized> {
    frame: &'a F,
    vars: Vec<Option<Arc<NodeSet>>>,
    memo: HashMap<usize, (Arc<Formula>, Arc<NodeSet>)>,
    log: Vec<usize>,
}

impl<'a, F: Frame + ?Sized> Evaluator<'a, F> {
    pub fn new(frame: &'a F) -> Self {
        Evaluator {
            frame,
            vars: vec![None; frame.n_vars() + 1],
            memo: HashMap::new(),
            log: Vec::new(),
        }
    }

    /// Position to which [`Evaluator::rollback`] can later return.
    pub fn mark(&self) -> usize {
        self.log.len()
    }

    /// Drops every cached value recorded after `mark`.
    pub fn rollback(&mut self, mark: usize) {
        for key in self.log.drain(mark..) {
            self.memo.remove(&key);
        }
    }

    pub fn frame(&self) -> &'a F {
        self.frame
    }

    /// Records a known denotation for a shared subterm.
    pub fn seed(&mut self, f: &Arc<Formula>, value: NodeSet) {
        let key = Arc::as_ptr(f) as usize;
        if self
            .memo
            .insert(key, (f.clone(), Arc::new(value)))
            .is_none()
        {
            self.log.push(key);
        }
    }

    pub fn cached(&self, f: &Arc<Formula>) -> Option<&NodeSet> {
        self.memo.get(&(Arc::as_ptr(f) as usize)).map(|e| &*e.1)
    }

    pub fn clear_cache(&mut self) {
        self.memo.clear();
        self.log.clear();
    }

    pub fn eval(&mut self, f: &Formula) -> Result<NodeSet> {
        let p = self.frame.poset();
        Ok(match f {
            Bot => NodeSet::new(p.size()),
            Var(i) => (*self.var(*i)?).clone(),
            And(a, b) => {
                let x = self.eval_arc(a)?;
                let y = self.eval_arc(b)?;
                x.intersection(&y)
            }
            Or(a, b) => {
                let x = self.eval_arc(a)?;
                let y = self.eval_arc(b)?;
                x.union(&y)
            }
            Imp(a, b) => {
                let x = self.eval_arc(a)?;
                let y = self.eval_arc(b)?;
                let mut bad = x.difference(&y);
                p.up_closure_in_place(&mut bad);
                bad.complement()
            }
        })
    }

    /// Like [`Evaluator::eval`], sharing the cached value.
    pub fn eval_arc(&mut self, f: &Arc<Formula>) -> Result<Arc<NodeSet>> {
        let key = Arc::as_ptr(f) as usize;
        if let Some((_, v)) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        if let Var(i) = **f {
            return self.var(i);
        }
        let v = Arc::new(self.eval(f)?);
        self.memo.insert(key, (f.clone(), v.clone()));
        self.log.push(key);
        Ok(v)
    }

    fn var(&mut self, i: usize) -> Result<Arc<NodeSet>> {
        let n = self.frame.n_vars();
        if i == 0 || i > n {
            return Err(Error::VariableOutOfRange { index: i, n });
        }
        if self.vars[i].is_none() {
            let size = self.frame.size();
            let bit = 1u32 << (i - 1);
            let s = NodeSet::from_ids(
                size,
                (0..size).filter(|&v| self.frame.valuation(v) & bit != 0),
            );
            self.vars[i] = Some(Arc::new(s));
        }
        Ok(self.vars[i].clone().unwrap())
    }
}

/// The set of points forcing `f`.
pub fn eval_formula<F: Frame + ?Sized>(f: &Formula, frame: &F) -> Result<NodeSet> {
    Evaluator::new(frame).eval(f)
}

/// A random formula over `p1..pn` with implication depth at most `max_depth`
/// and at most `budget` connectives.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_depth: usize,
    budget: usize,
) -> Formula {
    if budget == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.12) {
            Bot
        } else {
            Var(rng.gen_range(1..=n))
        };
    }
    let rest = budget - 1;
    let split = rng.gen_range(0..=rest);
    let choice = if max_depth == 0 {
        rng.gen_range(0..2)
    } else {
        rng.gen_range(0..4)
    };
    match choice {
        0 => Formula::and(
            random_formula(rng, n, max_depth, split),
            random_formula(rng, n, max_depth, rest - split),
        ),
        1 => Formula::or(
            random_formula(rng, n, max_depth, split),
            random_formula(rng, n, max_depth, rest - split),
        ),
        2 => Formula::not(random_formula(rng, n, max_depth - 1, rest)),
        _ => Formula::imp(
            random_formula(rng, n, max_depth - 1, split),
            random_formula(rng, n, max_depth - 1, rest - split),
        ),
    }
}
