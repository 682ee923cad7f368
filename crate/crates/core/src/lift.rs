//! Truth of formulas at the nodes one level above a materialized model,
//! without building that level.
//!
//! A new node `w_{β,Y}` forces `θ1 → θ2` iff `Y` lies inside the denotation
//! of `θ1 → θ2` on the base model and the implication holds locally. So the
//! truth value of a formula at the node depends only on `β` and on which of
//! these denotations contain `Y`. The search below assigns those inclusion
//! bits with three-valued pruning and asks whether some admissible `Y`
//! realizes the assignment.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{Evaluator, Formula};
use crate::frame::Frame;
use crate::nodeset::NodeSet;
use crate::poset::Extremal;
use crate::universal::UniversalModel;

/// A node of the level above the base model, named by its valuation and its
/// strict down-set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualNode {
    pub val: u32,
    pub below: NodeSet,
}

impl VirtualNode {
    /// Maximal elements of the strict down-set.
    pub fn generators(&self, base: &UniversalModel) -> Vec<usize> {
        base.poset()
            .extremal(&self.below, Extremal::Max)
            .expect("width matches base")
            .to_vec()
    }
}

/// An extra requirement `Y ⊆ set` (or `Y ⊄ set` when `inside` is false).
#[derive(Clone, Debug)]
pub struct Containment {
    pub set: NodeSet,
    pub inside: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum T3 {
    F,
    T,
    U,
}

fn and3(a: T3, b: T3) -> T3 {
    match (a, b) {
        (T3::F, _) | (_, T3::F) => T3::F,
        (T3::T, T3::T) => T3::T,
        _ => T3::U,
    }
}

fn or3(a: T3, b: T3) -> T3 {
    match (a, b) {
        (T3::T, _) | (_, T3::T) => T3::T,
        (T3::F, T3::F) => T3::F,
        _ => T3::U,
    }
}

fn not3(a: T3) -> T3 {
    match a {
        T3::F => T3::T,
        T3::T => T3::F,
        T3::U => T3::U,
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(bool),
    Var(u32),
    And(usize, usize),
    Or(usize, usize),
    /// Operands and the inclusion feature.
    Imp(usize, usize, usize),
}

/// Decides existence of level-above nodes with prescribed truth values.
pub struct Lift<'m> {
    base: &'m UniversalModel,
    top: NodeSet,
    valsup: Vec<NodeSet>,
}

struct Compiled {
    ops: Vec<Op>,
    root: usize,
    /// Base denotation of each implication feature, in pre-order.
    dens: Vec<Arc<NodeSet>>,
}

impl<'m> Lift<'m> {
    pub fn new(base: &'m UniversalModel) -> Lift<'m> {
        let size = base.size();
        let lo = if base.depth() == 0 {
            0
        } else {
            base.level_end(base.depth() - 1)
        };
        let top = NodeSet::from_ids(size, lo..size);
        let valsup = (0..1u32 << base.n())
            .map(|b| NodeSet::from_ids(size, (0..size).filter(|&v| base.val(v) & b == b)))
            .collect();
        Lift { base, top, valsup }
    }

    pub fn base(&self) -> &'m UniversalModel {
        self.base
    }

    fn compile(
        &self,
        f: &Arc<Formula>,
        known: &HashMap<usize, bool>,
        ev: &mut Evaluator<'_, UniversalModel>,
    ) -> Result<Compiled> {
        let mut c = Compiled {
            ops: Vec::new(),
            root: 0,
            dens: Vec::new(),
        };
        let mut index: HashMap<usize, usize> = HashMap::new();
        // features are numbered on the way down, operations on the way up
        fn go(
            f: &Arc<Formula>,
            known: &HashMap<usize, bool>,
            ev: &mut Evaluator<'_, UniversalModel>,
            c: &mut Compiled,
            index: &mut HashMap<usize, usize>,
            n: usize,
        ) -> Result<usize> {
            let key = Arc::as_ptr(f) as usize;
            if let Some(&i) = index.get(&key) {
                return Ok(i);
            }
            let op = if let Some(&b) = known.get(&key) {
                Op::Const(b)
            } else {
                match &**f {
                    Formula::Bot => Op::Const(false),
                    Formula::Var(i) => {
                        if *i == 0 || *i > n {
                            return Err(Error::VariableOutOfRange { index: *i, n });
                        }
                        Op::Var(1 << (i - 1))
                    }
                    Formula::And(a, b) => {
                        let x = go(a, known, ev, c, index, n)?;
                        let y = go(b, known, ev, c, index, n)?;
                        Op::And(x, y)
                    }
                    Formula::Or(a, b) => {
                        let x = go(a, known, ev, c, index, n)?;
                        let y = go(b, known, ev, c, index, n)?;
                        Op::Or(x, y)
                    }
                    Formula::Imp(a, b) => {
                        let feat = c.dens.len();
                        c.dens.push(ev.eval_arc(f)?);
                        let x = go(a, known, ev, c, index, n)?;
                        let y = go(b, known, ev, c, index, n)?;
                        Op::Imp(x, y, feat)
                    }
                }
            };
            c.ops.push(op);
            let i = c.ops.len() - 1;
            index.insert(key, i);
            Ok(i)
        }
        c.root = go(f, known, ev, &mut c, &mut index, self.base.n())?;
        Ok(c)
    }

    fn eval3(c: &Compiled, beta: u32, feats: &[T3], scratch: &mut Vec<T3>) -> T3 {
        scratch.clear();
        for op in &c.ops {
            let t = match *op {
                Op::Const(b) => {
                    if b {
                        T3::T
                    } else {
                        T3::F
                    }
                }
                Op::Var(bit) => {
                    if beta & bit != 0 {
                        T3::T
                    } else {
                        T3::F
                    }
                }
                Op::And(x, y) => and3(scratch[x], scratch[y]),
                Op::Or(x, y) => or3(scratch[x], scratch[y]),
                Op::Imp(x, y, f) => and3(feats[f], or3(not3(scratch[x]), scratch[y])),
            };
            scratch.push(t);
        }
        scratch[c.root]
    }

    /// Largest `Y` meeting the assigned inclusions, if it is admissible.
    fn feasible(
        &self,
        c: &Compiled,
        beta: u32,
        feats: &[T3],
        extra: &[Containment],
    ) -> Option<NodeSet> {
        let mut allowed = self.valsup[beta as usize].clone();
        for (i, t) in feats.iter().enumerate() {
            if *t == T3::T {
                allowed.intersect_with(&c.dens[i]);
            }
        }
        for e in extra.iter().filter(|e| e.inside) {
            allowed.intersect_with(&e.set);
        }
        if !allowed.intersects(&self.top) {
            return None;
        }
        for (i, t) in feats.iter().enumerate() {
            if *t == T3::F && allowed.is_subset(&c.dens[i]) {
                return None;
            }
        }
        for e in extra.iter().filter(|e| !e.inside) {
            if allowed.is_subset(&e.set) {
                return None;
            }
        }
        // a principal Y must not repeat the valuation of its generator
        let tops = allowed.intersection(&self.top);
        if tops.count() == 1 {
            let r = tops.first().unwrap();
            if self.base.val(r) == beta && self.is_principal(&allowed, r) {
                return None;
            }
        }
        Some(allowed)
    }

    fn is_principal(&self, s: &NodeSet, r: usize) -> bool {
        let p = self.base.poset();
        s.count() == p.strict_down_count(r) + 1 && s.contains_prefix_words(p.strict_down_words(r))
    }

    /// Finds a node of the level above at which `f` has truth value `want`
    /// and whose strict down-set meets the extra requirements. Subterms listed
    /// in `known` (by address) are taken to have that constant truth value at
    /// every node of the level above.
    pub fn search(
        &self,
        f: &Arc<Formula>,
        want: bool,
        known: &HashMap<usize, bool>,
        extra: &[Containment],
        ev: &mut Evaluator<'_, UniversalModel>,
    ) -> Result<Option<VirtualNode>> {
        for e in extra {
            if !self.base.poset().is_downset(&e.set)? {
                return Err(Error::Precondition(
                    "containment sets must be downsets".into(),
                ));
            }
        }
        self.search_trusted(f, want, known, extra, ev)
    }

    /// [`Lift::search`] without validating the containment sets.
    pub(crate) fn search_trusted(
        &self,
        f: &Arc<Formula>,
        want: bool,
        known: &HashMap<usize, bool>,
        extra: &[Containment],
        ev: &mut Evaluator<'_, UniversalModel>,
    ) -> Result<Option<VirtualNode>> {
        let c = self.compile(f, known, ev)?;
        let goal = if want { T3::T } else { T3::F };
        let mut feats = vec![T3::U; c.dens.len()];
        let mut scratch = Vec::with_capacity(c.ops.len());
        for beta in 0..1u32 << self.base.n() {
            if let Some(y) = self.dfs(&c, beta, goal, &mut feats, 0, extra, &mut scratch) {
                return Ok(Some(VirtualNode {
                    val: beta,
                    below: y,
                }));
            }
        }
        Ok(None)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        c: &Compiled,
        beta: u32,
        goal: T3,
        feats: &mut Vec<T3>,
        next: usize,
        extra: &[Containment],
        scratch: &mut Vec<T3>,
    ) -> Option<NodeSet> {
        let v = Self::eval3(c, beta, feats, scratch);
        if v != T3::U && v != goal {
            return None;
        }
        // the inclusion test is the expensive part; prune with it only now and then
        if v == goal || next >= feats.len() || next.is_multiple_of(4) {
            let found = self.feasible(c, beta, feats, extra);
            if v == goal || found.is_none() || next >= feats.len() {
                return found.filter(|_| v == goal);
            }
        }
        for choice in [T3::T, T3::F] {
            feats[next] = choice;
            let r = self.dfs(c, beta, goal, feats, next + 1, extra, scratch);
            feats[next] = T3::U;
            if r.is_some() {
                return r;
            }
        }
        None
    }
}
