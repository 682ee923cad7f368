//! Finite truncations of the generic Kripke model on `n` variables.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, Frame, ModelDoc, Violation};
use crate::nodeset::{cmp_word_bits, NodeSet};
use crate::poset::{Extremal, Poset};

pub const MAX_VARS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_vars: usize,
    pub max_depth: usize,
    pub max_nodes: u64,
    /// Bound on the words of bitmap storage held by the poset.
    pub max_words: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_vars: MAX_VARS,
            max_depth: 8,
            max_nodes: 5_000_000,
            max_words: 400_000_000,
        }
    }
}

/// `K_n^d`: nodes numbered by (rank, valuation, strict down-set in bit order).
#[derive(Clone, Debug)]
pub struct UniversalModel {
    n: usize,
    depth: usize,
    poset: Poset,
    val: Vec<u32>,
    level_end: Vec<usize>,
    lookup: HashMap<(u32, Vec<u64>), usize>,
}

impl PartialEq for UniversalModel {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.depth == other.depth
            && self.val == other.val
            && self.poset == other.poset
    }
}

impl Eq for UniversalModel {}

impl Frame for UniversalModel {
    fn poset(&self) -> &Poset {
        &self.poset
    }
    fn n_vars(&self) -> usize {
        self.n
    }
    fn valuation(&self, v: usize) -> u32 {
        self.val[v]
    }
}

fn trim_words(ws: &[u64]) -> Vec<u64> {
    let end = ws.iter().rposition(|&w| w != 0).map_or(0, |i| i + 1);
    ws[..end].to_vec()
}

/// Iterates the subsets of `mask` in increasing numeric order.
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some(((cur | !mask).wrapping_add(1)) & mask)
        };
        Some(cur)
    })
}

pub fn build_universal(n: usize, d: usize, limits: &Limits) -> Result<UniversalModel> {
    if n == 0 || n > limits.max_vars {
        return Err(Error::Precondition(format!(
            "n = {n} outside 1..={}",
            limits.max_vars
        )));
    }
    if d > limits.max_depth {
        return Err(Error::Precondition(format!(
            "depth {d} above the configured maximum {}",
            limits.max_depth
        )));
    }
    let mut m = UniversalModel::level_zero(n);
    for _ in 0..d {
        m = m.extend_level(limits)?;
    }
    Ok(m)
}

impl UniversalModel {
    fn level_zero(n: usize) -> UniversalModel {
        let size = 1usize << n;
        let poset = Poset::from_sets_unchecked(vec![Vec::new(); size]);
        let val: Vec<u32> = (0..size as u32).collect();
        let lookup = (0..size).map(|v| ((v as u32, Vec::new()), v)).collect();
        UniversalModel {
            n,
            depth: 0,
            poset,
            val,
            level_end: vec![size],
            lookup,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn size(&self) -> usize {
        self.poset.size()
    }

    pub fn val(&self, v: usize) -> u32 {
        self.val[v]
    }

    /// `{w : rank(w) <= i}`.
    pub fn level_index(&self, i: usize) -> NodeSet {
        NodeSet::prefix(self.size(), self.level_end(i))
    }

    /// Number of nodes of rank at most `i`; they are exactly the ids below it.
    pub fn level_end(&self, i: usize) -> usize {
        self.level_end[i.min(self.depth)]
    }

    pub fn level_counts(&self) -> Vec<usize> {
        let mut prev = 0;
        self.level_end
            .iter()
            .map(|&e| {
                let c = e - prev;
                prev = e;
                c
            })
            .collect()
    }

    /// The node `w_{β,Y}` for `Y` the given strict down-set, if it exists.
    pub fn lookup(&self, val: u32, strict_down: &NodeSet) -> Option<usize> {
        self.lookup
            .get(&(val, trim_words(strict_down.words())))
            .copied()
    }

    /// Same ids read in a node set of this model's width.
    pub fn widen(&self, s: &NodeSet) -> NodeSet {
        s.resized(self.size())
    }

    /// Admissible new nodes one level up, sorted canonically, as (β, Y words).
    pub(crate) fn candidates(&self, limits: &Limits, budget: u64) -> Result<Vec<(u32, Vec<u64>)>> {
        let d = self.depth;
        let top_lo = if d == 0 { 0 } else { self.level_end[d - 1] };
        let top = self.size() - top_lo;
        let partial = self.level_counts();
        let over = |count: Option<usize>| Error::ResourceLimit {
            what: "nodes".into(),
            limit: limits.max_nodes,
            level: d + 1,
            partial: partial.iter().copied().chain(count).collect(),
        };
        // every nonempty antichain of top nodes spans a distinct Y; all but
        // the principal ones admit β = ∅ at least
        if top >= 64 || (1u64 << top) - 1 - top as u64 > budget {
            return Err(over(None));
        }
        let top_set = NodeSet::from_ids(self.size(), top_lo..self.size());
        let mut out = Vec::new();
        let mut words_used = 0u64;
        let mut ds = self.poset.downsets(None);
        while ds.advance()? {
            let y = ds.current();
            if !y.intersects(&top_set) {
                continue;
            }
            let ymax = self.poset.extremal(y, Extremal::Max)?;
            let common = ymax.iter().fold(!0u32, |acc, z| acc & self.val[z]);
            let principal = if ymax.count() == 1 {
                Some(self.val[ymax.first().unwrap()])
            } else {
                None
            };
            let ws = trim_words(y.words());
            for beta in submasks(common) {
                if principal == Some(beta) {
                    continue;
                }
                words_used += ws.len() as u64 + 4;
                out.push((beta, ws.clone()));
                if out.len() as u64 > budget {
                    return Err(over(Some(out.len())));
                }
                if words_used > limits.max_words {
                    return Err(Error::ResourceLimit {
                        what: "bitmap words".into(),
                        limit: limits.max_words,
                        level: d + 1,
                        partial: partial.iter().copied().chain(Some(out.len())).collect(),
                    });
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| cmp_word_bits(&a.1, &b.1)));
        Ok(out)
    }

    /// The model one level deeper; existing ids are unchanged.
    pub fn extend_level(&self, limits: &Limits) -> Result<UniversalModel> {
        if self.depth + 1 > limits.max_depth {
            return Err(Error::Precondition(format!(
                "depth {} above the configured maximum {}",
                self.depth + 1,
                limits.max_depth
            )));
        }
        let budget = limits.max_nodes.saturating_sub(self.size() as u64);
        let cands = self.candidates(limits, budget)?;
        let base = self.size();
        let mut val = self.val.clone();
        let mut lookup = self.lookup.clone();
        let mut extra = Vec::with_capacity(cands.len());
        for (i, (beta, ws)) in cands.into_iter().enumerate() {
            val.push(beta);
            lookup.insert((beta, ws.clone()), base + i);
            extra.push(ws);
        }
        let poset = self.poset.extended(extra);
        let mut level_end = self.level_end.clone();
        level_end.push(poset.size());
        Ok(UniversalModel {
            n: self.n,
            depth: self.depth + 1,
            poset,
            val,
            level_end,
            lookup,
        })
    }

    /// Nodes covering `w` whose only lower cover is `w`.
    pub fn private_successors(&self, w: usize) -> Result<NodeSet> {
        self.check_node(w)?;
        let r = self.poset.rank(w) as usize;
        if r >= self.depth {
            return Err(Error::DepthInsufficient {
                have: self.depth,
                need: r + 1,
            });
        }
        let mut s = NodeSet::new(self.size());
        for &u in self.poset.upper_covers(w) {
            if self.poset.lower_covers(u as usize).len() == 1 {
                s.insert(u as usize);
            }
        }
        Ok(s)
    }

    pub(crate) fn check_node(&self, w: usize) -> Result<()> {
        if w >= self.size() {
            return Err(Error::IndexOutOfRange {
                index: w,
                size: self.size(),
            });
        }
        Ok(())
    }

    pub fn validate_reduced(&self) -> Vec<Violation> {
        frame::reduction_violations(self)
    }

    /// Checks every structural invariant; returns the first failure.
    pub fn check_invariants(&self) -> Result<()> {
        let p = &self.poset;
        if !frame::monotonicity_violations(self).is_empty() {
            return Err(Error::Invariant("valuation not monotone".into()));
        }
        let v = self.validate_reduced();
        if !v.is_empty() {
            return Err(Error::Invariant(format!("not reduced: {:?}", v[0])));
        }
        let mut prev: Option<(u32, u32, Vec<u64>)> = None;
        for w in 0..self.size() {
            let r = p.rank(w);
            if self.level_end(r as usize) <= w || (r > 0 && self.level_end(r as usize - 1) > w) {
                return Err(Error::Invariant(format!(
                    "node {w} outside its level block"
                )));
            }
            let y = NodeSet::from_words(self.size(), p.strict_down_words(w).to_vec());
            if !p.is_downset(&y)? {
                return Err(Error::Invariant(format!(
                    "strict down-set of {w} not closed"
                )));
            }
            if r > 0 {
                let lower_top = self.level_end(r as usize - 1);
                let below_prev = if r >= 2 {
                    self.level_end(r as usize - 2)
                } else {
                    0
                };
                if y.iter().any(|u| u >= lower_top)
                    || y.iter_range(below_prev, lower_top).next().is_none()
                {
                    return Err(Error::Invariant(format!(
                        "strict down-set of {w} not of rank {}",
                        r - 1
                    )));
                }
                let ymax = p.extremal(&y, Extremal::Max)?;
                if ymax.iter().any(|z| self.val[w] & !self.val[z] != 0) {
                    return Err(Error::Invariant(format!(
                        "valuation of {w} not below its predecessors"
                    )));
                }
                if ymax.count() == 1 && self.val[ymax.first().unwrap()] == self.val[w] {
                    return Err(Error::Invariant(format!(
                        "node {w} repeats its principal predecessor"
                    )));
                }
            }
            let key = (r, self.val[w], trim_words(y.words()));
            if let Some(pk) = &prev {
                let ord =
                    pk.0.cmp(&key.0)
                        .then(pk.1.cmp(&key.1))
                        .then_with(|| cmp_word_bits(&pk.2, &key.2));
                if ord != std::cmp::Ordering::Less {
                    return Err(Error::Invariant(format!("node {w} out of canonical order")));
                }
            }
            prev = Some(key);
        }
        Ok(())
    }

    pub fn to_doc(&self) -> ModelDoc {
        frame::to_doc(self, Some(self.depth))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("model document serializes")
    }

    pub fn to_dot(&self) -> String {
        frame::to_dot(self)
    }

    /// Rebuilds a universal model from its document and re-checks every
    /// invariant, including canonical numbering.
    pub fn from_doc(doc: &ModelDoc) -> Result<UniversalModel> {
        let size = doc.nodes.len();
        let mut sdown = Vec::with_capacity(size);
        let mut val = Vec::with_capacity(size);
        for (i, nd) in doc.nodes.iter().enumerate() {
            if nd.id != i {
                return Err(Error::InvalidModel(format!(
                    "node {i} carries id {}",
                    nd.id
                )));
            }
            sdown.push(
                nd.down
                    .iter()
                    .copied()
                    .filter(|&u| u != i)
                    .collect::<Vec<_>>(),
            );
            let mut b = 0u32;
            for &x in &nd.val {
                if x == 0 || x > doc.n {
                    return Err(Error::VariableOutOfRange { index: x, n: doc.n });
                }
                b |= 1 << (x - 1);
            }
            val.push(b);
        }
        let poset = Poset::from_strict_down(size, &sdown)?;
        for (i, nd) in doc.nodes.iter().enumerate() {
            if poset.rank(i) != nd.rank {
                return Err(Error::InvalidModel(format!(
                    "rank of node {i} does not match its down-set"
                )));
            }
        }
        let depth = doc.depth.unwrap_or_else(|| poset.max_rank() as usize);
        let mut level_end = vec![0; depth + 1];
        for v in 0..size {
            let r = poset.rank(v) as usize;
            if r > depth {
                return Err(Error::InvalidModel(format!(
                    "node {v} above declared depth"
                )));
            }
            level_end[r] = level_end[r].max(v + 1);
        }
        for i in 1..=depth {
            level_end[i] = level_end[i].max(level_end[i - 1]);
        }
        let lookup = (0..size)
            .map(|v| ((val[v], trim_words(poset.strict_down_words(v))), v))
            .collect();
        let m = UniversalModel {
            n: doc.n,
            depth,
            poset,
            val,
            level_end,
            lookup,
        };
        m.check_invariants()?;
        if m.level_end(0) != 1 << m.n {
            return Err(Error::InvalidModel(
                "level 0 must hold one node per valuation".into(),
            ));
        }
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<UniversalModel> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))?;
        Self::from_doc(&doc)
    }
}
