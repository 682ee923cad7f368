//! Finite ranked posets with truncated per-element down-maps.

use crate::error::{Error, Result};
use crate::nodeset::{words_for, NodeSet};

/// Up-set caches are skipped when they would need more words than this.
const UP_CACHE_WORD_BUDGET: usize = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremal {
    Min,
    Max,
}

/// A finite poset. `u <= v` is stored as membership of `u` in the strict
/// down-set of `v`; each strict down-set is a bitmap truncated after its
/// highest member, so the low-rank-first numbering of universal models keeps
/// it short.
#[derive(Clone, Debug)]
pub struct Poset {
    size: usize,
    rank: Vec<u32>,
    sdown_off: Vec<usize>,
    sdown: Vec<u64>,
    lower_off: Vec<usize>,
    lower: Vec<u32>,
    upper_off: Vec<usize>,
    upper: Vec<u32>,
    nonmax: NodeSet,
    up_slot: Vec<u32>,
    up_cache: Vec<u64>,
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
            && (0..self.size).all(|v| self.strict_down_words(v) == other.strict_down_words(v))
    }
}

impl Eq for Poset {}

fn trimmed(mut ws: Vec<u64>) -> Vec<u64> {
    while ws.last() == Some(&0) {
        ws.pop();
    }
    ws
}

impl Poset {
    /// Builds a poset from strict down-sets given as id lists. The relation is
    /// validated: irreflexive, antisymmetric, transitive.
    pub fn from_strict_down(size: usize, sdown: &[Vec<usize>]) -> Result<Poset> {
        if sdown.len() != size {
            return Err(Error::SizeMismatch {
                expected: size,
                got: sdown.len(),
            });
        }
        let mut sets = Vec::with_capacity(size);
        for (v, ids) in sdown.iter().enumerate() {
            let mut s = NodeSet::new(size);
            for &u in ids {
                if u >= size {
                    return Err(Error::IndexOutOfRange { index: u, size });
                }
                if u == v {
                    return Err(Error::InvalidModel(format!(
                        "element {v} listed strictly below itself"
                    )));
                }
                s.insert(u);
            }
            sets.push(s);
        }
        for v in 0..size {
            for u in sets[v].iter() {
                if sets[u].contains(v) {
                    return Err(Error::InvalidModel(format!("cycle between {u} and {v}")));
                }
                if !sets[u].is_subset(&sets[v]) {
                    return Err(Error::InvalidModel(format!(
                        "relation not transitive below {v} (via {u})"
                    )));
                }
            }
        }
        Ok(Self::from_sets_unchecked(
            sets.into_iter()
                .map(|s| trimmed(s.words().to_vec()))
                .collect(),
        ))
    }

    /// Builds the poset generated by a cover relation `(lo, hi)`.
    pub fn from_pairs(size: usize, pairs: &[(usize, usize)]) -> Result<Poset> {
        let mut sets: Vec<NodeSet> = (0..size).map(|_| NodeSet::new(size)).collect();
        for &(lo, hi) in pairs {
            if lo >= size || hi >= size {
                return Err(Error::IndexOutOfRange {
                    index: lo.max(hi),
                    size,
                });
            }
            sets[hi].insert(lo);
        }
        // transitive closure
        loop {
            let mut changed = false;
            for v in 0..size {
                let mut acc = sets[v].clone();
                for u in sets[v].iter() {
                    acc.union_with(&sets[u]);
                }
                if acc != sets[v] {
                    sets[v] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let lists: Vec<Vec<usize>> = sets.iter().map(|s| s.to_vec()).collect();
        Self::from_strict_down(size, &lists)
    }

    /// Trusted constructor: `sdown[v]` must already be a transitive, acyclic
    /// strict down-map given as truncated word vectors.
    pub(crate) fn from_sets_unchecked(sdown: Vec<Vec<u64>>) -> Poset {
        let size = sdown.len();
        let mut sdown_off = Vec::with_capacity(size + 1);
        let mut flat = Vec::new();
        sdown_off.push(0);
        for ws in sdown {
            flat.extend(trimmed(ws));
            sdown_off.push(flat.len());
        }
        let mut p = Poset {
            size,
            rank: vec![0; size],
            sdown_off,
            sdown: flat,
            lower_off: Vec::new(),
            lower: Vec::new(),
            upper_off: Vec::new(),
            upper: Vec::new(),
            nonmax: NodeSet::new(size),
            up_slot: vec![u32::MAX; size],
            up_cache: Vec::new(),
        };
        p.derive();
        p
    }

    /// Appends elements whose strict down-sets lie among existing elements or
    /// earlier appended ones.
    pub(crate) fn extended(&self, extra: Vec<Vec<u64>>) -> Poset {
        let mut all: Vec<Vec<u64>> = (0..self.size)
            .map(|v| self.strict_down_words(v).to_vec())
            .collect();
        all.extend(extra);
        Self::from_sets_unchecked(all)
    }

    fn derive(&mut self) {
        let size = self.size;
        // ranks: process in an order where predecessors come first
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by_key(|&v| self.strict_down_count(v));
        for &v in &order {
            let r = self
                .strict_down_iter(v)
                .map(|u| self.rank[u] + 1)
                .max()
                .unwrap_or(0);
            self.rank[v] = r;
        }
        // lower covers: maximal members of the strict down-set
        let mut lower_off = Vec::with_capacity(size + 1);
        let mut lower = Vec::new();
        lower_off.push(0);
        let mut scratch: Vec<u64> = Vec::new();
        for v in 0..size {
            let sd = self.strict_down_words(v);
            scratch.clear();
            scratch.resize(sd.len(), 0);
            for u in ones(sd) {
                for (a, b) in scratch.iter_mut().zip(self.strict_down_words(u)) {
                    *a |= b;
                }
            }
            for (i, &w) in sd.iter().enumerate() {
                let mut m = w & !scratch[i];
                while m != 0 {
                    lower.push(((i << 6) + m.trailing_zeros() as usize) as u32);
                    m &= m - 1;
                }
            }
            lower_off.push(lower.len());
        }
        // upper covers
        let mut deg = vec![0usize; size + 1];
        for &u in &lower {
            deg[u as usize + 1] += 1;
        }
        for i in 0..size {
            deg[i + 1] += deg[i];
        }
        let mut upper = vec![0u32; lower.len()];
        let mut fill = deg.clone();
        for v in 0..size {
            for &u in &lower[lower_off[v]..lower_off[v + 1]] {
                upper[fill[u as usize]] = v as u32;
                fill[u as usize] += 1;
            }
        }
        self.lower_off = lower_off;
        self.lower = lower;
        self.upper_off = deg;
        self.upper = upper;
        let mut nonmax = NodeSet::new(size);
        for v in 0..size {
            if self.upper_off[v + 1] > self.upper_off[v] {
                nonmax.insert(v);
            }
        }
        // up-set cache for non-maximal elements
        let nm = nonmax.count();
        let wl = words_for(size);
        if nm > 0 && nm.saturating_mul(wl) <= UP_CACHE_WORD_BUDGET {
            let mut cache = vec![0u64; nm * wl];
            for (slot, x) in nonmax.iter().enumerate() {
                self.up_slot[x] = slot as u32;
            }
            for v in 0..size {
                for u in ones(self.strict_down_words(v)) {
                    let slot = self.up_slot[u] as usize;
                    cache[slot * wl + (v >> 6)] |= 1u64 << (v & 63);
                }
            }
            self.up_cache = cache;
        } else {
            self.up_slot = vec![u32::MAX; size];
        }
        self.nonmax = nonmax;
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn rank(&self, v: usize) -> u32 {
        self.rank[v]
    }

    pub fn max_rank(&self) -> u32 {
        self.rank.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn strict_down_words(&self, v: usize) -> &[u64] {
        &self.sdown[self.sdown_off[v]..self.sdown_off[v + 1]]
    }

    pub fn strict_down_iter(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        ones(self.strict_down_words(v))
    }

    pub fn strict_down_count(&self, v: usize) -> usize {
        self.strict_down_words(v)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    /// Reflexive down-set of `v`.
    pub fn down(&self, v: usize) -> NodeSet {
        let mut s = NodeSet::new(self.size);
        s.or_prefix_words(self.strict_down_words(v));
        s.insert(v);
        s
    }

    /// Reflexive up-set of `v`.
    pub fn up(&self, v: usize) -> NodeSet {
        let mut s = NodeSet::new(self.size);
        s.insert(v);
        self.up_closure_in_place(&mut s);
        s
    }

    #[inline]
    pub fn leq(&self, u: usize, v: usize) -> bool {
        if u == v {
            return true;
        }
        let ws = self.strict_down_words(v);
        let i = u >> 6;
        i < ws.len() && ws[i] >> (u & 63) & 1 == 1
    }

    pub fn lower_covers(&self, v: usize) -> &[u32] {
        &self.lower[self.lower_off[v]..self.lower_off[v + 1]]
    }

    pub fn upper_covers(&self, v: usize) -> &[u32] {
        &self.upper[self.upper_off[v]..self.upper_off[v + 1]]
    }

    pub fn cover_count(&self) -> usize {
        self.lower.len()
    }

    pub fn is_maximal(&self, v: usize) -> bool {
        !self.nonmax.contains(v)
    }

    fn check(&self, s: &NodeSet) -> Result<()> {
        if s.len() != self.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                got: s.len(),
            });
        }
        Ok(())
    }

    pub fn down_closure(&self, s: &NodeSet) -> Result<NodeSet> {
        self.check(s)?;
        let mut r = s.clone();
        for v in s.iter() {
            r.or_prefix_words(self.strict_down_words(v));
        }
        Ok(r)
    }

    pub fn up_closure(&self, s: &NodeSet) -> Result<NodeSet> {
        self.check(s)?;
        let mut r = s.clone();
        self.up_closure_in_place(&mut r);
        Ok(r)
    }

    pub(crate) fn up_closure_in_place(&self, r: &mut NodeSet) {
        let wl = words_for(self.size);
        if !self.up_cache.is_empty() {
            // only the minimal non-maximal members contribute new elements
            let seeds: Vec<usize> = r
                .words()
                .iter()
                .zip(self.nonmax.words())
                .enumerate()
                .flat_map(|(i, (a, b))| word_ones(i, a & b))
                .collect();
            for &x in &seeds {
                if seeds.iter().any(|&y| y != x && self.leq(y, x)) {
                    continue;
                }
                let slot = self.up_slot[x] as usize;
                r.or_prefix_words(&self.up_cache[slot * wl..(slot + 1) * wl]);
            }
            return;
        }
        let mut stack: Vec<usize> = r.iter().collect();
        while let Some(v) = stack.pop() {
            for &u in self.upper_covers(v) {
                let u = u as usize;
                if !r.contains(u) {
                    r.insert(u);
                    stack.push(u);
                }
            }
        }
    }

    pub fn is_downset(&self, s: &NodeSet) -> Result<bool> {
        self.check(s)?;
        Ok(s.iter()
            .all(|v| s.contains_prefix_words(self.strict_down_words(v))))
    }

    pub fn extremal(&self, s: &NodeSet, mode: Extremal) -> Result<NodeSet> {
        self.check(s)?;
        Ok(match mode {
            Extremal::Min => {
                let mut r = NodeSet::new(self.size);
                for v in s.iter() {
                    if !s.meets_prefix_words(self.strict_down_words(v)) {
                        r.insert(v);
                    }
                }
                r
            }
            Extremal::Max => {
                let mut below = NodeSet::new(self.size);
                for v in s.iter() {
                    below.or_prefix_words(self.strict_down_words(v));
                }
                s.difference(&below)
            }
        })
    }

    /// A linear extension: rank ascending, ties by id.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.size).collect();
        order.sort_by_key(|&v| (self.rank[v], v));
        order
    }

    /// Streams every downset once, in lexicographic order over the linear
    /// extension (exclusion before inclusion). The stream yields an error and
    /// stops once more than `cap` sets would be produced.
    pub fn downsets(&self, cap: Option<u64>) -> Downsets<'_> {
        Downsets {
            poset: self,
            order: self.linear_extension(),
            cur: NodeSet::new(self.size),
            stack: Vec::new(),
            started: false,
            done: false,
            yielded: 0,
            cap,
        }
    }

    /// Visits every downset without allocating per set.
    pub fn for_each_downset<F: FnMut(&NodeSet)>(&self, cap: Option<u64>, mut f: F) -> Result<u64> {
        let mut it = self.downsets(cap);
        let mut n = 0;
        while it.advance()? {
            f(&it.cur);
            n += 1;
        }
        Ok(n)
    }

    /// Counts downsets accepted by `filter` without materializing them.
    pub fn count_downsets<F: FnMut(&NodeSet) -> bool>(
        &self,
        cap: Option<u64>,
        mut filter: F,
    ) -> Result<u64> {
        let mut it = self.downsets(cap);
        let mut n = 0;
        while it.advance()? {
            if filter(&it.cur) {
                n += 1;
            }
        }
        Ok(n)
    }
}

pub(crate) fn ones(ws: &[u64]) -> impl Iterator<Item = usize> + '_ {
    ws.iter().enumerate().flat_map(|(i, &w)| word_ones(i, w))
}

#[inline]
fn word_ones(i: usize, mut w: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if w == 0 {
            None
        } else {
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some((i << 6) + b)
        }
    })
}

const EXCLUDED: u8 = 0;
const INCLUDED: u8 = 1;

pub struct Downsets<'a> {
    poset: &'a Poset,
    order: Vec<usize>,
    cur: NodeSet,
    stack: Vec<u8>,
    started: bool,
    done: bool,
    yielded: u64,
    cap: Option<u64>,
}

impl Downsets<'_> {
    /// Moves to the next downset; `Ok(false)` once exhausted.
    pub fn advance(&mut self) -> Result<bool> {
        if self.done {
            return Ok(false);
        }
        let found = if !self.started {
            self.started = true;
            self.stack.resize(self.order.len(), EXCLUDED);
            true
        } else {
            self.backtrack()
        };
        if !found {
            self.done = true;
            return Ok(false);
        }
        self.yielded += 1;
        if let Some(cap) = self.cap {
            if self.yielded > cap {
                self.done = true;
                return Err(Error::CapExceeded(cap as usize));
            }
        }
        Ok(true)
    }

    fn backtrack(&mut self) -> bool {
        while let Some(&state) = self.stack.last() {
            let k = self.stack.len() - 1;
            let x = self.order[k];
            if state == INCLUDED {
                self.cur.remove(x);
                self.stack.pop();
                continue;
            }
            if self
                .cur
                .contains_prefix_words(self.poset.strict_down_words(x))
            {
                self.stack[k] = INCLUDED;
                self.cur.insert(x);
                self.stack.resize(self.order.len(), EXCLUDED);
                return true;
            }
            self.stack.pop();
        }
        false
    }

    pub fn current(&self) -> &NodeSet {
        &self.cur
    }
}

impl Iterator for Downsets<'_> {
    type Item = Result<NodeSet>;

    fn next(&mut self) -> Option<Result<NodeSet>> {
        match self.advance() {
            Ok(true) => Some(Ok(self.cur.clone())),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        }
    }
}
