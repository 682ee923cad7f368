use std::cmp::Ordering;
use std::fmt;

/// Dense membership bitmap over the elements `0..len` of a poset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    len: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl NodeSet {
    pub fn new(len: usize) -> Self {
        NodeSet {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = NodeSet {
            len,
            words: vec![!0; words_for(len)],
        };
        s.trim();
        s
    }

    /// The set `{0, .., k-1}`.
    pub fn prefix(len: usize, k: usize) -> Self {
        let mut s = NodeSet::new(len);
        let k = k.min(len);
        let full = k / 64;
        for w in &mut s.words[..full] {
            *w = !0;
        }
        if !k.is_multiple_of(64) {
            s.words[full] = (1u64 << (k % 64)) - 1;
        }
        s
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(len: usize, ids: I) -> Self {
        let mut s = NodeSet::new(len);
        for i in ids {
            s.insert(i);
        }
        s
    }

    pub(crate) fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut s = NodeSet { len, words };
        s.trim();
        s
    }

    fn trim(&mut self) {
        if !self.len.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "node {i} outside set of width {}", self.len);
        self.words[i >> 6] |= 1u64 << (i & 63);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        if i < self.len {
            self.words[i >> 6] &= !(1u64 << (i & 63));
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of members with index in `lo..hi`.
    pub fn count_range(&self, lo: usize, hi: usize) -> usize {
        self.iter_range(lo, hi).count()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> Ones<'_> {
        self.iter_range(0, self.len)
    }

    pub fn iter_range(&self, lo: usize, hi: usize) -> Ones<'_> {
        let hi = hi.min(self.len);
        let lo = lo.min(hi);
        let wi = lo >> 6;
        let cur = if wi < self.words.len() {
            self.words[wi] & (!0u64 << (lo & 63))
        } else {
            0
        };
        Ones {
            words: &self.words,
            wi,
            cur,
            hi,
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &NodeSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &NodeSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut r = self.clone();
        r.union_with(other);
        r
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let mut r = self.clone();
        r.intersect_with(other);
        r
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let mut r = self.clone();
        r.difference_with(other);
        r
    }

    pub fn complement(&self) -> NodeSet {
        let mut r = NodeSet {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        r.trim();
        r
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &NodeSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// OR a word slice (a truncated bitmap starting at index 0) into this set.
    #[inline]
    pub(crate) fn or_prefix_words(&mut self, ws: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(ws) {
            *a |= b;
        }
    }

    /// Whether the truncated bitmap `ws` is contained in this set.
    #[inline]
    pub(crate) fn contains_prefix_words(&self, ws: &[u64]) -> bool {
        ws.iter()
            .enumerate()
            .all(|(i, b)| b & !self.words.get(i).copied().unwrap_or(0) == 0)
    }

    #[inline]
    pub(crate) fn meets_prefix_words(&self, ws: &[u64]) -> bool {
        ws.iter().zip(&self.words).any(|(b, a)| a & b != 0)
    }

    /// Re-read the same ids in a wider (or narrower) universe.
    pub fn resized(&self, len: usize) -> NodeSet {
        NodeSet::from_words(len, self.words.clone())
    }

    /// Bit-string order over ids: index 0 is compared first, absent sorts before present.
    pub fn cmp_bits(&self, other: &NodeSet) -> Ordering {
        cmp_word_bits(&self.words, &other.words)
    }
}

pub(crate) fn cmp_word_bits(a: &[u64], b: &[u64]) -> Ordering {
    let n = a.len().max(b.len());
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        if x != y {
            let bit = (x ^ y).trailing_zeros();
            return if y >> bit & 1 == 1 {
                Ordering::Less
            } else {
                Ordering::Greater
            };
        }
    }
    Ordering::Equal
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    wi: usize,
    cur: u64,
    hi: usize,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let i = (self.wi << 6) + self.cur.trailing_zeros() as usize;
                if i >= self.hi {
                    return None;
                }
                self.cur &= self.cur - 1;
                return Some(i);
            }
            self.wi += 1;
            if self.wi >= self.words.len() || self.wi << 6 >= self.hi {
                return None;
            }
            self.cur = self.words[self.wi];
        }
    }
}
