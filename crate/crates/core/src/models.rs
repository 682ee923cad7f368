//! Arbitrary finite Kripke models: reduction and embedding into the
//! universal model.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::{self, Frame, ModelDoc};
use crate::nodeset::NodeSet;
use crate::poset::Poset;
use crate::universal::UniversalModel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteKripkeModel {
    n: usize,
    poset: Poset,
    val: Vec<u32>,
}

impl Frame for FiniteKripkeModel {
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

impl FiniteKripkeModel {
    /// Checks that valuations use only `p1..pn` and shrink going up.
    pub fn new(n: usize, poset: Poset, val: Vec<u32>) -> Result<FiniteKripkeModel> {
        if val.len() != poset.size() {
            return Err(Error::SizeMismatch {
                expected: poset.size(),
                got: val.len(),
            });
        }
        if n < 32 {
            if let Some(v) = val.iter().find(|&&v| v >> n != 0) {
                return Err(Error::VariableOutOfRange {
                    index: 32 - v.leading_zeros() as usize,
                    n,
                });
            }
        }
        let m = FiniteKripkeModel { n, poset, val };
        if let Some(v) = frame::monotonicity_violations(&m).first() {
            return Err(Error::InvalidModel(format!(
                "valuation not monotone: {v:?}"
            )));
        }
        Ok(m)
    }

    /// A model from cover pairs `(lower, upper)`.
    pub fn from_pairs(
        n: usize,
        size: usize,
        pairs: &[(usize, usize)],
        val: Vec<u32>,
    ) -> Result<Self> {
        Self::new(n, Poset::from_pairs(size, pairs)?, val)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.poset.size()
    }

    pub fn val(&self, v: usize) -> u32 {
        self.val[v]
    }

    pub fn rank(&self) -> usize {
        self.poset.max_rank() as usize
    }

    pub fn to_doc(&self) -> ModelDoc {
        frame::to_doc(self, None)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("model document serializes")
    }

    pub fn from_doc(doc: &ModelDoc) -> Result<Self> {
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
        Self::new(doc.n, Poset::from_strict_down(size, &sdown)?, val)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))?;
        Self::from_doc(&doc)
    }

    /// `frame` extended by one point above exactly the nodes of `below`,
    /// which must be downward closed.
    pub fn with_new_top<F: Frame + ?Sized>(frame: &F, below: &NodeSet, val: u32) -> Result<Self> {
        let p = frame.poset();
        if !p.is_downset(below)? {
            return Err(Error::Precondition(
                "new point must sit above a downset".into(),
            ));
        }
        let mut ws = below.words().to_vec();
        while ws.last() == Some(&0) {
            ws.pop();
        }
        let poset = p.extended(vec![ws]);
        let mut vals: Vec<u32> = (0..p.size()).map(|v| frame.valuation(v)).collect();
        vals.push(val);
        Self::new(frame.n_vars(), poset, vals)
    }
}

pub fn is_reduced<F: Frame + ?Sized>(m: &F) -> bool {
    frame::reduction_violations(m).is_empty()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub model: FiniteKripkeModel,
    /// Old point to the point that now represents it.
    pub map: Vec<usize>,
}

/// Identifies duplicates and deletes points repeating their only
/// predecessor, until neither applies.
pub fn reduce_model(m: &FiniteKripkeModel) -> Reduction {
    let size = m.size();
    let mut alive = vec![true; size];
    let mut rep: Vec<usize> = (0..size).collect();
    let mut sdown: Vec<NodeSet> = (0..size)
        .map(|v| NodeSet::from_words(size, m.poset.strict_down_words(v).to_vec()))
        .collect();
    loop {
        let mut changed = false;
        // identification
        let mut seen: HashMap<(u32, NodeSet), usize> = HashMap::new();
        for v in 0..size {
            if !alive[v] {
                continue;
            }
            match seen.get(&(m.val[v], sdown[v].clone())) {
                Some(&u) => {
                    alive[v] = false;
                    rep[v] = u;
                    for s in sdown.iter_mut() {
                        if s.contains(v) {
                            s.remove(v);
                            s.insert(u);
                        }
                    }
                    changed = true;
                }
                None => {
                    seen.insert((m.val[v], sdown[v].clone()), v);
                }
            }
        }
        // deletion, one point at a time
        loop {
            let victim = (0..size).filter(|&v| alive[v]).find_map(|v| {
                let covers: Vec<usize> = sdown[v]
                    .iter()
                    .filter(|&u| !sdown[v].iter().any(|x| sdown[x].contains(u)))
                    .collect();
                match covers[..] {
                    [u] if m.val[u] == m.val[v] => Some((v, u)),
                    _ => None,
                }
            });
            let Some((v, u)) = victim else { break };
            alive[v] = false;
            rep[v] = u;
            for s in sdown.iter_mut() {
                s.remove(v);
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let mut new_id = vec![usize::MAX; size];
    let kept: Vec<usize> = (0..size).filter(|&v| alive[v]).collect();
    for (i, &v) in kept.iter().enumerate() {
        new_id[v] = i;
    }
    let resolve = |mut v: usize| {
        while !alive[v] {
            v = rep[v];
        }
        new_id[v]
    };
    let map: Vec<usize> = (0..size).map(resolve).collect();
    let lists: Vec<Vec<usize>> = kept
        .iter()
        .map(|&v| sdown[v].iter().map(|u| new_id[u]).collect())
        .collect();
    let poset =
        Poset::from_strict_down(kept.len(), &lists).expect("quotient stays a partial order");
    let val = kept.iter().map(|&v| m.val[v]).collect();
    Reduction {
        model: FiniteKripkeModel { n: m.n, poset, val },
        map,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub mapping: Vec<usize>,
}

/// Maps a reduced model onto an initial segment of `target`, rank by rank.
pub fn embed_reduced<F: Frame + ?Sized>(m: &F, target: &UniversalModel) -> Result<Embedding> {
    if let Some(v) = frame::reduction_violations(m).first() {
        return Err(Error::NotReduced(format!("{v:?}")));
    }
    if m.n_vars() != target.n() {
        return Err(Error::Precondition(format!(
            "model has {} variables, target {}",
            m.n_vars(),
            target.n()
        )));
    }
    let p = m.poset();
    let rank = p.max_rank() as usize;
    if p.size() > 0 && rank > target.depth() {
        return Err(Error::DepthInsufficient {
            have: target.depth(),
            need: rank,
        });
    }
    let mut mapping = vec![usize::MAX; p.size()];
    for v in p.linear_extension() {
        let y = NodeSet::from_ids(target.size(), p.strict_down_iter(v).map(|u| mapping[u]));
        mapping[v] = target
            .lookup(m.valuation(v), &y)
            .ok_or_else(|| Error::Invariant(format!("no node of the target matches point {v}")))?;
    }
    let e = Embedding { mapping };
    verify_embedding(m, target, &e)?;
    Ok(e)
}

/// Injective, order embedding both ways, valuation preserving, downward
/// closed image.
pub fn verify_embedding<F: Frame + ?Sized>(
    m: &F,
    target: &UniversalModel,
    e: &Embedding,
) -> Result<()> {
    let p = m.poset();
    let tp = target.poset();
    let img = NodeSet::from_ids(target.size(), e.mapping.iter().copied());
    if img.count() != p.size() {
        return Err(Error::Invariant("embedding is not injective".into()));
    }
    for u in 0..p.size() {
        if m.valuation(u) != target.val(e.mapping[u]) {
            return Err(Error::Invariant(format!("valuation differs at point {u}")));
        }
        for v in 0..p.size() {
            if p.leq(u, v) != tp.leq(e.mapping[u], e.mapping[v]) {
                return Err(Error::Invariant(format!(
                    "order differs between {u} and {v}"
                )));
            }
        }
    }
    if !tp.is_downset(&img)? {
        return Err(Error::Invariant("image is not an initial segment".into()));
    }
    Ok(())
}

/// A seeded random model: random lower covers among earlier points, then
/// valuations assigned from the top down, each point inheriting everything
/// forced above it.
pub fn random_model(n: usize, size: usize, seed: u64) -> FiniteKripkeModel {
    let size = size.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for v in 1..size {
        for u in 0..v {
            if rng.gen_bool(0.3) {
                pairs.push((u, v));
            }
        }
    }
    valuate(n, size, &pairs, &mut rng)
}

/// Like [`random_model`], with points spread over `max_rank + 1` layers and
/// edges only going to higher layers, so the rank stays at most `max_rank`.
pub fn random_model_of_rank(
    n: usize,
    size: usize,
    max_rank: usize,
    seed: u64,
) -> FiniteKripkeModel {
    let size = size.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layer: Vec<usize> = (0..size).map(|_| rng.gen_range(0..=max_rank)).collect();
    layer.sort_unstable();
    let mut pairs = Vec::new();
    for v in 1..size {
        for u in 0..v {
            if layer[u] < layer[v] && rng.gen_bool(0.4) {
                pairs.push((u, v));
            }
        }
    }
    valuate(n, size, &pairs, &mut rng)
}

fn valuate(
    n: usize,
    size: usize,
    pairs: &[(usize, usize)],
    rng: &mut ChaCha8Rng,
) -> FiniteKripkeModel {
    let poset = Poset::from_pairs(size, pairs).expect("edges go upward in id order");
    let mut val = vec![0u32; size];
    for v in (0..size).rev() {
        let mut b = 0u32;
        for i in 0..n {
            if rng.gen_bool(0.3) {
                b |= 1 << i;
            }
        }
        for w in v + 1..size {
            if poset.leq(v, w) {
                b |= val[w];
            }
        }
        val[v] = b;
    }
    FiniteKripkeModel::new(n, poset, val).expect("monotone by construction")
}
