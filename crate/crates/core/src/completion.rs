//! Elements of the profinite completion as compatible families of
//! truncations, and the combinatorics of extending a truncation upward.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decide::{decide, DecideOptions, Verdict};
use crate::error::{Error, Result};
use crate::formula::{eval_formula, parse_formula, Evaluator, Formula};
use crate::frame::Frame;
use crate::heyting::{AmbientRef, BinOp, Element};
use crate::nodeset::NodeSet;
use crate::poset::Extremal;
use crate::universal::{build_universal, submasks, Limits, UniversalModel};

/// The models `K_n^0, K_n^1, ...`, built on demand and shared.
pub struct ModelTower {
    n: usize,
    limits: Limits,
    levels: Mutex<Vec<Arc<UniversalModel>>>,
}

impl ModelTower {
    pub fn new(n: usize, limits: Limits) -> Result<Arc<ModelTower>> {
        let base = build_universal(n, 0, &limits)?;
        Ok(Arc::new(ModelTower {
            n,
            limits,
            levels: Mutex::new(vec![Arc::new(base)]),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    /// `K_n^i`.
    pub fn get(&self, i: usize) -> Result<Arc<UniversalModel>> {
        let mut levels = self.levels.lock().expect("tower lock");
        while levels.len() <= i {
            let next = levels.last().unwrap().extend_level(&self.limits)?;
            levels.push(Arc::new(next));
        }
        Ok(levels[i].clone())
    }

    /// Like [`ModelTower::get`], but `None` when the level is out of reach.
    pub fn reachable(&self, i: usize) -> Result<Option<Arc<UniversalModel>>> {
        match self.get(i) {
            Ok(m) => Ok(Some(m)),
            Err(e) if e.is_resource() || matches!(e, Error::Precondition(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// The first level containing node `id`.
    fn level_of(&self, id: usize) -> Result<Arc<UniversalModel>> {
        let mut i = 0;
        loop {
            let m = self.get(i)?;
            if id < m.size() {
                return Ok(m);
            }
            i += 1;
        }
    }
}

#[derive(Clone, Debug)]
pub enum Descriptor {
    /// A finite downset of `K_n`.
    Finite(Element),
    /// `K_n` minus the up-closure of these nodes (kept as an antichain).
    CoFinite(Vec<usize>),
    FormulaDefined(Arc<Formula>),
}

/// An element of the completion, given by a descriptor from which every
/// truncation can be computed.
pub struct ProfiniteApprox {
    tower: Arc<ModelTower>,
    descriptor: Descriptor,
    memo: Mutex<HashMap<usize, Element>>,
}

impl Clone for ProfiniteApprox {
    fn clone(&self) -> Self {
        ProfiniteApprox {
            tower: self.tower.clone(),
            descriptor: self.descriptor.clone(),
            memo: Mutex::new(self.memo.lock().expect("memo lock").clone()),
        }
    }
}

impl std::fmt::Debug for ProfiniteApprox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ProfiniteApprox(n={}, {:?})", self.n(), self.descriptor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Finite,
    Cofinite,
    Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Nodes {
        ambient: Option<AmbientRef>,
        nodes: Vec<usize>,
    },
    Formula(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxDoc {
    pub n: usize,
    pub kind: Kind,
    pub payload: Payload,
}

impl ProfiniteApprox {
    fn make(tower: &Arc<ModelTower>, descriptor: Descriptor) -> ProfiniteApprox {
        ProfiniteApprox {
            tower: tower.clone(),
            descriptor,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn finite(tower: &Arc<ModelTower>, a: Element) -> Result<ProfiniteApprox> {
        if a.ambient().n() != tower.n() {
            return Err(Error::AmbientMismatch);
        }
        Ok(Self::make(tower, Descriptor::Finite(a)))
    }

    /// `K_n` minus the up-closure of `nodes`.
    pub fn cofinite(tower: &Arc<ModelTower>, nodes: &[usize]) -> Result<ProfiniteApprox> {
        let nodes: BTreeSet<usize> = nodes.iter().copied().collect();
        let antichain = match nodes.last() {
            None => Vec::new(),
            Some(&mx) => {
                let m = tower.level_of(mx)?;
                let s = NodeSet::from_ids(m.size(), nodes.iter().copied());
                m.poset().extremal(&s, Extremal::Min)?.to_vec()
            }
        };
        Ok(Self::make(tower, Descriptor::CoFinite(antichain)))
    }

    pub fn formula(tower: &Arc<ModelTower>, f: Formula) -> Result<ProfiniteApprox> {
        let mx = f.max_var();
        if mx > tower.n() {
            return Err(Error::VariableOutOfRange {
                index: mx,
                n: tower.n(),
            });
        }
        Ok(Self::make(tower, Descriptor::FormulaDefined(Arc::new(f))))
    }

    pub fn n(&self) -> usize {
        self.tower.n()
    }

    pub fn tower(&self) -> &Arc<ModelTower> {
        &self.tower
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    /// The element read at level `i`.
    pub fn truncate(&self, i: usize) -> Result<Element> {
        if let Some(e) = self.memo.lock().expect("memo lock").get(&i) {
            return Ok(e.clone());
        }
        let m = self.tower.get(i)?;
        let e = match &self.descriptor {
            Descriptor::Finite(a) => {
                if i <= a.ambient().depth() {
                    a.project(m)?
                } else {
                    a.reread(m)?
                }
            }
            Descriptor::CoFinite(nodes) => {
                let seeds =
                    NodeSet::from_ids(m.size(), nodes.iter().copied().filter(|&v| v < m.size()));
                let bits = m.poset().up_closure(&seeds)?.complement();
                Element::new_unchecked(m, bits)
            }
            Descriptor::FormulaDefined(f) => {
                let bits = eval_formula(f, &*m)?;
                Element::new_unchecked(m, bits)
            }
        };
        // concurrent fills compute the same value
        self.memo.lock().expect("memo lock").insert(i, e.clone());
        Ok(e)
    }

    /// Combines two descriptors where the result is again describable.
    pub fn combine(&self, op: BinOp, other: &ProfiniteApprox) -> Result<ProfiniteApprox> {
        if self.n() != other.n() {
            return Err(Error::AmbientMismatch);
        }
        use Descriptor::*;
        let d = match (&self.descriptor, &other.descriptor) {
            (FormulaDefined(a), FormulaDefined(b)) => FormulaDefined(Arc::new(match op {
                BinOp::Meet => Formula::And(a.clone(), b.clone()),
                BinOp::Join => Formula::Or(a.clone(), b.clone()),
                BinOp::Impl => Formula::Imp(a.clone(), b.clone()),
                BinOp::Minus => {
                    return Err(Error::Undecidable(
                        "difference is not expressible by a formula".into(),
                    ))
                }
            })),
            (Finite(a), Finite(b)) if op != BinOp::Impl => {
                let depth = a.ambient().depth().max(b.ambient().depth());
                let m = self.tower.get(depth)?;
                Finite(a.reread(m.clone())?.binary(op, &b.reread(m)?)?)
            }
            (CoFinite(a), CoFinite(b)) if op == BinOp::Meet => {
                let all: Vec<usize> = a.iter().chain(b).copied().collect();
                return ProfiniteApprox::cofinite(&self.tower, &all);
            }
            _ => {
                return Err(Error::Undecidable(format!(
                    "{op:?} of these descriptors has no finite description"
                )))
            }
        };
        Ok(Self::make(&self.tower, d))
    }

    pub fn to_doc(&self) -> ApproxDoc {
        let (kind, payload) = match &self.descriptor {
            Descriptor::Finite(a) => (
                Kind::Finite,
                Payload::Nodes {
                    ambient: Some(AmbientRef {
                        n: a.ambient().n(),
                        depth: a.ambient().depth(),
                    }),
                    nodes: a.bits().to_vec(),
                },
            ),
            Descriptor::CoFinite(e) => (
                Kind::Cofinite,
                Payload::Nodes {
                    ambient: None,
                    nodes: e.clone(),
                },
            ),
            Descriptor::FormulaDefined(f) => (Kind::Formula, Payload::Formula(f.to_string())),
        };
        ApproxDoc {
            n: self.n(),
            kind,
            payload,
        }
    }

    pub fn from_doc(tower: &Arc<ModelTower>, doc: &ApproxDoc) -> Result<ProfiniteApprox> {
        if doc.n != tower.n() {
            return Err(Error::AmbientMismatch);
        }
        match (&doc.kind, &doc.payload) {
            (Kind::Finite, Payload::Nodes { ambient, nodes }) => {
                let depth = match ambient {
                    Some(r) => r.depth,
                    None => match nodes.iter().max() {
                        Some(&mx) => tower.level_of(mx)?.depth(),
                        None => 0,
                    },
                };
                let a = Element::from_ids(tower.get(depth)?, nodes)?;
                ProfiniteApprox::finite(tower, a)
            }
            (Kind::Cofinite, Payload::Nodes { nodes, .. }) => {
                ProfiniteApprox::cofinite(tower, nodes)
            }
            (Kind::Formula, Payload::Formula(s)) => {
                ProfiniteApprox::formula(tower, parse_formula(s)?)
            }
            _ => Err(Error::Precondition("payload does not match kind".into())),
        }
    }
}

/// `2^{-level}`, zero, or a bound when the truncations agree as far as
/// they were compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distance {
    /// First differing level.
    Exact {
        level: usize,
    },
    Zero,
    /// Equal on levels `0..=explored`.
    UpTo {
        explored: usize,
    },
}

impl Distance {
    /// Largest value consistent with the answer.
    pub fn upper(&self) -> f64 {
        match *self {
            Distance::Exact { level } => 0.5f64.powi(level as i32),
            Distance::Zero => 0.0,
            Distance::UpTo { explored } => 0.5f64.powi(explored as i32 + 1),
        }
    }

    /// Smallest value consistent with the answer.
    pub fn lower(&self) -> f64 {
        match *self {
            Distance::Exact { level } => 0.5f64.powi(level as i32),
            _ => 0.0,
        }
    }
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distance::Exact { level } => write!(f, "2^-{level}"),
            Distance::Zero => write!(f, "0"),
            Distance::UpTo { explored } => write!(f, "<= 2^-{}", explored + 1),
        }
    }
}

fn trimmed(s: &NodeSet) -> &[u64] {
    let ws = s.words();
    let end = ws.iter().rposition(|&w| w != 0).map_or(0, |i| i + 1);
    &ws[..end]
}

pub fn distance(x: &ProfiniteApprox, y: &ProfiniteApprox, max_depth: usize) -> Result<Distance> {
    if x.n() != y.n() {
        return Err(Error::AmbientMismatch);
    }
    match (&x.descriptor, &y.descriptor) {
        (Descriptor::Finite(a), Descriptor::Finite(b))
            if trimmed(a.bits()) == trimmed(b.bits()) =>
        {
            return Ok(Distance::Zero)
        }
        (Descriptor::CoFinite(a), Descriptor::CoFinite(b)) if a == b => return Ok(Distance::Zero),
        _ => {}
    }
    for i in 0..=max_depth {
        if x.tower.reachable(i)?.is_none() || y.tower.reachable(i)?.is_none() {
            return match i {
                0 => Err(Error::Precondition("level 0 out of reach".into())),
                _ => Ok(Distance::UpTo { explored: i - 1 }),
            };
        }
        if x.truncate(i)?.bits() != y.truncate(i)?.bits() {
            return Ok(Distance::Exact { level: i });
        }
    }
    Ok(Distance::UpTo {
        explored: max_depth,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionMode {
    Min,
    Max,
}

/// The least or greatest element of `target` whose truncation to the
/// level of `x` is `x`.
pub fn section(x: &Element, mode: SectionMode, target: Arc<UniversalModel>) -> Result<Element> {
    let i = x.ambient().depth();
    let low = x.reread(target.clone())?;
    match mode {
        SectionMode::Min => Ok(low),
        SectionMode::Max => Element::level(target, i).implies(&low),
    }
}

/// Whether the element is a finite node set.
pub fn is_isolated(x: &ProfiniteApprox) -> Result<bool> {
    match &x.descriptor {
        Descriptor::Finite(_) => Ok(true),
        Descriptor::CoFinite(e) => {
            let r = match e.iter().max() {
                Some(&mx) => x.tower.level_of(mx)?.depth(),
                None => 0,
            };
            downset_finiteness(x, r, true)
        }
        Descriptor::FormulaDefined(f) => {
            let opts = DecideOptions {
                depth: None,
                limits: *x.tower.limits(),
            };
            match decide(f, x.n(), &opts) {
                Ok(r) if r.verdict == Verdict::Valid => {
                    is_isolated(&ProfiniteApprox::cofinite(&x.tower, &[])?)
                }
                Ok(_) => downset_finiteness(x, usize::MAX, false),
                Err(e) if e.is_resource() => downset_finiteness(x, usize::MAX, false),
                Err(e) => Err(e),
            }
        }
    }
}

/// Explores levels until the downset stops growing (finite) or, from level
/// `grows_from` on, exhibits a pattern that repeats forever (infinite).
///
/// Above the ranks of the excluded nodes a co-finite set contains every
/// `w_{β,Y}` with `Y` inside it. If it has a top-rank node `z`, and nodes
/// `x < y` with `y, x ≰ z`, then `w_{∅,↓{z,x}}`, `w_{∅,↓{z,y}}` and `y`
/// form the same pattern one rank up, so the set meets every rank.
fn downset_finiteness(x: &ProfiniteApprox, grows_from: usize, use_pattern: bool) -> Result<bool> {
    let mut i = 0;
    while let Some(m) = x.tower.reachable(i)? {
        let d = x.truncate(i)?;
        let lo = if i == 0 { 0 } else { m.level_end(i - 1) };
        let top: Vec<usize> = d.bits().iter_range(lo, m.size()).collect();
        if top.is_empty() {
            return Ok(true);
        }
        if use_pattern && i >= grows_from && repeating_pattern(&m, d.bits(), &top) {
            return Ok(false);
        }
        i += 1;
    }
    Err(Error::Undecidable(format!(
        "no stabilization or growth certificate up to level {}",
        i.saturating_sub(1)
    )))
}

fn repeating_pattern(m: &UniversalModel, d: &NodeSet, top: &[usize]) -> bool {
    let p = m.poset();
    top.iter().any(|&z| {
        d.iter()
            .any(|y| !p.leq(y, z) && p.strict_down_iter(y).any(|x| d.contains(x) && !p.leq(x, z)))
    })
}

/// Counts of the downsets `x` with `x ∩ K_n^d = a` and `|x \ a| = k`, for
/// `k = 1..=kmax`, where `d` is the depth of `a`'s ambient. The new points
/// form a poset built rank by rank over `a`; only points with at most
/// `kmax` new points below them (inclusive) matter.
pub fn extension_counts(a: &Element, kmax: usize) -> Result<Vec<u64>> {
    ExtensionSpace::new(a, kmax)?.counts(None)
}

/// Number of `k`-extensions of `a`.
pub fn count_k_extensions(a: &Element, k: usize) -> Result<u64> {
    if k == 0 {
        return Ok(1);
    }
    Ok(extension_counts(a, k)?[k - 1])
}

const EXTENSION_BUDGET: u64 = 20_000_000;

/// Points above a truncation; ids `0..base` stand for the nodes of `a`.
struct ExtensionSpace {
    kmax: usize,
    base: usize,
    val: Vec<u32>,
    /// Strict down-sets as sorted local ids.
    below: Vec<Vec<usize>>,
    /// First local id of each new rank; the last entry ends the newest rank.
    rank_start: Vec<usize>,
    n: usize,
    work: u64,
}

impl ExtensionSpace {
    fn new(a: &Element, kmax: usize) -> Result<ExtensionSpace> {
        let m = a.ambient();
        let p = m.poset();
        let ids = a.bits().to_vec();
        let local: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let below = ids
            .iter()
            .map(|&v| p.strict_down_iter(v).map(|u| local[&u]).collect())
            .collect();
        let d = m.depth();
        let top_start = ids
            .iter()
            .position(|&v| p.rank(v) as usize == d)
            .unwrap_or(ids.len());
        Ok(ExtensionSpace {
            kmax,
            base: ids.len(),
            val: ids.iter().map(|&v| m.val(v)).collect(),
            below,
            rank_start: vec![top_start, ids.len()],
            n: m.n(),
            work: 0,
        })
    }

    fn tick(&mut self) -> Result<()> {
        self.work += 1;
        if self.work > EXTENSION_BUDGET {
            return Err(Error::CapExceeded(EXTENSION_BUDGET as usize));
        }
        Ok(())
    }

    fn leq(&self, u: usize, v: usize) -> bool {
        u == v || self.below[v].binary_search(&u).is_ok()
    }

    /// Adds the next rank of new points; returns how many were added.
    fn grow(&mut self) -> Result<usize> {
        let len = self.val.len();
        let lo = self.rank_start[self.rank_start.len() - 2];
        let mut ys = Vec::new();
        let mut inside = vec![false; len];
        self.downsets(0, &mut inside, 0, lo, &mut ys)?;
        let mut added = 0;
        for y in ys {
            let ymax: Vec<usize> = y
                .iter()
                .copied()
                .filter(|&u| !y.iter().any(|&v| v != u && self.leq(u, v)))
                .collect();
            let common = ymax
                .iter()
                .fold((1u32 << self.n) - 1, |acc, &z| acc & self.val[z]);
            let principal = (ymax.len() == 1).then(|| self.val[ymax[0]]);
            for beta in submasks(common) {
                if principal == Some(beta) {
                    continue;
                }
                self.tick()?;
                self.val.push(beta);
                self.below.push(y.clone());
                added += 1;
            }
        }
        self.rank_start.push(self.val.len());
        Ok(added)
    }

    /// Downsets of the current points that contain a point of the newest
    /// rank and at most `kmax - 1` new points.
    fn downsets(
        &mut self,
        i: usize,
        inside: &mut Vec<bool>,
        new_count: usize,
        newest: usize,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        self.tick()?;
        if i == inside.len() {
            if (newest..inside.len()).any(|v| inside[v]) {
                out.push((0..inside.len()).filter(|&v| inside[v]).collect());
            }
            return Ok(());
        }
        self.downsets(i + 1, inside, new_count, newest, out)?;
        let is_new = i >= self.base;
        if (!is_new || new_count + 1 < self.kmax) && self.below[i].iter().all(|&u| inside[u]) {
            inside[i] = true;
            self.downsets(i + 1, inside, new_count + usize::from(is_new), newest, out)?;
            inside[i] = false;
        }
        Ok(())
    }

    /// Extension counts for sizes `1..=kmax`; stops after the first size
    /// when `stop_at` is reached by that count.
    fn counts(&mut self, stop_at: Option<u64>) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; self.kmax];
        if self.kmax == 0 {
            return Ok(counts);
        }
        let c1 = self.grow()?;
        counts[0] = c1 as u64;
        if c1 == 0 || stop_at.is_some_and(|s| c1 as u64 >= s) {
            return Ok(counts);
        }
        for _ in 1..self.kmax {
            if self.grow()? == 0 {
                break;
            }
        }
        counts.iter_mut().for_each(|c| *c = 0);
        let mut inside = vec![false; self.val.len()];
        let first = self.base;
        self.count_sets(first, &mut inside, 0, &mut counts)?;
        Ok(counts)
    }

    fn count_sets(
        &mut self,
        i: usize,
        inside: &mut Vec<bool>,
        size: usize,
        counts: &mut [u64],
    ) -> Result<()> {
        self.tick()?;
        if size > 0 {
            counts[size - 1] += 1;
        }
        if size == self.kmax {
            return Ok(());
        }
        for v in i..inside.len() {
            if self.below[v].iter().all(|&u| u < self.base || inside[u]) {
                inside[v] = true;
                self.count_sets(v + 1, inside, size + 1, counts)?;
                inside[v] = false;
            }
        }
        Ok(())
    }
}

/// The three cases of the Cantor–Bendixson analysis of a truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CbClass {
    /// No `k`-extension for this `k`.
    A {
        k: usize,
    },
    /// Exactly two `k`-extensions for every `k ≤ kmax`.
    B {
        kmax: usize,
    },
    /// At least three 1-extensions.
    C {
        one_extensions: u64,
    },
    Unknown {
        counts: Vec<u64>,
    },
}

pub fn cb_classify(a: &Element, kmax: usize) -> Result<CbClass> {
    if kmax == 0 {
        return Err(Error::Precondition("kmax must be positive".into()));
    }
    let counts = ExtensionSpace::new(a, kmax)?.counts(Some(3))?;
    if counts[0] >= 3 {
        return Ok(CbClass::C {
            one_extensions: counts[0],
        });
    }
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Ok(CbClass::A { k: k + 1 });
    }
    if counts.iter().all(|&c| c == 2) {
        return Ok(CbClass::B { kmax });
    }
    Ok(CbClass::Unknown { counts })
}

/// `m` pairwise incomparable nodes of `K_n`, taken from the first level
/// with enough nodes.
pub fn find_antichain(tower: &ModelTower, m: usize, depth_cap: usize) -> Result<Vec<usize>> {
    if tower.n() < 2 {
        return Err(Error::Precondition("needs at least two variables".into()));
    }
    for i in 0..=depth_cap {
        let model = match tower.reachable(i)? {
            Some(x) => x,
            None => break,
        };
        let lo = if i == 0 { 0 } else { model.level_end(i - 1) };
        if model.size() - lo >= m {
            return Ok((lo..lo + m).collect());
        }
    }
    Err(Error::DepthInsufficient {
        have: depth_cap,
        need: depth_cap + 1,
    })
}

/// A common upper bound of two nodes inside an element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpperBound {
    Node {
        id: usize,
    },
    /// `w_{β,Y}` one level above the materialized model.
    Virtual {
        val: u32,
        generators: Vec<usize>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteringReport {
    pub depth: usize,
    pub elements: usize,
    pub pairs: usize,
    pub witnesses: Vec<(usize, usize, UpperBound)>,
    pub failures: Vec<(usize, usize)>,
    /// Finite elements are decided outright; otherwise the answer concerns
    /// nodes of rank at most `depth`.
    pub exact: bool,
}

impl FilteringReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that any two nodes of rank below `depth` in `x` have a common
/// upper bound in `x` of rank at most `depth`. At most `samples` pairs are
/// drawn (all of them when there are fewer).
pub fn filtering_check(
    x: &ProfiniteApprox,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<FilteringReport> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be positive".into()));
    }
    let base = x.tower.get(depth - 1)?;
    let s = x.truncate(depth - 1)?;
    let nodes = s.bits().to_vec();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let total = nodes.len() * (nodes.len() + 1) / 2;
    if total <= samples {
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i..] {
                pairs.push((u, v));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let u = *nodes.choose(&mut rng).unwrap();
            let v = *nodes.choose(&mut rng).unwrap();
            pairs.push((u.min(v), u.max(v)));
        }
    }
    let mut r = FilteringReport {
        depth,
        elements: nodes.len(),
        pairs: pairs.len(),
        exact: matches!(x.descriptor, Descriptor::Finite(_)),
        ..Default::default()
    };
    let mut ev = Evaluator::new(&*base);
    for (u, v) in pairs {
        match upper_bound(x, &base, s.bits(), u, v, &mut ev)? {
            Some(b) => r.witnesses.push((u, v, b)),
            None => r.failures.push((u, v)),
        }
    }
    Ok(r)
}

fn upper_bound(
    x: &ProfiniteApprox,
    base: &Arc<UniversalModel>,
    s: &NodeSet,
    u: usize,
    v: usize,
    ev: &mut Evaluator<UniversalModel>,
) -> Result<Option<UpperBound>> {
    let p = base.poset();
    if p.leq(u, v) {
        return Ok(Some(UpperBound::Node { id: v }));
    }
    if p.leq(v, u) {
        return Ok(Some(UpperBound::Node { id: u }));
    }
    // new points over ↓{u,v}, possibly enlarged by one more node of x
    let pair = p.down(u).union(&p.down(v));
    let extras = std::iter::once(None).chain(s.iter().filter(|&y| !pair.contains(y)).map(Some));
    for extra in extras {
        let mut y = pair.clone();
        if let Some(e) = extra {
            y.union_with(&p.down(e));
        }
        let ymax = p.extremal(&y, Extremal::Max)?;
        let common = ymax.iter().fold(!0u32, |acc, z| acc & base.val(z));
        let rank = ymax.iter().map(|z| p.rank(z) as usize).max().unwrap() + 1;
        for beta in submasks(common & ((1u32 << base.n()) - 1)) {
            if rank <= base.depth() {
                let id = base.lookup(beta, &y).ok_or_else(|| {
                    Error::Invariant("admissible node missing from the model".into())
                })?;
                if s.contains(id) {
                    return Ok(Some(UpperBound::Node { id }));
                }
            } else if virtual_member(x, base, s, &y, beta, ev)? {
                return Ok(Some(UpperBound::Virtual {
                    val: beta,
                    generators: ymax.to_vec(),
                }));
            }
        }
    }
    Ok(None)
}

/// Whether `w_{β,Y}` one level above `base` lies in `x`; `s` is `x` read in
/// `base`.
fn virtual_member(
    x: &ProfiniteApprox,
    base: &UniversalModel,
    s: &NodeSet,
    y: &NodeSet,
    beta: u32,
    ev: &mut Evaluator<UniversalModel>,
) -> Result<bool> {
    if !y.is_subset(s) {
        return Ok(false);
    }
    match &x.descriptor {
        Descriptor::Finite(_) => Ok(false),
        // excluded nodes of higher rank cannot be below a point of this rank
        Descriptor::CoFinite(e) => Ok(e.iter().all(|&z| z < base.size())),
        Descriptor::FormulaDefined(f) => holds_on_top(f, ev, y, beta),
    }
}

/// Truth of `f` at a point with valuation `beta` placed over the downset
/// `y`, from the denotations of its subformulas on the base.
fn holds_on_top(
    f: &Arc<Formula>,
    ev: &mut Evaluator<UniversalModel>,
    y: &NodeSet,
    beta: u32,
) -> Result<bool> {
    Ok(match &**f {
        Formula::Bot => false,
        Formula::Var(i) => beta >> (i - 1) & 1 == 1,
        Formula::And(a, b) => holds_on_top(a, ev, y, beta)? && holds_on_top(b, ev, y, beta)?,
        Formula::Or(a, b) => holds_on_top(a, ev, y, beta)? || holds_on_top(b, ev, y, beta)?,
        Formula::Imp(a, b) => {
            if holds_on_top(a, ev, y, beta)? && !holds_on_top(b, ev, y, beta)? {
                false
            } else {
                let (da, db) = (ev.eval_arc(a)?, ev.eval_arc(b)?);
                y.intersection(&da).is_subset(&db)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tower(n: usize) -> Arc<ModelTower> {
        ModelTower::new(n, Limits::default()).unwrap()
    }

    #[test]
    fn truncations() {
        let t = tower(1);
        let p1 = ProfiniteApprox::formula(&t, Formula::var(1)).unwrap();
        for i in 0..4 {
            let m = t.get(i).unwrap();
            let e = p1.truncate(i).unwrap();
            assert!(e.bits().iter().all(|v| m.val(v) == 1));
            assert_eq!(
                e.bits().count(),
                (0..m.size()).filter(|&v| m.val(v) == 1).count()
            );
        }
        let m2 = t.get(2).unwrap();
        let co = ProfiniteApprox::cofinite(&t, &[2]).unwrap();
        assert_eq!(
            co.truncate(2).unwrap(),
            Element::coprincipal(m2, 2).unwrap()
        );
    }

    #[test]
    fn distances() {
        let t = tower(1);
        let p1 = ProfiniteApprox::formula(&t, Formula::var(1)).unwrap();
        let top = ProfiniteApprox::formula(&t, Formula::top()).unwrap();
        assert_eq!(
            distance(&p1, &top, 4).unwrap(),
            Distance::Exact { level: 0 }
        );
        assert_eq!(
            distance(&p1, &p1, 4).unwrap(),
            Distance::UpTo { explored: 4 }
        );
        // one variable: the generator is a single atom
        let a = ProfiniteApprox::finite(&t, p1.truncate(0).unwrap()).unwrap();
        assert_eq!(
            distance(&a, &p1, 6).unwrap(),
            Distance::UpTo { explored: 6 }
        );
        let t = tower(2);
        let p1 = ProfiniteApprox::formula(&t, Formula::var(1)).unwrap();
        for d in 0..2 {
            let a = ProfiniteApprox::finite(&t, p1.truncate(d).unwrap()).unwrap();
            assert_eq!(
                distance(&a, &p1, 4).unwrap(),
                Distance::Exact { level: d + 1 }
            );
        }
    }

    #[test]
    fn max_section_of_the_generator_atom() {
        let t = tower(1);
        let x = Element::from_ids(t.get(0).unwrap(), &[1]).unwrap();
        let s = section(&x, SectionMode::Max, t.get(2).unwrap()).unwrap();
        // the regular element above the atom, not the generator itself
        let nn = ProfiniteApprox::formula(&t, Formula::not(Formula::not(Formula::var(1)))).unwrap();
        assert_eq!(s, nn.truncate(2).unwrap());
        assert_eq!(s.bits().to_vec(), vec![1, 2]);
    }

    #[test]
    fn isolation() {
        let t = tower(2);
        assert!(!is_isolated(&ProfiniteApprox::cofinite(&t, &[0]).unwrap()).unwrap());
        assert!(!is_isolated(&ProfiniteApprox::formula(&t, Formula::top()).unwrap()).unwrap());
        assert!(is_isolated(&ProfiniteApprox::cofinite(&t, &[0, 1, 2, 3]).unwrap()).unwrap());
        let t1 = tower(1);
        // in one variable the co-principal sets are finite
        assert!(is_isolated(&ProfiniteApprox::cofinite(&t1, &[0]).unwrap()).unwrap());
        assert!(!is_isolated(&ProfiniteApprox::formula(&t1, Formula::top()).unwrap()).unwrap());
    }

    #[test]
    fn ladder_extensions() {
        let t = tower(1);
        for d in 0..3 {
            let m = t.get(d).unwrap();
            let full = Element::top(m);
            assert_eq!(extension_counts(&full, 6).unwrap(), vec![2; 6]);
            assert_eq!(cb_classify(&full, 6).unwrap(), CbClass::B { kmax: 6 });
        }
        let m = t.get(0).unwrap();
        assert_eq!(
            cb_classify(&Element::bottom(m), 6).unwrap(),
            CbClass::A { k: 1 }
        );
    }

    #[test]
    fn level_zero_of_two_variables() {
        let t = tower(2);
        let m = t.get(0).unwrap();
        assert_eq!(count_k_extensions(&Element::top(m.clone()), 1).unwrap(), 18);
        assert!(matches!(
            cb_classify(&Element::top(m), 6).unwrap(),
            CbClass::C { .. }
        ));
    }

    #[test]
    fn truth_on_a_new_top_matches_an_explicit_model() {
        use crate::formula::random_formula;
        use crate::models::FiniteKripkeModel;
        let base = build_universal(2, 1, &Limits::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ev = Evaluator::new(&base);
        for _ in 0..60 {
            let f = Arc::new(random_formula(&mut rng, 2, 3, 8));
            let ids: Vec<usize> = (0..3)
                .map(|_| rand::Rng::gen_range(&mut rng, 0..base.size()))
                .collect();
            let y = base
                .poset()
                .down_closure(&NodeSet::from_ids(base.size(), ids))
                .unwrap();
            let ymax = base.poset().extremal(&y, Extremal::Max).unwrap();
            let common = ymax.iter().fold(3u32, |acc, z| acc & base.val(z));
            for beta in submasks(common) {
                if ymax.count() == 1 && base.val(ymax.first().unwrap()) == beta {
                    continue;
                }
                let m = FiniteKripkeModel::with_new_top(&base, &y, beta).unwrap();
                let want = eval_formula(&f, &m).unwrap().contains(base.size());
                assert_eq!(holds_on_top(&f, &mut ev, &y, beta).unwrap(), want, "{f}");
            }
        }
    }

    #[test]
    fn antichains() {
        let t = tower(2);
        assert_eq!(find_antichain(&t, 4, 2).unwrap(), vec![0, 1, 2, 3]);
        let a = find_antichain(&t, 10, 2).unwrap();
        let m = t.get(2).unwrap();
        for &u in &a {
            for &v in &a {
                assert!(u == v || !m.poset().leq(u, v));
            }
        }
    }
}
