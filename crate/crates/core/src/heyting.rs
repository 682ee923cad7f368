//! The downset algebra of a universal model: operations, irreducibles,
//! supports, duality, definability and subalgebra closures.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::nodeset::NodeSet;
use crate::poset::Extremal;
use crate::universal::UniversalModel;

/// A downward closed node set of a universal model.
#[derive(Clone)]
pub struct Element {
    ambient: Arc<UniversalModel>,
    bits: NodeSet,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        same_ambient(&self.ambient, &other.ambient) && self.bits == other.bits
    }
}

impl Eq for Element {}

impl std::hash::Hash for Element {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.bits.hash(state)
    }
}

impl std::fmt::Debug for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Element{:?}", self.bits)
    }
}

/// Universal models are canonical, so equal `(n, depth)` means equal models.
fn same_ambient(a: &UniversalModel, b: &UniversalModel) -> bool {
    std::ptr::eq(a, b) || (a.n() == b.n() && a.depth() == b.depth())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinOp {
    Meet,
    Join,
    Impl,
    /// `x − y`: the least `z` with `x ⊑ y ⊔ z`.
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IrreducibilityFlags {
    pub completely_join: bool,
    pub meet: bool,
    pub join_filtering: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Principal set to co-principal set.
    Cap,
    /// Co-principal set to principal set.
    Cup,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuppMin {
    pub nodes: NodeSet,
    /// Some minimal node lies on the top level, where deeper ambients may
    /// place further minimal nodes above the truncation.
    pub touches_top: bool,
}

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    ambient: AmbientRef,
    bits: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientRef {
    pub n: usize,
    pub depth: usize,
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementDoc {
            ambient: AmbientRef {
                n: self.ambient.n(),
                depth: self.ambient.depth(),
            },
            bits: self.bits.to_vec(),
        }
        .serialize(s)
    }
}

impl Element {
    /// Fails unless `bits` is downward closed in the ambient.
    pub fn new(ambient: Arc<UniversalModel>, bits: NodeSet) -> Result<Element> {
        if !ambient.poset().is_downset(&bits)? {
            return Err(Error::Precondition(
                "node set is not downward closed".into(),
            ));
        }
        Ok(Element { ambient, bits })
    }

    pub(crate) fn new_unchecked(ambient: Arc<UniversalModel>, bits: NodeSet) -> Element {
        debug_assert_eq!(bits.len(), ambient.size());
        Element { ambient, bits }
    }

    /// Reads a serialized element back against `ambient`.
    pub fn from_ids(ambient: Arc<UniversalModel>, ids: &[usize]) -> Result<Element> {
        let size = ambient.size();
        if let Some(&bad) = ids.iter().find(|&&i| i >= size) {
            return Err(Error::IndexOutOfRange { index: bad, size });
        }
        let bits = NodeSet::from_ids(size, ids.iter().copied());
        Element::new(ambient, bits)
    }

    pub fn bottom(ambient: Arc<UniversalModel>) -> Element {
        let bits = NodeSet::new(ambient.size());
        Element { ambient, bits }
    }

    pub fn top(ambient: Arc<UniversalModel>) -> Element {
        let bits = NodeSet::full(ambient.size());
        Element { ambient, bits }
    }

    /// `w↓`.
    pub fn principal(ambient: Arc<UniversalModel>, w: usize) -> Result<Element> {
        ambient.check_node(w)?;
        let bits = ambient.poset().down(w);
        Ok(Element { ambient, bits })
    }

    /// The complement of `w↑`.
    pub fn coprincipal(ambient: Arc<UniversalModel>, w: usize) -> Result<Element> {
        ambient.check_node(w)?;
        let bits = ambient.poset().up(w).complement();
        Ok(Element { ambient, bits })
    }

    /// The downset generated by `nodes`.
    pub fn generated(ambient: Arc<UniversalModel>, nodes: &NodeSet) -> Result<Element> {
        let bits = ambient.poset().down_closure(nodes)?;
        Ok(Element { ambient, bits })
    }

    /// Nodes of rank at most `i`.
    pub fn level(ambient: Arc<UniversalModel>, i: usize) -> Element {
        let bits = ambient.level_index(i);
        Element { ambient, bits }
    }

    pub fn ambient(&self) -> &Arc<UniversalModel> {
        &self.ambient
    }

    pub fn bits(&self) -> &NodeSet {
        &self.bits
    }

    pub fn into_bits(self) -> NodeSet {
        self.bits
    }

    pub fn is_bottom(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_top(&self) -> bool {
        self.bits.count() == self.ambient.size()
    }

    fn same(&self, other: &Element) -> Result<()> {
        if same_ambient(&self.ambient, &other.ambient) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    fn with(&self, bits: NodeSet) -> Element {
        Element {
            ambient: self.ambient.clone(),
            bits,
        }
    }

    pub fn leq(&self, other: &Element) -> Result<bool> {
        self.same(other)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    pub fn meet(&self, other: &Element) -> Result<Element> {
        self.same(other)?;
        Ok(self.with(self.bits.intersection(&other.bits)))
    }

    pub fn join(&self, other: &Element) -> Result<Element> {
        self.same(other)?;
        Ok(self.with(self.bits.union(&other.bits)))
    }

    /// `self → other`.
    pub fn implies(&self, other: &Element) -> Result<Element> {
        self.same(other)?;
        Ok(self.with(impl_bits(&self.ambient, &self.bits, &other.bits)))
    }

    /// `self − other`.
    pub fn minus(&self, other: &Element) -> Result<Element> {
        self.same(other)?;
        let d = self.bits.difference(&other.bits);
        Ok(self.with(self.ambient.poset().down_closure(&d)?))
    }

    pub fn neg(&self) -> Element {
        let zero = NodeSet::new(self.ambient.size());
        self.with(impl_bits(&self.ambient, &self.bits, &zero))
    }

    pub fn binary(&self, op: BinOp, other: &Element) -> Result<Element> {
        match op {
            BinOp::Meet => self.meet(other),
            BinOp::Join => self.join(other),
            BinOp::Impl => self.implies(other),
            BinOp::Minus => self.minus(other),
        }
    }

    /// Maximal nodes of the set.
    pub fn maximal_nodes(&self) -> NodeSet {
        self.ambient
            .poset()
            .extremal(&self.bits, Extremal::Max)
            .expect("width matches ambient")
    }

    /// Minimal nodes outside the set.
    pub fn minimal_outside(&self) -> NodeSet {
        self.ambient
            .poset()
            .extremal(&self.bits.complement(), Extremal::Min)
            .expect("width matches ambient")
    }

    pub fn classify_irreducible(&self) -> IrreducibilityFlags {
        let mut f = IrreducibilityFlags::default();
        if !self.is_bottom() {
            let single_max = self.maximal_nodes().count() == 1;
            f.completely_join = single_max;
            // in a finite set, two maximal nodes never have a common upper bound
            f.join_filtering = single_max;
        }
        if !self.is_top() {
            f.meet = self.minimal_outside().count() == 1;
        }
        f
    }

    /// The nodes of the set, each standing for its principal set.
    pub fn supp_join(&self) -> NodeSet {
        self.bits.clone()
    }

    /// The co-principal sets above the element, named by their nodes.
    pub fn supp_meet(&self) -> NodeSet {
        self.bits.complement()
    }

    pub fn supp_meet_min(&self) -> SuppMin {
        let nodes = self.minimal_outside();
        let top_start = self
            .ambient
            .level_end(self.ambient.depth().saturating_sub(1));
        let touches_top = if self.ambient.depth() == 0 {
            !nodes.is_empty()
        } else {
            nodes.iter_range(top_start, nodes.len()).next().is_some()
        };
        SuppMin { nodes, touches_top }
    }

    /// Regards the node ids as an element of a deeper (or equal) ambient.
    /// Valid only for ambients built from the same `n`.
    pub fn reread(&self, ambient: Arc<UniversalModel>) -> Result<Element> {
        if ambient.n() != self.ambient.n() || ambient.depth() < self.ambient.depth() {
            return Err(Error::AmbientMismatch);
        }
        Ok(Element {
            bits: self.bits.resized(ambient.size()),
            ambient,
        })
    }

    /// Intersection with the nodes of rank at most `i`, read in `target`.
    pub fn project(&self, target: Arc<UniversalModel>) -> Result<Element> {
        if target.n() != self.ambient.n() || target.depth() > self.ambient.depth() {
            return Err(Error::AmbientMismatch);
        }
        Ok(Element {
            bits: self.bits.resized(target.size()),
            ambient: target,
        })
    }
}

pub(crate) fn impl_bits(m: &UniversalModel, a: &NodeSet, b: &NodeSet) -> NodeSet {
    let mut bad = a.difference(b);
    m.poset().up_closure_in_place(&mut bad);
    bad.complement()
}

pub fn heyting_binary(op: BinOp, a: &Element, b: &Element) -> Result<Element> {
    a.binary(op, b)
}

/// Whether the minimal meet-support of `op(a, b)` is what the support rules
/// predict from the supports of `a` and `b`.
pub fn suppmin_rule_check(op: BinOp, a: &Element, b: &Element) -> Result<bool> {
    let direct = a.binary(op, b)?.supp_meet_min().nodes;
    let (sa, sb) = (a.supp_meet(), b.supp_meet());
    let rhs = match op {
        BinOp::Join => sa.intersection(&sb),
        BinOp::Meet => sa.union(&sb),
        BinOp::Impl => sb.difference(&sa),
        BinOp::Minus => {
            return Err(Error::Precondition(
                "no support rule for the difference".into(),
            ))
        }
    };
    let predicted = a.ambient.poset().extremal(&rhs, Extremal::Min)?;
    Ok(predicted == direct)
}

/// Principal sets to co-principal sets (`x → x⁻`) and back (`x⁺ − x`).
pub fn dual_map(x: &Element, dir: Direction) -> Result<Element> {
    // each direction needs only one flag; the other costs a pass over the set
    match dir {
        Direction::Cap => {
            if x.is_bottom() || x.maximal_nodes().count() != 1 {
                return Err(Error::Precondition("cap needs a principal set".into()));
            }
            let w = x
                .maximal_nodes()
                .first()
                .expect("principal set is nonempty");
            let mut pred = x.bits.clone();
            pred.remove(w);
            x.implies(&x.with(pred))
        }
        Direction::Cup => {
            if x.is_top() || x.minimal_outside().count() != 1 {
                return Err(Error::Precondition("cup needs a co-principal set".into()));
            }
            let w = x
                .minimal_outside()
                .first()
                .expect("co-principal set is proper");
            let mut succ = x.bits.clone();
            succ.insert(w);
            x.with(succ).minus(x)
        }
    }
}

/// The singleton sets of rank-0 nodes, and for each variable the one whose
/// node has exactly that variable (index `i-1` for `p{i}`).
pub fn atoms_and_pregenerators(m: &Arc<UniversalModel>) -> (Vec<Element>, Vec<Element>) {
    let atoms: Vec<Element> = (0..m.level_end(0))
        .map(|v| Element::principal(m.clone(), v).expect("rank-0 node"))
        .collect();
    let pregen = (0..m.n())
        .map(|i| atoms[pregenerator_node(i + 1)].clone())
        .collect();
    (atoms, pregen)
}

/// Rank-0 node ids coincide with their valuation bitmaps.
pub(crate) fn pregenerator_node(i: usize) -> usize {
    1 << (i - 1)
}

/// Upper covers of every node in `lower` whose lower covers are exactly `lower`.
fn exclusive_successors(m: &UniversalModel, lower: &[usize]) -> usize {
    let p = m.poset();
    p.upper_covers(lower[0])
        .iter()
        .filter(|&&u| {
            let lc = p.lower_covers(u as usize);
            lc.len() == lower.len() && lower.iter().all(|&l| lc.contains(&(l as u32)))
        })
        .count()
}

fn check_var(m: &UniversalModel, i: usize) -> Result<()> {
    if i == 0 || i > m.n() {
        return Err(Error::VariableOutOfRange { index: i, n: m.n() });
    }
    if m.depth() < 1 {
        return Err(Error::DepthInsufficient { have: 0, need: 1 });
    }
    Ok(())
}

/// Nodes of rank below the depth that have a private successor and either lie
/// above the `p{i}` pre-generator node or share two exclusive successors with it.
pub fn definable_generator_support(i: usize, m: &UniversalModel) -> Result<NodeSet> {
    check_var(m, i)?;
    let a = pregenerator_node(i);
    let p = m.poset();
    let mut out = NodeSet::new(m.size());
    for v in 0..m.level_end(m.depth() - 1) {
        let private = p
            .upper_covers(v)
            .iter()
            .any(|&u| p.lower_covers(u as usize).len() == 1);
        if !private {
            continue;
        }
        if p.leq(a, v) || exclusive_successors(m, &[v, a]) >= 2 {
            out.insert(v);
        }
    }
    Ok(out)
}

/// Atoms that are the `p{i}` pre-generator or share two exclusive
/// successors with it.
pub fn b_i_atom_set(i: usize, m: &Arc<UniversalModel>) -> Result<Vec<Element>> {
    check_var(m, i)?;
    let a = pregenerator_node(i);
    let mut out = Vec::new();
    for v in 0..m.level_end(0) {
        if v == a || exclusive_successors(m, &[v, a]) >= 2 {
            out.push(Element::principal(m.clone(), v)?);
        }
    }
    Ok(out)
}

/// Closure of `gens ∪ {0, 1}` under meet, join and implication. Fails once
/// more than `cap` elements appear.
///
/// Read the generators as propositional variables on the ambient; the
/// closure is then the family of definable sets, which are exactly the
/// downsets saturated by the largest bisimulation. The quotient by that
/// bisimulation is a reduced model, and every principal set of a reduced
/// model is definable, so the elements are enumerated as preimages of the
/// downsets of the quotient.
pub fn subalgebra_closure(gens: &[Element], cap: usize) -> Result<Vec<Element>> {
    let Some(first) = gens.first() else {
        return Err(Error::Precondition(
            "closure needs at least one generator".into(),
        ));
    };
    let m = first.ambient.clone();
    for g in gens {
        first.same(g)?;
    }
    let p = m.poset();
    let size = m.size();
    let (class, k) = bisimulation_classes(&m, gens);
    let mut members = vec![Vec::new(); k];
    for (v, &c) in class.iter().enumerate() {
        members[c as usize].push(v);
    }
    let mut pairs = Vec::new();
    for w in 0..size {
        for &u in p.lower_covers(w) {
            let (cu, cw) = (class[u as usize], class[w]);
            if cu != cw {
                pairs.push((cu as usize, cw as usize));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let q = crate::poset::Poset::from_pairs(k, &pairs)?;
    let mut out = Vec::new();
    q.for_each_downset(Some(cap as u64), |d| {
        let bits = NodeSet::from_ids(size, d.iter().flat_map(|c| members[c].iter().copied()));
        out.push(Element::new_unchecked(m.clone(), bits));
    })?;
    Ok(out)
}

/// Classes of the largest bisimulation when the generators are read as
/// variables: nodes agree on membership and see the same classes below.
fn bisimulation_classes(m: &UniversalModel, gens: &[Element]) -> (Vec<u32>, usize) {
    let p = m.poset();
    let size = m.size();
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut class: Vec<u32> = (0..size)
        .map(|v| {
            let key: Vec<u32> = gens
                .iter()
                .enumerate()
                .filter(|(_, g)| g.bits.contains(v))
                .map(|(i, _)| i as u32)
                .collect();
            let next = ids.len() as u32;
            *ids.entry(key).or_insert(next)
        })
        .collect();
    let mut k = ids.len();
    loop {
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let next_class: Vec<u32> = (0..size)
            .map(|w| {
                let mut key: Vec<u32> = p.strict_down_iter(w).map(|u| class[u]).collect();
                key.push(class[w]);
                key.sort_unstable();
                key.dedup();
                key.insert(0, class[w]);
                let next = ids.len() as u32;
                *ids.entry(key).or_insert(next)
            })
            .collect();
        class = next_class;
        if ids.len() == k {
            return (class, k);
        }
        k = ids.len();
    }
}

/// [`subalgebra_closure`] by a worklist over all pairs, in generation
/// order. Quadratic in the size of the closure.
pub fn subalgebra_closure_worklist(gens: &[Element], cap: usize) -> Result<Vec<Element>> {
    let Some(first) = gens.first() else {
        return Err(Error::Precondition(
            "closure needs at least one generator".into(),
        ));
    };
    let m = first.ambient.clone();
    for g in gens {
        first.same(g)?;
    }
    let mut items: Vec<NodeSet> = Vec::new();
    let mut index: HashSet<NodeSet> = HashSet::new();
    let mut push = |s: NodeSet, items: &mut Vec<NodeSet>| -> Result<()> {
        if index.insert(s.clone()) {
            items.push(s);
            if items.len() > cap {
                return Err(Error::CapExceeded(cap));
            }
        }
        Ok(())
    };
    push(NodeSet::new(m.size()), &mut items)?;
    push(NodeSet::full(m.size()), &mut items)?;
    for g in gens {
        push(g.bits.clone(), &mut items)?;
    }
    let mut i = 0;
    while i < items.len() {
        for j in 0..=i {
            let (x, y) = (items[i].clone(), items[j].clone());
            push(x.intersection(&y), &mut items)?;
            push(x.union(&y), &mut items)?;
            push(impl_bits(&m, &x, &y), &mut items)?;
            push(impl_bits(&m, &y, &x), &mut items)?;
        }
        i += 1;
    }
    Ok(items
        .into_iter()
        .map(|b| Element::new_unchecked(m.clone(), b))
        .collect())
}

/// `¬¬S` for every set `S` of rank-0 nodes, in the numeric order of `S`.
pub fn regular_elements(m: &Arc<UniversalModel>) -> Vec<Element> {
    let k = m.level_end(0);
    (0u64..1 << k)
        .map(|mask| {
            let s = NodeSet::from_ids(m.size(), (0..k).filter(|&v| mask >> v & 1 == 1));
            Element::new_unchecked(m.clone(), s).neg().neg()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub elements: usize,
    pub meet_irreducibles: usize,
    /// `w ↦` complement of `w↑` is a bijection onto the meet-irreducibles
    /// that preserves and reflects the order.
    pub isomorphic: bool,
    /// Distinct basic sets `{m meet-irreducible : a ⋢ m}`.
    pub basic_sets: usize,
    pub downsets: u64,
    /// Every basic set is a downset and every downset is a basic set.
    pub topology_matches: bool,
    /// `p_j` holds at `w` iff the generator for `p_j` is not below the
    /// co-principal set of `w`.
    pub valuation_recovered: bool,
}

impl SpectrumReport {
    pub fn passed(&self) -> bool {
        self.isomorphic && self.topology_matches && self.valuation_recovered
    }
}

/// Rebuilds the model from the lattice alone: enumerates every element,
/// finds the meet-irreducibles, and compares them with the nodes.
pub fn spectrum_check(m: &Arc<UniversalModel>, cap: u64) -> Result<SpectrumReport> {
    let p = m.poset();
    let size = m.size();
    let mut all = Vec::new();
    p.for_each_downset(Some(cap), |s| all.push(s.clone()))?;

    // meet-irreducibles, keyed by the unique minimal node outside
    let mut irr: HashMap<usize, NodeSet> = HashMap::new();
    let mut isomorphic = true;
    for a in &all {
        if a.count() == size {
            continue;
        }
        let mins = p.extremal(&a.complement(), Extremal::Min)?;
        if mins.count() == 1 {
            let w = mins.first().unwrap();
            if irr.insert(w, a.clone()).is_some() {
                isomorphic = false;
            }
        }
    }
    if irr.len() != size {
        isomorphic = false;
    }
    let irr_list: Vec<NodeSet> = (0..size)
        .map(|w| irr.get(&w).cloned().unwrap_or_else(|| NodeSet::new(size)))
        .collect();
    for v in 0..size {
        if irr_list[v] != p.up(v).complement() {
            isomorphic = false;
        }
        for w in 0..size {
            if irr_list[v].is_subset(&irr_list[w]) != p.leq(v, w) {
                isomorphic = false;
            }
        }
    }

    let mut basic: HashSet<NodeSet> = HashSet::new();
    let mut topology_matches = true;
    for a in &all {
        let s = NodeSet::from_ids(size, (0..size).filter(|&w| !a.is_subset(&irr_list[w])));
        if !p.is_downset(&s)? {
            topology_matches = false;
        }
        basic.insert(s);
    }
    let downsets = p.count_downsets(Some(cap), |_| true)?;
    if basic.len() as u64 != downsets {
        topology_matches = false;
    }

    let mut valuation_recovered = true;
    for j in 0..m.n() {
        let g = NodeSet::from_ids(size, (0..size).filter(|&v| m.val(v) >> j & 1 == 1));
        for w in 0..size {
            let holds = m.val(w) >> j & 1 == 1;
            if holds != !g.is_subset(&irr_list[w]) {
                valuation_recovered = false;
            }
        }
    }
    Ok(SpectrumReport {
        elements: all.len(),
        meet_irreducibles: irr.len(),
        isomorphic,
        basic_sets: basic.len(),
        downsets,
        topology_matches,
        valuation_recovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universal::{build_universal, Limits};

    fn model(n: usize, d: usize) -> Arc<UniversalModel> {
        Arc::new(build_universal(n, d, &Limits::default()).unwrap())
    }

    #[test]
    fn basic_identities() {
        let m = model(1, 2);
        let one = Element::top(m.clone());
        let zero = Element::bottom(m.clone());
        let a = Element::principal(m.clone(), 2).unwrap();
        assert!(a.implies(&a).unwrap().is_top());
        assert_eq!(one.implies(&a).unwrap(), a);
        assert!(zero.neg().is_top());
        assert!(one.neg().is_bottom());
    }

    #[test]
    fn negation_on_level_zero() {
        let m = model(1, 0);
        let p = Element::principal(m.clone(), 1).unwrap();
        assert_eq!(p.neg().bits().to_vec(), vec![0]);
    }

    #[test]
    fn irreducible_flags() {
        let m = model(2, 1);
        let w = 10;
        let f = Element::principal(m.clone(), w)
            .unwrap()
            .classify_irreducible();
        assert!(f.completely_join && f.join_filtering);
        assert!(
            Element::coprincipal(m.clone(), w)
                .unwrap()
                .classify_irreducible()
                .meet
        );
        let u = Element::principal(m.clone(), 0)
            .unwrap()
            .join(&Element::principal(m.clone(), 1).unwrap())
            .unwrap();
        assert_eq!(u.classify_irreducible(), IrreducibilityFlags::default());
    }

    #[test]
    fn supports() {
        let m = model(2, 1);
        assert!(Element::top(m.clone()).supp_meet_min().nodes.is_empty());
        assert_eq!(
            Element::bottom(m.clone()).supp_meet_min().nodes.to_vec(),
            vec![0, 1, 2, 3]
        );
        let b1 = Element::coprincipal(m.clone(), 1).unwrap();
        let b2 = Element::coprincipal(m.clone(), 2).unwrap();
        for op in [BinOp::Join, BinOp::Meet, BinOp::Impl] {
            assert!(suppmin_rule_check(op, &b1, &b2).unwrap());
            assert!(suppmin_rule_check(op, &Element::bottom(m.clone()), &b2).unwrap());
        }
    }

    #[test]
    fn duality_small() {
        let m = model(1, 2);
        for w in 0..m.size() {
            let a = Element::principal(m.clone(), w).unwrap();
            let c = dual_map(&a, Direction::Cap).unwrap();
            assert_eq!(c, Element::coprincipal(m.clone(), w).unwrap());
            assert_eq!(dual_map(&c, Direction::Cup).unwrap(), a);
        }
        assert!(dual_map(&Element::bottom(m.clone()), Direction::Cap).is_err());
    }

    #[test]
    fn pregenerators() {
        let (atoms, pre) = atoms_and_pregenerators(&model(2, 0));
        assert_eq!((atoms.len(), pre.len()), (4, 2));
        let (atoms, pre) = atoms_and_pregenerators(&model(1, 0));
        assert_eq!((atoms.len(), pre.len()), (2, 1));
        assert!(atoms.iter().all(|a| a.supp_join().count() == 1));
    }

    #[test]
    fn closure_of_bottom() {
        let m = model(1, 1);
        let c = subalgebra_closure(&[Element::bottom(m.clone())], 10).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn closure_agrees_with_worklist() {
        let m = model(1, 3);
        let sets = |c: Vec<Element>| c.into_iter().map(|e| e.into_bits()).collect::<HashSet<_>>();
        for gens in [vec![1], vec![0], vec![2, 3], vec![4]] {
            let g: Vec<Element> = gens
                .iter()
                .map(|&v| Element::principal(m.clone(), v).unwrap())
                .collect();
            let fast = subalgebra_closure(&g, 1000).unwrap();
            let slow = subalgebra_closure_worklist(&g, 1000).unwrap();
            assert_eq!(fast.len(), slow.len());
            assert_eq!(sets(fast), sets(slow));
        }
        let m = model(2, 1);
        let g: Vec<Element> = (0..2)
            .map(|v| Element::coprincipal(m.clone(), v).unwrap())
            .collect();
        assert_eq!(
            sets(subalgebra_closure(&g, 5000).unwrap()),
            sets(subalgebra_closure_worklist(&g, 5000).unwrap())
        );
        let g = vec![
            Element::principal(m.clone(), 3).unwrap(),
            Element::coprincipal(m.clone(), 5).unwrap(),
        ];
        assert_eq!(
            sets(subalgebra_closure(&g, 5000).unwrap()),
            sets(subalgebra_closure_worklist(&g, 5000).unwrap())
        );
        assert!(matches!(
            subalgebra_closure(&g, 3),
            Err(Error::CapExceeded(3))
        ));
    }

    #[test]
    fn regular_counts() {
        assert_eq!(regular_elements(&model(1, 2)).len(), 4);
        let r = regular_elements(&model(2, 1));
        let distinct: HashSet<_> = r.iter().cloned().collect();
        assert_eq!(distinct.len(), 16);
        assert!(r.iter().all(|x| x.neg().neg() == *x));
    }

    #[test]
    fn spectrum_small() {
        let r = spectrum_check(&model(1, 2), 1 << 20).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
