//! Reproducible experiments on the finite algebras, each producing a report
//! with witnesses and a pass/fail verdict.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::completion::{cb_classify, extension_counts, CbClass};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::heyting::{
    b_i_atom_set, definable_generator_support, spectrum_check, subalgebra_closure, Element,
    SpectrumReport,
};
use crate::nodeset::NodeSet;
use crate::poset::Extremal;
use crate::universal::{build_universal, Limits, UniversalModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub n: usize,
    pub d: usize,
    /// Depth of the ambient the closures are computed in (`d + 1`).
    pub ambient_depth: usize,
    pub principal_closure: usize,
    pub coprincipal_closure: usize,
    /// Rank `d+1` nodes with the same strict down-set and different valuations.
    pub pair: (usize, usize),
    /// Some element generated by principal sets of rank ≤ d separates the pair.
    pub principal_separates: bool,
    /// A node of rank ≤ d+1 whose co-principal set separates the pair.
    pub coprincipal_separator: Option<usize>,
    /// Every element of the co-principal closure lies in the principal closure.
    pub lower_inclusion: bool,
    /// `Zre w = Erz w → ⊔_{v<w} Erz v` for every node of rank ≤ d.
    pub coprincipal_identity: bool,
    /// `Erz w = ⊓ {Zre v : v minimal outside Erz w}`, all such `v` of rank ≤ d+1.
    pub upper_inclusion: bool,
    /// A principal set of rank ≤ d missing from the co-principal closure,
    /// with a node above it that the co-principal closure cannot tell apart.
    pub lower_strict: Option<(usize, usize)>,
    /// A co-principal set of rank ≤ d+1 missing from the principal closure.
    pub upper_strict: Option<usize>,
}

impl SeparationReport {
    pub fn passed(&self) -> bool {
        !self.principal_separates
            && self.coprincipal_separator.is_some()
            && self.lower_inclusion
            && self.coprincipal_identity
            && self.upper_inclusion
            && self.lower_strict.is_some()
            && self.upper_strict.is_some()
    }
}

fn separates(e: &NodeSet, u: usize, v: usize) -> bool {
    e.contains(u) != e.contains(v)
}

/// Compares the subalgebras generated by the principal sets of rank ≤ d,
/// the co-principal sets of rank ≤ d, and those of rank ≤ d+1.
pub fn separation(n: usize, d: usize, cap: usize, limits: &Limits) -> Result<SeparationReport> {
    let m = Arc::new(build_universal(n, d + 1, limits)?);
    let p = m.poset();
    let low_end = m.level_end(d);
    let principals: Vec<Element> = (0..low_end)
        .map(|w| Element::principal(m.clone(), w))
        .collect::<Result<_>>()?;
    let coprincipals: Vec<Element> = (0..m.size())
        .map(|w| Element::coprincipal(m.clone(), w))
        .collect::<Result<_>>()?;
    let b = subalgebra_closure(&principals, cap)?;
    let c0 = subalgebra_closure(&coprincipals[..low_end], cap)?;
    let b_set: HashSet<&NodeSet> = b.iter().map(|e| e.bits()).collect();

    let pair = (low_end..m.size())
        .flat_map(|u| (u + 1..m.size()).map(move |v| (u, v)))
        .find(|&(u, v)| p.strict_down_words(u) == p.strict_down_words(v))
        .ok_or_else(|| Error::Invariant("no valuation-differing pair on the top level".into()))?;

    let principal_separates = b.iter().any(|e| separates(e.bits(), pair.0, pair.1));
    let coprincipal_separator =
        (0..m.size()).find(|&w| separates(coprincipals[w].bits(), pair.0, pair.1));
    let lower_inclusion = c0.iter().all(|e| b_set.contains(e.bits()));

    let mut coprincipal_identity = true;
    let mut upper_inclusion = true;
    for w in 0..low_end {
        let below = p
            .strict_down_iter(w)
            .fold(NodeSet::new(m.size()), |mut acc, v| {
                acc.union_with(principals[v].bits());
                acc
            });
        let rhs = principals[w].implies(&Element::new_unchecked(m.clone(), below))?;
        coprincipal_identity &= rhs == coprincipals[w];
        let outside = p.extremal(&principals[w].bits().complement(), Extremal::Min)?;
        let meet = outside.iter().fold(Element::top(m.clone()), |acc, v| {
            acc.meet(&coprincipals[v]).expect("same ambient")
        });
        upper_inclusion &= meet == principals[w];
    }

    let c0_set: HashSet<&NodeSet> = c0.iter().map(|e| e.bits()).collect();
    let lower_strict = (0..low_end)
        .filter(|&w| !c0_set.contains(principals[w].bits()))
        .find_map(|w| {
            p.upper_covers(w)
                .iter()
                .map(|&u| u as usize)
                .find(|&u| !c0.iter().any(|e| separates(e.bits(), w, u)))
                .map(|u| (w, u))
        });
    let upper_strict = (0..m.size()).find(|&w| !b_set.contains(coprincipals[w].bits()));

    Ok(SeparationReport {
        n,
        d,
        ambient_depth: d + 1,
        principal_closure: b.len(),
        coprincipal_closure: c0.len(),
        pair,
        principal_separates,
        coprincipal_separator,
        lower_inclusion,
        coprincipal_identity,
        upper_inclusion,
        lower_strict,
        upper_strict,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinabilityReport {
    pub n: usize,
    pub depth: usize,
    /// Nodes of rank below the depth.
    pub nodes_checked: usize,
    /// Nodes whose private successors are not `2^{|val|} − 1` in number.
    pub private_mismatches: Vec<usize>,
    /// Per variable, nodes where the recovered support and `[[p_i]]` differ.
    pub support_mismatches: Vec<Vec<usize>>,
    /// Per variable, the atoms selected by the successor criterion.
    pub atom_sets: Vec<Vec<usize>>,
    pub atom_mismatches: Vec<usize>,
    /// Valuation-free nodes never have a private successor.
    pub empty_valuation_private: Vec<usize>,
}

impl DefinabilityReport {
    pub fn passed(&self) -> bool {
        self.private_mismatches.is_empty()
            && self.support_mismatches.iter().all(|s| s.is_empty())
            && self.atom_mismatches.is_empty()
            && self.empty_valuation_private.is_empty()
    }
}

/// Recovers each generator from order-theoretic data alone and compares it
/// with the valuation.
pub fn definability(n: usize, depth: usize, limits: &Limits) -> Result<DefinabilityReport> {
    if depth == 0 {
        return Err(Error::DepthInsufficient { have: 0, need: 1 });
    }
    let m = Arc::new(build_universal(n, depth, limits)?);
    let inner = m.level_end(depth - 1);
    let mut r = DefinabilityReport {
        n,
        depth,
        nodes_checked: inner,
        private_mismatches: Vec::new(),
        support_mismatches: Vec::new(),
        atom_sets: Vec::new(),
        atom_mismatches: Vec::new(),
        empty_valuation_private: Vec::new(),
    };
    for v in 0..inner {
        let k = m.private_successors(v)?.count();
        if k != (1usize << m.val(v).count_ones()) - 1 {
            r.private_mismatches.push(v);
        }
        if m.val(v) == 0 && k > 0 {
            r.empty_valuation_private.push(v);
        }
    }
    for i in 1..=n {
        let got = definable_generator_support(i, &m)?;
        let bit = 1u32 << (i - 1);
        r.support_mismatches.push(
            (0..inner)
                .filter(|&v| got.contains(v) != (m.val(v) & bit != 0))
                .collect(),
        );
        let atoms: Vec<usize> = b_i_atom_set(i, &m)?
            .iter()
            .map(|e| e.maximal_nodes().first().expect("atom"))
            .collect();
        let expect: Vec<usize> = (0..m.level_end(0))
            .filter(|&v| m.val(v) & bit != 0)
            .collect();
        if atoms != expect {
            r.atom_mismatches.push(i);
        }
        r.atom_sets.push(atoms);
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumExperiment {
    pub n: usize,
    pub depth: usize,
    pub report: SpectrumReport,
}

impl SpectrumExperiment {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

pub fn spectrum(n: usize, depth: usize, cap: u64, limits: &Limits) -> Result<SpectrumExperiment> {
    let m = Arc::new(build_universal(n, depth, limits)?);
    Ok(SpectrumExperiment {
        n,
        depth,
        report: spectrum_check(&m, cap)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CbEntry {
    pub nodes: Vec<usize>,
    pub class: CbClass,
    /// Extension counts for `k = 1..=kmax`, recorded for the two-extension case.
    pub counts: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CbScanReport {
    pub n: usize,
    pub d: usize,
    pub kmax: usize,
    pub entries: Vec<CbEntry>,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub unknown: usize,
}

impl CbScanReport {
    pub fn passed(&self) -> bool {
        self.unknown == 0
            && self.entries.iter().all(|e| match (&e.class, &e.counts) {
                (CbClass::B { .. }, Some(c)) => c.iter().all(|&x| x == 2),
                (CbClass::B { .. }, None) => false,
                _ => true,
            })
    }
}

/// Classifies every downset of `K_n^d`.
pub fn cb_scan(n: usize, d: usize, kmax: usize, cap: u64, limits: &Limits) -> Result<CbScanReport> {
    let m: Arc<UniversalModel> = Arc::new(build_universal(n, d, limits)?);
    let mut sets = Vec::new();
    m.poset()
        .for_each_downset(Some(cap), |s| sets.push(s.clone()))?;
    let mut r = CbScanReport {
        n,
        d,
        kmax,
        entries: Vec::new(),
        a: 0,
        b: 0,
        c: 0,
        unknown: 0,
    };
    for s in sets {
        let a = Element::new_unchecked(m.clone(), s);
        let class = cb_classify(&a, kmax)?;
        let mut counts = None;
        match class {
            CbClass::A { .. } => r.a += 1,
            CbClass::B { .. } => {
                r.b += 1;
                counts = Some(extension_counts(&a, kmax)?);
            }
            CbClass::C { .. } => r.c += 1,
            CbClass::Unknown { .. } => r.unknown += 1,
        }
        r.entries.push(CbEntry {
            nodes: a.bits().to_vec(),
            class,
            counts,
        });
    }
    Ok(r)
}
