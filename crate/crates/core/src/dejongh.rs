//! Formulas defining principal and co-principal sets.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formula::{Evaluator, Formula};
use crate::frame::Frame;
use crate::lift::{Containment, Lift};
use crate::nodeset::NodeSet;
use crate::poset::Extremal;
use crate::universal::UniversalModel;

type Pair = (Arc<Formula>, Arc<Formula>);

/// Builds `ψ_w` (defining `w↓`) and `ψ'_w` (defining the complement of
/// `w↑`) by recursion on rank, sharing the formulas of lower nodes.
pub struct DeJongh<'m> {
    model: &'m UniversalModel,
    cache: Vec<Option<Pair>>,
    vars: Vec<Arc<Formula>>,
}

impl<'m> DeJongh<'m> {
    pub fn new(model: &'m UniversalModel) -> Self {
        DeJongh {
            model,
            cache: vec![None; model.size()],
            vars: (1..=model.n()).map(|i| Arc::new(Formula::Var(i))).collect(),
        }
    }

    /// The pair for `w`, cached.
    pub fn get(&mut self, w: usize) -> Result<Pair> {
        self.model.check_node(w)?;
        if let Some(p) = &self.cache[w] {
            return Ok(p.clone());
        }
        let pair = self.build(w)?;
        self.cache[w] = Some(pair.clone());
        Ok(pair)
    }

    /// The pair for `w` without caching it; lower nodes are cached.
    pub fn build(&mut self, w: usize) -> Result<Pair> {
        self.model.check_node(w)?;
        let m = self.model;
        let ymax = m.poset().extremal(
            &NodeSet::from_words(m.size(), m.poset().strict_down_words(w).to_vec()),
            Extremal::Max,
        )?;
        let mut psis = Vec::new();
        let mut primes = Vec::new();
        for z in ymax.iter() {
            let (p, q) = self.get(z)?;
            psis.push(p);
            primes.push(q);
        }
        let beta = m.val(w);
        let missing: Vec<Arc<Formula>> = (0..m.n())
            .filter(|i| beta >> i & 1 == 0)
            .map(|i| self.vars[i].clone())
            .collect();
        let present: Vec<Arc<Formula>> = (0..m.n())
            .filter(|i| beta >> i & 1 == 1)
            .map(|i| self.vars[i].clone())
            .collect();
        let below = Formula::disj(psis);
        let a = Arc::new(Formula::Or(Formula::disj(primes), Formula::disj(missing)));
        let psi = Arc::new(Formula::And(
            Arc::new(Formula::Imp(a, below.clone())),
            Formula::conj(present),
        ));
        let prime = Arc::new(Formula::Imp(psi.clone(), below));
        Ok((psi, prime))
    }
}

pub fn de_jongh(w: usize, m: &UniversalModel) -> Result<(Formula, Formula)> {
    let (p, q) = DeJongh::new(m).get(w)?;
    Ok(((*p).clone(), (*q).clone()))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeJonghReport {
    pub nodes: usize,
    /// Depth of the materialized model.
    pub explicit_depth: usize,
    /// Nodes whose formulas fail on the materialized model.
    pub explicit_failures: Vec<usize>,
    /// Nodes whose formulas fail on the level above it.
    pub lifted_failures: Vec<usize>,
    pub depth_failures: Vec<usize>,
    pub max_psi_depth: usize,
    pub max_prime_depth: usize,
}

impl DeJonghReport {
    pub fn passed(&self) -> bool {
        self.explicit_failures.is_empty()
            && self.lifted_failures.is_empty()
            && self.depth_failures.is_empty()
    }
}

/// Checks for every node `w` of `m` that `ψ_w` and `ψ'_w` denote `w↓` and
/// the complement of `w↑`, both on `m` and on the level above `m`, and that
/// their implication depths are at most `2·rank+1` and `2·rank+2`.
pub fn verify_de_jongh(m: &UniversalModel) -> Result<DeJonghReport> {
    let p = m.poset();
    let mut dj = DeJongh::new(m);
    let mut ev = Evaluator::new(m);
    let lift = Lift::new(m);
    let mut known: HashMap<usize, bool> = HashMap::new();
    let mut r = DeJonghReport {
        nodes: m.size(),
        explicit_depth: m.depth(),
        ..Default::default()
    };
    let top_lo = if m.depth() == 0 {
        0
    } else {
        m.level_end(m.depth() - 1)
    };
    for w in 0..m.size() {
        let on_top = w >= top_lo;
        let mark = ev.mark();
        // lower nodes are shared by later formulas and stay cached
        let (psi, prime) = if on_top { dj.build(w)? } else { dj.get(w)? };
        let rank = p.rank(w) as usize;
        let (dp, dq) = (psi.impl_depth(), prime.impl_depth());
        r.max_psi_depth = r.max_psi_depth.max(dp);
        r.max_prime_depth = r.max_prime_depth.max(dq);
        if dp > 2 * rank + 1 || dq > 2 * rank + 2 {
            r.depth_failures.push(w);
        }
        let down = p.down(w);
        let co = p.up(w).complement();
        let (vp, vq) = (ev.eval_arc(&psi)?, ev.eval_arc(&prime)?);
        if *vp != down || *vq != co {
            r.explicit_failures.push(w);
            continue;
        }
        // no node above may force ψ_w; ψ'_w must hold exactly where w ∉ Y
        let psi_holds = lift.search(&psi, true, &known, &[], &mut ev)?.is_some();
        known.insert(Arc::as_ptr(&psi) as usize, false);
        let outside = |inside| Containment {
            set: co.clone(),
            inside,
        };
        let prime_wrong = lift
            .search_trusted(&prime, true, &known, &[outside(false)], &mut ev)?
            .is_some()
            || lift
                .search_trusted(&prime, false, &known, &[outside(true)], &mut ev)?
                .is_some();
        if psi_holds || prime_wrong {
            r.lifted_failures.push(w);
        }
        if on_top {
            known.remove(&(Arc::as_ptr(&psi) as usize));
            ev.rollback(mark);
        }
    }
    Ok(r)
}
