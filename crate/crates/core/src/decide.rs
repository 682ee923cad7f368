//! Validity and equivalence of formulas on the universal model.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{eval_formula, Evaluator, Formula};
use crate::frame::{val_to_vars, Frame};
use crate::lift::Lift;
use crate::models::FiniteKripkeModel;
use crate::universal::{build_universal, Limits, UniversalModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid,
}

/// A point refuting the formula. Variables are the compressed ones; see
/// `DecisionResult::var_map`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A node of the materialized model `K_k^{depth-1}` (or `K_k^0`).
    Node {
        id: usize,
        rank: usize,
        val: Vec<usize>,
    },
    /// The top-level node with this valuation whose strict down-set is
    /// generated by `generators` (ids in `K_k^{depth-1}`).
    Virtual {
        rank: usize,
        val: Vec<usize>,
        generators: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionResult {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Number of variables of the model used.
    pub n: usize,
    /// Depth of the universal model the verdict refers to.
    pub depth: usize,
    /// `var_map[i]` is the original index of compressed variable `p{i+1}`.
    pub var_map: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DecideOptions {
    /// Decide on `K^depth` instead of the implication depth.
    pub depth: Option<usize>,
    pub limits: Limits,
}

/// Renames the occurring variables to `p1..pk`, keeping their order.
fn compress(f: &Formula) -> (Formula, Vec<usize>) {
    let vars: Vec<usize> = f.vars().into_iter().collect();
    let map: HashMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
    (f.rename(&map), vars)
}

/// Decides validity of `f` (over `p1..pn`) on `K^D` with `D` the implication
/// depth unless overridden. Only `K^{D-1}` is built; the top level is decided
/// through [`Lift`]. Refuting points are re-checked on an explicit model.
pub fn decide(f: &Formula, n: usize, opts: &DecideOptions) -> Result<DecisionResult> {
    let mx = f.max_var();
    if mx > n {
        return Err(Error::VariableOutOfRange { index: mx, n });
    }
    let (g, var_map) = compress(f);
    let k = var_map.len().max(1);
    let depth = opts.depth.unwrap_or_else(|| g.impl_depth());
    let limits = Limits {
        max_depth: opts.limits.max_depth.max(depth),
        ..opts.limits
    };
    let base_depth = depth.saturating_sub(1);
    let base = build_universal(k, base_depth, &limits)?;
    let den = eval_formula(&g, &base)?;
    let result = |verdict, witness| DecisionResult {
        verdict,
        witness,
        n: k,
        depth,
        var_map: var_map.clone(),
    };
    if let Some(v) = den.complement().first() {
        let w = Witness::Node {
            id: v,
            rank: base.poset().rank(v) as usize,
            val: val_to_vars(base.val(v)),
        };
        return Ok(result(Verdict::Invalid, Some(w)));
    }
    if depth == 0 {
        return Ok(result(Verdict::Valid, None));
    }
    let lift = Lift::new(&base);
    let root = Arc::new(g.clone());
    let mut ev = Evaluator::new(&base);
    match lift.search(&root, false, &HashMap::new(), &[], &mut ev)? {
        None => Ok(result(Verdict::Valid, None)),
        Some(x) => {
            let m = FiniteKripkeModel::with_new_top(&base, &x.below, x.val)?;
            if eval_formula(&g, &m)?.contains(base.size()) {
                return Err(Error::Invariant(
                    "top-level witness forces the formula".into(),
                ));
            }
            let w = Witness::Virtual {
                rank: depth,
                val: val_to_vars(x.val),
                generators: x.generators(&base),
            };
            Ok(result(Verdict::Invalid, Some(w)))
        }
    }
}

/// Decides `f ↔ g`.
pub fn equiv(f: &Formula, g: &Formula, n: usize, opts: &DecideOptions) -> Result<DecisionResult> {
    decide(&Formula::iff(f.clone(), g.clone()), n, opts)
}

/// Checks a witness against a freshly built model; used by callers that
/// received a result from elsewhere.
pub fn witness_refutes(f: &Formula, r: &DecisionResult, limits: &Limits) -> Result<bool> {
    let (g, _) = compress(f);
    let base = build_universal(r.n, r.depth.saturating_sub(1), limits)?;
    match &r.witness {
        None => Ok(false),
        Some(Witness::Node { id, .. }) => Ok(!eval_formula(&g, &base)?.contains(*id)),
        Some(Witness::Virtual {
            val, generators, ..
        }) => {
            let seed = crate::nodeset::NodeSet::from_ids(base.size(), generators.iter().copied());
            let below = base.poset().down_closure(&seed)?;
            let beta = val.iter().fold(0u32, |b, &i| b | 1 << (i - 1));
            let m = FiniteKripkeModel::with_new_top(&base, &below, beta)?;
            Ok(!eval_formula(&g, &m)?.contains(base.size()))
        }
    }
}

/// The universal model a decision at `depth` would consult for `n` variables.
pub fn decision_base(n: usize, depth: usize, limits: &Limits) -> Result<UniversalModel> {
    build_universal(n, depth.saturating_sub(1), limits)
}
