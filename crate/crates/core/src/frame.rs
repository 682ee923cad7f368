use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::poset::Poset;

/// A finite poset with a monotone valuation, read with the reversed order:
/// forcing at `w` looks at every point below `w`.
pub trait Frame {
    fn poset(&self) -> &Poset;
    fn n_vars(&self) -> usize;
    /// Bit `i` set means `p{i+1}` holds.
    fn valuation(&self, v: usize) -> u32;

    fn size(&self) -> usize {
        self.poset().size()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Two points with the same valuation and the same strict down-set.
    Duplicate { first: usize, second: usize },
    /// A point whose only maximal predecessor carries the same valuation.
    Redundant { point: usize, predecessor: usize },
    /// A point forcing a variable that fails at some point below it.
    NonMonotone { lower: usize, upper: usize },
}

/// Lists every failure of the two reducedness conditions.
pub fn reduction_violations<F: Frame + ?Sized>(f: &F) -> Vec<Violation> {
    let p = f.poset();
    let mut out = Vec::new();
    let mut seen: HashMap<(u32, &[u64]), usize> = HashMap::new();
    for v in 0..p.size() {
        let key = (f.valuation(v), p.strict_down_words(v));
        if let Some(&first) = seen.get(&key) {
            out.push(Violation::Duplicate { first, second: v });
        } else {
            seen.insert(key, v);
        }
    }
    for v in 0..p.size() {
        if let [u] = p.lower_covers(v) {
            if f.valuation(*u as usize) == f.valuation(v) {
                out.push(Violation::Redundant {
                    point: v,
                    predecessor: *u as usize,
                });
            }
        }
    }
    out
}

/// Pairs `u < v` where `v` forces something `u` does not.
pub fn monotonicity_violations<F: Frame + ?Sized>(f: &F) -> Vec<Violation> {
    let p = f.poset();
    let mut out = Vec::new();
    for v in 0..p.size() {
        for &u in p.lower_covers(v) {
            let u = u as usize;
            if f.valuation(v) & !f.valuation(u) != 0 {
                out.push(Violation::NonMonotone { lower: u, upper: v });
            }
        }
    }
    out
}

/// Serialized form shared by universal and arbitrary finite models.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    pub nodes: Vec<NodeDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: usize,
    pub rank: u32,
    /// 1-based variable indices.
    pub val: Vec<usize>,
    /// Reflexive down-set.
    pub down: Vec<usize>,
}

pub fn val_to_vars(val: u32) -> Vec<usize> {
    (0..32)
        .filter(|i| val >> i & 1 == 1)
        .map(|i| i + 1)
        .collect()
}

pub fn val_label(val: u32) -> String {
    let names: Vec<String> = val_to_vars(val).iter().map(|i| format!("p{i}")).collect();
    format!("{{{}}}", names.join(","))
}

pub fn to_doc<F: Frame + ?Sized>(f: &F, depth: Option<usize>) -> ModelDoc {
    let p = f.poset();
    let nodes = (0..p.size())
        .map(|v| NodeDoc {
            id: v,
            rank: p.rank(v),
            val: val_to_vars(f.valuation(v)),
            down: p.down(v).to_vec(),
        })
        .collect();
    ModelDoc {
        n: f.n_vars(),
        depth,
        nodes,
    }
}

pub fn to_dot<F: Frame + ?Sized>(f: &F) -> String {
    let p = f.poset();
    let mut s = String::from("digraph model {\n  rankdir=BT;\n");
    for v in 0..p.size() {
        s.push_str(&format!(
            "  n{v} [label=\"{v}:{}:{}\"];\n",
            p.rank(v),
            val_label(f.valuation(v))
        ));
    }
    for v in 0..p.size() {
        for &u in p.lower_covers(v) {
            s.push_str(&format!("  n{u} -> n{v};\n"));
        }
    }
    s.push_str("}\n");
    s
}
