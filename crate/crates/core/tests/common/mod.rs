//! Independent reference implementations used as oracles by the
//! integration tests and the acceptance run.

#![allow(dead_code)]

use freeha::formula::Formula;

/// Formulas with a known status (valid or not) whose decision needs at most
/// `K_1^11`, `K_2^2` or `K_3^1` to be built.
pub const VECTOR: [(&str, bool); 20] = [
    ("p1 -> ~~p1", true),
    ("p1 | ~p1", false),
    ("~~p1 -> p1", false),
    ("((p1 -> p2) -> p1) -> p1", false),
    ("~p1 | ~~p1", false),
    ("(p1 -> ~~~p1) -> ~~(p1 -> ~p1)", true),
    ("(~~p1 -> ~~p1) -> ~~(~~p1 -> p1)", true),
    ("~(p1 & p2) -> ~p1 | ~p2", false),
    ("~(p1 | p2) <-> ~p1 & ~p2", true),
    ("~p1 | ~p2 -> ~(p1 & p2)", true),
    ("~~(p1 & p2) <-> ~~p1 & ~~p2", true),
    ("~~(p1 | p2) -> ~~p1 | ~~p2", false),
    ("(p1 -> p2) | (p2 -> p1)", false),
    ("~~(p1 | ~p1)", true),
    ("(p1 -> p2) -> ~p2 -> ~p1", true),
    ("(~p2 -> ~p1) -> p1 -> p2", false),
    ("p1 & (p2 | p3) -> p1 & p2 | p1 & p3", true),
    ("(p1 -> p2 | p3) -> (p1 -> p2) | (p1 -> p3)", false),
    ("(p1 -> p2) & (p1 -> ~p2) -> ~p1", true),
    ("~~(~~p1 -> p1)", true),
];

/// A finite Kripke model as a reflexive order matrix and per-point
/// valuation bitmaps; forcing is inherited downward.
#[derive(Clone, Debug)]
pub struct SmallModel {
    pub le: Vec<Vec<bool>>,
    pub val: Vec<u32>,
}

/// Truth of `f` at every point, straight from the forcing clauses.
pub fn forces(m: &SmallModel, f: &Formula) -> Vec<bool> {
    let k = m.val.len();
    match f {
        Formula::Bot => vec![false; k],
        Formula::Var(i) => (0..k).map(|w| m.val[w] >> (i - 1) & 1 == 1).collect(),
        Formula::And(a, b) => {
            let (x, y) = (forces(m, a), forces(m, b));
            (0..k).map(|w| x[w] && y[w]).collect()
        }
        Formula::Or(a, b) => {
            let (x, y) = (forces(m, a), forces(m, b));
            (0..k).map(|w| x[w] || y[w]).collect()
        }
        Formula::Imp(a, b) => {
            let (x, y) = (forces(m, a), forces(m, b));
            (0..k)
                .map(|w| (0..k).all(|u| !m.le[u][w] || !x[u] || y[u]))
                .collect()
        }
    }
}

/// Every partial order on `k` labelled points.
pub fn partial_orders(k: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|u| (0..k).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let mut le = vec![vec![false; k]; k];
        for (u, row) in le.iter_mut().enumerate() {
            row[u] = true;
        }
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                le[u][v] = true;
            }
        }
        let antisymmetric = (0..k).all(|u| (0..k).all(|v| u == v || !(le[u][v] && le[v][u])));
        let transitive =
            (0..k).all(|u| (0..k).all(|v| (0..k).all(|w| !(le[u][v] && le[v][w]) || le[u][w])));
        if antisymmetric && transitive {
            out.push(le);
        }
    }
    out
}

/// Subsets of the points closed downward.
fn downsets(le: &[Vec<bool>]) -> Vec<u32> {
    let k = le.len();
    (0u32..1 << k)
        .filter(|&s| {
            (0..k).all(|v| s >> v & 1 == 0 || (0..k).all(|u| !le[u][v] || s >> u & 1 == 1))
        })
        .collect()
}

/// A model with at most `max_points` points refuting `f` at some point.
pub fn brute_countermodel(f: &Formula, n: usize, max_points: usize) -> Option<SmallModel> {
    for k in 1..=max_points {
        for le in partial_orders(k) {
            let ds = downsets(&le);
            let mut choice = vec![0usize; n];
            loop {
                let mut val = vec![0u32; k];
                for (i, &c) in choice.iter().enumerate() {
                    for (w, v) in val.iter_mut().enumerate() {
                        if ds[c] >> w & 1 == 1 {
                            *v |= 1 << i;
                        }
                    }
                }
                let m = SmallModel {
                    le: le.clone(),
                    val,
                };
                if forces(&m, f).iter().any(|&t| !t) {
                    return Some(m);
                }
                // next valuation, odometer style
                let mut i = 0;
                while i < n {
                    choice[i] += 1;
                    if choice[i] < ds.len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }
    None
}

/// Node counts per level of `K_n^d`, enumerating every subset of the
/// earlier nodes as a candidate down-set. Needs fewer than 64 nodes below
/// the last level.
pub fn naive_level_counts(n: usize, d: usize) -> Vec<u64> {
    // nodes as (valuation, reflexive down-set mask, rank)
    let mut nodes: Vec<(u32, u64, usize)> = Vec::new();
    for b in 0..1u32 << n {
        let id = nodes.len();
        nodes.push((b, 1 << id, 0));
    }
    let mut counts = vec![nodes.len() as u64];
    for r in 1..=d {
        let k = nodes.len();
        assert!(k < 64, "too many nodes for the naive enumerator");
        let mut fresh = Vec::new();
        let mut count = 0u64;
        for y in 1u64..1 << k {
            let closed = (0..k).all(|v| y >> v & 1 == 0 || nodes[v].1 & !y == 0);
            let top = (0..k).any(|v| y >> v & 1 == 1 && nodes[v].2 == r - 1);
            if !closed || !top {
                continue;
            }
            let maxes: Vec<usize> = (0..k)
                .filter(|&v| y >> v & 1 == 1)
                .filter(|&v| !(0..k).any(|u| u != v && y >> u & 1 == 1 && nodes[u].1 >> v & 1 == 1))
                .collect();
            let common = maxes
                .iter()
                .fold((1u32 << n) - 1, |acc, &v| acc & nodes[v].0);
            for beta in 0..1u32 << n {
                if beta & !common != 0 {
                    continue;
                }
                if maxes.len() == 1 && nodes[maxes[0]].0 == beta {
                    continue;
                }
                count += 1;
                if r < d {
                    fresh.push((beta, y, r));
                }
            }
        }
        for (beta, y, r) in fresh {
            let id = nodes.len();
            nodes.push((beta, y | 1 << id, r));
        }
        counts.push(count);
    }
    counts
}

/// Downsets of a poset given by reflexive down-set masks (at most 64 points).
pub fn all_downsets(down: &[u64]) -> Vec<u64> {
    let k = down.len();
    let mut out = vec![0u64];
    for v in 0..k {
        // points are in a linear extension, so v may join any set holding its down-set
        let need = down[v] & !(1 << v);
        let extra: Vec<u64> = out
            .iter()
            .filter(|&&s| s & need == need)
            .map(|&s| s | 1 << v)
            .collect();
        out.extend(extra);
    }
    out
}

/// Irreducibility straight from the lattice: `a` is completely
/// join-irreducible if it is not the union of the elements strictly below
/// it, meet-irreducible if it is not the intersection of those strictly
/// above it.
pub fn brute_irreducible(a: u64, all: &[u64], full: u64) -> (bool, bool) {
    let below = all
        .iter()
        .filter(|&&b| b != a && b & !a == 0)
        .fold(0u64, |acc, &b| acc | b);
    let above = all
        .iter()
        .filter(|&&b| b != a && a & !b == 0)
        .fold(full, |acc, &b| acc & b);
    (a != 0 && below != a, a != full && above != a)
}

/// Whether any two points of `a` have a common upper bound inside `a`.
pub fn brute_filtering(a: u64, down: &[u64]) -> bool {
    let pts: Vec<usize> = (0..down.len()).filter(|&v| a >> v & 1 == 1).collect();
    !pts.is_empty()
        && pts.iter().all(|&u| {
            pts.iter().all(|&v| {
                pts.iter()
                    .any(|&w| down[w] >> u & 1 == 1 && down[w] >> v & 1 == 1)
            })
        })
}
