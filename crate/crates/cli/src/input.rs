use std::io::Read;
use std::sync::Arc;

use freeha::completion::{ModelTower, ProfiniteApprox};
use freeha::formula::{eval_formula, parse_formula};
use freeha::heyting::Element;
use freeha::models::{random_model, FiniteKripkeModel};
use freeha::{NodeSet, UniversalModel};

use crate::CliError;

/// Comma-separated node ids; empty means none.
pub fn parse_ids(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("bad node id '{s}'")))
        })
        .collect()
}

/// `p1,p3` or `{p1,p3}` or `1,3`, as a valuation bitmap.
pub fn parse_val(text: &str, n: usize) -> Result<u32, CliError> {
    let mut b = 0u32;
    for part in text.trim_matches(|c| c == '{' || c == '}').split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let i: usize = part
            .trim_start_matches(['p', 'P'])
            .parse()
            .map_err(|_| CliError::Usage(format!("bad variable '{part}'")))?;
        if i == 0 || i > n {
            return Err(freeha::Error::VariableOutOfRange { index: i, n }.into());
        }
        b |= 1 << (i - 1);
    }
    Ok(b)
}

/// An element of `m`: `down:IDS` (generated downset), `co:IDS`
/// (intersection of co-principal sets) or a formula.
pub fn parse_element(text: &str, m: &Arc<UniversalModel>) -> Result<Element, CliError> {
    if let Some(ids) = text.strip_prefix("down:") {
        let ids = parse_ids(ids)?;
        check_ids(&ids, m)?;
        return Ok(Element::generated(
            m.clone(),
            &NodeSet::from_ids(m.size(), ids),
        )?);
    }
    if let Some(ids) = text.strip_prefix("co:") {
        let ids = parse_ids(ids)?;
        check_ids(&ids, m)?;
        let mut e = Element::top(m.clone());
        for w in ids {
            e = e.meet(&Element::coprincipal(m.clone(), w)?)?;
        }
        return Ok(e);
    }
    let f = parse_formula(text)?;
    Ok(Element::new(m.clone(), eval_formula(&f, &**m)?)?)
}

fn check_ids(ids: &[usize], m: &UniversalModel) -> Result<(), CliError> {
    match ids.iter().find(|&&i| i >= m.size()) {
        Some(&bad) => Err(freeha::Error::IndexOutOfRange {
            index: bad,
            size: m.size(),
        }
        .into()),
        None => Ok(()),
    }
}

/// A completion element: `down:IDS` is finite (read at `depth`), `co:IDS`
/// co-finite, anything else a formula.
pub fn parse_approx(
    text: &str,
    tower: &Arc<ModelTower>,
    depth: usize,
) -> Result<ProfiniteApprox, CliError> {
    if text.starts_with("down:") {
        let m = tower.get(depth)?;
        return Ok(ProfiniteApprox::finite(tower, parse_element(text, &m)?)?);
    }
    if let Some(ids) = text.strip_prefix("co:") {
        return Ok(ProfiniteApprox::cofinite(tower, &parse_ids(ids)?)?);
    }
    Ok(ProfiniteApprox::formula(tower, parse_formula(text)?)?)
}

/// A model from a JSON file (`-` for stdin), or a seeded random one.
pub fn load_model(
    path: Option<&str>,
    random: Option<(usize, usize)>,
    seed: u64,
) -> Result<FiniteKripkeModel, CliError> {
    match (path, random) {
        (Some(p), None) => {
            let mut text = String::new();
            if p == "-" {
                std::io::stdin()
                    .read_to_string(&mut text)
                    .map_err(|e| freeha::Error::Io(e.to_string()))?;
            } else {
                text = std::fs::read_to_string(p)
                    .map_err(|e| freeha::Error::Io(format!("{p}: {e}")))?;
            }
            Ok(FiniteKripkeModel::from_json(&text)?)
        }
        (None, Some((n, size))) => Ok(random_model(n, size, seed)),
        _ => Err(CliError::Usage("give a model file or --random SIZE".into())),
    }
}
