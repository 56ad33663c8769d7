use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostics::{Diagnostic, DiagnosticCode};
use crate::model::MappingSet;

use super::graph::GraphResult;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transitive {
    /// Graph id → sources no graph produces.
    pub zeta: BTreeMap<String, MappingSet>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Replaces every symbol some other graph's model outputs by that graph's
/// sources, until nothing changes.
pub fn infer_transitive(results: &BTreeMap<String, GraphResult>) -> Transitive {
    let order: Vec<&str> = results.keys().map(String::as_str).collect();
    infer_transitive_ordered(results, &order)
}

/// As [`infer_transitive`], visiting consumer graphs in `order` on each pass.
/// Ids missing from `order` are visited afterwards in id order.
///
/// Each graph is split into the symbols nobody produces and links to the
/// graphs producing the rest; the closure over links is then computed by
/// chaotic iteration. Because a link's symbol is dropped rather than joined
/// back in, producer cycles converge instead of re-adding each other's
/// outputs forever.
pub fn infer_transitive_ordered(results: &BTreeMap<String, GraphResult>, order: &[&str]) -> Transitive {
    let mut producers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (id, r) in results {
        for o in r.outputs.keys() {
            producers.entry(o.as_str()).or_default().push(id.as_str());
        }
    }
    let mut diagnostics = Vec::new();
    for (symbol, graphs) in &producers {
        if graphs.len() > 1 {
            diagnostics.push(Diagnostic::new(
                DiagnosticCode::AmbiguousProducer,
                format!("{symbol} is produced by graphs {graphs:?}; joining all of them"),
            ));
        }
    }

    let mut zeta: BTreeMap<String, MappingSet> = BTreeMap::new();
    let mut links: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (id, r) in results {
        let mut initial = r.zeta.clone();
        initial.retain(|s| !producers.contains_key(s));
        zeta.insert(id.clone(), initial);
        let l = links.entry(id.as_str()).or_default();
        for s in r.zeta.symbols() {
            l.extend(producers.get(s).into_iter().flatten().filter(|p| **p != id.as_str()));
        }
    }

    let mut visit: Vec<&str> = order.iter().copied().filter(|id| results.contains_key(*id)).collect();
    visit.extend(results.keys().map(String::as_str).filter(|id| !order.contains(id)));
    loop {
        let mut changed = false;
        for b in &visit {
            for a in &links[b] {
                let from = zeta[*a].clone();
                changed |= zeta.get_mut(*b).expect("every graph has an entry").join_with(&from);
            }
        }
        if !changed {
            break;
        }
    }
    Transitive { zeta, diagnostics }
}
