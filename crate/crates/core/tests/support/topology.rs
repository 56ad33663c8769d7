//! Random multi-graph topologies for the inter-graph inference, plus a
//! direct application of the substitution rule as an oracle.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use depmap_core::engine::GraphResult;
use depmap_core::model::{ColumnSet, MappingSet};
use rand::seq::SliceRandom;
use rand::Rng;

fn graph_id(i: usize) -> String {
    format!("g{i}")
}

/// `n` graphs, each with one model output `o{i}` and a few initial sources.
/// Graph `i` consumes outputs of random other graphs; with `acyclic` only
/// lower-numbered ones.
pub fn random_topology(rng: &mut impl Rng, acyclic: bool) -> BTreeMap<String, GraphResult> {
    let n = rng.gen_range(2..=8);
    let cols = ["a", "b", "c", "d"];
    (0..n)
        .map(|i| {
            let mut zeta = MappingSet::new();
            for _ in 0..rng.gen_range(0..=3) {
                let col = *cols.choose(rng).unwrap();
                let c = if rng.gen_bool(0.2) { ColumnSet::All } else { ColumnSet::explicit([col]) };
                zeta.insert(&format!("raw{}", rng.gen_range(0..12)), c);
            }
            let pool: Vec<usize> = if acyclic { (0..i).collect() } else { (0..n).filter(|&j| j != i).collect() };
            for _ in 0..rng.gen_range(0..=2) {
                if let Some(j) = pool.choose(rng) {
                    zeta.insert(&format!("o{j}"), ColumnSet::All);
                }
            }
            let result = GraphResult {
                graph_id: graph_id(i),
                start: "model".into(),
                zeta,
                derived_seen: BTreeSet::new(),
                outputs: [(format!("o{i}"), MappingSet::new())].into(),
                visits: Vec::new(),
                diagnostics: Vec::new(),
            };
            (graph_id(i), result)
        })
        .collect()
}

/// Fires `ζ_B := (ζ_B − o) ∪ ζ_A` for any `o ∈ O_A ∩ ζ_B` until no pair
/// applies. Only terminates on acyclic topologies.
pub fn exhaustive_rule(results: &BTreeMap<String, GraphResult>) -> BTreeMap<String, MappingSet> {
    let mut zeta: BTreeMap<String, MappingSet> = results.iter().map(|(k, r)| (k.clone(), r.zeta.clone())).collect();
    loop {
        let mut fired = false;
        for (a, ra) in results {
            for b in results.keys() {
                if a == b {
                    continue;
                }
                for o in ra.outputs.keys() {
                    if zeta[b].contains(o) {
                        let za = zeta[a].clone();
                        let zb = zeta.get_mut(b).unwrap();
                        zb.remove(o);
                        zb.join_with(&za);
                        fired = true;
                    }
                }
            }
        }
        if !fired {
            return zeta;
        }
    }
}
