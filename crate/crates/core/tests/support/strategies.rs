#![allow(dead_code)]

use std::collections::BTreeSet;

use depmap_core::model::{ColumnSet, MappingSet};
use depmap_core::script::AbstractState;
use proptest::prelude::*;

const SYMBOLS: &[&str] = &["t1", "t2", "f.csv", "g.csv"];
const COLUMNS: &[&str] = &["a", "b", "c", "d"];
const VARS: &[&str] = &["x", "y", "z", "m"];

pub fn column_set() -> impl Strategy<Value = ColumnSet> {
    prop_oneof![
        1 => Just(ColumnSet::All),
        4 => prop::collection::btree_set(prop::sample::select(COLUMNS), 0..=3)
            .prop_map(ColumnSet::explicit),
    ]
}

pub fn mapping() -> impl Strategy<Value = MappingSet> {
    prop::collection::vec((prop::sample::select(SYMBOLS), column_set()), 0..4).prop_map(|v| v.into_iter().collect())
}

pub fn state() -> impl Strategy<Value = AbstractState> {
    prop::collection::vec((prop::sample::select(VARS), mapping()), 0..4).prop_map(|v| {
        let mut s = AbstractState::new();
        for (var, m) in v {
            s.join_var(var, &m);
        }
        s
    })
}

pub fn statement() -> impl Strategy<Value = String> {
    let var = || prop::sample::select(VARS);
    let cols = || prop::collection::btree_set(prop::sample::select(COLUMNS), 1..=3);
    let quoted = |c: BTreeSet<&str>| c.iter().map(|c| format!("'{c}'")).collect::<Vec<_>>().join(", ");
    prop_oneof![
        (var(), prop::sample::select(SYMBOLS)).prop_map(|(v, s)| format!("{v} = pd.read_csv('{s}')")),
        (var(), var(), cols()).prop_map(move |(v, w, c)| format!("{v} = {w}[[{}]]", quoted(c))),
        (var(), var(), var()).prop_map(|(v, a, b)| format!("{v} = f({a}, {b})")),
        (var(), var(), var()).prop_map(|(v, a, b)| format!("{v} = {a}.merge({b})")),
        (var(), var()).prop_map(|(v, a)| format!("{v} = {a}")),
        (var(), var(), var()).prop_map(|(v, a, b)| format!("{v}, {a} = {b}, {v}")),
        (var(), var()).prop_map(|(a, b)| format!("m.fit({a}, {b})")),
        (var(), var()).prop_map(|(v, a)| format!("{v} = m.predict({a})")),
        var().prop_map(|a| format!("{a}.to_csv('out.csv')")),
        (var(), var()).prop_map(|(a, b)| format!("{a}.to_csv({b})")),
        (var(), var(), cols()).prop_map(move |(v, w, c)| format!("{v} = g({w}[[{}]])", quoted(c))),
        (var(), var()).prop_map(|(v, w)| format!("{v}[['a']] = {w}")),
    ]
}
