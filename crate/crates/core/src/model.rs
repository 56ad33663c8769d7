//! Domain types shared by every analysis stage: column sets, data sources,
//! mapping sets, activities, activity graphs and repositories.
//!
//! `ColumnSet` and `MappingSet` form the lattice the analyses compute over.
//! `ColumnSet` is ordered by inclusion with `All` as top; `MappingSet` is
//! ordered symbol-wise and joined by piecewise union.

use std::collections::{btree_map, BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::error::ModelError;
use crate::script::AnalyzerConfig;

/// Strips any leading `./` prefixes and surrounding whitespace. Symbols are
/// otherwise compared byte-exact and case-sensitively.
pub fn normalize_symbol(raw: &str) -> String {
    let mut s = raw.trim();
    while let Some(rest) = s.strip_prefix("./") {
        s = rest;
    }
    s.to_string()
}

/// The columns of a data source that may flow somewhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColumnSet {
    /// Every column of the source (top).
    All,
    /// A finite set of column names.
    Explicit(BTreeSet<String>),
}

impl Default for ColumnSet {
    fn default() -> Self {
        ColumnSet::Explicit(BTreeSet::new())
    }
}

impl ColumnSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds an explicit set, dropping empty names.
    pub fn explicit<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ColumnSet::Explicit(columns.into_iter().map(Into::into).filter(|c: &String| !c.is_empty()).collect())
    }

    pub fn is_all(&self) -> bool {
        matches!(self, ColumnSet::All)
    }

    pub fn contains(&self, column: &str) -> bool {
        match self {
            ColumnSet::All => true,
            ColumnSet::Explicit(cols) => cols.contains(column),
        }
    }

    /// Least upper bound.
    pub fn union(&self, other: &ColumnSet) -> ColumnSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    /// In-place least upper bound; returns whether `self` grew.
    pub fn union_with(&mut self, other: &ColumnSet) -> bool {
        match (&mut *self, other) {
            (ColumnSet::All, _) => false,
            (_, ColumnSet::All) => {
                *self = ColumnSet::All;
                true
            }
            (ColumnSet::Explicit(mine), ColumnSet::Explicit(theirs)) => {
                let before = mine.len();
                mine.extend(theirs.iter().cloned());
                mine.len() != before
            }
        }
    }

    /// Partial order: `Explicit(a) ⊑ Explicit(b)` iff `a ⊆ b`, everything ⊑ `All`.
    pub fn leq(&self, other: &ColumnSet) -> bool {
        match (self, other) {
            (_, ColumnSet::All) => true,
            (ColumnSet::All, ColumnSet::Explicit(_)) => false,
            (ColumnSet::Explicit(a), ColumnSet::Explicit(b)) => a.is_subset(b),
        }
    }

    /// Projects onto `columns`.
    ///
    /// The result is always `Explicit(columns)`: projecting `All` selects the
    /// requested columns, and projecting an explicit set keeps the requested
    /// columns even where they were not seen on the source (the analysis never
    /// drops a dependency on account of an unknown schema). The returned flag
    /// is set when an explicit set shares no column with the request, which
    /// callers surface as a diagnostic.
    pub fn constrain(&self, columns: &BTreeSet<String>) -> Result<(ColumnSet, bool), ModelError> {
        if columns.is_empty() {
            return Err(ModelError::EmptyProjection);
        }
        if let Some(bad) = columns.iter().find(|c| c.is_empty()) {
            return Err(ModelError::EmptyColumnName(bad.clone()));
        }
        let disjoint = match self {
            ColumnSet::All => false,
            ColumnSet::Explicit(cols) => cols.is_disjoint(columns),
        };
        Ok((ColumnSet::Explicit(columns.clone()), disjoint))
    }

    pub fn iter_explicit(&self) -> Option<impl Iterator<Item = &str>> {
        match self {
            ColumnSet::All => None,
            ColumnSet::Explicit(cols) => Some(cols.iter().map(String::as_str)),
        }
    }
}

impl fmt::Display for ColumnSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSet::All => f.write_str("*"),
            ColumnSet::Explicit(cols) => {
                f.write_str("{")?;
                for (i, c) in cols.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(c)?;
                }
                f.write_str("}")
            }
        }
    }
}

// Serialized as the string "*" or a sorted list of names.
impl Serialize for ColumnSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ColumnSet::All => serializer.serialize_str("*"),
            ColumnSet::Explicit(cols) => {
                let mut seq = serializer.serialize_seq(Some(cols.len()))?;
                for c in cols {
                    seq.serialize_element(c)?;
                }
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for ColumnSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ColumnSetVisitor;

        impl<'de> Visitor<'de> for ColumnSetVisitor {
            type Value = ColumnSet;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"*\" or a list of column names")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ColumnSet, E> {
                if v == "*" {
                    Ok(ColumnSet::All)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> Result<ColumnSet, A::Error> {
                let mut cols = BTreeSet::new();
                while let Some(c) = seq.next_element::<String>()? {
                    if c.is_empty() {
                        return Err(de::Error::custom("column names must be non-empty"));
                    }
                    cols.insert(c);
                }
                Ok(ColumnSet::Explicit(cols))
            }
        }

        deserializer.deserialize_any(ColumnSetVisitor)
    }
}

/// A data source `symbol` with the columns referenced on it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DataSourceRef {
    pub symbol: String,
    pub columns: ColumnSet,
}

impl DataSourceRef {
    pub fn new(symbol: &str, columns: ColumnSet) -> Result<Self, ModelError> {
        let symbol = normalize_symbol(symbol);
        if symbol.is_empty() {
            return Err(ModelError::EmptySymbol);
        }
        Ok(Self { symbol, columns })
    }
}

impl fmt::Display for DataSourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.symbol, self.columns)
    }
}

/// A set of data sources keyed by symbol. Inserting a symbol twice merges the
/// column sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MappingSet {
    entries: BTreeMap<String, ColumnSet>,
}

impl MappingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(symbol: &str, columns: ColumnSet) -> Self {
        let mut m = Self::new();
        m.insert(symbol, columns);
        m
    }

    /// Merges `columns` into the entry for `symbol`; returns whether the set grew.
    /// Empty symbols are ignored.
    pub fn insert(&mut self, symbol: &str, columns: ColumnSet) -> bool {
        let symbol = normalize_symbol(symbol);
        if symbol.is_empty() {
            return false;
        }
        match self.entries.entry(symbol) {
            btree_map::Entry::Vacant(v) => {
                v.insert(columns);
                true
            }
            btree_map::Entry::Occupied(mut o) => o.get_mut().union_with(&columns),
        }
    }

    pub fn insert_ref(&mut self, source: DataSourceRef) -> bool {
        self.insert(&source.symbol, source.columns)
    }

    pub fn get(&self, symbol: &str) -> Option<&ColumnSet> {
        self.entries.get(symbol)
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.entries.contains_key(symbol)
    }

    pub fn remove(&mut self, symbol: &str) -> Option<ColumnSet> {
        self.entries.remove(symbol)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ColumnSet)> {
        self.entries.iter().map(|(s, c)| (s.as_str(), c))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn refs(&self) -> impl Iterator<Item = DataSourceRef> + '_ {
        self.entries.iter().map(|(s, c)| DataSourceRef { symbol: s.clone(), columns: c.clone() })
    }

    /// Piecewise union.
    pub fn join(&self, other: &MappingSet) -> MappingSet {
        let mut out = self.clone();
        out.join_with(other);
        out
    }

    /// In-place piecewise union; returns whether `self` grew.
    pub fn join_with(&mut self, other: &MappingSet) -> bool {
        let mut changed = false;
        for (symbol, cols) in &other.entries {
            match self.entries.get_mut(symbol) {
                Some(mine) => changed |= mine.union_with(cols),
                None => {
                    self.entries.insert(symbol.clone(), cols.clone());
                    changed = true;
                }
            }
        }
        changed
    }

    pub fn leq(&self, other: &MappingSet) -> bool {
        self.entries.iter().all(|(s, c)| other.entries.get(s).is_some_and(|o| c.leq(o)))
    }

    /// Projects every source onto `columns`. Returns the projected set and the
    /// symbols whose known columns were disjoint from the request.
    pub fn constrain(&self, columns: &BTreeSet<String>) -> Result<(MappingSet, Vec<String>), ModelError> {
        let mut out = MappingSet::new();
        let mut disjoint = Vec::new();
        for (symbol, cols) in &self.entries {
            let (projected, miss) = cols.constrain(columns)?;
            if miss {
                disjoint.push(symbol.clone());
            }
            out.entries.insert(symbol.clone(), projected);
        }
        Ok((out, disjoint))
    }

    /// Keeps only entries whose symbol satisfies `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&str) -> bool) {
        self.entries.retain(|s, _| keep(s));
    }
}

impl fmt::Display for MappingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (s, c)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}^{c}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<DataSourceRef> for MappingSet {
    fn from_iter<T: IntoIterator<Item = DataSourceRef>>(iter: T) -> Self {
        let mut m = MappingSet::new();
        for r in iter {
            m.insert_ref(r);
        }
        m
    }
}

impl<'a> FromIterator<(&'a str, ColumnSet)> for MappingSet {
    fn from_iter<T: IntoIterator<Item = (&'a str, ColumnSet)>>(iter: T) -> Self {
        let mut m = MappingSet::new();
        for (s, c) in iter {
            m.insert(s, c);
        }
        m
    }
}

/// The result of analyzing one activity artifact.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ActivityAnalysis {
    /// Sources reaching a model call (`I`).
    pub mapping: MappingSet,
    /// Symbols read by the activity.
    pub reads: MappingSet,
    /// Written symbols with the sources flowing into each.
    pub writes: BTreeMap<String, MappingSet>,
    pub has_sink: bool,
    /// Set when the artifact could not be parsed and the result was derived
    /// from manifest declarations.
    pub fallback: bool,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityKind {
    Script,
    Query,
}

/// One unit of pipeline work: a script or a query artifact.
#[derive(Debug)]
pub struct Activity {
    pub id: String,
    pub kind: ActivityKind,
    /// Path relative to the repository root.
    pub artifact_path: PathBuf,
    pub declared_inputs: Option<Vec<String>>,
    pub declared_outputs: Option<Vec<String>>,
    /// Manifest override marking this activity as the model.
    pub model: Option<bool>,
    /// Artifact text, or the reason it could not be read.
    pub content: Result<Arc<str>, String>,
    analysis_cache: OnceLock<Result<ActivityAnalysis, String>>,
}

impl Clone for Activity {
    fn clone(&self) -> Self {
        Self {
            id: self.id.clone(),
            kind: self.kind,
            artifact_path: self.artifact_path.clone(),
            declared_inputs: self.declared_inputs.clone(),
            declared_outputs: self.declared_outputs.clone(),
            model: self.model,
            content: self.content.clone(),
            analysis_cache: self.analysis_cache.clone(),
        }
    }
}

impl Activity {
    pub fn new(
        id: impl Into<String>,
        kind: ActivityKind,
        artifact_path: impl Into<PathBuf>,
        content: Result<Arc<str>, String>,
    ) -> Self {
        Self {
            id: id.into(),
            kind,
            artifact_path: artifact_path.into(),
            declared_inputs: None,
            declared_outputs: None,
            model: None,
            content,
            analysis_cache: OnceLock::new(),
        }
    }

    pub fn with_declarations(
        mut self,
        inputs: Option<Vec<String>>,
        outputs: Option<Vec<String>>,
        model: Option<bool>,
    ) -> Self {
        self.declared_inputs = inputs.map(|v| v.iter().map(|s| normalize_symbol(s)).collect());
        self.declared_outputs = outputs.map(|v| v.iter().map(|s| normalize_symbol(s)).collect());
        self.model = model;
        self
    }

    /// Write-once memo of the activity's analysis; concurrent callers race to
    /// initialize and all observe the same value.
    pub fn cached_analysis(
        &self,
        compute: impl FnOnce() -> Result<ActivityAnalysis, String>,
    ) -> &Result<ActivityAnalysis, String> {
        self.analysis_cache.get_or_init(compute)
    }

    pub fn analysis_cache(&self) -> Option<&Result<ActivityAnalysis, String>> {
        self.analysis_cache.get()
    }
}

/// Activities connected through the symbols they read and write.
#[derive(Clone, Debug, Default)]
pub struct ActivityGraph {
    pub id: String,
    pub activities: Vec<Activity>,
    /// activity id → symbols read. Empty until the graph has been analyzed.
    pub reads: BTreeMap<String, BTreeSet<String>>,
    /// activity id → symbols written. Empty until the graph has been analyzed.
    pub writes: BTreeMap<String, BTreeSet<String>>,
    /// The model activity, once known.
    pub start: Option<String>,
}

impl ActivityGraph {
    pub fn new(id: impl Into<String>, activities: Vec<Activity>) -> Self {
        Self { id: id.into(), activities, ..Default::default() }
    }

    pub fn activity(&self, id: &str) -> Option<&Activity> {
        self.activities.iter().find(|a| a.id == id)
    }

    /// Whether some activity in the graph writes `symbol`.
    pub fn derived(&self, symbol: &str) -> bool {
        self.writes.values().any(|w| w.contains(symbol))
    }

    /// Activities whose writes contain `symbol`, in id order.
    pub fn deps(&self, symbol: &str) -> Vec<&str> {
        self.writes.iter().filter(|(_, w)| w.contains(symbol)).map(|(a, _)| a.as_str()).collect()
    }

    /// Implied edges `a → b` where `a` writes something `b` reads.
    pub fn edges(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (a, w) in &self.writes {
            for (b, r) in &self.reads {
                if !w.is_disjoint(r) {
                    out.push((a.as_str(), b.as_str()));
                }
            }
        }
        out
    }

    /// Every symbol read or written in the graph.
    pub fn symbols(&self) -> BTreeSet<&str> {
        self.reads.values().chain(self.writes.values()).flatten().map(String::as_str).collect()
    }
}

/// A loaded repository: its graphs plus, once analyzed, the model outputs
/// `O_A` of each graph.
#[derive(Clone, Debug, Default)]
pub struct Repository {
    pub root: PathBuf,
    pub graphs: Vec<ActivityGraph>,
    pub model_outputs: BTreeMap<String, MappingSet>,
    pub config: AnalyzerConfig,
    /// Hex SHA-256 over the manifest, analyzer config and artifact bytes.
    pub fingerprint: String,
}
