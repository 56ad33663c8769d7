//! Loading a repository checkout: the `depmap.json` manifest, the optional
//! `analyzer.json` config and the artifact files.

use std::collections::BTreeSet;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::IngestError;
use crate::model::{normalize_symbol, Activity, ActivityGraph, ActivityKind, Repository};
use crate::script::AnalyzerConfig;

pub const MANIFEST_FILE: &str = "depmap.json";
pub const CONFIG_FILE: &str = "analyzer.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDoc {
    pub schema_version: u32,
    pub graphs: Vec<GraphDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub id: String,
    pub activities: Vec<ActivityDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityDoc {
    pub id: String,
    pub kind: ActivityKind,
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<bool>,
}

impl ManifestDoc {
    /// Parses and validates manifest text. Paths and symbols are normalized
    /// so that serializing the result is idempotent.
    pub fn parse(text: &str) -> Result<ManifestDoc, IngestError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut doc: ManifestDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            if inner.is_data() {
                IngestError::Schema { field, message: inner.to_string() }
            } else {
                IngestError::Malformed { field, message: inner.to_string() }
            }
        })?;
        doc.normalize();
        doc.validate()?;
        Ok(doc)
    }

    fn normalize(&mut self) {
        for g in &mut self.graphs {
            for a in &mut g.activities {
                a.path = normalize_symbol(&a.path);
                for list in [&mut a.inputs, &mut a.outputs].into_iter().flatten() {
                    *list = list.iter().map(|s| normalize_symbol(s)).collect();
                }
            }
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(IngestError::Schema {
                field: "schema_version".into(),
                message: format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            });
        }
        let mut graph_ids = BTreeSet::new();
        for (gi, g) in self.graphs.iter().enumerate() {
            let gf = format!("graphs[{gi}]");
            non_empty(&g.id, &format!("{gf}.id"))?;
            if !graph_ids.insert(&g.id) {
                return Err(IngestError::DuplicateId { field: format!("{gf}.id"), id: g.id.clone() });
            }
            let mut ids = BTreeSet::new();
            for (ai, a) in g.activities.iter().enumerate() {
                let af = format!("{gf}.activities[{ai}]");
                non_empty(&a.id, &format!("{af}.id"))?;
                if !ids.insert(&a.id) {
                    return Err(IngestError::DuplicateId { field: format!("{af}.id"), id: a.id.clone() });
                }
                if !is_contained(Path::new(&a.path)) {
                    return Err(IngestError::PathEscape {
                        field: format!("{af}.path"),
                        activity: a.id.clone(),
                        path: a.path.clone(),
                    });
                }
                for (name, list) in [("inputs", &a.inputs), ("outputs", &a.outputs)] {
                    for (si, s) in list.iter().flatten().enumerate() {
                        non_empty(s, &format!("{af}.{name}[{si}]"))?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn non_empty(value: &str, field: &str) -> Result<(), IngestError> {
    if value.trim().is_empty() {
        return Err(IngestError::Schema { field: field.into(), message: "must be a non-empty string".into() });
    }
    Ok(())
}

/// Relative, non-empty, and free of `..` components.
fn is_contained(path: &Path) -> bool {
    path.components().next().is_some()
        && path.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

pub fn load_manifest(root: &Path) -> Result<ManifestDoc, IngestError> {
    if !root.is_dir() {
        return Err(IngestError::MissingRoot(root.to_path_buf()));
    }
    let path = root.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => IngestError::MissingManifest(path.clone()),
        _ => IngestError::Io { path: path.clone(), source },
    })?;
    ManifestDoc::parse(&text)
}

/// Reads an artifact, refusing anything whose resolved location (after
/// symlinks) is outside `root`.
fn read_artifact(root: &Path, rel: &str) -> Result<Arc<str>, String> {
    let canonical_root = root.canonicalize().map_err(|e| e.to_string())?;
    let full = canonical_root.join(rel).canonicalize().map_err(|e| e.to_string())?;
    if !full.starts_with(&canonical_root) {
        return Err("resolves outside the repository root".into());
    }
    std::fs::read_to_string(&full).map(Arc::from).map_err(|e| e.to_string())
}

pub fn build_repository(doc: &ManifestDoc, root: &Path) -> Result<Repository, IngestError> {
    let config_bytes = match std::fs::read(root.join(CONFIG_FILE)) {
        Ok(b) => Some(b),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(source) => return Err(IngestError::Io { path: root.join(CONFIG_FILE), source }),
    };
    let config = AnalyzerConfig::load_or_default(&root.join(CONFIG_FILE))?;

    let mut hasher = Sha256::new();
    let canonical = serde_json::to_vec(doc).expect("manifest serializes");
    hash_field(&mut hasher, MANIFEST_FILE, &canonical);
    hash_field(&mut hasher, CONFIG_FILE, config_bytes.as_deref().unwrap_or_default());

    let mut graphs = Vec::new();
    for g in &doc.graphs {
        let mut activities = Vec::new();
        for a in &g.activities {
            let content = read_artifact(root, &a.path);
            match &content {
                Ok(text) => hash_field(&mut hasher, &a.path, text.as_bytes()),
                Err(_) => hash_field(&mut hasher, &a.path, b"\0missing"),
            }
            activities.push(Activity::new(a.id.clone(), a.kind, PathBuf::from(&a.path), content).with_declarations(
                a.inputs.clone(),
                a.outputs.clone(),
                a.model,
            ));
        }
        graphs.push(ActivityGraph::new(g.id.clone(), activities));
    }
    Ok(Repository {
        root: root.to_path_buf(),
        graphs,
        model_outputs: Default::default(),
        config,
        fingerprint: hex::encode(hasher.finalize()),
    })
}

/// Length-prefixed so that field boundaries cannot collide.
fn hash_field(hasher: &mut Sha256, name: &str, bytes: &[u8]) {
    for part in [name.as_bytes(), bytes] {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
}

/// Manifest plus repository in one step.
pub fn load_repository(root: &Path) -> Result<Repository, IngestError> {
    build_repository(&load_manifest(root)?, root)
}
