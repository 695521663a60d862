//! Insert-once store of trained models, optionally mirrored to a directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use mode_core::models::{load_model, save_model, ModelError, TrainedModel};
use serde::Serialize;

#[derive(Debug)]
pub struct Entry {
    pub id: String,
    pub name: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub model: TrainedModel,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub model_id: String,
    pub name: String,
    pub created_at: u64,
    pub model_kind: String,
    pub outcome: String,
}

impl Entry {
    pub fn summary(&self) -> Summary {
        Summary {
            model_id: self.id.clone(),
            name: self.name.clone(),
            created_at: self.created_at,
            model_kind: self.model.kind().to_string(),
            outcome: self.model.outcome.clone(),
        }
    }
}

#[derive(Debug, Default)]
pub struct Registry {
    entries: RwLock<BTreeMap<String, Arc<Entry>>>,
    dir: Option<PathBuf>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry backed by `dir`: existing `*.json` model files are loaded,
    /// new registrations are written there.
    pub fn with_dir(dir: impl AsRef<Path>) -> Result<Self, ModelError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut entries = BTreeMap::new();
        for path in paths {
            let model = load_model(&path)?;
            let id = model.content_id();
            let name = path
                .file_stem()
                .map_or_else(|| id.clone(), |s| s.to_string_lossy().into_owned());
            let created_at = std::fs::metadata(&path)
                .and_then(|m| m.modified())
                .ok()
                .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
                .map_or(0, |d| d.as_secs());
            entries.insert(
                id.clone(),
                Arc::new(Entry {
                    id,
                    name,
                    created_at,
                    model,
                }),
            );
        }
        Ok(Self {
            entries: RwLock::new(entries),
            dir: Some(dir),
        })
    }

    pub fn get(&self, id: &str) -> Option<Arc<Entry>> {
        self.entries.read().expect("registry lock").get(id).cloned()
    }

    pub fn list(&self) -> Vec<Summary> {
        self.entries
            .read()
            .expect("registry lock")
            .values()
            .map(|e| e.summary())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("registry lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Publishes `model` under its content id. A model already present is
    /// left untouched and returned.
    pub fn insert(&self, name: Option<String>, model: TrainedModel) -> Result<Arc<Entry>, ModelError> {
        let id = model.content_id();
        if let Some(existing) = self.get(&id) {
            return Ok(existing);
        }
        if let Some(dir) = &self.dir {
            save_model(&model, dir.join(format!("{id}.json")))?;
        }
        let entry = Arc::new(Entry {
            name: name.unwrap_or_else(|| id.clone()),
            id: id.clone(),
            created_at: now(),
            model,
        });
        let mut map = self.entries.write().expect("registry lock");
        Ok(map.entry(id).or_insert(entry).clone())
    }
}
