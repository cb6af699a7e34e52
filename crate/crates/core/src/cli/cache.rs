//! Content-addressed on-disk cache for stage artifacts.
//!
//! An artifact is stored under `<dir>/<stage>/<sha256>.json`, where the
//! hash covers the stage name, the crate version and the canonical JSON
//! of the stage inputs. Without a directory every lookup is a miss.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "PQCYCLES_CACHE_DIR";

#[derive(Clone, Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    pub fn from_env() -> Self {
        Cache::new(std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn key(stage: &str, inputs: &Value) -> String {
        let mut h = Sha256::new();
        h.update(stage.as_bytes());
        h.update([0]);
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update([0]);
        // serde_json writes object keys in sorted order, so this is canonical.
        h.update(inputs.to_string().as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, stage: &str, inputs: &Value) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(stage).join(format!("{}.json", Cache::key(stage, inputs))))
    }

    /// Cached artifact, if present and readable.
    pub fn get(&self, stage: &str, inputs: &Value) -> Option<Value> {
        let text = fs::read_to_string(self.path(stage, inputs)?).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, stage: &str, inputs: &Value, artifact: &Value) -> Result<()> {
        let Some(path) = self.path(stage, inputs) else { return Ok(()) };
        let parent = path.parent().expect("artifact path has a parent");
        fs::create_dir_all(parent)?;
        // Write then rename so a concurrent reader never sees a partial file.
        let tmp = parent.join(format!(".{}.tmp", std::process::id()));
        fs::write(&tmp, serde_json::to_string(artifact)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Returns the cached artifact or computes, stores and returns it.
    pub fn get_or_compute(&self, stage: &str, inputs: &Value, f: impl FnOnce() -> Result<Value>) -> Result<Value> {
        if let Some(v) = self.get(stage, inputs) {
            return Ok(v);
        }
        let v = f()?;
        self.put(stage, inputs, &v)?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;
    use std::cell::Cell;

    #[test]
    fn second_lookup_hits() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(Some(dir.path().to_path_buf()));
        let calls = Cell::new(0);
        let compute = || {
            calls.set(calls.get() + 1);
            Ok(json!({"x": "1/3"}))
        };
        let a = cache.get_or_compute("jet", &json!({"n": 3}), compute).unwrap();
        let b = cache.get_or_compute("jet", &json!({"n": 3}), compute).unwrap();
        assert_eq!(a, b);
        assert_eq!(calls.get(), 1);
        cache.get_or_compute("jet", &json!({"n": 4}), compute).unwrap();
        assert_eq!(calls.get(), 2);
    }

    #[test]
    fn keys_depend_on_stage_and_inputs() {
        let k = Cache::key("jet", &json!({"a": 1, "b": 2}));
        assert_eq!(k, Cache::key("jet", &json!({"b": 2, "a": 1})));
        assert_ne!(k, Cache::key("ladder", &json!({"a": 1, "b": 2})));
        assert_eq!(k.len(), 64);
    }

    #[test]
    fn disabled_cache_always_computes() {
        let cache = Cache::new(None);
        assert!(cache.get("jet", &json!(1)).is_none());
        cache.put("jet", &json!(1), &json!(2)).unwrap();
        assert!(cache.get("jet", &json!(1)).is_none());
    }
}
