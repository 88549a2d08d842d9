use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::doi::Doi;
use crate::hashing::sha256_hex;

/// On-disk payload cache laid out as `<root>/<source>/<doi-hash>.json`.
///
/// An empty file records "the source had nothing for this DOI". Writes go
/// through a temp file and rename, serialized per key.
#[derive(Debug)]
pub struct DiskCache {
    root: PathBuf,
    locks: Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>,
}

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> DiskCache {
        DiskCache { root: root.into(), locks: Mutex::new(HashMap::new()) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, source: &str, doi: &Doi) -> PathBuf {
        self.root.join(source).join(format!("{}.json", sha256_hex(doi.as_str().as_bytes())))
    }

    fn key_lock(&self, path: &Path) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("cache lock table poisoned");
        locks.entry(path.to_path_buf()).or_default().clone()
    }

    /// `Ok(None)` on a miss, `Ok(Some(None))` for a cached empty result.
    pub fn get(&self, source: &str, doi: &Doi) -> std::io::Result<Option<Option<Vec<u8>>>> {
        let path = self.path_for(source, doi);
        let lock = self.key_lock(&path);
        let _guard = lock.lock().expect("cache key lock poisoned");
        match fs::read(&path) {
            Ok(bytes) if bytes.is_empty() => Ok(Some(None)),
            Ok(bytes) => Ok(Some(Some(bytes))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn put(&self, source: &str, doi: &Doi, payload: Option<&[u8]>) -> std::io::Result<()> {
        let path = self.path_for(source, doi);
        let lock = self.key_lock(&path);
        let _guard = lock.lock().expect("cache key lock poisoned");
        let dir = path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(payload.unwrap_or_default())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)
    }
}
