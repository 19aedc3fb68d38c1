//! The table of `R_n`, computed on demand and optionally persisted.
//!
//! Cache layout: one `R<n>.json` per order in the polynomial file format plus a
//! `manifest.json` holding the format version and a sha256 per file. A file
//! whose hash disagrees with the manifest, or that the manifest does not list,
//! is reported as corrupt and left alone.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::format;
use crate::ops::{recursion_step, OpError};
use crate::poly::Poly;

/// Bumped whenever the on-disk polynomial format changes.
pub const FORMAT_VERSION: u32 = 1;

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("R_n is defined for n >= 2, got {0}")]
    Order(u32),
    #[error("cache I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt cache entry {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("computation failed: {0}")]
    Compute(#[from] OpError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    files: BTreeMap<String, String>,
}

impl Manifest {
    fn empty() -> Self {
        Manifest {
            format_version: FORMAT_VERSION,
            files: BTreeMap::new(),
        }
    }
}

#[derive(Debug)]
struct Cache {
    dir: PathBuf,
    manifest: Manifest,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TableError + '_ {
    move |source| TableError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn file_name(n: u32) -> String {
    format!("R{n}.json")
}

/// Writes through a temporary file in the same directory and renames it over
/// the target.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), TableError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile_in(dir, path)?;
    tmp.1.write_all(bytes).map_err(io_err(&tmp.0))?;
    tmp.1.sync_all().map_err(io_err(&tmp.0))?;
    drop(tmp.1);
    fs::rename(&tmp.0, path).map_err(io_err(path))
}

fn tempfile_in(dir: &Path, target: &Path) -> Result<(PathBuf, fs::File), TableError> {
    let stem = target.file_name().and_then(|s| s.to_str()).unwrap_or("tmp");
    let tmp = dir.join(format!(".{stem}.{}.tmp", std::process::id()));
    let f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    Ok((tmp, f))
}

impl Cache {
    fn open(dir: &Path) -> Result<Self, TableError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mpath = dir.join(MANIFEST);
        let manifest = match fs::read(&mpath) {
            Ok(bytes) => {
                let m: Manifest =
                    serde_json::from_slice(&bytes).map_err(|e| TableError::Corrupt {
                        path: mpath.clone(),
                        reason: e.to_string(),
                    })?;
                if m.format_version == FORMAT_VERSION {
                    m
                } else {
                    for name in m.files.keys() {
                        let p = dir.join(name);
                        if p.exists() {
                            fs::remove_file(&p).map_err(io_err(&p))?;
                        }
                    }
                    let fresh = Manifest::empty();
                    write_atomic(&mpath, &serde_json::to_vec_pretty(&fresh).unwrap())?;
                    fresh
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Manifest::empty(),
            Err(e) => return Err(io_err(&mpath)(e)),
        };
        Ok(Cache {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    fn load(&self, n: u32) -> Result<Option<Poly>, TableError> {
        let name = file_name(n);
        let path = self.dir.join(&name);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                if self.manifest.files.contains_key(&name) {
                    return Err(TableError::Corrupt {
                        path,
                        reason: "listed in manifest but missing".into(),
                    });
                }
                return Ok(None);
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        let corrupt = |reason: String| TableError::Corrupt {
            path: path.clone(),
            reason,
        };
        let expected = self
            .manifest
            .files
            .get(&name)
            .ok_or_else(|| corrupt("file not recorded in manifest".into()))?;
        let found = sha256_hex(&bytes);
        if &found != expected {
            return Err(corrupt(format!(
                "sha256 {found} does not match manifest {expected}"
            )));
        }
        let file = format::parse(&bytes).map_err(|e| corrupt(e.to_string()))?;
        if file.n != n {
            return Err(corrupt(format!("declares order {} instead of {n}", file.n)));
        }
        Ok(Some(file.poly))
    }

    fn store(&mut self, n: u32, p: &Poly) -> Result<(), TableError> {
        let name = file_name(n);
        let bytes = format::serialize(p, n).into_bytes();
        write_atomic(&self.dir.join(&name), &bytes)?;
        self.manifest.files.insert(name, sha256_hex(&bytes));
        let manifest = serde_json::to_vec_pretty(&self.manifest).expect("manifest serializes");
        write_atomic(&self.dir.join(MANIFEST), &manifest)
    }
}

/// Lazily filled map from order `n` to `R_n`.
///
/// Safe to share between threads. Computation of missing orders is serialized
/// by an internal lock, so each order is computed and written at most once.
#[derive(Debug)]
pub struct RnTable {
    entries: Mutex<BTreeMap<u32, Arc<Poly>>>,
    cache: Mutex<Option<Cache>>,
}

impl Default for RnTable {
    fn default() -> Self {
        RnTable::in_memory()
    }
}

impl RnTable {
    pub fn in_memory() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(2, Arc::new(Poly::zero()));
        RnTable {
            entries: Mutex::new(entries),
            cache: Mutex::new(None),
        }
    }

    /// A table backed by `dir`, created if needed.
    pub fn with_cache_dir<P: AsRef<Path>>(dir: P) -> Result<Self, TableError> {
        let t = RnTable::in_memory();
        *t.cache.lock().unwrap() = Some(Cache::open(dir.as_ref())?);
        Ok(t)
    }

    pub fn cache_dir(&self) -> Option<PathBuf> {
        self.cache.lock().unwrap().as_ref().map(|c| c.dir.clone())
    }

    fn cached(&self, n: u32) -> Option<Arc<Poly>> {
        self.entries.lock().unwrap().get(&n).cloned()
    }

    /// `R_n`, computing (or loading) every missing lower order first.
    pub fn get(&self, n: u32) -> Result<Arc<Poly>, TableError> {
        if n < 2 {
            return Err(TableError::Order(n));
        }
        if let Some(p) = self.cached(n) {
            return Ok(p);
        }
        // Holding the cache lock for the whole fill makes this the single writer.
        let mut cache = self.cache.lock().unwrap();
        if let Some(p) = self.cached(n) {
            return Ok(p);
        }
        let (mut k, mut cur) = {
            let entries = self.entries.lock().unwrap();
            let (&k, p) = entries
                .range(..n)
                .next_back()
                .expect("R_2 is always present");
            (k, p.clone())
        };
        while k < n {
            let next = k + 1;
            let loaded = match cache.as_ref() {
                Some(c) => c.load(next)?,
                None => None,
            };
            let p = match loaded {
                Some(p) => p,
                None => {
                    let p = recursion_step(&cur, k)?;
                    if let Some(c) = cache.as_mut() {
                        c.store(next, &p)?;
                    }
                    p
                }
            };
            cur = Arc::new(p);
            self.entries.lock().unwrap().insert(next, cur.clone());
            k = next;
        }
        Ok(cur)
    }

    /// Alias of [`RnTable::get`].
    pub fn compute_rn(&self, n: u32) -> Result<Arc<Poly>, TableError> {
        self.get(n)
    }

    pub fn term_count(&self, n: u32) -> Result<usize, TableError> {
        Ok(self.get(n)?.len())
    }

    /// Orders currently held in memory.
    pub fn orders(&self) -> Vec<u32> {
        self.entries.lock().unwrap().keys().copied().collect()
    }
}
