//! World persistence: one JSON file per chunk plus a manifest.
//!
//! Chunk files are written before the manifest and every file goes through
//! a temporary file and a rename, so a crash leaves either the old manifest
//! or the new one, never half of either. Chunks are immutable, so a chunk
//! file that already exists is not written again.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nwfc_core::{ChunkStore, WorldConfig, WorldError};

use crate::doc::{to_compact, ChunkDoc, ManifestDoc};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt file {}: {detail}", path.display())]
    Corrupt { path: PathBuf, detail: String },
    #[error("world uses tileset {found}, expected {expected}")]
    HashMismatch { expected: String, found: String },
    #[error("world seed is {found}, expected {expected}")]
    SeedMismatch { expected: u64, found: u64 },
    #[error("world chunk size is {found}, expected {expected}")]
    ChunkSizeMismatch { expected: usize, found: usize },
    #[error("{}: {source}", path.display())]
    World { path: PathBuf, source: WorldError },
}

pub fn chunk_file_name(a: u32, b: u32) -> String {
    format!("chunk_{a}_{b}.json")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistError + '_ {
    move |source| PersistError::Io { path: path.to_owned(), source }
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PersistError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(tmp.path()))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| PersistError::Io { path: path.to_owned(), source: e.error })?;
    Ok(())
}

/// Saves every chunk not yet on disk, then the manifest.
pub fn save_world(store: &ChunkStore, dir: &Path) -> Result<(), PersistError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for chunk in store.chunks() {
        let path = dir.join(chunk_file_name(chunk.a, chunk.b));
        if path.exists() {
            continue;
        }
        write_atomic(&path, to_compact(&ChunkDoc::from(chunk)).as_bytes())?;
    }
    let manifest = ManifestDoc::new(store.config(), store.generation_order());
    write_atomic(&dir.join(MANIFEST_FILE), to_compact(&manifest).as_bytes())
}

/// Reads the manifest of a saved world.
pub fn read_manifest(dir: &Path) -> Result<ManifestDoc, PersistError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| PersistError::Corrupt { path, detail: e.to_string() })
}

/// Loads a saved world, checking that it was generated with `expected`.
pub fn load_world(dir: &Path, expected: &WorldConfig) -> Result<ChunkStore, PersistError> {
    let manifest = read_manifest(dir)?;
    if manifest.tileset_hash != expected.tileset_hash {
        return Err(PersistError::HashMismatch {
            expected: expected.tileset_hash.clone(),
            found: manifest.tileset_hash,
        });
    }
    if manifest.world_seed != expected.world_seed {
        return Err(PersistError::SeedMismatch { expected: expected.world_seed, found: manifest.world_seed });
    }
    if manifest.chunk != expected.chunk_size {
        return Err(PersistError::ChunkSizeMismatch { expected: expected.chunk_size, found: manifest.chunk });
    }
    let mut chunks = Vec::with_capacity(manifest.chunks.len());
    for &[a, b] in &manifest.chunks {
        let path = dir.join(chunk_file_name(a, b));
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let corrupt = |detail: String| PersistError::Corrupt { path: path.clone(), detail };
        let doc: ChunkDoc = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        if (doc.a, doc.b) != (a, b) {
            return Err(corrupt(format!("file holds chunk ({}, {})", doc.a, doc.b)));
        }
        chunks.push(doc.to_chunk().map_err(|e| corrupt(e.to_string()))?);
    }
    let mut store =
        ChunkStore::new(manifest.config()).map_err(|source| PersistError::World { path: dir.to_owned(), source })?;
    // insert in manifest order so the generation order survives the round trip
    for chunk in chunks {
        let path = dir.join(chunk_file_name(chunk.a, chunk.b));
        store.insert(chunk).map_err(|source| match source {
            WorldError::HashMismatch { expected, got } => PersistError::HashMismatch { expected, found: got },
            source => PersistError::World { path, source },
        })?;
    }
    Ok(store)
}
