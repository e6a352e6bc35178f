//! Output staging and the run manifest.
//!
//! Artifacts are rendered in memory, written into a hidden temporary
//! directory inside the output directory and only then renamed into place,
//! manifest last. A failed run leaves no artifact behind.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A file named by its base name and content digest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        let file = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        FileDigest {
            file,
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        }
    }
}

/// Reproduction record of one run. Paths are reduced to base names so the
/// manifest depends only on input contents and parameters.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub inputs: BTreeMap<String, FileDigest>,
    pub seeds: BTreeMap<&'static str, u64>,
    pub params: serde_json::Value,
    pub artifacts: Vec<FileDigest>,
}

/// Rendered artifacts waiting to be committed.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        let name = name.into();
        debug_assert!(self.files.iter().all(|(n, _)| *n != name));
        self.files.push((name, bytes));
    }

    /// Serialises `rows` as CSV. The header row is written even for an empty
    /// table and must match the row fields.
    pub fn csv<S: Serialize>(
        &mut self,
        name: impl Into<String>,
        header: &[&str],
        rows: impl IntoIterator<Item = S>,
    ) -> CliResult<()> {
        let name = name.into();
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut empty = true;
        for row in rows {
            wtr.serialize(row).map_err(render_error)?;
            empty = false;
        }
        if empty {
            wtr.write_record(header).map_err(render_error)?;
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| render_error(e.into_error().into()))?;
        let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
        let expected = header.join(",");
        if first != expected.as_bytes() {
            return Err(CliError::Invariant(format!(
                "{name}: header `{}` does not match `{expected}`",
                String::from_utf8_lossy(first)
            )));
        }
        self.add(name, bytes);
        Ok(())
    }

    pub fn json<S: Serialize>(&mut self, name: impl Into<String>, value: &S) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| CliError::Invariant(format!("cannot render JSON: {e}")))?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Raw bytes produced by a writer callback.
    pub fn with_writer(
        &mut self,
        name: impl Into<String>,
        f: impl FnOnce(&mut Vec<u8>) -> millscope::Result<()>,
    ) -> CliResult<()> {
        let mut bytes = Vec::new();
        f(&mut bytes)?;
        self.add(name, bytes);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn digests(&self) -> Vec<FileDigest> {
        self.files
            .iter()
            .map(|(name, bytes)| FileDigest::of(Path::new(name), bytes))
            .collect()
    }

    /// Writes every artifact plus `manifest_name` into `out_dir`.
    pub fn commit(
        mut self,
        out_dir: &Path,
        manifest_name: &str,
        manifest: &Manifest,
    ) -> CliResult<Vec<PathBuf>> {
        self.json(manifest_name, manifest)?;
        fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
        let staging = tempfile::Builder::new()
            .prefix(".millscope-")
            .tempdir_in(out_dir)
            .map_err(|e| io_error(out_dir, e))?;
        for (name, bytes) in &self.files {
            let path = staging.path().join(name);
            let mut file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
            file.write_all(bytes).map_err(|e| io_error(&path, e))?;
            file.sync_all().map_err(|e| io_error(&path, e))?;
        }
        let mut written = Vec::with_capacity(self.files.len());
        for (name, _) in &self.files {
            let target = out_dir.join(name);
            if let Err(e) = fs::rename(staging.path().join(name), &target) {
                for done in &written {
                    let _ = fs::remove_file(done);
                }
                return Err(io_error(&target, e));
            }
            written.push(target);
        }
        Ok(written)
    }
}

fn render_error(e: csv::Error) -> CliError {
    CliError::Invariant(format!("cannot render CSV: {e}"))
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}
