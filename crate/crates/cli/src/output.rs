//! Atomic file output with provenance sidecars.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

pub const META_SUFFIX: &str = ".meta.json";

/// Writes `bytes` to `path` via a temporary file in the same directory, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(META_SUFFIX);
    path.with_file_name(name)
}

#[derive(Serialize)]
struct Sidecar<'a, M: Serialize> {
    file: &'a str,
    tool: &'static str,
    version: &'static str,
    #[serde(flatten)]
    meta: &'a M,
}

/// Writes `bytes` to `dir/name` and the provenance record to `dir/name.meta.json`.
pub fn write_with_meta<M: Serialize>(
    dir: &Path,
    name: &str,
    bytes: &[u8],
    meta: &M,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    write_atomic(&path, bytes)?;
    let sidecar = Sidecar {
        file: name,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        meta,
    };
    let mut json = serde_json::to_string_pretty(&sidecar)?;
    json.push('\n');
    write_atomic(&meta_path(&path), json.as_bytes())?;
    Ok(path)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_file_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_with_meta(
            dir.path(),
            "x.csv",
            b"a,b\n",
            &serde_json::json!({"sigma": 0.5}),
        )
        .unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n");
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(meta_path(&path)).unwrap()).unwrap();
        assert_eq!(meta["file"], "x.csv");
        assert_eq!(meta["sigma"], 0.5);
        // overwrite in place
        write_atomic(&path, b"c\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "c\n");
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 2, "no stray temp files: {names:?}");
    }
}
