use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{IoError, Result};

/// Writes `bytes` to a temporary file beside `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(IoError::file(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(IoError::file(dir))?;
    tmp.write_all(bytes).map_err(IoError::file(path))?;
    tmp.as_file().sync_all().map_err(IoError::file(path))?;
    tmp.persist(path).map_err(|e| IoError::File {
        path: path.into(),
        source: e.error,
    })?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json_atomic<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| IoError::Json { line: 0, source })?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
