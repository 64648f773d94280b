//! All-or-nothing output files and directories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

fn parent_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Write `bytes` to a temporary file next to `path`, then rename it into
/// place.
pub fn write_file_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let parent = parent_of(path);
    let io = |e: std::io::Error| CliError::io(path, e);
    let mut tmp = tempfile::NamedTempFile::new_in(&parent).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Build a directory tree in a temporary sibling of `path` with `fill`, then
/// rename it to `path`. An existing empty directory at `path` is replaced;
/// anything else there is an error.
pub fn write_dir_atomic(
    path: &Path,
    fill: impl FnOnce(&Path) -> Result<(), CliError>,
) -> Result<(), CliError> {
    if path.exists() {
        let empty = path.is_dir()
            && fs::read_dir(path)
                .map_err(|e| CliError::io(path, e))?
                .next()
                .is_none();
        if !empty {
            return Err(CliError::Data(format!(
                "{}: output already exists and is not an empty directory",
                path.display()
            )));
        }
    }
    let parent = parent_of(path);
    fs::create_dir_all(&parent).map_err(|e| CliError::io(&parent, e))?;
    let tmp = tempfile::Builder::new()
        .prefix(".irisgauge-")
        .tempdir_in(&parent)
        .map_err(|e| CliError::io(&parent, e))?;
    fill(tmp.path())?;
    if path.exists() {
        fs::remove_dir(path).map_err(|e| CliError::io(path, e))?;
    }
    let staged = tmp.keep();
    fs::rename(&staged, path).map_err(|e| {
        let _ = fs::remove_dir_all(&staged);
        CliError::io(path, e)
    })
}
