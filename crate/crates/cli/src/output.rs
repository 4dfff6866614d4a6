//! Output locations and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

pub const OUT_DIR_ENV: &str = "GKP_MAGIC_OUT_DIR";

/// Explicit directory, else `$GKP_MAGIC_OUT_DIR`, else the working directory.
pub fn out_dir(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Creates `dir` if needed and proves it is writable by creating a temp file.
pub fn ensure_writable_dir(dir: &Path) -> CliResult<()> {
    let err = |source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(err)?;
    NamedTempFile::new_in(dir).map_err(err)?;
    Ok(())
}

pub fn ensure_writable_file(path: &Path) -> CliResult<()> {
    if path.is_dir() {
        return Err(CliError::Output {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::IsADirectory, "is a directory"),
        });
    }
    ensure_writable_dir(parent_dir(path))
}

/// Writes through a temp file in the destination directory, then renames.
pub fn write_atomic<F>(path: &Path, fill: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let err = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = NamedTempFile::new_in(parent_dir(path)).map_err(err)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(err)?;
        w.flush().map_err(err)?;
    }
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}
