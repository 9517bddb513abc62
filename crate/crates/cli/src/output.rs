use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

/// Writes `<dir>/<stem>.<ext>` through a temporary file in the same
/// directory, renamed into place once complete.
pub fn write_atomic(dir: &Path, stem: &str, format: Format, bytes: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let perm = std::fs::Permissions::from_mode(0o644);
        tmp.as_file().set_permissions(perm).map_err(|e| CliError::io(tmp.path(), e))?;
    }
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
    Ok(path)
}

pub fn encode_rows<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| CliError::Output(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Output(e.to_string()))
        }
        Format::Json => encode_json(&rows),
    }
}

pub fn encode_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

pub fn write_rows<T: Serialize>(dir: &Path, stem: &str, format: Format, rows: &[T]) -> Result<PathBuf, CliError> {
    write_atomic(dir, stem, format, &encode_rows(rows, format)?)
}
