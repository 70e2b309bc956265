use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::CliError;

/// Where an artifact goes: a file (written atomically) or stdout for `-`.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    /// `explicit` if given, otherwise `default_name` under `out_dir`.
    pub fn resolve(explicit: Option<&Path>, out_dir: &Path, default_name: &str) -> Self {
        match explicit {
            Some(p) if p == Path::new("-") => Sink::Stdout,
            Some(p) => Sink::File(p.to_path_buf()),
            None => Sink::File(out_dir.join(default_name)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Sink::Stdout => "stdout".to_string(),
            Sink::File(p) => p.display().to_string(),
        }
    }

    /// Renders into memory first so that a failed render leaves no partial
    /// file behind.
    pub fn write_with<E>(
        &self,
        render: impl FnOnce(&mut Vec<u8>) -> Result<(), E>,
    ) -> Result<(), CliError>
    where
        CliError: From<E>,
    {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.write_bytes(&buf)
    }

    pub fn write_bytes(&self, bytes: &[u8]) -> Result<(), CliError> {
        match self {
            Sink::Stdout => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::io("stdout", e))
            }
            Sink::File(path) => write_atomic(path, bytes),
        }
    }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::io(dir.display(), e))?;
    let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(dir.display(), e))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::io(path.display(), e))?;
    tmp.persist(path)
        .map_err(|e| CliError::io(path.display(), e.error))?;
    Ok(())
}

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path.display(), e))
}

pub fn to_json<T: serde::Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}
