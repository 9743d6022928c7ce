use std::io::Write;
use std::path::{Path, PathBuf};

use privset_core::coding::{CodingError, Questionnaire};
use privset_core::schema::{SchemaError, SettingsSchema};

const BUNDLED_SCHEMA: &str = include_str!("../data/schema.json");
const BUNDLED_QUESTIONNAIRE: &str = include_str!("../data/questionnaire.json");

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, message: impl ToString) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    /// Problems the caller can fix (bad input, missing file) as opposed to
    /// failures of the program itself.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}

pub fn read_to_string(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place, so a failed write never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    // Temporary files are created owner-only; outputs get ordinary permissions.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let perms = std::fs::Permissions::from_mode(0o644);
        tmp.as_file().set_permissions(perms).map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn parse_schema(text: &str) -> Result<SettingsSchema, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

pub fn emit_schema(schema: &SettingsSchema) -> String {
    let mut s = serde_json::to_string_pretty(schema).expect("schema serializes");
    s.push('\n');
    s
}

pub fn bundled_schema() -> SettingsSchema {
    parse_schema(BUNDLED_SCHEMA).expect("bundled schema is valid")
}

pub fn bundled_questionnaire() -> Questionnaire {
    serde_json::from_str(BUNDLED_QUESTIONNAIRE).expect("bundled questionnaire is valid")
}

/// The schema at `path`, or the bundled default when `path` is `None`.
pub fn load_schema(path: Option<&Path>) -> Result<SettingsSchema, Error> {
    match path {
        None => Ok(bundled_schema()),
        Some(p) => parse_schema(&read_to_string(p)?).map_err(|e| Error::parse(p, e)),
    }
}

pub fn load_questionnaire(path: Option<&Path>) -> Result<Questionnaire, Error> {
    match path {
        None => Ok(bundled_questionnaire()),
        Some(p) => serde_json::from_str(&read_to_string(p)?).map_err(|e| Error::parse(p, e)),
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::parse(path, e))
}

impl From<SchemaError> for Error {
    fn from(e: SchemaError) -> Self {
        Error::Invalid(e.to_string())
    }
}

impl From<CodingError> for Error {
    fn from(e: CodingError) -> Self {
        Error::Invalid(e.to_string())
    }
}
